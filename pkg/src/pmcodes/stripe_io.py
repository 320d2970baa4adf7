"""Striping byte payloads across nodes and the on-disk share format.

Each byte becomes one field symbol, so q must be at least 257.  A stripe
is B consecutive bytes (the last one zero-padded) encoded independently.

Share file layout, little-endian::

    magic  "PMRC"          4 bytes
    version u8 = 1
    kind    u8             1 = MBR, 2 = MSR, 3 = MISER
    reserved u16 = 0
    q, n, k, d, node_index, stripe_count, payload_len   u64 each
    stripe_count * alpha symbols, w bytes each, w = ceil(bitlen(q-1) / 8)
    CRC-32 of everything above, u32

Per-stripe work is linear, so each operation is turned into one matrix
(probing the codec with unit inputs) and applied to all stripes at once.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .code_core import Codec, CodeParams, derive_params
from .codecs import codec_for
from .errors import BadShareCount, CorruptShare, FieldTooSmallForBytes, HeaderMismatch, PMError, SelfHelp
from .systematizer import extract_generator

MAGIC = b"PMRC"
VERSION = 1
KIND_CODES = {"MBR": 1, "MSR": 2, "MISER": 3}
KIND_NAMES = {v: k for k, v in KIND_CODES.items()}
_HEADER = struct.Struct("<4sBBH7Q")
_CRC = struct.Struct("<I")


def symbol_width(q: int) -> int:
    return ((q - 1).bit_length() + 7) // 8


def _linear_apply(x: np.ndarray, a: np.ndarray, q: int) -> np.ndarray:
    """``x @ a mod q`` without int64 overflow."""
    inner = a.shape[0]
    if inner == 0:
        return np.zeros((x.shape[0], a.shape[1]), dtype=np.int64)
    if inner * (q - 1) ** 2 < 2 ** 63:
        return (x.astype(np.int64) @ a.astype(np.int64)) % q
    out = (x.astype(object) @ a.astype(object)) % q
    return out.astype(np.int64)


@dataclass(eq=False)
class Share:
    kind: str
    q: int
    n: int
    k: int
    d: int
    node_index: int
    stripe_count: int
    payload_len: int
    symbols: np.ndarray = field(repr=False)  # stripe_count x alpha

    @property
    def params(self) -> CodeParams:
        return derive_params(self.kind, self.n, self.k, self.d, self.q)

    @property
    def width(self) -> int:
        return symbol_width(self.q)

    def header_key(self) -> tuple:
        return (self.kind, self.q, self.n, self.k, self.d, self.stripe_count, self.payload_len)

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, KIND_CODES[self.kind], 0, self.q, self.n, self.k, self.d,
                            self.node_index, self.stripe_count, self.payload_len)
        w = self.width
        body = b"".join(int(v).to_bytes(w, "little") for v in self.symbols.reshape(-1))
        blob = head + body
        return blob + _CRC.pack(zlib.crc32(blob))

    @classmethod
    def from_bytes(cls, blob: bytes) -> Share:
        if len(blob) < _HEADER.size + _CRC.size:
            raise CorruptShare("share file truncated")
        payload, (crc,) = blob[:-_CRC.size], _CRC.unpack(blob[-_CRC.size:])
        if zlib.crc32(payload) != crc:
            raise CorruptShare("CRC-32 mismatch")
        magic, version, kind, reserved, q, n, k, d, node, stripes, plen = _HEADER.unpack_from(payload)
        if magic != MAGIC or version != VERSION or reserved != 0 or kind not in KIND_NAMES:
            raise CorruptShare(f"bad header magic={magic!r} version={version} kind={kind}")
        kind_name = KIND_NAMES[kind]
        try:
            alpha = derive_params(kind_name, n, k, d, q).alpha
        except PMError as exc:
            raise CorruptShare(f"header parameters are invalid: {exc}") from exc
        w = symbol_width(q)
        body = payload[_HEADER.size:]
        if len(body) != stripes * alpha * w:
            raise CorruptShare(f"body has {len(body)} bytes, expected {stripes * alpha * w}")
        vals = [int.from_bytes(body[i:i + w], "little") for i in range(0, len(body), w)]
        symbols = np.array(vals, dtype=np.int64).reshape(stripes, alpha)
        if symbols.size and symbols.max() >= q:
            raise CorruptShare("symbol outside the field")
        return cls(kind_name, q, n, k, d, node, stripes, plen, symbols)

    def write(self, path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_bytes())
        return path

    @classmethod
    def read(cls, path) -> Share:
        return cls.from_bytes(Path(path).read_bytes())


@dataclass(frozen=True)
class RepairSymbol:
    helper_id: int
    failed_id: int
    stripe_index: int
    value: int


@dataclass(eq=False)
class RepairStream:
    """Everything one helper uploads for one repair: a symbol per stripe."""

    helper_id: int
    failed_id: int
    header: tuple
    values: np.ndarray

    @property
    def nbytes(self) -> int:
        return len(self.values) * symbol_width(self.header[1])

    def __iter__(self) -> Iterator[RepairSymbol]:
        for s, v in enumerate(self.values):
            yield RepairSymbol(self.helper_id, self.failed_id, s, int(v))


def _check_codec(codec: Codec, share: Share) -> None:
    p = codec.params
    if (p.kind, p.q, p.n, p.k, p.d) != share.header_key()[:5]:
        raise HeaderMismatch(f"share is {share.header_key()[:5]}, codec is {p.label} q={p.q}")


def _check_headers(shares: Sequence[Share]) -> None:
    keys = {s.header_key() for s in shares}
    if len(keys) > 1:
        raise HeaderMismatch(f"shares disagree on their headers: {sorted(keys)}")
    ids = [s.node_index for s in shares]
    if len(set(ids)) != len(ids):
        raise BadShareCount(f"duplicate node indices {ids}")


def stripe_count_for(params: CodeParams, payload_len: int) -> int:
    return -(-payload_len // params.B)


def stripe_encode_file(codec: Codec, data: bytes) -> list[Share]:
    p = codec.params
    if p.q < 257:
        raise FieldTooSmallForBytes(f"q={p.q} cannot hold byte values; need q >= 257")
    stripes = stripe_count_for(p, len(data))
    buf = np.zeros(stripes * p.B, dtype=np.int64)
    buf[:len(data)] = np.frombuffer(data, dtype=np.uint8)
    gen = extract_generator(codec).G
    coded = _linear_apply(buf.reshape(stripes, p.B), np.array(gen.rows, dtype=np.int64).reshape(p.B, -1), p.q)
    shares = []
    for i in range(p.n):
        block = coded[:, i * p.alpha:(i + 1) * p.alpha]
        shares.append(Share(p.kind, p.q, p.n, p.k, p.d, i + 1, stripes, len(data), np.ascontiguousarray(block)))
    return shares


def _probe(fn, width: int, out_len: int) -> np.ndarray:
    """Matrix of a linear map by evaluating it on unit vectors (one row per unit)."""
    mat = np.zeros((width, out_len), dtype=np.int64)
    for j in range(width):
        e = [0] * width
        e[j] = 1
        mat[j] = fn(e)
    return mat


def stripe_decode(shares: Sequence[Share], codec: Codec | None = None) -> bytes:
    if not shares:
        raise BadShareCount("no shares given")
    _check_headers(shares)
    first = shares[0]
    if codec is None:
        codec = codec_for(first.params)
    _check_codec(codec, first)
    p = codec.params
    if len(shares) < p.k:
        raise BadShareCount(f"need {p.k} shares, got {len(shares)}")
    used = list(shares[:p.k])
    ids = [s.node_index for s in used]
    a = p.alpha

    def decode_unit(e: list[int]) -> list[int]:
        return codec.reconstruct(ids, [e[r * a:(r + 1) * a] for r in range(p.k)])

    dec = _probe(decode_unit, p.k * a, p.B)
    received = np.hstack([s.symbols for s in used])
    msg = _linear_apply(received, dec, p.q).reshape(-1)
    if msg.size and msg.max() > 255:
        raise CorruptShare("decoded symbol is not a byte; shares are inconsistent")
    return msg.astype(np.uint8).tobytes()[:first.payload_len]


def helper_stream(codec: Codec, share: Share, failed_id: int) -> RepairStream:
    """Helper-side work: uses only the helper's own share and the failed node's id."""
    _check_codec(codec, share)
    if share.node_index == failed_id:
        raise SelfHelp(f"node {failed_id} cannot help repair itself")
    mu = np.array(codec.repair_vector(failed_id), dtype=np.int64).reshape(-1, 1)
    values = _linear_apply(share.symbols, mu, codec.ctx.q).reshape(-1)
    return RepairStream(share.node_index, failed_id, share.header_key(), values)


def stripe_repair(codec: Codec, failed_id: int, streams: Sequence[RepairStream]) -> Share:
    if not streams:
        raise BadShareCount("no repair streams given")
    if len({s.header for s in streams}) > 1:
        raise HeaderMismatch("repair streams come from different files")
    if any(s.failed_id != failed_id for s in streams):
        raise HeaderMismatch("repair streams target a different failed node")
    header = streams[0].header
    p = codec.params
    if (p.kind, p.q, p.n, p.k, p.d) != header[:5]:
        raise HeaderMismatch(f"streams are {header[:5]}, codec is {p.label} q={p.q}")
    helper_ids = [s.helper_id for s in streams]
    rep = _probe(lambda e: codec.repair(failed_id, helper_ids, e), len(streams), p.alpha)
    received = np.stack([s.values for s in streams], axis=1)
    rows = _linear_apply(received, rep, p.q)
    kind, q, n, k, d, stripes, plen = header
    return Share(kind, q, n, k, d, failed_id, stripes, plen, rows)


def repair_traffic(streams: Sequence[RepairStream]) -> int:
    """Bytes downloaded by the replacement node."""
    return sum(s.nbytes for s in streams)
