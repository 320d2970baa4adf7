"""Product-matrix MBR code, valid for every k <= d <= n-1.

The message matrix is the symmetric d x d matrix ``M = [[S, T], [T^t, 0]]``
and node i stores ``psi_i^t M``.  Because M is symmetric, a replacement
node that learns ``M psi_f`` from d helpers already holds the lost row.
"""

from __future__ import annotations

import logging
from math import comb
from typing import Sequence

from .code_core import Codec, CodeParams, derive_params
from .errors import FieldTooSmall, InternalCorruption, Singular, SingularRepairMatrix, WrongLength
from .matfq import (
    DESK_SCALE_N,
    MatrixFq,
    cauchy,
    hstack,
    invert,
    matmul,
    submatrix,
    vandermonde,
    verify_mbr_psi,
    vstack,
)

log = logging.getLogger(__name__)

VANDERMONDE = "vandermonde"
SYSTEMATIC = "systematic-cauchy"


def mbr_pack_message(params: CodeParams, u: Sequence[int]) -> MatrixFq:
    """Place B symbols into M: S's upper triangle row-major, then T row-major."""
    k, d = params.k, params.d
    if len(u) != params.B:
        raise WrongLength(f"message has {len(u)} symbols, expected B={params.B}")
    it = iter(u)
    m = [[0] * d for _ in range(d)]
    for i in range(k):
        for j in range(i, k):
            m[i][j] = m[j][i] = next(it)
    for i in range(k):
        for j in range(k, d):
            m[i][j] = m[j][i] = next(it)
    return MatrixFq(params.ctx, m, ncols=d)


def mbr_unpack_message(params: CodeParams, m: MatrixFq) -> list[int]:
    k, d = params.k, params.d
    u = [m[i, j] for i in range(k) for j in range(i, k)]
    u += [m[i, j] for i in range(k) for j in range(k, d)]
    return u


class MbrCodec(Codec):
    def __init__(self, params: CodeParams, variant: str = VANDERMONDE, verify: bool | None = None):
        if params.kind != "MBR":
            raise ValueError(f"MbrCodec needs MBR params, got {params.kind}")
        self.params = params
        self._ctx = ctx = params.ctx
        n, k, d = params.n, params.k, params.d
        self.variant = variant
        if variant == VANDERMONDE:
            if n > ctx.q - 1:
                raise FieldTooSmall(f"F_{ctx.q} has fewer than n={n} nonzero points")
            self.psi = vandermonde(ctx, range(1, n + 1), d)
        elif variant == SYSTEMATIC:
            # [phi~ delta~] is Cauchy on xs = 1..n-k, ys = n-k+1..n-k+d.
            if (n - k) + d > ctx.q - 1:
                raise FieldTooSmall(f"F_{ctx.q} lacks {(n - k) + d} distinct nonzero Cauchy points")
            top = hstack(MatrixFq.identity(ctx, k), MatrixFq.zeros(ctx, k, d - k))
            bottom = cauchy(ctx, range(1, n - k + 1), range(n - k + 1, n - k + d + 1))
            self.psi = vstack(top, bottom)
        else:
            raise ValueError(f"unknown MBR variant {variant!r}")
        if verify is None:
            verify = n <= DESK_SCALE_N
        if verify:
            report = verify_mbr_psi(self.psi, k)
            if not report.ok:
                raise FieldTooSmall(f"encoding matrix fails over F_{ctx.q}: {report.failures[0]}")
        else:
            log.info("skipping exhaustive check of %s; relying on %s structure", params.label, variant)
        self._repair_inv: dict[tuple[int, ...], MatrixFq] = {}
        self._dc_inv: dict[tuple[int, ...], MatrixFq] = {}

    @property
    def phi(self) -> MatrixFq:
        return submatrix(self.psi, None, range(self.k))

    @property
    def delta(self) -> MatrixFq:
        return submatrix(self.psi, None, range(self.k, self.d))

    def encoding_vector(self, node_id: int) -> list[int]:
        self._check_id(node_id)
        return list(self.psi.rows[node_id - 1])

    def repair_vector(self, failed_id: int) -> list[int]:
        # alpha = d, so the repair vector is the whole encoding vector.
        return self.encoding_vector(failed_id)

    def pack(self, u: Sequence[int]) -> MatrixFq:
        return mbr_pack_message(self.params, self._message(u))

    def unpack(self, m: MatrixFq) -> list[int]:
        return mbr_unpack_message(self.params, m)

    def encode_matrix(self, m: MatrixFq) -> MatrixFq:
        return matmul(self.psi, m)

    def encode(self, u: Sequence[int]) -> MatrixFq:
        return self.encode_matrix(self.pack(u))

    def repair(self, failed_id: int, helper_ids: Sequence[int], symbols: Sequence[int]) -> list[int]:
        self._check_repair_args(failed_id, helper_ids, symbols)
        key = tuple(helper_ids)
        inv = self._repair_inv.get(key)
        if inv is None:
            try:
                inv = invert(submatrix(self.psi, [h - 1 for h in helper_ids]))
            except Singular as exc:
                raise SingularRepairMatrix(f"repair matrix for helpers {list(helper_ids)} is singular") from exc
            self._repair_inv[key] = inv
        # M psi_f, transposed by symmetry, is the failed node's row.
        m_psi_f = matmul(inv, MatrixFq.column(self.ctx, symbols))
        return m_psi_f.col(0)

    def reconstruct(self, node_ids: Sequence[int], rows) -> list[int]:
        rows = self._check_dc_args(node_ids, rows)
        ctx, k, d = self.ctx, self.k, self.d
        key = tuple(node_ids)
        phi_inv = self._dc_inv.get(key)
        if phi_inv is None:
            try:
                phi_inv = invert(submatrix(self.phi, [i - 1 for i in node_ids]))
            except Singular as exc:
                raise InternalCorruption(f"Phi_DC for nodes {list(node_ids)} is singular") from exc
            self._dc_inv[key] = phi_inv
        y = MatrixFq(ctx, rows, ncols=d)
        # y = [Phi_DC S + Delta_DC T^t,  Phi_DC T]
        t = matmul(phi_inv, submatrix(y, None, range(k, d)))
        delta_dc = submatrix(self.delta, [i - 1 for i in node_ids])
        s = matmul(phi_inv, submatrix(y, None, range(k)) - matmul(delta_dc, t.T))
        m = vstack(hstack(s, t), hstack(t.T, MatrixFq.zeros(ctx, d - k, d - k)))
        return self.unpack(m)


def mbr_build(params: CodeParams, verify: bool | None = None) -> MbrCodec:
    return MbrCodec(params, VANDERMONDE, verify)


def mbr_build_systematic(params: CodeParams, verify: bool | None = None) -> MbrCodec:
    return MbrCodec(params, SYSTEMATIC, verify)


def mbr_codec(n: int, k: int, d: int, q: int | None = None, systematic: bool = False) -> MbrCodec:
    params = derive_params("MBR", n, k, d, q)
    return mbr_build_systematic(params) if systematic else mbr_build(params)
