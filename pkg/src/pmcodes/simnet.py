"""Deterministic in-process storage cluster: fail, repair, collect.

Config is a plain ``key=value`` file::

    kind=mbr
    n=6
    k=3
    d=4
    seed=7
    payload=synthetic:65536        # or a path, relative to the config file
    event=fail:1
    event=repair:1                 # optional :lowest-id (default) or :random
    event=collect:1,2,3

Everything runs on one logical event loop, so the event log, and the
hash over it, depend only on the config.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .code_core import Codec, derive_params
from .codecs import codec_for
from .errors import ConfigError, PMError, RepairBlocked
from .stripe_io import (Share, helper_stream, repair_traffic, stripe_decode, stripe_encode_file, stripe_repair,
                        symbol_width)

log = logging.getLogger(__name__)

POLICIES = ("lowest-id", "random")


@dataclass
class SimConfig:
    kind: str
    n: int
    k: int
    d: int
    q: int | None = None
    seed: int = 0
    payload: str = "synthetic:4096"
    events: list[tuple[str, object, str | None]] = field(default_factory=list)
    spill: str | None = None
    base_dir: Path = field(default_factory=Path.cwd)

    def payload_bytes(self) -> bytes:
        if self.payload.startswith("synthetic:"):
            try:
                size = int(self.payload.split(":", 1)[1])
            except ValueError as exc:
                raise ConfigError(f"bad synthetic payload size in {self.payload!r}") from exc
            return random.Random(f"payload:{self.seed}").randbytes(size)
        path = Path(self.payload)
        if not path.is_absolute():
            path = self.base_dir / path
        try:
            return path.read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read payload {path}: {exc}") from exc


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"{key}={value!r} is not an integer") from exc


def _parse_event(value: str) -> tuple[str, object, str | None]:
    action, _, rest = value.partition(":")
    if action == "fail":
        return "fail", _int("event", rest), None
    if action == "repair":
        node, _, policy = rest.partition(":")
        policy = policy or "lowest-id"
        if policy not in POLICIES:
            raise ConfigError(f"unknown helper policy {policy!r}; use one of {POLICIES}")
        return "repair", _int("event", node), policy
    if action == "collect":
        ids = tuple(_int("event", x) for x in rest.split(",") if x.strip())
        return "collect", ids, None
    raise ConfigError(f"unknown event {value!r}")


def parse_config(text: str, base_dir: Path | None = None) -> SimConfig:
    values: dict[str, str] = {}
    events = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        if key == "event":
            events.append(_parse_event(value))
        elif key in ("kind", "n", "k", "d", "q", "seed", "payload", "spill"):
            values[key] = value
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    missing = [key for key in ("kind", "n", "k", "d") if key not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    cfg = SimConfig(
        kind=values["kind"].upper(),
        n=_int("n", values["n"]),
        k=_int("k", values["k"]),
        d=_int("d", values["d"]),
        q=_int("q", values["q"]) if "q" in values else None,
        seed=_int("seed", values.get("seed", "0")),
        payload=values.get("payload", "synthetic:4096"),
        events=events,
        spill=values.get("spill"),
        base_dir=base_dir or Path.cwd(),
    )
    for action, arg, _ in events:
        ids = arg if action == "collect" else (arg,)
        if any(not 1 <= i <= cfg.n for i in ids):
            raise ConfigError(f"event {action}:{arg} names a node outside 1..{cfg.n}")
    return cfg


def load_config(path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)


@dataclass
class EventRecord:
    seq: int
    action: str
    node: str
    status: str
    helpers: tuple[int, ...] = ()
    symbols_per_stripe: int = 0
    download_bytes: int = 0
    naive_bytes: int = 0
    detail: str = ""

    def line(self) -> str:
        parts = [f"event {self.seq}", self.action, f"node={self.node}", f"status={self.status}"]
        if self.helpers:
            parts.append("helpers=" + ",".join(map(str, self.helpers)))
        if self.action in ("repair", "collect") and self.status not in ("blocked", "failed", "noop"):
            parts.append(f"download_bytes={self.download_bytes}")
        if self.action == "repair" and self.status not in ("blocked", "noop"):
            parts.append(f"naive_bytes={self.naive_bytes}")
        if self.detail:
            parts.append(f"detail={self.detail}")
        return " ".join(parts)


@dataclass
class SimReport:
    label: str
    q: int
    k: int
    d: int
    alpha: int
    B: int
    width: int
    seed: int
    payload_len: int
    stripe_count: int
    payload_sha256: str
    events: list[EventRecord]

    def body_lines(self) -> list[str]:
        out = [
            f"code {self.label} q={self.q} alpha={self.alpha} beta=1 B={self.B} symbol_bytes={self.width}",
            f"payload bytes={self.payload_len} stripes={self.stripe_count} sha256={self.payload_sha256}",
            f"seed={self.seed}",
        ]
        out += [e.line() for e in self.events]
        repairs = [e for e in self.events if e.action == "repair"]
        out.append(
            f"summary repairs_exact={sum(e.status == 'exact' for e in repairs)} "
            f"repairs_blocked={sum(e.status == 'blocked' for e in repairs)} "
            f"collects_ok={sum(e.status == 'ok' for e in self.events if e.action == 'collect')} "
            f"collects_failed={sum(e.status != 'ok' for e in self.events if e.action == 'collect')}"
        )
        return out

    @property
    def hash(self) -> str:
        return hashlib.sha256("\n".join(self.body_lines()).encode()).hexdigest()

    @property
    def blocked(self) -> list[EventRecord]:
        return [e for e in self.events if e.status == "blocked"]

    @property
    def ok(self) -> bool:
        return all(e.status in ("ok", "exact") for e in self.events)

    def text(self) -> str:
        return "\n".join(self.body_lines() + [f"report_hash={self.hash}"]) + "\n"

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seq", "action", "node", "status", "helpers", "symbols_per_stripe",
                    "download_bytes", "naive_bytes"])
        for e in self.events:
            w.writerow([e.seq, e.action, e.node, e.status, " ".join(map(str, e.helpers)),
                        e.symbols_per_stripe, e.download_bytes, e.naive_bytes])
        return buf.getvalue()


class Cluster:
    """n virtual nodes holding shares of one payload."""

    def __init__(self, codec: Codec, payload: bytes, seed: int = 0):
        self.codec = codec
        self.payload = payload
        self.rng = random.Random(f"helpers:{seed}")
        self.original = stripe_encode_file(codec, payload)
        self.shares: dict[int, Share] = {s.node_index: s for s in self.original}
        self.width = symbol_width(codec.params.q)
        self.stripe_count = self.original[0].stripe_count

    @property
    def alive(self) -> list[int]:
        return sorted(self.shares)

    def fail(self, node: int) -> None:
        self.shares.pop(node, None)

    def choose_helpers(self, failed: int, policy: str = "lowest-id") -> list[int]:
        candidates = [i for i in self.alive if i != failed]
        need = self.codec.helpers_needed
        if len(candidates) < need:
            raise RepairBlocked(f"node {failed}: {len(candidates)} alive helpers, need {need}")
        if policy == "random":
            return sorted(self.rng.sample(candidates, need))
        return candidates[:need]

    def repair(self, failed: int, policy: str = "lowest-id") -> tuple[list[int], int, bool]:
        """Regenerate ``failed``; returns (helpers, bytes downloaded, exact?)."""
        helpers = self.choose_helpers(failed, policy)
        # Each helper sees only its own share and the failed node's id.
        streams = [helper_stream(self.codec, self.shares[h], failed) for h in helpers]
        rebuilt = stripe_repair(self.codec, failed, streams)
        exact = rebuilt.to_bytes() == self.original[failed - 1].to_bytes()
        self.shares[failed] = rebuilt
        return helpers, repair_traffic(streams), exact

    def collect(self, ids: Sequence[int]) -> bytes:
        return stripe_decode([self.shares[i] for i in ids], self.codec)


def sim_run(config: SimConfig) -> SimReport:
    try:
        params = derive_params(config.kind, config.n, config.k, config.d, config.q)
    except PMError as exc:
        raise ConfigError(str(exc)) from exc
    codec = codec_for(params)
    payload = config.payload_bytes()
    cluster = Cluster(codec, payload, config.seed)
    w = cluster.width
    stripes = cluster.stripe_count
    events: list[EventRecord] = []
    for seq, (action, arg, policy) in enumerate(config.events, 1):
        if action == "fail":
            status = "ok" if arg in cluster.shares else "noop"
            cluster.fail(arg)
            events.append(EventRecord(seq, "fail", str(arg), status))
        elif action == "repair":
            if arg in cluster.shares:
                events.append(EventRecord(seq, "repair", str(arg), "noop", detail="node-alive"))
                continue
            try:
                helpers, nbytes, exact = cluster.repair(arg, policy)
            except RepairBlocked as exc:
                log.info("repair blocked: %s", exc)
                events.append(EventRecord(seq, "repair", str(arg), "blocked", detail=f"alive={len(cluster.alive)}"))
                continue
            events.append(EventRecord(
                seq, "repair", str(arg), "exact" if exact else "mismatch", tuple(helpers),
                symbols_per_stripe=len(helpers), download_bytes=nbytes,
                naive_bytes=stripes * params.B * w))
        else:
            ids = arg
            node = ",".join(map(str, ids))
            missing = [i for i in ids if i not in cluster.shares]
            if missing or len(ids) != params.k:
                detail = f"unavailable={','.join(map(str, missing))}" if missing else f"need-{params.k}-nodes"
                events.append(EventRecord(seq, "collect", node, "failed", detail=detail))
                continue
            got = cluster.collect(ids)
            status = "ok" if hashlib.sha256(got).digest() == hashlib.sha256(payload).digest() else "mismatch"
            events.append(EventRecord(seq, "collect", node, status, symbols_per_stripe=params.k * params.alpha,
                                      download_bytes=stripes * params.k * params.alpha * w))
    if config.spill:
        spill = Path(config.spill)
        if not spill.is_absolute():
            spill = config.base_dir / spill
        spill.mkdir(parents=True, exist_ok=True)
        for i, share in sorted(cluster.shares.items()):
            share.write(spill / f"share_{i}.pmrc")
    return SimReport(params.label, params.q, params.k, params.d, params.alpha, params.B, w, config.seed,
                     len(payload), stripes, hashlib.sha256(payload).hexdigest(), events)


@dataclass(frozen=True)
class MetricRow:
    seq: int
    node: str
    helpers: int
    repair_symbols: int
    naive_symbols: int
    repair_bytes: int
    naive_bytes: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.repair_symbols, self.naive_symbols)


def sim_metrics(report: SimReport) -> list[MetricRow]:
    """Per-repair download versus fetching the whole stripe (B symbols)."""
    rows = []
    for e in report.events:
        if e.action != "repair" or e.status in ("blocked", "noop"):
            continue
        per_stripe = report.d * 1
        if e.symbols_per_stripe != per_stripe or e.download_bytes != per_stripe * report.width * report.stripe_count:
            raise AssertionError(f"event {e.seq}: download is not d*beta symbols per stripe")
        rows.append(MetricRow(e.seq, e.node, len(e.helpers), per_stripe, report.B,
                              e.download_bytes, e.naive_bytes))
    return rows


def metrics_table(rows: Sequence[MetricRow]) -> str:
    lines = ["seq node helpers repair_sym/stripe naive_sym/stripe ratio repair_bytes naive_bytes"]
    for r in rows:
        lines.append(f"{r.seq} {r.node} {r.helpers} {r.repair_symbols} {r.naive_symbols} "
                     f"{r.ratio} {r.repair_bytes} {r.naive_bytes}")
    return "\n".join(lines) + "\n"
