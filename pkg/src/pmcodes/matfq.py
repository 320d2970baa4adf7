"""Dense matrices over a prime field, plus the structured encoding matrices.

Entries are stored as ``int`` residues in a tuple of row tuples.  All
operations return new matrices; nothing mutates in place.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    DegeneratePoints,
    DimensionMismatch,
    DuplicatePoint,
    FieldMismatch,
    Inconsistent,
    IndexOutOfRange,
    Singular,
    ZeroPoint,
)
from .ffield import FieldCtx, FieldElement

log = logging.getLogger(__name__)

# Constructors run the exhaustive subset checks only up to this many nodes.
DESK_SCALE_N = 12


class MatrixFq:
    __slots__ = ("ctx", "rows", "nrows", "ncols")

    def __init__(self, ctx: FieldCtx, rows: Iterable[Iterable[int]], ncols: int | None = None):
        q = ctx.q
        data = tuple(tuple(int(x) % q for x in r) for r in rows)
        if data:
            width = len(data[0])
            if any(len(r) != width for r in data):
                raise DimensionMismatch("ragged rows")
            if ncols is not None and ncols != width:
                raise DimensionMismatch(f"expected {ncols} columns, got {width}")
        else:
            width = ncols or 0
        self.ctx = ctx
        self.rows = data
        self.nrows = len(data)
        self.ncols = width

    # construction helpers
    @classmethod
    def zeros(cls, ctx: FieldCtx, nrows: int, ncols: int) -> MatrixFq:
        return cls(ctx, [[0] * ncols for _ in range(nrows)], ncols=ncols)

    @classmethod
    def identity(cls, ctx: FieldCtx, n: int) -> MatrixFq:
        return cls(ctx, [[int(i == j) for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def column(cls, ctx: FieldCtx, values: Sequence[int]) -> MatrixFq:
        return cls(ctx, [[v] for v in values], ncols=1)

    @classmethod
    def row(cls, ctx: FieldCtx, values: Sequence[int]) -> MatrixFq:
        return cls(ctx, [list(values)], ncols=len(values))

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def element(self, i: int, j: int) -> FieldElement:
        return FieldElement(self.ctx, self.rows[i][j])

    def col(self, j: int) -> list[int]:
        return [r[j] for r in self.rows]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def flat(self) -> list[int]:
        return [x for r in self.rows for x in r]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixFq):
            return NotImplemented
        return self.ctx == other.ctx and self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.ctx.q, self.shape, self.rows))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self.rows)
        return f"MatrixFq(q={self.ctx.q}, {self.nrows}x{self.ncols}, [{body}])"

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    def __matmul__(self, other: MatrixFq) -> MatrixFq:
        return matmul(self, other)

    def __add__(self, other: MatrixFq) -> MatrixFq:
        _same_ctx(self, other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return MatrixFq(self.ctx, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                        ncols=self.ncols)

    def __sub__(self, other: MatrixFq) -> MatrixFq:
        _same_ctx(self, other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return MatrixFq(self.ctx, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                        ncols=self.ncols)

    def scale(self, c: int) -> MatrixFq:
        return MatrixFq(self.ctx, [[c * x for x in r] for r in self.rows], ncols=self.ncols)

    @property
    def T(self) -> MatrixFq:
        return transpose(self)


def _same_ctx(a: MatrixFq, b: MatrixFq) -> None:
    if a.ctx != b.ctx:
        raise FieldMismatch(f"F_{a.ctx.q} vs F_{b.ctx.q}")


def matmul(a: MatrixFq, b: MatrixFq) -> MatrixFq:
    _same_ctx(a, b)
    if a.ncols != b.nrows:
        raise DimensionMismatch(f"{a.shape} @ {b.shape}")
    cols = list(zip(*b.rows)) if b.nrows else [()] * b.ncols
    return MatrixFq(a.ctx, [[sum(x * y for x, y in zip(r, c)) for c in cols] for r in a.rows],
                    ncols=b.ncols)


def transpose(a: MatrixFq) -> MatrixFq:
    if a.nrows == 0:
        return MatrixFq.zeros(a.ctx, a.ncols, 0)
    return MatrixFq(a.ctx, zip(*a.rows), ncols=a.nrows)


def submatrix(a: MatrixFq, row_ids: Sequence[int] | None = None,
              col_ids: Sequence[int] | None = None) -> MatrixFq:
    """Select rows and columns (0-based, in the given order); ``None`` means all."""
    rids = range(a.nrows) if row_ids is None else list(row_ids)
    cids = range(a.ncols) if col_ids is None else list(col_ids)
    for i in rids:
        if not 0 <= i < a.nrows:
            raise IndexOutOfRange(f"row {i} not in [0, {a.nrows})")
    for j in cids:
        if not 0 <= j < a.ncols:
            raise IndexOutOfRange(f"column {j} not in [0, {a.ncols})")
    return MatrixFq(a.ctx, [[a.rows[i][j] for j in cids] for i in rids], ncols=len(cids))


def hstack(*blocks: MatrixFq) -> MatrixFq:
    ctx = blocks[0].ctx
    nrows = blocks[0].nrows
    for b in blocks:
        _same_ctx(blocks[0], b)
        if b.nrows != nrows:
            raise DimensionMismatch("hstack row counts differ")
    return MatrixFq(ctx, [sum((b.rows[i] for b in blocks), ()) for i in range(nrows)],
                    ncols=sum(b.ncols for b in blocks))


def vstack(*blocks: MatrixFq) -> MatrixFq:
    ctx = blocks[0].ctx
    ncols = blocks[0].ncols
    for b in blocks:
        _same_ctx(blocks[0], b)
        if b.ncols != ncols:
            raise DimensionMismatch("vstack column counts differ")
    return MatrixFq(ctx, [r for b in blocks for r in b.rows], ncols=ncols)


def _rref(ctx: FieldCtx, rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Gauss-Jordan elimination in place; returns (rows, pivot columns)."""
    q = ctx.q
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], q - 2, q)
        rows[r] = [x * inv % q for x in rows[r]]
        pr = rows[r]
        for i in range(len(rows)):
            f = rows[i][c]
            if i != r and f:
                rows[i] = [(x - f * y) % q for x, y in zip(rows[i], pr)]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rref(a: MatrixFq) -> MatrixFq:
    rows, _ = _rref(a.ctx, a.tolist(), a.ncols)
    return MatrixFq(a.ctx, rows, ncols=a.ncols)


def rank(a: MatrixFq) -> int:
    return len(_rref(a.ctx, a.tolist(), a.ncols)[1])


def nullspace(a: MatrixFq) -> list[list[int]]:
    """Basis of the right kernel ``{x : a x = 0}``."""
    rows, pivots = _rref(a.ctx, a.tolist(), a.ncols)
    free = [c for c in range(a.ncols) if c not in pivots]
    q = a.ctx.q
    basis = []
    for f in free:
        x = [0] * a.ncols
        x[f] = 1
        for r, c in zip(rows, pivots):
            x[c] = -r[f] % q
        basis.append(x)
    return basis


def invert(a: MatrixFq) -> MatrixFq:
    n = a.nrows
    if a.ncols != n:
        raise DimensionMismatch(f"cannot invert a {a.shape} matrix")
    aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(a.rows)]
    rows, pivots = _rref(a.ctx, aug, n)
    if len(pivots) < n:
        raise Singular(f"{n}x{n} matrix has rank {len(pivots)}")
    return MatrixFq(a.ctx, [r[n:] for r in rows], ncols=n)


def solve(a: MatrixFq, b: Sequence[int]) -> list[int]:
    """One solution x of a x = b (free variables set to 0)."""
    if len(b) != a.nrows:
        raise DimensionMismatch(f"rhs length {len(b)} != {a.nrows}")
    aug = [list(r) + [v] for r, v in zip(a.rows, b)]
    rows, pivots = _rref(a.ctx, aug, a.ncols + 1)
    if a.ncols in pivots:
        raise Inconsistent("system has no solution")
    x = [0] * a.ncols
    for r, c in zip(rows, pivots):
        x[c] = r[a.ncols]
    return x


def vandermonde(ctx: FieldCtx, points: Sequence[int], width: int) -> MatrixFq:
    """Rows ``[1, x, x^2, ..., x^(width-1)]`` for each evaluation point ``x``."""
    if not points or width < 1:
        raise ValueError("need at least one point and width >= 1")
    pts = [int(p) % ctx.q for p in points]
    if len(set(pts)) != len(pts):
        raise DuplicatePoint(f"evaluation points {pts} are not distinct")
    if 0 in pts:
        raise ZeroPoint("0 is not allowed as an evaluation point")
    return MatrixFq(ctx, [[pow(x, e, ctx.q) for e in range(width)] for x in pts], ncols=width)


def cauchy(ctx: FieldCtx, xs: Sequence[int], ys: Sequence[int]) -> MatrixFq:
    """Entry (i, j) is ``1 / (x_i - y_j)``."""
    xs = [int(x) % ctx.q for x in xs]
    ys = [int(y) % ctx.q for y in ys]
    if len(set(xs)) != len(xs) or len(set(ys)) != len(ys) or set(xs) & set(ys):
        raise DegeneratePoints("Cauchy points must be pairwise distinct and disjoint")
    return MatrixFq(ctx, [[ctx.inv(x - y) for y in ys] for x in xs], ncols=len(ys))


@dataclass
class VerifyReport:
    ok: bool = True
    checks: int = 0
    failures: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)

    @property
    def witness(self) -> tuple[int, ...] | None:
        return self.failures[0][1] if self.failures else None

    def fail(self, what: str, subset: tuple[int, ...]) -> None:
        self.ok = False
        self.failures.append((what, subset))

    def lines(self) -> list[str]:
        out = [f"checks={self.checks} result={'PASS' if self.ok else 'FAIL'}"]
        out += [f"  {what}: rows {list(s)}" for what, s in self.failures]
        return out


def _subset_ranks(report: VerifyReport, a: MatrixFq, size: int, label: str) -> None:
    # Witness rows are reported 1-based (node ids); only the first failure is kept.
    for rows in itertools.combinations(range(a.nrows), size):
        report.checks += 1
        if rank(submatrix(a, rows)) < size:
            report.fail(label, tuple(r + 1 for r in rows))
            return


def verify_mbr_psi(psi: MatrixFq, k: int) -> VerifyReport:
    """Exhaustively check the two MBR conditions on ``psi = [phi delta]``.

    Every d-row subset of psi must have full rank and every k-row subset
    of the first k columns must have full rank.
    """
    d = psi.ncols
    report = VerifyReport()
    _subset_ranks(report, psi, d, f"{d} rows of Psi dependent")
    _subset_ranks(report, submatrix(psi, None, range(k)), k, f"{k} rows of Phi dependent")
    return report


def verify_msr_psi(phi: MatrixFq, lambdas: Sequence[int], d: int) -> VerifyReport:
    """Exhaustively check the MSR conditions on ``psi = [phi  Lambda phi]``."""
    ctx = phi.ctx
    alpha = phi.ncols
    report = VerifyReport()
    if len(lambdas) != phi.nrows:
        raise DimensionMismatch("one lambda per row of phi required")
    lam_phi = MatrixFq(ctx, [[lam * x for x in r] for lam, r in zip(lambdas, phi.rows)], ncols=alpha)
    psi = hstack(phi, lam_phi)
    if psi.ncols != d:
        raise DimensionMismatch(f"[phi, Lambda phi] has {psi.ncols} columns, expected d={d}")
    _subset_ranks(report, psi, d, f"{d} rows of Psi dependent")
    _subset_ranks(report, phi, alpha, f"{alpha} rows of Phi dependent")
    seen: dict[int, int] = {}
    for i, lam in enumerate(lambdas):
        report.checks += 1
        lam %= ctx.q
        if lam in seen:
            report.fail("lambda values collide", (seen[lam] + 1, i + 1))
        seen.setdefault(lam, i)
    return report
