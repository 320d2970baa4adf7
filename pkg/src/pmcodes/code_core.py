"""Code parameters, the cut-set bound, and the contract every codec implements.

A codec stores a file stripe of ``B`` message symbols across ``n`` nodes,
``alpha`` symbols each.  Any ``k`` nodes reconstruct the stripe, and a
failed node is regenerated exactly from one symbol (``beta = 1``) sent by
each of its helpers.  Node ids are 1-based throughout.
"""

from __future__ import annotations

import abc
import logging
from dataclasses import dataclass
from math import comb
from typing import Sequence

from .errors import (
    BadFieldOverride,
    BadHelperCount,
    BadNodeCount,
    InfeasibleParameters,
    SelfHelp,
    WrongLength,
)
from .ffield import FieldCtx, default_field_size, is_prime
from .matfq import MatrixFq

log = logging.getLogger(__name__)

KINDS = ("MBR", "MSR", "MISER")


def cutset_B(k: int, d: int, alpha: int, beta: int = 1) -> int:
    """Largest file size the cut-set bound admits for these parameters."""
    if k > d:
        raise ValueError("cut-set bound needs k <= d")
    return sum(min(alpha, (d - i) * beta) for i in range(k))


@dataclass(frozen=True)
class CodeParams:
    kind: str
    n: int
    k: int
    d: int
    alpha: int
    beta: int
    B: int
    q: int

    @property
    def ctx(self) -> FieldCtx:
        return FieldCtx(self.q)

    @property
    def label(self) -> str:
        return f"{self.kind}[n={self.n},k={self.k},d={self.d}]"

    def is_optimal(self) -> bool:
        """B meets the cut-set bound with equality, and shrinking alpha or beta breaks it."""
        if cutset_B(self.k, self.d, self.alpha, self.beta) != self.B:
            return False
        if self.alpha > 0 and cutset_B(self.k, self.d, self.alpha - 1, self.beta) >= self.B:
            return False
        if self.beta > 0 and cutset_B(self.k, self.d, self.alpha, self.beta - 1) >= self.B:
            return False
        return True


def check_feasible(kind: str, n: int, k: int, d: int) -> None:
    kind = kind.upper()
    if kind not in KINDS:
        raise InfeasibleParameters(f"unknown code kind {kind!r}")
    if k < 1:
        raise InfeasibleParameters("k must be >= 1")
    if not k <= d <= n - 1:
        raise InfeasibleParameters(f"need k <= d <= n-1, got n={n}, k={k}, d={d}")
    if kind == "MSR":
        if k < 2:
            raise InfeasibleParameters("MSR needs k >= 2")
        if d < 2 * k - 2:
            raise InfeasibleParameters(f"linear MSR codes need d >= 2k-2 = {2 * k - 2}, got d={d}")
    if kind == "MISER":
        if n != d + 1:
            raise InfeasibleParameters(f"MISER needs n = d+1, got n={n}, d={d}")
        if d < 2 * k - 1:
            raise InfeasibleParameters(f"MISER needs d >= 2k-1 = {2 * k - 1}, got d={d}")


def derive_params(kind: str, n: int, k: int, d: int, q: int | None = None) -> CodeParams:
    kind = kind.upper()
    check_feasible(kind, n, k, d)
    if kind == "MBR":
        alpha = d
        B = k * d - comb(k, 2)
    else:
        alpha = d - k + 1
        B = k * alpha
    if q is None:
        q = default_field_size(kind, n)
    elif not isinstance(q, int) or q < 2 or not is_prime(q):
        raise BadFieldOverride(f"field override q={q!r} is not prime")
    params = CodeParams(kind, n, k, d, alpha, 1, B, q)
    assert B == cutset_B(k, d, alpha, 1)
    return params


def repair_bandwidth(params: CodeParams) -> int:
    """Symbols downloaded per stripe to regenerate one node."""
    return params.d * params.beta


def cutset_table(params: CodeParams) -> list[tuple[int, int, int]]:
    """Per-term breakdown ``(i, min(alpha, (d-i) beta), running sum)`` of the bound."""
    rows, total = [], 0
    for i in range(params.k):
        term = min(params.alpha, (params.d - i) * params.beta)
        total += term
        rows.append((i, term, total))
    return rows


class Codec(abc.ABC):
    """Shared contract: encode a stripe, reconstruct from k nodes, regenerate one node.

    Helpers only ever see their own stored row and the failed node's id;
    :meth:`helper_symbol` is the whole helper-side computation.
    """

    params: CodeParams

    @property
    def ctx(self) -> FieldCtx:
        return self._ctx

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def alpha(self) -> int:
        return self.params.alpha

    @property
    def B(self) -> int:
        return self.params.B

    @property
    def helpers_needed(self) -> int:
        return self.params.d

    @abc.abstractmethod
    def encode(self, u: Sequence[int]) -> MatrixFq:
        """Return the n x alpha code matrix for message ``u``."""

    @abc.abstractmethod
    def repair_vector(self, failed_id: int) -> list[int]:
        """The alpha-vector helpers take inner products with when ``failed_id`` is repaired."""

    @abc.abstractmethod
    def repair(self, failed_id: int, helper_ids: Sequence[int], symbols: Sequence[int]) -> list[int]:
        ...

    @abc.abstractmethod
    def reconstruct(self, node_ids: Sequence[int], rows) -> list[int]:
        ...

    def helper_symbol(self, content: Sequence[int], failed_id: int, helper_id: int | None = None) -> int:
        self._check_id(failed_id)
        if helper_id is not None and helper_id == failed_id:
            raise SelfHelp(f"node {failed_id} cannot help repair itself")
        if len(content) != self.alpha:
            raise WrongLength(f"helper content has {len(content)} symbols, expected {self.alpha}")
        return self.ctx.dot(content, self.repair_vector(failed_id))

    # shared validation
    def _message(self, u: Sequence[int]) -> list[int]:
        if len(u) != self.B:
            raise WrongLength(f"message has {len(u)} symbols, expected B={self.B}")
        return [int(x) % self.ctx.q for x in u]

    def _check_id(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise ValueError(f"node id {i} outside 1..{self.n}")

    def _check_repair_args(self, failed_id, helper_ids, symbols) -> None:
        self._check_id(failed_id)
        if failed_id in helper_ids:
            raise SelfHelp(f"node {failed_id} listed as its own helper")
        if len(helper_ids) != self.helpers_needed or len(set(helper_ids)) != len(helper_ids):
            raise BadHelperCount(f"need {self.helpers_needed} distinct helpers, got {list(helper_ids)}")
        if len(symbols) != len(helper_ids):
            raise BadHelperCount("one symbol per helper required")
        for h in helper_ids:
            self._check_id(h)

    def _check_dc_args(self, node_ids, rows) -> list[list[int]]:
        if len(node_ids) != self.k or len(set(node_ids)) != self.k:
            raise BadNodeCount(f"need {self.k} distinct nodes, got {list(node_ids)}")
        for i in node_ids:
            self._check_id(i)
        rows = rows.tolist() if isinstance(rows, MatrixFq) else [list(r) for r in rows]
        if len(rows) != self.k or any(len(r) != self.alpha for r in rows):
            raise WrongLength(f"expected {self.k} rows of {self.alpha} symbols")
        return rows


class ShortenedMixin:
    """Derive an [n, k, d] code from a systematic [n+i, k+i, d+i] parent.

    The parent's first ``i`` systematic nodes are pinned to the zero row
    and then punctured; user node ``j`` is parent node ``j + i``.  Those
    virtual nodes store zeros, so their helper symbols are zero too.
    """

    parent: Codec
    depth: int

    def _short_encode(self, u: list[int]) -> MatrixFq:
        c = self.parent.encode([0] * (self.depth * self.parent.alpha) + u)
        return MatrixFq(c.ctx, c.rows[self.depth:], ncols=c.ncols)

    def _short_repair_vector(self, failed_id: int) -> list[int]:
        return self.parent.repair_vector(failed_id + self.depth)

    def _short_repair(self, failed_id, helper_ids, symbols) -> list[int]:
        i = self.depth
        virtual = list(range(1, i + 1))
        assert all(self.parent.helper_symbol([0] * self.parent.alpha, failed_id + i, v) == 0
                   for v in virtual)
        return self.parent.repair(failed_id + i, virtual + [h + i for h in helper_ids],
                                  [0] * i + list(symbols))

    def _short_reconstruct(self, node_ids, rows) -> list[int]:
        i = self.depth
        zero_rows = [[0] * self.parent.alpha for _ in range(i)]
        u = self.parent.reconstruct(list(range(1, i + 1)) + [j + i for j in node_ids], zero_rows + rows)
        return u[i * self.parent.alpha:]
