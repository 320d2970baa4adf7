"""Product-matrix form of the MISER code, [n = d+1, k, d >= 2k-1].

At d = 2k-1 the k x k message block S is arbitrary (k^2 symbols), the
message matrix is ``M = [S; S^t]`` (2k rows, not d), and

    Psi = [[I, 0], [Phi, rho Phi]]      C = [[S], [Phi (S + rho S^t)]]

with Phi a k x k Cauchy matrix and rho != 0, rho^2 != 1.  Repair always
uses all n-1 surviving nodes.  Larger d shortens a d' = 2k'-1 parent.
"""

from __future__ import annotations

import itertools
import logging
from typing import Sequence

from .code_core import Codec, CodeParams, ShortenedMixin, derive_params
from .errors import BadHelperCount, FieldTooSmall, InternalCorruption, Singular, WrongBranch
from .matfq import DESK_SCALE_N, MatrixFq, cauchy, hstack, invert, matmul, rank, submatrix, vstack

log = logging.getLogger(__name__)


def default_rho(q: int) -> int:
    for r in range(1, q):
        if r * r % q != 1:
            return r
    raise FieldTooSmall(f"F_{q} has no rho with rho != 0 and rho^2 != 1")


class MiserCodec(ShortenedMixin, Codec):
    def __init__(self, params: CodeParams, rho: int | None = None, verify: bool | None = None):
        if params.kind != "MISER":
            raise ValueError(f"MiserCodec needs MISER params, got {params.kind}")
        n, k, d = params.n, params.k, params.d
        self.params = params
        self._ctx = ctx = params.ctx
        q = ctx.q
        self.depth = d - (2 * k - 1)
        if self.depth > 0:
            i = self.depth
            parent = CodeParams("MISER", n + i, k + i, d + i, params.alpha, 1, (k + i) * params.alpha, q)
            self.parent = MiserCodec(parent, rho=rho, verify=verify)
            self.rho = self.parent.rho
            return

        self.rho = default_rho(q) if rho is None else rho % q
        if self.rho == 0 or self.rho * self.rho % q == 1:
            raise ValueError(f"rho={rho} must satisfy rho != 0 and rho^2 != 1 over F_{q}")
        if 2 * k > q - 1:
            raise FieldTooSmall(f"F_{q} lacks 2k={2 * k} distinct nonzero Cauchy points")
        self.phi = cauchy(ctx, range(1, k + 1), range(k + 1, 2 * k + 1))
        top = hstack(MatrixFq.identity(ctx, k), MatrixFq.zeros(ctx, k, k))
        self.psi = vstack(top, hstack(self.phi, self.phi.scale(self.rho)))
        if verify is None:
            verify = n <= DESK_SCALE_N
        if verify:
            for size in range(1, k + 1):
                for rows in itertools.combinations(range(k), size):
                    for cols in itertools.combinations(range(k), size):
                        if rank(submatrix(self.phi, rows, cols)) < size:
                            raise FieldTooSmall(f"Cauchy minor rows={rows} cols={cols} is singular")
        self._inv_cache: dict[tuple, MatrixFq] = {}

    @property
    def helpers_needed(self) -> int:
        return self.n - 1

    def is_systematic(self, node_id: int) -> bool:
        return node_id <= self.k

    def encoding_vector(self, node_id: int) -> list[int]:
        self._check_id(node_id)
        if self.depth:
            return self.parent.encoding_vector(node_id + self.depth)
        return list(self.psi.rows[node_id - 1])

    def repair_vector(self, failed_id: int) -> list[int]:
        self._check_id(failed_id)
        if self.depth:
            return self._short_repair_vector(failed_id)
        return self.encoding_vector(failed_id)[:self.k]

    def message_matrix(self, u: Sequence[int]) -> MatrixFq:
        k = self.k
        s = MatrixFq(self.ctx, [u[r * k:(r + 1) * k] for r in range(k)], ncols=k)
        return vstack(s, s.T)

    def encode(self, u: Sequence[int]) -> MatrixFq:
        u = self._message(u)
        if self.depth:
            return self._short_encode(u)
        return matmul(self.psi, self.message_matrix(u))

    def _inverse(self, key: tuple, build) -> MatrixFq:
        inv = self._inv_cache.get(key)
        if inv is None:
            try:
                inv = invert(build())
            except Singular as exc:
                raise InternalCorruption(f"matrix {key} should be non-singular") from exc
            self._inv_cache[key] = inv
        return inv

    # repair
    def _helper_map(self, failed_id, helper_ids, symbols) -> dict[int, int]:
        self._check_repair_args(failed_id, helper_ids, symbols)
        expected = set(range(1, self.n + 1)) - {failed_id}
        if set(helper_ids) != expected:
            raise BadHelperCount(f"MISER repair needs every other node as helper, got {list(helper_ids)}")
        return dict(zip(helper_ids, (int(s) % self.ctx.q for s in symbols)))

    def systematic_intermediate(self, failed_id: int, helper_ids, symbols) -> list[int]:
        """``(S + rho S^t) e_i`` as seen by the replacement for systematic node i."""
        sym = self._helper_map(failed_id, helper_ids, symbols)
        k = self.k
        parity = MatrixFq.column(self.ctx, [sym[k + p] for p in range(1, k + 1)])
        phi_inv = self._inverse(("phi",), lambda: self.phi)
        return matmul(phi_inv, parity).col(0)

    def repair_systematic(self, failed_id: int, helper_ids: Sequence[int], symbols: Sequence[int]) -> list[int]:
        if self.depth:
            raise ValueError("branch repairs are defined on the d = 2k-1 code; use repair()")
        if not self.is_systematic(failed_id):
            raise WrongBranch(f"node {failed_id} is a parity node")
        ctx, k, rho, i = self.ctx, self.k, self.rho, failed_id
        sym = self._helper_map(failed_id, helper_ids, symbols)
        y = self.systematic_intermediate(failed_id, helper_ids, symbols)

        def build() -> MatrixFq:
            ident = MatrixFq.identity(ctx, k)
            i_tilde = submatrix(ident, [r for r in range(k) if r != i - 1])
            e_i = ident.rows[i - 1]
            last = MatrixFq.row(ctx, [rho * x for x in e_i] + list(e_i))
            return vstack(hstack(i_tilde, MatrixFq.zeros(ctx, k - 1, k)),
                          hstack(self.phi, self.phi.scale(rho)), last)

        inv = self._inverse(("sys", i), build)
        rhs = [sym[j] for j in range(1, k + 1) if j != i]
        rhs += [sym[k + p] for p in range(1, k + 1)]
        rhs.append(y[i - 1])
        x = matmul(inv, MatrixFq.column(ctx, rhs)).col(0)
        return x[k:]  # S^t e_i, i.e. row i of S

    def repair_parity(self, failed_id: int, helper_ids: Sequence[int], symbols: Sequence[int]) -> list[int]:
        if self.depth:
            raise ValueError("branch repairs are defined on the d = 2k-1 code; use repair()")
        if self.is_systematic(failed_id):
            raise WrongBranch(f"node {failed_id} is a systematic node")
        ctx, k, rho, q = self.ctx, self.k, self.rho, self.ctx.q
        sym = self._helper_map(failed_id, helper_ids, symbols)
        f = failed_id - k  # row of Phi
        others = [p for p in range(1, k + 1) if p != f]
        phi_f = self.phi.rows[f - 1]
        s_phi = [sym[j] for j in range(1, k + 1)]
        scalar = sum(a * b for a, b in zip(s_phi, phi_f)) % q  # phi_f^t S^t phi_f

        def build() -> MatrixFq:
            phi_rest = submatrix(self.phi, [p - 1 for p in others])
            return vstack(hstack(MatrixFq.identity(ctx, k), MatrixFq.zeros(ctx, k, k)),
                          hstack(phi_rest, phi_rest.scale(rho)),
                          MatrixFq.row(ctx, [0] * k + list(phi_f)))

        inv = self._inverse(("par", f), build)
        rhs = s_phi + [sym[k + p] for p in others] + [scalar]
        x = matmul(inv, MatrixFq.column(ctx, rhs)).col(0)
        s_col, st_col = x[:k], x[k:]
        return [(a + rho * b) % q for a, b in zip(st_col, s_col)]

    def repair(self, failed_id: int, helper_ids: Sequence[int], symbols: Sequence[int]) -> list[int]:
        if self.depth:
            self._check_repair_args(failed_id, helper_ids, symbols)
            return self._short_repair(failed_id, helper_ids, symbols)
        if self.is_systematic(failed_id):
            return self.repair_systematic(failed_id, helper_ids, symbols)
        return self.repair_parity(failed_id, helper_ids, symbols)

    # reconstruction
    def reconstruct(self, node_ids: Sequence[int], rows) -> list[int]:
        rows = self._check_dc_args(node_ids, rows)
        if self.depth:
            return self._short_reconstruct(list(node_ids), rows)
        ctx, k, rho, q = self.ctx, self.k, self.rho, self.ctx.q
        got = dict(zip(node_ids, rows))
        P = sorted(i for i in node_ids if i <= k)
        Q = sorted(i - k for i in node_ids if i > k)
        T = [t for t in range(1, k + 1) if t not in P]
        s = [[None] * k for _ in range(k)]
        for p in P:
            s[p - 1] = list(got[p])
        if T:
            R = {qq: got[qq + k] for qq in Q}  # phi_q^t (S + rho S^t)
            phi = self.phi
            phi_qt_inv = self._inverse(("dc", tuple(Q), tuple(T)),
                                       lambda: submatrix(phi, [x - 1 for x in Q], [t - 1 for t in T]))
            # Columns P: Phi_(Q,T) S_(T,P) = R_(Q,P) - rho Phi_(Q,all) S_(P,all)^t - Phi_(Q,P) S_(P,P)
            if P:
                rhs = []
                for qq in Q:
                    row_phi = phi.rows[qq - 1]
                    rhs.append([
                        (R[qq][p - 1]
                         - rho * sum(row_phi[c] * s[p - 1][c] for c in range(k))
                         - sum(row_phi[pp - 1] * s[pp - 1][p - 1] for pp in P)) % q
                        for p in P])
                s_tp = matmul(phi_qt_inv, MatrixFq(ctx, rhs, ncols=len(P)))
                for a, t in enumerate(T):
                    for b, p in enumerate(P):
                        s[t - 1][p - 1] = s_tp[a, b]
            # Columns T: Phi_(Q,T) X_(T,T) = R_(Q,T) - Phi_(Q,P) X_(P,T),  X = S + rho S^t
            rhs = []
            for qq in Q:
                row_phi = phi.rows[qq - 1]
                rhs.append([
                    (R[qq][t - 1]
                     - sum(row_phi[p - 1] * (s[p - 1][t - 1] + rho * s[t - 1][p - 1]) for p in P)) % q
                    for t in T])
            x_tt = matmul(phi_qt_inv, MatrixFq(ctx, rhs, ncols=len(T)))
            inv_1p = ctx.inv(1 + rho)
            inv_1m = ctx.inv(1 - rho * rho)
            for a, t in enumerate(T):
                s[t - 1][t - 1] = x_tt[a, a] * inv_1p % q
                for b in range(a + 1, len(T)):
                    j = T[b]
                    x_lj, x_jl = x_tt[a, b], x_tt[b, a]
                    s[t - 1][j - 1] = (x_lj - rho * x_jl) * inv_1m % q
                    s[j - 1][t - 1] = (x_jl - rho * x_lj) * inv_1m % q
        return [x for r in s for x in r]


def miser_build(params: CodeParams, rho: int | None = None, verify: bool | None = None) -> MiserCodec:
    return MiserCodec(params, rho=rho, verify=verify)


# The shortening wrapper is built into the codec; extend is the same entry point.
miser_extend = miser_build


def miser_codec(n: int, k: int, d: int, q: int | None = None, rho: int | None = None) -> MiserCodec:
    return MiserCodec(derive_params("MISER", n, k, d, q), rho=rho)
