"""Product-matrix MSR code for d >= 2k-2.

At d = 2k-2 the message matrix stacks two symmetric alpha x alpha blocks,
``M = [S1; S2]``, and ``Psi = [Phi  Lambda Phi]`` with distinct lambdas.
Larger d is reached by shortening a systematic parent code with
d' = 2k'-2 (see :class:`~pmcodes.code_core.ShortenedMixin`).
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Sequence

from .code_core import Codec, CodeParams, ShortenedMixin, derive_params
from .errors import (
    DependentBasis,
    FieldTooSmall,
    InfeasibleParameters,
    InternalCorruption,
    Singular,
    SingularRepairMatrix,
    WrongLength,
)
from .matfq import (
    DESK_SCALE_N,
    MatrixFq,
    invert,
    matmul,
    rank,
    solve,
    submatrix,
    vandermonde,
    verify_msr_psi,
    vstack,
)

log = logging.getLogger(__name__)


def _sym_fill(ctx, alpha: int, symbols: Sequence[int]) -> MatrixFq:
    it = iter(symbols)
    s = [[0] * alpha for _ in range(alpha)]
    for i in range(alpha):
        for j in range(i, alpha):
            s[i][j] = s[j][i] = next(it)
    return MatrixFq(ctx, s, ncols=alpha)


def _upper(s: MatrixFq) -> list[int]:
    return [s[i, j] for i in range(s.nrows) for j in range(i, s.ncols)]


def msr_pack_message(ctx, alpha: int, u: Sequence[int]) -> tuple[MatrixFq, MatrixFq]:
    """Split ``alpha(alpha+1)`` symbols into the symmetric pair (S1, S2)."""
    half = alpha * (alpha + 1) // 2
    if len(u) != 2 * half:
        raise WrongLength(f"message has {len(u)} symbols, expected {2 * half}")
    return _sym_fill(ctx, alpha, u[:half]), _sym_fill(ctx, alpha, u[half:])


def msr_unpack_message(s1: MatrixFq, s2: MatrixFq) -> list[int]:
    return _upper(s1) + _upper(s2)


def choose_points(q: int, alpha: int, n: int) -> list[int]:
    """Scan x = 1, 2, ... and keep x whenever x^alpha has not been seen."""
    seen, points = set(), []
    for x in range(1, q):
        lam = pow(x, alpha, q)
        if lam not in seen:
            seen.add(lam)
            points.append(x)
            if len(points) == n:
                return points
    raise FieldTooSmall(f"F_{q} has only {len(points)} points with distinct x^{alpha}, need {n}")


@dataclass(frozen=True)
class IaWitness:
    """Helper ``helper_id``'s symbol split into desired and interference parts.

    ``psi_l^t M phi_f == psi_f^t M b + sum_i a_i psi_i^t M phi_f`` for every M.
    """

    failed_id: int
    helper_id: int
    basis_ids: tuple[int, ...]
    a: tuple[int, ...]
    b: tuple[int, ...]

    def residual(self, codec: MsrCodec, u: Sequence[int]) -> int:
        """lhs - rhs of the identity for message ``u`` (0 when it holds)."""
        ctx = codec.ctx
        s1, s2 = msr_pack_message(ctx, codec.alpha, u)
        m = vstack(s1, s2)

        def form(x_id: int, vec: Sequence[int]) -> int:
            psi = MatrixFq.row(ctx, codec.encoding_vector(x_id))
            return matmul(matmul(psi, m), MatrixFq.column(ctx, vec))[0, 0]

        phi_f = codec.repair_vector(self.failed_id)
        lhs = form(self.helper_id, phi_f)
        rhs = form(self.failed_id, self.b)
        for a_i, i in zip(self.a, self.basis_ids):
            rhs += a_i * form(i, phi_f)
        return (lhs - rhs) % ctx.q


class MsrCodec(ShortenedMixin, Codec):
    def __init__(self, params: CodeParams, systematic_ids: Sequence[int] | None = None,
                 points: Sequence[int] | None = None, verify: bool | None = None):
        if params.kind != "MSR":
            raise ValueError(f"MsrCodec needs MSR params, got {params.kind}")
        n, k, d = params.n, params.k, params.d
        if d < 2 * k - 2 or k < 2:
            raise InfeasibleParameters(f"MSR needs k >= 2 and d >= 2k-2, got k={k}, d={d}")
        self.params = params
        self._ctx = ctx = params.ctx
        self.depth = d - 2 * k + 2
        self.systematic_ids = None
        if systematic_ids is not None:
            ids = tuple(systematic_ids)
            if len(ids) != k or len(set(ids)) != k or not all(1 <= i <= n for i in ids):
                raise ValueError(f"need {k} distinct systematic ids in 1..{n}, got {list(ids)}")
            self.systematic_ids = ids
        self._repair_inv: dict[tuple[int, ...], MatrixFq] = {}
        self._dc_cache: dict[tuple[int, ...], tuple] = {}

        if self.depth > 0:
            i = self.depth
            parent = CodeParams("MSR", n + i, k + i, d + i, params.alpha, 1, (k + i) * params.alpha, params.q)
            self.parent = MsrCodec(parent, systematic_ids=range(1, k + i + 1), points=points, verify=verify)
            return

        alpha = params.alpha
        self.points = list(points) if points is not None else choose_points(ctx.q, alpha, n)
        if len(self.points) != n:
            raise ValueError(f"need {n} evaluation points")
        self.phi = vandermonde(ctx, self.points, alpha)
        self.lambdas = [pow(x, alpha, ctx.q) for x in self.points]
        # [Phi  Lambda Phi] is itself the Vandermonde matrix of width d = 2 alpha.
        self.psi = vandermonde(ctx, self.points, d)
        if verify is None:
            verify = n <= DESK_SCALE_N
        if verify:
            report = verify_msr_psi(self.phi, self.lambdas, d)
            if not report.ok:
                raise FieldTooSmall(f"encoding matrix fails over F_{ctx.q}: {report.failures[0]}")
        else:
            log.info("skipping exhaustive check of %s; relying on Vandermonde structure", params.label)

    # encoding vectors
    def encoding_vector(self, node_id: int) -> list[int]:
        self._check_id(node_id)
        if self.depth:
            return self.parent.encoding_vector(node_id + self.depth)
        return list(self.psi.rows[node_id - 1])

    def repair_vector(self, failed_id: int) -> list[int]:
        self._check_id(failed_id)
        if self.depth:
            return self._short_repair_vector(failed_id)
        return list(self.phi.rows[failed_id - 1])

    def lam(self, node_id: int) -> int:
        if self.depth:
            return self.parent.lam(node_id + self.depth)
        return self.lambdas[node_id - 1]

    # encoding
    def pack(self, u: Sequence[int]) -> tuple[MatrixFq, MatrixFq]:
        return msr_pack_message(self.ctx, self.alpha, u)

    def encode_matrix(self, s1: MatrixFq, s2: MatrixFq) -> MatrixFq:
        return matmul(self.psi, vstack(s1, s2))

    def _base_encode(self, u: list[int]) -> MatrixFq:
        if self.depth:
            return self._short_encode(u)
        return self.encode_matrix(*self.pack(u))

    def encode(self, u: Sequence[int]) -> MatrixFq:
        u = self._message(u)
        if self.systematic_ids is None:
            return self._base_encode(u)
        # Solve for the message that puts U verbatim on the systematic nodes.
        a = self.alpha
        target = [u[r * a:(r + 1) * a] for r in range(self.k)]
        return self._base_encode(self._base_reconstruct(self.systematic_ids, target))

    # repair
    def repair_intermediates(self, failed_id: int, helper_ids: Sequence[int],
                             symbols: Sequence[int]) -> tuple[list[int], list[int]]:
        """Recover ``(S1 phi_f, S2 phi_f)`` from the d helper symbols."""
        if self.depth:
            raise ValueError("intermediates are defined for d = 2k-2 codes only")
        self._check_repair_args(failed_id, helper_ids, symbols)
        key = tuple(helper_ids)
        inv = self._repair_inv.get(key)
        if inv is None:
            try:
                inv = invert(submatrix(self.psi, [h - 1 for h in helper_ids]))
            except Singular as exc:
                raise SingularRepairMatrix(f"repair matrix for helpers {list(helper_ids)} is singular") from exc
            self._repair_inv[key] = inv
        x = matmul(inv, MatrixFq.column(self.ctx, symbols)).col(0)
        return x[:self.alpha], x[self.alpha:]

    def repair(self, failed_id: int, helper_ids: Sequence[int], symbols: Sequence[int]) -> list[int]:
        if self.depth:
            self._check_repair_args(failed_id, helper_ids, symbols)
            return self._short_repair(failed_id, helper_ids, symbols)
        s1_phi, s2_phi = self.repair_intermediates(failed_id, helper_ids, symbols)
        lam, q = self.lambdas[failed_id - 1], self.ctx.q
        # By symmetry (S phi_f)^t = phi_f^t S.
        return [(a + lam * b) % q for a, b in zip(s1_phi, s2_phi)]

    # reconstruction
    def _dc_inverses(self, node_ids: tuple[int, ...]):
        cached = self._dc_cache.get(node_ids)
        if cached is not None:
            return cached
        phi_dc = submatrix(self.phi, [i - 1 for i in node_ids])
        try:
            # Row i's off-diagonal entries pair with [phi_j : j != i], an alpha x alpha block.
            others = []
            for r in range(len(node_ids)):
                cols = [j for j in range(len(node_ids)) if j != r]
                others.append(invert(submatrix(phi_dc, cols).T))
            head = invert(submatrix(phi_dc, range(self.alpha)))
        except Singular as exc:
            raise InternalCorruption(f"Phi_DC blocks for nodes {list(node_ids)} are singular") from exc
        cached = (phi_dc, others, head)
        self._dc_cache[node_ids] = cached
        return cached

    def solve_message_matrix(self, node_ids: Sequence[int], rows,
                             debug: bool = False) -> tuple[MatrixFq, MatrixFq]:
        """Recover (S1, S2) from ``Psi_DC M`` using only off-diagonal entries."""
        if self.depth:
            raise ValueError("message matrices are defined for d = 2k-2 codes only")
        rows = self._check_dc_args(node_ids, rows)
        ctx, q, k, a = self.ctx, self.ctx.q, self.k, self.alpha
        ids = tuple(node_ids)
        phi_dc, others, head = self._dc_inverses(ids)
        lam = [self.lambdas[i - 1] for i in ids]
        y = MatrixFq(ctx, rows, ncols=a)
        z = matmul(y, phi_dc.T)  # P + Lambda_DC Q
        p = [[None] * k for _ in range(k)]
        qm = [[None] * k for _ in range(k)]
        for i in range(k):
            for j in range(i + 1, k):
                diff = (lam[i] - lam[j]) % q
                if diff == 0:
                    raise InternalCorruption(f"lambda collision between nodes {ids[i]} and {ids[j]}")
                qij = (z[i, j] - z[j, i]) * pow(diff, q - 2, q) % q
                pij = (z[i, j] - lam[i] * qij) % q
                p[i][j] = p[j][i] = pij
                qm[i][j] = qm[j][i] = qij

        def recover(offdiag) -> MatrixFq:
            # phi_i^t S for each i, then S from the first alpha of them.
            rows_s = []
            for i in range(a):
                known = MatrixFq.row(ctx, [offdiag[i][j] for j in range(k) if j != i])
                rows_s.append(matmul(known, others[i]).rows[0])
            return matmul(head, MatrixFq(ctx, rows_s, ncols=a))

        s1, s2 = recover(p), recover(qm)
        if debug:
            for s, known in ((s1, p), (s2, qm)):
                full = matmul(matmul(phi_dc, s), phi_dc.T)
                if full != full.T or any(full[i, j] != known[i][j]
                                         for i in range(k) for j in range(k) if i != j):
                    raise InternalCorruption("P/Q inconsistent with recovered S")
            if matmul(submatrix(self.psi, [i - 1 for i in ids]), vstack(s1, s2)) != y:
                raise InternalCorruption("recovered message does not re-encode to the input rows")
        return s1, s2

    def _base_reconstruct(self, node_ids, rows) -> list[int]:
        if self.depth:
            return self._short_reconstruct(list(node_ids), [list(r) for r in rows])
        return msr_unpack_message(*self.solve_message_matrix(node_ids, rows))

    def reconstruct(self, node_ids: Sequence[int], rows) -> list[int]:
        rows = self._check_dc_args(node_ids, rows)
        base = self._base_reconstruct(node_ids, rows)
        if self.systematic_ids is None:
            return base
        c = self._base_encode(base)
        return [x for i in self.systematic_ids for x in c.rows[i - 1]]


def msr_build(params: CodeParams, verify: bool | None = None) -> MsrCodec:
    return MsrCodec(params, verify=verify)


def msr_systematic_remap(codec: MsrCodec, systematic_ids: Sequence[int]) -> MsrCodec:
    """A codec with the same Psi whose chosen k nodes store the message verbatim."""
    points = codec.points if codec.depth == 0 else None
    return MsrCodec(codec.params, systematic_ids=systematic_ids, points=points, verify=False)


def msr_codec(n: int, k: int, d: int, q: int | None = None,
              systematic_ids: Sequence[int] | None = None) -> MsrCodec:
    return MsrCodec(derive_params("MSR", n, k, d, q), systematic_ids=systematic_ids)


def msr_ia_witness(codec: MsrCodec, failed_id: int, helper_id: int,
                   basis_ids: Sequence[int] | None = None, check_rng: random.Random | None = None) -> IaWitness:
    """Split a helper symbol into an aligned interference part and a desired part."""
    if codec.depth:
        raise ValueError("interference-alignment witness needs a d = 2k-2 codec")
    ctx, q, k = codec.ctx, codec.ctx.q, codec.k
    basis = tuple(range(1, k)) if basis_ids is None else tuple(basis_ids)
    if len(basis) != k - 1 or failed_id in basis or helper_id in basis or helper_id == failed_id:
        raise ValueError(f"need k-1 = {k - 1} basis ids disjoint from failed {failed_id} and helper {helper_id}")
    lam_f, lam_l = codec.lam(failed_id), codec.lam(helper_id)
    lam_b = [codec.lam(i) for i in basis]
    if lam_l == lam_f or lam_f in lam_b:
        raise InternalCorruption("distinct-lambda invariant violated")
    basis_cols = MatrixFq(ctx, [codec.repair_vector(i) for i in basis]).T
    if rank(basis_cols) < k - 1:
        raise DependentBasis(f"phi vectors of nodes {list(basis)} are linearly dependent")
    a_tilde = solve(basis_cols, codec.repair_vector(helper_id))
    a = tuple(at * (lam_l - lam_f) * pow(li - lam_f, q - 2, q) % q for at, li in zip(a_tilde, lam_b))
    b = codec.repair_vector(helper_id)
    for a_i, i in zip(a, basis):
        for t, x in enumerate(codec.repair_vector(i)):
            b[t] = (b[t] - a_i * x) % q
    w = IaWitness(failed_id, helper_id, basis, a, tuple(b))
    rng = check_rng or random.Random(0)
    if w.residual(codec, [rng.randrange(q) for _ in range(codec.B)]):
        raise InternalCorruption(f"alignment identity fails for f={failed_id}, l={helper_id}")
    return w
