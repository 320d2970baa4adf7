"""Generator matrices, code equivalence, and systematic conversion by input remapping.

Every codec here is linear, so its behaviour is captured by the B x (n alpha)
generator ``G`` with ``u G = [c_1 | c_2 | ... | c_n]``.  Feeding the
message ``u Gt^-1`` instead of ``u``, where ``Gt`` gathers B independent
columns from k chosen nodes, makes those nodes store ``u`` verbatim.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .code_core import Codec
from .errors import RankDeficient, ShapeMismatch, Singular
from .matfq import MatrixFq, hstack, invert, matmul, nullspace, rank, rref, solve, submatrix


@dataclass(frozen=True)
class GeneratorMatrix:
    G: MatrixFq
    n: int
    alpha: int

    def block(self, i: int) -> MatrixFq:
        """Component generator of node ``i`` (1-based), a B x alpha matrix."""
        return submatrix(self.G, None, range((i - 1) * self.alpha, i * self.alpha))

    def encode(self, u: Sequence[int]) -> list[list[int]]:
        flat = matmul(MatrixFq.row(self.G.ctx, u), self.G).rows[0]
        return [list(flat[i * self.alpha:(i + 1) * self.alpha]) for i in range(self.n)]


def extract_generator(codec: Codec) -> GeneratorMatrix:
    """Encode each unit message and read the stored symbols column by column."""
    rows = []
    for b in range(codec.B):
        e = [0] * codec.B
        e[b] = 1
        rows.append(codec.encode(e).flat())
    return GeneratorMatrix(MatrixFq(codec.ctx, rows, ncols=codec.n * codec.alpha), codec.n, codec.alpha)


def select_independent_columns(gen: GeneratorMatrix, node_ids: Sequence[int]) -> list[tuple[int, int]]:
    """Greedy left-to-right scan; keep a column iff it raises the rank.

    Returns ``(node_id, symbol_index)`` pairs, both 1-based / 0-based respectively.
    """
    chosen: list[tuple[int, int]] = []
    cols: list[list[int]] = []
    for i in node_ids:
        block = gen.block(i)
        for j in range(gen.alpha):
            trial = cols + [block.col(j)]
            if rank(MatrixFq(gen.G.ctx, trial, ncols=gen.G.nrows)) == len(trial):
                cols = trial
                chosen.append((i, j))
            if len(cols) == gen.G.nrows:
                return chosen
    raise RankDeficient(f"nodes {list(node_ids)} span only {len(cols)} of {gen.G.nrows} dimensions")


def make_systematic(codec: Codec, systematic_ids: Sequence[int],
                    gen: GeneratorMatrix | None = None) -> tuple[MatrixFq, list[tuple[int, int]]]:
    """Return ``(Gt^-1, positions)``; ``positions`` are where u lands verbatim."""
    if len(systematic_ids) != codec.k or len(set(systematic_ids)) != codec.k:
        raise ValueError(f"need {codec.k} distinct node ids")
    gen = gen or extract_generator(codec)
    positions = select_independent_columns(gen, systematic_ids)
    g_tilde = hstack(*[MatrixFq.column(codec.ctx, gen.block(i).col(j)) for i, j in positions])
    try:
        return invert(g_tilde), positions
    except Singular as exc:  # pragma: no cover - guarded by the rank scan
        raise RankDeficient("selected columns are dependent") from exc


class RemappedCodec(Codec):
    """Wrap a codec so a chosen set of k nodes holds the message uncoded.

    Stored contents are still codewords of the base code, so repair is
    delegated unchanged; only the message-side maps differ.
    """

    def __init__(self, base: Codec, systematic_ids: Sequence[int]):
        self.base = base
        self.params = base.params
        self._ctx = base.ctx
        self.systematic_ids = tuple(systematic_ids)
        self.remap, self.positions = make_systematic(base, self.systematic_ids)
        self._remap_inv = invert(self.remap)

    @property
    def helpers_needed(self) -> int:
        return self.base.helpers_needed

    def encode(self, u: Sequence[int]) -> MatrixFq:
        u = self._message(u)
        fed = matmul(MatrixFq.row(self.ctx, u), self.remap).rows[0]
        return self.base.encode(list(fed))

    def repair_vector(self, failed_id: int) -> list[int]:
        return self.base.repair_vector(failed_id)

    def helper_symbol(self, content, failed_id, helper_id=None) -> int:
        return self.base.helper_symbol(content, failed_id, helper_id)

    def repair(self, failed_id, helper_ids, symbols) -> list[int]:
        return self.base.repair(failed_id, helper_ids, symbols)

    def reconstruct(self, node_ids, rows) -> list[int]:
        fed = self.base.reconstruct(node_ids, rows)
        return list(matmul(MatrixFq.row(self.ctx, fed), self._remap_inv).rows[0])


def _column_space_key(block: MatrixFq) -> tuple:
    # Reduced echelon form of the transpose: a canonical basis of the column space.
    reduced = rref(block.T)
    return tuple(r for r in reduced.rows if any(r))


def _dependencies(g: MatrixFq) -> tuple[list[int], dict[int, list[int]]]:
    """Greedy basis columns of ``g`` and, for every other column, its coefficients on them."""
    basis: list[int] = []
    for j in range(g.ncols):
        if rank(submatrix(g, None, basis + [j])) == len(basis) + 1:
            basis.append(j)
    g_basis = submatrix(g, None, basis)
    coeffs = {j: solve(g_basis, g.col(j)) for j in range(g.ncols) if j not in basis}
    return basis, coeffs


def check_equivalence(ga: GeneratorMatrix, gb: GeneratorMatrix, attempts: int = 32) -> bool:
    """True iff ``gb = X ga blockdiag(Y_1..Y_n)`` for some invertible X and Y_i.

    That is, the node subspaces W_i agree up to one common change of
    message basis.  Identical column spaces are accepted at once.  Otherwise
    we look for invertible Z_i with ``gb blockdiag(Z)`` obeying every
    column dependency of ``ga``: those constraints are linear in the Z
    entries, and a seeded random point of the solution space is tested for
    invertibility.  A False from the random search is exact whenever the
    solution space is empty, which covers the usual non-equivalent cases.
    """
    if (ga.G.shape, ga.n, ga.alpha, ga.G.ctx) != (gb.G.shape, gb.n, gb.alpha, gb.G.ctx):
        raise ShapeMismatch(f"{ga.G.shape} vs {gb.G.shape}")
    n, a = ga.n, ga.alpha
    if all(_column_space_key(ga.block(i)) == _column_space_key(gb.block(i)) for i in range(1, n + 1)):
        return True
    if rank(ga.G) != rank(gb.G):
        return False
    if any(rank(ga.block(i)) != rank(gb.block(i)) for i in range(1, n + 1)):
        return False

    ctx, q = ga.G.ctx, ga.G.ctx.q
    basis, coeffs = _dependencies(ga.G)
    nunk = n * a * a
    gb_cols = [gb.G.col(j) for j in range(gb.G.ncols)]

    def h_col(j: int) -> dict[int, list[int]]:
        # Column j of gb blockdiag(Z) as {unknown index: coefficient column}.
        i, t = divmod(j, a)
        return {i * a * a + s * a + t: gb_cols[i * a + s] for s in range(a)}

    eqs = []
    for j, c in coeffs.items():
        rows = [[0] * nunk for _ in range(ga.G.nrows)]
        terms = [(1, h_col(j))] + [(-cs % q, h_col(b)) for cs, b in zip(c, basis) if cs]
        for scale, col in terms:
            for idx, vec in col.items():
                for r, v in enumerate(vec):
                    rows[r][idx] = (rows[r][idx] + scale * v) % q
        eqs.extend(r for r in rows if any(r))
    space = nullspace(MatrixFq(ctx, eqs, ncols=nunk)) if eqs else [
        [int(x == y) for x in range(nunk)] for y in range(nunk)]
    if not space:
        return False
    rng = random.Random(0)
    for _ in range(attempts):
        z = [0] * nunk
        for vec in space:
            w = rng.randrange(q)
            if w:
                z = [(x + w * v) % q for x, v in zip(z, vec)]
        blocks = [MatrixFq(ctx, [z[i * a * a + s * a:i * a * a + (s + 1) * a] for s in range(a)], ncols=a)
                  for i in range(n)]
        if any(rank(b) < a for b in blocks):
            continue
        h = matmul(gb.G, _blockdiag(ctx, blocks))
        if rank(submatrix(h, None, basis)) == len(basis):
            return True
    return False


def _blockdiag(ctx, blocks: Sequence[MatrixFq]) -> MatrixFq:
    a = blocks[0].nrows
    size = a * len(blocks)
    rows = [[0] * size for _ in range(size)]
    for i, b in enumerate(blocks):
        for r in range(a):
            rows[i * a + r][i * a:(i + 1) * a] = b.rows[r]
    return MatrixFq(ctx, rows, ncols=size)
