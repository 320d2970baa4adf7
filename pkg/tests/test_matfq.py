import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmcodes.errors import (DegeneratePoints, DimensionMismatch, DuplicatePoint, FieldMismatch, Inconsistent,
                            IndexOutOfRange, Singular, ZeroPoint)
from pmcodes.ffield import FieldCtx
from pmcodes.matfq import (MatrixFq, cauchy, hstack, invert, matmul, rank, rref, solve, submatrix, transpose,
                           vandermonde, verify_mbr_psi, verify_msr_psi, vstack)

from _oracles import brute_rank, brute_solutions, det_mod, naive_matmul

F5, F7, F13 = FieldCtx(5), FieldCtx(7), FieldCtx(13)


def matrices(q, min_side=1, max_side=4, rows=None, cols=None):
    r = st.just(rows) if rows else st.integers(min_side, max_side)
    c = st.just(cols) if cols else st.integers(min_side, max_side)
    return st.tuples(r, c).flatmap(
        lambda rc: st.lists(st.lists(st.integers(0, q - 1), min_size=rc[1], max_size=rc[1]),
                            min_size=rc[0], max_size=rc[0]))


@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.data())
def test_matmul_matches_triple_loop(n, m, p, data):
    a = data.draw(matrices(13, rows=n, cols=m))
    b = data.draw(matrices(13, rows=m, cols=p))
    assert matmul(MatrixFq(F13, a), MatrixFq(F13, b)).tolist() == naive_matmul(a, b, 13)
    assert (MatrixFq(F13, a) @ MatrixFq(F13, b)).tolist() == naive_matmul(a, b, 13)


@settings(max_examples=60)
@given(matrices(5, max_side=3))
def test_rank_matches_minor_oracle(a):
    assert rank(MatrixFq(F5, a)) == brute_rank(a, 5)


@settings(max_examples=60)
@given(st.integers(1, 4).flatmap(lambda n: matrices(7, rows=n, cols=n)))
def test_invert_iff_nonzero_determinant(a):
    m = MatrixFq(F7, a)
    if det_mod(a, 7):
        inv = invert(m)
        assert naive_matmul(a, inv.tolist(), 7) == MatrixFq.identity(F7, len(a)).tolist()
        assert naive_matmul(inv.tolist(), a, 7) == MatrixFq.identity(F7, len(a)).tolist()
    else:
        with pytest.raises(Singular):
            invert(m)


@settings(max_examples=40)
@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_solve_against_enumeration(r, c, data):
    a = data.draw(matrices(5, rows=r, cols=c))
    b = data.draw(st.lists(st.integers(0, 4), min_size=r, max_size=r))
    sols = brute_solutions(a, b, 5)
    if sols:
        assert solve(MatrixFq(F5, a), b) in sols
    else:
        with pytest.raises(Inconsistent):
            solve(MatrixFq(F5, a), b)


def test_rref_is_canonical():
    a = MatrixFq(F7, [[2, 4, 6], [1, 2, 3], [0, 1, 1]])
    assert rref(a).tolist() == [[1, 0, 1], [0, 1, 1], [0, 0, 0]]


def test_shapes_and_stacking():
    a = MatrixFq(F7, [[1, 2], [3, 4]])
    assert hstack(a, a).shape == (2, 4)
    assert vstack(a, a).shape == (4, 2)
    assert transpose(a).tolist() == [[1, 3], [2, 4]] == a.T.tolist()
    assert submatrix(a, [1, 0], [1]).tolist() == [[4], [2]]
    assert (a + a).tolist() == [[2, 4], [6, 1]] and (a - a).is_zero()
    assert a.scale(3).tolist() == [[3, 6], [2, 5]]
    assert MatrixFq(F7, [[8, -1]]).tolist() == [[1, 6]]
    assert MatrixFq.zeros(F7, 0, 3).shape == (0, 3)
    assert int(a.element(1, 1)) == 4


def test_dimension_and_index_errors():
    a = MatrixFq(F7, [[1, 2], [3, 4]])
    with pytest.raises(DimensionMismatch):
        matmul(a, MatrixFq(F7, [[1, 2, 3]]))
    with pytest.raises(DimensionMismatch):
        MatrixFq(F7, [[1, 2], [3]])
    with pytest.raises(DimensionMismatch):
        hstack(a, MatrixFq(F7, [[1]]))
    with pytest.raises(DimensionMismatch):
        invert(MatrixFq(F7, [[1, 2, 3]]))
    with pytest.raises(IndexOutOfRange):
        submatrix(a, [2])
    with pytest.raises(FieldMismatch):
        matmul(a, MatrixFq(F13, [[1], [1]]))


def test_vandermonde_entries_and_errors():
    v = vandermonde(F13, [1, 2, 3], 4)
    assert v.tolist() == [[1, 1, 1, 1], [1, 2, 4, 8], [1, 3, 9, 1]]
    with pytest.raises(DuplicatePoint):
        vandermonde(F13, [1, 14], 2)
    with pytest.raises(ZeroPoint):
        vandermonde(F13, [0, 1], 2)


def test_cauchy_entries_and_errors():
    c = cauchy(F13, [1, 2], [3, 4])
    for i, x in enumerate([1, 2]):
        for j, y in enumerate([3, 4]):
            assert c[i, j] * (x - y) % 13 == 1
    with pytest.raises(DegeneratePoints):
        cauchy(F13, [1, 2], [2, 3])


def test_cauchy_square_submatrices_nonsingular():
    c = cauchy(F13, [1, 2, 3], [4, 5, 6])
    import itertools
    for size in (1, 2, 3):
        for rs in itertools.combinations(range(3), size):
            for cs in itertools.combinations(range(3), size):
                assert det_mod(submatrix(c, rs, cs).tolist(), 13) != 0


def test_verify_mbr_reports_witness():
    good = vandermonde(F7, range(1, 7), 4)
    assert verify_mbr_psi(good, 3).ok
    bad = MatrixFq(F7, good.rows[:5] + (good.rows[0],))  # node 6 duplicates node 1
    report = verify_mbr_psi(bad, 3)
    assert not report.ok and 1 in report.witness and 6 in report.witness
    assert report.lines()[0].endswith("FAIL")


def test_verify_msr_reports_lambda_collision():
    phi = vandermonde(F13, [1, 2, 3, 4, 5, 6], 2)
    assert verify_msr_psi(phi, [1, 4, 9, 3, 12, 10], 4).ok
    report = verify_msr_psi(phi, [1, 4, 9, 3, 12, 1], 4)
    assert not report.ok
    assert ("lambda values collide", (1, 6)) in report.failures


@settings(max_examples=40)
@given(matrices(5, max_side=3))
def test_nullspace_matches_enumeration(a):
    from pmcodes.matfq import nullspace

    basis = nullspace(MatrixFq(F5, a))
    kernel = brute_solutions(a, [0] * len(a), 5)
    assert len(kernel) == 5 ** len(basis)
    for v in basis:
        assert v in kernel
    assert len(basis) == len(a[0]) - brute_rank(a, 5)
