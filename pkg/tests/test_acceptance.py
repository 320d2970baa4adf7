"""Acceptance suite: ten criteria, each checked exactly.

Every test records one ``PASS``/``FAIL`` line; conftest prints them in
the terminal summary.  Running this file directly prints them too.
"""

from __future__ import annotations

import contextlib
import io
import itertools
import random

import pytest

from pmcodes.cli import main as cli_main
from pmcodes.code_core import cutset_B, derive_params
from pmcodes.codecs import build_codec
from pmcodes.ffield import default_field_size, is_prime
from pmcodes.matfq import MatrixFq, hstack, matmul, rank, submatrix, verify_mbr_psi, verify_msr_psi
from pmcodes.miser import miser_codec
from pmcodes.pm_mbr import mbr_codec
from pmcodes.pm_msr import msr_codec, msr_ia_witness
from pmcodes.simnet import parse_config, sim_run
from pmcodes.stripe_io import helper_stream, stripe_decode, stripe_encode_file, stripe_repair
from pmcodes.systematizer import GeneratorMatrix, RemappedCodec, check_equivalence, extract_generator

from _oracles import msr_message_matrix, naive_matmul

RESULTS: dict[int, str] = {}

TITLES = {
    1: "parameter reproduction",
    2: "golden worked examples",
    3: "exhaustive MBR suite",
    4: "exhaustive MSR suite",
    5: "MISER suite",
    6: "systematizer and equivalence",
    7: "interference-alignment identity",
    8: "cut-set optimality",
    9: "file round trip and simulator determinism",
    10: "field policy and constructor verification",
}

MBR_SUITE = [(5, 2, 3), (6, 3, 4), (6, 3, 5), (7, 4, 4)]
MSR_SUITE = [(6, 3, 4), (7, 3, 5), (8, 3, 6)]
MISER_SUITE = [(4, 2, 3), (6, 3, 5)]
MESSAGES = 50


def record(number: int, fn) -> None:
    try:
        detail = fn()
    except BaseException as exc:
        RESULTS[number] = f"FAIL criterion {number:2d} {TITLES[number]}: {type(exc).__name__}: {exc}"
        print(RESULTS[number])
        raise
    RESULTS[number] = f"PASS criterion {number:2d} {TITLES[number]}" + (f" ({detail})" if detail else "")
    print(RESULTS[number])


def exhaustive(codec, messages: int, rng: random.Random) -> tuple[int, int]:
    """All k-subset reconstructions and all (failed, helper set) repairs, for each message."""
    n, k, q = codec.n, codec.k, codec.ctx.q
    dcs = reps = 0
    for _ in range(messages):
        u = [rng.randrange(q) for _ in range(codec.B)]
        c = codec.encode(u).tolist()
        for ids in itertools.combinations(range(1, n + 1), k):
            assert codec.reconstruct(list(ids), [c[i - 1] for i in ids]) == u, f"{codec.params.label} DC {ids}"
            dcs += 1
        for f in range(1, n + 1):
            others = [i for i in range(1, n + 1) if i != f]
            for helpers in itertools.combinations(others, codec.helpers_needed):
                symbols = [codec.helper_symbol(c[h - 1], f) for h in helpers]
                assert len(symbols) == codec.helpers_needed  # one symbol from each helper
                assert codec.repair(f, list(helpers), symbols) == c[f - 1], f"{codec.params.label} repair {f}"
                reps += 1
    return dcs, reps


# 1 ---------------------------------------------------------------------------
def check_parameters():
    def params_out(kind):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            assert cli_main(["params", "--kind", kind, "-n", "6", "-k", "3", "-d", "4"]) == 0
        return buf.getvalue().splitlines()

    mbr, msr = params_out("mbr"), params_out("msr")
    assert "alpha=4" in mbr and "B=9" in mbr
    assert "alpha=2" in msr and "B=6" in msr
    return "MBR alpha=4 B=9, MSR alpha=2 B=6"


# 2 ---------------------------------------------------------------------------
PSI_F7 = [[1, 1, 1, 1], [1, 2, 4, 1], [1, 3, 2, 6], [1, 4, 2, 1], [1, 5, 4, 6], [1, 6, 1, 6]]
PSI_F13 = [[1, 1, 1, 1], [1, 2, 4, 8], [1, 3, 9, 1], [1, 4, 3, 12], [1, 5, 12, 8], [1, 6, 10, 8]]
PHI_F13 = [[1, 1], [1, 2], [1, 3], [1, 4], [1, 5], [1, 6]]
LAMBDA_F13 = [1, 4, 9, 3, 12, 10]


def check_golden():
    mbr = mbr_codec(6, 3, 4, q=7)
    for i, row in enumerate(PSI_F7):
        assert list(mbr.psi.rows[i]) == row, f"MBR Psi row {i + 1}"
    msr = msr_codec(6, 3, 4, q=13)
    for i, row in enumerate(PSI_F13):
        assert list(msr.psi.rows[i]) == row, f"MSR Psi row {i + 1}"
    for i, row in enumerate(PHI_F13):
        assert list(msr.phi.rows[i]) == row, f"Phi row {i + 1}"
    assert msr.lambdas == LAMBDA_F13
    # Intermediates are linear in u; matching on every unit message matches symbolically.
    helpers = [2, 4, 5, 6]
    for j in range(6):
        u = [int(t == j) for t in range(6)]
        c = msr.encode(u).tolist()
        s1_phi, s2_phi = msr.repair_intermediates(1, helpers, [msr.helper_symbol(c[h - 1], 1) for h in helpers])
        assert s1_phi == [u[0] + u[1], u[1] + u[2]] and s2_phi == [u[3] + u[4], u[4] + u[5]]
    return "Psi(F7), Psi/Phi/Lambda(F13), S1 phi_1 and S2 phi_1"


# 3 ---------------------------------------------------------------------------
def check_mbr_suite():
    rng = random.Random(3)
    total = [0, 0]
    for n, k, d in MBR_SUITE:
        dcs, reps = exhaustive(mbr_codec(n, k, d), MESSAGES, rng)
        assert dcs == MESSAGES * len(list(itertools.combinations(range(n), k)))
        assert reps == MESSAGES * n * len(list(itertools.combinations(range(n - 1), d)))
        total[0] += dcs
        total[1] += reps
    return f"{total[0]} reconstructions, {total[1]} repairs"


# 4 ---------------------------------------------------------------------------
def check_msr_suite():
    rng = random.Random(4)
    total = [0, 0]
    for n, k, d in MSR_SUITE:
        codec = msr_codec(n, k, d)
        dcs, reps = exhaustive(codec, MESSAGES, rng)
        total[0] += dcs
        total[1] += reps
        i = d - 2 * k + 2
        assert codec.depth == i
        if i:
            for _ in range(MESSAGES):
                u = [rng.randrange(codec.ctx.q) for _ in range(codec.B)]
                full = codec.parent.encode([0] * (i * codec.alpha) + u).tolist()
                assert all(x == 0 for row in full[:i] for x in row)
                assert codec.encode(u).tolist() == full[i:]
    return f"{total[0]} reconstructions, {total[1]} repairs, shortened i=1,2"


# 5 ---------------------------------------------------------------------------
def check_miser_suite():
    rng = random.Random(5)
    parity_only = 0
    total = [0, 0]
    for n, k, d in MISER_SUITE:
        codec = miser_codec(n, k, d)
        dcs, reps = exhaustive(codec, MESSAGES, rng)
        assert reps == MESSAGES * n  # n-1 helpers, so one helper set per failure
        total[0] += dcs
        total[1] += reps
        for _ in range(MESSAGES):
            u = [rng.randrange(codec.ctx.q) for _ in range(codec.B)]
            c = codec.encode(u).tolist()
            ids = list(range(k + 1, n + 1))
            assert codec.reconstruct(ids, [c[i - 1] for i in ids]) == u
            parity_only += 1
    return f"{total[0]} reconstructions, {total[1]} repairs, {parity_only} all-parity decodes"


# 6 ---------------------------------------------------------------------------
def _random_invertible(ctx, size, rng):
    while True:
        m = MatrixFq(ctx, [[rng.randrange(ctx.q) for _ in range(size)] for _ in range(size)])
        if rank(m) == size:
            return m


def check_systematizer():
    rng = random.Random(6)
    remapped = 0
    for kind, suite in (("MBR", MBR_SUITE), ("MSR", MSR_SUITE)):
        for n, k, d in suite:
            ids = list(range(n - k + 1, n + 1))  # parity nodes of the base layout
            codec = RemappedCodec(build_codec(kind, n, k, d), ids)
            exhaustive(codec, MESSAGES, rng)
            for _ in range(MESSAGES):
                u = [rng.randrange(codec.ctx.q) for _ in range(codec.B)]
                c = codec.encode(u).tolist()
                assert [c[i - 1][j] for i, j in codec.positions] == u
                assert {i for i, _ in codec.positions} <= set(ids)
            remapped += 1
    accepted = rejected = 0
    for kind in ("MBR", "MSR"):
        gen = extract_generator(build_codec(kind, 6, 3, 4, q=13))
        ctx = gen.G.ctx
        for _ in range(20):
            x = _random_invertible(ctx, gen.G.nrows, rng)
            blocks = [matmul(gen.block(i), _random_invertible(ctx, gen.alpha, rng)) for i in range(1, 7)]
            assert check_equivalence(gen, GeneratorMatrix(matmul(x, hstack(*blocks)), 6, gen.alpha))
            accepted += 1
            node = rng.randrange(1, 7)
            rows = [list(r) for r in gen.G.rows]
            for r in rows:
                r[(node - 1) * gen.alpha:node * gen.alpha] = [0] * gen.alpha
            assert not check_equivalence(gen, GeneratorMatrix(MatrixFq(ctx, rows), 6, gen.alpha))
            rejected += 1
    return f"{remapped} remapped codes, {accepted} transforms accepted, {rejected} mutants rejected"


# 7 ---------------------------------------------------------------------------
def check_alignment():
    rng = random.Random(7)
    codec = msr_codec(6, 3, 4, q=13)
    q, pairs, checks = 13, 0, 0
    for f, l in itertools.permutations(range(1, 7), 2):
        basis = [i for i in range(1, 7) if i not in (f, l)][:2]
        w = msr_ia_witness(codec, f, l, basis)
        pairs += 1
        for _ in range(100):
            u = [rng.randrange(q) for _ in range(6)]
            m = msr_message_matrix(u, 2)

            def form(x, vec):
                row = naive_matmul([PSI_F13[x - 1]], m, q)[0]
                return sum(r * v for r, v in zip(row, vec)) % q

            lhs = form(l, PHI_F13[f - 1])
            rhs = (form(f, w.b) + sum(a * form(i, PHI_F13[f - 1]) for a, i in zip(w.a, basis))) % q
            assert lhs == rhs, f"identity fails for f={f}, l={l}"
            assert w.residual(codec, u) == 0
            checks += 1
    return f"{pairs} (f, l) pairs x 100 messages = {checks} checks"


# 8 ---------------------------------------------------------------------------
def check_cutset():
    count = 0
    for n in range(2, 13):
        for k in range(1, n):
            for d in range(k, n):
                for kind in ("MBR", "MSR", "MISER"):
                    try:
                        p = derive_params(kind, n, k, d, q=257)
                    except Exception:
                        continue
                    bound = sum(min(p.alpha, (d - i) * p.beta) for i in range(k))
                    assert p.B == bound == cutset_B(k, d, p.alpha, p.beta)
                    assert sum(min(p.alpha - 1, (d - i) * p.beta) for i in range(k)) < p.B
                    assert sum(min(p.alpha, (d - i) * (p.beta - 1)) for i in range(k)) < p.B
                    assert p.is_optimal()
                    count += 1
    return f"{count} parameter sets with n <= 12"


# 9 ---------------------------------------------------------------------------
def check_file_roundtrip():
    rng = random.Random(9)
    data = rng.randbytes(64 * 1024)
    for kind, n, k, d in (("MBR", 6, 3, 4), ("MSR", 6, 3, 4), ("MISER", 6, 3, 5)):
        codec = build_codec(kind, n, k, d)
        original = stripe_encode_file(codec, data)
        live = {s.node_index: s for s in original}
        for failed in (1, 2):
            del live[failed]
            helpers = sorted(live)[:codec.helpers_needed]
            streams = [helper_stream(codec, live[h], failed) for h in helpers]
            live[failed] = stripe_repair(codec, failed, streams)
            assert live[failed].to_bytes() == original[failed - 1].to_bytes()
        assert stripe_decode([live[1], live[2], live[n]], codec) == data
    cfg = ("kind=mbr\nn=6\nk=3\nd=4\nseed=99\npayload=synthetic:65536\n"
           "event=fail:1\nevent=repair:1:random\nevent=fail:2\nevent=repair:2:random\nevent=collect:1,2,6\n")
    first, second = sim_run(parse_config(cfg)), sim_run(parse_config(cfg))
    assert first.ok and first.hash == second.hash and first.text() == second.text()
    return f"64 KiB x 3 kinds, report hash {first.hash[:12]}"


# 10 --------------------------------------------------------------------------
def check_field_policy():
    for n in range(2, 80):
        q = default_field_size("MBR", n)
        assert is_prime(q) and q >= 2 * n and q >= 257
        for kind in ("MSR", "MISER"):
            q = default_field_size(kind, n)
            assert is_prime(q) and q >= n * n and q >= 257
    built = 0
    for n, k, d in MBR_SUITE:
        codec = build_codec("MBR", n, k, d)
        assert verify_mbr_psi(codec.psi, k).ok
        built += 1
    for n, k, d in MSR_SUITE:
        codec = build_codec("MSR", n, k, d)
        root = codec.parent if codec.depth else codec
        assert verify_msr_psi(root.phi, root.lambdas, root.d).ok
        built += 1
    for n, k, d in MISER_SUITE:
        codec = build_codec("MISER", n, k, d)
        # Every square submatrix of the Cauchy block must be invertible.
        for size in range(1, k + 1):
            for rs in itertools.combinations(range(k), size):
                for cs in itertools.combinations(range(k), size):
                    assert rank(submatrix(codec.phi, rs, cs)) == size
        built += 1
    return f"{built} suite codecs verified exhaustively"


CRITERIA = {
    1: check_parameters, 2: check_golden, 3: check_mbr_suite, 4: check_msr_suite, 5: check_miser_suite,
    6: check_systematizer, 7: check_alignment, 8: check_cutset, 9: check_file_roundtrip, 10: check_field_policy,
}


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=[f"criterion_{i:02d}" for i in sorted(CRITERIA)])
def test_criterion(number):
    record(number, CRITERIA[number])


if __name__ == "__main__":
    failed = 0
    for number, fn in CRITERIA.items():
        try:
            record(number, fn)
        except Exception:
            failed += 1
    raise SystemExit(1 if failed else 0)
