"""Command-line entry point: ``pmcodes <subcommand> ...``.

Exit codes: 0 ok, 2 usage or config error, 3 infeasible parameters or
field, 4 corrupt or mismatched shares, 5 repair blocked.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from pathlib import Path

from .code_core import Codec, CodeParams, cutset_B, cutset_table, derive_params, repair_bandwidth
from .codecs import codec_for
from .errors import (BadFieldOverride, ConfigError, FieldTooSmall, FieldTooSmallForBytes, InfeasibleParameters,
                     PMError, RepairBlocked, ShareError)
from .matfq import verify_mbr_psi, verify_msr_psi
from .pm_msr import msr_ia_witness
from .simnet import load_config, metrics_table, sim_metrics, sim_run
from .stripe_io import Share, helper_stream, stripe_decode, stripe_encode_file, stripe_repair

log = logging.getLogger("pmcodes")

EXIT_OK, EXIT_USAGE, EXIT_PARAMS, EXIT_SHARES, EXIT_BLOCKED = 0, 2, 3, 4, 5


def _ids(text: str) -> list[int]:
    try:
        ids = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated node ids, got {text!r}") from exc
    if not ids:
        raise argparse.ArgumentTypeError("empty id list")
    return ids


def _add_code_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", required=True, type=str.upper, choices=["MBR", "MSR", "MISER"])
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("--q", type=int, default=None, help="prime field size (default: smallest valid prime)")


def _params(args) -> CodeParams:
    return derive_params(args.kind, args.n, args.k, args.d, args.q)


def _check_systematic(params: CodeParams, ids) -> None:
    if ids is None:
        return
    if len(ids) != params.k or len(set(ids)) != params.k or not all(1 <= i <= params.n for i in ids):
        raise ConfigError(f"--systematic needs {params.k} distinct ids in 1..{params.n}, got {ids}")


def _root(codec: Codec) -> Codec:
    while getattr(codec, "depth", 0):
        codec = codec.parent
    return codec


def cmd_params(args) -> int:
    p = _params(args)
    print(f"code {p.label}")
    print(f"alpha={p.alpha}")
    print(f"beta={p.beta}")
    print(f"B={p.B}")
    print(f"q={p.q}")
    print(f"repair_bandwidth={repair_bandwidth(p)}")
    print("cut-set terms: i min(alpha,(d-i)beta) running_sum")
    for i, term, total in cutset_table(p):
        print(f"  {i} {term} {total}")
    print(f"cut-set bound={cutset_B(p.k, p.d, p.alpha, p.beta)} optimal={'yes' if p.is_optimal() else 'no'}")
    return EXIT_OK


def cmd_encode(args) -> int:
    p = _params(args)
    _check_systematic(p, args.systematic)
    codec = codec_for(p, args.systematic)
    data = Path(args.infile).read_bytes()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for share in stripe_encode_file(codec, data):
        path = share.write(out / f"share_{share.node_index}.pmrc")
        print(path)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    shares = [Share.read(f) for f in args.shares]
    codec = None
    if args.systematic is not None:
        p = shares[0].params
        _check_systematic(p, args.systematic)
        codec = codec_for(p, args.systematic)
    data = stripe_decode(shares, codec)
    Path(args.out).write_bytes(data)
    print(f"wrote {len(data)} bytes to {args.out}")
    return EXIT_OK


def cmd_repair(args) -> int:
    helpers = [Share.read(f) for f in args.helpers]
    codec = codec_for(helpers[0].params)
    need = codec.helpers_needed
    if len(helpers) < need:
        raise RepairBlocked(f"repairing node {args.failed} needs {need} helper shares, got {len(helpers)}")
    streams = [helper_stream(codec, s, args.failed) for s in helpers[:need]]
    share = stripe_repair(codec, args.failed, streams)
    share.write(args.out)
    print(f"regenerated node {args.failed} from helpers {[s.helper_id for s in streams]} -> {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg_path = Path(args.config)
    cfg = load_config(cfg_path)
    if args.seed is not None:
        cfg.seed = args.seed
    report = sim_run(cfg)
    out = Path(args.out) if args.out else cfg_path.parent
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg_path.stem
    (out / f"{stem}.report.txt").write_text(report.text())
    (out / f"{stem}.csv").write_text(report.csv())
    sys.stdout.write(report.text())
    sys.stdout.write(metrics_table(sim_metrics(report)))
    if not args.no_figures:
        from .plotting import write_figures

        for path in write_figures(report, out, stem):
            print(f"figure {path}")
    return EXIT_BLOCKED if report.blocked else EXIT_OK


def ia_check(codec: Codec, trials: int, seed: int = 0) -> tuple[int, int]:
    """Check the alignment identity for every (failed, helper) pair; returns (pairs, failures)."""
    base = _root(codec)
    rng = random.Random(seed)
    q, k, n = base.ctx.q, base.k, base.n
    pairs = bad = 0
    for f in range(1, n + 1):
        for l in range(1, n + 1):
            if l == f:
                continue
            basis = [i for i in range(1, n + 1) if i not in (f, l)][:k - 1]
            w = msr_ia_witness(base, f, l, basis, check_rng=rng)
            pairs += 1
            for _ in range(trials):
                if w.residual(base, [rng.randrange(q) for _ in range(base.B)]):
                    bad += 1
                    break
    return pairs, bad


def cmd_verify(args) -> int:
    p = _params(args)
    codec = codec_for(p)
    base = _root(codec)
    print(f"code {p.label} q={p.q}")
    if p.kind == "MBR":
        report = verify_mbr_psi(base.psi, p.k)
    elif p.kind == "MSR":
        report = verify_msr_psi(base.phi, base.lambdas, base.d)
    else:
        report = None
        print(f"Cauchy minors of Phi checked at construction (k={base.k}, rho={base.rho}) result=PASS")
    if report is not None:
        if base is not codec:
            print(f"checked on the parent code {base.params.label}")
        for line in report.lines():
            print(line)
    ok = report is None or report.ok
    if args.ia:
        if p.kind != "MSR":
            print("ia: only defined for MSR codes")
            return EXIT_USAGE
        pairs, bad = ia_check(codec, args.trials, args.seed)
        print(f"ia: pairs={pairs} trials={args.trials} failures={bad} result={'PASS' if not bad else 'FAIL'}")
        ok = ok and not bad
    return EXIT_OK if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmcodes", description="Product-matrix regenerating codes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print code parameters and the cut-set table")
    _add_code_args(p)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("encode", help="split a file into n share files")
    _add_code_args(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--systematic", type=_ids, default=None, metavar="IDS",
                   help="k comma-separated nodes that store the data verbatim")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("reconstruct", help="rebuild the file from k shares")
    p.add_argument("--shares", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--systematic", type=_ids, default=None, metavar="IDS",
                   help="the ids given at encode time, if any")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("repair", help="regenerate a lost share from helper shares")
    p.add_argument("--failed", type=int, required=True)
    p.add_argument("--helpers", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("simulate", help="run a failure/repair schedule")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="directory for report, CSV and figures")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="check the encoding matrix conditions")
    _add_code_args(p)
    p.add_argument("--ia", action="store_true", help="also check the interference-alignment identity")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InfeasibleParameters, BadFieldOverride, FieldTooSmall, FieldTooSmallForBytes) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except ShareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHARES
    except RepairBlocked as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOCKED
    except (ConfigError, PMError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
