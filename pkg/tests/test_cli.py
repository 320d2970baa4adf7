import subprocess
import sys

import pytest

from pmcodes.cli import main
from pmcodes.code_core import derive_params
from pmcodes.codecs import codec_for
from pmcodes.simnet import load_config, sim_run
from pmcodes.stripe_io import Share, helper_stream, stripe_encode_file, stripe_repair


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_params_mbr(capsys):
    code, out, _ = run(capsys, "params", "--kind", "mbr", "-n", "6", "-k", "3", "-d", "4")
    assert code == 0
    lines = out.splitlines()
    assert "alpha=4" in lines and "B=9" in lines and "beta=1" in lines
    assert "repair_bandwidth=4" in lines and "q=257" in lines
    assert "cut-set bound=9 optimal=yes" in lines


def test_params_msr(capsys):
    code, out, _ = run(capsys, "params", "--kind", "msr", "-n", "6", "-k", "3", "-d", "4")
    assert code == 0 and "alpha=2" in out.splitlines() and "B=6" in out.splitlines()


@pytest.mark.parametrize("argv", [
    ["params", "--kind", "msr", "-n", "6", "-k", "3", "-d", "3"],
    ["params", "--kind", "mbr", "-n", "6", "-k", "3", "-d", "4", "--q", "8"],
    ["verify", "--kind", "mbr", "-n", "6", "-k", "3", "-d", "4", "--q", "5"],
])
def test_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3 and err.startswith("error:")


def test_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["params", "--kind", "rs", "-n", "6", "-k", "3", "-d", "4"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["encode", "--kind", "mbr", "-n", "6", "-k", "3", "-d", "4", "--in", "x", "--out", "y",
              "--systematic", "a,b"])
    assert exc.value.code == 2
    (tmp_path / "in.bin").write_bytes(b"x")
    code, _, _ = run(capsys, "encode", "--kind", "mbr", "-n", "6", "-k", "3", "-d", "4",
                     "--in", str(tmp_path / "in.bin"), "--out", str(tmp_path / "o"), "--systematic", "1,2")
    assert code == 2
    assert not (tmp_path / "o").exists()  # flags are checked before any output is written
    code, _, _ = run(capsys, "encode", "--kind", "mbr", "-n", "6", "-k", "3", "-d", "4",
                     "--in", str(tmp_path / "missing.bin"), "--out", str(tmp_path / "o"))
    assert code == 2


def _encode(capsys, tmp_path, kind, n, k, d, data, systematic=None):
    src = tmp_path / "in.bin"
    src.write_bytes(data)
    argv = ["encode", "--kind", kind, "-n", str(n), "-k", str(k), "-d", str(d), "--in", str(src),
            "--out", str(tmp_path / "shares")]
    if systematic:
        argv += ["--systematic", systematic]
    code, _, _ = run(capsys, *argv)
    assert code == 0
    return [tmp_path / "shares" / f"share_{i}.pmrc" for i in range(1, n + 1)]


def test_encode_delete_reconstruct(capsys, tmp_path, rng):
    data = bytes(rng.randrange(256) for _ in range(5000))
    paths = _encode(capsys, tmp_path, "mbr", 6, 3, 4, data)
    for p in paths[:3]:
        p.unlink()
    code, _, _ = run(capsys, "reconstruct", "--shares", *map(str, paths[3:]), "--out", str(tmp_path / "out.bin"))
    assert code == 0 and (tmp_path / "out.bin").read_bytes() == data


@pytest.mark.parametrize("kind,n,k,d,ids", [("mbr", 6, 3, 4, None), ("msr", 7, 3, 5, "2,5,7"),
                                            ("miser", 6, 3, 5, "4,5,6")])
def test_cli_matches_library(capsys, tmp_path, rng, kind, n, k, d, ids):
    data = bytes(rng.randrange(256) for _ in range(777))
    paths = _encode(capsys, tmp_path, kind, n, k, d, data, ids)
    codec = codec_for(derive_params(kind, n, k, d), [int(x) for x in ids.split(",")] if ids else None)
    lib = stripe_encode_file(codec, data)
    assert [p.read_bytes() for p in paths] == [s.to_bytes() for s in lib]

    # Repair node 1 through the CLI and through the library.
    need = codec.helpers_needed
    helpers = [str(p) for p in paths[1:1 + need]]
    code, _, _ = run(capsys, "repair", "--failed", "1", "--helpers", *helpers, "--out", str(tmp_path / "r.pmrc"))
    assert code == 0
    streams = [helper_stream(codec, s, 1) for s in lib[1:1 + need]]
    assert (tmp_path / "r.pmrc").read_bytes() == stripe_repair(codec, 1, streams).to_bytes() == lib[0].to_bytes()

    argv = ["reconstruct", "--shares", str(tmp_path / "r.pmrc"), *map(str, paths[-(k - 1):]),
            "--out", str(tmp_path / "o.bin")]
    if ids:
        argv += ["--systematic", ids]
    assert run(capsys, *argv)[0] == 0
    assert (tmp_path / "o.bin").read_bytes() == data


def test_share_errors_exit_4(capsys, tmp_path):
    paths = _encode(capsys, tmp_path, "msr", 6, 3, 4, b"corrupt me" * 10)
    blob = bytearray(paths[0].read_bytes())
    blob[70] ^= 0xFF
    paths[0].write_bytes(bytes(blob))
    code, _, err = run(capsys, "reconstruct", "--shares", *map(str, paths[:3]), "--out", str(tmp_path / "o"))
    assert code == 4 and "CRC" in err
    code, _, _ = run(capsys, "reconstruct", "--shares", *map(str, paths[3:5]), "--out", str(tmp_path / "o"))
    assert code == 4


def test_repair_blocked_exit_5(capsys, tmp_path):
    paths = _encode(capsys, tmp_path, "mbr", 6, 3, 4, b"few helpers")
    code, _, _ = run(capsys, "repair", "--failed", "1", "--helpers", *map(str, paths[1:4]),
                     "--out", str(tmp_path / "r"))
    assert code == 5


def _write_cfg(tmp_path, events, kind="mbr", n=6, k=3, d=4):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"kind={kind}\nn={n}\nk={k}\nd={d}\nseed=4\npayload=synthetic:4000\n"
                   + "".join(f"event={e}\n" for e in events))
    return cfg


def test_simulate_writes_report_csv_and_figures(capsys, tmp_path):
    cfg = _write_cfg(tmp_path, ["fail:1", "repair:1", "collect:1,2,3"])
    out = tmp_path / "report"
    code, stdout, _ = run(capsys, "simulate", "--config", str(cfg), "--out", str(out))
    assert code == 0
    report = sim_run(load_config(cfg))
    assert (out / "run.report.txt").read_text() == report.text()
    assert (out / "run.csv").read_text() == report.csv()
    assert stdout.startswith(report.text())
    for name in ("run_bandwidth.png", "run_tradeoff.png"):
        assert (out / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_simulate_blocked_and_bad_config(capsys, tmp_path):
    cfg = _write_cfg(tmp_path, [f"fail:{i}" for i in range(1, 6)] + ["repair:1"])
    code, _, _ = run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-figures")
    assert code == 5
    bad = tmp_path / "bad.cfg"
    bad.write_text("kind=mbr\n")
    assert run(capsys, "simulate", "--config", str(bad))[0] == 2


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--kind", "msr", "-n", "6", "-k", "3", "-d", "4", "--q", "13", "--ia",
                       "--trials", "10")
    assert code == 0
    assert "checks=36 result=PASS" in out and "ia: pairs=30 trials=10 failures=0 result=PASS" in out
    code, out, _ = run(capsys, "verify", "--kind", "msr", "-n", "8", "-k", "3", "-d", "6")
    assert code == 0 and "parent code MSR[n=10,k=5,d=8]" in out
    assert run(capsys, "verify", "--kind", "mbr", "-n", "6", "-k", "3", "-d", "4", "--ia")[0] == 2
    code, out, _ = run(capsys, "verify", "--kind", "miser", "-n", "6", "-k", "3", "-d", "5")
    assert code == 0 and "result=PASS" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pmcodes", "params", "--kind", "msr", "-n", "6", "-k", "3",
                           "-d", "3"], capture_output=True, text=True)
    assert proc.returncode == 3
