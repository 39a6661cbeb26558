import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from dejitter_lab import io
from dejitter_lab.cli import EXIT_CONFIG, main
from dejitter_lab.jitter import Ar1Params, ar1_generate
from dejitter_lab.pilots import PseudoMeasurements
from dejitter_lab.signals import SampledSignal

CONFIG = """
[experiment]
scenario = density_sweep
trials = 1
seed = 5
[signal]
n = 4096
half_width = 64
deriv_half_length = 32
guard = 128
[jitter]
jitter_ratio = 0.015
[noise]
ndr_db = -10
[pilots]
density = 0.05
[poly]
poly_block = 40
[sweep]
values = 0.05, 0.1
"""


@pytest.fixture
def config_file(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text(CONFIG)
    return p


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_tables(config_file, tmp_path, capsys):
    out = tmp_path / "res"
    assert main(["run", str(config_file), "--out", str(out)]) == 0
    printed = capsys.readouterr().out.split()
    assert str(out / "results.csv") in printed
    rows = read_rows(out / "results.csv")
    assert len(rows) == 2 and all(r["error"] == "" for r in rows)


def test_run_is_byte_reproducible(config_file, tmp_path):
    out = tmp_path / "a"
    names = ("results.csv", "summary.csv", "metrics.csv", "config.ini")
    main(["run", str(config_file), "--out", str(out)])
    first = {n: (out / n).read_bytes() for n in names}
    main(["run", str(config_file), "--out", str(out)])
    for n in names:
        assert (out / n).read_bytes() == first[n], n


def test_flags_override_config(config_file, tmp_path):
    out = tmp_path / "o"
    main(["run", str(config_file), "--out", str(out), "--trials", "2", "--seed", "9",
          "--poly-degree", "2", "--poly-block", "30", "--set", "values=0.1",
          "--set", "sigma_w=0.05"])
    cfg = (out / "config.ini").read_text()
    for line in ("trials = 2", "seed = 9", "poly_degree = 2", "poly_block = 30",
                 "sigma_w = 0.05", "values = 0.1"):
        assert line in cfg
    assert "ndr_db" not in cfg
    assert len(read_rows(out / "results.csv")) == 2


def test_kf_flags_select_fixed_mode(config_file, tmp_path):
    out = tmp_path / "o"
    rc = main(["run", str(config_file), "--out", str(out), "--kf-phi", "0.999",
               "--kf-sigma-eps", "1e-12", "--kf-sigma-w", "0.1"])
    assert rc == 0
    assert "kalman_mode = fixed" in (out / "config.ini").read_text()


def test_kf_mle_flag(config_file, tmp_path):
    out = tmp_path / "o"
    assert main(["run", str(config_file), "--out", str(out), "--kf-mle", "--set",
                 "mle_starts=2", "--set", "values=0.1"]) == 0
    row = read_rows(out / "results.csv")[0]
    assert row["error"] == "" and float(row["phi_hat"]) > 0.9


@pytest.mark.parametrize("argv", [
    ["--set", "bogus=1"],
    ["--set", "novalue"],
    ["--trials", "0"],
    ["--kf-phi", "0.9"],  # fixed mode without the other two
    ["--set", "scenario=mystery"],
    ["--set", "half_width=16"],
])
def test_config_errors_exit_nonzero(config_file, tmp_path, capsys, argv):
    rc = main(["run", str(config_file), "--out", str(tmp_path / "x")] + argv)
    assert rc == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert main(["run", str(tmp_path / "none.ini")]) == EXIT_CONFIG


def test_failed_trials_exit_zero(config_file, tmp_path, capsys):
    out = tmp_path / "o"
    rc = main(["run", str(config_file), "--out", str(out), "--set", "sinadr_db=90"])
    assert rc == 0
    assert "2 trial(s) failed" in capsys.readouterr().err
    assert all(r["error"] for r in read_rows(out / "results.csv"))


def _measurements(tmp_path, M=400, k_gap=9, seed=0):
    rng = np.random.default_rng(seed)
    xi = ar1_generate(Ar1Params(0.995, 0.02), M * (k_gap + 1), seed=rng).xi[:: k_gap + 1]
    d = rng.uniform(0.5, 2.0, M)
    m = xi + 0.3 / d * rng.standard_normal(M)
    rel = np.ones(M, dtype=bool)
    rel[10] = False
    meas = PseudoMeasurements(np.arange(M) * (k_gap + 1), m, d, rel, 0.0)
    path = tmp_path / "m.csv"
    io.write_measurements_csv(path, meas)
    return path


def test_estimate(tmp_path, capsys):
    path = _measurements(tmp_path)
    assert main(["estimate", str(path), "--starts", "3", "--seed", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["M"] == 399 and out["k_gap"] == 9
    assert 0.9 <= out["phi"] <= 0.99999
    assert out["starts"] == 3 and out["sigma_w"] == pytest.approx(0.3, rel=0.2)


def test_estimate_bad_input(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("index,foo\n1,2\n")
    assert main(["estimate", str(bad)]) == EXIT_CONFIG
    few = tmp_path / "few.csv"
    few.write_text("index,m_tilde,deriv_sq\n0,1,1\n10,1,1\n")
    assert main(["estimate", str(few)]) == EXIT_CONFIG


def test_psd_stdout_and_file(tmp_path, capsys):
    rng = np.random.default_rng(0)
    path = tmp_path / "s.bin"
    io.write_signal_bin(path, SampledSignal(rng.standard_normal(4096), 1e-8, 5e7))
    assert main(["psd", str(path), "--segment", "256"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "stage,freq_hz,psd" and len(lines) == 257
    assert lines[1].startswith("signal,-50000000.0,")
    out = tmp_path / "p.csv"
    assert main(["psd", str(path), "--segment", "256", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 257


@pytest.mark.parametrize("argv", [["--segment", "4"], ["--overlap", "1.0"]])
def test_psd_bad_options(tmp_path, argv):
    path = tmp_path / "s.bin"
    io.write_signal_bin(path, SampledSignal(np.ones(64), 1.0, 0.5))
    assert main(["psd", str(path)] + argv) == EXIT_CONFIG


def test_psd_bad_file(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"nope")
    assert main(["psd", str(p)]) == EXIT_CONFIG


def test_console_entry_point(config_file, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dejitter_lab.cli", "run", str(config_file),
                           "--set", "trials=0"], capture_output=True, text=True)
    assert proc.returncode == EXIT_CONFIG
