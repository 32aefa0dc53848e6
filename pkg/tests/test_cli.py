import subprocess
import sys

import pytest

from recipcal.cli import main
from recipcal.csvio import read_csv


def write_cfg(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


SMALL = """
array.n_ant = 16
array.n_rf = 4
calibration.k = 10
calibration.l = 3
noise.mode = none
partition.block = 4
"""

SWEEP = """
array.n_ant = 8
array.n_rf = 2
partition.block = 2
noise.mode = none
sweep.k_values = 4..5
sweep.l_values = 2
sweep.trials = 50
"""


# ---------------------------------------------------------------------------
# success paths
# ---------------------------------------------------------------------------

def test_calibrate_ok(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    out = str(tmp_path / "sol.csv")
    assert main(["calibrate", "--config", cfg, "--out", out]) == 0
    captured = capsys.readouterr()
    assert "nmse_f=" in captured.out
    table = read_csv(out, expected_kind="calibration-solution")
    assert len(table.rows) == 16


def test_fig6_default_output_name(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write_cfg(tmp_path, SMALL)
    assert main(["fig6", "--config", cfg]) == 0
    table = read_csv(str(tmp_path / "fig6.csv"), expected_kind="fig6")
    assert len(table.rows) == 16
    assert float(table.meta["nmse-f"]) < 1e-18


def test_fig7_runs_sweep(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SWEEP)
    out = str(tmp_path / "sweep.csv")
    assert main(["fig7", "--config", cfg, "--out", out]) == 0
    table = read_csv(out, expected_kind="fig7")
    assert len(table.rows) == 2 * 2 * 1 * 50


def test_fig9_and_dl_nmse(tmp_path, capsys):
    out = str(tmp_path / "fig9.csv")
    args = ["fig9", "--out", out, "--mc-trials", "2000", "--grid-points", "2"]
    assert main(args) == 0
    table = read_csv(out, expected_kind="fig9")
    assert len(table.rows) == 4

    assert main(["dl-nmse", "--nmse-f", "1e-2", "--nmse-ul", "1e-2",
                 "--mc-trials", "2000"]) == 0
    captured = capsys.readouterr()
    assert "closed=" in captured.out and "monte_carlo=" in captured.out


def test_fully_connected_check_passes(capsys):
    assert main(["fully-connected-check"]) == 0
    assert "CHECK PASSED" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# determinism through the CLI
# ---------------------------------------------------------------------------

def test_repeated_runs_are_byte_identical(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, SWEEP)
    out_a, out_b, out_c = (str(tmp_path / n) for n in ("a.csv", "b.csv", "c.csv"))
    monkeypatch.delenv("RECIPCAL_THREADS", raising=False)
    assert main(["fig7", "--config", cfg, "--out", out_a]) == 0
    assert main(["fig7", "--config", cfg, "--out", out_b]) == 0
    monkeypatch.setenv("RECIPCAL_THREADS", "3")
    assert main(["fig7", "--config", cfg, "--out", out_c]) == 0
    a, b, c = (open(p, "rb").read() for p in (out_a, out_b, out_c))
    assert a == b == c


def test_seed_changes_output(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    out_a, out_b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["calibrate", "--config", cfg, "--out", out_a, "--seed", "1"]) == 0
    assert main(["calibrate", "--config", cfg, "--out", out_b, "--seed", "2"]) == 0
    assert open(out_a).read() != open(out_b).read()


# ---------------------------------------------------------------------------
# failure exit codes
# ---------------------------------------------------------------------------

def test_bad_config_key_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "array.n_antennas = 16\n")
    assert main(["calibrate", "--config", cfg]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_scenario_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SWEEP + "sweep.trials = 10\n")
    assert main(["fig7", "--config", cfg]) == 2
    assert "sweep.trials" in capsys.readouterr().err


def test_fig6_with_noise_exits_2(tmp_path, capsys):
    assert main(["fig6", "--noise", "both", "--out", str(tmp_path / "x.csv")]) == 2
    assert "noise.mode" in capsys.readouterr().err


def test_underdetermined_exits_3(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    # 7 beams cannot identify the 8-antenna groups of a 16-antenna array
    assert main(["calibrate", "--config", cfg, "--k", "7"]) == 3
    err = capsys.readouterr().err
    assert "numerical failure" in err


def test_malformed_channel_csv_exits_4(tmp_path, capsys):
    bad = tmp_path / "chan.csv"
    bad.write_text("not,a,versioned,file\n")
    cfg = write_cfg(tmp_path, SMALL)
    assert main(["calibrate", "--config", cfg, "--channel-csv", str(bad)]) == 4
    assert "file format error" in capsys.readouterr().err


def test_missing_channel_csv_exits_4(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    missing = str(tmp_path / "nope.csv")
    assert main(["calibrate", "--config", cfg, "--channel-csv", missing]) == 4


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["calibrate", "--frequency", "60GHz"])
    assert excinfo.value.code == 2


def test_console_script_installed(tmp_path):
    # one end-to-end subprocess run through the installed entry point
    cfg = write_cfg(tmp_path, SMALL)
    out = str(tmp_path / "sol.csv")
    proc = subprocess.run(
        ["recipcal", "calibrate", "--config", cfg, "--out", out],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "nmse_f=" in proc.stdout
    assert read_csv(out).meta["kind"] == "calibration-solution"
