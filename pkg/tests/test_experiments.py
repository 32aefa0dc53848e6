import math

import numpy as np
import pytest

from recipcal import ConfigError, channel_from_csv, channel_to_csv, intra_array_channel
from recipcal.config import ScenarioConfig, apply_values
from recipcal.csvio import read_csv
from recipcal.experiments import (
    run_calibrate,
    run_dl_nmse,
    run_fig6,
    run_fig7,
    run_fig8,
    run_fig9,
    run_fully_connected_check,
    thread_count,
)
from numpy.random import default_rng


def small_cfg(**overrides):
    values = {
        "array.n_ant": "16",
        "array.n_rf": "4",
        "calibration.k": "10",
        "calibration.l": "3",
        "noise.mode": "none",
        "partition.block": "4",
    }
    values.update(overrides)
    return apply_values(ScenarioConfig(), values, "test")


# ---------------------------------------------------------------------------
# single calibration rounds
# ---------------------------------------------------------------------------

def test_run_calibrate_noiseless(tmp_path):
    out = str(tmp_path / "sol.csv")
    res = run_calibrate(small_cfg(), out=out)
    assert res.nmse < 1e-18
    table = read_csv(out, expected_kind="calibration-solution")
    assert table.meta["k"] == "10"
    assert table.meta["noise-mode"] == "none"
    assert float(table.meta["nmse-f"]) == res.nmse
    assert len(table.rows) == 16


def test_run_calibrate_with_external_channel(tmp_path):
    chan_path = str(tmp_path / "chan.csv")
    channel_to_csv(intra_array_channel(16, default_rng(99)), chan_path)
    res = run_calibrate(small_cfg(), channel_csv=chan_path)
    assert res.nmse < 1e-18
    assert channel_from_csv(chan_path).c.shape == (16, 16)


def test_run_calibrate_rejects_wrong_size_channel(tmp_path):
    chan_path = str(tmp_path / "chan.csv")
    channel_to_csv(intra_array_channel(8, default_rng(0)), chan_path)
    with pytest.raises(ConfigError):
        run_calibrate(small_cfg(), channel_csv=chan_path)


def test_run_fig6_writes_coefficient_table(tmp_path):
    out = str(tmp_path / "fig6.csv")
    res = run_fig6(small_cfg(), out=out)
    assert res.nmse < 1e-18
    table = read_csv(out, expected_kind="fig6")
    assert table.columns == ["index", "true_re", "true_im", "est_re", "est_im"]
    assert len(table.rows) == 16
    # the table itself demonstrates the recovery: columns agree entry-wise
    true_re = np.array([float(v) for v in table.column("true_re")])
    est_re = np.array([float(v) for v in table.column("est_re")])
    np.testing.assert_allclose(est_re, true_re, atol=1e-9)
    assert float(table.meta["max-abs-dev"]) < 1e-9


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def sweep_cfg(**overrides):
    values = {
        "array.n_ant": "8",
        "array.n_rf": "2",
        "partition.block": "2",
        "noise.mode": "none",
        "sweep.k_values": "3..5",
        "sweep.l_values": "2,3",
        "sweep.trials": "6",
    }
    values.update(overrides)
    return apply_values(ScenarioConfig(), values, "test")


def test_fig7_row_grid_and_divergence(tmp_path):
    out = str(tmp_path / "fig7.csv")
    rows = run_fig7(sweep_cfg(), out=out)
    # 2 schemes x 3 K x 2 L x 6 trials
    assert len(rows) == 2 * 3 * 2 * 6
    schemes = {r[0] for r in rows}
    assert schemes == {"two-sides", "interleaved"}
    # K=3 beams cannot identify a 4-antenna group: every such cell diverges
    assert all(math.isinf(r[4]) for r in rows if r[1] == 3)
    # K=4, L=2 gives 4 combiner rows for 4 antennas: exact in the noiseless run
    assert all(r[4] < 1e-16 for r in rows if r[1] >= 4)
    table = read_csv(out, expected_kind="fig7")
    assert table.columns == ["scheme", "k", "l", "trial", "nmse_f"]
    assert table.column("nmse_f")[0] == "inf"


def test_fig7_rows_are_sorted_and_deterministic():
    rows_a = run_fig7(sweep_cfg())
    rows_b = run_fig7(sweep_cfg())
    assert rows_a == rows_b
    assert rows_a == sorted(rows_a, key=lambda r: (r[0], r[1], r[2], r[3]))


def test_fig7_thread_count_does_not_change_bytes(tmp_path, monkeypatch):
    out_a = str(tmp_path / "a.csv")
    out_b = str(tmp_path / "b.csv")
    monkeypatch.delenv("RECIPCAL_THREADS", raising=False)
    run_fig7(sweep_cfg(), out=out_a)
    monkeypatch.setenv("RECIPCAL_THREADS", "4")
    run_fig7(sweep_cfg(), out=out_b)
    assert open(out_a, "rb").read() == open(out_b, "rb").read()


def test_thread_count_parsing(monkeypatch):
    monkeypatch.delenv("RECIPCAL_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("RECIPCAL_THREADS", "8")
    assert thread_count() == 8
    monkeypatch.setenv("RECIPCAL_THREADS", "0")
    assert thread_count() == 1
    monkeypatch.setenv("RECIPCAL_THREADS", "lots")
    with pytest.raises(ConfigError):
        thread_count()


def test_fig8_splits_noise_sources(tmp_path):
    out = str(tmp_path / "fig8.csv")
    cfg = sweep_cfg(**{
        "noise.mode": "both",
        "sweep.k_values": "4",
        "sweep.l_values": "3",
        "sweep.trials": "8",
    })
    rows = run_fig8(cfg, out=out)
    assert len(rows) == 2 * 2 * 1 * 1 * 8
    modes = {r[1] for r in rows}
    assert modes == {"tx", "rx"}
    tx_med = np.median([r[5] for r in rows if r[1] == "tx"])
    rx_med = np.median([r[5] for r in rows if r[1] == "rx"])
    # with a -97 dBm floor and 0 dBm pilots, transmit EVM dominates by far
    assert tx_med > 10 * rx_med
    table = read_csv(out, expected_kind="fig8")
    assert table.columns == ["scheme", "noise_mode", "k", "l", "trial", "nmse_f"]


# ---------------------------------------------------------------------------
# downlink CSIT runners
# ---------------------------------------------------------------------------

def test_fig9_grid(tmp_path):
    out = str(tmp_path / "fig9.csv")
    cfg = apply_values(
        ScenarioConfig(),
        {"csit.grid_points": "3", "csit.mc_trials": "4000",
         "array.n_ant": "16", "array.n_rf": "4"},
        "test",
    )
    rows = run_fig9(cfg, out=out)
    assert len(rows) == 9
    for nf, nu, closed, mc, trials, seed in rows:
        assert closed > 0 and mc > 0
        assert abs(mc - closed) / closed < 0.15  # loose at 4000 trials
    # grid endpoints respected
    assert rows[0][0] == pytest.approx(1e-4) and rows[-1][0] == pytest.approx(1e-1)
    table = read_csv(out, expected_kind="fig9")
    assert table.columns == ["nmse_f", "nmse_ul", "nmse_dl_closed", "nmse_dl_mc", "trials", "seed"]


def test_dl_nmse_point():
    cfg = apply_values(
        ScenarioConfig(), {"csit.mc_trials": "20000", "array.n_ant": "16", "array.n_rf": "4"}, "t"
    )
    closed, mc = run_dl_nmse(cfg, 1e-2, 1e-2)
    assert closed < 1e-1
    assert mc == pytest.approx(closed, rel=0.05)
    with pytest.raises(ConfigError):
        run_dl_nmse(cfg, -1e-2, 1e-2)


# ---------------------------------------------------------------------------
# fully connected check
# ---------------------------------------------------------------------------

def test_fully_connected_check_passes_noiseless(tmp_path):
    out = str(tmp_path / "fc.csv")
    cfg = apply_values(ScenarioConfig(), {"noise.mode": "none"}, "t")
    res = run_fully_connected_check(cfg, out=out)
    assert res.ok
    assert res.nmse_bs < 1e-8
    assert res.composite_reciprocity_dev == 0.0
    assert res.internal_calibration_refused
    table = read_csv(out, expected_kind="calibration-solution")
    assert "nmse-bs" in table.meta


def test_fully_connected_check_with_noise():
    cfg = apply_values(ScenarioConfig(), {"noise.mode": "both"}, "t")
    res = run_fully_connected_check(cfg)
    assert res.threshold == 1e-2
    assert res.ok
