import pytest

from recipcal import ConfigError
from recipcal.config import (
    ScenarioConfig,
    apply_values,
    parse_config_file,
    validate_scenario,
)


def write(tmp_path, text):
    path = tmp_path / "scenario.cfg"
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------------------
# file grammar
# ---------------------------------------------------------------------------

def test_parse_basic_file(tmp_path):
    path = write(
        tmp_path,
        """
        # a comment
        array.n_ant = 32
        array.n_rf = 4

        sweep.k_values = 24..26
        sweep.l_values = 4,8
        noise.mode = tx
        """,
    )
    values = parse_config_file(path)
    assert values["array.n_ant"] == "32"
    assert values["noise.mode"] == "tx"
    cfg = apply_values(ScenarioConfig(), values, origin=path)
    assert cfg.n_ant == 32 and cfg.n_rf == 4
    assert cfg.k_values == (24, 25, 26)
    assert cfg.l_values == (4, 8)
    assert cfg.noise_mode == "tx"


def test_unknown_key_names_the_line(tmp_path):
    path = write(tmp_path, "array.n_ant = 8\nsweeep.trials = 3\n")
    with pytest.raises(ConfigError) as excinfo:
        parse_config_file(path)
    assert ":2:" in str(excinfo.value)
    assert "sweeep.trials" in str(excinfo.value)


def test_missing_equals_names_the_line(tmp_path):
    path = write(tmp_path, "# fine\narray.n_ant 8\n")
    with pytest.raises(ConfigError) as excinfo:
        parse_config_file(path)
    assert ":2:" in str(excinfo.value)


def test_missing_file_is_a_config_error():
    with pytest.raises(ConfigError):
        parse_config_file("/nonexistent/scenario.cfg")


def test_bad_value_reports_key_and_origin():
    with pytest.raises(ConfigError) as excinfo:
        apply_values(ScenarioConfig(), {"array.n_ant": "many"}, origin="flags")
    msg = str(excinfo.value)
    assert "flags" in msg and "array.n_ant" in msg and "many" in msg


def test_bad_choice_value():
    with pytest.raises(ConfigError) as excinfo:
        apply_values(ScenarioConfig(), {"noise.mode": "loud"}, origin="flags")
    assert "noise.mode" in str(excinfo.value)


def test_descending_range_rejected():
    with pytest.raises(ConfigError):
        apply_values(ScenarioConfig(), {"sweep.k_values": "40..24"}, origin="flags")


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def test_defaults_validate_for_all_commands():
    cfg = ScenarioConfig()
    for command in ("calibrate", "fig7", "fig8", "fig9", "dl-nmse", "fully-connected-check"):
        validate_scenario(cfg, command)
    validate_scenario(apply_values(cfg, {"noise.mode": "none"}, "t"), "fig6")


def test_first_violation_is_named():
    cfg = apply_values(ScenarioConfig(), {"array.n_ant": "63"}, "t")
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario(cfg, "calibrate")
    assert str(excinfo.value).startswith("array.n_rf")  # 8 does not divide 63


def test_odd_array_cannot_be_partitioned():
    cfg = apply_values(ScenarioConfig(), {"array.n_ant": "63", "array.n_rf": "7"}, "t")
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario(cfg, "calibrate")
    assert "array.n_ant" in str(excinfo.value)


def test_group_divisibility_checked():
    # 24 antennas -> groups of 12, not divisible by 8 chains
    cfg = apply_values(ScenarioConfig(), {"array.n_ant": "24", "array.n_rf": "8"}, "t")
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario(cfg, "calibrate")
    assert "array.n_rf" in str(excinfo.value)
    validate_scenario(cfg, "fig9")  # no partition involved


def test_fig6_requires_noiseless_mode():
    cfg = apply_values(ScenarioConfig(), {"calibration.k": "32", "calibration.l": "5"}, "t")
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario(cfg, "fig6")
    assert "noise.mode" in str(excinfo.value)


def test_sweeps_require_enough_trials():
    cfg = apply_values(ScenarioConfig(), {"sweep.trials": "10"}, "t")
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario(cfg, "fig7")
    assert "sweep.trials" in str(excinfo.value)


def test_internal_calibration_rejects_fully_connected():
    cfg = apply_values(ScenarioConfig(), {"array.architecture": "fully-connected"}, "t")
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario(cfg, "calibrate")
    assert "array.architecture" in str(excinfo.value)
    validate_scenario(cfg, "fully-connected-check")


def test_bad_imbalance_std_is_a_config_error():
    cfg = apply_values(ScenarioConfig(), {"hardware.amp_imbalance_std": "1.5"}, "t")
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario(cfg, "calibrate")
    assert "hardware.amp_imbalance_std" in str(excinfo.value)


def test_csit_grid_bounds_checked():
    cfg = apply_values(
        ScenarioConfig(), {"csit.grid_min": "1e-1", "csit.grid_max": "1e-4"}, "t"
    )
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario(cfg, "fig9")
    assert "csit.grid_max" in str(excinfo.value)


def test_partition_builders():
    cfg = ScenarioConfig()
    part = cfg.partition()
    assert part.group_a.size == 32
    nb = cfg.noise_budget()
    assert nb.enable_tx and nb.enable_rx
    arr = cfg.array_config()
    assert arr.n_ant == 64 and arr.n_rf == 8
