"""Scenario configuration: defaults, config-file parsing, validation.

Config files are flat ``key = value`` assignments with dotted section names:

    # comment lines and blanks are ignored
    array.n_ant = 64
    partition.scheme = interleaved
    partition.block = 8
    sweep.k_values = 24..40        # inclusive integer range
    sweep.l_values = 4,8,12        # or a comma list
    noise.mode = tx

Precedence is command-line flags > config file > per-command defaults.
Validation happens before any computation and reports the first violated
condition by its config key.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .array_model import (
    FULLY_CONNECTED,
    INTERLEAVED,
    SUBARRAY,
    TWO_SIDES,
    ArrayConfig,
    amp_imbalance_halfwidth,
    make_partition,
)
from .channel_model import IntraArrayChannelParams
from .effective_channel import NoiseBudget
from .errors import ConfigError, InvalidParameterError, UnsupportedPartitionError

NOISE_MODES = ("both", "tx", "rx", "none")
PARTITION_SCHEMES = (TWO_SIDES, INTERLEAVED)


@dataclass(frozen=True)
class ScenarioConfig:
    """Flat bag of every knob the CLI and experiment runners understand."""

    # array
    n_ant: int = 64
    n_rf: int = 8
    architecture: str = SUBARRAY
    # hardware
    amp_imbalance_std: float = 0.1
    branch_phase_jitter: float = 0.0
    # intra-array channel
    mag_at_half_wavelength_db: float = -15.0
    decay_db_per_step: float = 3.5
    multipath_variance: float = 1e-3
    # noise budget
    tx_evm_db: float = -20.0
    tx_power_dbm_per_antenna: float = 0.0
    rx_noise_floor_dbm: float = -97.0
    noise_mode: str = "both"
    # partition
    partition_scheme: str = TWO_SIDES
    partition_block: int = 8
    # single calibration round
    cal_k: int = 32
    cal_l: int = 8
    # sweep
    k_values: tuple[int, ...] = tuple(range(24, 41))
    l_values: tuple[int, ...] = tuple(range(4, 13))
    trials: int = 50
    # downlink CSIT grid
    csit_grid_points: int = 7
    csit_grid_min: float = 1e-4
    csit_grid_max: float = 1e-1
    csit_mc_trials: int = 10_000
    # fully connected reference link
    ref_bs_n_ant: int = 4
    ref_bs_n_rf: int = 2
    ref_ue_n_ant: int = 2
    ref_ue_n_rf: int = 2
    ref_k_dl: int = 12
    ref_l_dl: int = 4
    ref_k_ul: int = 8
    ref_l_ul: int = 6
    # reproducibility
    seed: int = 1

    # ----- derived model objects -------------------------------------------

    def array_config(self, architecture: str | None = None) -> ArrayConfig:
        return ArrayConfig(
            n_ant=self.n_ant, n_rf=self.n_rf, architecture=architecture or self.architecture
        )

    def channel_params(self) -> IntraArrayChannelParams:
        return IntraArrayChannelParams(
            mag_at_half_wavelength_db=self.mag_at_half_wavelength_db,
            decay_db_per_step=self.decay_db_per_step,
            multipath_variance=self.multipath_variance,
        )

    def noise_budget(self) -> NoiseBudget:
        return NoiseBudget(
            tx_evm_db=self.tx_evm_db,
            tx_power_dbm_per_antenna=self.tx_power_dbm_per_antenna,
            rx_noise_floor_dbm=self.rx_noise_floor_dbm,
        ).with_mode(self.noise_mode)

    def partition(self):
        return make_partition(
            self.n_ant,
            self.partition_scheme,
            block=self.partition_block if self.partition_scheme == INTERLEAVED else None,
        )


# ---------------------------------------------------------------------------
# value parsers
# ---------------------------------------------------------------------------


def _parse_int(text: str) -> int:
    return int(text, 10)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_int_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ".." in text:
        lo_s, _, hi_s = text.partition("..")
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError("range upper bound below lower bound")
        return tuple(range(lo, hi + 1))
    return tuple(int(part) for part in text.split(","))


def _parse_choice(options: tuple[str, ...]):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return parse


# dotted config key -> (ScenarioConfig attribute, parser)
KEY_MAP: dict[str, tuple[str, object]] = {
    "array.n_ant": ("n_ant", _parse_int),
    "array.n_rf": ("n_rf", _parse_int),
    "array.architecture": ("architecture", _parse_choice((SUBARRAY, FULLY_CONNECTED))),
    "hardware.amp_imbalance_std": ("amp_imbalance_std", _parse_float),
    "hardware.branch_phase_jitter": ("branch_phase_jitter", _parse_float),
    "channel.mag_at_half_wavelength_db": ("mag_at_half_wavelength_db", _parse_float),
    "channel.decay_db_per_step": ("decay_db_per_step", _parse_float),
    "channel.multipath_variance": ("multipath_variance", _parse_float),
    "noise.tx_evm_db": ("tx_evm_db", _parse_float),
    "noise.tx_power_dbm_per_antenna": ("tx_power_dbm_per_antenna", _parse_float),
    "noise.rx_noise_floor_dbm": ("rx_noise_floor_dbm", _parse_float),
    "noise.mode": ("noise_mode", _parse_choice(NOISE_MODES)),
    "partition.scheme": ("partition_scheme", _parse_choice(PARTITION_SCHEMES)),
    "partition.block": ("partition_block", _parse_int),
    "calibration.k": ("cal_k", _parse_int),
    "calibration.l": ("cal_l", _parse_int),
    "sweep.k_values": ("k_values", _parse_int_list),
    "sweep.l_values": ("l_values", _parse_int_list),
    "sweep.trials": ("trials", _parse_int),
    "csit.grid_points": ("csit_grid_points", _parse_int),
    "csit.grid_min": ("csit_grid_min", _parse_float),
    "csit.grid_max": ("csit_grid_max", _parse_float),
    "csit.mc_trials": ("csit_mc_trials", _parse_int),
    "reference.bs_n_ant": ("ref_bs_n_ant", _parse_int),
    "reference.bs_n_rf": ("ref_bs_n_rf", _parse_int),
    "reference.ue_n_ant": ("ref_ue_n_ant", _parse_int),
    "reference.ue_n_rf": ("ref_ue_n_rf", _parse_int),
    "reference.k_dl": ("ref_k_dl", _parse_int),
    "reference.l_dl": ("ref_l_dl", _parse_int),
    "reference.k_ul": ("ref_k_ul", _parse_int),
    "reference.l_ul": ("ref_l_ul", _parse_int),
    "seed": ("seed", _parse_int),
}

_VALID_ATTRS = {f.name for f in fields(ScenarioConfig)}
assert all(attr in _VALID_ATTRS for attr, _ in KEY_MAP.values())


def parse_config_file(path: str) -> dict[str, str]:
    """Read a config file into a {dotted key: raw value} dict."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    values: dict[str, str] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in KEY_MAP:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def apply_values(cfg: ScenarioConfig, values: dict[str, str], origin: str) -> ScenarioConfig:
    """Apply raw string values (from file or flags) on top of a config."""
    updates = {}
    for key, raw in values.items():
        attr, parser = KEY_MAP[key]
        try:
            updates[attr] = parser(raw)
        except ValueError as exc:
            raise ConfigError(f"{origin}: bad value for {key}: {raw!r} ({exc})") from None
    return replace(cfg, **updates)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _check(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"{key}: {message}")


def validate_scenario(cfg: ScenarioConfig, command: str) -> None:
    """Check every precondition the given command relies on, in fixed order."""
    _check(cfg.n_ant >= 2, "array.n_ant", "must be at least 2")
    _check(cfg.n_rf >= 1, "array.n_rf", "must be at least 1")
    _check(cfg.n_rf <= cfg.n_ant, "array.n_rf", "must not exceed array.n_ant")
    if cfg.architecture == SUBARRAY:
        _check(cfg.n_ant % cfg.n_rf == 0, "array.n_rf", "must divide array.n_ant (subarray)")
    try:
        amp_imbalance_halfwidth(cfg.amp_imbalance_std)
    except InvalidParameterError as exc:
        raise ConfigError(f"hardware.amp_imbalance_std: {exc}") from None
    _check(cfg.branch_phase_jitter >= 0, "hardware.branch_phase_jitter", "must be >= 0")
    _check(cfg.decay_db_per_step >= 0, "channel.decay_db_per_step", "must be >= 0")
    _check(cfg.multipath_variance >= 0, "channel.multipath_variance", "must be >= 0")
    _check(cfg.tx_evm_db <= 0, "noise.tx_evm_db", "must be <= 0 dB")
    _check(cfg.seed >= 0, "seed", "must be >= 0")

    calibration_commands = {"calibrate", "fig6", "fig7", "fig8"}
    if command in calibration_commands:
        _check(
            cfg.architecture == SUBARRAY,
            "array.architecture",
            "internal calibration supports the subarray architecture only; "
            "fully connected arrays need the reference-link procedure "
            "(fully-connected-check)",
        )
        _check(cfg.n_ant % 2 == 0, "array.n_ant", "must be even to partition the array")
        try:
            cfg.partition()
        except UnsupportedPartitionError as exc:
            raise ConfigError(f"partition: {exc}") from None
        group = cfg.n_ant // 2
        _check(
            group % cfg.n_rf == 0,
            "array.n_rf",
            f"must divide the group size {group} (groups keep all chains while measuring)",
        )
    if command in {"calibrate", "fig6"}:
        _check(cfg.cal_k >= 1, "calibration.k", "must be >= 1")
        _check(cfg.cal_l >= 1, "calibration.l", "must be >= 1")
    if command == "fig6":
        _check(
            cfg.noise_mode == "none",
            "noise.mode",
            "the noiseless coefficient check requires noise.mode = none",
        )
    if command in {"fig7", "fig8"}:
        _check(len(cfg.k_values) > 0, "sweep.k_values", "must not be empty")
        _check(len(cfg.l_values) > 0, "sweep.l_values", "must not be empty")
        _check(min(cfg.k_values) >= 1, "sweep.k_values", "entries must be >= 1")
        _check(min(cfg.l_values) >= 1, "sweep.l_values", "entries must be >= 1")
        _check(cfg.trials >= 50, "sweep.trials", "need at least 50 trials for stable medians")
    if command in {"fig9", "dl-nmse"}:
        _check(cfg.csit_grid_points >= 1, "csit.grid_points", "must be >= 1")
        _check(cfg.csit_grid_min > 0, "csit.grid_min", "must be > 0")
        _check(
            cfg.csit_grid_max >= cfg.csit_grid_min,
            "csit.grid_max",
            "must be >= csit.grid_min",
        )
        _check(cfg.csit_mc_trials >= 1, "csit.mc_trials", "must be >= 1")
    if command == "fully-connected-check":
        for key, val in (
            ("reference.bs_n_ant", cfg.ref_bs_n_ant),
            ("reference.bs_n_rf", cfg.ref_bs_n_rf),
            ("reference.ue_n_ant", cfg.ref_ue_n_ant),
            ("reference.ue_n_rf", cfg.ref_ue_n_rf),
            ("reference.k_dl", cfg.ref_k_dl),
            ("reference.l_dl", cfg.ref_l_dl),
            ("reference.k_ul", cfg.ref_k_ul),
            ("reference.l_ul", cfg.ref_l_ul),
        ):
            _check(val >= 1, key, "must be >= 1")
