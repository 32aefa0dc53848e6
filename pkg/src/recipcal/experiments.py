"""Experiment runners behind the CLI subcommands.

Every runner derives all randomness from ``(config.seed, experiment tag,
indices...)`` seed lists, so reruns with the same config and seed reproduce
results bit for bit, sweep cells do not depend on iteration order, and trials
can run concurrently (``RECIPCAL_THREADS``) without changing any output byte.
Hardware, channel and weight draws are shared between partition schemes
within a trial so scheme comparisons see identical conditions, and weight
sets are drawn once per trial at the largest (K, L) and sliced per sweep
cell, so a cell's beams are a prefix of every larger cell's beams.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import default_rng

from .array_model import (
    FULLY_CONNECTED,
    INTERLEAVED,
    TWO_SIDES,
    ArrayConfig,
    CalibrationMatrix,
    make_partition,
    merged_rx_response,
    merged_tx_response,
    sample_hardware_profile,
    true_calibration,
)
from .calibration import (
    CalibrationSolution,
    align_scalar,
    bidirectional_measure,
    build_q,
    group_measurement_config,
    nmse_f,
    solve_calibration,
)
from .channel_model import INTRA, ChannelMatrix, intra_array_channel, rayleigh_channel
from .config import ScenarioConfig
from .csvio import channel_from_csv, solution_to_csv, write_csv
from .dl_csit import CsitErrorModel, nmse_dl_expected, nmse_dl_monte_carlo, ul_covariance
from .effective_channel import random_beam_weights
from .errors import ConfigError, DegenerateSolutionWarning, UnderdeterminedSystemError
from .fully_connected import (
    calibrate_with_reference,
    composite_channel,
    reference_measurement_configs,
)
from .errors import UnsupportedArchitectureError

TAG_CALIBRATE = 1
TAG_FIG6 = 6
TAG_FIG7 = 7
TAG_FIG8 = 8
TAG_FIG9 = 9
TAG_FC = 10
TAG_DL_POINT = 11

THREADS_ENV = "RECIPCAL_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _map_trials(fn, n_trials: int):
    workers = min(thread_count(), n_trials)
    if workers <= 1:
        return [fn(t) for t in range(n_trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_trials)))


def _partitions(cfg: ScenarioConfig) -> list[tuple[str, object]]:
    return [
        (TWO_SIDES, make_partition(cfg.n_ant, TWO_SIDES)),
        (INTERLEAVED, make_partition(cfg.n_ant, INTERLEAVED, block=cfg.partition_block)),
    ]


# ---------------------------------------------------------------------------
# calibrate / fig6
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CalibrateResult:
    solution: CalibrationSolution
    f_true: CalibrationMatrix
    f_aligned: CalibrationMatrix
    nmse: float
    max_abs_dev: float


def _single_round(cfg: ScenarioConfig, tag: int, channel_csv: str | None) -> CalibrateResult:
    arr = cfg.array_config()
    noise = cfg.noise_budget()
    part = cfg.partition()
    g_hw, g_ch, g_wt, g_ns = default_rng([cfg.seed, tag]).spawn(4)
    profile = sample_hardware_profile(
        arr, g_hw, amp_imbalance_std=cfg.amp_imbalance_std,
        branch_phase_jitter=cfg.branch_phase_jitter,
    )
    if channel_csv is not None:
        channel = channel_from_csv(channel_csv)
        if channel.kind != INTRA or channel.c.shape[0] != cfg.n_ant:
            raise ConfigError(
                f"external channel must be an intra-array matrix of size {cfg.n_ant}, "
                f"got kind={channel.kind} shape={channel.c.shape}"
            )
    else:
        channel = intra_array_channel(cfg.n_ant, g_ch, cfg.channel_params())
    mcfg = group_measurement_config(arr, part, noise)
    weights = random_beam_weights(mcfg, cfg.cal_k, cfg.cal_l, g_wt)
    est = bidirectional_measure(arr, profile, part, channel, weights, noise, g_ns)
    solution = solve_calibration(build_q(est))
    truth = true_calibration(arr, profile)
    aligned = align_scalar(solution.f, truth)
    return CalibrateResult(
        solution=solution,
        f_true=truth,
        f_aligned=aligned,
        nmse=nmse_f(aligned, truth),
        max_abs_dev=float(np.max(np.abs(aligned.f - truth.f))),
    )


def run_calibrate(
    cfg: ScenarioConfig, out: str | None = None, channel_csv: str | None = None
) -> CalibrateResult:
    """One full internal calibration round; optionally writes the solution CSV."""
    result = _single_round(cfg, TAG_CALIBRATE, channel_csv)
    if out:
        solution_to_csv(
            result.solution,
            out,
            extra_meta={
                "nmse-f": result.nmse,
                "seed": cfg.seed,
                "k": cfg.cal_k,
                "l": cfg.cal_l,
                "partition": cfg.partition_scheme,
                "noise-mode": cfg.noise_mode,
            },
        )
    return result


def run_fig6(cfg: ScenarioConfig, out: str | None = None) -> CalibrateResult:
    """Noiseless coefficient-recovery check: true vs estimated f per antenna."""
    result = _single_round(cfg, TAG_FIG6, None)
    if out:
        rows = [
            (
                m,
                float(result.f_true.f[m].real),
                float(result.f_true.f[m].imag),
                float(result.f_aligned.f[m].real),
                float(result.f_aligned.f[m].imag),
            )
            for m in range(cfg.n_ant)
        ]
        write_csv(
            out,
            "fig6",
            ["index", "true_re", "true_im", "est_re", "est_im"],
            rows,
            meta={
                "seed": cfg.seed,
                "k": cfg.cal_k,
                "l": cfg.cal_l,
                "partition": cfg.partition_scheme,
                "nmse-f": result.nmse,
                "max-abs-dev": result.max_abs_dev,
                "residual": result.solution.residual,
                "eigen-gap": result.solution.eigen_gap,
            },
        )
    return result


# ---------------------------------------------------------------------------
# sweep experiments (fig7 / fig8)
# ---------------------------------------------------------------------------


def _sweep_cell(arr, profile, partition, channel, weights, noise, rng, truth) -> float:
    """NMSE of one sweep cell; inf marks an underdetermined (diverged) cell."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateSolutionWarning)
            est = bidirectional_measure(arr, profile, partition, channel, weights, noise, rng)
            solution = solve_calibration(build_q(est))
        return nmse_f(align_scalar(solution.f, truth), truth)
    except UnderdeterminedSystemError:
        return math.inf


def run_fig7(cfg: ScenarioConfig, out: str | None = None) -> list[tuple]:
    """Partition-scheme sweep over (K, L): rows (scheme, k, l, trial, nmse_f)."""
    arr = cfg.array_config()
    noise = cfg.noise_budget()
    partitions = _partitions(cfg)
    k_values = tuple(sorted(set(cfg.k_values)))
    l_values = tuple(sorted(set(cfg.l_values)))
    mcfg = group_measurement_config(arr, partitions[0][1], noise)

    def one_trial(t: int) -> list[tuple]:
        g_hw, g_ch, g_wt = default_rng([cfg.seed, TAG_FIG7, t]).spawn(3)
        profile = sample_hardware_profile(
            arr, g_hw, amp_imbalance_std=cfg.amp_imbalance_std,
            branch_phase_jitter=cfg.branch_phase_jitter,
        )
        channel = intra_array_channel(cfg.n_ant, g_ch, cfg.channel_params())
        truth = true_calibration(arr, profile)
        weights = random_beam_weights(mcfg, max(k_values), max(l_values), g_wt)
        rows = []
        for s_idx, (scheme, partition) in enumerate(partitions):
            for k in k_values:
                for l in l_values:
                    cell_rng = default_rng([cfg.seed, TAG_FIG7, t, s_idx, k, l])
                    val = _sweep_cell(
                        arr, profile, partition, channel,
                        weights.prefix(k, l), noise, cell_rng, truth,
                    )
                    rows.append((scheme, k, l, t, val))
        return rows

    rows = [row for chunk in _map_trials(one_trial, cfg.trials) for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    if out:
        write_csv(
            out,
            "fig7",
            ["scheme", "k", "l", "trial", "nmse_f"],
            rows,
            meta=_sweep_meta(cfg),
        )
    return rows


def run_fig8(cfg: ScenarioConfig, out: str | None = None) -> list[tuple]:
    """Noise-source split sweep: rows (scheme, noise_mode, k, l, trial, nmse_f)."""
    arr = cfg.array_config()
    base = cfg.noise_budget()
    modes = [("tx", base.with_mode("tx")), ("rx", base.with_mode("rx"))]
    partitions = _partitions(cfg)
    k_values = tuple(sorted(set(cfg.k_values)))
    l_values = tuple(sorted(set(cfg.l_values)))
    mcfg = group_measurement_config(arr, partitions[0][1], base)

    def one_trial(t: int) -> list[tuple]:
        g_hw, g_ch, g_wt = default_rng([cfg.seed, TAG_FIG8, t]).spawn(3)
        profile = sample_hardware_profile(
            arr, g_hw, amp_imbalance_std=cfg.amp_imbalance_std,
            branch_phase_jitter=cfg.branch_phase_jitter,
        )
        channel = intra_array_channel(cfg.n_ant, g_ch, cfg.channel_params())
        truth = true_calibration(arr, profile)
        weights = random_beam_weights(mcfg, max(k_values), max(l_values), g_wt)
        rows = []
        for s_idx, (scheme, partition) in enumerate(partitions):
            for m_idx, (mode, budget) in enumerate(modes):
                for k in k_values:
                    for l in l_values:
                        cell_rng = default_rng([cfg.seed, TAG_FIG8, t, s_idx, m_idx, k, l])
                        val = _sweep_cell(
                            arr, profile, partition, channel,
                            weights.prefix(k, l), budget, cell_rng, truth,
                        )
                        rows.append((scheme, mode, k, l, t, val))
        return rows

    rows = [row for chunk in _map_trials(one_trial, cfg.trials) for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4]))
    if out:
        write_csv(
            out,
            "fig8",
            ["scheme", "noise_mode", "k", "l", "trial", "nmse_f"],
            rows,
            meta=_sweep_meta(cfg),
        )
    return rows


def _sweep_meta(cfg: ScenarioConfig) -> dict:
    return {
        "seed": cfg.seed,
        "trials": cfg.trials,
        "n-ant": cfg.n_ant,
        "n-rf": cfg.n_rf,
        "noise-mode": cfg.noise_mode,
        "partition-block": cfg.partition_block,
        "tx-evm-db": cfg.tx_evm_db,
        "rx-noise-floor-dbm": cfg.rx_noise_floor_dbm,
    }


# ---------------------------------------------------------------------------
# downlink CSIT (fig9 / dl-nmse)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CsitSetup:
    t_bs: np.ndarray
    r_bs: np.ndarray
    ue_t: complex
    ue_r: complex
    f_comb: np.ndarray
    omega: np.ndarray


def _csit_setup(cfg: ScenarioConfig) -> CsitSetup:
    arr = cfg.array_config()
    g_bs, g_ue = default_rng([cfg.seed, TAG_FIG9]).spawn(2)
    bs_profile = sample_hardware_profile(
        arr, g_bs, amp_imbalance_std=cfg.amp_imbalance_std,
        branch_phase_jitter=cfg.branch_phase_jitter,
    )
    ue_profile = sample_hardware_profile(
        ArrayConfig(1, 1), g_ue, amp_imbalance_std=cfg.amp_imbalance_std
    )
    t_bs = merged_tx_response(arr, bs_profile)
    r_bs = merged_rx_response(arr, bs_profile)
    ue_t = complex(ue_profile.t1[0] * ue_profile.t2[0])
    ue_r = complex(ue_profile.r1[0] * ue_profile.r2[0])
    f_comb = (t_bs / r_bs) * (ue_r / ue_t)
    return CsitSetup(
        t_bs=t_bs, r_bs=r_bs, ue_t=ue_t, ue_r=ue_r,
        f_comb=f_comb, omega=ul_covariance(r_bs, ue_t),
    )


def csit_point(
    setup: CsitSetup, nf: float, nu: float, mc_trials: int, rng
) -> tuple[float, float]:
    """(closed-form, Monte Carlo) downlink NMSE at one error-grid point."""
    err = CsitErrorModel.from_nmse(nf, nu, setup.f_comb)
    closed = nmse_dl_expected(setup.omega, setup.f_comb, err)
    mc = nmse_dl_monte_carlo(
        setup.r_bs, setup.t_bs, setup.ue_t, setup.ue_r, err, mc_trials, rng
    )
    return closed, mc


def run_fig9(cfg: ScenarioConfig, out: str | None = None) -> list[tuple]:
    """CSIT error grid: rows (nmse_f, nmse_ul, nmse_dl_closed, nmse_dl_mc, trials, seed)."""
    setup = _csit_setup(cfg)
    grid = np.logspace(
        math.log10(cfg.csit_grid_min), math.log10(cfg.csit_grid_max), cfg.csit_grid_points
    )
    rows = []
    for i, nf in enumerate(grid):
        for j, nu in enumerate(grid):
            rng = default_rng([cfg.seed, TAG_FIG9, i, j])
            closed, mc = csit_point(setup, float(nf), float(nu), cfg.csit_mc_trials, rng)
            rows.append((float(nf), float(nu), closed, mc, cfg.csit_mc_trials, cfg.seed))
    if out:
        write_csv(
            out,
            "fig9",
            ["nmse_f", "nmse_ul", "nmse_dl_closed", "nmse_dl_mc", "trials", "seed"],
            rows,
            meta={"seed": cfg.seed, "n-ant": cfg.n_ant, "n-rf": cfg.n_rf,
                  "grid-points": cfg.csit_grid_points},
        )
    return rows


def run_dl_nmse(cfg: ScenarioConfig, nf: float, nu: float) -> tuple[float, float]:
    """Closed-form and Monte Carlo downlink NMSE at a single error point."""
    if nf < 0 or nu < 0:
        raise ConfigError("nmse targets must be non-negative")
    setup = _csit_setup(cfg)
    return csit_point(setup, nf, nu, cfg.csit_mc_trials, default_rng([cfg.seed, TAG_DL_POINT]))


# ---------------------------------------------------------------------------
# fully connected reference-link check
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FullyConnectedCheckResult:
    nmse_bs: float
    nmse_joint: float
    composite_reciprocity_dev: float
    internal_calibration_refused: bool
    threshold: float
    solution: CalibrationSolution

    @property
    def ok(self) -> bool:
        return (
            self.nmse_bs < self.threshold
            and self.internal_calibration_refused
            and self.composite_reciprocity_dev == 0.0
            and not self.solution.degenerate
        )


def run_fully_connected_check(
    cfg: ScenarioConfig, out: str | None = None
) -> FullyConnectedCheckResult:
    """End-to-end reference-link calibration of a fully connected array."""
    bs_cfg = ArrayConfig(cfg.ref_bs_n_ant, cfg.ref_bs_n_rf, FULLY_CONNECTED)
    ue_cfg = ArrayConfig(cfg.ref_ue_n_ant, cfg.ref_ue_n_rf, FULLY_CONNECTED)
    noise = cfg.noise_budget()
    g_bs, g_ue, g_ch, g_wdl, g_wul, g_ns = default_rng([cfg.seed, TAG_FC]).spawn(6)
    bs_profile = sample_hardware_profile(
        bs_cfg, g_bs, amp_imbalance_std=cfg.amp_imbalance_std,
        branch_phase_jitter=cfg.branch_phase_jitter,
    )
    ue_profile = sample_hardware_profile(
        ue_cfg, g_ue, amp_imbalance_std=cfg.amp_imbalance_std,
        branch_phase_jitter=cfg.branch_phase_jitter,
    )
    channel = rayleigh_channel(cfg.ref_ue_n_ant, cfg.ref_bs_n_ant, g_ch)
    mc_dl, mc_ul = reference_measurement_configs(bs_cfg, ue_cfg, noise)
    weights_dl = random_beam_weights(mc_dl, cfg.ref_k_dl, cfg.ref_l_dl, g_wdl)
    weights_ul = random_beam_weights(mc_ul, cfg.ref_k_ul, cfg.ref_l_ul, g_wul)

    result = calibrate_with_reference(
        bs_cfg, bs_profile, ue_cfg, ue_profile, channel,
        weights_dl, weights_ul, noise, g_ns,
    )

    comp_dl = composite_channel(channel, tx_config=bs_cfg, rx_config=ue_cfg)
    reverse = ChannelMatrix(channel.c.T, kind="air")
    comp_ul = composite_channel(reverse, tx_config=ue_cfg, rx_config=bs_cfg)
    recip_dev = float(np.max(np.abs(comp_ul - comp_dl.T)))

    try:
        merged_tx_response(bs_cfg, bs_profile)
        refused = False
    except UnsupportedArchitectureError:
        refused = True

    aligned_bs = align_scalar(result.f_bs_estimate, result.f_bs_true)
    nmse_bs = nmse_f(aligned_bs, result.f_bs_true)
    aligned_joint = align_scalar(result.solution.f, result.f_true)
    nmse_joint = nmse_f(aligned_joint, result.f_true)
    noiseless = noise.tx_noise_power_watts == 0 and noise.rx_noise_power_watts == 0
    threshold = 1e-8 if noiseless else 1e-2

    if out:
        solution_to_csv(
            result.solution,
            out,
            extra_meta={
                "nmse-bs": nmse_bs,
                "nmse-joint": nmse_joint,
                "n-bs-branches": result.n_bs_branches,
                "seed": cfg.seed,
            },
        )
    return FullyConnectedCheckResult(
        nmse_bs=nmse_bs,
        nmse_joint=nmse_joint,
        composite_reciprocity_dev=recip_dev,
        internal_calibration_refused=refused,
        threshold=threshold,
        solution=result.solution,
    )
