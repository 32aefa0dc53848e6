"""Fully connected hybrid arrays and reference-link calibration.

In a fully connected analog stage every RF chain reaches every antenna, so
per-chain and per-branch responses no longer merge into one per-antenna
diagonal. The equivalent model instead works in the *branch* domain: a
transceiver with n_rf chains and n_ant antennas has n_rf * n_ant branches
(branch (k, m) connects chain k to antenna m, flattened as k * n_ant + m),
and the antenna-domain propagation channel C lifts to a composite
branch-domain channel

    C_comp = U_rx @ C @ U_tx

where the summation matrices U simply fan branch signals into antennas
(U_tx = [I I ... I], one identity block per chain) and antennas into branches
(U_rx = U_tx^T of the receive side). C_comp inherits reciprocity from C, so
the branch-domain effective channels obey the same pairwise identity used by
internal calibration — but the groups now live on two different transceivers:
calibrating a fully connected array requires a cooperating reference terminal
rather than an internal antenna split.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import (
    FULLY_CONNECTED,
    ArrayConfig,
    CalibrationMatrix,
    HardwareProfile,
    Partition,
)
from .calibration import BidirectionalEstimate, CalibrationSolution, build_q, solve_calibration
from .channel_model import AIR, ChannelMatrix
from .effective_channel import (
    BeamWeightSet,
    MeasurementConfig,
    NoiseBudget,
    ls_estimate_channel,
    simulate_measurements,
)
from .errors import (
    InvalidParameterError,
    SingularHardwareError,
    UnsupportedArchitectureError,
)


def _require_fully_connected(config: ArrayConfig, what: str) -> None:
    if config.architecture != FULLY_CONNECTED:
        raise UnsupportedArchitectureError(f"{what} applies to fully connected arrays only")


def summation_matrix(config: ArrayConfig, side: str) -> np.ndarray:
    """Branch/antenna fan matrix of a fully connected analog stage.

    side="tx": (n_ant, n_ant * n_rf), one identity block per chain — antenna
    m sums the m-th branch of every chain. side="rx" is its transpose: each
    antenna signal is copied to that antenna's branch of every chain.
    """
    _require_fully_connected(config, "summation_matrix")
    blocks = [np.eye(config.n_ant)] * config.n_rf
    u_tx = np.hstack(blocks)
    if side == "tx":
        return u_tx
    if side == "rx":
        return u_tx.T
    raise InvalidParameterError(f"side must be 'tx' or 'rx', got {side!r}")


def merged_branch_responses(
    config: ArrayConfig, profile: HardwareProfile
) -> tuple[np.ndarray, np.ndarray]:
    """Per-branch transmit/receive responses (t, r), branch (k, m) -> index k*n_ant+m.

    The chain factor multiplies every branch of its chain and the antenna
    branch factor repeats across chains: t[k*n_ant + m] = t1[k] * t2[m].
    """
    _require_fully_connected(config, "merged_branch_responses")
    if profile.t1.size != config.n_rf or profile.t2.size != config.n_ant:
        raise InvalidParameterError(
            f"profile sized for ({profile.t2.size} antennas, {profile.t1.size} chains), "
            f"config expects ({config.n_ant}, {config.n_rf})"
        )
    return np.kron(profile.t1, profile.t2), np.kron(profile.r1, profile.r2)


def true_branch_calibration(config: ArrayConfig, profile: HardwareProfile) -> CalibrationMatrix:
    """Ground-truth branch-domain calibration vector t/r of a fully connected array."""
    t, r = merged_branch_responses(config, profile)
    if np.any(r == 0):
        raise SingularHardwareError("receive response has a zero entry; f is undefined")
    return CalibrationMatrix(t / r)


def composite_channel(
    channel: ChannelMatrix, tx_config: ArrayConfig, rx_config: ArrayConfig
) -> np.ndarray:
    """Lift an antenna-domain channel to the branch domain of both ends.

    channel.c has shape (rx n_ant, tx n_ant); the result has shape
    (rx n_rf * n_ant, tx n_ant * n_rf). Reversing the link transposes the
    result exactly, since the receive fan matrix is the transpose of the
    transmit fan matrix.
    """
    if channel.c.shape != (rx_config.n_ant, tx_config.n_ant):
        raise InvalidParameterError(
            f"channel shape {channel.c.shape} does not match "
            f"(rx n_ant {rx_config.n_ant}, tx n_ant {tx_config.n_ant})"
        )
    u_rx = summation_matrix(rx_config, "rx")
    u_tx = summation_matrix(tx_config, "tx")
    return u_rx @ channel.c @ u_tx


def reference_measurement_configs(
    bs_config: ArrayConfig, ue_config: ArrayConfig, noise: NoiseBudget
) -> tuple[MeasurementConfig, MeasurementConfig]:
    """(downlink, uplink) measurement dimensions for a reference link.

    Both directions operate on branch counts; chain counts set the
    block-diagonal weight structure and the stream counts.
    """
    for cfg in (bs_config, ue_config):
        _require_fully_connected(cfg, "reference_measurement_configs")
    dl = MeasurementConfig(
        n_tx_ant=bs_config.n_branches,
        n_tx_chains=bs_config.n_rf,
        n_rx_ant=ue_config.n_branches,
        n_rx_streams=ue_config.n_rf,
        pilot_amplitude=noise.pilot_amplitude,
    )
    ul = MeasurementConfig(
        n_tx_ant=ue_config.n_branches,
        n_tx_chains=ue_config.n_rf,
        n_rx_ant=bs_config.n_branches,
        n_rx_streams=bs_config.n_rf,
        pilot_amplitude=noise.pilot_amplitude,
    )
    return dl, ul


@dataclass(frozen=True, eq=False)
class ReferenceCalibrationResult:
    """Joint branch-domain calibration estimate over BS then UE branches."""

    solution: CalibrationSolution
    f_true: CalibrationMatrix
    n_bs_branches: int

    @property
    def f_bs_estimate(self) -> np.ndarray:
        return self.solution.f.f[: self.n_bs_branches]

    @property
    def f_bs_true(self) -> np.ndarray:
        return self.f_true.f[: self.n_bs_branches]


def effective_reference_channels(
    bs_config: ArrayConfig,
    bs_profile: HardwareProfile,
    ue_config: ArrayConfig,
    ue_profile: HardwareProfile,
    channel: ChannelMatrix,
) -> tuple[np.ndarray, np.ndarray]:
    """True branch-domain effective channels (downlink, uplink) of the link."""
    if channel.kind != AIR:
        raise InvalidParameterError("reference link needs an air-interface channel")
    comp_dl = composite_channel(channel, tx_config=bs_config, rx_config=ue_config)
    t_bs, r_bs = merged_branch_responses(bs_config, bs_profile)
    t_ue, r_ue = merged_branch_responses(ue_config, ue_profile)
    h_dl = r_ue[:, None] * comp_dl * t_bs[None, :]
    h_ul = r_bs[:, None] * comp_dl.T * t_ue[None, :]
    return h_dl, h_ul


def calibrate_with_reference(
    bs_config: ArrayConfig,
    bs_profile: HardwareProfile,
    ue_config: ArrayConfig,
    ue_profile: HardwareProfile,
    channel: ChannelMatrix,
    weights_dl: BeamWeightSet,
    weights_ul: BeamWeightSet,
    noise: NoiseBudget,
    rng: np.random.Generator,
) -> ReferenceCalibrationResult:
    """Joint calibration of a fully connected array against a reference terminal.

    Measures both link directions in the branch domain, then feeds the pair
    of channel estimates to the same pairwise-cost eigen solver used for
    internal calibration, with group A = BS branches and group B = UE
    branches. The solution carries one common scalar ambiguity across both
    ends; slice the BS portion and align it to use it.
    """
    h_dl, h_ul = effective_reference_channels(
        bs_config, bs_profile, ue_config, ue_profile, channel
    )
    g_dl, g_ul = rng.spawn(2)
    est_dl = ls_estimate_channel(simulate_measurements(h_dl, weights_dl, noise, g_dl))
    est_ul = ls_estimate_channel(simulate_measurements(h_ul, weights_ul, noise, g_ul))

    n_bs = bs_config.n_branches
    partition = Partition(
        group_a=np.arange(n_bs), group_b=n_bs + np.arange(ue_config.n_branches)
    )
    est = BidirectionalEstimate(partition=partition, h_ab=est_dl, h_ba=est_ul)
    solution = solve_calibration(build_q(est))

    f_true = np.concatenate(
        [true_branch_calibration(bs_config, bs_profile).f,
         true_branch_calibration(ue_config, ue_profile).f]
    )
    return ReferenceCalibrationResult(
        solution=solution, f_true=CalibrationMatrix(f_true), n_bs_branches=n_bs
    )
