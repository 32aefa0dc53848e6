"""Internal reciprocity calibration of a single array.

The array is split into two groups that measure each other over the air
inside the enclosure: group A transmits pilot beams while group B receives,
then the roles swap. Estimates of the two directed effective channels pin the
calibration vector f down to one common scalar, because reciprocity of the
coupling channel forces f_j * h_{i->j} = f_i * h_{j->i} for every cross-group
antenna pair (i in A, j in B).

Stacking those pair equations gives a least-squares cost that is an exact
Hermitian quadratic form J(f) = f^H Q f with positive semidefinite Q, so the
minimizer over unit-norm f is the eigenvector of the smallest eigenvalue of
Q. The residual cost of the returned solution equals that eigenvalue.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .array_model import (
    ArrayConfig,
    CalibrationMatrix,
    HardwareProfile,
    Partition,
    as_vector,
    merged_rx_response,
    merged_tx_response,
)
from .channel_model import INTRA, ChannelMatrix
from .effective_channel import (
    BeamWeightSet,
    MeasurementConfig,
    NoiseBudget,
    ls_estimate_channel,
    simulate_measurements,
)
from .errors import ContractViolationError, DegenerateSolutionWarning, InvalidInputError
from .errors import InvalidParameterError
from .errors import UnsupportedPartitionError

# Relative eigenvalue gap below which the smallest eigenvector is ambiguous.
DEGENERACY_GAP = 1e-6

# Tolerance on relative Hermitian asymmetry of an externally supplied Q.
HERMITIAN_TOL = 1e-9


def group_measurement_config(
    config: ArrayConfig, partition: Partition, noise: NoiseBudget
) -> MeasurementConfig:
    """Measurement dimensions for one group-to-group direction.

    Each group keeps the transceiver's full chain count during calibration:
    its antennas are split (in group order) into n_rf equal virtual subarray
    blocks, which sets the pilot length and the per-measurement stream count
    to n_rf. Group sizes must therefore be divisible by n_rf.
    """
    group = partition.group_a.size
    if group != partition.group_b.size:
        raise UnsupportedPartitionError("internal calibration requires equal-size groups")
    if group % config.n_rf != 0:
        raise UnsupportedPartitionError(
            f"group size {group} is not divisible by the chain count {config.n_rf}"
        )
    return MeasurementConfig(
        n_tx_ant=group,
        n_tx_chains=config.n_rf,
        n_rx_ant=group,
        n_rx_streams=config.n_rf,
        pilot_amplitude=noise.pilot_amplitude,
    )


@dataclass(frozen=True, eq=False)
class BidirectionalEstimate:
    """Estimated cross-group effective channels of one calibration round.

    h_ab[j, i] is the response at receive antenna group_b[j] to a unit input
    at transmit antenna group_a[i]; h_ba is the reverse direction.
    """

    partition: Partition
    h_ab: np.ndarray
    h_ba: np.ndarray

    def __post_init__(self):
        na, nb = self.partition.group_a.size, self.partition.group_b.size
        if self.h_ab.shape != (nb, na) or self.h_ba.shape != (na, nb):
            raise InvalidParameterError("estimate shapes do not match the partition")


def effective_group_channels(
    config: ArrayConfig,
    profile: HardwareProfile,
    partition: Partition,
    channel: ChannelMatrix,
) -> tuple[np.ndarray, np.ndarray]:
    """True directed effective channels (H_ab, H_ba) for a partitioned array."""
    if channel.kind != INTRA or channel.c.shape[0] != config.n_ant:
        raise InvalidParameterError("need an intra-array channel matching the array size")
    tx = merged_tx_response(config, profile)
    rx = merged_rx_response(config, profile)
    a, b = partition.group_a, partition.group_b
    h_ab = rx[b, None] * channel.c[np.ix_(b, a)] * tx[None, a]
    h_ba = rx[a, None] * channel.c[np.ix_(a, b)] * tx[None, b]
    return h_ab, h_ba


def bidirectional_measure(
    config: ArrayConfig,
    profile: HardwareProfile,
    partition: Partition,
    channel: ChannelMatrix,
    weights: BeamWeightSet,
    noise: NoiseBudget,
    rng: np.random.Generator,
) -> BidirectionalEstimate:
    """Measure and estimate both cross-group effective channels.

    The same weight set serves both directions (groups have equal size, so
    shapes match). Noise is drawn from one substream per direction.
    """
    if partition.group_a.size != partition.group_b.size:
        raise UnsupportedPartitionError("internal calibration requires equal-size groups")
    h_ab, h_ba = effective_group_channels(config, profile, partition, channel)
    g_ab, g_ba = rng.spawn(2)
    est_ab = ls_estimate_channel(simulate_measurements(h_ab, weights, noise, g_ab))
    est_ba = ls_estimate_channel(simulate_measurements(h_ba, weights, noise, g_ba))
    return BidirectionalEstimate(partition=partition, h_ab=est_ab, h_ba=est_ba)


@dataclass(frozen=True, eq=False)
class QMatrix:
    """Hermitian PSD matrix of the pairwise reciprocity cost, antenna-indexed."""

    q: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.q, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
            raise InvalidParameterError("Q must be square with size >= 2")
        object.__setattr__(self, "q", arr)

    @property
    def n(self) -> int:
        return self.q.shape[0]


def build_q(est: BidirectionalEstimate) -> QMatrix:
    """Assemble the quadratic-form matrix of the reciprocity mismatch cost.

    With i running over group A and j over group B,
    J(f) = sum_{i,j} |f_j h_{i->j} - f_i h_{j->i}|^2 = f^H Q f, so

        Q[i, i] = sum_j |h_{j->i}|^2          Q[j, j] = sum_i |h_{i->j}|^2
        Q[i, j] = -conj(h_{j->i}) h_{i->j}    Q[j, i] = conj(Q[i, j])

    and entries between antennas of the same group are zero.
    """
    a, b = est.partition.group_a, est.partition.group_b
    n = est.partition.n_ant
    q = np.zeros((n, n), dtype=complex)
    q[a, a] = np.sum(np.abs(est.h_ba) ** 2, axis=1)
    q[b, b] = np.sum(np.abs(est.h_ab) ** 2, axis=1)
    cross = -np.conj(est.h_ba) * est.h_ab.T
    q[np.ix_(a, b)] = cross
    q[np.ix_(b, a)] = np.conj(cross).T
    return QMatrix(q)


@dataclass(frozen=True, eq=False)
class CalibrationSolution:
    """Unit-norm calibration estimate with solver diagnostics.

    residual is the reciprocity cost J at the solution, which equals the
    smallest eigenvalue of Q. eigen_gap is (lambda_1 - lambda_0) / lambda_1;
    values below DEGENERACY_GAP mark an ambiguous (degenerate) solution.
    """

    f: CalibrationMatrix
    residual: float
    second_eigenvalue: float
    eigen_gap: float
    degenerate: bool


def solve_calibration(qm: QMatrix) -> CalibrationSolution:
    """Smallest-eigenvector estimate of the calibration vector.

    Returns the unit-norm eigenvector of the smallest eigenvalue of Q, with
    the deterministic phase convention that the first nonzero entry is real
    positive. Warns (and flags the solution) when the two smallest
    eigenvalues nearly coincide, in which case the minimizer is not unique.
    """
    q = qm.q
    asym = np.linalg.norm(q - q.conj().T)
    scale = np.linalg.norm(q)
    if scale > 0 and asym > HERMITIAN_TOL * scale:
        raise ContractViolationError(
            f"Q is not Hermitian (relative asymmetry {asym / scale:.2e})"
        )
    q = 0.5 * (q + q.conj().T)
    vals, vecs = scipy.linalg.eigh(q, check_finite=False)
    f = vecs[:, 0]

    nonzero = np.flatnonzero(np.abs(f) > 0)
    pivot = nonzero[0] if nonzero.size else 0
    if np.abs(f[pivot]) > 0:
        f = f * (np.conj(f[pivot]) / np.abs(f[pivot]))
    f /= np.linalg.norm(f)

    lam0, lam1 = float(vals[0]), float(vals[1])
    gap = (lam1 - lam0) / lam1 if lam1 > 0 else 0.0
    degenerate = gap < DEGENERACY_GAP
    if degenerate:
        warnings.warn(
            f"calibration eigenproblem is degenerate (relative gap {gap:.2e}); "
            "the estimate is not unique",
            DegenerateSolutionWarning,
            stacklevel=2,
        )
    return CalibrationSolution(
        f=CalibrationMatrix(f),
        residual=lam0,
        second_eigenvalue=lam1,
        eigen_gap=gap,
        degenerate=degenerate,
    )


def align_scalar(f_est, f_ref) -> CalibrationMatrix:
    """Rescale f_est by the least-squares optimal complex scalar toward f_ref.

    The estimator determines f only up to one complex scalar; this removes
    the ambiguity against a reference by minimizing ||a f_est - f_ref||.
    """
    est, ref = as_vector(f_est), as_vector(f_ref)
    if est.shape != ref.shape:
        raise InvalidInputError("aligned vectors must have equal length")
    denom = np.vdot(est, est)
    if denom == 0:
        raise InvalidInputError("cannot align an identically zero estimate")
    alpha = np.vdot(est, ref) / denom
    return CalibrationMatrix(alpha * est)


def nmse_f(f_est, f_ref) -> float:
    """Normalized mean square error ||f_est - f_ref||^2 / ||f_ref||^2."""
    est, ref = as_vector(f_est), as_vector(f_ref)
    if est.shape != ref.shape:
        raise InvalidInputError("compared vectors must have equal length")
    ref_energy = float(np.sum(np.abs(ref) ** 2))
    if ref_energy == 0:
        raise InvalidInputError("reference vector is identically zero")
    return float(np.sum(np.abs(est - ref) ** 2) / ref_energy)
