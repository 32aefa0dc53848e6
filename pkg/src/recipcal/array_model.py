"""Hardware model of a hybrid analog-digital transceiver front end.

A transceiver has ``n_rf`` RF chains driving ``n_ant`` antennas. Frequency-flat
hardware responses are split into a per-chain part (up/down-conversion mixers,
one complex factor per RF chain) and a per-branch part (PA/LNA and the
connected phase-shifter branch, one complex factor per antenna). For the
subarray architecture every antenna belongs to exactly one chain, and both
parts merge into a single diagonal per-antenna response:

    tx[m] = t2[m] * t1[chain(m)]      rx[m] = r1[chain(m)] * r2[m]

with ``chain(m) = m // (n_ant // n_rf)`` (contiguous blocks). The calibration
vector compares the two directions elementwise: f[m] = tx[m] / rx[m]. Uplink
and downlink effective channels seen by the digital domain then satisfy
``H_dl = F_rx^{-T} H_ul^T F_tx`` for any reciprocal propagation channel, which
is what makes f worth estimating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidParameterError,
    SingularHardwareError,
    UnsupportedArchitectureError,
    UnsupportedPartitionError,
)

SUBARRAY = "subarray"
FULLY_CONNECTED = "fully-connected"

TWO_SIDES = "two-sides"
INTERLEAVED = "interleaved"


@dataclass(frozen=True)
class ArrayConfig:
    """Static geometry of one transceiver.

    ``element_spacing`` is in wavelengths and only gives meaning to the
    antenna-index distances used by the intra-array channel model (adjacent
    antennas are half a wavelength apart by default).
    """

    n_ant: int
    n_rf: int
    architecture: str = SUBARRAY
    element_spacing: float = 0.5

    def __post_init__(self):
        if self.n_ant < 1 or self.n_rf < 1:
            raise InvalidParameterError("n_ant and n_rf must be positive")
        if self.n_rf > self.n_ant:
            raise InvalidParameterError("n_rf must not exceed n_ant")
        if self.architecture not in (SUBARRAY, FULLY_CONNECTED):
            raise InvalidParameterError(f"unknown architecture {self.architecture!r}")
        if self.architecture == SUBARRAY and self.n_ant % self.n_rf != 0:
            raise InvalidParameterError("subarray architecture requires n_rf | n_ant")
        if self.element_spacing <= 0:
            raise InvalidParameterError("element_spacing must be positive")

    @property
    def branches_per_chain(self) -> int:
        if self.architecture != SUBARRAY:
            raise UnsupportedArchitectureError(
                "branches_per_chain is defined for the subarray architecture only"
            )
        return self.n_ant // self.n_rf

    @property
    def n_branches(self) -> int:
        """Number of analog branches (phase shifter paths)."""
        if self.architecture == SUBARRAY:
            return self.n_ant
        return self.n_ant * self.n_rf

    def chain_of_antenna(self) -> np.ndarray:
        """Chain index of each antenna (subarray wiring, contiguous blocks)."""
        return np.repeat(np.arange(self.n_rf), self.branches_per_chain)


@dataclass(frozen=True, eq=False)
class HardwareProfile:
    """One draw of the front-end responses of a transceiver.

    t1/r1: per-chain transmit/receive mixer responses, length n_rf.
    t2/r2: per-branch transmit/receive responses, length n_ant (subarray) or
           n_ant per chain (fully connected, where the same physical antenna
           branch hardware is shared by the chain outputs it sums).
    """

    t1: np.ndarray
    r1: np.ndarray
    t2: np.ndarray
    r2: np.ndarray

    def __post_init__(self):
        for name in ("t1", "r1", "t2", "r2"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.ndim != 1:
                raise InvalidParameterError(f"{name} must be a 1-D complex vector")
            object.__setattr__(self, name, arr)
        if self.t1.shape != self.r1.shape or self.t2.shape != self.r2.shape:
            raise InvalidParameterError("chain and branch response pairs must match in length")


@dataclass(frozen=True, eq=False)
class CalibrationMatrix:
    """Diagonal calibration matrix stored as its diagonal vector ``f``."""

    f: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.f, dtype=complex)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidParameterError("calibration vector must be 1-D and non-empty")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError("calibration vector must be finite")
        object.__setattr__(self, "f", arr)

    def __len__(self) -> int:
        return self.f.size


def as_vector(x) -> np.ndarray:
    """Accept a CalibrationMatrix or a plain 1-D array and return the vector."""
    if isinstance(x, CalibrationMatrix):
        return x.f
    return np.asarray(x, dtype=complex)


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint split of an antenna index set into two groups (0-based).

    Index arrays are sorted; the union must cover every index exactly once.
    Internal calibration of one array uses equal-size groups; the
    reference-link variant pairs groups of different sizes (all branches of
    one transceiver against all branches of another).
    """

    group_a: np.ndarray
    group_b: np.ndarray

    def __post_init__(self):
        a = np.sort(np.asarray(self.group_a, dtype=int))
        b = np.sort(np.asarray(self.group_b, dtype=int))
        object.__setattr__(self, "group_a", a)
        object.__setattr__(self, "group_b", b)
        if a.size == 0 or b.size == 0:
            raise UnsupportedPartitionError("both groups must be non-empty")
        n = a.size + b.size
        merged = np.concatenate([a, b])
        if np.intersect1d(a, b).size or not np.array_equal(np.sort(merged), np.arange(n)):
            raise UnsupportedPartitionError("groups must partition 0..n_ant-1")

    @property
    def n_ant(self) -> int:
        return self.group_a.size + self.group_b.size


def make_partition(n_ant: int, scheme: str, block: int | None = None) -> Partition:
    """Build one of the two supported antenna partitions.

    two-sides:    group A is the first half of the array, B the second half.
    interleaved:  alternating blocks of ``block`` antennas go to A and B;
                  ``block`` must divide n_ant/2.
    """
    if n_ant < 2 or n_ant % 2 != 0:
        raise UnsupportedPartitionError("partitioning requires an even antenna count >= 2")
    if scheme == TWO_SIDES:
        half = n_ant // 2
        return Partition(np.arange(half), np.arange(half, n_ant))
    if scheme == INTERLEAVED:
        if block is None or block < 1:
            raise UnsupportedPartitionError("interleaved scheme requires a positive block size")
        if (n_ant // 2) % block != 0:
            raise UnsupportedPartitionError("block size must divide n_ant/2")
        idx = np.arange(n_ant)
        in_a = (idx // block) % 2 == 0
        return Partition(idx[in_a], idx[~in_a])
    raise UnsupportedPartitionError(f"unknown partition scheme {scheme!r}")


# ---------------------------------------------------------------------------
# hardware sampling
# ---------------------------------------------------------------------------

# Var(a^2) for a ~ U[1-eps, 1+eps] is (4/3) eps^2 + (4/45) eps^4; the sampler
# inverts this so that callers can specify the std of the squared magnitude.
_VAR_COEF_2 = 4.0 / 3.0
_VAR_COEF_4 = 4.0 / 45.0


def amp_imbalance_halfwidth(amp_imbalance_std: float) -> float:
    """Half-width eps of the uniform amplitude law U[1-eps, 1+eps].

    Chosen so that the standard deviation of the squared amplitude equals
    ``amp_imbalance_std``. Raises when no eps < 1 exists (entries would be
    allowed to reach zero).
    """
    if amp_imbalance_std < 0:
        raise InvalidParameterError("amp_imbalance_std must be non-negative")
    if amp_imbalance_std == 0:
        return 0.0
    s2 = amp_imbalance_std**2
    disc = _VAR_COEF_2**2 + 4.0 * _VAR_COEF_4 * s2
    u = (-_VAR_COEF_2 + math.sqrt(disc)) / (2.0 * _VAR_COEF_4)
    eps = math.sqrt(u)
    if eps >= 1.0:
        raise InvalidParameterError(
            f"amp_imbalance_std={amp_imbalance_std} too large for the uniform amplitude model"
        )
    return eps


def sample_hardware_profile(
    config: ArrayConfig,
    rng: np.random.Generator,
    amp_imbalance_std: float = 0.1,
    branch_phase_jitter: float = 0.0,
) -> HardwareProfile:
    """Draw one hardware realization.

    Mixer responses (per chain) have unit magnitude and phases uniform on
    [-pi, pi). Branch responses have zero phase and amplitudes uniform on
    [1-eps, 1+eps] with eps set by ``amp_imbalance_halfwidth``. A nonzero
    ``branch_phase_jitter`` (radians) adds uniform phase noise to the branch
    responses for robustness experiments; the default keeps them real.
    """
    eps = amp_imbalance_halfwidth(amp_imbalance_std)
    n_branch = config.n_ant

    def chain_resp() -> np.ndarray:
        return np.exp(1j * rng.uniform(-np.pi, np.pi, config.n_rf))

    def branch_resp() -> np.ndarray:
        amp = rng.uniform(1.0 - eps, 1.0 + eps, n_branch)
        if branch_phase_jitter > 0:
            return amp * np.exp(
                1j * rng.uniform(-branch_phase_jitter, branch_phase_jitter, n_branch)
            )
        return amp.astype(complex)

    return HardwareProfile(t1=chain_resp(), r1=chain_resp(), t2=branch_resp(), r2=branch_resp())


# ---------------------------------------------------------------------------
# merged responses and the true calibration vector (subarray)
# ---------------------------------------------------------------------------


def _require_subarray(config: ArrayConfig, what: str) -> None:
    if config.architecture != SUBARRAY:
        raise UnsupportedArchitectureError(
            f"{what} applies to the subarray architecture only; "
            "fully connected arrays use branch-level responses"
        )


def merged_tx_response(config: ArrayConfig, profile: HardwareProfile) -> np.ndarray:
    """Per-antenna transmit response t2[m] * t1[chain(m)] (length n_ant)."""
    _require_subarray(config, "merged_tx_response")
    _check_profile_shapes(config, profile)
    return profile.t2 * profile.t1[config.chain_of_antenna()]


def merged_rx_response(config: ArrayConfig, profile: HardwareProfile) -> np.ndarray:
    """Per-antenna receive response r1[chain(m)] * r2[m] (length n_ant)."""
    _require_subarray(config, "merged_rx_response")
    _check_profile_shapes(config, profile)
    return profile.r1[config.chain_of_antenna()] * profile.r2


def true_calibration(config: ArrayConfig, profile: HardwareProfile) -> CalibrationMatrix:
    """Ground-truth calibration vector f[m] = tx[m] / rx[m] for a subarray."""
    tx = merged_tx_response(config, profile)
    rx = merged_rx_response(config, profile)
    if np.any(rx == 0):
        raise SingularHardwareError("receive response has a zero entry; f is undefined")
    return CalibrationMatrix(tx / rx)


def _check_profile_shapes(config: ArrayConfig, profile: HardwareProfile) -> None:
    if profile.t1.size != config.n_rf or profile.t2.size != config.n_ant:
        raise InvalidParameterError(
            f"profile sized for ({profile.t2.size} antennas, {profile.t1.size} chains), "
            f"config expects ({config.n_ant}, {config.n_rf})"
        )
