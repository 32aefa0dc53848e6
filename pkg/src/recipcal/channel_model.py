"""Propagation channel models.

Two kinds of channels appear in the simulations:

* the intra-array channel between antennas of one transceiver (near-field
  coupling within the same enclosure), used by internal calibration; and
* an air-interface channel between two separate transceivers, used for
  reference-link calibration and downlink CSIT studies.

Both are physically reciprocal. The intra-array matrix is square complex
symmetric with a zero diagonal (an antenna does not receive its own
transmission through the measurement path); the air-interface matrix is a
general complex matrix whose reverse-direction channel is its transpose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError

INTRA = "intra"
AIR = "air"


@dataclass(frozen=True)
class IntraArrayChannelParams:
    """Deterministic-plus-diffuse model of the coupling between array elements.

    The deterministic component for antennas at index distance d has magnitude
    ``mag_at_half_wavelength_db`` dB at d=1 and loses ``decay_db_per_step`` dB
    per additional index step; its phase is uniform per antenna pair. The
    diffuse component is circular complex Gaussian with variance
    ``multipath_variance`` and models everything reflected off the enclosure.
    """

    mag_at_half_wavelength_db: float = -15.0
    decay_db_per_step: float = 3.5
    multipath_variance: float = 1e-3

    def __post_init__(self):
        if self.decay_db_per_step < 0:
            raise InvalidParameterError("decay_db_per_step must be non-negative")
        if self.multipath_variance < 0:
            raise InvalidParameterError("multipath_variance must be non-negative")

    def mean_magnitude(self, distance: np.ndarray) -> np.ndarray:
        """Deterministic |c| at the given index distances (0 on the diagonal)."""
        d = np.asarray(distance, dtype=float)
        db = self.mag_at_half_wavelength_db - self.decay_db_per_step * (d - 1.0)
        mag = 10.0 ** (db / 20.0)
        return np.where(d >= 1, mag, 0.0)


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """A propagation channel realization.

    ``kind`` is ``"intra"`` (square symmetric, zero diagonal — enforced) or
    ``"air"`` (general rectangular). Rows index receive antennas, columns
    index transmit antennas.
    """

    c: np.ndarray
    kind: str = INTRA

    def __post_init__(self):
        arr = np.asarray(self.c, dtype=complex)
        if arr.ndim != 2:
            raise InvalidInputError("channel must be a 2-D complex matrix")
        if self.kind not in (INTRA, AIR):
            raise InvalidParameterError(f"unknown channel kind {self.kind!r}")
        if self.kind == INTRA:
            if arr.shape[0] != arr.shape[1]:
                raise InvalidInputError("intra-array channel must be square")
            if np.any(np.diagonal(arr) != 0):
                raise InvalidInputError("intra-array channel must have a zero diagonal")
            if not np.array_equal(arr, arr.T):
                raise InvalidInputError("intra-array channel must be exactly symmetric")
        object.__setattr__(self, "c", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.c.shape


def intra_array_channel(
    n_ant: int,
    rng: np.random.Generator,
    params: IntraArrayChannelParams | None = None,
) -> ChannelMatrix:
    """Draw one intra-array coupling realization.

    Each unordered antenna pair (i, j) gets a single draw
    ``c = |c̄(d)| e^{j 2π φ} + c̃`` with d = |i-j|, φ ~ U[0,1) and
    c̃ ~ CN(0, multipath_variance); the value is mirrored to (j, i) so the
    matrix is symmetric by construction, not merely in distribution.
    """
    if params is None:
        params = IntraArrayChannelParams()
    if n_ant < 2:
        raise InvalidParameterError("intra-array channel needs at least 2 antennas")
    iu, ju = np.triu_indices(n_ant, k=1)
    mean_mag = params.mean_magnitude(np.abs(iu - ju))
    phase = rng.uniform(0.0, 1.0, iu.size)
    diffuse_scale = np.sqrt(params.multipath_variance / 2.0)
    diffuse = diffuse_scale * (rng.standard_normal(iu.size) + 1j * rng.standard_normal(iu.size))
    vals = mean_mag * np.exp(2j * np.pi * phase) + diffuse
    c = np.zeros((n_ant, n_ant), dtype=complex)
    c[iu, ju] = vals
    c[ju, iu] = vals
    return ChannelMatrix(c, kind=INTRA)


def rayleigh_channel(n_rx: int, n_tx: int, rng: np.random.Generator) -> ChannelMatrix:
    """i.i.d. CN(0, 1) air-interface channel with n_rx rows and n_tx columns."""
    if n_rx < 1 or n_tx < 1:
        raise InvalidParameterError("channel dimensions must be positive")
    c = (rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))) / np.sqrt(2.0)
    return ChannelMatrix(c, kind=AIR)
