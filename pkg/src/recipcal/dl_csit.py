"""Downlink CSIT reconstruction from uplink estimates and its error budget.

In TDD operation the base station estimates the uplink effective channel and
maps it to the downlink through the calibration matrices of both ends:

    H_dl = F_ue^{-T} @ H_ul^T @ F_bs

For the single-antenna-terminal case studied here the terminal factor is one
scalar that the precoder cannot distinguish from the common calibration
ambiguity, so only the base-station vector matters up to scale.

Two error sources degrade the reconstruction: residual calibration error
(f̂ = f + Δf, Δf i.i.d. CN(0, sigma_f_sq)) and uplink estimation noise
(ĥ = h + Δh, Δh i.i.d. CN(0, sigma_ul_sq)). For a zero-mean uplink channel
with covariance Omega the reconstruction error power per antenna is

    NMSE_dl = ( sigma_f_sq * tr(Omega) + sigma_ul_sq * ||f̂||^2 ) / N

conditioned on the realized f̂; averaging also over Δf replaces ||f̂||^2 by
||f||^2 + N * sigma_f_sq.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import CalibrationMatrix, as_vector
from .errors import InvalidInputError, InvalidParameterError, SingularCalibrationError


@dataclass(frozen=True)
class CsitErrorModel:
    """Variance model of the two CSIT error sources.

    sigma_f_sq:  per-entry variance of the residual calibration error.
    sigma_ul_sq: per-entry variance of the uplink channel estimation error;
                 for the normalized channels used here this equals the uplink
                 NMSE directly.
    """

    sigma_f_sq: float
    sigma_ul_sq: float

    def __post_init__(self):
        if self.sigma_f_sq < 0 or self.sigma_ul_sq < 0:
            raise InvalidParameterError("error variances must be non-negative")

    @classmethod
    def from_nmse(cls, nmse_f: float, nmse_ul: float, f_ref) -> "CsitErrorModel":
        """Convert target NMSE figures into per-entry variances.

        The calibration NMSE of an i.i.d. perturbation is
        N * sigma_f_sq / ||f||^2, which is inverted here against the reference
        calibration vector.
        """
        if nmse_f < 0 or nmse_ul < 0:
            raise InvalidParameterError("NMSE targets must be non-negative")
        ref = as_vector(f_ref)
        energy = float(np.sum(np.abs(ref) ** 2))
        if energy == 0:
            raise InvalidInputError("reference calibration vector is identically zero")
        return cls(sigma_f_sq=nmse_f * energy / ref.size, sigma_ul_sq=nmse_ul)

    def nmse_f_of(self, f_ref) -> float:
        """Calibration NMSE implied by sigma_f_sq for the given reference."""
        ref = as_vector(f_ref)
        return self.sigma_f_sq * ref.size / float(np.sum(np.abs(ref) ** 2))


def reconstruct_dl(h_ul: np.ndarray, f_bs, f_ue=1.0 + 0j) -> np.ndarray:
    """Map an uplink effective channel to the downlink direction.

    h_ul has shape (n_bs, n_ue) (rows = receiving base-station antennas); the
    result has shape (n_ue, n_bs). ``f_ue`` may be a scalar (single-antenna
    terminal or unknown common factor) or a per-antenna vector.
    """
    h_ul = np.atleast_2d(np.asarray(h_ul, dtype=complex))
    fb = as_vector(f_bs)
    if np.any(fb == 0):
        raise SingularCalibrationError("base-station calibration vector has a zero entry")
    if h_ul.shape[0] != fb.size:
        raise InvalidInputError("h_ul row count must equal the base-station antenna count")
    fu = np.asarray(f_ue, dtype=complex)
    if fu.ndim == 0:
        fu = np.full(h_ul.shape[1], complex(fu))
    elif isinstance(f_ue, CalibrationMatrix):
        fu = f_ue.f
    if np.any(fu == 0):
        raise SingularCalibrationError("terminal calibration has a zero entry")
    if fu.size != h_ul.shape[1]:
        raise InvalidInputError("f_ue length must equal the terminal antenna count")
    return (1.0 / fu)[:, None] * h_ul.T * fb[None, :]


def ul_covariance(r_bs: np.ndarray, t_ue: complex) -> np.ndarray:
    """Covariance of the uplink effective channel for an i.i.d. unit channel.

    With h_ul = t_ue * (r_bs ∘ c) and c i.i.d. CN(0, 1):
    Omega = |t_ue|^2 * diag(|r_bs|^2).
    """
    r = np.asarray(r_bs, dtype=complex)
    return (abs(t_ue) ** 2) * np.diag(np.abs(r) ** 2).astype(complex)


def nmse_dl_closed_form(omega: np.ndarray, f_hat, err: CsitErrorModel) -> float:
    """Per-antenna downlink reconstruction error, conditioned on f̂."""
    f = as_vector(f_hat)
    n = f.size
    if omega.shape != (n, n):
        raise InvalidInputError("Omega must be square matching the calibration length")
    tr = float(np.trace(omega).real)
    return (err.sigma_f_sq * tr + err.sigma_ul_sq * float(np.sum(np.abs(f) ** 2))) / n


def nmse_dl_expected(omega: np.ndarray, f_true, err: CsitErrorModel) -> float:
    """Closed form averaged also over the calibration error draw.

    E||f̂||^2 = ||f||^2 + N * sigma_f_sq replaces the realized norm; this is
    the quantity an unconditional Monte Carlo converges to.
    """
    f = as_vector(f_true)
    n = f.size
    expected_norm_sq = float(np.sum(np.abs(f) ** 2)) + n * err.sigma_f_sq
    tr = float(np.trace(omega).real)
    return (err.sigma_f_sq * tr + err.sigma_ul_sq * expected_norm_sq) / n


def nmse_dl_monte_carlo(
    r_bs: np.ndarray,
    t_bs: np.ndarray,
    ue_t: complex,
    ue_r: complex,
    err: CsitErrorModel,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Sampled downlink NMSE for a single-antenna terminal.

    Each trial draws an i.i.d. CN(0,1) propagation vector, forms the true
    uplink/downlink effective channels from the hardware responses, perturbs
    the uplink estimate and the calibration vector per the error model, and
    accumulates the per-antenna reconstruction error power.
    """
    if trials < 1:
        raise InvalidParameterError("trials must be positive")
    r_bs = np.asarray(r_bs, dtype=complex)
    t_bs = np.asarray(t_bs, dtype=complex)
    if r_bs.shape != t_bs.shape or r_bs.ndim != 1:
        raise InvalidInputError("base-station response vectors must be 1-D of equal length")
    if ue_r == 0 or np.any(r_bs == 0):
        raise SingularCalibrationError("receive responses must be nonzero")
    n = r_bs.size
    f_comb = (t_bs / r_bs) * (ue_r / ue_t)  # combined calibration, terminal factor folded in

    def cn(shape, var):
        return np.sqrt(var / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    c = cn((trials, n), 1.0)
    h_ul = ue_t * r_bs[None, :] * c
    h_dl = ue_r * t_bs[None, :] * c
    f_hat = f_comb[None, :] + cn((trials, n), err.sigma_f_sq)
    h_ul_hat = h_ul + cn((trials, n), err.sigma_ul_sq)
    err_power = np.sum(np.abs(h_ul_hat * f_hat - h_dl) ** 2, axis=1)
    return float(np.mean(err_power) / n)


def beam_alignment(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized inner product |<a, b>| / (||a|| ||b||) of two beam directions."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise InvalidInputError("beam alignment of a zero vector is undefined")
    return float(np.abs(np.vdot(a, b)) / (na * nb))
