"""Effective-channel measurement and least-squares estimation.

A transmitter sends K pilot beams (analog precoder + digital pilot vector per
beam) while the receiver cycles through L analog combiners; every
(combiner, beam) pair yields one received vector of ``n_rx_streams`` samples.
Stacking all of them gives

    Y = W @ H @ P + noise

where H is the effective channel (hardware responses folded in), P stacks the
antenna-domain pilot columns and W stacks the combiner rows. The least-squares
channel estimate exploits that the measurement operator is the Kronecker
product of the two stacked weight matrices, so the big vectorized system is
never formed: two small orthogonal-decomposition solves give the same
minimum-norm solution.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError, UnderdeterminedSystemError


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class NoiseBudget:
    """Impairment levels for one measurement campaign.

    Transmit-side noise models PA/DAC imperfection as additive circular
    Gaussian noise on the antenna-domain signal; its power per antenna is set
    by the EVM figure relative to the per-antenna transmit power, with the
    convention that the transmit SNR in dB equals ``-2 * tx_evm_db`` (an EVM
    of -20 dB means a 40 dB transmit SNR). Receive-side noise is thermal noise
    referred to the digital domain, one draw per output sample.
    """

    tx_evm_db: float = -20.0
    tx_power_dbm_per_antenna: float = 0.0
    rx_noise_floor_dbm: float = -97.0
    enable_tx: bool = True
    enable_rx: bool = True

    def __post_init__(self):
        if self.tx_evm_db > 0:
            raise InvalidParameterError("tx_evm_db must be <= 0 dB")

    @property
    def tx_power_watts(self) -> float:
        return dbm_to_watts(self.tx_power_dbm_per_antenna)

    @property
    def tx_noise_power_watts(self) -> float:
        """Per-antenna transmit noise power (watts); 0 when disabled."""
        if not self.enable_tx:
            return 0.0
        return self.tx_power_watts * 10.0 ** (self.tx_evm_db / 5.0)

    @property
    def rx_noise_power_watts(self) -> float:
        """Per-sample digital-domain receive noise power (watts); 0 when disabled."""
        if not self.enable_rx:
            return 0.0
        return dbm_to_watts(self.rx_noise_floor_dbm)

    @property
    def pilot_amplitude(self) -> float:
        """Pilot symbol magnitude giving the configured per-antenna power."""
        return float(np.sqrt(self.tx_power_watts))

    @classmethod
    def noiseless(cls, **kw) -> "NoiseBudget":
        return cls(enable_tx=False, enable_rx=False, **kw)

    def with_mode(self, mode: str) -> "NoiseBudget":
        """Return a copy with enables set from 'both'|'tx'|'rx'|'none'."""
        flags = {
            "both": (True, True),
            "tx": (True, False),
            "rx": (False, True),
            "none": (False, False),
        }
        if mode not in flags:
            raise InvalidParameterError(f"unknown noise mode {mode!r}")
        tx, rx = flags[mode]
        return replace(self, enable_tx=tx, enable_rx=rx)


@dataclass(frozen=True)
class MeasurementConfig:
    """Dimensions of one directed measurement link.

    The transmit side exposes ``n_tx_chains`` digital inputs feeding
    block-diagonal analog precoders over ``n_tx_ant`` antennas; the receive
    side produces ``n_rx_streams`` digital outputs from block-diagonal analog
    combiners over ``n_rx_ant`` antennas (the digital combiner is the
    identity, pilots being inserted behind the digital precoder).
    """

    n_tx_ant: int
    n_tx_chains: int
    n_rx_ant: int
    n_rx_streams: int
    pilot_amplitude: float

    def __post_init__(self):
        if min(self.n_tx_ant, self.n_tx_chains, self.n_rx_ant, self.n_rx_streams) < 1:
            raise InvalidParameterError("measurement dimensions must be positive")
        if self.n_tx_ant % self.n_tx_chains != 0:
            raise InvalidParameterError("n_tx_chains must divide n_tx_ant")
        if self.n_rx_ant % self.n_rx_streams != 0:
            raise InvalidParameterError("n_rx_streams must divide n_rx_ant")
        if not self.pilot_amplitude > 0:
            raise InvalidParameterError("pilot_amplitude must be positive")


@dataclass(frozen=True, eq=False)
class BeamWeightSet:
    """K pilot beams and L combiners for one link direction.

    precoders: (K, n_tx_ant, n_tx_chains), block-diagonal, unit-modulus
               nonzeros (one phase shifter per antenna).
    pilots:    (K, n_tx_chains) QPSK symbols scaled to the pilot amplitude.
    combiners: (L, n_rx_streams, n_rx_ant), block-diagonal, unit modulus.
    """

    precoders: np.ndarray
    pilots: np.ndarray
    combiners: np.ndarray

    def __post_init__(self):
        if self.precoders.ndim != 3 or self.pilots.ndim != 2 or self.combiners.ndim != 3:
            raise InvalidParameterError("malformed beam weight arrays")
        if self.precoders.shape[0] != self.pilots.shape[0]:
            raise InvalidParameterError("precoder and pilot counts differ")
        if self.precoders.shape[2] != self.pilots.shape[1]:
            raise InvalidParameterError("pilot length must equal n_tx_chains")

    @property
    def k(self) -> int:
        return self.precoders.shape[0]

    @property
    def l(self) -> int:
        return self.combiners.shape[0]

    def prefix(self, k: int, l: int) -> "BeamWeightSet":
        """First k beams and first l combiners (views, no copies)."""
        if not (1 <= k <= self.k and 1 <= l <= self.l):
            raise InvalidParameterError("prefix size out of range")
        return BeamWeightSet(self.precoders[:k], self.pilots[:k], self.combiners[:l])


def random_beam_weights(
    config: MeasurementConfig, k: int, l: int, rng: np.random.Generator
) -> BeamWeightSet:
    """Draw K random pilot beams and L random combiners.

    Phase-shifter weights are unit modulus with phases uniform on [-pi, pi);
    pilots are QPSK at the configured amplitude. Draws for beam index k come
    from substreams independent of K and L, so the weight set for (K, L) is a
    prefix of the set for any (K' >= K, L' >= L) under the same generator
    seed — sweeps can grow the measurement grid without reshuffling earlier
    beams.
    """
    if k < 1 or l < 1:
        raise InvalidParameterError("k and l must be positive")
    g_prec, g_pilot, g_comb = rng.spawn(3)

    tx_chain = np.repeat(np.arange(config.n_tx_chains), config.n_tx_ant // config.n_tx_chains)
    phases = g_prec.uniform(-np.pi, np.pi, (k, config.n_tx_ant))
    precoders = np.zeros((k, config.n_tx_ant, config.n_tx_chains), dtype=complex)
    precoders[:, np.arange(config.n_tx_ant), tx_chain] = np.exp(1j * phases)

    qpsk_index = g_pilot.integers(0, 4, (k, config.n_tx_chains))
    pilots = config.pilot_amplitude * np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * qpsk_index))

    rx_chain = np.repeat(np.arange(config.n_rx_streams), config.n_rx_ant // config.n_rx_streams)
    w_phases = g_comb.uniform(-np.pi, np.pi, (l, config.n_rx_ant))
    combiners = np.zeros((l, config.n_rx_streams, config.n_rx_ant), dtype=complex)
    combiners[:, rx_chain, np.arange(config.n_rx_ant)] = np.exp(1j * w_phases)

    return BeamWeightSet(precoders=precoders, pilots=pilots, combiners=combiners)


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Accumulated received samples of one directed measurement campaign.

    y_stacked: (n_rx_streams * L, K) received matrix, combiner blocks stacked
               top to bottom in combiner order.
    p_stacked: (n_tx_ant, K) antenna-domain pilot columns (precoder @ pilot).
    w_stacked: (n_rx_streams * L, n_rx_ant) stacked combiners.
    """

    y_stacked: np.ndarray
    p_stacked: np.ndarray
    w_stacked: np.ndarray
    n_streams: int

    @property
    def y_blocks(self) -> np.ndarray:
        """(L, K, n_streams) view of the received grid."""
        l = self.y_stacked.shape[0] // self.n_streams
        return self.y_stacked.reshape(l, self.n_streams, -1).transpose(0, 2, 1)


def simulate_measurements(
    h: np.ndarray,
    weights: BeamWeightSet,
    noise: NoiseBudget,
    rng: np.random.Generator,
) -> MeasurementSet:
    """Run the (combiner, beam) measurement grid over effective channel ``h``.

    Per grid cell (l, k):  y = W_l @ (h @ (x_k + n_tx)) + n_rx  with
    x_k = precoder_k @ pilot_k. Both noise grids are drawn up front from
    dedicated substreams in (l, k) array order, so results do not depend on
    evaluation order and the transmit-noise realization is unchanged by
    toggling receive noise (and vice versa).
    """
    h = np.asarray(h, dtype=complex)
    n_rx, n_tx = h.shape
    if weights.precoders.shape[1] != n_tx or weights.combiners.shape[2] != n_rx:
        raise InvalidParameterError(
            f"weights sized for ({weights.precoders.shape[1]} tx, "
            f"{weights.combiners.shape[2]} rx) antennas, channel is ({n_tx}, {n_rx})"
        )
    k, l = weights.k, weights.l
    n_s = weights.combiners.shape[1]

    p_stacked = np.einsum("ktc,kc->tk", weights.precoders, weights.pilots)
    w_stacked = weights.combiners.reshape(l * n_s, n_rx)

    g_tx, g_rx = rng.spawn(2)
    y3 = (w_stacked @ h @ p_stacked).reshape(l, n_s, k)

    if noise.tx_noise_power_watts > 0:
        scale = np.sqrt(noise.tx_noise_power_watts / 2.0)
        n_tx_grid = scale * (
            g_tx.standard_normal((l, k, n_tx)) + 1j * g_tx.standard_normal((l, k, n_tx))
        )
        reached = np.einsum("lkt,rt->lkr", n_tx_grid, h)
        y3 = y3 + np.einsum("lsr,lkr->lsk", weights.combiners, reached)

    if noise.rx_noise_power_watts > 0:
        scale = np.sqrt(noise.rx_noise_power_watts / 2.0)
        n_rx_grid = scale * (
            g_rx.standard_normal((l, k, n_s)) + 1j * g_rx.standard_normal((l, k, n_s))
        )
        y3 = y3 + n_rx_grid.transpose(0, 2, 1)

    return MeasurementSet(
        y_stacked=y3.reshape(l * n_s, k),
        p_stacked=p_stacked,
        w_stacked=w_stacked,
        n_streams=n_s,
    )


def ls_estimate_channel(meas: MeasurementSet) -> np.ndarray:
    """Least-squares estimate of the effective channel from a measurement set.

    Requires both stacked weight matrices to have full column/row rank: the
    pilot matrix must have rank n_tx_ant (enough independent beams, K side)
    and the stacked combiners rank n_rx_ant (enough combiner rows, L side).
    The solve uses orthogonal decompositions on each Kronecker factor rather
    than forming the dense measurement operator.
    """
    p, w, y = meas.p_stacked, meas.w_stacked, meas.y_stacked
    n_tx, kk = p.shape
    n_rx = w.shape[1]
    rank_p = np.linalg.matrix_rank(p)
    if rank_p < n_tx:
        raise UnderdeterminedSystemError(
            "K",
            f"stacked pilot matrix has rank {rank_p} < n_tx_ant = {n_tx}; "
            f"need at least n_tx_ant independent beams (K = {kk})",
        )
    rank_w = np.linalg.matrix_rank(w)
    if rank_w < n_rx:
        raise UnderdeterminedSystemError(
            "L",
            f"stacked combiner matrix has rank {rank_w} < n_rx_ant = {n_rx}; "
            f"need n_rx_streams * L >= n_rx_ant rows (got {w.shape[0]})",
        )
    hp = np.linalg.lstsq(w, y, rcond=None)[0]          # W+ Y  -> (n_rx, K)
    h_est = np.linalg.lstsq(p.T, hp.T, rcond=None)[0].T  # (W+ Y) P+ -> (n_rx, n_tx)
    return h_est
