"""Scattering channel synthesis and frame transmission.

The link is a sum of L planar-wave paths: i.i.d. uniform transmit/receive
directions and complex Gaussian gains with per-path variance sigma_h^2 / L,
composed as gain * sqrt(N_s M_n) * e_r e_tx^H. Each entry of the channel
matrix then has average power sigma_h^2 (E||H||_F^2 = sigma_h^2 N_s M_n),
and for L >> 1 the entry magnitudes are Rayleigh.

The transmit-side unit signature is supplied by a source object so the same
path environment can be realized through different array identities (the
enrolled device versus an intruder). The receiver's array is an unmodified
planar grid.

A frame is y = H X + w with white complex Gaussian noise. The default noise
variance is (sigma_h / gamma)^2 with gamma = 10^(snr_db/20); an explicit
noise_variance overrides it (0 disables noise, the documented test hook).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from arrayauth.geometry import ParameterError
from arrayauth.pilot import PilotMatrix
from arrayauth.seeding import rng_from_seed
from arrayauth.signature import (
    KIND_NOMINAL_UNIT,
    KIND_PERTURBED_UNIT,
    ChaoticNoise,
    Direction,
    SpatialSignature,
    planar_values,
)


def most_square_factors(n: int) -> tuple[int, int]:
    """(h_count, v_count) with h >= v, the most-square factorization of n."""
    if n < 1:
        raise ParameterError("antenna count must be >= 1")
    v = int(math.isqrt(n))
    while n % v:
        v -= 1
    return n // v, v


@dataclass(frozen=True)
class ChannelConfig:
    n_seraph: int
    path_count: int = 32
    sigma_h: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_seraph < 1:
            raise ParameterError("n_seraph must be >= 1")
        if self.path_count < 1:
            raise ParameterError("path_count must be >= 1")
        if self.sigma_h <= 0:
            raise ParameterError("sigma_h must be positive")


@dataclass(frozen=True)
class PathComponent:
    gain: complex
    tx_dir: Direction
    rx_dir: Direction


class TransmitSignatureSource:
    """Per-direction transmit unit signatures, nominal or identity-perturbed."""

    def __init__(self, h_count: int, v_count: int, noise: ChaoticNoise | None = None):
        if h_count < 1 or v_count < 1:
            raise ParameterError("antenna counts must be >= 1")
        if noise is not None and len(noise) != h_count * v_count:
            raise ParameterError("noise length does not match element count")
        self.h_count = h_count
        self.v_count = v_count
        self.noise = noise
        if noise is None:
            self._gain_column = None
        else:
            self._gain_column = ((1.0 + noise.values) / math.sqrt(2.0))[:, None]

    @property
    def m_antennas(self) -> int:
        return self.h_count * self.v_count

    @property
    def kind(self) -> str:
        return KIND_NOMINAL_UNIT if self.noise is None else KIND_PERTURBED_UNIT

    def matrix(self, azimuth: np.ndarray, elevation: np.ndarray) -> np.ndarray:
        """(M, n_dirs) stack of unit signatures toward the given directions."""
        values = planar_values(self.h_count, self.v_count, azimuth, elevation)
        if self._gain_column is not None:
            values = values * self._gain_column
        return values

    def signature(self, direction: Direction) -> SpatialSignature:
        values = self.matrix(np.array([direction.azimuth]), np.array([direction.elevation]))[:, 0]
        return SpatialSignature(values=values, kind=self.kind)


def nominal_transmit_source(h_count: int, v_count: int) -> TransmitSignatureSource:
    return TransmitSignatureSource(h_count, v_count, noise=None)


def perturbed_transmit_source(h_count: int, v_count: int, noise: ChaoticNoise) -> TransmitSignatureSource:
    return TransmitSignatureSource(h_count, v_count, noise=noise)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the N_s x M_n link with its path decomposition retained."""

    matrix: np.ndarray  # complex (N_s, M_n)
    gains: np.ndarray  # complex (L,)
    tx_azimuth: np.ndarray
    tx_elevation: np.ndarray
    rx_azimuth: np.ndarray
    rx_elevation: np.ndarray
    tx_unit_signature_kind: str
    sigma_h: float
    rx_h_count: int
    rx_v_count: int
    # derived (N_s, L) receive steering stack, kept to avoid recomputation
    rx_steering: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n_seraph(self) -> int:
        return self.matrix.shape[0]

    @property
    def m_antennas(self) -> int:
        return self.matrix.shape[1]

    @property
    def path_count(self) -> int:
        return len(self.gains)

    @property
    def paths(self) -> list[PathComponent]:
        return [
            PathComponent(
                gain=complex(self.gains[i]),
                tx_dir=Direction(float(self.tx_azimuth[i]), float(self.tx_elevation[i])),
                rx_dir=Direction(float(self.rx_azimuth[i]), float(self.rx_elevation[i])),
            )
            for i in range(self.path_count)
        ]

    def to_debug_dict(self) -> dict:
        """JSON-serializable dump of the realization (debugging aid)."""
        return {
            "n_seraph": self.n_seraph,
            "m_antennas": self.m_antennas,
            "sigma_h": self.sigma_h,
            "tx_unit_signature_kind": self.tx_unit_signature_kind,
            "rx_shape": [self.rx_h_count, self.rx_v_count],
            "paths": [
                {
                    "gain": [float(g.real), float(g.imag)],
                    "tx_dir": [float(a), float(e)],
                    "rx_dir": [float(ra), float(re_)],
                }
                for g, a, e, ra, re_ in zip(
                    self.gains, self.tx_azimuth, self.tx_elevation, self.rx_azimuth, self.rx_elevation
                )
            ],
            "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix],
        }


@dataclass(frozen=True)
class ReceivedFrame:
    samples: np.ndarray  # complex (N_s, T)
    true_noise_variance: float
    snr_db: float = float("nan")

    @property
    def n_seraph(self) -> int:
        return self.samples.shape[0]

    @property
    def t_bauds(self) -> int:
        return self.samples.shape[1]


def _draw_complex(rng: np.random.Generator, size: int, variance: float) -> np.ndarray:
    flat = rng.standard_normal(2 * size)
    flat *= math.sqrt(variance / 2.0)
    return flat.view(np.complex128)


def generate_scattering_channel(
    cfg: ChannelConfig,
    tx_source: TransmitSignatureSource,
    m_antennas: int,
    rng: np.random.Generator | None = None,
) -> ChannelRealization:
    """Draw directions and gains and sum the rank-one path terms.

    Draw order (pinned): tx azimuths, tx elevations, rx azimuths,
    rx elevations, gains.
    """
    if tx_source.m_antennas != m_antennas:
        raise ParameterError("tx source element count does not match m_antennas")
    if rng is None:
        rng = rng_from_seed(cfg.seed)
    length = cfg.path_count
    tx_az = rng.uniform(-np.pi, np.pi, size=length)
    tx_el = rng.uniform(-np.pi / 2, np.pi / 2, size=length)
    rx_az = rng.uniform(-np.pi, np.pi, size=length)
    rx_el = rng.uniform(-np.pi / 2, np.pi / 2, size=length)
    gains = _draw_complex(rng, length, cfg.sigma_h**2 / length)

    rx_h, rx_v = most_square_factors(cfg.n_seraph)
    e_r = planar_values(rx_h, rx_v, rx_az, rx_el)  # (N, L)
    matrix = _compose(gains, tx_az, tx_el, e_r, tx_source, m_antennas)
    return ChannelRealization(
        matrix=matrix,
        gains=gains,
        tx_azimuth=tx_az,
        tx_elevation=tx_el,
        rx_azimuth=rx_az,
        rx_elevation=rx_el,
        tx_unit_signature_kind=tx_source.kind,
        sigma_h=cfg.sigma_h,
        rx_h_count=rx_h,
        rx_v_count=rx_v,
        rx_steering=e_r,
    )


def _compose(gains, tx_az, tx_el, e_r, tx_source, m_antennas) -> np.ndarray:
    e_t = tx_source.matrix(tx_az, tx_el)  # (M, L)
    scale = math.sqrt(e_r.shape[0] * m_antennas)
    return (e_r * (gains * scale)) @ e_t.conj().T


def compose_channel_matrix(
    gains,
    tx_az,
    tx_el,
    rx_az,
    rx_el,
    tx_source: TransmitSignatureSource,
    n_seraph: int,
) -> np.ndarray:
    """Sum of gain * sqrt(N M) * e_r e_tx^H over explicit paths (oracle hook)."""
    gains = np.asarray(gains, dtype=np.complex128)
    rx_h, rx_v = most_square_factors(n_seraph)
    e_r = planar_values(rx_h, rx_v, np.asarray(rx_az), np.asarray(rx_el))
    return _compose(gains, np.asarray(tx_az), np.asarray(tx_el), e_r, tx_source, tx_source.m_antennas)


def _rx_steering(realization: ChannelRealization) -> np.ndarray:
    if realization.rx_steering is not None:
        return realization.rx_steering
    return planar_values(
        realization.rx_h_count,
        realization.rx_v_count,
        realization.rx_azimuth,
        realization.rx_elevation,
    )


def rebuild_with_source(
    realization: ChannelRealization, tx_source: TransmitSignatureSource
) -> ChannelRealization:
    """Same path environment (directions, gains) seen through another transmit array."""
    e_r = _rx_steering(realization)
    matrix = _compose(
        realization.gains,
        realization.tx_azimuth,
        realization.tx_elevation,
        e_r,
        tx_source,
        tx_source.m_antennas,
    )
    return ChannelRealization(
        matrix=matrix,
        gains=realization.gains,
        tx_azimuth=realization.tx_azimuth,
        tx_elevation=realization.tx_elevation,
        rx_azimuth=realization.rx_azimuth,
        rx_elevation=realization.rx_elevation,
        tx_unit_signature_kind=tx_source.kind,
        sigma_h=realization.sigma_h,
        rx_h_count=realization.rx_h_count,
        rx_v_count=realization.rx_v_count,
        rx_steering=e_r,
    )


def reconstruct_matrix(realization: ChannelRealization, tx_source: TransmitSignatureSource) -> np.ndarray:
    """Re-sum the stored paths; must match realization.matrix to rounding."""
    e_r = planar_values(
        realization.rx_h_count,
        realization.rx_v_count,
        realization.rx_azimuth,
        realization.rx_elevation,
    )
    return _compose(
        realization.gains,
        realization.tx_azimuth,
        realization.tx_elevation,
        e_r,
        tx_source,
        tx_source.m_antennas,
    )


def snr_db_to_gamma(snr_db: float) -> float:
    """Amplitude-like SNR: gamma = 10^(snr_db / 20)."""
    return float(10.0 ** (snr_db / 20.0))


def gamma_to_snr_db(gamma: float) -> float:
    return float(20.0 * math.log10(gamma))


def transmit(
    h: ChannelRealization,
    x: PilotMatrix,
    snr_db: float | None = None,
    *,
    noise_variance: float | None = None,
    rng: np.random.Generator | None = None,
    expected_signal: np.ndarray | None = None,
) -> ReceivedFrame:
    """y = H X + w with i.i.d. CN(0, var) noise.

    var defaults to (sigma_h / gamma)^2 from snr_db; noise_variance overrides
    (0 yields the exact noiseless frame). expected_signal, when provided, must
    be the precomputed H X (saves recomputation in tight loops).
    """
    if x.m_antennas != h.m_antennas:
        raise ParameterError("pilot rows do not match channel columns")
    if noise_variance is None:
        if snr_db is None:
            raise ParameterError("provide snr_db or noise_variance")
        gamma = snr_db_to_gamma(snr_db)
        noise_variance = (h.sigma_h / gamma) ** 2
    if noise_variance < 0:
        raise ParameterError("noise variance must be >= 0")
    signal = h.matrix @ x.values if expected_signal is None else expected_signal
    if noise_variance > 0.0:
        if rng is None:
            rng = np.random.default_rng()
        w = _draw_complex(rng, signal.size, noise_variance).reshape(signal.shape)
        samples = signal + w
    else:
        samples = signal
    return ReceivedFrame(
        samples=samples,
        true_noise_variance=float(noise_variance),
        snr_db=float("nan") if snr_db is None else float(snr_db),
    )


def noise_only_frame(
    n_seraph: int,
    t_bauds: int,
    noise_variance: float,
    rng: np.random.Generator,
    snr_db: float = float("nan"),
) -> ReceivedFrame:
    """A frame containing only receiver noise (no device transmitting)."""
    if noise_variance <= 0:
        raise ParameterError("noise-only frame needs a positive noise variance")
    samples = _draw_complex(rng, n_seraph * t_bauds, noise_variance).reshape(n_seraph, t_bauds)
    return ReceivedFrame(samples=samples, true_noise_variance=float(noise_variance), snr_db=snr_db)
