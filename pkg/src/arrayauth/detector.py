"""Correlation receiver with dual thresholds.

Statistics for one authentication attempt against an enrolled device:

    rho    = Re tr(X^H H^H y)            matched-filter correlation
    sigma2 = noise variance estimated from directions orthogonal to every
             allowlisted device's expected signal H_i X_i
    beta   = rho / sigma2
    psi_e  = ||H X||_F^2 / (2 sigma2)    midpoint between the two hypotheses
    psi_fa = Q^-1(pfa) sqrt(||H X||_F^2 / (2 sigma2))
    accept iff beta > max(psi_e, psi_fa)  (ties reject)

psi_fa follows from rho | noise-only ~ N(0, sigma_w^2 ||H X||_F^2 / 2), with
the estimate standing in for sigma_w^2; the tail-calibration tests pin this
derivation empirically.

The noise-variance estimator has two interchangeable implementations:
"gram_schmidt" draws probe_count Gaussian probes, orthogonalizes them against
the allowlist span and each other, and averages squared projections;
"haar" samples the identical distribution in O(D) by scaling the orthogonal
residual energy with a Beta(K, D - r - K) draw (the squared norm of K
coordinates of a Haar-random frame). Only the norm of the probe projections
enters the statistic, so the two agree in distribution exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np
from scipy.stats import norm

from arrayauth.channel import ChannelRealization, ReceivedFrame
from arrayauth.geometry import ParameterError
from arrayauth.pilot import PilotMatrix
from arrayauth.signature import standard_complex_normal

if TYPE_CHECKING:  # pragma: no cover
    from arrayauth.registry import DeviceProfile, Registry

PROBE_GRAM_SCHMIDT = "gram_schmidt"
PROBE_HAAR = "haar"


class InsufficientDimensionsError(ParameterError):
    """Probe count plus allowlist span exceeds the frame dimension."""


class DegenerateEstimateError(ValueError):
    """Noise-variance estimate is not positive."""


@dataclass(frozen=True)
class DetectorConfig:
    pfa_target: float
    probe_count: int = 256
    probe_method: str = PROBE_HAAR

    def __post_init__(self):
        if not (0.0 < self.pfa_target < 1.0):
            raise ParameterError("pfa_target must lie in (0, 1)")
        if self.probe_count < 8:
            raise ParameterError("probe_count must be >= 8")
        if self.probe_method not in (PROBE_GRAM_SCHMIDT, PROBE_HAAR):
            raise ParameterError(f"unknown probe method {self.probe_method!r}")


@dataclass(frozen=True)
class DetectionResult:
    rho: float
    sigma2_hat: float
    beta: float
    psi_e: float
    psi_fa: float
    psi: float
    accepted: bool

    def to_json_dict(self) -> dict:
        return {
            "rho": self.rho,
            "sigma2_hat": self.sigma2_hat,
            "beta": self.beta,
            "psi_e": self.psi_e,
            "psi_fa": self.psi_fa,
            "psi": self.psi,
            "accepted": self.accepted,
        }


def correlate(x: PilotMatrix, h: ChannelRealization, y: ReceivedFrame) -> float:
    """rho = Re tr(X^H H^H y), the real part of the matched-filter trace."""
    if x.m_antennas != h.m_antennas or y.samples.shape != (h.n_seraph, x.t_bauds):
        raise ParameterError("pilot/channel/frame dimensions are inconsistent")
    return correlate_expected(h.matrix @ x.values, y.samples)


def correlate_expected(expected_signal: np.ndarray, samples: np.ndarray) -> float:
    """rho given the precomputed expected signal H X."""
    return float(np.vdot(expected_signal, samples).real)


def matched_energy(x: PilotMatrix, h: ChannelRealization) -> float:
    """||H X||_F^2 = tr(X^H H^H H X)."""
    signal = h.matrix @ x.values
    return float(np.vdot(signal, signal).real)


def signal_basis(expected_signals: Sequence[np.ndarray], frame_shape: tuple[int, int]) -> np.ndarray:
    """Orthonormal basis (D, r) of the span of the vectorized expected signals."""
    if not expected_signals:
        dim = frame_shape[0] * frame_shape[1]
        return np.zeros((dim, 0), dtype=np.complex128)
    stacked = np.stack([np.asarray(s).ravel() for s in expected_signals], axis=1)  # (D, n)
    if stacked.shape[1] == 1:
        norm_ = np.linalg.norm(stacked[:, 0])
        if norm_ == 0.0:
            return stacked[:, :0]
        return stacked / norm_
    q, r = np.linalg.qr(stacked)
    keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(r[0, 0]))
    return q[:, keep]


def estimate_noise_variance(
    y: ReceivedFrame,
    expected_signals: Sequence[np.ndarray],
    k: int,
    rng: np.random.Generator,
    method: str = PROBE_GRAM_SCHMIDT,
) -> float:
    """Average squared projection of the frame onto k random orthonormal
    directions orthogonal to every expected signal. Unbiased for the noise
    variance under both hypotheses."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    u = y.samples.ravel()
    dim = u.size
    basis = signal_basis(expected_signals, y.samples.shape)
    rank = basis.shape[1]
    if k + rank > dim:
        raise InsufficientDimensionsError(
            f"k={k} probes plus span rank {rank} exceed frame dimension {dim}"
        )
    if method == PROBE_GRAM_SCHMIDT:
        probes = standard_complex_normal(rng, (dim, k))
        if rank:
            probes -= basis @ (basis.conj().T @ probes)
        q, _ = np.linalg.qr(probes)
        return float(np.mean(np.abs(q.conj().T @ u) ** 2))
    if method == PROBE_HAAR:
        residual = _orthogonal_residual(u, basis)
        free = dim - rank
        fraction = 1.0 if free == k else float(rng.beta(k, free - k))
        return residual * fraction / k
    raise ParameterError(f"unknown probe method {method!r}")


def _orthogonal_residual(u: np.ndarray, basis: np.ndarray) -> float:
    residual = float(np.vdot(u, u).real)
    if basis.shape[1]:
        residual -= float(np.sum(np.abs(basis.conj().T @ u) ** 2))
    return max(residual, 0.0)


def _estimate_haar_rank1(
    u: np.ndarray, signal: np.ndarray, energy: float, k: int, rng: np.random.Generator
) -> float:
    """Single-device haar estimate without materializing the basis."""
    residual = float(np.vdot(u, u).real)
    rank = 0
    if energy > 0.0:
        residual -= abs(np.vdot(signal.ravel(), u)) ** 2 / energy
        rank = 1
    residual = max(residual, 0.0)
    free = u.size - rank
    if k + rank > u.size:
        raise InsufficientDimensionsError(
            f"k={k} probes plus span rank {rank} exceed frame dimension {u.size}"
        )
    fraction = 1.0 if free == k else float(rng.beta(k, free - k))
    return residual * fraction / k


def detection_metric(rho: float, sigma2_hat: float) -> float:
    """beta = rho / sigma2_hat."""
    if sigma2_hat <= 0.0:
        raise DegenerateEstimateError("noise-variance estimate must be positive")
    return rho / sigma2_hat


def threshold_equidistant(x: PilotMatrix, h: ChannelRealization, sigma2_hat: float) -> float:
    """psi_e: half the matched energy in beta units."""
    if sigma2_hat <= 0.0:
        raise DegenerateEstimateError("noise-variance estimate must be positive")
    return matched_energy(x, h) / (2.0 * sigma2_hat)


def threshold_fa(x: PilotMatrix, h: ChannelRealization, sigma2_hat: float, pfa: float) -> float:
    """psi_fa: the beta value exceeded with probability pfa under noise only."""
    if sigma2_hat <= 0.0:
        raise DegenerateEstimateError("noise-variance estimate must be positive")
    if not (0.0 < pfa < 1.0):
        raise ParameterError("pfa must lie in (0, 1)")
    return _threshold_fa_from_energy(matched_energy(x, h), sigma2_hat, pfa)


@lru_cache(maxsize=64)
def gaussian_tail_quantile(pfa: float) -> float:
    """Q^-1(pfa), the upper-tail standard normal quantile."""
    return float(norm.isf(pfa))


def _threshold_fa_from_energy(energy: float, sigma2_hat: float, pfa: float) -> float:
    return gaussian_tail_quantile(pfa) * float(np.sqrt(energy / (2.0 * sigma2_hat)))


def decide(beta: float, psi_e: float, psi_fa: float) -> tuple[float, bool]:
    """psi = max of the thresholds; accept only on strict exceedance."""
    psi = max(psi_e, psi_fa)
    return float(psi), bool(beta > psi)


def authenticate(
    y: ReceivedFrame,
    device: "DeviceProfile",
    registry: "Registry",
    channels: Mapping[str, ChannelRealization],
    cfg: DetectorConfig,
    rng: np.random.Generator,
    *,
    expected_signals: Sequence[np.ndarray] | None = None,
    noise_variance_override: float | None = None,
) -> DetectionResult:
    """Full receive chain for one authentication attempt.

    channels maps every enrolled device id to its current realization
    (per-attempt perfect channel knowledge). expected_signals may carry the
    precomputed H_i X_i list (ordered by device id) to avoid recomputation;
    noise_variance_override bypasses estimation (diagnostics / noiseless
    tests, where the orthogonal probes would return exactly zero).
    """
    if device.device_id not in registry.devices:
        raise ParameterError(f"device {device.device_id!r} is not enrolled")
    h = channels[device.device_id]
    device_order = sorted(registry.devices)
    if expected_signals is None:
        expected_signals = registry.expected_signals(channels)
    signal = expected_signals[device_order.index(device.device_id)]
    energy = float(np.vdot(signal, signal).real)
    if noise_variance_override is not None:
        if noise_variance_override <= 0.0:
            raise DegenerateEstimateError("noise-variance override must be positive")
        sigma2 = float(noise_variance_override)
    elif cfg.probe_method == PROBE_HAAR and len(expected_signals) == 1:
        sigma2 = _estimate_haar_rank1(y.samples.ravel(), signal, energy, cfg.probe_count, rng)
        if sigma2 <= 0.0:
            raise DegenerateEstimateError("estimated noise variance is not positive")
    else:
        sigma2 = estimate_noise_variance(
            y, expected_signals, cfg.probe_count, rng, method=cfg.probe_method
        )
        if sigma2 <= 0.0:
            raise DegenerateEstimateError("estimated noise variance is not positive")
    rho = correlate_expected(signal, y.samples)
    beta = detection_metric(rho, sigma2)
    psi_e = energy / (2.0 * sigma2)
    psi_fa = _threshold_fa_from_energy(energy, sigma2, cfg.pfa_target)
    psi, accepted = decide(beta, psi_e, psi_fa)
    return DetectionResult(
        rho=rho,
        sigma2_hat=sigma2,
        beta=beta,
        psi_e=psi_e,
        psi_fa=psi_fa,
        psi=psi,
        accepted=accepted,
    )
