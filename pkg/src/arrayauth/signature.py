"""Spatial signatures and their chaotic perturbation.

The nominal array presents a unit-norm steering vector toward a transmit
direction; a device's identity is a stored complex perturbation vector h~
(one standard complex Gaussian per element) applied multiplicatively:

    e_n = e_t (.) (1 + h~) / sqrt(2)

which realizes the enrolled-signature model h_n = (h + sigma_h h~ (.) e_t)/sqrt(2)
with h = sigma_h e_t, expressed in unit-signature convention. E||e_n||^2 = 1;
individual realizations are not renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from arrayauth.geometry import ParameterError
from arrayauth.seeding import rng_from_seed

KIND_NOMINAL_UNIT = "nominal_unit"
KIND_PERTURBED_UNIT = "perturbed_unit"
KIND_SCALED = "scaled"
KIND_SCALED_PERTURBED = "scaled_perturbed"

_UNIT_KINDS = (KIND_NOMINAL_UNIT, KIND_PERTURBED_UNIT)
_SCALED_KINDS = (KIND_SCALED, KIND_SCALED_PERTURBED)


@dataclass(frozen=True)
class Direction:
    """Transmit/receive direction; azimuth in [-pi, pi), elevation in [-pi/2, pi/2]."""

    azimuth: float
    elevation: float

    def __post_init__(self):
        if not (-math.pi <= self.azimuth < math.pi):
            raise ParameterError("azimuth outside [-pi, pi)")
        if not (-math.pi / 2 <= self.elevation <= math.pi / 2):
            raise ParameterError("elevation outside [-pi/2, pi/2]")


@dataclass(frozen=True)
class SpatialSignature:
    values: np.ndarray  # complex, length M
    kind: str = KIND_NOMINAL_UNIT
    sigma_h: float | None = None  # present for scaled kinds

    def __post_init__(self):
        if self.kind not in _UNIT_KINDS + _SCALED_KINDS:
            raise ParameterError(f"unknown signature kind {self.kind!r}")
        if self.kind in _SCALED_KINDS and (self.sigma_h is None or self.sigma_h <= 0):
            raise ParameterError("scaled signatures require sigma_h > 0")
        if self.kind == KIND_NOMINAL_UNIT:
            norm = np.linalg.norm(self.values)
            if abs(norm - 1.0) > 1e-9:
                raise ParameterError("nominal unit signature must have norm 1")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ChaoticNoise:
    """The enrolled identity: i.i.d. CN(0,1) perturbations, one per element."""

    values: np.ndarray
    seed: int

    def __len__(self) -> int:
        return len(self.values)


def draw_chaotic_noise(m: int, seed: int) -> ChaoticNoise:
    if m < 1:
        raise ParameterError("element count must be >= 1")
    rng = rng_from_seed(seed)
    values = standard_complex_normal(rng, (m,))
    return ChaoticNoise(values=values, seed=seed)


def standard_complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0,1) samples: independent N(0, 1/2) real and imaginary parts."""
    flat = rng.standard_normal(2 * int(np.prod(shape)))
    z = flat.view(np.complex128) / math.sqrt(2.0)
    return z.reshape(shape)


def ula_values(m: int, spacing: float, cosines: np.ndarray) -> np.ndarray:
    """Unit steering vectors of an m-element line array, shape (m, len(cosines)).

    spacing is in wavelengths; column k is
    (1/sqrt(m)) * exp(-j 2 pi spacing * cosines[k] * [0..m-1]).
    """
    cosines = np.atleast_1d(np.asarray(cosines, dtype=float))
    phase = (-2.0 * math.pi * spacing) * np.outer(np.arange(m), cosines)
    out = np.empty(phase.shape, dtype=np.complex128)
    np.cos(phase, out=out.real)
    np.sin(phase, out=out.imag)
    out /= math.sqrt(m)
    return out


def ula_unit_signature(m: int, spacing: float, cosine: float) -> SpatialSignature:
    """1D steering vector toward directional cosine `cosine`."""
    if m < 1:
        raise ParameterError("element count must be >= 1")
    if spacing <= 0:
        raise ParameterError("spacing must be positive")
    return SpatialSignature(values=ula_values(m, spacing, cosine)[:, 0], kind=KIND_NOMINAL_UNIT)


def direction_cosines(azimuth, elevation) -> tuple[np.ndarray, np.ndarray]:
    """(horizontal, vertical) directional cosines for the planar composition."""
    azimuth = np.asarray(azimuth, dtype=float)
    elevation = np.asarray(elevation, dtype=float)
    return np.cos(elevation) * np.sin(azimuth), np.sin(elevation)


def planar_values(h_count: int, v_count: int, azimuth, elevation) -> np.ndarray:
    """Planar steering vectors for arrays of directions, shape (h*v, n_dirs).

    Kronecker composition: element m = h_idx * v_count + v_idx.
    """
    ch, cv = direction_cosines(azimuth, elevation)
    eh = ula_values(h_count, 0.5, ch)  # (h, L)
    ev = ula_values(v_count, 0.5, cv)  # (v, L)
    return (eh[:, None, :] * ev[None, :, :]).reshape(h_count * v_count, -1)


def planar_unit_signature(h_count: int, v_count: int, direction: Direction) -> SpatialSignature:
    if h_count < 1 or v_count < 1:
        raise ParameterError("antenna counts must be >= 1")
    values = planar_values(h_count, v_count, direction.azimuth, direction.elevation)[:, 0]
    return SpatialSignature(values=values, kind=KIND_NOMINAL_UNIT)


def perturb_signature(e_t: SpatialSignature, noise: ChaoticNoise) -> SpatialSignature:
    """Apply the enrolled perturbation: e_n = e_t (.) (1 + h~) / sqrt(2).

    Linear in e_t, so a scaled signature perturbs to the equally scaled
    perturbed signature.
    """
    if e_t.kind == KIND_PERTURBED_UNIT or e_t.kind == KIND_SCALED_PERTURBED:
        raise ParameterError("signature is already perturbed")
    if len(e_t) != len(noise):
        raise ParameterError("signature and noise lengths differ")
    values = e_t.values * (1.0 + noise.values) / math.sqrt(2.0)
    if e_t.kind == KIND_SCALED:
        return SpatialSignature(values=values, kind=KIND_SCALED_PERTURBED, sigma_h=e_t.sigma_h)
    return SpatialSignature(values=values, kind=KIND_PERTURBED_UNIT)


def scale_signature(sig: SpatialSignature, sigma_h: float) -> SpatialSignature:
    """h = sigma_h * e: the amplitude-bearing form of a unit signature."""
    if sigma_h <= 0:
        raise ParameterError("sigma_h must be positive")
    kind = KIND_SCALED if sig.kind == KIND_NOMINAL_UNIT else KIND_SCALED_PERTURBED
    return SpatialSignature(values=sigma_h * sig.values, kind=kind, sigma_h=sigma_h)


def signature_correlation(a: SpatialSignature, b: SpatialSignature) -> float:
    """|<a,b>| / (||a|| ||b||) in [0, 1]."""
    if len(a) != len(b):
        raise ParameterError("signature lengths differ")
    na = np.linalg.norm(a.values)
    nb = np.linalg.norm(b.values)
    if na == 0.0 or nb == 0.0:
        raise ParameterError("correlation undefined for a zero signature")
    return float(abs(np.vdot(a.values, b.values)) / (na * nb))
