"""Pseudorandom pilot matrices with antenna-activation gating.

For each (antenna m, baud t) an activation draw nu_{m,t} ~ U(0,1) is compared
against the device's activation threshold nu; the entry transmits iff
nu_{m,t} >= nu, with squared magnitude uniform on (0,1] and phase uniform on
[-pi, pi). A zero entry means no transmission in that baud.

Draw order is fixed (activation matrix, magnitude matrix, phase matrix, each
drawn in full before masking) so a seed pins the pilot bit-exactly regardless
of the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from arrayauth.geometry import ParameterError
from arrayauth.seeding import rng_from_seed


@dataclass(frozen=True)
class PilotConfig:
    m_antennas: int
    t_bauds: int = 64
    activation_threshold: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.m_antennas < 1 or self.t_bauds < 1:
            raise ParameterError("m_antennas and t_bauds must be >= 1")
        if not (0.0 <= self.activation_threshold <= 1.0):
            raise ParameterError("activation threshold must lie in [0, 1]")


@dataclass(frozen=True)
class PilotMatrix:
    values: np.ndarray  # complex (M, T)
    active_mask: np.ndarray  # bool (M, T)

    def __post_init__(self):
        if self.values.shape != self.active_mask.shape:
            raise ParameterError("values and mask shapes differ")

    @property
    def m_antennas(self) -> int:
        return self.values.shape[0]

    @property
    def t_bauds(self) -> int:
        return self.values.shape[1]


def generate_pilot_matrix(cfg: PilotConfig, rng: np.random.Generator | None = None) -> PilotMatrix:
    """Draw a pilot matrix; deterministic for cfg.seed unless an rng is supplied."""
    if rng is None:
        rng = rng_from_seed(cfg.seed)
    shape = (cfg.m_antennas, cfg.t_bauds)
    activation = rng.uniform(0.0, 1.0, size=shape)
    # 1 - U(0,1) lies in (0,1]: active entries can never be exactly zero.
    magnitude = np.sqrt(1.0 - rng.uniform(0.0, 1.0, size=shape))
    phase = rng.uniform(-np.pi, np.pi, size=shape)
    mask = activation >= cfg.activation_threshold
    values = np.where(mask, magnitude * np.exp(1j * phase), 0.0 + 0.0j)
    return PilotMatrix(values=values, active_mask=mask)


def pilot_energy(x: PilotMatrix) -> float:
    """Squared Frobenius norm, the total transmitted pilot energy."""
    return float(np.sum(np.abs(x.values) ** 2))


def active_count_per_baud(x: PilotMatrix) -> np.ndarray:
    """Active antennas in each baud interval, length T."""
    return x.active_mask.sum(axis=0).astype(int)
