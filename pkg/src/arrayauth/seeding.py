"""Deterministic seed derivation.

All randomness in the package flows from numpy SeedSequence objects built
from integer entropy tuples, so any run is reproducible from a single master
seed and results never depend on worker count or execution order.

Splitting rule (documented contract):
  enrollment stream for device d, purpose p:  (master_seed, 0, d, p)
  trial stream for grid point i, trial t:     (master_seed, 1, i, t)
with purposes GEOMETRY=0, SIGNATURE=1, PILOT=2.
"""

from __future__ import annotations

import numpy as np

TAG_ENROLL = 0
TAG_TRIAL = 1

PURPOSE_GEOMETRY = 0
PURPOSE_SIGNATURE = 1
PURPOSE_PILOT = 2


def enrollment_seed(master_seed: int, device_index: int, purpose: int) -> int:
    """64-bit seed for one enrollment-time draw of one device."""
    ss = np.random.SeedSequence([int(master_seed), TAG_ENROLL, int(device_index), int(purpose)])
    return int(ss.generate_state(1, np.uint64)[0])


def trial_rng(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """Generator for one Monte Carlo trial; random-access, order-independent."""
    ss = np.random.SeedSequence([int(master_seed), TAG_TRIAL, int(point_index), int(trial_index)])
    return np.random.default_rng(ss)


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))
