"""Antenna-array physical-layer authentication simulator.

Devices are identified by three enrolled attributes: a chaotically perturbed
array geometry, a per-element complex signature perturbation, and a
pseudorandom pilot/activation matrix. A correlation receiver with dual
thresholds (equidistant and false-alarm-calibrated) authenticates frames,
and a Monte Carlo engine produces miss / false-authentication rate curves.
"""

from arrayauth.geometry import ArrayGeometry, PerturbationParams, generate_chaotic_geometry
from arrayauth.signature import ChaoticNoise, Direction, SpatialSignature
from arrayauth.pilot import PilotConfig, PilotMatrix, generate_pilot_matrix
from arrayauth.channel import ChannelConfig, ChannelRealization, ReceivedFrame
from arrayauth.detector import DetectionResult, DetectorConfig, authenticate
from arrayauth.registry import DeviceProfile, Registry
from arrayauth.montecarlo import ExperimentConfig, RateCurve

__all__ = [
    "ArrayGeometry",
    "PerturbationParams",
    "generate_chaotic_geometry",
    "ChaoticNoise",
    "Direction",
    "SpatialSignature",
    "PilotConfig",
    "PilotMatrix",
    "generate_pilot_matrix",
    "ChannelConfig",
    "ChannelRealization",
    "ReceivedFrame",
    "DetectionResult",
    "DetectorConfig",
    "authenticate",
    "DeviceProfile",
    "Registry",
    "ExperimentConfig",
    "RateCurve",
]

__version__ = "0.1.0"
