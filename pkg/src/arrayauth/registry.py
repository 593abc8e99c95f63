"""Persistent allowlist of enrolled device profiles.

A profile is everything the authenticator stores at first encounter: the
chaotic array geometry, the signature perturbation vector h~, and the pilot
matrix with its activation configuration. The file format is JSON with every
stored float array encoded as IEEE-754 hex strings (complex values as
[hex_re, hex_im] pairs) so persistence round-trips bit-exactly.

Top-level schema:
  {"version": 1,
   "devices": [{"device_id", "enrolled_at", "pilot_config", "geometry",
                "chaotic_noise", "pilot"}, ...]}
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from arrayauth.channel import ChannelRealization
from arrayauth.geometry import ArrayGeometry, ParameterError, PerturbationParams, build_geometry
from arrayauth.pilot import PilotConfig, PilotMatrix
from arrayauth.signature import ChaoticNoise

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """Registry document malformed or from an incompatible schema version."""


@dataclass(frozen=True)
class DeviceProfile:
    device_id: str
    geometry: ArrayGeometry
    chaotic_noise: ChaoticNoise
    pilot: PilotMatrix
    pilot_config: PilotConfig
    enrolled_at: str  # ISO 8601

    def __post_init__(self):
        m = self.geometry.params.m_count
        if len(self.chaotic_noise) != m or self.pilot.m_antennas != m:
            raise ParameterError(
                "chaotic noise length, geometry element count and pilot rows must agree"
            )


@dataclass(frozen=True)
class Registry:
    devices: dict = field(default_factory=dict)  # device_id -> DeviceProfile
    version: int = SCHEMA_VERSION

    def expected_signals(self, channels: Mapping[str, ChannelRealization]) -> list[np.ndarray]:
        return expected_signals(self, channels)


def derive_device_id(noise: ChaoticNoise, pilot: PilotMatrix) -> str:
    """Content-derived identifier; identical identity payloads share an id."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(noise.values).tobytes())
    digest.update(np.ascontiguousarray(pilot.values).tobytes())
    return "dev-" + digest.hexdigest()[:12]


def enroll(profile: DeviceProfile, reg: Registry) -> Registry:
    """Functional enrollment: a new registry containing the profile."""
    if profile.device_id in reg.devices:
        raise ParameterError(f"device id {profile.device_id!r} already enrolled")
    devices = dict(reg.devices)
    devices[profile.device_id] = profile
    return Registry(devices=devices, version=reg.version)


def expected_signals(reg: Registry, channels: Mapping[str, ChannelRealization]) -> list[np.ndarray]:
    """H_i X_i per enrolled device, in stable (sorted id) order."""
    out = []
    for device_id in sorted(reg.devices):
        if device_id not in channels:
            raise ParameterError(f"no channel realization supplied for {device_id!r}")
        profile = reg.devices[device_id]
        out.append(channels[device_id].matrix @ profile.pilot.values)
    return out


# ---------------------------------------------------------------------------
# persistence


def _hex_array(values: np.ndarray) -> list:
    """Nested lists of float.hex strings ([re, im] pairs for complex input)."""
    arr = np.asarray(values)
    if arr.ndim == 0:
        if np.iscomplexobj(arr):
            return [float(arr.real).hex(), float(arr.imag).hex()]
        return float(arr).hex()
    return [_hex_array(sub) for sub in arr]


def _unhex_array(data, complex_values: bool) -> np.ndarray:
    def walk(node):
        if isinstance(node, str):
            return float.fromhex(node)
        if complex_values and len(node) == 2 and isinstance(node[0], str):
            return complex(float.fromhex(node[0]), float.fromhex(node[1]))
        return [walk(sub) for sub in node]

    return np.array(walk(data), dtype=np.complex128 if complex_values else np.float64)


def _profile_to_json(profile: DeviceProfile) -> dict:
    params = profile.geometry.params
    return {
        "device_id": profile.device_id,
        "enrolled_at": profile.enrolled_at,
        "pilot_config": {
            "m_antennas": profile.pilot_config.m_antennas,
            "t_bauds": profile.pilot_config.t_bauds,
            "activation_threshold": profile.pilot_config.activation_threshold,
            "seed": profile.pilot_config.seed,
        },
        "geometry": {
            "h_count": params.h_count,
            "v_count": params.v_count,
            "lambda0": params.lambda0.hex(),
            "lambdag": params.lambdag.hex(),
            "seed": params.seed,
            "displacements": _hex_array(profile.geometry.displacements),
        },
        "chaotic_noise": {
            "seed": profile.chaotic_noise.seed,
            "values": _hex_array(profile.chaotic_noise.values),
        },
        "pilot": {
            "values": _hex_array(profile.pilot.values),
            "active_mask": profile.pilot.active_mask.astype(int).tolist(),
        },
    }


def _profile_from_json(doc: dict) -> DeviceProfile:
    geo = doc["geometry"]
    params = PerturbationParams(
        h_count=geo["h_count"],
        v_count=geo["v_count"],
        lambda0=float.fromhex(geo["lambda0"]),
        lambdag=float.fromhex(geo["lambdag"]),
        seed=geo["seed"],
    )
    geometry = build_geometry(params, _unhex_array(geo["displacements"], complex_values=False))
    noise = ChaoticNoise(
        values=_unhex_array(doc["chaotic_noise"]["values"], complex_values=True),
        seed=doc["chaotic_noise"]["seed"],
    )
    pc = doc["pilot_config"]
    pilot_config = PilotConfig(
        m_antennas=pc["m_antennas"],
        t_bauds=pc["t_bauds"],
        activation_threshold=pc["activation_threshold"],
        seed=pc["seed"],
    )
    pilot = PilotMatrix(
        values=_unhex_array(doc["pilot"]["values"], complex_values=True),
        active_mask=np.array(doc["pilot"]["active_mask"], dtype=bool),
    )
    return DeviceProfile(
        device_id=doc["device_id"],
        geometry=geometry,
        chaotic_noise=noise,
        pilot=pilot,
        pilot_config=pilot_config,
        enrolled_at=doc["enrolled_at"],
    )


def save(reg: Registry, path: str) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    doc = {
        "version": reg.version,
        "devices": [_profile_to_json(reg.devices[did]) for did in sorted(reg.devices)],
    }
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def load(path: str) -> Registry:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read registry document: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported registry schema version: {doc.get('version')!r}")
    try:
        devices = {}
        for entry in doc["devices"]:
            profile = _profile_from_json(entry)
            if profile.device_id in devices:
                raise SchemaError(f"duplicate device id {profile.device_id!r}")
            devices[profile.device_id] = profile
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed registry document: {exc}") from exc
    return Registry(devices=devices, version=doc["version"])


def profiles_equal(a: DeviceProfile, b: DeviceProfile) -> bool:
    return (
        a.device_id == b.device_id
        and a.enrolled_at == b.enrolled_at
        and a.pilot_config == b.pilot_config
        and a.geometry.params == b.geometry.params
        and np.array_equal(a.geometry.displacements, b.geometry.displacements)
        and np.array_equal(a.geometry.elements, b.geometry.elements)
        and a.chaotic_noise.seed == b.chaotic_noise.seed
        and np.array_equal(a.chaotic_noise.values, b.chaotic_noise.values)
        and np.array_equal(a.pilot.values, b.pilot.values)
        and np.array_equal(a.pilot.active_mask, b.pilot.active_mask)
    )


def registries_equal(a: Registry, b: Registry) -> bool:
    return (
        a.version == b.version
        and sorted(a.devices) == sorted(b.devices)
        and all(profiles_equal(a.devices[k], b.devices[k]) for k in a.devices)
    )
