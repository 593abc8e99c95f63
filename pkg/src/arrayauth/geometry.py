"""Chaotic array geometries.

A device's array starts as a uniform 2D grid of square patch elements
(half free-space-wavelength pitch, half guided-wavelength edges) and every
vertex of every element is displaced independently and uniformly. The
perturbed layout is enrollment metadata and rendering material; the
electromagnetic consequence of the perturbation is modeled separately in
the signature module.

Conventions (pinned so tests can be bit-exact):
  element index m = h_idx * v_count + v_idx, matching the Kronecker order
  of the planar signature; element centers at (h_idx, v_idx) * lambda0/2
  starting at the origin; vertices counter-clockwise from bottom-left.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from arrayauth.seeding import rng_from_seed


class ParameterError(ValueError):
    """Invalid construction parameters."""


# CCW from bottom-left, unit half-edge offsets.
_VERTEX_OFFSETS = np.array([(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)])


@dataclass(frozen=True)
class PerturbationParams:
    """Array dimensions and wavelengths governing the vertex perturbation.

    h_count, v_count: antennas on the horizontal / vertical edge.
    lambda0: free-space wavelength at the center carrier (m).
    lambdag: guided wavelength (m), strictly below lambda0.
    """

    h_count: int
    v_count: int
    lambda0: float = 0.125
    lambdag: float = 0.075
    seed: int = 0

    def __post_init__(self):
        if self.h_count < 1 or self.v_count < 1:
            raise ParameterError("antenna counts must be >= 1")
        if not (0.0 < self.lambdag < self.lambda0):
            raise ParameterError("require 0 < lambdag < lambda0")

    @property
    def m_count(self) -> int:
        return self.h_count * self.v_count

    @property
    def displacement_low(self) -> float:
        return -self.lambdag / 4.0

    @property
    def displacement_high(self) -> float:
        return (self.lambda0 - self.lambdag) / 4.0


@dataclass(frozen=True)
class ArrayGeometry:
    """Perturbed layout: elements[m, vertex] = nominal[m, vertex] + displacements[m, vertex]."""

    elements: np.ndarray  # (M, 4, 2) final vertex coordinates, meters
    params: PerturbationParams
    displacements: np.ndarray  # (M, 4, 2) raw vertex displacements, meters

    def __post_init__(self):
        m = self.params.m_count
        if self.elements.shape != (m, 4, 2) or self.displacements.shape != (m, 4, 2):
            raise ParameterError("geometry arrays must have shape (M, 4, 2)")


@dataclass
class ValidationReport:
    """Report-only findings; geometries are never rejected."""

    out_of_bounds: list = field(default_factory=list)  # (m, vertex, axis, value)
    self_intersecting: list = field(default_factory=list)  # element indices

    @property
    def clean(self) -> bool:
        return not self.out_of_bounds and not self.self_intersecting


def nominal_vertices(params: PerturbationParams) -> np.ndarray:
    """Unperturbed vertex coordinates, shape (M, 4, 2)."""
    pitch = params.lambda0 / 2.0
    half_edge = params.lambdag / 4.0
    h_idx, v_idx = np.divmod(np.arange(params.m_count), params.v_count)
    centers = np.stack([h_idx * pitch, v_idx * pitch], axis=1)  # (M, 2)
    return centers[:, None, :] + half_edge * _VERTEX_OFFSETS[None, :, :]


def build_geometry(params: PerturbationParams, displacements: np.ndarray) -> ArrayGeometry:
    """Assemble a geometry from explicit displacements (test hook for the zero case)."""
    displacements = np.asarray(displacements, dtype=float)
    return ArrayGeometry(
        elements=nominal_vertices(params) + displacements,
        params=params,
        displacements=displacements,
    )


def generate_chaotic_geometry(params: PerturbationParams) -> ArrayGeometry:
    """Draw the 8*M independent uniform vertex displacements and build the layout.

    Deterministic for a fixed params.seed.
    """
    rng = rng_from_seed(params.seed)
    displacements = rng.uniform(
        params.displacement_low, params.displacement_high, size=(params.m_count, 4, 2)
    )
    return build_geometry(params, displacements)


def _orient(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _segments_cross(a0, a1, b0, b1) -> bool:
    """Proper intersection of open segments a and b."""
    d1 = _orient(b0, b1, a0)
    d2 = _orient(b0, b1, a1)
    d3 = _orient(a0, a1, b0)
    d4 = _orient(a0, a1, b1)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


def element_self_intersects(quad: np.ndarray) -> bool:
    """A quadrilateral is self-intersecting iff an opposite-edge pair crosses."""
    return _segments_cross(quad[0], quad[1], quad[2], quad[3]) or _segments_cross(
        quad[1], quad[2], quad[3], quad[0]
    )


def validate_geometry(geom: ArrayGeometry) -> ValidationReport:
    """Flag out-of-bounds displacements and self-intersecting elements."""
    report = ValidationReport()
    lo, hi = geom.params.displacement_low, geom.params.displacement_high
    bad = (geom.displacements < lo) | (geom.displacements > hi)
    for m, vertex, axis in zip(*np.nonzero(bad)):
        report.out_of_bounds.append((int(m), int(vertex), int(axis), float(geom.displacements[m, vertex, axis])))
    for m in range(geom.params.m_count):
        if element_self_intersects(geom.elements[m]):
            report.self_intersecting.append(m)
    return report


_SVG_SCALE = 4000.0  # px per meter; lambda0 = 0.125 m maps a pitch to 250 px
_SVG_MARGIN = 40.0


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _polygon(points: np.ndarray, cls: str) -> str:
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return f'  <polygon class="{cls}" points="{coords}" />'


def render_geometry(geom: ArrayGeometry) -> str:
    """Deterministic SVG: dashed nominal grid, solid perturbed quadrilaterals."""
    nominal = nominal_vertices(geom.params)
    all_pts = np.concatenate([nominal.reshape(-1, 2), geom.elements.reshape(-1, 2)])
    lo = all_pts.min(axis=0) * _SVG_SCALE - _SVG_MARGIN
    hi = all_pts.max(axis=0) * _SVG_SCALE + _SVG_MARGIN
    size = hi - lo

    def to_px(pts: np.ndarray) -> np.ndarray:
        px = pts * _SVG_SCALE
        # flip y so "up" in array coordinates is up on screen
        return np.stack([px[:, 0] - lo[0], hi[1] - px[:, 1]], axis=1)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_fmt(size[0])} {_fmt(size[1])}">',
        "  <style>",
        "    .nominal { fill: none; stroke: #888888; stroke-width: 1; stroke-dasharray: 6 4; }",
        "    .element { fill: none; stroke: #000000; stroke-width: 2; }",
        "  </style>",
    ]
    for m in range(geom.params.m_count):
        lines.append(_polygon(to_px(nominal[m]), "nominal"))
    for m in range(geom.params.m_count):
        lines.append(_polygon(to_px(geom.elements[m]), "element"))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
