"""Angle conventions, planar positions and ULA steering vectors.

All angles are in degrees on the ULA-resolvable half plane ``[0, 180)``.
A linear array only sees ``cos(angle)``, so a direction and its mirror image
across the array axis are indistinguishable; :func:`canonical_angle` folds
one onto the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np


def canonical_angle(deg):
    """Fold an angle in degrees onto ``[0, 180)``.

    The fold is the reflection ``eta -> 360 - eta`` (which leaves ``cos``
    unchanged), not a modulo-180 shift. Exactly 180 degrees is mapped to
    0 only in the sense of landing outside the range; it is clipped to the
    largest float below 180.
    """
    a = np.mod(np.asarray(deg, dtype=float), 360.0)
    a = np.where(a >= 180.0, 360.0 - a, a)
    # 360 - a can round back to 180.0 exactly
    a = np.where(a >= 180.0, np.nextafter(180.0, 0.0), a)
    return a.item() if a.ndim == 0 else a


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array along the x axis.

    Parameters
    ----------
    num_elements : int
        Number of elements (I for the surface, M for the base station).
    spacing_wavelengths : float
        Element spacing divided by the carrier wavelength.
    """

    num_elements: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise ValueError(f"num_elements must be a positive integer, got {self.num_elements}")
        if not self.spacing_wavelengths > 0:
            raise ValueError(f"spacing_wavelengths must be > 0, got {self.spacing_wavelengths}")

    def steering_vector(self, angle_deg):
        return steering_vector(self, angle_deg)


class Position2D(NamedTuple):
    x: float
    y: float


def steering_vector(geom: ArrayGeometry, angle_deg) -> np.ndarray:
    """ULA response ``exp(-j 2 pi n d cos(angle))``, n = 0..N-1.

    A scalar angle gives shape ``(N,)``; an array of angles gives ``(N, len)``
    with one steering vector per column. Large angle arrays (search grids)
    are cached; the returned matrix is then read-only.
    """
    ang = np.asarray(angle_deg, dtype=float)
    if ang.ndim == 1 and ang.size >= _CACHE_MIN_SIZE:
        return _steering_matrix(geom.num_elements, float(geom.spacing_wavelengths), ang.tobytes())
    return _steering(geom.num_elements, geom.spacing_wavelengths, ang)


_CACHE_MIN_SIZE = 256


@lru_cache(maxsize=16)
def _steering_matrix(num_elements, spacing, angle_bytes):
    v = _steering(num_elements, spacing, np.frombuffer(angle_bytes, dtype=float))
    v.setflags(write=False)
    return v


def _steering(num_elements, spacing, angle_deg):
    ang = np.deg2rad(angle_deg)
    n = np.arange(num_elements)
    phase = 2.0 * np.pi * spacing * np.multiply.outer(n, np.cos(ang))
    v = np.exp(-1j * phase)
    # exp(-j0) is exactly 1, keep element 0 exact regardless of angle
    v[0] = 1.0
    return v


def wraps_around(geom: ArrayGeometry) -> bool:
    """True when the responses at 0 and 180 degrees coincide (2d is an integer)."""
    twice = 2.0 * geom.spacing_wavelengths
    return abs(twice - round(twice)) < 1e-12


def aoa_from_positions(array_pos, source_pos, axis: float = 1.0) -> float:
    """Angle of ``source_pos`` seen from an array at ``array_pos``.

    Measured from the array axis, which points along ``+x`` for
    ``axis=1`` and along ``-x`` for ``axis=-1``, and folded onto ``[0, 180)``.
    """
    dx = float(source_pos[0]) - float(array_pos[0])
    dy = float(source_pos[1]) - float(array_pos[1])
    if dx == 0.0 and dy == 0.0:
        raise ValueError("degenerate geometry: source coincides with array")
    if axis not in (1, -1):
        raise ValueError(f"axis must be +1 or -1, got {axis}")
    return canonical_angle(math.degrees(math.atan2(dy, axis * dx)))


def distance(a, b) -> float:
    return math.hypot(float(b[0]) - float(a[0]), float(b[1]) - float(a[1]))
