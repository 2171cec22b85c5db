"""Spherical geometry kernel.

All public angles are in degrees. Unit vectors use x toward (ra=0, dec=0),
z toward the north pole.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

POLE_ALPHA = 180.0


class SphericalCoord(NamedTuple):
    ra: float
    dec: float

    @classmethod
    def normalized(cls, ra: float, dec: float) -> "SphericalCoord":
        if not -90.0 <= dec <= 90.0:
            raise ValueError(f"dec {dec} outside [-90, 90]")
        return cls(normalize_ra(ra), float(dec))


def normalize_ra(ra):
    """Map longitudes onto [0, 360). Works on scalars and arrays."""
    out = np.mod(ra, 360.0)
    # tiny negatives round up to exactly 360.0
    out = np.where(out >= 360.0, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def to_unit_vector(ra, dec):
    """Unit vector(s) for (ra, dec) in degrees; shape ``(..., 3)``."""
    ra_r = np.radians(ra)
    dec_r = np.radians(dec)
    cd = np.cos(dec_r)
    return np.stack([cd * np.cos(ra_r), cd * np.sin(ra_r), np.sin(dec_r)], axis=-1)


def chord2(a, b):
    """Squared Euclidean distance between unit vectors (last axis is xyz)."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.sum(d * d, axis=-1)


def chord2_limit(theta: float) -> float:
    """Squared chord length subtended by ``theta`` degrees: (2 sin(theta/2))^2."""
    return 4.0 * math.sin(math.radians(theta) / 2.0) ** 2


def chord2_to_deg(c2):
    half = np.sqrt(np.clip(c2, 0.0, 4.0)) / 2.0
    out = np.degrees(2.0 * np.arcsin(np.minimum(half, 1.0)))
    if np.ndim(out) == 0:
        return float(out)
    return out


def angular_distance_deg(a, b):
    """Great-circle separation in degrees via the chord: 2 asin(|a - b| / 2).

    Keeps full relative precision at arcsecond scales, where the
    acos(a . b) form has already lost most of its digits.
    """
    return chord2_to_deg(chord2(a, b))


def within_radius(a, b, theta: float):
    """Strict careful test: True iff the separation is below ``theta`` degrees."""
    return chord2_limit(theta) > chord2(a, b)


def alpha(theta: float, dec: float) -> float:
    """Half-width in ra of the bounding box of a ``theta`` circle centred at ``dec``.

    Returns 180 when the circle reaches or contains a pole.
    """
    if abs(dec) + theta >= 90.0:
        return POLE_ALPHA
    t = math.radians(theta)
    d = math.radians(dec)
    radicand = max(math.cos(d - t) * math.cos(d + t), 0.0)
    if radicand == 0.0:
        return 90.0
    return math.degrees(abs(math.atan(math.sin(t) / math.sqrt(radicand))))


def alpha_array(theta: float, dec) -> np.ndarray:
    """Vectorised :func:`alpha` over an array of declinations."""
    dec = np.asarray(dec, dtype=float)
    t = math.radians(theta)
    d = np.radians(dec)
    radicand = np.maximum(np.cos(d - t) * np.cos(d + t), 0.0)
    with np.errstate(divide="ignore"):
        out = np.degrees(np.abs(np.arctan(math.sin(t) / np.sqrt(radicand))))
    return np.where(np.abs(dec) + theta >= 90.0, POLE_ALPHA, out)
