"""Brute-force references for checking the zone engine.

These share only the distance kernel with the engine: no zones, no bands,
no margins.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from zones.ingest import Catalog
from zones.match import Matches
from zones.query import Neighbor
from zones.sphere import SphericalCoord, chord2_limit, chord2_to_deg, to_unit_vector

_CHUNK = 4_000_000  # pair evaluations per block


def brute_neighbors(points: Catalog, center: SphericalCoord, theta: float) -> list[Neighbor]:
    if len(points) == 0:
        return []
    d = points.unit - to_unit_vector(*center)
    c2 = np.einsum("ij,ij->i", d, d)
    hit = chord2_limit(min(theta, 180.0)) > c2
    ids = points.ids[hit]
    dist = np.asarray(chord2_to_deg(c2[hit]), dtype=float).reshape(-1)
    order = np.lexsort((ids, dist))
    return [Neighbor(int(ids[i]), float(dist[i])) for i in order]


def brute_match(points_a: Catalog, points_b: Catalog, theta: float, self_mode: bool = False) -> Matches:
    """All-pairs scan. In self mode equal ids are skipped and both orders appear."""
    limit = chord2_limit(theta)
    ua, ub = points_a.unit, points_b.unit
    rows = max(1, _CHUNK // max(1, len(ub)))
    id1, id2, c2s = [], [], []
    for start in range(0, len(ua), rows):
        block = ua[start:start + rows]
        # |a - b|^2 expanded; exact enough for the strict test and recomputed below
        c2 = 2.0 - 2.0 * (block @ ub.T)
        ii, jj = np.nonzero(c2 < limit * 1.000001 + 1e-15)
        if len(ii) == 0:
            continue
        d = block[ii] - ub[jj]
        exact = np.einsum("ij,ij->i", d, d)
        ok = limit > exact
        ii, jj, exact = ii[ok], jj[ok], exact[ok]
        a_ids = points_a.ids[start + ii]
        b_ids = points_b.ids[jj]
        if self_mode:
            keep = a_ids != b_ids
            a_ids, b_ids, exact = a_ids[keep], b_ids[keep], exact[keep]
        id1.append(a_ids)
        id2.append(b_ids)
        c2s.append(exact)
    if not id1:
        return Matches.empty()
    id1 = np.concatenate(id1)
    id2 = np.concatenate(id2)
    c2 = np.concatenate(c2s)
    order = np.lexsort((id2, id1))
    return Matches(id1[order], id2[order], np.asarray(chord2_to_deg(c2[order]), dtype=float).reshape(-1))


def _basis(theta: float, dec: float):
    t = math.radians(theta)
    d = math.radians(dec)
    center = np.array([math.cos(d), 0.0, math.sin(d)])
    north = np.array([-math.sin(d), 0.0, math.cos(d)])
    west = np.array([0.0, -1.0, 0.0])
    return center * math.cos(t), north * math.sin(t), west * math.sin(t)


def circle_points(theta: float, dec: float, phi_deg) -> np.ndarray:
    """Points of the theta circle about (ra=0, dec), parameterised by phi."""
    c, n, w = _basis(theta, dec)
    phi = np.radians(np.asarray(phi_deg, dtype=float))[:, None]
    return c + n * np.cos(phi) + w * np.sin(phi)


@functools.lru_cache(maxsize=4)
def _phase_table(samples: int):
    phi = np.arange(samples) * (360.0 / samples)
    rad = np.radians(phi)
    return phi, np.cos(rad), np.sin(rad)


def _ra_extent(c, n, w, cos_phi, sin_phi):
    x = c[0] + n[0] * cos_phi + w[0] * sin_phi
    y = c[1] + n[1] * cos_phi + w[1] * sin_phi
    if np.all(x > 0):
        # atan2 is monotone in |y|/x on the right half-plane
        best = int(np.argmax(np.abs(y) / x))
    else:
        best = int(np.argmax(np.abs(np.arctan2(y, x))))
    return best, abs(math.degrees(math.atan2(y[best], x[best])))


def alpha_by_sampling(theta: float, dec: float, samples: int = 1_000_000, refine: bool = True) -> float:
    """Largest |ra| on the theta circle about (0, dec), by sweeping phi.

    With ``refine`` a finer sweep brackets the best coarse sample.
    """
    if abs(dec) + theta >= 90.0:
        raise ValueError("sampling is defined only for circles that avoid the poles")
    c, n, w = _basis(theta, dec)
    phi, cos_phi, sin_phi = _phase_table(samples)
    best, result = _ra_extent(c, n, w, cos_phi, sin_phi)
    if refine:
        step = 360.0 / samples
        fine = np.radians(phi[best] + np.linspace(-step, step, 10_001))
        result = max(result, _ra_extent(c, n, w, np.cos(fine), np.sin(fine))[1])
    return result


def alpha_at_critical_phase(theta: float, dec: float) -> float:
    """ra extent at the stationary phase cos(phi) = tan(theta) tan(dec).

    Evaluates tan(ra) = -sin(t) sin(phi) / (cos(t) cos(d) - sin(t) sin(d) cos(phi))
    there, an independent route to the closed form.
    """
    t = math.radians(theta)
    d = math.radians(dec)
    cos_phi = math.tan(t) * math.tan(d)
    sin_phi = math.sqrt(max(0.0, 1.0 - cos_phi * cos_phi))
    num = -math.sin(t) * sin_phi
    den = math.cos(t) * math.cos(d) - math.sin(t) * math.sin(d) * cos_phi
    return abs(math.degrees(math.atan(num / den)))


def boundary_free(ids, distances, theta: float, band: float = 1e-9) -> set:
    """Ids whose distance is not within ``band`` degrees of ``theta``."""
    return {int(i) for i, d in zip(ids, distances) if abs(d - theta) > band}


def neighbors_agree(engine: list[Neighbor], oracle: list[Neighbor], theta: float, band: float = 1e-9) -> bool:
    return (boundary_free([n.obj_id for n in engine], [n.distance for n in engine], theta, band)
            == boundary_free([n.obj_id for n in oracle], [n.distance for n in oracle], theta, band))


def matches_agree(engine: Matches, oracle: Matches, theta: float, band: float = 1e-9) -> bool:
    def clean(m):
        keep = np.abs(m.distance - theta) > band
        return set(zip(m.id1[keep].tolist(), m.id2[keep].tolist()))
    return clean(engine) == clean(oracle)
