"""Points-near-a-point and nearest-object search over a zone index."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from zones.errors import QueryError
from zones.index import IndexConfig, ZoneIndexStore, zone_of
from zones.sphere import POLE_ALPHA, SphericalCoord, alpha, chord2_limit, chord2_to_deg, to_unit_vector

NEAREST_START_THETA = 0.2


class QuerySpec(NamedTuple):
    obj_type: str
    center: SphericalCoord
    theta: float

    @classmethod
    def at(cls, obj_type: str, ra: float, dec: float, theta: float) -> "QuerySpec":
        return cls(obj_type, SphericalCoord.normalized(ra, dec), float(theta))


class QueryPlan(NamedTuple):
    min_zone: int
    max_zone: int
    alpha: float
    ra_lo: float
    ra_hi: float
    dec_lo: float
    dec_hi: float


class Neighbor(NamedTuple):
    obj_id: int
    distance: float


def plan_query(spec: QuerySpec, config: IndexConfig) -> QueryPlan:
    ra, dec = spec.center
    theta = spec.theta
    if not theta > 0:
        raise QueryError(f"theta must be positive, got {theta}")
    h = config.zone_height
    a = alpha(theta, dec) if theta < 90 else POLE_ALPHA
    if a >= POLE_ALPHA:
        ra_lo, ra_hi = -180.0, 540.0
    else:
        ra_lo, ra_hi = ra - a, ra + a
    return QueryPlan(zone_of(dec - theta, h), zone_of(dec + theta, h), a,
                     ra_lo, ra_hi, dec - theta, dec + theta)


def _near_arrays(store: ZoneIndexStore, spec: QuerySpec) -> tuple[np.ndarray, np.ndarray]:
    """Matching (ids, squared chords), deduplicated, unsorted."""
    table = store.tables.get(spec.obj_type)
    if table is None or len(table) == 0:
        return np.empty(0, np.int64), np.empty(0)
    plan = plan_query(spec, store.config)
    ra_lo, ra_hi = plan.ra_lo, plan.ra_hi
    # the full-circle band admits every native entry, so margin copies are redundant
    natives_only = plan.alpha >= POLE_ALPHA
    center = to_unit_vector(*spec.center)
    limit = chord2_limit(min(spec.theta, 180.0))
    lo_zone = max(plan.min_zone, int(table.zone_keys[0]))
    hi_zone = min(plan.max_zone, int(table.zone_keys[-1]))
    ids_out, c2_out = [], []
    for z in range(lo_zone, hi_zone + 1):
        s = table.range_scan(z, ra_lo, ra_hi)
        if s.start == s.stop:
            continue
        dec = table.dec[s]
        keep = (dec >= plan.dec_lo) & (dec <= plan.dec_hi)
        if natives_only:
            keep &= ~table.margin[s]
        if not keep.any():
            continue
        d = table.xyz[s][keep] - center
        c2 = np.einsum("ij,ij->i", d, d)
        hit = limit > c2
        ids_out.append(table.ids[s][keep][hit])
        c2_out.append(c2[hit])
    if not ids_out:
        return np.empty(0, np.int64), np.empty(0)
    ids = np.concatenate(ids_out)
    c2 = np.concatenate(c2_out)
    if len(ids) > 1:
        ids, first = np.unique(ids, return_index=True)
        c2 = c2[first]
    return ids, c2


def _check_coverage(store: ZoneIndexStore, theta: float) -> None:
    if store.config.margin_trim and theta > store.config.theta:
        raise QueryError(
            f"theta {theta} exceeds the design radius {store.config.theta} of a trimmed-margin index")


def points_near_point(store: ZoneIndexStore, spec: QuerySpec) -> list[Neighbor]:
    """Objects of ``spec.obj_type`` strictly within ``spec.theta`` of the center.

    Sorted by (distance, objID).
    """
    _check_coverage(store, spec.theta)
    ids, c2 = _near_arrays(store, spec)
    dist = chord2_to_deg(c2) if len(c2) else np.empty(0)
    order = np.lexsort((ids, dist))
    return [Neighbor(int(ids[i]), float(dist[i])) for i in order]


def nearest_object(store: ZoneIndexStore, obj_type: str, center: SphericalCoord) -> Neighbor | None:
    """Closest object by doubling the search radius from 0.2 degrees.

    Returns None once the radius passes 180 degrees without a hit.
    """
    theta = NEAREST_START_THETA
    table = store.tables.get(obj_type)
    if table is None or table.native_count == 0:
        return None
    while theta <= 360.0:
        spec = QuerySpec(obj_type, center, theta)
        if store.config.margin_trim and theta > store.config.theta:
            # trimmed margins cannot serve this band; scan natives across all ra
            ids, c2 = _near_arrays_full(store, spec)
        else:
            ids, c2 = _near_arrays(store, spec)
        if len(ids):
            best = np.lexsort((ids, c2))[0]
            return Neighbor(int(ids[best]), chord2_to_deg(c2[best]))
        if theta >= 180.0:
            break
        theta = min(theta * 2.0, 180.0)
    return None


def _near_arrays_full(store: ZoneIndexStore, spec: QuerySpec) -> tuple[np.ndarray, np.ndarray]:
    table = store.tables[spec.obj_type]
    ra, dec = spec.center
    h = store.config.zone_height
    z_lo, z_hi = zone_of(dec - spec.theta, h), zone_of(dec + spec.theta, h)
    mask = (~table.margin) & (table.zone >= z_lo) & (table.zone <= z_hi)
    d = table.xyz[mask] - to_unit_vector(ra, dec)
    c2 = np.einsum("ij,ij->i", d, d)
    hit = chord2_limit(min(spec.theta, 180.0)) > c2
    return table.ids[mask][hit], c2[hit]
