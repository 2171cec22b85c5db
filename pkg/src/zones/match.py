"""Batch self-match and cross-match over ZoneZone pairs."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from zones.errors import MatchError
from zones.index import EntryTable, ZoneIndexStore, ZoneZoneTable
from zones.sphere import chord2_limit, chord2_to_deg

UNIT_SCALE = {"deg": 1.0, "nm": 60.0, "arcmin": 60.0}


class MatchPair(NamedTuple):
    obj_id1: int
    obj_id2: int
    distance: float


class Matches:
    """Sorted, duplicate-free match pairs held as columns. Distances in degrees."""

    def __init__(self, id1, id2, distance):
        self.id1 = np.asarray(id1, dtype=np.int64)
        self.id2 = np.asarray(id2, dtype=np.int64)
        self.distance = np.asarray(distance, dtype=float)

    @classmethod
    def empty(cls) -> "Matches":
        return cls(np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))

    def __len__(self):
        return len(self.id1)

    def __iter__(self) -> Iterator[MatchPair]:
        for a, b, d in zip(self.id1.tolist(), self.id2.tolist(), self.distance.tolist()):
            yield MatchPair(a, b, d)

    def __eq__(self, other):
        if not isinstance(other, Matches):
            return NotImplemented
        return (np.array_equal(self.id1, other.id1) and np.array_equal(self.id2, other.id2)
                and np.array_equal(self.distance, other.distance))

    def pairs(self) -> set[tuple[int, int]]:
        return set(zip(self.id1.tolist(), self.id2.tolist()))

    def transpose(self) -> "Matches":
        return _sorted(self.id2, self.id1, self.distance)

    def write_csv(self, fh, units: str = "deg") -> None:
        scale = UNIT_SCALE[units]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["objID1", "objID2", "distance"])
        for a, b, d in zip(self.id1.tolist(), self.id2.tolist(), (self.distance * scale).tolist()):
            w.writerow([a, b, repr(d)])


def _sorted(id1, id2, distance) -> Matches:
    order = np.lexsort((id2, id1))
    return Matches(id1[order], id2[order], distance[order])


@dataclass(frozen=True)
class MatchJob:
    store_a: ZoneIndexStore
    store_b: ZoneIndexStore
    obj_type_a: str
    obj_type_b: str
    theta: float
    mode: str = "cross"
    workers: int = 1

    @classmethod
    def self_job(cls, store: ZoneIndexStore, obj_type: str, theta: float | None = None,
                 workers: int = 1) -> "MatchJob":
        return cls(store, store, obj_type, obj_type,
                   store.config.theta if theta is None else theta, "self", workers)

    @classmethod
    def cross_job(cls, store_a: ZoneIndexStore, obj_type_a: str, store_b: ZoneIndexStore,
                  obj_type_b: str, theta: float | None = None, workers: int = 1) -> "MatchJob":
        return cls(store_a, store_b, obj_type_a, obj_type_b,
                   store_a.config.theta if theta is None else theta, "cross", workers)

    def validate(self) -> None:
        if self.mode not in ("self", "cross"):
            raise MatchError(f"unknown match mode {self.mode!r}")
        if not self.theta > 0:
            raise MatchError("theta must be positive")
        for store in (self.store_a, self.store_b):
            if self.theta > store.config.theta:
                raise MatchError(f"theta {self.theta} exceeds design theta {store.config.theta}")
            if store.config.margin == "none":
                raise MatchError("matching needs an index built with margins")
        if self.store_a.config.zone_height != self.store_b.config.zone_height:
            raise MatchError("both indices must share one zone height")
        if self.mode == "self" and (self.store_a is not self.store_b or self.obj_type_a != self.obj_type_b):
            raise MatchError("self-match needs one store and one objType")
        if self.mode == "cross" and self.store_a is self.store_b and self.obj_type_a == self.obj_type_b:
            raise MatchError("cross-match needs distinct datasets; use self_match")
        if self.workers < 1:
            raise MatchError("workers must be >= 1")


def partition_workload(zone_pairs: ZoneZoneTable, mode: str) -> list[list[tuple[int, int, float]]]:
    """Group zone pairs into disjoint units of work, one group per zone1.

    Self-match keeps only ``zone1 <= zone2``; the reversed pairs are covered by
    mirroring. Cross-match keeps every pair.
    """
    groups: dict[int, list[tuple[int, int, float]]] = {}
    for z1, z2, a in zone_pairs.rows():
        if mode == "self" and z1 > z2:
            continue
        groups.setdefault(z1, []).append((z1, z2, a))
    return [groups[k] for k in sorted(groups)]


def _match_unit(ta: EntryTable, tb: EntryTable, z1: int, z2: int, alpha: float, theta: float,
                limit: float, rule: str):
    """Candidate pairs of one zone pair: native A in z1 against any B in z2."""
    sa, sb = ta.zone_slice(z1), tb.zone_slice(z2)
    if sa.start == sa.stop or sb.start == sb.stop:
        return None
    native = ~ta.margin[sa]
    ra_a = ta.ra[sa][native]
    if len(ra_a) == 0:
        return None
    ids_a = ta.ids[sa][native]
    dec_a = ta.dec[sa][native]
    xyz_a = ta.xyz[sa][native]
    ra_b = tb.ra[sb]
    lo = np.searchsorted(ra_b, ra_a - alpha, side="left")
    hi = np.searchsorted(ra_b, ra_a + alpha, side="right")
    counts = np.maximum(hi - lo, 0)
    total = int(counts.sum())
    if total == 0:
        return None
    ia = np.repeat(np.arange(len(ra_a)), counts)
    starts = np.cumsum(counts) - counts
    ib = sb.start + np.repeat(lo, counts) + (np.arange(total) - np.repeat(starts, counts))
    keep = np.abs(tb.dec[ib] - dec_a[ia]) <= theta
    id_a, id_b = ids_a[ia], tb.ids[ib]
    if rule == "lt":
        keep &= id_a < id_b
    elif rule == "ne":
        keep &= id_a != id_b
    ia, ib, id_a, id_b = ia[keep], ib[keep], id_a[keep], id_b[keep]
    d = xyz_a[ia] - tb.xyz[ib]
    c2 = np.einsum("ij,ij->i", d, d)
    hit = limit > c2
    return id_a[hit], id_b[hit], c2[hit]


def _run(job: MatchJob, units: list[tuple[int, int, float, str]]) -> Matches:
    ta = job.store_a.table(job.obj_type_a)
    tb = job.store_b.table(job.obj_type_b)
    limit = chord2_limit(job.theta)
    present_a = set(ta.zone_keys.tolist())
    present_b = set(tb.zone_keys.tolist())
    units = [u for u in units if u[0] in present_a and u[1] in present_b]

    def work(group):
        return [_match_unit(ta, tb, z1, z2, a, job.theta, limit, rule) for z1, z2, a, rule in group]

    n_groups = max(1, min(len(units), job.workers * 8))
    groups = [units[i::n_groups] for i in range(n_groups)]
    if job.workers == 1:
        results = [work(g) for g in groups]
    else:
        with ThreadPoolExecutor(max_workers=job.workers) as pool:
            results = list(pool.map(work, groups))
    parts = [r for rs in results for r in rs if r is not None]
    if not parts:
        return Matches.empty()
    id1 = np.concatenate([p[0] for p in parts])
    id2 = np.concatenate([p[1] for p in parts])
    c2 = np.concatenate([p[2] for p in parts])
    return _dedupe(id1, id2, c2)


def _dedupe(id1, id2, c2) -> Matches:
    # a native and its margin copy can both fall in a 180-degree pole band
    order = np.lexsort((id2, id1))
    id1, id2, c2 = id1[order], id2[order], c2[order]
    if len(id1) > 1:
        first = np.ones(len(id1), bool)
        first[1:] = (id1[1:] != id1[:-1]) | (id2[1:] != id2[:-1])
        id1, id2, c2 = id1[first], id2[first], c2[first]
    dist = np.asarray(chord2_to_deg(c2), dtype=float).reshape(-1)
    return Matches(id1, id2, dist)


def cross_match(job: MatchJob) -> Matches:
    """All (a, b) with a native in A, b in B, separation < theta; sorted by ids."""
    job.validate()
    if job.mode != "cross":
        raise MatchError("cross_match needs mode='cross'")
    units = [(z1, z2, a, "all") for group in partition_workload(job.store_a.zone_pairs, "cross")
             for z1, z2, a in group]
    return _run(job, units)


def self_match_half(job: MatchJob) -> Matches:
    """Unordered neighbor pairs, each once, as (smaller id, larger id).

    Zone pairs are restricted to ``zone1 <= zone2``. Within one zone the
    ``objID1 < objID2`` rule halves the tests; across zones every native
    point of the lower zone is tested and the pair is reoriented.
    """
    job.validate()
    if job.mode != "self":
        raise MatchError("self_match needs mode='self'")
    units = []
    for group in partition_workload(job.store_a.zone_pairs, "self"):
        for z1, z2, a in group:
            units.append((z1, z2, a, "lt" if z1 == z2 else "ne"))
    m = _run(job, units)
    lo = np.minimum(m.id1, m.id2)
    hi = np.maximum(m.id1, m.id2)
    return _sorted(lo, hi, m.distance)


def mirror(half: Matches) -> Matches:
    """Append (b, a, d) for each (a, b, d) without recomputing distances."""
    return _sorted(np.concatenate([half.id1, half.id2]), np.concatenate([half.id2, half.id1]),
                   np.concatenate([half.distance, half.distance]))


def self_match(job: MatchJob, symmetric: bool = True) -> Matches:
    """Ordered neighbor pairs of one dataset, both orientations, sorted by ids.

    ``symmetric=False`` evaluates every zone pair and every ordered pair
    directly instead of computing half the pairs and mirroring them.
    """
    if symmetric:
        return mirror(self_match_half(job))
    job.validate()
    if job.mode != "self":
        raise MatchError("self_match needs mode='self'")
    units = [(z1, z2, a, "ne") for group in partition_workload(job.store_a.zone_pairs, "cross")
             for z1, z2, a in group]
    return _run(job, units)
