import io

import numpy as np
import pytest

from zones import (
    IndexConfig,
    MatchError,
    MatchJob,
    build_index,
    cross_match,
    generate_synthetic,
    partition_workload,
    self_match,
)
from zones.match import Matches, mirror, self_match_half
from zones.oracle import brute_match, matches_agree

from conftest import points


def test_two_close_points_mirror():
    cat = points("P", (1, 10.0, 10.0), (2, 10.0, 10.5))
    m = self_match(MatchJob.self_job(build_index(cat), "P", 1.0))
    assert [(p.obj_id1, p.obj_id2) for p in m] == [(1, 2), (2, 1)]
    assert m.distance[0] == m.distance[1] == pytest.approx(0.5, abs=1e-12)


def test_single_point_self_match_empty():
    assert len(self_match(MatchJob.self_job(build_index(points("P", (1, 0.0, 0.0))), "P"))) == 0


def test_cross_match_opposite_hemispheres_empty():
    store = build_index([points("A", (1, 0.0, 45.0), (2, 90.0, 50.0)),
                         points("B", (1, 0.0, -45.0), (2, 90.0, -50.0))])
    assert len(cross_match(MatchJob.cross_job(store, "A", store, "B", 1.0))) == 0


def test_cross_match_500_by_500_equals_oracle():
    a = generate_synthetic(500, 31, obj_type="A")
    b = generate_synthetic(500, 32, obj_type="B")
    store = build_index([a, b], IndexConfig(theta=2.0))
    m = cross_match(MatchJob.cross_job(store, "A", store, "B", 2.0))
    assert m == brute_match(a, b, 2.0)
    assert len(m) > 0


def test_cross_match_transpose():
    a = generate_synthetic(400, 5, "meridian-strip", obj_type="A")
    b = generate_synthetic(400, 6, "meridian-strip", obj_type="B")
    store = build_index([a, b], IndexConfig(theta=1.0, zone_height=0.25))
    ab = cross_match(MatchJob.cross_job(store, "A", store, "B"))
    ba = cross_match(MatchJob.cross_job(store, "B", store, "A"))
    assert ab == ba.transpose()


def test_cross_match_between_separate_stores():
    a = generate_synthetic(300, 1, obj_type="P")
    b = generate_synthetic(300, 2, obj_type="P")
    cfg = IndexConfig(theta=3.0)
    m = cross_match(MatchJob.cross_job(build_index(a, cfg), "P", build_index(b, cfg), "P"))
    assert m == brute_match(a, b, 3.0)


def test_self_match_1000_equals_oracle():
    cat = generate_synthetic(1000, 8, "polar-cap")
    store = build_index(cat, IndexConfig(theta=1.0, zone_height=0.4))
    m = self_match(MatchJob.self_job(store, "P"))
    assert m == brute_match(cat, cat, 1.0, self_mode=True)


def test_duplicate_coordinates_match_at_zero():
    cat = points("P", (1, 5.0, 5.0), (2, 5.0, 5.0))
    m = self_match(MatchJob.self_job(build_index(cat), "P"))
    assert m.pairs() == {(1, 2), (2, 1)} and set(m.distance) == {0.0}


def test_self_match_properties():
    cat = generate_synthetic(1500, 12, "meridian-strip")
    store = build_index(cat, IndexConfig(theta=0.5))
    job = MatchJob.self_job(store, "P")
    half = self_match_half(job)
    full = self_match(job)
    assert len(full) == 2 * len(half) and len(full) % 2 == 0
    assert np.all(half.id1 < half.id2)
    assert full.pairs() == {(b, a) for a, b in full.pairs()}
    assert len(full.pairs()) == len(full)
    assert full == mirror(half)
    assert full == self_match(job, symmetric=False)
    dist = dict(zip(zip(full.id1.tolist(), full.id2.tolist()), full.distance.tolist()))
    assert all(dist[(a, b)] == dist[(b, a)] for a, b in dist)


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_worker_count_invariant(workers):
    cat = generate_synthetic(2000, 4)
    store = build_index(cat, IndexConfig(theta=2.0))
    one = self_match(MatchJob.self_job(store, "P", workers=1))
    assert self_match(MatchJob.self_job(store, "P", workers=workers)) == one


def test_partition_self_keeps_upper_pairs():
    store = build_index([], IndexConfig(theta=1.0))
    groups = partition_workload(store.zone_pairs, "self")
    by_zone = {g[0][0]: [(z1, z2) for z1, z2, _ in g] for g in groups}
    assert by_zone[10] == [(10, 10), (10, 11)]
    assert (9, 10) in by_zone[9]
    flat = [(z1, z2) for g in groups for z1, z2, _ in g]
    assert len(flat) == len(set(flat))
    assert set(flat) == {(p.zone1, p.zone2) for p in store.zone_pairs.rows() if p.zone1 <= p.zone2}


def test_partition_cross_keeps_all_pairs():
    store = build_index([], IndexConfig(theta=1.0))
    groups = partition_workload(store.zone_pairs, "cross")
    flat = [(z1, z2) for g in groups for z1, z2, _ in g]
    assert (10, 11) in flat and (11, 10) in flat
    assert sorted(flat) == sorted((p.zone1, p.zone2) for p in store.zone_pairs.rows())
    assert len(flat) == len(set(flat))


def test_job_validation():
    cat = generate_synthetic(10, 1)
    store = build_index(cat, IndexConfig(theta=1.0))
    with pytest.raises(MatchError):
        self_match(MatchJob.self_job(store, "P", 2.0))
    with pytest.raises(MatchError):
        cross_match(MatchJob.cross_job(store, "P", store, "P"))
    with pytest.raises(MatchError):
        self_match(MatchJob.self_job(build_index(cat, IndexConfig(margin="none")), "P"))
    other = build_index(cat, IndexConfig(theta=1.0, zone_height=0.5))
    with pytest.raises(MatchError):
        cross_match(MatchJob.cross_job(store, "P", other, "P"))
    with pytest.raises(MatchError):
        self_match(MatchJob.self_job(store, "P", workers=0))


def test_csv_units():
    m = Matches(np.array([1]), np.array([2]), np.array([0.5]))
    for units, value in (("deg", "0.5"), ("nm", "30.0"), ("arcmin", "30.0")):
        buf = io.StringIO()
        m.write_csv(buf, units)
        assert buf.getvalue() == f"objID1,objID2,distance\n1,2,{value}\n"


def test_matches_agree_ignores_boundary_band():
    engine = Matches(np.array([1, 3]), np.array([2, 4]), np.array([0.3, 1.0 - 1e-12]))
    oracle = Matches(np.array([1]), np.array([2]), np.array([0.3]))
    assert matches_agree(engine, oracle, 1.0)
    assert not matches_agree(engine, Matches.empty(), 1.0)
