import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zones import (
    IndexBuildError,
    IndexConfig,
    MalformedHeaderError,
    TruncatedBodyError,
    VersionMismatchError,
    add_margins,
    build_index,
    build_zonezone,
    generate_synthetic,
    load_index,
    save_index,
    zone_of,
)
from zones.index import build_zone_table
from zones.sphere import alpha

from conftest import points

H10 = 10.0 / 60.0


@pytest.mark.parametrize("dec, h, zone", [(0.0, 1.0, 0), (0.0, H10, 0), (-0.01, 1 / 6, -1), (37.7, 1 / 6, 226)])
def test_zone_of(dec, h, zone):
    assert zone_of(dec, h) == zone


def test_zone_of_rejects_bad_height():
    with pytest.raises(ValueError):
        zone_of(1.0, 0.0)


def test_config_defaults_zone_height_to_theta():
    assert IndexConfig(theta=0.25).zone_height == 0.25
    for bad in (dict(theta=0), dict(theta=90), dict(theta=1, zone_height=0), dict(margin="half")):
        with pytest.raises(ValueError):
            IndexConfig(**bad)


def test_empty_build_has_full_zone_table():
    store = build_index([], IndexConfig(theta=1.0, zone_height=H10))
    assert len(store) == 0
    z = store.zones
    assert z.zone[0] == -z.zone[-1]
    assert z.lat_min[0] <= -(90 + H10) + 1e-9 and z.lat_max[-1] >= 90 + H10 - 1e-9
    np.testing.assert_array_equal(np.diff(z.zone), 1)
    np.testing.assert_array_equal(z.lat_min[1:], z.lat_max[:-1])


def test_one_point_gets_native_and_margin_copy():
    store = build_index(points("P", (1, 10.0, 0.0)), IndexConfig(theta=1.0, zone_height=H10))
    entries = list(store.entries())
    assert [(e.zone, e.ra, e.margin) for e in entries] == [(0, 10.0, False), (0, 370.0, True)]
    assert entries[0].unit == entries[1].unit


def test_margin_shift_direction():
    store = build_index(points("P", (1, 350.0, 5.0), (2, 10.0, 5.0)), IndexConfig(theta=1.0))
    copies = {e.obj_id: e.ra for e in store.entries() if e.margin}
    assert copies == {1: -10.0, 2: 370.0}


def test_duplicate_id_rejected():
    with pytest.raises(IndexBuildError, match="duplicate objID 4"):
        build_index([points("P", (4, 1.0, 1.0)), points("P", (4, 2.0, 2.0))])


def test_entries_sorted_and_doubled():
    cat = generate_synthetic(500, 1)
    other = generate_synthetic(300, 2, obj_type="S")
    store = build_index([cat, other], IndexConfig(theta=1.0, zone_height=H10))
    assert store.counts() == {"P": (500, 500), "S": (300, 300)}
    keys = [(e.obj_type, e.zone, e.ra, e.obj_id) for e in store.entries()]
    assert keys == sorted(keys)
    for e in store.entries():
        if not e.margin:
            assert e.zone == zone_of(e.dec, H10)


def test_margin_copies_have_unique_progenitor():
    cat = generate_synthetic(400, 5, "meridian-strip")
    t = build_index(cat).table("P")
    native = {(int(i), int(z), float(d)) for i, z, d, m in zip(t.ids, t.zone, t.dec, t.margin) if not m}
    copies = [(int(i), int(z), float(d), float(r)) for i, z, d, r, m in zip(t.ids, t.zone, t.dec, t.ra, t.margin) if m]
    assert len({c[0] for c in copies}) == len(copies)
    native_ra = dict(zip(t.ids[~t.margin].tolist(), t.ra[~t.margin].tolist()))
    for i, z, d, r in copies:
        assert (i, z, d) in native
        assert abs(r - native_ra[i]) == 360.0


def test_trimmed_margins_are_fewer_and_within_width():
    cat = generate_synthetic(3000, 9)
    full = build_index(cat, IndexConfig(theta=0.5, margin="full"))
    trim = build_index(cat, IndexConfig(theta=0.5, margin="trimmed"))
    assert trim.counts()["P"][0] == 3000
    assert 0 < trim.counts()["P"][1] < full.counts()["P"][1]
    t = trim.table("P")
    for z, r in zip(t.zone[t.margin], t.ra[t.margin]):
        w = trim.margin_width(int(z))
        assert -w <= r <= 360 + w


def test_add_margins_on_native_store():
    store = build_index(points("P", (1, 200.0, 3.0)), IndexConfig(margin="none"))
    assert store.counts() == {"P": (1, 0)}
    assert add_margins(store).counts() == {"P": (1, 1)}


def test_zonezone_neighbor_counts():
    cfg = IndexConfig(theta=1.0, zone_height=H10)
    zz = build_zonezone(cfg, build_zone_table(H10))
    per_zone = np.bincount(zz.zone1 - zz.zone1.min())
    assert cfg.neighbor_zones == 6
    assert per_zone.max() == 13
    cfg1 = IndexConfig(theta=0.5)
    zz1 = build_zonezone(cfg1, build_zone_table(0.5))
    assert np.bincount(zz1.zone1 - zz1.zone1.min()).max() == 3
    assert np.all(np.abs(zz.zone1 - zz.zone2) <= math.ceil(1.0 / H10))


def test_zonezone_alpha_at_zone_extreme():
    cfg = IndexConfig(theta=1.0, zone_height=H10)
    zones = build_zone_table(H10)
    rows = {(p.zone1, p.zone2): p.alpha for p in build_zonezone(cfg, zones).rows()}
    assert rows[(0, 3)] == alpha(1.0, H10)
    assert rows[(-1, 0)] == alpha(1.0, -H10)
    assert rows[(-1, 0)] == rows[(0, 1)]
    pairs = set(rows)
    assert all((b, a) in pairs for a, b in pairs)


def test_round_trip(tmp_path):
    store = build_index(points("P", (1, 10.0, 0.0)), IndexConfig(theta=1.0, zone_height=H10))
    save_index(store, tmp_path / "one.idx")
    assert load_index(tmp_path / "one.idx") == store


def test_round_trip_random_bit_exact(tmp_path):
    cat = generate_synthetic(700, 11, "polar-cap")
    store = build_index([cat, generate_synthetic(50, 3, obj_type="S")],
                        IndexConfig(theta=0.3, zone_height=0.1, margin="trimmed"))
    save_index(store, tmp_path / "a.idx")
    loaded = load_index(tmp_path / "a.idx")
    assert loaded == store
    save_index(loaded, tmp_path / "b.idx")
    assert (tmp_path / "a.idx").read_bytes() == (tmp_path / "b.idx").read_bytes()


def test_load_errors(tmp_path):
    empty = tmp_path / "empty.idx"
    empty.write_text("")
    with pytest.raises(MalformedHeaderError):
        load_index(empty)

    store = build_index(points("P", (1, 10.0, 0.0), (2, 20.0, 1.0)), IndexConfig())
    good = tmp_path / "good.idx"
    save_index(store, good)
    text = good.read_text()

    tampered = tmp_path / "count.idx"
    tampered.write_text(text.replace("native=2", "native=3"))
    with pytest.raises(TruncatedBodyError):
        load_index(tampered)

    cut = tmp_path / "cut.idx"
    cut.write_text("\n".join(text.splitlines()[:-1]) + "\n")
    with pytest.raises(TruncatedBodyError):
        load_index(cut)

    version = tmp_path / "v.idx"
    version.write_text(text.replace("version=1", "version=99"))
    with pytest.raises(VersionMismatchError):
        load_index(version)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 2.0), st.integers(-60, 60),
       st.floats(-400, 400), st.floats(0, 200))
def test_range_scan_matches_linear_filter(seed, h, zone, ra_lo, width):
    cat = generate_synthetic(300, seed)
    t = build_index(cat, IndexConfig(theta=min(h, 5.0), zone_height=h)).table("P")
    ra_hi = ra_lo + width
    s = t.range_scan(zone, ra_lo, ra_hi)
    got = set(zip(t.ids[s].tolist(), t.ra[s].tolist()))
    want = {(int(i), float(r)) for i, z, r in zip(t.ids, t.zone, t.ra) if z == zone and ra_lo <= r <= ra_hi}
    assert got == want
