"""Zone index construction and persistence.

Entries for each dataset tag live in a column table sorted by
``(zone, ra, objID)``; binary search over that order plays the role of a
clustered B-tree key ``(objType, zone, ra, objID)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, NamedTuple

import numpy as np

from zones.errors import (
    IndexBuildError,
    MalformedHeaderError,
    TruncatedBodyError,
    VersionMismatchError,
)
from zones.ingest import Catalog
from zones.sphere import alpha

FORMAT_VERSION = 1
MARGIN_MODES = ("full", "trimmed", "none")


def zone_of(dec, zone_height: float):
    """Zone number of a declination: floor(dec / zone_height)."""
    if zone_height <= 0:
        raise ValueError("zone_height must be positive")
    z = np.floor(np.asarray(dec, dtype=float) / zone_height).astype(np.int64)
    if z.ndim == 0:
        return int(z)
    return z


@dataclass(frozen=True)
class IndexConfig:
    """Build parameters. ``zone_height`` defaults to ``theta``."""

    theta: float = 1.0
    zone_height: float | None = None
    margin: str = "full"

    def __post_init__(self):
        if self.zone_height is None:
            object.__setattr__(self, "zone_height", self.theta)
        if not (self.zone_height > 0 and math.isfinite(self.zone_height)):
            raise ValueError(f"zone_height must be positive, got {self.zone_height}")
        if not 0 < self.theta < 90:
            raise ValueError(f"theta must lie in (0, 90), got {self.theta}")
        if self.margin not in MARGIN_MODES:
            raise ValueError(f"margin must be one of {MARGIN_MODES}, got {self.margin!r}")

    @property
    def margin_trim(self) -> bool:
        return self.margin == "trimmed"

    @property
    def neighbor_zones(self) -> int:
        return math.ceil(self.theta / self.zone_height)


class ZoneEntry(NamedTuple):
    obj_type: str
    obj_id: int
    zone: int
    ra: float
    dec: float
    unit: tuple[float, float, float]
    margin: bool


class ZoneRow(NamedTuple):
    zone: int
    lat_min: float
    lat_max: float


class ZoneZonePair(NamedTuple):
    zone1: int
    zone2: int
    alpha: float


_COLUMNS = ("ids", "zone", "ra", "dec", "xyz", "margin")


class EntryTable:
    """Sorted zone entries for one dataset tag."""

    def __init__(self, ids, zone, ra, dec, xyz, margin, *, presorted=False):
        ids = np.asarray(ids, dtype=np.int64)
        zone = np.asarray(zone, dtype=np.int64)
        ra = np.asarray(ra, dtype=float)
        dec = np.asarray(dec, dtype=float)
        xyz = np.asarray(xyz, dtype=float).reshape(-1, 3)
        margin = np.asarray(margin, dtype=bool)
        if not presorted:
            order = np.lexsort((ids, ra, zone))
            ids, zone, ra, dec, xyz, margin = (a[order] for a in (ids, zone, ra, dec, xyz, margin))
        self.ids = ids
        self.zone = zone
        self.ra = ra
        self.dec = dec
        self.xyz = xyz
        self.margin = margin
        for a in (ids, zone, ra, dec, xyz, margin):
            a.setflags(write=False)
        self.zone_keys, starts = np.unique(zone, return_index=True)
        self._bounds = {int(z): (int(s), int(e)) for z, s, e in
                        zip(self.zone_keys, starts, np.append(starts[1:], len(zone)))}

    def __len__(self):
        return len(self.ids)

    @property
    def native_count(self) -> int:
        return int(np.count_nonzero(~self.margin))

    @property
    def margin_count(self) -> int:
        return int(np.count_nonzero(self.margin))

    def zone_slice(self, zone: int) -> slice:
        start, stop = self._bounds.get(int(zone), (0, 0))
        return slice(start, stop)

    def range_scan(self, zone: int, ra_lo: float, ra_hi: float) -> slice:
        """Rows of ``zone`` with ``ra_lo <= ra <= ra_hi`` (inclusive both ends)."""
        start, stop = self._bounds.get(int(zone), (0, 0))
        if start == stop:
            return slice(0, 0)
        ras = self.ra[start:stop]
        lo = int(np.searchsorted(ras, ra_lo, side="left"))
        hi = int(np.searchsorted(ras, ra_hi, side="right"))
        return slice(start + lo, start + max(lo, hi))

    def select(self, mask) -> "EntryTable":
        return EntryTable(*(getattr(self, c)[mask] for c in _COLUMNS), presorted=True)

    def __eq__(self, other):
        if not isinstance(other, EntryTable):
            return NotImplemented
        return all(np.array_equal(getattr(self, c), getattr(other, c)) for c in _COLUMNS)


def _empty_table() -> EntryTable:
    return EntryTable(np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0), np.empty(0),
                      np.empty((0, 3)), np.empty(0, bool))


@dataclass(frozen=True, eq=False)
class ZoneTable:
    zone: np.ndarray
    lat_min: np.ndarray
    lat_max: np.ndarray

    def rows(self) -> Iterator[ZoneRow]:
        for z, lo, hi in zip(self.zone, self.lat_min, self.lat_max):
            yield ZoneRow(int(z), float(lo), float(hi))

    def __len__(self):
        return len(self.zone)

    def __eq__(self, other):
        return (isinstance(other, ZoneTable) and np.array_equal(self.zone, other.zone)
                and np.array_equal(self.lat_min, other.lat_min)
                and np.array_equal(self.lat_max, other.lat_max))


@dataclass(frozen=True, eq=False)
class ZoneZoneTable:
    zone1: np.ndarray
    zone2: np.ndarray
    alpha: np.ndarray

    def rows(self) -> Iterator[ZoneZonePair]:
        for z1, z2, a in zip(self.zone1, self.zone2, self.alpha):
            yield ZoneZonePair(int(z1), int(z2), float(a))

    def __len__(self):
        return len(self.zone1)

    def __eq__(self, other):
        return (isinstance(other, ZoneZoneTable) and np.array_equal(self.zone1, other.zone1)
                and np.array_equal(self.zone2, other.zone2)
                and np.array_equal(self.alpha, other.alpha))


def build_zone_table(zone_height: float) -> ZoneTable:
    """Zone rows covering [-(90 + h), 90 + h], both end zones included."""
    max_zone = math.floor((90.0 + zone_height) / zone_height)
    zones = np.arange(-max_zone, max_zone + 1, dtype=np.int64)
    return ZoneTable(zones, zones * zone_height, (zones + 1) * zone_height)


def build_zonezone(config: IndexConfig, zones: ZoneTable) -> ZoneZoneTable:
    """Pair every zone with the zones within ceil(theta / h) of it.

    The alpha of a pair is taken at zone1's extreme |dec|, so it bounds the
    ra offset of any theta-neighbor of a point in zone1.
    """
    n = config.neighbor_zones
    present = set(int(z) for z in zones.zone)
    z1s, z2s, alphas = [], [], []
    for row in zones.rows():
        extreme = row.lat_min if row.lat_min < 0 else row.lat_max
        a = alpha(config.theta, extreme)
        for z2 in range(row.zone - n, row.zone + n + 1):
            if z2 in present:
                z1s.append(row.zone)
                z2s.append(z2)
                alphas.append(a)
    return ZoneZoneTable(np.array(z1s, dtype=np.int64), np.array(z2s, dtype=np.int64),
                         np.array(alphas, dtype=float))


class ZoneIndexStore:
    """Immutable zone index over one or more dataset tags."""

    def __init__(self, config: IndexConfig, tables: Mapping[str, EntryTable],
                 zones: ZoneTable, zone_pairs: ZoneZoneTable):
        self.config = config
        self.tables = dict(sorted(tables.items()))
        self.zones = zones
        self.zone_pairs = zone_pairs

    def table(self, obj_type: str) -> EntryTable:
        return self.tables.get(obj_type) or _empty_table()

    @property
    def obj_types(self) -> list[str]:
        return list(self.tables)

    def __len__(self):
        return sum(len(t) for t in self.tables.values())

    def counts(self) -> dict[str, tuple[int, int]]:
        """``{objType: (native, margin)}``."""
        return {k: (t.native_count, t.margin_count) for k, t in self.tables.items()}

    def entries(self) -> Iterator[ZoneEntry]:
        """All entries in ``(objType, zone, ra, objID)`` order."""
        for obj_type, t in self.tables.items():
            for i in range(len(t)):
                yield ZoneEntry(obj_type, int(t.ids[i]), int(t.zone[i]), float(t.ra[i]),
                                float(t.dec[i]), tuple(float(v) for v in t.xyz[i]), bool(t.margin[i]))

    def margin_width(self, zone: int) -> float:
        """ra half-width a margin copy in ``zone`` must reach beyond [0, 360)."""
        mask = self.zone_pairs.zone2 == zone
        if not mask.any():
            return 0.0
        return float(self.zone_pairs.alpha[mask].max())

    def __eq__(self, other):
        if not isinstance(other, ZoneIndexStore):
            return NotImplemented
        return (self.config == other.config and self.tables == other.tables
                and self.zones == other.zones and self.zone_pairs == other.zone_pairs)

    def __repr__(self):
        return f"ZoneIndexStore(config={self.config!r}, counts={self.counts()!r})"


def _as_catalogs(points) -> list[Catalog]:
    if isinstance(points, Catalog):
        return [points]
    if isinstance(points, Mapping):
        out = []
        for obj_type, cat in points.items():
            if not isinstance(cat, Catalog):
                cat = Catalog.from_records(obj_type, cat)
            if cat.obj_type != obj_type:
                raise IndexBuildError(f"catalog tagged {cat.obj_type!r} registered under {obj_type!r}")
            out.append(cat)
        return out
    return list(points)


def build_index(points, config: IndexConfig | None = None) -> ZoneIndexStore:
    """Index one or more catalogs (a Catalog, a list of them, or ``{objType: catalog}``).

    Margins are added per ``config.margin``.
    """
    config = config or IndexConfig()
    h = config.zone_height
    merged: dict[str, list[Catalog]] = {}
    for cat in _as_catalogs(points):
        merged.setdefault(cat.obj_type, []).append(cat)
    tables = {}
    for obj_type, cats in merged.items():
        ids = np.concatenate([c.ids for c in cats])
        uniq, counts = np.unique(ids, return_counts=True)
        if np.any(counts > 1):
            dup = int(uniq[counts > 1][0])
            raise IndexBuildError(f"duplicate objID {dup} for objType {obj_type!r}")
        ra = np.concatenate([c.ra for c in cats])
        dec = np.concatenate([c.dec for c in cats])
        xyz = np.concatenate([c.unit for c in cats]).reshape(-1, 3)
        tables[obj_type] = EntryTable(ids, zone_of(dec, h), ra, dec, xyz, np.zeros(len(ids), bool))
    zones = build_zone_table(h)
    store = ZoneIndexStore(config, tables, zones, build_zonezone(config, zones))
    if config.margin != "none":
        store = add_margins(store)
    return store


def add_margins(store: ZoneIndexStore) -> ZoneIndexStore:
    """Replicate native entries shifted by -360 (ra >= 180) or +360 (ra < 180).

    With ``margin="trimmed"`` a copy is kept only if its shifted ra lies
    within the zone's margin width of [0, 360).
    """
    tables = {}
    widths = None
    if store.config.margin_trim:
        widths = {int(z): store.margin_width(int(z)) for z in store.zones.zone}
    for obj_type, t in store.tables.items():
        native = t.select(~t.margin)
        shift = np.where(native.ra >= 180.0, -360.0, 360.0)
        ra_m = native.ra + shift
        keep = np.ones(len(native), bool)
        if widths is not None:
            w = np.array([widths.get(int(z), 180.0) for z in native.zone], dtype=float)
            keep = (ra_m >= -w) & (ra_m <= 360.0 + w)
        tables[obj_type] = EntryTable(
            np.concatenate([native.ids, native.ids[keep]]),
            np.concatenate([native.zone, native.zone[keep]]),
            np.concatenate([native.ra, ra_m[keep]]),
            np.concatenate([native.dec, native.dec[keep]]),
            np.concatenate([native.xyz, native.xyz[keep]]),
            np.concatenate([np.zeros(len(native), bool), np.ones(int(keep.sum()), bool)]),
        )
    return ZoneIndexStore(store.config, tables, store.zones, store.zone_pairs)


def _fmt(v: float) -> str:
    return repr(float(v))


def save_index(store: ZoneIndexStore, path) -> None:
    """Write the versioned text format. Identical stores give identical bytes."""
    cfg = store.config
    lines = [
        f"# zones-index version={FORMAT_VERSION}",
        f"# zoneHeight={_fmt(cfg.zone_height)}",
        f"# theta={_fmt(cfg.theta)}",
        f"# marginTrim={int(cfg.margin_trim)}",
        f"# margin={cfg.margin}",
    ]
    for obj_type, (nat, mar) in store.counts().items():
        lines.append(f"# count objType={obj_type} native={nat} margin={mar}")
    lines.append("objType,objID,zone,ra,dec,x,y,z,margin")
    for obj_type, t in store.tables.items():
        for i in range(len(t)):
            x, y, z = t.xyz[i]
            lines.append(",".join((obj_type, str(int(t.ids[i])), str(int(t.zone[i])), _fmt(t.ra[i]),
                                   _fmt(t.dec[i]), _fmt(x), _fmt(y), _fmt(z), str(int(t.margin[i])))))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_header(lines: list[str]) -> tuple[dict[str, str], dict[str, tuple[int, int]], int]:
    if not lines or not lines[0].startswith("# zones-index "):
        raise MalformedHeaderError("missing '# zones-index' header line")
    fields: dict[str, str] = {}
    counts: dict[str, tuple[int, int]] = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        try:
            if body.startswith("zones-index "):
                fields.update(kv.split("=", 1) for kv in body.split()[1:])
            elif body.startswith("count "):
                kv = dict(p.split("=", 1) for p in body.split()[1:])
                counts[kv["objType"]] = (int(kv["native"]), int(kv["margin"]))
            else:
                key, value = body.split("=", 1)
                fields[key] = value
        except (ValueError, KeyError):
            raise MalformedHeaderError(f"bad header line {lines[i]!r}") from None
        i += 1
    return fields, counts, i


def load_index(path) -> ZoneIndexStore:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    fields, counts, i = _parse_header(lines)
    if fields.get("version") != str(FORMAT_VERSION):
        raise VersionMismatchError(f"unsupported index version {fields.get('version')!r}")
    try:
        config = IndexConfig(theta=float(fields["theta"]), zone_height=float(fields["zoneHeight"]),
                             margin=fields.get("margin", "trimmed" if fields["marginTrim"] == "1" else "full"))
    except (KeyError, ValueError) as exc:
        raise MalformedHeaderError(f"bad index parameters: {exc}") from None
    if i >= len(lines) or lines[i] != "objType,objID,zone,ra,dec,x,y,z,margin":
        raise MalformedHeaderError("missing column header row")
    rows: dict[str, list[list[str]]] = {k: [] for k in counts}
    for line in lines[i + 1:]:
        parts = line.split(",")
        if len(parts) != 9:
            raise TruncatedBodyError(f"bad row {line!r}")
        if parts[0] not in rows:
            raise TruncatedBodyError(f"row for undeclared objType {parts[0]!r}")
        rows[parts[0]].append(parts)
    tables = {}
    for obj_type, (nat, mar) in counts.items():
        r = rows[obj_type]
        if len(r) != nat + mar:
            raise TruncatedBodyError(f"objType {obj_type!r}: header declares {nat + mar} rows, found {len(r)}")
        try:
            cols = list(zip(*r)) if r else [()] * 9
            t = EntryTable(
                np.array(cols[1], dtype=np.int64), np.array(cols[2], dtype=np.int64),
                np.array(cols[3], dtype=float), np.array(cols[4], dtype=float),
                np.column_stack([np.array(cols[k], dtype=float) for k in (5, 6, 7)]) if r else np.empty((0, 3)),
                np.array([c == "1" for c in cols[8]], dtype=bool),
                presorted=True,
            )
        except ValueError as exc:
            raise TruncatedBodyError(f"objType {obj_type!r}: {exc}") from None
        if t.margin_count != mar:
            raise TruncatedBodyError(f"objType {obj_type!r}: margin count mismatch")
        tables[obj_type] = t
    zones = build_zone_table(config.zone_height)
    return ZoneIndexStore(config, tables, zones, build_zonezone(config, zones))
