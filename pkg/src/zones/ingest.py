"""Catalog ingestion from CSV and reproducible synthetic catalogs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from zones.errors import CatalogError
from zones.sphere import normalize_ra, to_unit_vector

DISTRIBUTIONS = ("uniform-sphere", "polar-cap", "meridian-strip")

_LON_NAMES = ("lon", "longitude", "ra")
_LAT_NAMES = ("lat", "latitude", "dec")


class PointRecord(NamedTuple):
    obj_type: str
    obj_id: int
    ra: float
    dec: float
    unit: tuple[float, float, float]


@dataclass
class Catalog:
    """Column-oriented point catalog for one dataset tag.

    ``ra`` is kept in [0, 360). ``payload`` maps objID to the display columns
    of the source row and is never consulted by the index.
    """

    obj_type: str
    ids: np.ndarray
    ra: np.ndarray
    dec: np.ndarray
    payload: dict[int, dict[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.obj_type) != 1:
            raise CatalogError(f"objType must be a single character, got {self.obj_type!r}")
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.ra = normalize_ra(np.asarray(self.ra, dtype=float).reshape(-1))
        self.dec = np.asarray(self.dec, dtype=float).reshape(-1)
        if not (len(self.ids) == len(self.ra) == len(self.dec)):
            raise CatalogError("ids, ra and dec must have equal length")
        if len(self.dec) and (np.any(np.abs(self.dec) > 90.0) or not np.all(np.isfinite(self.dec))):
            raise CatalogError("dec outside [-90, 90]")
        self.unit = to_unit_vector(self.ra, self.dec).reshape(-1, 3)

    def __len__(self):
        return len(self.ids)

    def records(self) -> Iterator[PointRecord]:
        for i in range(len(self.ids)):
            yield PointRecord(
                self.obj_type,
                int(self.ids[i]),
                float(self.ra[i]),
                float(self.dec[i]),
                tuple(float(v) for v in self.unit[i]),
            )

    @classmethod
    def from_records(cls, obj_type: str, records: Iterable[PointRecord]) -> "Catalog":
        recs = list(records)
        return cls(
            obj_type,
            np.array([r.obj_id for r in recs], dtype=np.int64),
            np.array([r.ra for r in recs], dtype=float),
            np.array([r.dec for r in recs], dtype=float),
        )

    @classmethod
    def from_points(cls, obj_type: str, points: Sequence[tuple[int, float, float]]) -> "Catalog":
        """Build from ``(objID, ra, dec)`` triples."""
        if not points:
            return cls(obj_type, np.empty(0, np.int64), np.empty(0), np.empty(0))
        ids, ra, dec = zip(*points)
        return cls(obj_type, np.array(ids, dtype=np.int64), np.array(ra, float), np.array(dec, float))


@dataclass(frozen=True)
class CatalogSchema:
    id_column: str
    lon_column: str | None = None
    lat_column: str | None = None
    payload_columns: tuple[str, ...] = ()


def _pick(header: list[str], wanted: str | None, candidates: tuple[str, ...], what: str) -> str:
    if wanted is not None:
        if wanted not in header:
            raise CatalogError(f"missing {what} column {wanted!r}")
        return wanted
    lowered = {h.lower(): h for h in header}
    for c in candidates:
        if c in lowered:
            return lowered[c]
    raise CatalogError(f"no {what} column found (tried {', '.join(candidates)})")


def parse_catalog(path, schema: CatalogSchema, obj_type: str) -> Catalog:
    """Read a header-first CSV into a :class:`Catalog`.

    Longitudes may use either the [-180, 180) or [0, 360) convention.
    Errors carry the 1-based data row number.
    """
    path = Path(path)
    ids: list[int] = []
    ras: list[float] = []
    decs: list[float] = []
    payload: dict[int, dict[str, str]] = {}
    seen: set[int] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CatalogError(f"{path}: empty file, header row expected") from None
        header = [h.strip() for h in header]
        if schema.id_column not in header:
            raise CatalogError(f"missing id column {schema.id_column!r}")
        lon_col = _pick(header, schema.lon_column, _LON_NAMES, "longitude")
        lat_col = _pick(header, schema.lat_column, _LAT_NAMES, "latitude")
        for col in schema.payload_columns:
            if col not in header:
                raise CatalogError(f"missing payload column {col!r}")
        pos = {h: i for i, h in enumerate(header)}
        for rownum, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise CatalogError(f"expected {len(header)} fields, got {len(row)}", rownum)
            raw_id = row[pos[schema.id_column]].strip()
            try:
                obj_id = int(raw_id)
            except ValueError:
                raise CatalogError(f"non-integer id {raw_id!r}", rownum) from None
            try:
                lon = float(row[pos[lon_col]])
                lat = float(row[pos[lat_col]])
            except ValueError:
                raise CatalogError("non-numeric coordinate", rownum) from None
            if not (math.isfinite(lon) and math.isfinite(lat)):
                raise CatalogError("non-finite coordinate", rownum)
            if not -90.0 <= lat <= 90.0:
                raise CatalogError(f"latitude {lat} outside [-90, 90]", rownum)
            if obj_id in seen:
                raise CatalogError(f"duplicate id {obj_id}", rownum)
            seen.add(obj_id)
            ids.append(obj_id)
            ras.append(lon)
            decs.append(lat)
            if schema.payload_columns:
                payload[obj_id] = {c: row[pos[c]] for c in schema.payload_columns}
    return Catalog(
        obj_type,
        np.array(ids, dtype=np.int64),
        np.array(ras, dtype=float),
        np.array(decs, dtype=float),
        payload,
    )


def generate_synthetic(n: int, seed: int, distribution: str = "uniform-sphere", obj_type: str = "P",
                       first_id: int = 1) -> Catalog:
    """Random catalog with ids ``first_id .. first_id + n - 1``.

    ``polar-cap`` puts points within 2 degrees of either pole,
    ``meridian-strip`` within 1 degree of ra = 0.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    if distribution == "uniform-sphere":
        z = rng.uniform(-1.0, 1.0, n)
        ra = rng.uniform(0.0, 360.0, n)
    elif distribution == "polar-cap":
        zmin = math.cos(math.radians(2.0))
        z = rng.uniform(zmin, 1.0, n) * rng.choice([-1.0, 1.0], n)
        ra = rng.uniform(0.0, 360.0, n)
    elif distribution == "meridian-strip":
        z = rng.uniform(-1.0, 1.0, n)
        ra = rng.uniform(-1.0, 1.0, n)
    else:
        raise ValueError(f"unknown distribution {distribution!r}; expected one of {DISTRIBUTIONS}")
    dec = np.degrees(np.arcsin(np.clip(z, -1.0, 1.0)))
    ids = np.arange(first_id, first_id + n, dtype=np.int64)
    return Catalog(obj_type, ids, ra, dec)
