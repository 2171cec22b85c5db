"""Zone-based spherical point indexing, neighbor queries and catalog matching."""

from zones.errors import (
    CatalogError,
    IndexBuildError,
    IndexFormatError,
    MalformedHeaderError,
    MatchError,
    QueryError,
    TruncatedBodyError,
    VersionMismatchError,
    ZonesError,
)
from zones.index import (
    IndexConfig,
    ZoneIndexStore,
    add_margins,
    build_index,
    build_zonezone,
    load_index,
    save_index,
    zone_of,
)
from zones.ingest import Catalog, CatalogSchema, PointRecord, generate_synthetic, parse_catalog
from zones.match import MatchJob, Matches, cross_match, partition_workload, self_match
from zones.query import Neighbor, QueryPlan, QuerySpec, nearest_object, plan_query, points_near_point
from zones.sphere import alpha, angular_distance_deg, to_unit_vector, within_radius

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CatalogError",
    "CatalogSchema",
    "IndexBuildError",
    "IndexConfig",
    "IndexFormatError",
    "MalformedHeaderError",
    "MatchError",
    "MatchJob",
    "Matches",
    "Neighbor",
    "PointRecord",
    "QueryError",
    "QueryPlan",
    "QuerySpec",
    "TruncatedBodyError",
    "VersionMismatchError",
    "ZoneIndexStore",
    "ZonesError",
    "add_margins",
    "alpha",
    "angular_distance_deg",
    "build_index",
    "build_zonezone",
    "cross_match",
    "generate_synthetic",
    "load_index",
    "nearest_object",
    "parse_catalog",
    "partition_workload",
    "plan_query",
    "points_near_point",
    "save_index",
    "self_match",
    "to_unit_vector",
    "within_radius",
    "zone_of",
]
