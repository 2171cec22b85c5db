import os
from pathlib import Path

import pytest

from zones import Catalog, CatalogSchema, parse_catalog

_ACCEPTANCE = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        if call.excinfo is None:
            status = "PASS"
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            status = "SKIP"
        else:
            status = "FAIL"
        key = marker.args[0]
        prev = _ACCEPTANCE.get(key, ("PASS", []))
        worst = max(prev[0], status, key=["PASS", "SKIP", "FAIL"].index)
        _ACCEPTANCE[key] = (worst, prev[1] + [f"{item.name}={status}"])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        status, parts = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {status}  ({', '.join(parts)})")


USGS_DIR = os.environ.get("ZONES_USGS_DIR")


@pytest.fixture(scope="session")
def usgs():
    """Place and Station catalogs from ``$ZONES_USGS_DIR/{place,station}.csv``."""
    if not USGS_DIR or not (Path(USGS_DIR) / "place.csv").exists():
        pytest.skip("USGS extract not available (set ZONES_USGS_DIR)")
    base = Path(USGS_DIR)
    place = parse_catalog(base / "place.csv",
                          CatalogSchema("PlaceID", "Lon", "Lat", ("PlaceName", "State")), "P")
    station = parse_catalog(base / "station.csv",
                            CatalogSchema("StationNumber", "Lon", "Lat", ("StationName",)), "S")
    return place, station


def points(obj_type, *triples) -> Catalog:
    return Catalog.from_points(obj_type, list(triples))
