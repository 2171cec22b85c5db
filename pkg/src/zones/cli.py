"""Command-line front end: ``zones {build,near,nearest,selfmatch,crossmatch,verify,bench}``.

Exit status: 0 success, 1 verification failure, 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from zones.errors import ZonesError
from zones.index import MARGIN_MODES, IndexConfig, build_index, load_index, save_index
from zones.ingest import DISTRIBUTIONS, Catalog, CatalogSchema, generate_synthetic, parse_catalog
from zones.match import UNIT_SCALE, MatchJob, cross_match, self_match
from zones.oracle import alpha_by_sampling, brute_match, brute_neighbors, matches_agree, neighbors_agree
from zones.query import QuerySpec, nearest_object, points_near_point
from zones.sphere import SphericalCoord, alpha

log = logging.getLogger("zones")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


def parse_angle(text: str) -> float:
    """Decimal degrees, or arcminutes / arcseconds with an ``m`` / ``s`` suffix."""
    s = str(text).strip().lower()
    try:
        if s.endswith("m"):
            return float(s[:-1]) / 60.0
        if s.endswith("s"):
            return float(s[:-1]) / 3600.0
        if s.endswith("d"):
            return float(s[:-1])
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}") from None


def positive_angle(text: str) -> float:
    v = parse_angle(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"angle must be positive, got {text!r}")
    return v


def _per_type(values: list[str] | None, obj_type: str, default: str | None) -> str | None:
    """Pick ``TYPE=NAME`` for this type, else a bare ``NAME``, else the default."""
    bare = default
    for v in values or []:
        if "=" in v:
            k, name = v.split("=", 1)
            if k == obj_type:
                return name
        else:
            bare = v
    return bare


@contextlib.contextmanager
def _output(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _fmt(v: float) -> str:
    return repr(float(v))


# -- build -----------------------------------------------------------------

def cmd_build(args) -> int:
    catalogs: list[Catalog] = []
    for spec in args.catalog or []:
        if "=" not in spec:
            raise argparse.ArgumentTypeError(f"--catalog expects TYPE=PATH, got {spec!r}")
        obj_type, path = spec.split("=", 1)
        schema = CatalogSchema(
            id_column=_per_type(args.id_col, obj_type, "id"),
            lon_column=_per_type(args.lon_col, obj_type, None),
            lat_column=_per_type(args.lat_col, obj_type, None),
        )
        catalogs.append(parse_catalog(path, schema, obj_type))
    if args.synthetic is not None:
        catalogs.append(generate_synthetic(args.synthetic, args.seed, args.distribution, obj_type=args.type))
    if not catalogs:
        raise argparse.ArgumentTypeError("give at least one --catalog or --synthetic")
    config = IndexConfig(theta=args.theta, zone_height=args.zone_height, margin=args.margin)
    store = build_index(catalogs, config)
    save_index(store, args.out)
    print("objType,native,margin")
    for obj_type, (nat, mar) in store.counts().items():
        print(f"{obj_type},{nat},{mar}")
    return EXIT_OK


# -- queries ---------------------------------------------------------------

def _center(args) -> SphericalCoord:
    lon = args.lon if args.lon is not None else args.ra
    lat = args.lat if args.lat is not None else args.dec
    if lon is None or lat is None:
        raise argparse.ArgumentTypeError("give --lat/--lon or --ra/--dec")
    try:
        return SphericalCoord.normalized(lon, lat)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _labels(args) -> dict[int, str] | None:
    if not args.catalog:
        return None
    cols = tuple(args.label_col or [])
    cat = parse_catalog(args.catalog, CatalogSchema(args.id_col or "id", args.lon_col, args.lat_col, cols), args.type)
    return {k: " ".join(v[c] for c in cols) for k, v in cat.payload.items()}


def _write_neighbors(rows, args) -> None:
    labels = _labels(args)
    scale = UNIT_SCALE[args.units]
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["objID", "distance"] + (["label"] if labels is not None else []))
        for n in rows:
            row = [n.obj_id, _fmt(n.distance * scale)]
            if labels is not None:
                row.append(labels.get(n.obj_id, ""))
            w.writerow(row)


def _load(path):
    if not Path(path).exists():
        raise ZonesError(f"index file {path} not found")
    return load_index(path)


def cmd_near(args) -> int:
    store = _load(args.index)
    rows = points_near_point(store, QuerySpec(args.type, _center(args), args.theta))
    _write_neighbors(rows, args)
    return EXIT_OK


def cmd_nearest(args) -> int:
    store = _load(args.index)
    hit = nearest_object(store, args.type, _center(args))
    _write_neighbors([hit] if hit is not None else [], args)
    return EXIT_OK


# -- matches ---------------------------------------------------------------

def _emit_matches(matches, args, theta) -> None:
    with _output(args.out) as fh:
        matches.write_csv(fh, args.units)
    if args.figures:
        from zones.report import plot_match_distances
        path = plot_match_distances(matches.distance, theta, Path(args.figures) / f"{args.command}_distances.png")
        log.info("wrote %s", path)


def cmd_selfmatch(args) -> int:
    store = _load(args.index)
    theta = args.theta if args.theta is not None else store.config.theta
    m = self_match(MatchJob.self_job(store, args.type, theta, workers=args.workers))
    _emit_matches(m, args, theta)
    return EXIT_OK


def cmd_crossmatch(args) -> int:
    store_a = _load(args.index)
    store_b = _load(args.index_b) if args.index_b else store_a
    theta = args.theta if args.theta is not None else min(store_a.config.theta, store_b.config.theta)
    m = cross_match(MatchJob.cross_job(store_a, args.type_a, store_b, args.type_b, theta, workers=args.workers))
    _emit_matches(m, args, theta)
    return EXIT_OK


# -- verify ----------------------------------------------------------------

QUERY_THETAS = (0.01, 1.0, 5.0)


def run_verify(n: int, seed: int, distribution: str, match_theta: float = 1.0, margin: str = "full",
               queries: int = 100, workers: int = 1) -> list[tuple[str, bool, str]]:
    """Engine-against-oracle checks; returns ``(name, passed, detail)`` rows."""
    checks = []
    cat = generate_synthetic(n, seed, distribution, obj_type="A")
    other = generate_synthetic(n, seed + 1, distribution, obj_type="B", first_id=n + 1)
    centers = generate_synthetic(queries, seed + 2, distribution)
    design = max(max(QUERY_THETAS), match_theta)
    store = build_index([cat, other], IndexConfig(theta=design, zone_height=match_theta, margin=margin))

    rng = np.random.default_rng(seed)
    worst = 0.0
    decs = rng.uniform(85.0, 88.9, 20) if distribution == "polar-cap" else rng.uniform(-88.5, 88.5, 20)
    for dec in decs:
        th = min(match_theta, 89.0 - abs(dec))
        if th <= 0:
            continue
        worst = max(worst, abs(alpha(th, dec) - alpha_by_sampling(th, dec)))
    pole_ok = all(alpha(t, d) == 180.0 for t, d in ((0.5, 89.6), (1.0, -89.0), (5.0, 85.0)))
    checks.append(("alpha_vs_sampling", worst < 1e-6, f"max |diff| {worst:.3g} deg"))
    checks.append(("alpha_pole", pole_ok, "alpha = 180 once the circle reaches a pole"))

    for theta in QUERY_THETAS:
        bad = 0
        for rec in centers.records():
            center = SphericalCoord(rec.ra, rec.dec)
            got = points_near_point(store, QuerySpec("A", center, theta))
            if not neighbors_agree(got, brute_neighbors(cat, center, theta), theta):
                bad += 1
        checks.append((f"query_theta={theta:g}", bad == 0, f"{bad}/{len(centers)} queries differ"))

    sm = self_match(MatchJob.self_job(store, "A", match_theta, workers=workers))
    ok = matches_agree(sm, brute_match(cat, cat, match_theta, self_mode=True), match_theta)
    checks.append(("self_match", ok, f"{len(sm)} pairs"))
    cm = cross_match(MatchJob.cross_job(store, "A", store, "B", match_theta, workers=workers))
    ok = matches_agree(cm, brute_match(cat, other, match_theta), match_theta)
    checks.append(("cross_match", ok, f"{len(cm)} pairs"))
    return checks


def cmd_verify(args) -> int:
    dists = DISTRIBUTIONS if args.distribution == "all" else (args.distribution,)
    failed = 0
    rows = []
    for dist in dists:
        for name, passed, detail in run_verify(args.n, args.seed, dist, args.theta, args.margin,
                                               args.queries, args.workers):
            failed += not passed
            rows.append((dist, name, "PASS" if passed else "FAIL", detail))
            print(f"{'PASS' if passed else 'FAIL'} {dist} {name}: {detail}", file=sys.stderr)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["distribution", "check", "status", "detail"])
        w.writerows(rows)
    if args.figures:
        from zones.report import plot_alpha
        samples = [(t, d, alpha_by_sampling(t, d, 200_000)) for t in (0.5, 1.0, 5.0) for d in (0, 30, 60, 80)]
        plot_alpha((0.5, 1.0, 5.0), Path(args.figures) / "alpha.png", samples)
    return EXIT_CHECK if failed else EXIT_OK


# -- bench -----------------------------------------------------------------

def run_bench(n: int, seed: int, theta: float, zone_height: float | None, distribution: str = "uniform-sphere",
              workers: int = 1, per_point: bool = True, brute: bool = True) -> list[dict]:
    cat = generate_synthetic(n, seed, distribution)
    store = build_index(cat, IndexConfig(theta=theta, zone_height=zone_height))
    timings = []

    t0 = time.perf_counter()
    batch = self_match(MatchJob.self_job(store, "P", theta, workers=workers))
    timings.append(("batch_self_match", time.perf_counter() - t0, len(batch)))

    if per_point:
        t0 = time.perf_counter()
        pairs = 0
        for rec in cat.records():
            hits = points_near_point(store, QuerySpec("P", SphericalCoord(rec.ra, rec.dec), theta))
            pairs += sum(1 for h in hits if h.obj_id != rec.obj_id)
        timings.append(("per_point_queries", time.perf_counter() - t0, pairs))

    if brute:
        t0 = time.perf_counter()
        oracle = brute_match(cat, cat, theta, self_mode=True)
        timings.append(("brute_force", time.perf_counter() - t0, len(oracle)))

    base = timings[0][1]
    return [{"method": m, "n": n, "theta": theta, "seconds": secs, "pairs": pairs,
             "speedup_vs_batch": (secs / base) if base > 0 and n > 0 else 0.0}
            for m, secs, pairs in timings]


def cmd_bench(args) -> int:
    rows = run_bench(args.n, args.seed, args.theta, args.zone_height, args.distribution, args.workers)
    with _output(args.out) as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "seconds": f"{r['seconds']:.6f}", "speedup_vs_batch": f"{r['speedup_vs_batch']:.3f}"})
    if args.figures:
        from zones.report import plot_bench
        plot_bench(rows, Path(args.figures) / "bench.png")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zones", description="Zone-based spherical neighbor search and matching.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common_out(sp, units=True):
        sp.add_argument("--out", help="output path (default: standard output)")
        if units:
            sp.add_argument("--units", choices=sorted(UNIT_SCALE), default="deg")

    b = sub.add_parser("build", help="build an index file from catalogs")
    b.add_argument("--catalog", action="append", metavar="TYPE=PATH")
    b.add_argument("--id-col", action="append", metavar="[TYPE=]NAME")
    b.add_argument("--lon-col", action="append", metavar="[TYPE=]NAME")
    b.add_argument("--lat-col", action="append", metavar="[TYPE=]NAME")
    b.add_argument("--synthetic", type=int, metavar="N", help="add N synthetic points")
    b.add_argument("--distribution", choices=DISTRIBUTIONS, default="uniform-sphere")
    b.add_argument("--type", default="P", help="objType of the synthetic catalog")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--zone-height", type=positive_angle, default=10.0 / 60.0)
    b.add_argument("--theta", type=positive_angle, default=1.0)
    b.add_argument("--margin", choices=MARGIN_MODES, default="full")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    for name, func in (("near", cmd_near), ("nearest", cmd_nearest)):
        q = sub.add_parser(name, help="objects within theta" if name == "near" else "closest object")
        q.add_argument("--index", required=True)
        q.add_argument("--type", required=True)
        q.add_argument("--lat", type=float)
        q.add_argument("--lon", type=float)
        q.add_argument("--ra", type=parse_angle)
        q.add_argument("--dec", type=parse_angle)
        if name == "near":
            q.add_argument("--theta", type=positive_angle, required=True)
        q.add_argument("--catalog", help="source CSV, to add a label column")
        q.add_argument("--id-col")
        q.add_argument("--lon-col")
        q.add_argument("--lat-col")
        q.add_argument("--label-col", action="append")
        common_out(q)
        q.set_defaults(func=func)

    s = sub.add_parser("selfmatch", help="all neighbor pairs within one dataset")
    s.add_argument("--index", required=True)
    s.add_argument("--type", required=True)
    s.add_argument("--theta", type=positive_angle)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--figures", metavar="DIR")
    common_out(s)
    s.set_defaults(func=cmd_selfmatch)

    c = sub.add_parser("crossmatch", help="all pairs between two datasets")
    c.add_argument("--index", required=True)
    c.add_argument("--index-b", help="second index file (default: same as --index)")
    c.add_argument("--type-a", required=True)
    c.add_argument("--type-b", required=True)
    c.add_argument("--theta", type=positive_angle)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--figures", metavar="DIR")
    common_out(c)
    c.set_defaults(func=cmd_crossmatch)

    v = sub.add_parser("verify", help="check the engine against brute force")
    v.add_argument("--n", type=int, default=1000)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--distribution", choices=DISTRIBUTIONS + ("all",), default="all")
    v.add_argument("--theta", type=positive_angle, default=1.0, help="match radius")
    v.add_argument("--margin", choices=("full", "trimmed"), default="full")
    v.add_argument("--queries", type=int, default=100)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--figures", metavar="DIR")
    common_out(v, units=False)
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("bench", help="time batch, per-point and brute-force self-match")
    k.add_argument("--n", type=int, default=20000)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--theta", type=positive_angle, default=1.0)
    k.add_argument("--zone-height", type=positive_angle)
    k.add_argument("--distribution", choices=DISTRIBUTIONS, default="uniform-sphere")
    k.add_argument("--workers", type=int, default=1)
    k.add_argument("--figures", metavar="DIR")
    common_out(k, units=False)
    k.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"zones: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ZonesError, ValueError, OSError) as exc:
        print(f"zones: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
