"""Command-line entry point: ``stg-miner <command> ...``.

Exit codes: 0 success, 1 I/O or usage error, 2 domain-level negative
result (unsatisfiable identification, invalid graph).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import serialize as sio
from .bench import bench_values, run_bench
from .errors import ParseError, STGError, ValidationError
from .evolution import classify_changes, mine_frequent
from .fixtures import DEMO_TRACKING, demo_snapshots, demo_template
from .graph import ConstructionConfig, construct_stg
from .identify import delta_from_snapshot, dyn_solve, init_state
from .matching import match_all_anchors, modelize_csp, resolve_csp
from .patterns import catalog, catalog_by_name

log = logging.getLogger("stgminer")

EXIT_OK, EXIT_IO, EXIT_DOMAIN = 0, 1, 2


class UsageError(Exception):
    pass


def _configure_logging() -> None:
    level = os.environ.get("STG_MINER_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _pattern(spec: str):
    path = Path(spec)
    if path.exists():
        return sio.load_pattern(path)
    named = catalog_by_name()
    if spec in named:
        return named[spec]
    raise UsageError(f"pattern {spec!r} is neither a file nor a catalog name "
                     f"({', '.join(named)})")


def cmd_identify(args) -> int:
    template = sio.load_template(args.template)
    snapshots = sio.load_snapshot_series(args.snapshots)
    state = init_state(template, snapshots[0])
    if state is None:
        print(f"unsatisfiable at layer 0 ({snapshots[0].time})", file=sys.stderr)
        return EXIT_DOMAIN
    results = [dict(state.assignment)]
    for t, snap in enumerate(snapshots[1:], start=1):
        delta = delta_from_snapshot(state, snap)
        solved = dyn_solve(state, delta)
        log.info("layer %d: %d nogoods recorded", t, len(state.recorded))
        if solved is None:
            print(f"unsatisfiable at layer {t} ({snap.time})", file=sys.stderr)
            return EXIT_DOMAIN
        results.append(solved)
    sio.save_assignments([s.time for s in snapshots], results, args.out, template=template.name)
    print(f"identified {template.name!r} in {len(results)} snapshots -> {args.out}")
    return EXIT_OK


def cmd_build_stg(args) -> int:
    snapshots = sio.load_snapshot_series(args.snapshots)
    times, assignments = sio.load_assignments(args.assignments)
    if times != [s.time for s in snapshots]:
        raise UsageError(f"assignment times {times} do not match snapshots "
                         f"{[s.time for s in snapshots]}")
    config = ConstructionConfig(args.theta_c, args.theta_d, args.near)
    try:
        g = construct_stg(snapshots, assignments, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sio.save_stg(g, args.out)
    print(f"{g!r} -> {args.out}")
    return EXIT_OK


def cmd_match(args) -> int:
    g = sio.load_stg(args.stg)
    pattern = _pattern(args.pattern)
    if args.all_anchors:
        found = match_all_anchors(g, pattern, max_matches=args.max_matches, threads=args.threads)
        sio.save_matches(pattern.name, found, args.out)
        total = sum(len(v) for v in found.values())
        print(f"{pattern.name}: {total} matches over {len(found)} anchors -> {args.out}")
    else:
        network = modelize_csp(g, pattern, args.anchor)
        found = resolve_csp(network, g, max_matches=args.max_matches)
        sio.save_matches(pattern.name, found, args.out, anchor=network.anchor)
        print(f"{pattern.name}: {len(found)} matches at anchor {network.anchor} -> {args.out}")
    return EXIT_OK


def cmd_mine(args) -> int:
    g = sio.load_stg(args.stg)
    patterns = list(catalog()) if args.catalog else []
    patterns += [_pattern(p) for p in args.pattern or []]
    if not patterns:
        raise UsageError("mine needs --catalog and/or --pattern")
    table = mine_frequent(g, patterns, args.min_support, threads=args.threads)
    sio.save_frequency_csv(table, args.out)
    print(f"{len(table)} rows with support >= {args.min_support} -> {args.out}")
    return EXIT_OK


def cmd_classify(args) -> int:
    g = sio.load_stg(args.stg)
    events = classify_changes(g)
    sio.save_events(events, args.out)
    print(f"{len(events)} change events -> {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    g = sio.load_stg(args.stg, check=False)
    problems = g.validate()
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return EXIT_DOMAIN
    print(f"valid: {g!r}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        values = bench_values(args.min, args.max, args.step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pattern = _pattern(args.pattern)
    rows = run_bench(args.vary, values, pattern, reps=args.reps, seed=args.seed,
                     fixed_nodes=args.nodes, mean_degree=args.degree)
    sio.save_bench_csv(rows, args.out)
    print(f"{len(rows)} benchmark rows -> {args.out}")
    return EXIT_OK


def cmd_demo(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    snaps = demo_snapshots()
    sio.save_snapshot_series(snaps, out / "snapshots")
    sio.save_template(demo_template(), out / "template.json")
    sio.save_assignments([s.time for s in snaps], list(DEMO_TRACKING), out / "tracking.json")
    for p in catalog():
        sio.save_pattern(p, out / f"pattern-{p.name}.json")
    print(f"demo fixture written to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stg-miner",
        description="Spatiotemporal graph construction and constraint-based pattern mining.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identify", help="identify a template in every snapshot")
    p.add_argument("--template", required=True)
    p.add_argument("--snapshots", required=True, help="directory of snapshot files, or a series file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("build-stg", help="build the spatiotemporal graph")
    p.add_argument("--snapshots", required=True)
    p.add_argument("--assignments", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--theta-c", type=float, default=0.5, help="continuation overlap threshold")
    p.add_argument("--theta-d", type=float, default=0.3, help="derivation overlap threshold")
    p.add_argument("--near", type=int, default=None, help="add near(d) spatial edges")
    p.set_defaults(func=cmd_build_stg)

    p = sub.add_parser("match", help="find all matches of a pattern")
    p.add_argument("--stg", required=True)
    p.add_argument("--pattern", required=True, help="pattern file or catalog name")
    p.add_argument("--all-anchors", action="store_true")
    p.add_argument("--anchor", type=int, default=0, help="first layer of the anchor (default 0)")
    p.add_argument("--max-matches", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("mine", help="pattern frequency table")
    p.add_argument("--stg", required=True)
    p.add_argument("--catalog", action="store_true", help="use every built-in pattern")
    p.add_argument("--pattern", action="append", help="extra pattern file or catalog name")
    p.add_argument("--min-support", type=float, default=0.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("classify", help="list change events")
    p.add_argument("--stg", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("validate", help="re-check every graph invariant")
    p.add_argument("--stg", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="matching time over synthetic graphs")
    p.add_argument("--vary", choices=("nodes", "edges"), required=True)
    p.add_argument("--min", type=int, required=True)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--step", type=int, required=True)
    p.add_argument("--pattern", default="spatial-triangle")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=300, help="node count when varying edges")
    p.add_argument("--degree", type=float, default=4.0, help="mean spatial degree when varying nodes")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("demo", help="write the demo fixture files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_IO
    if getattr(args, "reps", 3) < 3:
        print("error: --reps must be >= 3", file=sys.stderr)
        return EXIT_IO
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ParseError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except STGError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
