"""Command line interface.

Exit codes: 0 success, 1 usage / input errors, 2 balance constraint not met,
3 internal errors.  Every flag can also be set through an environment
variable named HGPART_<FLAG> (e.g. HGPART_SEED=7); explicit flags win.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback

from . import core
from .config import PartitionerConfig
from .driver import (
    EXIT_INFEASIBLE,
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_USAGE,
    RunStats,
    emit_stats,
    partition_hypergraph,
    write_partition,
)
from .flatpool import ALGORITHMS

_ENV_PREFIX = "HGPART_"


def _env_default(name, cast, fallback):
    raw = os.environ.get(_ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit("invalid value %r for env %s%s" % (raw, _ENV_PREFIX, name.upper()))


def build_parser():
    p = argparse.ArgumentParser(
        prog="hgpart",
        description="Parallel n-level hypergraph partitioner minimizing connectivity.",
    )
    p.add_argument("hypergraph", nargs="?", default=_env_default("hypergraph", str, None),
                   help="input hypergraph in hMetis format")
    p.add_argument("-k", "--blocks", type=int,
                   default=_env_default("blocks", int, None), help="number of blocks")
    p.add_argument("-e", "--epsilon", type=float,
                   default=_env_default("epsilon", float, 0.03),
                   help="balance tolerance (default 0.03)")
    p.add_argument("-s", "--seed", default=_env_default("seed", str, "0"),
                   help="random seed (default 0)")
    p.add_argument("-t", "--threads", type=int,
                   default=_env_default("threads", int, 1),
                   help="worker threads (default 1)")
    p.add_argument("--b-max", type=int, default=_env_default("b_max", int, 1000),
                   help="maximum uncontraction batch size (default 1000)")
    p.add_argument("-o", "--output", default=_env_default("output", str, None),
                   help="partition output file (one block id per line)")
    p.add_argument("--stats", default=_env_default("stats", str, None),
                   help="write run statistics to this file")
    p.add_argument("--stats-format", choices=("json", "csv"),
                   default=_env_default("stats_format", str, "json"))
    p.add_argument("--pool", default=_env_default("pool", str, None),
                   help="comma-separated initial pool algorithms (subset of: %s)"
                        % ",".join(ALGORITHMS))
    p.add_argument("--max-net-size", type=int,
                   default=_env_default("max_net_size", int, 1000),
                   help="rating ignores nets with more pins than this")
    p.add_argument("--coarse-factor", type=int,
                   default=_env_default("coarse_factor", int, 160),
                   help="contraction limit is this factor times k")
    p.add_argument("--restarts", type=int,
                   default=_env_default("restarts", int, 3),
                   help="independent runs per invocation; best kept (default 3)")
    p.add_argument("--dedup-pins", action="store_true",
                   default=bool(_env_default("dedup_pins", int, 0)),
                   help="silently drop duplicate pins instead of rejecting them")
    p.add_argument("--audit", action="store_true",
                   default=bool(_env_default("audit", int, 0)),
                   help="run expensive internal consistency checks")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.hypergraph or not args.blocks:
        parser.print_usage(sys.stderr)
        print("error: a hypergraph file and -k are required", file=sys.stderr)
        return EXIT_USAGE
    if (args.blocks < 1 or args.epsilon < 0 or args.threads < 1
            or args.b_max < 1 or args.restarts < 1):
        print("error: invalid parameter value", file=sys.stderr)
        return EXIT_USAGE
    pool = tuple(PartitionerConfig().pool_algorithms)
    if args.pool:
        pool = tuple(name.strip() for name in args.pool.split(",") if name.strip())
        unknown = [name for name in pool if name not in ALGORITHMS]
        if unknown:
            print("error: unknown pool algorithms %s" % unknown, file=sys.stderr)
            return EXIT_USAGE

    cfg = PartitionerConfig(
        epsilon=args.epsilon,
        seed=args.seed,
        threads=args.threads,
        b_max=args.b_max,
        coarse_factor=args.coarse_factor,
        max_net_size=args.max_net_size,
        restarts=args.restarts,
        pool_algorithms=pool,
        audit=args.audit,
    )

    def fail_stats(err, status="failed"):
        if args.stats:
            stats = RunStats(status=status, k=args.blocks or 0, epsilon=args.epsilon,
                             seed=str(args.seed), threads=args.threads,
                             b_max=args.b_max, error=err)
            try:
                emit_stats(stats, args.stats, args.stats_format)
            except OSError:
                pass

    try:
        h = core.load_hmetis(args.hypergraph, dedup_pins=args.dedup_pins)
    except (OSError, core.HypergraphError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        fail_stats(str(exc))
        return EXIT_USAGE

    try:
        pi, stats = partition_hypergraph(h, args.blocks, cfg)
    except Exception as exc:  # internal failure: report and signal exit 3
        print("internal error: %s" % exc, file=sys.stderr)
        traceback.print_exc()
        fail_stats(str(exc))
        return EXIT_INTERNAL

    try:
        if args.output:
            write_partition(pi, args.output)
        if args.stats:
            emit_stats(stats, args.stats, args.stats_format)
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE

    if not args.quiet:
        print(
            "objective=%d imbalance=%.5f feasible=%s time=%.3fs"
            % (stats.objective, stats.imbalance, stats.feasible, stats.total_time)
        )
    return EXIT_OK if stats.feasible else EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
