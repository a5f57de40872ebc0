"""Top-level partitioning runs: load, coarsen, initial partition, uncoarsen
with refinement, validate, and emit results plus machine-readable run stats.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field

from . import core
from .coarsen import Coarsener
from .config import PartitionerConfig
from .dynamic import DynamicHypergraph
from .gains import KWayState
from .initial import recursive_initial_partition
from .pipeline import extract_active_subhypergraph, refine_config, uncoarsen_and_refine
from .refine import Refiner

STATS_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_INTERNAL = 3


@dataclass
class RunStats:
    schema_version: int = STATS_SCHEMA_VERSION
    status: str = "failed"
    k: int = 0
    epsilon: float = 0.0
    seed: str = ""
    threads: int = 0
    b_max: int = 0
    num_vertices: int = 0
    num_nets: int = 0
    num_pins: int = 0
    objective: int = -1
    imbalance: float = -1.0
    feasible: bool = False
    coarsening_passes: int = 0
    contractions: int = 0
    discarded_contractions: int = 0
    batches: int = 0
    restarts: int = 0
    load_time: float = 0.0
    coarsen_time: float = 0.0
    initial_time: float = 0.0
    uncoarsen_time: float = 0.0
    lp_time: float = 0.0
    fm_time: float = 0.0
    total_time: float = 0.0
    error: str = ""


def _run_once(h, k, cfg, seed, stats):
    """One full multilevel run (coarsen, initial partition, uncoarsen with
    refinement).  Phase timings and counters accumulate into stats."""
    t0 = time.perf_counter()
    dynamic = DynamicHypergraph(h)
    coarsener = Coarsener(
        dynamic,
        k=k,
        seed=seed,
        threads=cfg.threads,
        coarse_factor=cfg.coarse_factor,
        max_net_size=cfg.max_net_size,
        chunk_size=cfg.chunk_size,
    )
    result = coarsener.coarsen()
    stats.coarsen_time += time.perf_counter() - t0
    stats.coarsening_passes = result.passes
    stats.contractions = result.applied
    stats.discarded_contractions = result.discarded

    t0 = time.perf_counter()
    coarse, roots = extract_active_subhypergraph(dynamic, result.forest)
    pi_coarse = recursive_initial_partition(
        coarse, k, cfg.epsilon, seed, cfg, threads=cfg.threads
    )
    stats.initial_time += time.perf_counter() - t0

    t0 = time.perf_counter()
    cap = core.balance_cap(h.total_vertex_weight, k, cfg.epsilon)
    state = KWayState(dynamic, k, [cap] * k, h.total_vertex_weight)
    state.assign_roots(roots, [pi_coarse[i] for i in range(len(roots))])
    refiner = Refiner(
        state,
        seed="%s:topref" % seed,
        threads=cfg.threads,
        config=refine_config(cfg),
        audit=cfg.audit,
    )
    beta = max(cfg.b_max, 50 * cfg.threads)
    schedule = uncoarsen_and_refine(
        dynamic, result, state, refiner, cfg.b_max, beta, cfg.threads
    )
    if not state.is_balanced() and refiner.rebalance():
        refiner.global_pass()
    stats.uncoarsen_time += time.perf_counter() - t0
    stats.batches = len(schedule.batches)
    stats.lp_time += refiner.lp_time
    stats.fm_time += refiner.fm_time

    pi = list(state.pi)
    final = core.PartitionState.from_assignment(h, k, pi, cfg.epsilon)
    objective = core.connectivity_objective(h, final)
    if cfg.audit:
        problems = [
            v
            for v in core.validate_partition(h, final)
            if "exceeds cap" not in v or final.is_balanced()
        ]
        if problems:
            raise AssertionError("final partition invalid: %s" % problems[:5])
        if objective != state.objective:
            raise AssertionError("incremental objective diverged from audit")
    return pi, objective, core.imbalance(final), final.is_balanced()


def partition_hypergraph(h, k, cfg=None):
    """Partition a StaticHypergraph into k blocks.

    Runs cfg.restarts independent multilevel runs and keeps the best result
    (balanced first, then objective, then imbalance).  Returns (assignment,
    stats); the assignment is always complete and stats record phase timings
    and whether the balance constraint was met.
    """
    cfg = cfg or PartitionerConfig()
    stats = RunStats(
        k=k,
        epsilon=cfg.epsilon,
        seed=str(cfg.seed),
        threads=cfg.threads,
        b_max=cfg.b_max,
        num_vertices=h.num_vertices,
        num_nets=h.num_nets,
        num_pins=h.num_pins,
    )
    t_start = time.perf_counter()
    if k < 1:
        raise core.HypergraphError("k must be at least 1")
    if k == 1:
        pi = [0] * h.num_vertices
        stats.status = "ok"
        stats.objective = 0
        stats.imbalance = 0.0
        stats.feasible = True
        stats.total_time = time.perf_counter() - t_start
        return pi, stats

    best = None
    for r in range(max(1, cfg.restarts)):
        pi, objective, imbalance, feasible = _run_once(
            h, k, cfg, "%s:run%d" % (cfg.seed, r), stats
        )
        key = (0 if feasible else 1, objective, imbalance)
        if best is None or key < best[0]:
            best = (key, pi, objective, imbalance, feasible)
        stats.restarts = r + 1
    _, pi, stats.objective, stats.imbalance, stats.feasible = best
    stats.status = "ok" if stats.feasible else "infeasible"
    stats.total_time = time.perf_counter() - t_start
    return pi, stats


def write_partition(pi, path):
    with open(path, "w") as f:
        for b in pi:
            f.write("%d\n" % b)


def read_partition(path):
    with open(path) as f:
        return [int(line) for line in f if line.strip()]


def emit_stats(stats, path, fmt="json"):
    data = asdict(stats)
    if fmt == "json":
        with open(path, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(data))
            writer.writeheader()
            writer.writerow(data)
    else:
        raise ValueError("unknown stats format %r" % fmt)
