"""Shared pipeline pieces: coarse-level extraction, the uncoarsening loop with
batch-triggered refinement, and the multilevel bipartitioning used by the
recursive initial partitioner.
"""

from __future__ import annotations

import threading

from .batches import construct_batches
from .coarsen import Coarsener
from .core import StaticHypergraph
from .dynamic import DynamicHypergraph
from .flatpool import flat_bipartition_pool
from .gains import KWayState
from .refine import RefineConfig, Refiner


def refine_config(cfg):
    return RefineConfig(
        lp_max_rounds=cfg.lp_max_rounds,
        fm_seeds_per_search=cfg.fm_seeds_per_search,
        fm_move_cap=cfg.fm_move_cap,
        fm_alpha=cfg.fm_alpha,
    )


def extract_active_subhypergraph(dynamic, forest):
    """Materialize the current coarse level as a StaticHypergraph.

    Returns (hypergraph, roots) where roots[i] is the dynamic vertex behind
    local vertex i.
    """
    roots = forest.roots()
    local = {v: i for i, v in enumerate(roots)}
    pin_lists = []
    net_weights = []
    for e in range(dynamic.num_nets):
        if not dynamic.net_active[e]:
            continue
        pins = [local[p] for p in dynamic.active_pins(e)]
        pin_lists.append(pins)
        net_weights.append(dynamic.net_weight[e])
    vertex_weights = [dynamic.vertex_weight[v] for v in roots]
    return StaticHypergraph(len(roots), pin_lists, vertex_weights, net_weights), roots


def _parallel_uncontract(dynamic, forest, batch, state, threads):
    if threads <= 1 or len(batch) <= 1:
        for v in batch:
            dynamic.uncontract(forest.rep[v], v, hooks=state)
        return
    cursor = [0]
    lock = threading.Lock()

    def worker():
        while True:
            with lock:
                i = cursor[0]
                if i >= len(batch):
                    return
                cursor[0] = i + 1
            v = batch[i]
            dynamic.uncontract(forest.rep[v], v, hooks=state)

    workers = [threading.Thread(target=worker, daemon=True) for _ in range(threads)]
    for w in workers:
        w.start()
    for w in workers:
        w.join()


def uncoarsen_and_refine(dynamic, result, state, refiner, b_max, beta, threads):
    """Undo the whole contraction forest batch by batch with refinement.

    Entering the batches of a coarsening pass first re-activates the nets that
    the identical/single-pin removal after that pass deactivated (reverse pass
    order), then rebuilds the partition state for the restored level.  After
    each batch the refiner accumulates seeds; a global refinement pass runs
    once per coarsening-pass boundary.
    """
    forest = result.forest
    schedule = construct_batches(forest, b_max, threads)
    dynamic.sort_inactive_pins_by_batch(schedule.batch_index)
    records = result.removal_records
    current_pass = None
    for bi, batch in enumerate(schedule.batches):
        p = schedule.pass_of_batch[bi]
        if p != current_pass:
            if current_pass is not None:
                refiner.global_pass()
            if p < len(records):
                dynamic.restore_nets(records[p])
                state.rebuild()
            current_pass = p
        dynamic.begin_batch(bi)
        _parallel_uncontract(dynamic, forest, batch, state, threads)
        dynamic.end_batch()
        refiner.refine_after_batches(batch, beta)
    # at the finest level, iterate global refinement to a fixed point: a
    # single pass can leave easy improvements behind, especially when
    # concurrent searches interfered with one another
    for _ in range(10):
        if current_pass is None:
            break
        before = state.objective
        refiner.global_pass()
        if state.objective >= before:
            break
    return schedule


def multilevel_bipartition(hypergraph, cap0, cap1, seed, cfg, threads=1):
    """Full multilevel 2-way pipeline on a (sub)hypergraph with explicit block
    weight caps.  Refinement runs after every batch (beta = 0).  Returns
    (assignment, balanced_flag)."""
    h = hypergraph
    if h.num_vertices == 1:
        return [0], True
    dynamic = DynamicHypergraph(h)
    coarsener = Coarsener(
        dynamic,
        k=2,
        seed="%s:bip" % seed,
        threads=threads,
        coarse_factor=cfg.coarse_factor,
        max_net_size=cfg.max_net_size,
        chunk_size=cfg.chunk_size,
    )
    result = coarsener.coarsen()
    coarse, roots = extract_active_subhypergraph(dynamic, result.forest)
    pi_coarse, balanced, _ = flat_bipartition_pool(
        coarse, cap0, cap1, seed="%s:pool" % seed, algorithms=cfg.pool_algorithms
    )
    state = KWayState(dynamic, 2, [cap0, cap1], h.total_vertex_weight)
    state.assign_roots(roots, [pi_coarse[i] for i in range(len(roots))])
    refiner = Refiner(
        state,
        seed="%s:refine" % seed,
        threads=threads,
        config=refine_config(cfg),
        audit=cfg.audit,
    )
    uncoarsen_and_refine(dynamic, result, state, refiner, cfg.b_max, 0, threads)
    if not state.is_balanced() and refiner.rebalance():
        refiner.global_pass()
    return list(state.pi), state.is_balanced()
