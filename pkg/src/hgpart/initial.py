"""Recursive initial partitioning of the coarsest hypergraph.

k blocks are obtained by recursive bipartitioning: split k into
ceil(k/2) / floor(k/2), bipartition with weight targets proportional to the
split using the per-level tolerance eps' = (1 + eps)^(1 / ceil(log2 k)) - 1,
build the two induced sub-hypergraphs (cut nets are split), and recurse.
Sibling recursion branches may run as parallel tasks.
"""

from __future__ import annotations

import math
import threading

from .core import StaticHypergraph
from .pipeline import multilevel_bipartition


def level_epsilon(epsilon, k):
    """Per-level balance tolerance so the composed recursion meets epsilon."""
    depth = max(1, math.ceil(math.log2(k)))
    return (1.0 + epsilon) ** (1.0 / depth) - 1.0


def induced_subhypergraph(h, keep):
    """Sub-hypergraph on the vertex list `keep`; nets are restricted to the
    kept pins and dropped when empty.  Returns (hypergraph, keep)."""
    local = {v: i for i, v in enumerate(keep)}
    pin_lists = []
    net_weights = []
    for e in range(h.num_nets):
        pins = [local[p] for p in h.net_pins(e) if p in local]
        if pins:
            pin_lists.append(pins)
            net_weights.append(h.net_weight[e])
    vertex_weights = [h.vertex_weight[v] for v in keep]
    return StaticHypergraph(len(keep), pin_lists, vertex_weights, net_weights)


def recursive_initial_partition(h, k, epsilon, seed, cfg, threads=1, _slots=None):
    """Return a k-way assignment for h (list of block ids)."""
    if k == 1:
        return [0] * h.num_vertices
    if h.num_vertices == 0:
        return []
    eps = level_epsilon(epsilon, k)
    k0 = (k + 1) // 2
    k1 = k - k0
    total = h.total_vertex_weight
    cap0 = max((1.0 + eps) * total * k0 / k, math.ceil(total * k0 / k))
    cap1 = max((1.0 + eps) * total * k1 / k, math.ceil(total * k1 / k))
    pi2, _ = multilevel_bipartition(h, cap0, cap1, "%s:k%d" % (seed, k), cfg, threads)

    side0 = [v for v in range(h.num_vertices) if pi2[v] == 0]
    side1 = [v for v in range(h.num_vertices) if pi2[v] == 1]
    result = [0] * h.num_vertices

    def solve(side, sub_k, tag):
        if not side:
            return []
        sub = induced_subhypergraph(h, side)
        return recursive_initial_partition(
            sub, sub_k, epsilon, "%s:%s" % (seed, tag), cfg, threads=1, _slots=_slots
        )

    if threads > 1 and side0 and side1:
        slots = _slots if _slots is not None else threading.Semaphore(max(0, threads - 1))
        out = {}

        def task(side, sub_k, tag):
            out[tag] = solve(side, sub_k, tag)

        if slots.acquire(blocking=False):
            worker = threading.Thread(target=task, args=(side1, k1, "r"), daemon=True)
            worker.start()
            out["l"] = solve(side0, k0, "l")
            worker.join()
            slots.release()
        else:
            out["l"] = solve(side0, k0, "l")
            out["r"] = solve(side1, k1, "r")
        left, right = out["l"], out["r"]
    else:
        left = solve(side0, k0, "l")
        right = solve(side1, k1, "r")

    for i, v in enumerate(side0):
        result[v] = left[i]
    for i, v in enumerate(side1):
        result[v] = k0 + right[i]
    return result
