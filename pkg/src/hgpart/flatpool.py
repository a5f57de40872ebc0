"""Flat bipartitioning pool for the coarsest level.

Five simple algorithms each run between 5 and 20 times with fresh seeds; an
algorithm keeps running until its running statistics make further tries
pointless (mean - 2 * stddev of its achieved connectivity exceeds the best
solution found so far).  The pool returns the best balanced bipartition by
connectivity, breaking ties by lower imbalance; if no run is balanced, the
least imbalanced result is returned and flagged.
"""

from __future__ import annotations

import math
import random
import statistics
from collections import deque

MIN_RUNS = 5
MAX_RUNS = 20


class AlgorithmStats:
    """Running connectivity statistics for one pool algorithm."""

    def __init__(self, name):
        self.name = name
        self.values = []

    def record(self, value):
        self.values.append(value)

    @property
    def runs(self):
        return len(self.values)

    @property
    def mean(self):
        return statistics.fmean(self.values) if self.values else math.inf

    @property
    def stddev(self):
        if len(self.values) < 2:
            return math.inf
        return statistics.stdev(self.values)

    def should_run_again(self, best_objective):
        if self.runs < MIN_RUNS:
            return True
        if self.runs >= MAX_RUNS:
            return False
        return not (self.mean - 2.0 * self.stddev > best_objective)


def _cut_weight(h, pi):
    total = 0
    for e in range(h.num_nets):
        blocks = {pi[p] for p in h.net_pins(e)}
        if len(blocks) > 1:
            total += h.net_weight[e]
    return total


def _weights(h, pi):
    w = [0, 0]
    for v, b in enumerate(pi):
        w[b] += h.vertex_weight[v]
    return w


def _neighbors(h, v):
    seen = set()
    for e in h.vertex_nets(v):
        for p in h.net_pins(e):
            if p != v and p not in seen:
                seen.add(p)
                yield p


def _ideal_target0(h, cap0, cap1):
    return h.total_vertex_weight * cap0 / (cap0 + cap1)


def random_balanced(h, cap0, cap1, rng):
    order = list(range(h.num_vertices))
    rng.shuffle(order)
    target0 = _ideal_target0(h, cap0, cap1)
    pi = [1] * h.num_vertices
    w0 = 0
    for v in order:
        if w0 + h.vertex_weight[v] <= target0:
            pi[v] = 0
            w0 += h.vertex_weight[v]
    return pi


def bfs_growing(h, cap0, cap1, rng):
    target0 = _ideal_target0(h, cap0, cap1)
    pi = [1] * h.num_vertices
    visited = [False] * h.num_vertices
    w0 = 0
    order = list(range(h.num_vertices))
    rng.shuffle(order)
    pending = deque()
    for start in order:
        if w0 >= target0:
            break
        if visited[start]:
            continue
        pending.append(start)
        visited[start] = True
        while pending and w0 < target0:
            v = pending.popleft()
            if w0 + h.vertex_weight[v] > cap0:
                continue
            pi[v] = 0
            w0 += h.vertex_weight[v]
            for p in _neighbors(h, v):
                if not visited[p]:
                    visited[p] = True
                    pending.append(p)
    return pi


def label_propagation(h, cap0, cap1, rng):
    pi = random_balanced(h, cap0, cap1, rng)
    caps = [cap0, cap1]
    weights = _weights(h, pi)
    phi = [[0, 0] for _ in range(h.num_nets)]
    for e in range(h.num_nets):
        for p in h.net_pins(e):
            phi[e][pi[p]] += 1
    order = list(range(h.num_vertices))
    for _ in range(5):
        rng.shuffle(order)
        moved = 0
        for v in order:
            src = pi[v]
            dst = 1 - src
            if weights[dst] + h.vertex_weight[v] > caps[dst]:
                continue
            g = 0
            for e in h.vertex_nets(v):
                if phi[e][src] == 1:
                    g += h.net_weight[e]
                if phi[e][dst] == 0:
                    g -= h.net_weight[e]
            if g > 0:
                pi[v] = dst
                weights[src] -= h.vertex_weight[v]
                weights[dst] += h.vertex_weight[v]
                for e in h.vertex_nets(v):
                    phi[e][src] -= 1
                    phi[e][dst] += 1
                moved += 1
        if not moved:
            break
    return pi


def greedy_net_growing(h, cap0, cap1, rng):
    target0 = _ideal_target0(h, cap0, cap1)
    pi = [1] * h.num_vertices
    w0 = 0
    if h.num_nets == 0:
        return random_balanced(h, cap0, cap1, rng)
    queue = deque([rng.randrange(h.num_nets)])
    queued = set(queue)
    order = list(range(h.num_nets))
    rng.shuffle(order)
    extra = iter(order)
    while w0 < target0:
        if not queue:
            e = next((x for x in extra if x not in queued), None)
            if e is None:
                break
            queue.append(e)
            queued.add(e)
        e = queue.popleft()
        for v in h.net_pins(e):
            if pi[v] == 1 and w0 + h.vertex_weight[v] <= cap0 and w0 < target0:
                pi[v] = 0
                w0 += h.vertex_weight[v]
                for e2 in h.vertex_nets(v):
                    if e2 not in queued:
                        queued.add(e2)
                        queue.append(e2)
    return pi


def _pseudo_peripheral(h, rng):
    start = rng.randrange(h.num_vertices)
    for _ in range(2):
        dist = {start: 0}
        q = deque([start])
        last = start
        while q:
            v = q.popleft()
            last = v
            for p in _neighbors(h, v):
                if p not in dist:
                    dist[p] = dist[v] + 1
                    q.append(p)
        start = last
    return start


def greedy_gain_growing(h, cap0, cap1, rng):
    target0 = _ideal_target0(h, cap0, cap1)
    pi = [1] * h.num_vertices
    phi = [[0, 0] for _ in range(h.num_nets)]
    for e in range(h.num_nets):
        phi[e][1] = h.net_size(e)
    w0 = 0
    start = _pseudo_peripheral(h, rng)
    candidates = {start}
    while candidates and w0 < target0:
        best = None
        best_gain = None
        for v in candidates:
            if w0 + h.vertex_weight[v] > cap0:
                continue
            g = 0
            for e in h.vertex_nets(v):
                if phi[e][1] == 1:
                    g += h.net_weight[e]
                if phi[e][0] == 0:
                    g -= h.net_weight[e]
            if best is None or g > best_gain:
                best, best_gain = v, g
        if best is None:
            break
        candidates.discard(best)
        pi[best] = 0
        w0 += h.vertex_weight[best]
        for e in h.vertex_nets(best):
            phi[e][1] -= 1
            phi[e][0] += 1
        for p in _neighbors(h, best):
            if pi[p] == 1:
                candidates.add(p)
    return pi


ALGORITHMS = {
    "random": random_balanced,
    "bfs": bfs_growing,
    "lp": label_propagation,
    "net": greedy_net_growing,
    "gain": greedy_gain_growing,
}


def flat_bipartition_pool(h, cap0, cap1, seed=0, algorithms=None):
    """Run the pool and return (pi, balanced, stats_by_name)."""
    names = list(algorithms) if algorithms else list(ALGORITHMS)
    stats = {name: AlgorithmStats(name) for name in names}
    best_pi = None
    best_key = None  # (unbalanced flag, objective or imbalance, tiebreak)
    best_objective = math.inf
    caps = (cap0, cap1)
    for trial in range(MAX_RUNS):
        progressed = False
        for name in names:
            st = stats[name]
            if not st.should_run_again(best_objective):
                continue
            progressed = True
            rng = random.Random("%s:%s:%d" % (seed, name, trial))
            pi = ALGORITHMS[name](h, cap0, cap1, rng)
            obj = _cut_weight(h, pi)
            st.record(obj)
            w = _weights(h, pi)
            balanced = w[0] <= caps[0] and w[1] <= caps[1]
            over = max(0.0, w[0] - caps[0]) + max(0.0, w[1] - caps[1])
            key = (0, obj, max(w)) if balanced else (1, over, obj)
            if best_key is None or key < best_key:
                best_key = key
                best_pi = pi
            if balanced:
                best_objective = min(best_objective, obj)
        if not progressed:
            break
    return best_pi, best_key[0] == 0, stats
