"""Shared test utilities: random instance generators, a set-semantics oracle
for contraction, and a reference driver for schedule-based uncontraction."""

from __future__ import annotations

import random

from hgpart.batches import construct_batches
from hgpart.coarsen import ContractionForest
from hgpart.core import StaticHypergraph
from hgpart.dynamic import DynamicHypergraph


def h0():
    """Tiny fixture: e0={0,1}, e1={0,1,2}, e2={2,3}."""
    return StaticHypergraph(4, [[0, 1], [0, 1, 2], [2, 3]])


def random_hypergraph(rng, max_vertices=40, max_nets=80, max_net_size=6,
                      weighted=False):
    n = rng.randint(2, max_vertices)
    m = rng.randint(1, max_nets)
    nets = []
    for _ in range(m):
        size = rng.randint(1, min(max_net_size, n))
        nets.append(rng.sample(range(n), size))
    vw = [rng.randint(1, 4) for _ in range(n)] if weighted else None
    nw = [rng.randint(1, 5) for _ in range(m)] if weighted else None
    return StaticHypergraph(n, nets, vw, nw)


class OracleHypergraph:
    """Straightforward set-semantics model of contraction and net removal."""

    def __init__(self, h):
        self.nets = {e: set(h.net_pins(e)) for e in range(h.num_nets)}
        self.net_weight = list(h.net_weight)
        self.vertex_weight = list(h.vertex_weight)

    def contract(self, u, v):
        self.vertex_weight[u] += self.vertex_weight[v]
        for pins in self.nets.values():
            if v in pins:
                pins.discard(v)
                pins.add(u)

    def remove_identical_and_single_pin_nets(self):
        by_key = {}
        for e in sorted(self.nets):
            pins = self.nets[e]
            if len(pins) == 1:
                del self.nets[e]
                continue
            by_key.setdefault(frozenset(pins), []).append(e)
        for group in by_key.values():
            survivor = group[0]
            for e in group[1:]:
                self.net_weight[survivor] += self.net_weight[e]
                del self.nets[e]

    def snapshot(self):
        return {
            "nets": {e: frozenset(p) for e, p in self.nets.items()},
            "net_weight": {e: self.net_weight[e] for e in self.nets},
        }


class ContractionDriver:
    """Drives a dynamic hypergraph and forest through random contractions and
    schedule-based uncontraction, for round-trip and oracle tests."""

    def __init__(self, h):
        self.h = h
        self.dh = DynamicHypergraph(h)
        self.forest = ContractionForest(h.num_vertices)
        self.records = []
        self._clock = 0

    def contract(self, u, v, pass_idx=0):
        f = self.forest
        assert f.rep[u] == u and f.rep[v] == v and u != v
        f.rep[v] = u
        self._clock += 1
        f.start[v] = self._clock
        self.dh.contract(u, v)
        self._clock += 1
        f.end[v] = self._clock
        f.pass_of[v] = pass_idx

    def random_pass(self, rng, pass_idx, fraction=0.5):
        roots = self.forest.roots()
        rng.shuffle(roots)
        target = max(1, int(len(roots) * fraction))
        done = 0
        while done < target:
            roots = [v for v in roots if self.forest.rep[v] == v]
            if len(roots) < 2:
                break
            v = rng.choice(roots)
            u = rng.choice([x for x in roots if x != v])
            self.contract(u, v, pass_idx)
            done += 1
        return done

    def remove_nets(self):
        self.records.append(self.dh.remove_identical_and_single_pin_nets())

    def uncontract_all(self, b_max, threads=1, hooks=None):
        """Undo everything via a constructed schedule; returns the schedule."""
        schedule = construct_batches(self.forest, b_max, threads)
        self.dh.sort_inactive_pins_by_batch(schedule.batch_index)
        current_pass = None
        for bi, batch in enumerate(schedule.batches):
            p = schedule.pass_of_batch[bi]
            if p != current_pass:
                if p < len(self.records):
                    self.dh.restore_nets(self.records[p])
                current_pass = p
            self.dh.begin_batch(bi)
            for v in batch:
                self.dh.uncontract(self.forest.rep[v], v, hooks=hooks)
            self.dh.end_batch()
        return schedule


def assert_dynamic_matches_static(dh, h):
    """The dynamic structure is exactly the original static hypergraph."""
    snap = dh.snapshot()
    assert set(snap["nets"]) == set(range(h.num_nets))
    for e in range(h.num_nets):
        assert snap["nets"][e] == frozenset(h.net_pins(e)), "net %d pins differ" % e
        assert dh.net_weight[e] == h.net_weight[e]
    assert dh.vertex_weight == h.vertex_weight
    for v in range(h.num_vertices):
        assert dh.t[v] == 0, "vertex %d counter not rewound" % v
        assert dh.inc_active[v] == h.degree(v)
        assert dh.nxt[v] == -1 and dh.prv[v] == -1
        base = dh.inc_off[v]
        assert set(dh.inc_nets[base:base + dh.inc_active[v]]) == set(h.vertex_nets(v))
