"""Parallel n-level coarsening: heavy-edge rating plus a lock-based protocol
that serializes chains of pairwise contractions without global barriers.

Each vertex v has a representative rep[v] (itself while uncontracted) and a
pending counter of registered-but-unfinished contractions onto v.  A thread
that wants to contract v onto u first commits rep[v] = u' for the deepest
finished ancestor u' of u, then performs the contraction once pending[v]
drops to zero; whoever decrements pending[x] to zero inherits responsibility
for the waiting contraction of x.  Cycles are prevented by walking the
representative chain under locks before committing.
"""

from __future__ import annotations

import random
import threading

from .dynamic import APPLIED


class ContractionForest:
    """rep/pending arrays plus per-contraction metadata (pass, time interval)."""

    def __init__(self, num_vertices):
        n = num_vertices
        self.num_vertices = n
        self.rep = list(range(n))
        self.pending = [0] * n
        self.start = [-1] * n
        self.end = [-1] * n
        self.pass_of = [-1] * n
        self.lock = [threading.Lock() for _ in range(n)]

    def roots(self):
        return [v for v in range(self.num_vertices) if self.rep[v] == v]

    def num_roots(self):
        return sum(1 for v in range(self.num_vertices) if self.rep[v] == v)

    def contracted_vertices(self):
        return [v for v in range(self.num_vertices) if self.rep[v] != v]

    def children_map(self):
        children = {}
        for v in range(self.num_vertices):
            if self.rep[v] != v:
                children.setdefault(self.rep[v], []).append(v)
        return children

    def validate(self):
        """Return a list of structural violations (cycles, pending leftovers,
        inverted or overlapping-with-parent intervals)."""
        problems = []
        for v in range(self.num_vertices):
            if self.pending[v]:
                problems.append("vertex %d has pending %d" % (v, self.pending[v]))
        for v in range(self.num_vertices):
            seen = set()
            x = v
            while self.rep[x] != x:
                if x in seen:
                    problems.append("cycle through vertex %d" % v)
                    break
                seen.add(x)
                x = self.rep[x]
        for v in range(self.num_vertices):
            if self.rep[v] != v:
                if not (0 <= self.start[v] < self.end[v]):
                    problems.append("vertex %d has bad interval" % v)
        return problems


class CoarseningResult:
    __slots__ = ("forest", "removal_records", "passes", "applied", "discarded")

    def __init__(self, forest, removal_records, passes, applied, discarded):
        self.forest = forest
        self.removal_records = removal_records
        self.passes = passes
        self.applied = applied
        self.discarded = discarded


class Coarsener:
    def __init__(
        self,
        dynamic,
        k,
        seed=0,
        threads=1,
        coarse_factor=160,
        max_net_size=1000,
        chunk_size=1024,
        probe=None,
    ):
        self.dh = dynamic
        self.forest = ContractionForest(dynamic.num_vertices)
        self.k = k
        self.seed = seed
        self.threads = max(1, threads)
        self.limit = coarse_factor * k
        total = sum(dynamic.vertex_weight)
        self.c_max = total / self.limit
        self.max_net_size = max_net_size
        self.chunk_size = chunk_size
        self.probe = probe
        self._clock = 0
        self._clock_lock = threading.Lock()
        self._pass_idx = -1
        self.applied = 0
        self.discarded = 0
        self._tally_lock = threading.Lock()

    def _tick(self):
        with self._clock_lock:
            self._clock += 1
            return self._clock

    # -- rating ---------------------------------------------------------------

    def rate_neighbors(self, u, rng):
        """Best heavy-edge neighbor of u: r(u, v) = sum w(e) / (|e| - 1) over
        shared nets, skipping oversized nets and weight-infeasible partners.
        Ties break uniformly at random.  Reads are unlocked; stale values are
        re-checked at registration time."""
        dh = self.dh
        scores = {}
        for e in dh.current_incident_nets(u):
            size = dh.pin_size[e]
            if size < 2 or size > self.max_net_size:
                continue
            r = dh.net_weight[e] / (size - 1)
            off = dh.pin_off[e]
            for j in range(size):
                p = dh.pins[off + j]
                if p != u:
                    scores[p] = scores.get(p, 0.0) + r
        if not scores:
            return None
        rep = self.forest.rep
        cu = dh.vertex_weight[u]
        best = None
        best_score = 0.0
        ties = []
        for p, s in scores.items():
            if rep[p] != p or cu + dh.vertex_weight[p] > self.c_max:
                continue
            if best is None or s > best_score:
                best, best_score, ties = p, s, [p]
            elif s == best_score:
                ties.append(p)
        if best is None:
            return None
        if len(ties) > 1:
            return ties[rng.randrange(len(ties))]
        return best

    # -- contraction protocol ---------------------------------------------------

    def register_and_contract(self, u, v):
        """Register the contraction of v onto (an ancestor of) u and perform
        every contraction this thread becomes responsible for.  Returns True
        when v was contracted (possibly by deferred execution), False when the
        pair was discarded (cycle, lost race, or weight overflow)."""
        forest = self.forest
        rep = forest.rep
        pending = forest.pending
        locks = forest.lock
        dh = self.dh
        probe = self.probe

        locks[v].acquire()
        if rep[v] != v:
            locks[v].release()
            return False
        target = None
        while True:
            # walk up to the deepest ancestor that is unfinished or busy
            while rep[u] != u and pending[u] == 0:
                u = rep[u]
                if u == v:
                    locks[v].release()
                    return False
            if v < u:
                locks[u].acquire()
            else:
                locks[v].release()
                locks[u].acquire()
                locks[v].acquire()
                if rep[v] != v:
                    locks[u].release()
                    locks[v].release()
                    return False
            if rep[u] == u or pending[u] > 0:
                # re-walk to the root under locks to rule out a cycle
                x = u
                cycle = False
                while rep[x] != x:
                    x = rep[x]
                    if x == v:
                        cycle = True
                        break
                if cycle:
                    locks[u].release()
                    locks[v].release()
                    return False
                # reserve v's weight on u; reject oversized aggregates here so
                # a committed registration is never rolled back
                with dh.vertex_lock[u]:
                    if dh.vertex_weight[u] + dh.vertex_weight[v] > self.c_max:
                        locks[u].release()
                        locks[v].release()
                        with self._tally_lock:
                            self.discarded += 1
                        return False
                    dh.vertex_weight[u] += dh.vertex_weight[v]
                rep[v] = u
                pending[u] += 1
                target = u
                locks[u].release()
                locks[v].release()
                if probe:
                    probe("registered", u, v)
                break
            locks[u].release()

        u = target
        # contraction phase: execute (u, v) when v has no pending children,
        # otherwise responsibility transfers to whoever finishes the last one
        while u != v:
            with locks[v]:
                busy = pending[v] > 0
            if busy:
                if probe:
                    probe("transferred", u, v)
                return True
            if probe:
                probe("before_contract", u, v)
            forest.start[v] = self._tick()
            status = dh.contract(u, v, weight_reserved=True)
            if status != APPLIED:
                raise AssertionError("reserved contraction rejected")
            forest.end[v] = self._tick()
            forest.pass_of[v] = self._pass_idx
            with self._tally_lock:
                self.applied += 1
            if probe:
                probe("after_contract", u, v)
            with locks[u]:
                pending[u] -= 1
                v = u
                u = rep[u]
        return True

    # -- passes ---------------------------------------------------------------

    def run_pass(self, pass_idx):
        """One coarsening pass over all current roots in random order.
        Returns the number of applied contractions."""
        self._pass_idx = pass_idx
        forest = self.forest
        order = forest.roots()
        rng = random.Random("%s:pass:%d" % (self.seed, pass_idx))
        rng.shuffle(order)
        chunks = [
            order[i:i + self.chunk_size] for i in range(0, len(order), self.chunk_size)
        ]
        cursor = [0]
        cursor_lock = threading.Lock()
        before = self.applied

        def worker(tid):
            trng = random.Random("%s:pass:%d:worker:%d" % (self.seed, pass_idx, tid))
            while True:
                with cursor_lock:
                    i = cursor[0]
                    if i >= len(chunks):
                        return
                    cursor[0] = i + 1
                for u in chunks[i]:
                    if forest.rep[u] != u:
                        continue
                    v = self.rate_neighbors(u, trng)
                    if v is None or v == u:
                        continue
                    self.register_and_contract(u, v)

        if self.threads == 1:
            worker(0)
        else:
            ts = [
                threading.Thread(target=worker, args=(tid,), daemon=True)
                for tid in range(self.threads)
            ]
            for th in ts:
                th.start()
            for th in ts:
                th.join()
        return self.applied - before

    def coarsen(self):
        """Run passes until the vertex count reaches the contraction limit or
        a pass makes no progress; remove identical and single-pin nets after
        every productive pass."""
        records = []
        pass_idx = 0
        while self.forest.num_roots() > self.limit:
            made = self.run_pass(pass_idx)
            if made == 0:
                break
            records.append(self.dh.remove_identical_and_single_pin_nets())
            pass_idx += 1
        return CoarseningResult(self.forest, records, pass_idx, self.applied, self.discarded)
