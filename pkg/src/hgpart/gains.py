"""k-way partition state over a dynamic hypergraph, with a gain table that
stays exact through both vertex moves and batched uncontractions.

For every live vertex u the table keeps
    b(u)    = w({e in I(u) : phi(e, pi(u)) = 1})
    p(u, i) = w({e in I(u) : phi(e, i) >= 1})
    wI(u)   = w(I(u))
so the move gain is g(u, i) = b(u) - wI(u) + p(u, i).

Moves recompute their exact gain under the locks of all incident nets before
applying, so an applied move always changes the objective by exactly the
returned amount.  Uncontraction updates follow the two cases of the pin-list
edit: a replaced occupant hands its share of the table to the restored
vertex, while a newly re-activated pin adds its own share and, when its block
count reaches two, strips the single-block credit from the previous holder.
"""

from __future__ import annotations

import threading

_N_STRIPES = 64


class MoveRecord:
    __slots__ = ("vertex", "source", "target", "gain", "prefix_objective")

    def __init__(self, vertex, source, target, gain, prefix_objective=None):
        self.vertex = vertex
        self.source = source
        self.target = target
        self.gain = gain
        self.prefix_objective = prefix_objective

    def __repr__(self):
        return "MoveRecord(v=%d, %d->%d, gain=%d)" % (
            self.vertex,
            self.source,
            self.target,
            self.gain,
        )


class KWayState:
    def __init__(self, dynamic, k, max_block_weights, total_weight):
        self.dh = dynamic
        self.k = k
        n = dynamic.num_vertices
        m = dynamic.num_nets
        self.max_block_weight = list(max_block_weights)
        self.total_weight = total_weight
        self.pi = [-1] * n
        self.phi = [[0] * k for _ in range(m)]
        self.lam = [0] * m
        self.block_weight = [0] * k
        self.b = [0] * n
        self.p = [[0] * k for _ in range(n)]
        self.wI = [0] * n
        self.objective = 0
        self.alive = []
        self._alive_set = set()
        self._bw_lock = threading.Lock()
        self._stripes = [threading.Lock() for _ in range(_N_STRIPES)]

    def _stripe(self, v):
        return self._stripes[v & (_N_STRIPES - 1)]

    # -- construction -----------------------------------------------------------

    def assign_roots(self, roots, blocks):
        for v, blk in zip(roots, blocks):
            self.pi[v] = blk
        self.alive = list(roots)
        self._alive_set = set(roots)
        self.rebuild()

    def rebuild(self):
        """Recompute every derived quantity from pi and the active structure."""
        dh = self.dh
        k = self.k
        for e in range(dh.num_nets):
            row = self.phi[e]
            for i in range(k):
                row[i] = 0
        self.lam = [0] * dh.num_nets
        self.block_weight = [0] * k
        self.objective = 0
        for v in self.alive:
            self.b[v] = 0
            self.wI[v] = 0
            row = self.p[v]
            for i in range(k):
                row[i] = 0
            self.block_weight[self.pi[v]] += dh.vertex_weight[v]
        for e in range(dh.num_nets):
            if not dh.net_active[e]:
                continue
            row = self.phi[e]
            pins = dh.active_pins(e)
            for pin in pins:
                row[self.pi[pin]] += 1
            lam = sum(1 for c in row if c > 0)
            self.lam[e] = lam
            w = dh.net_weight[e]
            if lam > 1:
                self.objective += (lam - 1) * w
            for pin in pins:
                self.wI[pin] += w
                if row[self.pi[pin]] == 1:
                    self.b[pin] += w
                prow = self.p[pin]
                for i in range(self.k):
                    if row[i] > 0:
                        prow[i] += w

    def reference_tables(self):
        """Scratch recomputation of (b, p, wI, phi, lam, objective, weights)
        for auditing the incremental bookkeeping."""
        dh = self.dh
        k = self.k
        phi = [[0] * k for _ in range(dh.num_nets)]
        lam = [0] * dh.num_nets
        bw = [0] * k
        b = {}
        p = {}
        wI = {}
        obj = 0
        for v in self.alive:
            b[v] = 0
            p[v] = [0] * k
            wI[v] = 0
            bw[self.pi[v]] += dh.vertex_weight[v]
        for e in range(dh.num_nets):
            if not dh.net_active[e]:
                continue
            pins = dh.active_pins(e)
            row = phi[e]
            for pin in pins:
                row[self.pi[pin]] += 1
            lam[e] = sum(1 for c in row if c > 0)
            w = dh.net_weight[e]
            if lam[e] > 1:
                obj += (lam[e] - 1) * w
            for pin in pins:
                wI[pin] += w
                if row[self.pi[pin]] == 1:
                    b[pin] += w
                prow = p[pin]
                for i in range(k):
                    if row[i] > 0:
                        prow[i] += w
        return {"phi": phi, "lam": lam, "block_weight": bw, "b": b, "p": p,
                "wI": wI, "objective": obj}

    def audit(self):
        """Return a list of disagreements between cached and scratch values."""
        ref = self.reference_tables()
        problems = []
        if ref["block_weight"] != self.block_weight:
            problems.append("block weights stale")
        if ref["objective"] != self.objective:
            problems.append(
                "objective stale (cached %d, actual %d)" % (self.objective, ref["objective"])
            )
        for e in range(self.dh.num_nets):
            if self.dh.net_active[e]:
                if ref["phi"][e] != self.phi[e]:
                    problems.append("phi stale for net %d" % e)
                if ref["lam"][e] != self.lam[e]:
                    problems.append("lambda stale for net %d" % e)
        for v in self.alive:
            if ref["b"][v] != self.b[v]:
                problems.append("b stale for vertex %d (%d vs %d)" % (v, self.b[v], ref["b"][v]))
            if ref["p"][v] != self.p[v]:
                problems.append("p stale for vertex %d" % v)
            if ref["wI"][v] != self.wI[v]:
                problems.append("wI stale for vertex %d" % v)
        return problems

    # -- queries ---------------------------------------------------------------

    def table_gain(self, u, target):
        return self.b[u] - self.wI[u] + self.p[u][target]

    def best_target(self, u, rng=None):
        """Best non-current block by table gain; weight-feasible only.
        Returns (block, gain) or None."""
        src = self.pi[u]
        base = self.b[u] - self.wI[u]
        cu = self.dh.vertex_weight[u]
        prow = self.p[u]
        best = None
        best_gain = None
        for i in range(self.k):
            if i == src:
                continue
            if self.block_weight[i] + cu > self.max_block_weight[i]:
                continue
            g = base + prow[i]
            if best is None or g > best_gain:
                best, best_gain = i, g
        if best is None:
            return None
        return best, best_gain

    def is_boundary(self, u):
        for e in self.dh.current_incident_nets(u):
            if self.lam[e] > 1:
                return True
        return False

    def is_balanced(self):
        return all(
            w <= cap for w, cap in zip(self.block_weight, self.max_block_weight)
        )

    def imbalance(self):
        if self.total_weight == 0:
            return 0.0
        return max(self.block_weight) * self.k / self.total_weight - 1.0

    # -- moves -----------------------------------------------------------------

    def try_move(self, u, target, require_positive=False, enforce_balance=True):
        """Move u to target if feasible.  The gain is recomputed exactly under
        the locks of all nets of I(u); returns the gain or None if rejected."""
        src = self.pi[u]
        if target == src or not (0 <= target < self.k):
            return None
        dh = self.dh
        nets = sorted(dh.current_incident_nets(u))
        for e in nets:
            dh.net_lock[e].acquire()
        try:
            g = 0
            for e in nets:
                w = dh.net_weight[e]
                row = self.phi[e]
                if row[src] == 1:
                    g += w
                if row[target] == 0:
                    g -= w
            if require_positive and g <= 0:
                return None
            cu = dh.vertex_weight[u]
            with self._bw_lock:
                if enforce_balance and (
                    self.block_weight[target] + cu > self.max_block_weight[target]
                ):
                    return None
                self.block_weight[target] += cu
                self.block_weight[src] -= cu
                self.objective -= g
            self._apply_move_updates(u, src, target, nets)
            return g
        finally:
            for e in reversed(nets):
                dh.net_lock[e].release()

    def _apply_move_updates(self, u, src, target, nets):
        dh = self.dh
        self.pi[u] = target
        new_b_u = 0
        for e in nets:
            w = dh.net_weight[e]
            row = self.phi[e]
            off = dh.pin_off[e]
            size = dh.pin_size[e]
            src_after = row[src] - 1
            tgt_after = row[target] + 1
            row[src] = src_after
            row[target] = tgt_after
            if src_after == 0:
                self.lam[e] -= 1
                for j in range(size):
                    pin = dh.pins[off + j]
                    with self._stripe(pin):
                        self.p[pin][src] -= w
            elif src_after == 1:
                # the remaining src pin regains single-block credit
                for j in range(size):
                    pin = dh.pins[off + j]
                    if self.pi[pin] == src:
                        with self._stripe(pin):
                            self.b[pin] += w
                        break
            if tgt_after == 1:
                self.lam[e] += 1
                for j in range(size):
                    pin = dh.pins[off + j]
                    with self._stripe(pin):
                        self.p[pin][target] += w
                new_b_u += w
            elif tgt_after == 2:
                # the previously lone target pin loses its credit
                for j in range(size):
                    pin = dh.pins[off + j]
                    if pin != u and self.pi[pin] == target:
                        with self._stripe(pin):
                            self.b[pin] -= w
                        break
        with self._stripe(u):
            self.b[u] = new_b_u

    # -- uncontraction hooks ------------------------------------------------------

    def on_assign(self, u, v):
        self.pi[v] = self.pi[u]
        with self._bw_lock:
            self.alive.append(v)
            self._alive_set.add(v)

    def on_replace(self, e, u, v):
        """v takes over u's slot in net e: u leaves e, so u's table share for
        e migrates to v.  Runs under the lock of net e."""
        w = self.dh.net_weight[e]
        row = self.phi[e]
        prow_u = self.p[u]
        prow_v = self.p[v]
        with self._stripe(u):
            for i in range(self.k):
                if row[i] > 0:
                    prow_u[i] -= w
            self.wI[u] -= w
            if row[self.pi[u]] == 1:
                self.b[u] -= w
                moved_b = True
            else:
                moved_b = False
        for i in range(self.k):
            if row[i] > 0:
                prow_v[i] += w
        self.wI[v] += w
        if moved_b:
            self.b[v] += w

    def on_restore(self, e, u, v, accounted_end):
        """v's pin becomes active again in net e (u keeps its own pin).  Runs
        under the lock of net e; accounted_end bounds the slots whose table
        contributions are already counted in phi."""
        dh = self.dh
        w = dh.net_weight[e]
        blk = self.pi[v]
        row = self.phi[e]
        row[blk] += 1
        if row[blk] == 2:
            # the single accounted pin of this block loses its credit; it sits
            # in the accounted region (u itself, or whoever replaced u there)
            off = dh.pin_off[e]
            holder = None
            for j in range(accounted_end):
                pin = dh.pins[off + j]
                if self.pi[pin] == blk:
                    holder = pin
                    break
            if holder is None:
                raise AssertionError("no credit holder for net %d block %d" % (e, blk))
            with self._stripe(holder):
                self.b[holder] -= w
        prow_v = self.p[v]
        for i in range(self.k):
            if row[i] > 0:
                prow_v[i] += w
        self.wI[v] += w
