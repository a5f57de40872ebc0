"""Mutable hypergraph supporting concurrent contraction and batched uncontraction.

Incident nets of all vertices live in one shared adjacency array.  Each entry
carries a marker and each vertex v a counter t[v]; an entry is active iff its
marker >= t[v] is maintained implicitly by keeping the first inc_active[v]
entries active and the rest sorted by non-increasing marker, so a removal is
undone in LIFO order simply by decrementing t[v] and re-extending the active
prefix.  Pin lists keep an active prefix per net; removed pins are parked in
the inactive suffix, which doubles as undo storage for uncontraction.

Every representative vertex u owns a member list L_u (a doubly linked list
threaded through next/prev arrays) holding the vertices whose incident-net
sub-arrays together form I(u).  Contracting v onto u appends L_v to L_u and
remembers the old tail of L_v so uncontraction can splice L_v back out.

Invariant used throughout: for every representative u and every active net e
of I(u), the active pin list of e contains exactly one vertex of L_u, and that
vertex is u itself.
"""

from __future__ import annotations

import threading

APPLIED = "applied"
WEIGHT_REJECTED = "weight_rejected"


class RemovalRecord:
    """Undo information for one round of identical / single-pin net removal."""

    __slots__ = ("deactivated", "survivor_weights")

    def __init__(self):
        self.deactivated = []
        self.survivor_weights = {}

    def __bool__(self):
        return bool(self.deactivated)


class DynamicHypergraph:
    def __init__(self, hypergraph):
        h = hypergraph
        n = h.num_vertices
        m = h.num_nets
        self.num_vertices = n
        self.num_nets = m
        self.vertex_weight = list(h.vertex_weight)
        self.net_weight = list(h.net_weight)

        # incident-net adjacency array with markers
        self.inc_off = list(h.incidence_offsets)
        self.inc_nets = list(h.incident_nets)
        self.inc_marker = [0] * len(self.inc_nets)
        self.t = [0] * n
        self.inc_active = [self.inc_off[v + 1] - self.inc_off[v] for v in range(n)]

        # pin lists with active prefix
        self.pin_off = list(h.pin_offsets)
        self.pins = list(h.pins)
        self.pin_size = [self.pin_off[e + 1] - self.pin_off[e] for e in range(m)]
        self.net_active = [True] * m

        # member lists
        self.nxt = [-1] * n
        self.prv = [-1] * n
        self.tail = list(range(n))
        self.saved_tail = [-1] * n
        self.did_remove = [False] * n

        self.net_lock = [threading.Lock() for _ in range(m)]
        self.vertex_lock = [threading.Lock() for _ in range(n)]

        # batched restore machinery (armed by sort_inactive_pins_by_batch)
        self.restore_groups = None
        self.restore_ptr = None
        self.restore_bit = [False] * m
        self.raise_base = [0] * m
        self._batch = -1
        self._touched = []
        self._touch_lock = threading.Lock()

    # -- iteration ----------------------------------------------------------

    def members(self, v):
        """Yield the member list starting at v (L_v if v is a representative,
        or the spliced-out sublist right after an uncontraction)."""
        w = v
        while w != -1:
            yield w
            w = self.nxt[w]

    def current_incident_nets(self, u):
        """Yield each net of I(u) exactly once (active nets only)."""
        for w in self.members(u):
            base = self.inc_off[w]
            for i in range(self.inc_active[w]):
                e = self.inc_nets[base + i]
                if self.net_active[e]:
                    yield e

    def active_pins(self, e):
        off = self.pin_off[e]
        return self.pins[off:off + self.pin_size[e]]

    def net_capacity(self, e):
        return self.pin_off[e + 1] - self.pin_off[e]

    # -- contraction ---------------------------------------------------------

    def contract(self, u, v, c_max=None, weight_reserved=False):
        """Contract vertex v onto representative u.

        Returns WEIGHT_REJECTED without mutation when c(u) + c(v) would exceed
        c_max; otherwise applies the contraction and returns APPLIED.  With
        weight_reserved the caller already accounted c(v) into c(u).
        """
        if not weight_reserved:
            with self.vertex_lock[u]:
                if c_max is not None and self.vertex_weight[u] + self.vertex_weight[v] > c_max:
                    return WEIGHT_REJECTED
                self.vertex_weight[u] += self.vertex_weight[v]

        marked = set()
        for w in self.members(v):
            base = self.inc_off[w]
            for i in range(self.inc_active[w]):
                e = self.inc_nets[base + i]
                if not self.net_active[e]:
                    continue
                with self.net_lock[e]:
                    off = self.pin_off[e]
                    size = self.pin_size[e]
                    upos = -1
                    vpos = -1
                    for j in range(size):
                        p = self.pins[off + j]
                        if p == u:
                            upos = j
                        elif p == v:
                            vpos = j
                    if vpos < 0:
                        raise AssertionError("pin %d missing from net %d" % (v, e))
                    if upos >= 0:
                        # both endpoints present: drop v's pin to the suffix
                        last = size - 1
                        self.pins[off + vpos] = self.pins[off + last]
                        self.pins[off + last] = v
                        self.pin_size[e] = last
                        marked.add(e)
                    else:
                        self.pins[off + vpos] = u

        if marked:
            self.did_remove[v] = True
            for w in self.members(v):
                self._remove_marked_entries(w, marked)

        with self.vertex_lock[u]:
            lv_tail = self.tail[v]
            self.saved_tail[v] = lv_tail
            lu_tail = self.tail[u]
            self.nxt[lu_tail] = v
            self.prv[v] = lu_tail
            self.tail[u] = lv_tail
        return APPLIED

    def _remove_marked_entries(self, w, marked):
        """One removal round on I_w: bump t[w], park marked entries behind the
        active prefix with marker t[w]-1, stamp kept entries with t[w]."""
        self.t[w] += 1
        tw = self.t[w]
        base = self.inc_off[w]
        active = self.inc_active[w]
        i = 0
        while i < active:
            e = self.inc_nets[base + i]
            if e in marked:
                active -= 1
                self.inc_nets[base + i] = self.inc_nets[base + active]
                self.inc_nets[base + active] = e
                self.inc_marker[base + active] = tw - 1
            else:
                self.inc_marker[base + i] = tw
                i += 1
        self.inc_active[w] = active

    # -- uncontraction -------------------------------------------------------

    def uncontract(self, u, v, hooks=None):
        """Revert the contraction of v onto u.

        hooks, when given, must provide on_assign(u, v), on_replace(e, u, v)
        and on_restore(e, u, v, accounted_end); the per-net callbacks run
        inside the net's lock, immediately after the pin-list edit.
        """
        if hooks is not None:
            hooks.on_assign(u, v)

        tail_v = self.saved_tail[v]
        with self.vertex_lock[u]:
            before = self.prv[v]
            after = self.nxt[tail_v]
            self.nxt[before] = after
            if after != -1:
                self.prv[after] = before
            if self.tail[u] == tail_v:
                self.tail[u] = before
            self.nxt[tail_v] = -1
            self.prv[v] = -1
            self.tail[v] = tail_v

        removed = self.did_remove[v]
        for w in self.members(v):
            base = self.inc_off[w]
            if removed:
                self.t[w] -= 1
            tw = self.t[w]
            old_active = self.inc_active[w]
            for i in range(old_active):
                e = self.inc_nets[base + i]
                if self.net_active[e]:
                    self._replace_pin(e, u, v, hooks)
            if removed:
                cap = self.inc_off[w + 1] - base
                j = old_active
                while j < cap and self.inc_marker[base + j] == tw:
                    e = self.inc_nets[base + j]
                    if self.net_active[e]:
                        self._restore_pin(e, u, v, hooks)
                    j += 1
                self.inc_active[w] = j

        with self.vertex_lock[u]:
            self.vertex_weight[u] -= self.vertex_weight[v]

    def _replace_pin(self, e, u, v, hooks):
        with self.net_lock[e]:
            off = self.pin_off[e]
            for j in range(self.pin_size[e]):
                if self.pins[off + j] == u:
                    self.pins[off + j] = v
                    break
            else:
                raise AssertionError("occupant %d missing from net %d" % (u, e))
            if hooks is not None:
                hooks.on_replace(e, u, v)

    def _restore_pin(self, e, u, v, hooks):
        with self.net_lock[e]:
            off = self.pin_off[e]
            if self.restore_groups is not None:
                # batched mode: the first restorer of e in this batch raises
                # the active size once for all pins restored by the batch
                if not self.restore_bit[e]:
                    self.restore_bit[e] = True
                    base = self.pin_size[e]
                    self.raise_base[e] = base
                    batch, count = self.restore_groups[e][self.restore_ptr[e]]
                    if batch != self._batch:
                        raise AssertionError(
                            "net %d expects restores for batch %d in batch %d"
                            % (e, batch, self._batch)
                        )
                    self.restore_ptr[e] += 1
                    self.pin_size[e] = base + count
                    with self._touch_lock:
                        self._touched.append(e)
                accounted_end = self.raise_base[e]
            else:
                # sequential mode: pull v out of the suffix individually
                size = self.pin_size[e]
                cap = self.pin_off[e + 1] - off
                for j in range(size, cap):
                    if self.pins[off + j] == v:
                        self.pins[off + j] = self.pins[off + size]
                        self.pins[off + size] = v
                        break
                else:
                    raise AssertionError("pin %d missing from suffix of net %d" % (v, e))
                self.pin_size[e] = size + 1
                accounted_end = size
            if hooks is not None:
                hooks.on_restore(e, u, v, accounted_end)

    # -- batched restore plumbing ---------------------------------------------

    def sort_inactive_pins_by_batch(self, batch_index):
        """Order every inactive pin suffix by the restoring batch.

        Pins restored by the first processed batch end up adjacent to the
        active prefix, followed by the next batch and so on, so each batch can
        re-activate its pins by raising the active size once per net.
        """
        groups = [[] for _ in range(self.num_nets)]
        for e in range(self.num_nets):
            off = self.pin_off[e]
            size = self.pin_size[e]
            cap = self.pin_off[e + 1] - off
            if size == cap:
                continue
            suffix = self.pins[off + size:off + cap]
            suffix.sort(key=lambda p: batch_index[p])
            self.pins[off + size:off + cap] = suffix
            grouped = groups[e]
            for p in suffix:
                b = batch_index[p]
                if grouped and grouped[-1][0] == b:
                    grouped[-1][1] += 1
                else:
                    grouped.append([b, 1])
        self.restore_groups = groups
        self.restore_ptr = [0] * self.num_nets

    def begin_batch(self, batch):
        self._batch = batch
        self._touched = []

    def end_batch(self):
        for e in self._touched:
            self.restore_bit[e] = False
            self.raise_base[e] = 0
        self._touched = []
        self._batch = -1

    # -- net removal -----------------------------------------------------------

    def remove_identical_and_single_pin_nets(self):
        """Deactivate single-pin nets and all-but-one of each identical group.

        The surviving net of an identical group (the lowest id) aggregates the
        weights of the removed ones.  Returns an undo record.
        """
        record = RemovalRecord()
        by_pins = {}
        for e in range(self.num_nets):
            if not self.net_active[e]:
                continue
            size = self.pin_size[e]
            if size == 1:
                self.net_active[e] = False
                record.deactivated.append(e)
                continue
            off = self.pin_off[e]
            key = tuple(sorted(self.pins[off:off + size]))
            by_pins.setdefault(key, []).append(e)
        for group in by_pins.values():
            if len(group) < 2:
                continue
            survivor = group[0]
            record.survivor_weights[survivor] = self.net_weight[survivor]
            for e in group[1:]:
                self.net_weight[survivor] += self.net_weight[e]
                self.net_active[e] = False
                record.deactivated.append(e)
        return record

    def restore_nets(self, record):
        """Undo one removal round (weights first, then reactivation)."""
        for survivor, weight in record.survivor_weights.items():
            self.net_weight[survivor] = weight
        for e in record.deactivated:
            self.net_active[e] = True

    # -- debugging ---------------------------------------------------------------

    def snapshot(self):
        """Active structure as plain sets, for oracle comparison and goldens."""
        nets = {
            e: frozenset(self.active_pins(e))
            for e in range(self.num_nets)
            if self.net_active[e]
        }
        return {
            "nets": nets,
            "net_weight": {e: self.net_weight[e] for e in nets},
        }

    def debug_dump(self):
        lines = []
        for e in range(self.num_nets):
            tag = "" if self.net_active[e] else " (inactive)"
            lines.append(
                "net %d w=%d pins=%s%s"
                % (e, self.net_weight[e], sorted(self.active_pins(e)), tag)
            )
        return "\n".join(lines)
