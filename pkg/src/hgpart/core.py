"""Static hypergraph model, hMetis file IO, and partition quality measures.

A hypergraph is a set of vertices plus a set of nets (hyperedges), where each
net is a non-empty set of vertices (its pins).  Both vertices and nets carry
positive integer weights.  A k-way partition assigns every vertex a block in
[0, k); its quality is the connectivity objective
    (lambda - 1)(Pi) = sum over nets e of (lambda(e) - 1) * weight(e)
where lambda(e) is the number of distinct blocks among the pins of e.
"""

from __future__ import annotations

import math


def balance_cap(total_weight, k, epsilon):
    """Maximum allowed block weight for a k-way partition.

    (1 + epsilon) * total / k, raised to ceil(total / k) when that is larger
    so a perfectly even split of unit-weight vertices is always feasible.
    """
    return max((1.0 + epsilon) * total_weight / k, float(math.ceil(total_weight / k)))


class HypergraphError(ValueError):
    """Raised for malformed hypergraph inputs or files."""


class StaticHypergraph:
    """Immutable hypergraph in CSR form (pin lists plus incident-net lists).

    Vertices and nets are identified by dense 0-based integer ids.
    """

    __slots__ = (
        "num_vertices",
        "num_nets",
        "pin_offsets",
        "pins",
        "incidence_offsets",
        "incident_nets",
        "vertex_weight",
        "net_weight",
        "total_vertex_weight",
    )

    def __init__(self, num_vertices, pin_lists, vertex_weights=None, net_weights=None):
        m = len(pin_lists)
        if vertex_weights is None:
            vertex_weights = [1] * num_vertices
        if net_weights is None:
            net_weights = [1] * m
        if len(vertex_weights) != num_vertices:
            raise HypergraphError("vertex weight list has wrong length")
        if len(net_weights) != m:
            raise HypergraphError("net weight list has wrong length")
        for w in vertex_weights:
            if not isinstance(w, int) or w <= 0:
                raise HypergraphError("vertex weights must be positive integers")
        for w in net_weights:
            if not isinstance(w, int) or w <= 0:
                raise HypergraphError("net weights must be positive integers")

        self.num_vertices = num_vertices
        self.num_nets = m
        self.vertex_weight = list(vertex_weights)
        self.net_weight = list(net_weights)
        self.total_vertex_weight = sum(vertex_weights)

        pin_offsets = [0] * (m + 1)
        pins = []
        degree = [0] * num_vertices
        for e, pl in enumerate(pin_lists):
            if len(pl) == 0:
                raise HypergraphError("net %d has no pins" % e)
            seen = set()
            for v in pl:
                if not (0 <= v < num_vertices):
                    raise HypergraphError("net %d has out-of-range pin %r" % (e, v))
                if v in seen:
                    raise HypergraphError("net %d has duplicate pin %d" % (e, v))
                seen.add(v)
                pins.append(v)
                degree[v] += 1
            pin_offsets[e + 1] = len(pins)
        self.pin_offsets = pin_offsets
        self.pins = pins

        inc_off = [0] * (num_vertices + 1)
        for v in range(num_vertices):
            inc_off[v + 1] = inc_off[v] + degree[v]
        cursor = list(inc_off[:num_vertices])
        incident = [0] * len(pins)
        for e in range(m):
            for i in range(pin_offsets[e], pin_offsets[e + 1]):
                v = pins[i]
                incident[cursor[v]] = e
                cursor[v] += 1
        self.incidence_offsets = inc_off
        self.incident_nets = incident

    # -- accessors ---------------------------------------------------------

    def net_pins(self, e):
        return self.pins[self.pin_offsets[e]:self.pin_offsets[e + 1]]

    def net_size(self, e):
        return self.pin_offsets[e + 1] - self.pin_offsets[e]

    def vertex_nets(self, v):
        return self.incident_nets[self.incidence_offsets[v]:self.incidence_offsets[v + 1]]

    def degree(self, v):
        return self.incidence_offsets[v + 1] - self.incidence_offsets[v]

    @property
    def num_pins(self):
        return len(self.pins)

    def pin_lists(self):
        return [self.net_pins(e) for e in range(self.num_nets)]

    def structurally_equal(self, other):
        """True if both hypergraphs have the same pin sets and weights."""
        if self.num_vertices != other.num_vertices or self.num_nets != other.num_nets:
            return False
        if self.vertex_weight != other.vertex_weight or self.net_weight != other.net_weight:
            return False
        for e in range(self.num_nets):
            if set(self.net_pins(e)) != set(other.net_pins(e)):
                return False
        return True

    def validate(self):
        """Re-derive cross-structure consistency; raises HypergraphError on failure."""
        if self.pin_offsets[0] != 0 or self.pin_offsets[-1] != len(self.pins):
            raise HypergraphError("pin offsets inconsistent")
        rebuilt = StaticHypergraph(
            self.num_vertices, self.pin_lists(), self.vertex_weight, self.net_weight
        )
        if rebuilt.incident_nets != self.incident_nets:
            raise HypergraphError("incidence structure inconsistent with pin lists")


# -- hMetis file format ------------------------------------------------------


def load_hmetis(path, dedup_pins=False):
    """Read a hypergraph in hMetis format.

    The header line holds ``num_nets num_vertices [fmt]`` where fmt 1 marks
    net weights (leading integer on each net line), fmt 10 marks vertex
    weights (one trailing line per vertex) and fmt 11 marks both.  Pins are
    1-based.  Lines starting with '%' are comments.  Duplicate pins within a
    net raise an error unless dedup_pins is set.
    """
    with open(path, "r") as f:
        lines = [ln.strip() for ln in f]
    rows = [ln for ln in lines if ln and not ln.startswith("%")]
    if not rows:
        raise HypergraphError("%s: empty hypergraph file" % path)
    header = rows[0].split()
    if len(header) not in (2, 3):
        raise HypergraphError("%s: malformed header %r" % (path, rows[0]))
    try:
        num_nets, num_vertices = int(header[0]), int(header[1])
        fmt = int(header[2]) if len(header) == 3 else 0
    except ValueError:
        raise HypergraphError("%s: malformed header %r" % (path, rows[0]))
    if fmt not in (0, 1, 10, 11):
        raise HypergraphError("%s: unsupported format flag %d" % (path, fmt))
    has_net_weights = fmt in (1, 11)
    has_vertex_weights = fmt in (10, 11)
    expected = 1 + num_nets + (num_vertices if has_vertex_weights else 0)
    if len(rows) < expected:
        raise HypergraphError("%s: truncated file" % path)

    pin_lists = []
    net_weights = []
    for e in range(num_nets):
        try:
            vals = [int(tok) for tok in rows[1 + e].split()]
        except ValueError:
            raise HypergraphError("%s: bad net line %d" % (path, e + 1))
        if has_net_weights:
            if len(vals) < 2:
                raise HypergraphError("%s: net %d missing pins" % (path, e))
            w, vals = vals[0], vals[1:]
        else:
            w = 1
        if w <= 0:
            raise HypergraphError("%s: net %d has non-positive weight" % (path, e))
        if not vals:
            raise HypergraphError("%s: net %d has no pins" % (path, e))
        pins = []
        seen = set()
        for p in vals:
            if not (1 <= p <= num_vertices):
                raise HypergraphError("%s: net %d pin %d out of range" % (path, e, p))
            if p in seen:
                if dedup_pins:
                    continue
                raise HypergraphError("%s: net %d has duplicate pin %d" % (path, e, p))
            seen.add(p)
            pins.append(p - 1)
        pin_lists.append(pins)
        net_weights.append(w)

    vertex_weights = None
    if has_vertex_weights:
        vertex_weights = []
        for v in range(num_vertices):
            try:
                w = int(rows[1 + num_nets + v].split()[0])
            except (ValueError, IndexError):
                raise HypergraphError("%s: bad vertex weight line %d" % (path, v))
            if w <= 0:
                raise HypergraphError("%s: vertex %d has non-positive weight" % (path, v))
            vertex_weights.append(w)

    return StaticHypergraph(num_vertices, pin_lists, vertex_weights, net_weights)


def write_hmetis(hypergraph, path):
    """Write a hypergraph in hMetis format (pins 1-based)."""
    h = hypergraph
    has_net_w = any(w != 1 for w in h.net_weight)
    has_vtx_w = any(w != 1 for w in h.vertex_weight)
    fmt = (1 if has_net_w else 0) + (10 if has_vtx_w else 0)
    with open(path, "w") as f:
        if fmt:
            f.write("%d %d %d\n" % (h.num_nets, h.num_vertices, fmt))
        else:
            f.write("%d %d\n" % (h.num_nets, h.num_vertices))
        for e in range(h.num_nets):
            toks = []
            if has_net_w:
                toks.append(str(h.net_weight[e]))
            toks.extend(str(p + 1) for p in h.net_pins(e))
            f.write(" ".join(toks) + "\n")
        if has_vtx_w:
            for v in range(h.num_vertices):
                f.write("%d\n" % h.vertex_weight[v])


# -- partitions --------------------------------------------------------------


class PartitionState:
    """A k-way assignment over a static hypergraph with derived per-net counts.

    phi[e][i] counts the pins of net e in block i; lam[e] is the number of
    non-empty blocks of net e.  Unassigned vertices hold block -1 and do not
    contribute to any derived quantity.
    """

    def __init__(self, hypergraph, k, epsilon=0.03):
        if k < 1:
            raise HypergraphError("k must be at least 1")
        self.hypergraph = hypergraph
        self.k = k
        self.epsilon = epsilon
        self.pi = [-1] * hypergraph.num_vertices
        self.phi = [[0] * k for _ in range(hypergraph.num_nets)]
        self.lam = [0] * hypergraph.num_nets
        self.block_weight = [0] * k

    @classmethod
    def from_assignment(cls, hypergraph, k, assignment, epsilon=0.03):
        state = cls(hypergraph, k, epsilon)
        if len(assignment) != hypergraph.num_vertices:
            raise HypergraphError("assignment has wrong length")
        for v, b in enumerate(assignment):
            if b != -1 and not (0 <= b < k):
                raise HypergraphError("vertex %d assigned to invalid block %r" % (v, b))
        state.pi = list(assignment)
        state.rebuild()
        return state

    def rebuild(self):
        h = self.hypergraph
        k = self.k
        self.phi = [[0] * k for _ in range(h.num_nets)]
        self.lam = [0] * h.num_nets
        self.block_weight = [0] * k
        for v, b in enumerate(self.pi):
            if b >= 0:
                self.block_weight[b] += h.vertex_weight[v]
        for e in range(h.num_nets):
            row = self.phi[e]
            for p in h.net_pins(e):
                b = self.pi[p]
                if b >= 0:
                    row[b] += 1
            self.lam[e] = sum(1 for c in row if c > 0)

    def max_block_weight(self):
        """The balance cap for this partition (see balance_cap)."""
        return balance_cap(self.hypergraph.total_vertex_weight, self.k, self.epsilon)

    def is_balanced(self):
        cap = self.max_block_weight()
        return all(w <= cap for w in self.block_weight)

    def copy(self):
        return PartitionState.from_assignment(self.hypergraph, self.k, self.pi, self.epsilon)


def connectivity_objective(hypergraph, state):
    """(lambda - 1) objective recomputed from the raw assignment.

    Deliberately independent of the counts cached on the state so it can be
    used as an audit of incremental bookkeeping.
    """
    total = 0
    for e in range(hypergraph.num_nets):
        blocks = {state.pi[p] for p in hypergraph.net_pins(e) if state.pi[p] >= 0}
        if len(blocks) > 1:
            total += (len(blocks) - 1) * hypergraph.net_weight[e]
    return total


def imbalance(state):
    """max_i c(V_i) * k / c(V) - 1 over the underlying hypergraph."""
    total = state.hypergraph.total_vertex_weight
    if total == 0:
        return 0.0
    return max(state.block_weight) * state.k / total - 1.0


def gain(hypergraph, state, u, target):
    """Exact connectivity gain of moving u to block target.

    g(u, i) = w({e in I(u) : phi(e, pi(u)) = 1}) - w({e in I(u) : phi(e, i) = 0})
    """
    src = state.pi[u]
    if src < 0:
        raise HypergraphError("vertex %d is unassigned" % u)
    if target == src:
        raise HypergraphError("target block equals current block of vertex %d" % u)
    if not (0 <= target < state.k):
        raise HypergraphError("invalid target block %r" % target)
    g = 0
    for e in hypergraph.vertex_nets(u):
        w = hypergraph.net_weight[e]
        if state.phi[e][src] == 1:
            g += w
        if state.phi[e][target] == 0:
            g -= w
    return g


def validate_partition(hypergraph, state):
    """Return a list of violation descriptions (empty when consistent).

    Checks assignment completeness, cached counts against a scratch rebuild,
    and the balance constraint.
    """
    violations = []
    h = hypergraph
    for v, b in enumerate(state.pi):
        if not (0 <= b < state.k):
            violations.append("vertex %d has invalid block %r" % (v, b))
    reference = PartitionState.from_assignment(h, state.k, state.pi, state.epsilon)
    if reference.phi != state.phi:
        violations.append("cached pin counts phi disagree with assignment")
    if reference.lam != state.lam:
        violations.append("cached connectivity lambda disagrees with assignment")
    if reference.block_weight != state.block_weight:
        violations.append("cached block weights disagree with assignment")
    cap = state.max_block_weight()
    for i, w in enumerate(reference.block_weight):
        if w > cap:
            violations.append(
                "block %d weight %d exceeds cap %.6f" % (i, w, cap)
            )
    return violations
