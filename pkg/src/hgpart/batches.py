"""Uncontraction batch scheduling.

Contractions are undone in batches of roughly b_max vertices.  A legal
schedule restores every vertex after its representative (ancestor-first),
keeps sibling closures together (siblings whose contraction intervals
overlap transitively must share a batch, since their pin edits are not
individually reversible), and restores later-contracted disjoint siblings no
later than earlier-contracted ones.  Batches are built per coarsening pass,
last pass first, by a BFS over the contraction forest.
"""

from __future__ import annotations

import threading
from collections import deque


class BatchSchedule:
    def __init__(self, num_vertices):
        self.batches = []
        self.pass_of_batch = []
        self.batch_index = [-1] * num_vertices
        self.queue_ops = 0


def sibling_closures(children):
    """Group siblings whose contraction intervals overlap transitively.

    children is a list of (vertex, start, end) tuples.  Returns closures as
    lists of vertices, ordered by decreasing interval end (latest contraction
    first); within a closure vertices are likewise ordered by decreasing end.
    """
    order = sorted(children, key=lambda c: (-c[2], -c[1], c[0]))
    closures = []
    current = []
    lo = hi = None
    for v, s, e in order:
        if current and e >= lo:
            current.append(v)
            lo = min(lo, s)
        else:
            if current:
                closures.append(current)
            current = [v]
            lo, hi = s, e
    if current:
        closures.append(current)
    return closures


class _OpenBatches:
    """Bounded ring of open batches shared by the BFS workers of one pass."""

    def __init__(self, schedule, pass_idx, b_max, capacity):
        self.schedule = schedule
        self.pass_idx = pass_idx
        self.b_max = b_max
        self.capacity = max(1, capacity)
        self.open = []  # list of [index, vertex list]
        self.lock = threading.Lock()

    def _new_batch(self):
        idx = len(self.schedule.batches)
        batch = []
        self.schedule.batches.append(batch)
        self.schedule.pass_of_batch.append(self.pass_idx)
        return [idx, batch]

    def append_closure(self, closure, min_index):
        """Place a whole closure into one open batch with index >= min_index,
        opening (and if needed sealing) batches to respect the size bound.
        Returns the chosen batch index."""
        size = len(closure)
        with self.lock:
            slot = None
            if size <= self.b_max:
                for entry in self.open:
                    if entry[0] >= min_index and len(entry[1]) + size <= self.b_max:
                        slot = entry
                        break
            if slot is None:
                slot = self._new_batch()
                self.open.append(slot)
                if len(self.open) > self.capacity:
                    # seal the oldest open batch to bound the ring
                    oldest = min(range(len(self.open)), key=lambda i: self.open[i][0])
                    self.open.pop(oldest)
            idx, batch = slot
            batch.extend(closure)
            for v in closure:
                self.schedule.batch_index[v] = idx
            if len(batch) >= self.b_max:
                self.open.remove(slot)
            return idx

    def seal_all(self):
        with self.lock:
            self.open = []


def _subtree_sizes(roots, closures_of):
    sizes = {}

    def size_of(u):
        total = 0
        stack = [u]
        while stack:
            x = stack.pop()
            for closure in closures_of.get(x, ()):
                total += len(closure)
                stack.extend(closure)
        return total

    for r in roots:
        sizes[r] = size_of(r)
    return sizes


def construct_batches(forest, b_max, threads=1):
    """Build a legal uncontraction schedule for the whole forest.

    Passes are scheduled in reverse order (last coarsening pass first); batch
    indices increase in restore order.
    """
    schedule = BatchSchedule(forest.num_vertices)
    by_pass = {}
    for v in range(forest.num_vertices):
        if forest.rep[v] != v:
            by_pass.setdefault(forest.pass_of[v], {}).setdefault(forest.rep[v], []).append(v)

    for pass_idx in sorted(by_pass, reverse=True):
        children_of = by_pass[pass_idx]
        closures_of = {
            parent: sibling_closures(
                [(v, forest.start[v], forest.end[v]) for v in kids]
            )
            for parent, kids in children_of.items()
        }
        roots = sorted(
            parent for parent in closures_of if forest.pass_of[parent] != pass_idx
        )
        sizes = _subtree_sizes(roots, closures_of)
        roots.sort(key=lambda r: (-sizes[r], r))
        ring = _OpenBatches(schedule, pass_idx, b_max, capacity=max(1, threads))
        ops = [0] * max(1, threads)

        def bfs(root_list, tid):
            queue = deque()
            nxt = deque()
            last_used = {}
            for r in root_list:
                queue.append((r, 0))
                ops[tid] += 1
            while queue or nxt:
                if not queue:
                    queue, nxt = nxt, queue
                    if threads == 1:
                        ring.seal_all()
                u, ci = queue.popleft()
                closures = closures_of[u]
                closure = closures[ci]
                floor = last_used.get(u, 0)
                if schedule.batch_index[u] >= 0:
                    floor = max(floor, schedule.batch_index[u] + 1)
                idx = ring.append_closure(closure, floor)
                last_used[u] = idx
                for v in closure:
                    if v in closures_of:
                        nxt.append((v, 0))
                        ops[tid] += 1
                if ci + 1 < len(closures):
                    queue.append((u, ci + 1))
                    ops[tid] += 1

        if threads == 1 or len(roots) <= 1:
            bfs(roots, 0)
        else:
            shares = [roots[t::threads] for t in range(threads)]
            workers = [
                threading.Thread(target=bfs, args=(shares[t], t), daemon=True)
                for t in range(threads)
            ]
            for w in workers:
                w.start()
            for w in workers:
                w.join()
        ring.seal_all()
        schedule.queue_ops += sum(ops)

    # drop empty batches (possible when a pass had no contractions)
    keep = [i for i, b in enumerate(schedule.batches) if b]
    if len(keep) != len(schedule.batches):
        remap = {old: new for new, old in enumerate(keep)}
        schedule.batches = [schedule.batches[i] for i in keep]
        schedule.pass_of_batch = [schedule.pass_of_batch[i] for i in keep]
        for v in range(forest.num_vertices):
            if schedule.batch_index[v] >= 0:
                schedule.batch_index[v] = remap[schedule.batch_index[v]]
    return schedule


def check_schedule_legality(forest, schedule, b_max=None):
    """Return a list of violations of the scheduling rules (empty if legal)."""
    problems = []
    contracted = forest.contracted_vertices()
    seen = {}
    for i, batch in enumerate(schedule.batches):
        for v in batch:
            if v in seen:
                problems.append("vertex %d scheduled twice" % v)
            seen[v] = i
    for v in contracted:
        if v not in seen:
            problems.append("contracted vertex %d never scheduled" % v)
        elif schedule.batch_index[v] != seen[v]:
            problems.append("batch_index of vertex %d disagrees with batches" % v)
    for v in seen:
        if forest.rep[v] == v:
            problems.append("uncontracted vertex %d scheduled" % v)

    # ancestor-first
    for v in contracted:
        u = forest.rep[v]
        if forest.rep[u] != u and v in seen and u in seen:
            if seen[v] <= seen[u]:
                problems.append(
                    "vertex %d (batch %d) not after its representative %d (batch %d)"
                    % (v, seen[v], u, seen[u])
                )

    # closures share a batch; across closures, later contractions come first
    children = forest.children_map()
    for parent, kids in children.items():
        closures = sibling_closures(
            [(v, forest.start[v], forest.end[v]) for v in kids]
        )
        prev_max = None
        for closure in closures:
            idxs = {seen[v] for v in closure if v in seen}
            if len(idxs) > 1:
                problems.append(
                    "sibling closure %s of %d split across batches %s"
                    % (sorted(closure), parent, sorted(idxs))
                )
            if idxs:
                idx = min(idxs)
                if prev_max is not None and idx < prev_max:
                    problems.append(
                        "earlier-contracted siblings of %d scheduled before later ones"
                        % parent
                    )
                prev_max = idx if prev_max is None else max(prev_max, idx)

    # batch sizes
    if b_max is not None:
        for i, batch in enumerate(schedule.batches):
            if len(batch) > b_max:
                parents = {forest.rep[v] for v in batch}
                single = False
                if len(parents) == 1:
                    parent = next(iter(parents))
                    closures = sibling_closures(
                        [
                            (v, forest.start[v], forest.end[v])
                            for v in children.get(parent, [])
                        ]
                    )
                    single = any(set(c) == set(batch) for c in closures)
                if not single:
                    problems.append(
                        "batch %d of size %d exceeds b_max %d" % (i, len(batch), b_max)
                    )

    # pass order: non-increasing, and batches never mix passes
    prev = None
    for i, batch in enumerate(schedule.batches):
        passes = {forest.pass_of[v] for v in batch}
        if len(passes) > 1:
            problems.append("batch %d mixes coarsening passes" % i)
        if i < len(schedule.pass_of_batch) and passes and (
            schedule.pass_of_batch[i] not in passes
        ):
            problems.append("batch %d has wrong pass label" % i)
        if passes:
            p = max(passes)
            if prev is not None and p > prev:
                problems.append("batch %d from pass %d after pass %d" % (i, p, prev))
            prev = p
    return problems
