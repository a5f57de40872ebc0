"""Refinement: size-constrained label propagation and localized multi-try FM.

Label propagation repeatedly moves vertices to their best strictly positive
exact-gain block, so the objective decreases with every applied move.

FM runs localized searches seeded with up to a fixed number of boundary
vertices each.  A search owns its vertices through claim tokens, may apply
negative-gain moves, and stops by an adaptive random-walk rule (stop once
steps_since_best * mu^2 > alpha * sigma^2 + beta_ln, with a hard move cap).
Each search keeps only its best local move prefix; afterwards the global move
log is replayed sequentially from the pre-round partition and the best
balanced global prefix is kept, so a round never worsens the objective.
"""

from __future__ import annotations

import heapq
import math
import random
import threading
import time
from dataclasses import dataclass, field

from .gains import MoveRecord


@dataclass
class RefineConfig:
    lp_max_rounds: int = 5
    fm_seeds_per_search: int = 25
    fm_move_cap: int = 350
    fm_alpha: float = 1.0


class Refiner:
    def __init__(self, state, seed=0, threads=1, config=None, audit=False):
        self.state = state
        self.seed = seed
        self.threads = max(1, threads)
        self.config = config or RefineConfig()
        self.audit = audit
        self._pending = []
        self._pending_set = set()
        self._round = 0
        self.lp_time = 0.0
        self.fm_time = 0.0
        self.total_improvement = 0

    # -- shared helpers ----------------------------------------------------------

    def _rng(self, tag):
        self._round += 1
        return random.Random("%s:%s:%d" % (self.seed, tag, self._round))

    def _run_workers(self, fn, count):
        if count <= 1:
            fn(0)
            return
        workers = [
            threading.Thread(target=fn, args=(tid,), daemon=True) for tid in range(count)
        ]
        for w in workers:
            w.start()
        for w in workers:
            w.join()

    def _check(self, before, balanced_before=True):
        if self.audit:
            problems = self.state.audit()
            if problems:
                raise AssertionError("gain table audit failed: %s" % problems[:5])
            if self.state.objective > before:
                raise AssertionError(
                    "refinement regressed objective %d -> %d" % (before, self.state.objective)
                )
            if balanced_before and not self.state.is_balanced():
                raise AssertionError("refinement violated balance")

    # -- label propagation ---------------------------------------------------------

    def lp_refine(self, seeds, max_rounds=None):
        """Move seed vertices to strictly improving blocks until a fixed point
        or the round limit.  Returns the total achieved improvement."""
        t0 = time.perf_counter()
        state = self.state
        before = state.objective
        balanced_before = state.is_balanced()
        rounds = max_rounds if max_rounds is not None else self.config.lp_max_rounds
        active = [u for u in dict.fromkeys(seeds) if state.pi[u] >= 0]
        rng = self._rng("lp")
        for _ in range(rounds):
            order = list(active)
            rng.shuffle(order)
            moved = [0] * self.threads

            def worker(tid):
                for u in order[tid::self.threads]:
                    choice = state.best_target(u)
                    if choice is None:
                        continue
                    target, est = choice
                    if est <= 0:
                        continue
                    g = state.try_move(u, target, require_positive=True)
                    if g is not None:
                        moved[tid] += 1

            self._run_workers(worker, self.threads)
            if sum(moved) == 0:
                break
        improvement = before - state.objective
        self.total_improvement += improvement
        self._check(before, balanced_before)
        self.lp_time += time.perf_counter() - t0
        return improvement

    # -- FM ---------------------------------------------------------------------

    def fm_refine(self, seeds):
        """Localized multi-try FM over the given seed vertices.  Returns the
        improvement of the best balanced global move prefix."""
        t0 = time.perf_counter()
        state = self.state
        before = state.objective
        balanced_before = state.is_balanced()
        pool = [u for u in dict.fromkeys(seeds) if state.pi[u] >= 0]
        rng = self._rng("fm")
        rng.shuffle(pool)
        cursor = [0]
        claim = {}
        claim_lock = threading.Lock()
        log = []
        log_lock = threading.Lock()
        sid_counter = [0]

        def draw_seeds(sid):
            drawn = []
            with claim_lock:
                while cursor[0] < len(pool) and len(drawn) < self.config.fm_seeds_per_search:
                    u = pool[cursor[0]]
                    cursor[0] += 1
                    if claim.get(u) is None:
                        claim[u] = sid
                        drawn.append(u)
            return drawn

        def release(sid):
            with claim_lock:
                stale = [u for u, s in claim.items() if s == sid]
                for u in stale:
                    del claim[u]

        def try_claim(u, sid):
            with claim_lock:
                if claim.get(u) is None:
                    claim[u] = sid
                    return True
                return False

        def search(sid):
            drawn = draw_seeds(sid)
            if not drawn:
                return False
            heap = []
            for u in drawn:
                choice = state.best_target(u)
                if choice is not None:
                    heapq.heappush(heap, (-choice[1], u))
            local = []
            cum = 0
            best_cum = 0
            best_len = 0
            steps_since_best = 0
            n_gains = 0
            mean = 0.0
            m2 = 0.0
            beta_ln = math.log(max(2, len(state.alive)))
            while heap and len(local) < self.config.fm_move_cap:
                est, u = heapq.heappop(heap)
                choice = state.best_target(u)
                if choice is None:
                    continue
                target, g_est = choice
                if -est != g_est and heap and -heap[0][0] > g_est:
                    heapq.heappush(heap, (-g_est, u))
                    continue
                src = state.pi[u]  # stable: u is claimed by this search
                g = state.try_move(u, target)
                if g is None:
                    continue
                local.append(MoveRecord(u, src, target, g))
                cum += g
                if cum > best_cum:
                    best_cum = cum
                    best_len = len(local)
                    steps_since_best = 0
                else:
                    steps_since_best += 1
                n_gains += 1
                delta = g - mean
                mean += delta / n_gains
                m2 += delta * (g - mean)
                var = m2 / (n_gains - 1) if n_gains > 1 else 0.0
                if steps_since_best > 0 and (
                    steps_since_best * mean * mean
                    > self.config.fm_alpha * var + beta_ln
                ):
                    break
                for e in state.dh.current_incident_nets(u):
                    off = state.dh.pin_off[e]
                    for j in range(state.dh.pin_size[e]):
                        pin = state.dh.pins[off + j]
                        if pin != u and try_claim(pin, sid):
                            c2 = state.best_target(pin)
                            if c2 is not None:
                                heapq.heappush(heap, (-c2[1], pin))
            # keep the best local prefix, revert the rest
            for rec in reversed(local[best_len:]):
                state.try_move(rec.vertex, rec.source, enforce_balance=False)
            if best_len:
                with log_lock:
                    log.extend(local[:best_len])
            release(sid)
            return True

        def worker(tid):
            while True:
                with claim_lock:
                    sid_counter[0] += 1
                    sid = sid_counter[0]
                if not search(sid):
                    return

        self._run_workers(worker, self.threads)
        improvement = self._commit_best_prefix(log)
        self.total_improvement += improvement
        self._check(before, balanced_before)
        self.fm_time += time.perf_counter() - t0
        return improvement

    def _commit_best_prefix(self, log):
        """Sequentially replay the move log from the pre-round partition and
        keep the best balanced prefix."""
        state = self.state
        if not log:
            return 0
        for rec in reversed(log):
            state.try_move(rec.vertex, rec.source, enforce_balance=False)
        start_objective = state.objective
        cum = 0
        best = 0
        best_len = 0
        for i, rec in enumerate(log):
            g = state.try_move(rec.vertex, rec.target, enforce_balance=False)
            rec.gain = g
            cum += g
            rec.prefix_objective = start_objective - cum
            if cum > best and state.is_balanced():
                best = cum
                best_len = i + 1
        for rec in reversed(log[best_len:]):
            state.try_move(rec.vertex, rec.source, enforce_balance=False)
        return best

    # -- batch-triggered refinement -----------------------------------------------

    def refine_after_batches(self, uncontracted, beta):
        """Accumulate newly uncontracted boundary vertices; once their count
        exceeds beta, run LP then FM localized around them."""
        state = self.state
        for v in uncontracted:
            if v not in self._pending_set and state.is_boundary(v):
                self._pending_set.add(v)
                self._pending.append(v)
        if len(self._pending) > beta:
            seeds = self._pending
            self._pending = []
            self._pending_set = set()
            self.lp_refine(seeds)
            self.fm_refine(seeds)

    def rebalance(self):
        """Greedy balance repair: while some block exceeds its cap, move the
        vertex whose departure costs the least into a block with room.
        Returns the number of moves made (stops if no legal move exists)."""
        state = self.state
        moved = 0
        while True:
            over = {
                i
                for i in range(state.k)
                if state.block_weight[i] > state.max_block_weight[i]
            }
            if not over:
                return moved
            best = None
            for u in state.alive:
                if state.pi[u] not in over:
                    continue
                cu = state.dh.vertex_weight[u]
                for i in range(state.k):
                    if i == state.pi[u] or i in over:
                        continue
                    if state.block_weight[i] + cu > state.max_block_weight[i]:
                        continue
                    g = state.table_gain(u, i)
                    if best is None or g > best[0]:
                        best = (g, u, i)
            if best is None or state.try_move(best[1], best[2]) is None:
                return moved
            moved += 1

    def global_pass(self):
        """LP + FM over every current boundary vertex (run once per
        coarsening-pass boundary)."""
        state = self.state
        seeds = [u for u in state.alive if state.is_boundary(u)]
        self._pending = []
        self._pending_set = set()
        self.lp_refine(seeds)
        self.fm_refine(seeds)
