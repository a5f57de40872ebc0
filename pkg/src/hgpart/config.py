"""Algorithmic knobs shared across the partitioning pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class PartitionerConfig:
    epsilon: float = 0.03
    seed: int = 0
    threads: int = 1
    b_max: int = 1000
    coarse_factor: int = 160  # contraction limit is coarse_factor * k
    max_net_size: int = 1000  # nets larger than this are ignored by the rating
    chunk_size: int = 1024
    lp_max_rounds: int = 5
    fm_seeds_per_search: int = 25
    fm_move_cap: int = 350
    fm_alpha: float = 1.0
    restarts: int = 3  # independent multilevel runs; the best result is kept
    pool_algorithms: tuple = ("random", "bfs", "lp", "net", "gain")
    audit: bool = False
