"""Seeded random taskset generation with controlled total utilization.

Utilizations come from UUniFast with discard-and-retry on any u_i > 1
(UUniFast-Discard), periods are log-uniform integers, and execution times
are rounded from u_i * T_i. Everything is deterministic in the seed; helper
`child_seed` derives per-taskset streams from one root seed by a counter
scheme so experiments stay reproducible piecewise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .model import Task, TaskSet, validate

_MASK64 = (1 << 64) - 1


def child_seed(root: int, *path: int) -> int:
    """Derive a 64-bit stream seed from a root seed and counter path.

    Stream (root, i, j, ...) is `SeedSequence([root, i, j, ...])`; the same
    path always yields the same seed, and distinct paths yield independent
    streams.
    """
    entropy = [root & _MASK64] + [p & _MASK64 for p in path]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class GenConfig:
    """Parameters for one random taskset draw."""

    n: int
    m: int
    target_u: float
    period_range: Tuple[int, int] = (10, 1000)
    deadline_model: str = "implicit"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 < self.target_u <= self.m:
            raise ValueError(f"target_u {self.target_u} not in (0, m={self.m}]")
        t_min, t_max = self.period_range
        if t_min < 10:
            raise ValueError(f"T_min {t_min} < 10")
        if t_max < t_min:
            raise ValueError("period_range must satisfy T_min <= T_max")
        if self.deadline_model not in ("implicit", "constrained"):
            raise ValueError(f"unknown deadline model {self.deadline_model!r}")


def _uunifast(rng: np.random.Generator, n: int, target_u: float) -> list[float]:
    """One UUniFast draw: n nonnegative values summing to target_u."""
    out = []
    remaining = target_u
    for i in range(1, n):
        nxt = remaining * rng.random() ** (1.0 / (n - i))
        out.append(remaining - nxt)
        remaining = nxt
    out.append(remaining)
    return out


def _uunifast_discard(rng: np.random.Generator, n: int, target_u: float) -> list[float]:
    while True:
        utils = _uunifast(rng, n, target_u)
        if all(0.0 < u <= 1.0 for u in utils):
            return utils


def gen_utilizations(n: int, target_u: float, seed: int) -> list[float]:
    """n per-task utilizations in (0, 1] summing to target_u.

    Raises ValueError when target_u > n (some u_i would have to exceed 1).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if target_u <= 0:
        raise ValueError("target_u must be positive")
    if target_u > n:
        raise ValueError(f"target_u {target_u} > n={n} is infeasible with u_i <= 1")
    rng = np.random.default_rng(seed & _MASK64)
    return _uunifast_discard(rng, n, target_u)


def _log_uniform_period(rng: np.random.Generator, t_min: int, t_max: int) -> int:
    x = math.exp(rng.uniform(math.log(t_min), math.log(t_max)))
    return min(t_max, max(t_min, int(round(x))))


def gen_taskset(cfg: GenConfig) -> TaskSet:
    """Draw one valid TaskSet; |U - target_u| <= n / T_min.

    C_i = max(1, round(u_i * T_i)) keeps every task non-trivial, so the
    realized utilization can drift from the target by at most 1/T_i per
    task. Draws whose rounded utilization exceeds m are redrawn from the
    same stream, which preserves determinism.
    """
    if cfg.target_u > cfg.n:
        raise ValueError(f"target_u {cfg.target_u} > n={cfg.n} is infeasible with u_i <= 1")
    rng = np.random.default_rng(cfg.seed & _MASK64)
    t_min, t_max = cfg.period_range
    while True:
        utils = _uunifast_discard(rng, cfg.n, cfg.target_u)
        tasks = []
        for i, u in enumerate(utils):
            T = _log_uniform_period(rng, t_min, t_max)
            C = max(1, int(round(u * T)))
            if cfg.deadline_model == "implicit":
                D = T
            else:
                D = int(rng.integers(C, T + 1))
            tasks.append(Task(id=i, C=C, T=T, D=D))
        ts = TaskSet(tasks=tasks, m=cfg.m, seed=cfg.seed, target_u=cfg.target_u)
        if not validate(ts):
            return ts


def gen_tasksets(cfg: GenConfig, count: int) -> list[TaskSet]:
    """count tasksets from per-index child streams of cfg.seed."""
    out = []
    for k in range(count):
        sub = GenConfig(n=cfg.n, m=cfg.m, target_u=cfg.target_u,
                        period_range=cfg.period_range,
                        deadline_model=cfg.deadline_model,
                        seed=child_seed(cfg.seed, k))
        out.append(gen_taskset(sub))
    return out
