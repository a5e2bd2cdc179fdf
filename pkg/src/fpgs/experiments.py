"""Experiment runners: schedulability-ratio curves over a utilization grid
and schedulable-fraction tables over taskset size, emitted as CSV.

Every run is fully seeded: taskset k of grid point g uses the child stream
(seed, g, k), so re-running a config reproduces the CSV byte for byte.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from .assign import exhaustive_search, heuristic_order, opa, order_schedulable, sampled_fraction
from .generate import GenConfig, child_seed, gen_taskset
from .model import TaskSet, taskset_hash
from .rta import RTA_LC

ALGORITHMS = ("DM", "DM_DS", "DkC", "SJF", "RANDOM", "OPA", "POLICY")


@dataclass(frozen=True)
class ExperimentConfig:
    """One schedulability-ratio experiment (ratio vs. total utilization)."""

    n: int
    m: int
    grid: Tuple[float, ...]
    sets_per_point: int = 500
    algorithms: Tuple[str, ...] = ("DM", "DM_DS", "DkC", "OPA")
    test: str = RTA_LC
    seed: int = 0
    period_range: Tuple[int, int] = (10, 1000)
    deadline_model: str = "implicit"
    policy_orders: Optional[str] = None

    def __post_init__(self):
        if self.sets_per_point < 1:
            raise ValueError("sets_per_point must be >= 1")
        for u in self.grid:
            if not 0 < u <= self.m:
                raise ValueError(f"grid value {u} not in (0, m={self.m}]")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")
        if "POLICY" in self.algorithms and not self.policy_orders:
            raise ValueError("POLICY requires a policy_orders file")


def load_policy_orders(path: str) -> dict:
    """Order file written by a trainer: {"hash": ..., "order": [...]} lines."""
    orders = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                orders[obj["hash"]] = [int(x) for x in obj["order"]]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad order record: {exc}") from exc
    return orders


def _algorithm_schedulable(ts: TaskSet, algorithm: str, test: str,
                           policy_orders: Optional[dict]) -> bool:
    if algorithm == "OPA":
        result = opa(ts)
        if result.order is None:
            return False
        return order_schedulable(ts, result.order, test)
    if algorithm == "POLICY":
        key = taskset_hash(ts)
        if policy_orders is None or key not in policy_orders:
            raise ValueError(f"no policy order for taskset hash {key}")
        return order_schedulable(ts, policy_orders[key], test)
    if algorithm == "RANDOM":
        order = heuristic_order(ts, "RANDOM", seed=child_seed(ts.seed or 0, 1))
    else:
        order = heuristic_order(ts, algorithm)
    return order_schedulable(ts, order, test)


def run_experiment(cfg: ExperimentConfig) -> list[tuple]:
    """Rows (utilization, algorithm, schedulable_count, total, ratio),
    grid-major then algorithm-major, deterministic in cfg."""
    policy_orders = load_policy_orders(cfg.policy_orders) if cfg.policy_orders else None
    rows = []
    for gi, u in enumerate(cfg.grid):
        tasksets = [
            gen_taskset(GenConfig(n=cfg.n, m=cfg.m, target_u=u,
                                  period_range=cfg.period_range,
                                  deadline_model=cfg.deadline_model,
                                  seed=child_seed(cfg.seed, gi, k)))
            for k in range(cfg.sets_per_point)
        ]
        for algorithm in cfg.algorithms:
            count = sum(
                _algorithm_schedulable(ts, algorithm, cfg.test, policy_orders)
                for ts in tasksets
            )
            rows.append((u, algorithm, count, cfg.sets_per_point,
                         count / cfg.sets_per_point))
    return rows


@dataclass(frozen=True)
class Table1Config:
    """Schedulable-fraction replication over taskset sizes.

    Exhaustive mode averages the exact fraction over all N! orders (n <= 8);
    sampled mode averages a K-permutation Monte-Carlo estimate. Either way
    the DM column reports the fraction of tasksets whose DM order passes.
    """

    n_list: Tuple[int, ...]
    mode: str
    m: int = 2
    target_u: float = 1.3
    sets_per_n: int = 500
    K: int = 100
    test: str = RTA_LC
    seed: int = 0
    period_range: Tuple[int, int] = (10, 1000)
    deadline_model: str = "implicit"

    def __post_init__(self):
        if self.mode not in ("exhaustive", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "exhaustive" and max(self.n_list) > 8:
            raise ValueError("exhaustive mode is capped at n <= 8")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.sets_per_n < 1:
            raise ValueError("sets_per_n must be >= 1")


def _table1_one_set(args) -> tuple:
    """(fraction, dm_ok) for one generated taskset; module-level for pickling."""
    (n, m, u, period_range, deadline_model, set_seed, mode, K, test, sample_seed) = args
    ts = gen_taskset(GenConfig(n=n, m=m, target_u=u, period_range=period_range,
                               deadline_model=deadline_model, seed=set_seed))
    if mode == "exhaustive":
        _, _, frac = exhaustive_search(ts, test)
    else:
        frac = sampled_fraction(ts, test, K, sample_seed)
    dm_ok = order_schedulable(ts, heuristic_order(ts, "DM"), test)
    return float(frac), dm_ok


def replicate_table1(cfg: Table1Config, jobs: int = 1) -> list[tuple]:
    """Rows (n, mean fraction, dm fraction), one per n, deterministic in cfg."""
    rows = []
    for n in cfg.n_list:
        work = [
            (n, cfg.m, cfg.target_u, cfg.period_range, cfg.deadline_model,
             child_seed(cfg.seed, n, k), cfg.mode, cfg.K, cfg.test,
             child_seed(cfg.seed, n, k, 1))
            for k in range(cfg.sets_per_n)
        ]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_table1_one_set, work, chunksize=8))
        else:
            results = [_table1_one_set(w) for w in work]
        fractions = [r[0] for r in results]
        dm_hits = sum(r[1] for r in results)
        rows.append((n, sum(fractions) / len(fractions), dm_hits / cfg.sets_per_n))
    return rows


def write_experiment_csv(rows: Sequence[tuple], path) -> None:
    with open(path, "w") as fh:
        fh.write("utilization,algorithm,schedulable_count,total,ratio\n")
        for u, algorithm, count, total, ratio in rows:
            fh.write(f"{u:g},{algorithm},{count},{total},{ratio:.4f}\n")


def write_table1_csv(rows: Sequence[tuple], path, mode: str) -> None:
    column = "all_perm_fraction" if mode == "exhaustive" else "sampled_fraction"
    with open(path, "w") as fh:
        fh.write(f"n,{column},dm_fraction\n")
        for n, fraction, dm_fraction in rows:
            fh.write(f"{n},{fraction:.4f},{dm_fraction:.4f}\n")
