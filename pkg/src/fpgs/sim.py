"""Discrete-event preemptive global fixed-priority simulator.

The simulator exists to falsify sufficient schedulability tests and to
sanity-check worked examples; absence of a miss over simulated patterns
never proves schedulability. Unit-tick integer time; at every tick the m
highest-priority ready jobs run (no migration cost, no intra-job
parallelism); simultaneous arrivals tie-break by task id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numba import njit

from .model import PriorityOrder, TaskSet, check_order
from .generate import child_seed

HORIZON_CAP = 10 ** 6


@dataclass(frozen=True)
class ArrivalPattern:
    """kind is "synchronous" (all tasks release at 0, strictly periodic) or
    "random_sporadic" (seeded offsets and inter-arrival gaps >= T_i)."""

    kind: str
    horizon: int
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("synchronous", "random_sporadic"):
            raise ValueError(f"unknown arrival pattern kind {self.kind!r}")
        if self.kind == "random_sporadic" and self.seed is None:
            raise ValueError("random_sporadic pattern requires a seed")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass(frozen=True)
class SimResult:
    miss: bool
    first_miss: Optional[Tuple[int, int]]  # (task id, absolute tick)
    max_response: tuple  # per task id; completed jobs only


def default_horizon(ts: TaskSet) -> int:
    return min(math.lcm(*(t.T for t in ts.tasks)), HORIZON_CAP)


def _arrivals(ts: TaskSet, pattern: ArrivalPattern):
    """Per-task release times in [0, horizon), flattened CSR-style."""
    h = pattern.horizon
    per_task = []
    if pattern.kind == "synchronous":
        for t in ts.tasks:
            per_task.append(np.arange(0, h, t.T, dtype=np.int64))
    else:
        rng = np.random.default_rng(pattern.seed & ((1 << 64) - 1))
        for t in ts.tasks:
            start = int(rng.integers(0, t.T))
            n_max = (h - start) // t.T + 2
            gaps = t.T + np.minimum(rng.geometric(0.1, size=n_max), t.T)
            times = start + np.concatenate(([0], np.cumsum(gaps)))
            per_task.append(times[times < h].astype(np.int64))
    off = np.zeros(len(per_task) + 1, dtype=np.int64)
    for i, a in enumerate(per_task):
        off[i + 1] = off[i] + len(a)
    flat = np.concatenate(per_task) if per_task else np.zeros(0, dtype=np.int64)
    return flat.astype(np.int64), off


@njit(cache=True, nogil=True)
def _sim_core(C, D, by_prio, m, arr_flat, arr_off, horizon):
    """Event-driven run; returns (miss, task, tick, max_response).

    Between events the running set is fixed, so time advances straight to
    the next arrival, completion, or deadline. Equivalent to a tick-by-tick
    schedule (the test suite checks this against a reference simulator).
    """
    n = len(C)
    nxt = np.empty(n, dtype=np.int64)
    next_arr = np.empty(n, dtype=np.int64)
    remaining = np.zeros(n, dtype=np.int64)
    deadline = np.zeros(n, dtype=np.int64)
    arrived = np.zeros(n, dtype=np.int64)
    max_resp = np.zeros(n, dtype=np.int64)
    running = np.empty(n, dtype=np.int64)
    sentinel = horizon + 1
    for i in range(n):
        nxt[i] = arr_off[i]
        next_arr[i] = arr_flat[nxt[i]] if nxt[i] < arr_off[i + 1] else sentinel

    t = 0
    # arrivals at time 0
    for i in range(n):
        if next_arr[i] == t:
            remaining[i] = C[i]
            deadline[i] = t + D[i]
            arrived[i] = t
            nxt[i] += 1
            next_arr[i] = arr_flat[nxt[i]] if nxt[i] < arr_off[i + 1] else sentinel

    while t < horizon:
        # running set: m highest-priority ready tasks
        n_run = 0
        for j in range(n):
            i = by_prio[j]
            if remaining[i] > 0:
                running[n_run] = i
                n_run += 1
                if n_run == m:
                    break
        # next event
        te = horizon
        for i in range(n):
            if next_arr[i] < te:
                te = next_arr[i]
            if remaining[i] > 0 and deadline[i] < te:
                te = deadline[i]
        for j in range(n_run):
            done_at = t + remaining[running[j]]
            if done_at < te:
                te = done_at
        dt = te - t
        for j in range(n_run):
            i = running[j]
            remaining[i] -= dt
            if remaining[i] == 0:
                resp = te - arrived[i]
                if resp > max_resp[i]:
                    max_resp[i] = resp
        t = te
        # misses strictly at their deadline tick
        for i in range(n):
            if remaining[i] > 0 and deadline[i] <= t:
                return True, i, deadline[i], max_resp
        if t >= horizon:
            break
        # arrivals at t
        for i in range(n):
            if next_arr[i] == t:
                remaining[i] = C[i]
                deadline[i] = t + D[i]
                arrived[i] = t
                nxt[i] += 1
                next_arr[i] = arr_flat[nxt[i]] if nxt[i] < arr_off[i + 1] else sentinel

    return False, -1, -1, max_resp


def simulate(ts: TaskSet, order: PriorityOrder, pattern: ArrivalPattern) -> SimResult:
    """Run one arrival pattern to its horizon or to the first deadline miss."""
    check_order(ts.n, order)
    C = np.array([t.C for t in ts.tasks], dtype=np.int64)
    D = np.array([t.D for t in ts.tasks], dtype=np.int64)
    by_prio = np.asarray(order, dtype=np.int64)
    arr_flat, arr_off = _arrivals(ts, pattern)
    miss, task, tick, max_resp = _sim_core(C, D, by_prio, ts.m, arr_flat,
                                           arr_off, pattern.horizon)
    return SimResult(miss=bool(miss),
                     first_miss=(int(task), int(tick)) if miss else None,
                     max_response=tuple(int(x) for x in max_resp))


def falsify(ts: TaskSet, order: PriorityOrder, trials: int, seed: int,
            horizon: Optional[int] = None) -> bool:
    """True when any simulated pattern misses a deadline.

    Runs the synchronous pattern plus `trials` random sporadic patterns
    with per-trial seeds derived from `seed`. A miss under an order a
    sufficient test accepted is a refutation of the test implementation.
    """
    if trials < 0:
        raise ValueError("trials must be >= 0")
    h = default_horizon(ts) if horizon is None else horizon
    if simulate(ts, order, ArrivalPattern("synchronous", h)).miss:
        return True
    for j in range(trials):
        pat = ArrivalPattern("random_sporadic", h, seed=child_seed(seed, j))
        if simulate(ts, order, pat).miss:
            return True
    return False
