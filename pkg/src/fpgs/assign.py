"""Priority assignment: sorting heuristics, Audsley's algorithm, and
exhaustive / sampled enumeration oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .model import PriorityOrder, TaskSet, check_order
from .rta import (DA_LC, RTA_LC, RTA_UNI, TestVerdict, _da_bound, _lc_bound,
                  _lc_bounds_for_order, _uni_bound, rta_lc, task_arrays)

HEURISTICS = ("DM", "DM_DS", "DkC", "SJF", "RANDOM")

EXHAUSTIVE_CAP = 9


@dataclass(frozen=True)
class AssignResult:
    """A priority order (or none) plus the verdict backing it."""

    order: Optional[PriorityOrder]
    algorithm: str
    verdict: TestVerdict


def dkc_factor(m: int) -> float:
    """Weight k of the D - k*C sorting key; k(1) = 0, k(2) = 1."""
    return (m - 1 + math.sqrt(5 * m * m - 6 * m + 1)) / (2 * m)


def heuristic_order(ts: TaskSet, name: str, seed: Optional[int] = None) -> PriorityOrder:
    """Priority order under a named sorting heuristic (position 0 highest).

    DM sorts by deadline, SJF by execution time, DkC by D - k*C. DM_DS
    promotes tasks denser than m/(3m-2) to the top (densest first) and
    orders the rest by DM. Ties break toward the lower task id. RANDOM is
    a seeded uniform permutation.
    """
    tasks = ts.tasks
    if name == "DM":
        return [t.id for t in sorted(tasks, key=lambda t: (t.D, t.id))]
    if name == "SJF":
        return [t.id for t in sorted(tasks, key=lambda t: (t.C, t.id))]
    if name == "DkC":
        k = dkc_factor(ts.m)
        return [t.id for t in sorted(tasks, key=lambda t: (t.D - k * t.C, t.id))]
    if name == "DM_DS":
        threshold = Fraction(ts.m, 3 * ts.m - 2)
        heavy = [t for t in tasks if t.density > threshold]
        light = [t for t in tasks if t.density <= threshold]
        heavy.sort(key=lambda t: (-t.density, t.id))
        light.sort(key=lambda t: (t.D, t.id))
        return [t.id for t in heavy + light]
    if name == "RANDOM":
        if seed is None:
            raise ValueError("RANDOM heuristic requires a seed")
        rng = np.random.default_rng(seed & ((1 << 64) - 1))
        return [int(x) for x in rng.permutation(ts.n)]
    raise ValueError(f"unknown heuristic {name!r}")


def assign_heuristic(ts: TaskSet, name: str, seed: Optional[int] = None) -> AssignResult:
    order = heuristic_order(ts, name, seed)
    return AssignResult(order=order, algorithm=name, verdict=rta_lc(ts, order))


def _da_verdict(ts: TaskSet, order: PriorityOrder) -> TestVerdict:
    """Per-task deadline-window bounds along a full order."""
    C, T, D = task_arrays(ts)
    bounds = np.zeros(ts.n, dtype=np.int64)
    ok = np.zeros(ts.n, dtype=np.bool_)
    order_arr = np.asarray(order, dtype=np.int64)
    for pos, k in enumerate(order):
        b = _da_bound(C, T, D, ts.m, order_arr[:pos], k)
        bounds[k] = b
        ok[k] = b <= D[k]
    return TestVerdict.build(DA_LC, ok, bounds)


def opa(ts: TaskSet, test: str = DA_LC) -> AssignResult:
    """Audsley's optimal priority assignment under a set-dependent test.

    Fills priorities lowest-first; at each level any unassigned task that
    passes with all other unassigned tasks as higher-priority can take the
    level (ties: largest D, then lowest id). Succeeds iff some permutation
    passes the same test. Order-dependent tests (RTA_LC) are rejected
    because their carry-in term reads response bounds of specific
    higher-priority tasks.
    """
    if test not in (DA_LC, RTA_UNI):
        raise ValueError(f"OPA requires a set-dependent test, not {test}")
    if test == RTA_UNI and ts.m != 1:
        raise ValueError("RTA_UNI requires m=1")
    C, T, D = task_arrays(ts)
    unassigned = set(range(ts.n))
    reversed_order = []
    for _level in range(ts.n):
        candidates = []
        for k in sorted(unassigned):
            hp = np.asarray(sorted(unassigned - {k}), dtype=np.int64)
            if test == DA_LC:
                passed = _da_bound(C, T, D, ts.m, hp, k) <= D[k]
            else:
                _, passed, _, _ = _uni_bound(C, T, D, hp, k)
            if passed:
                candidates.append(k)
        if not candidates:
            n = ts.n
            verdict = TestVerdict.build(test, [False] * n, [0] * n)
            return AssignResult(order=None, algorithm="OPA", verdict=verdict)
        pick = max(candidates, key=lambda k: (D[k], -k))
        reversed_order.append(pick)
        unassigned.remove(pick)
    order = list(reversed(reversed_order))
    if test == DA_LC:
        verdict = _da_verdict(ts, order)
    else:
        from .rta import rta_uniprocessor
        verdict = rta_uniprocessor(ts, order)
    return AssignResult(order=order, algorithm="OPA", verdict=verdict)


def order_schedulable(ts: TaskSet, order: PriorityOrder, test: str = RTA_LC) -> bool:
    """Schedulable flag of one order under a named test."""
    check_order(ts.n, order)
    if test == RTA_LC:
        C, T, D = task_arrays(ts)
        _, ok = _lc_bounds_for_order(C, T, D, ts.m, np.asarray(order, dtype=np.int64))
        return bool(ok.all())
    if test == RTA_UNI:
        from .rta import rta_uniprocessor
        return rta_uniprocessor(ts, order).schedulable
    if test == DA_LC:
        return _da_verdict(ts, order).schedulable
    raise ValueError(f"unknown test {test!r}")


def exhaustive_search(ts: TaskSet, test: str = RTA_LC, cap: int = EXHAUSTIVE_CAP):
    """Evaluate all N! priority orders under a named test.

    Returns (found, witness, fraction): whether any order is schedulable,
    the lexicographically first such order (or None), and the exact
    schedulable fraction of all N! orders.

    A prefix whose last task already failed cannot be completed into a
    schedulable order (its bound only depends on the prefix), so its
    subtree is pruned; every pruned completion still counts as
    unschedulable in the denominator.
    """
    n = ts.n
    if n > cap:
        raise ValueError(f"taskset size {n} exceeds exhaustive cap {cap}")
    if test == RTA_UNI and ts.m != 1:
        raise ValueError("RTA_UNI requires m=1")
    C, T, D = task_arrays(ts)
    m = ts.m

    hp = np.empty(n, dtype=np.int64)
    hp_bounds = np.empty(n, dtype=np.int64)
    count = 0
    witness: Optional[list] = None

    if test == RTA_LC:

        def step(depth: int, k: int) -> bool:
            b, passed, _, _ = _lc_bound(C, T, D, m, hp[:depth], hp_bounds[:depth], k)
            hp_bounds[depth] = b
            return bool(passed)

    elif test in (DA_LC, RTA_UNI):
        memo: dict = {}

        def step(depth: int, k: int) -> bool:
            mask = 0
            for j in range(depth):
                mask |= 1 << hp[j]
            key = (k, mask)
            hit = memo.get(key)
            if hit is None:
                if test == DA_LC:
                    hit = bool(_da_bound(C, T, D, m, hp[:depth], k) <= D[k])
                else:
                    _, hit, _, _ = _uni_bound(C, T, D, hp[:depth], k)
                    hit = bool(hit)
                memo[key] = hit
            hp_bounds[depth] = 0
            return hit

    else:
        raise ValueError(f"unknown test {test!r}")

    remaining = list(range(n))

    def dfs(depth: int):
        nonlocal count, witness
        if depth == n:
            count += 1
            if witness is None:
                witness = [int(x) for x in hp[:n]]
            return
        for idx in range(len(remaining)):
            k = remaining[idx]
            if k < 0:
                continue
            if step(depth, k):
                hp[depth] = k
                remaining[idx] = -1
                dfs(depth + 1)
                remaining[idx] = k

    dfs(0)
    fraction = Fraction(count, math.factorial(n))
    return count > 0, witness, fraction


def sampled_fraction(ts: TaskSet, test: str, K: int, seed: int) -> Fraction:
    """Monte-Carlo estimate of the schedulable-order fraction over K
    uniform random permutations; deterministic in the seed."""
    if K < 1:
        raise ValueError("K must be >= 1")
    rng = np.random.default_rng(seed & ((1 << 64) - 1))
    hits = 0
    for _ in range(K):
        order = [int(x) for x in rng.permutation(ts.n)]
        if order_schedulable(ts, order, test):
            hits += 1
    return Fraction(hits, K)
