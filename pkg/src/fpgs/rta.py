"""Response-time analyses for fixed-priority scheduling.

Implements the exact uniprocessor test, the global limited-carry-in test
(at most m-1 interfering tasks contribute carry-in work), its deadline-window
variant that depends only on the *set* of higher-priority tasks (usable with
Audsley's algorithm), and an incremental per-prefix evaluation for dense
reward signals.

All tests are sufficient: a schedulable verdict guarantees no deadline miss,
the converse does not hold. The fixed-point kernels are JIT-compiled; they
dominate the runtime of exhaustive enumeration and experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
from numba import njit

from .model import PriorityOrder, TaskSet, check_order

RTA_UNI = "RTA_UNI"
RTA_LC = "RTA_LC"
DA_LC = "DA_LC"


@njit(cache=True, nogil=True)
def workload_nc(C: int, T: int, L: int) -> int:
    """Maximum work a task (no carry-in) executes in any window of length L.

    Densest pattern: first job released at the window start, successors
    strictly periodic; the last job only counts up to the window end.
    Non-decreasing in L; zero at L = 0.
    """
    q = L // T
    return q * C + min(C, L - q * T)


@njit(cache=True, nogil=True)
def workload_ci(C: int, T: int, R: int, L: int) -> int:
    """Maximum work a task with one carry-in job executes in a window of
    length L, given response bound R of the interfering task.

    The carry-in job is pushed as late as legality allows (it completes R
    after its release), so at most C-1 of it can land beyond the periodic
    body. Requires C <= R <= D <= T for the interfering task.
    """
    body = max(L - C, 0)
    q = body // T
    return q * C + C + min(C - 1, max(0, body - q * T - (T - R)))


@njit(cache=True, nogil=True)
def _interference_lc(C, T, D, m, hp, hp_bounds, k, L):
    """Total interference bound on task k over a window of length L.

    Sums the no-carry-in terms of all higher-priority tasks plus the m-1
    largest (carry-in minus no-carry-in) differences. Each term is capped
    at L - C_k + 1, the most any single task can delay k within the window.
    Carry-in response bounds are clamped to the task deadline, which only
    matters for tasks that already failed their own bound.
    """
    cap = L - C[k] + 1
    total = 0
    n_hp = len(hp)
    diffs = np.zeros(n_hp, dtype=np.int64)
    for j in range(n_hp):
        i = hp[j]
        nc = workload_nc(C[i], T[i], L)
        i_nc = min(nc, cap)
        total += i_nc
        if m > 1:
            r_ci = min(hp_bounds[j], D[i])
            ci = workload_ci(C[i], T[i], r_ci, L)
            i_ci = min(max(ci, nc), cap)
            diffs[j] = i_ci - i_nc
    if m > 1:
        # add the m-1 largest differences (ties resolved by lower id, which
        # cannot change the sum)
        take = min(m - 1, n_hp)
        for _ in range(take):
            best = -1
            best_v = -1
            for j in range(n_hp):
                if diffs[j] > best_v:
                    best_v = diffs[j]
                    best = j
            total += best_v
            diffs[best] = -1
    return total


@njit(cache=True, nogil=True)
def _lc_bound(C, T, D, m, hp, hp_bounds, k):
    """Fixed point of R = C_k + floor(interference(R) / m) from R = C_k.

    Returns (bound, ok, monotone, iters); ok is False when the iterate
    first exceeds D_k, in which case `bound` is that exceeding value.
    """
    L = C[k]
    monotone = True
    iters = 0
    while True:
        iters += 1
        R = C[k] + _interference_lc(C, T, D, m, hp, hp_bounds, k, L) // m
        if R < L:
            monotone = False
        if R > D[k]:
            return R, False, monotone, iters
        if R == L:
            return L, True, monotone, iters
        L = R


@njit(cache=True, nogil=True)
def _uni_bound(C, T, D, hp, k):
    """Exact uniprocessor fixed point R = C_k + sum ceil(R/T_i) C_i."""
    L = C[k]
    monotone = True
    iters = 0
    while True:
        iters += 1
        R = C[k]
        for j in range(len(hp)):
            i = hp[j]
            R += ((L + T[i] - 1) // T[i]) * C[i]
        if R < L:
            monotone = False
        if R > D[k]:
            return R, False, monotone, iters
        if R == L:
            return L, True, monotone, iters
        L = R


@njit(cache=True, nogil=True)
def _da_bound(C, T, D, m, hp, k):
    """Single-shot deadline-window bound: carry-in uses D_i in place of R_i."""
    hp_bounds = np.empty(len(hp), dtype=np.int64)
    for j in range(len(hp)):
        hp_bounds[j] = D[hp[j]]
    return C[k] + _interference_lc(C, T, D, m, hp, hp_bounds, k, D[k]) // m


@njit(cache=True, nogil=True)
def _lc_bounds_for_order(C, T, D, m, order):
    """Fold _lc_bound over a full priority order.

    Returns (bounds, ok) indexed by task id. Carry-in of an already failed
    higher-priority task is evaluated at its deadline (see _interference_lc).
    """
    n = len(order)
    bounds = np.zeros(n, dtype=np.int64)
    ok = np.zeros(n, dtype=np.bool_)
    hp = np.empty(n, dtype=np.int64)
    hp_bounds = np.empty(n, dtype=np.int64)
    for pos in range(n):
        k = order[pos]
        for j in range(pos):
            hp[j] = order[j]
            hp_bounds[j] = bounds[order[j]]
        b, passed, _, _ = _lc_bound(C, T, D, m, hp[:pos], hp_bounds[:pos], k)
        bounds[k] = b
        ok[k] = passed
    return bounds, ok


def task_arrays(ts: TaskSet) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(C, T, D) int64 arrays indexed by task id, for the kernels."""
    C = np.array([t.C for t in ts.tasks], dtype=np.int64)
    T = np.array([t.T for t in ts.tasks], dtype=np.int64)
    D = np.array([t.D for t in ts.tasks], dtype=np.int64)
    return C, T, D


@dataclass(frozen=True)
class TestVerdict:
    """Outcome of one schedulability test on one priority order.

    per_task_ok and response_bound are indexed by task id. response_bound
    is meaningful where per_task_ok holds, or as the first iterate beyond
    the deadline where it does not.
    """

    test_name: str
    per_task_ok: tuple
    response_bound: tuple
    schedulable: bool

    @classmethod
    def build(cls, test_name, per_task_ok, response_bound):
        per_task_ok = tuple(bool(x) for x in per_task_ok)
        response_bound = tuple(int(x) for x in response_bound)
        return cls(test_name, per_task_ok, response_bound, all(per_task_ok))


def rta_uniprocessor(ts: TaskSet, order: PriorityOrder) -> TestVerdict:
    """Exact response-time analysis for m = 1, constrained deadlines."""
    if ts.m != 1:
        raise ValueError(f"uniprocessor analysis requires m=1, got m={ts.m}")
    check_order(ts.n, order)
    C, T, D = task_arrays(ts)
    bounds = np.zeros(ts.n, dtype=np.int64)
    ok = np.zeros(ts.n, dtype=np.bool_)
    order_arr = np.asarray(order, dtype=np.int64)
    for pos, k in enumerate(order):
        b, passed, _, _ = _uni_bound(C, T, D, order_arr[:pos], k)
        bounds[k] = b
        ok[k] = passed
    return TestVerdict.build(RTA_UNI, ok, bounds)


def rta_lc(ts: TaskSet, order: PriorityOrder) -> TestVerdict:
    """Global limited-carry-in response-time analysis (sufficient only)."""
    check_order(ts.n, order)
    C, T, D = task_arrays(ts)
    bounds, ok = _lc_bounds_for_order(C, T, D, ts.m, np.asarray(order, dtype=np.int64))
    return TestVerdict.build(RTA_LC, ok, bounds)


def da_lc(ts: TaskSet, hp_set: Iterable[int], k: int) -> bool:
    """Deadline-window variant of the limited-carry-in test.

    Depends only on the set of higher-priority tasks (carry-in is evaluated
    at deadlines, not response bounds), which makes it compatible with
    Audsley's lowest-first priority assignment.
    """
    hp = sorted(set(hp_set))
    if k in hp:
        raise ValueError(f"task {k} cannot be in its own higher-priority set")
    C, T, D = task_arrays(ts)
    bound = _da_bound(C, T, D, ts.m, np.asarray(hp, dtype=np.int64), k)
    return bool(bound <= D[k])


@dataclass
class PartialState:
    """Evaluation state of a priority-order prefix.

    placed, bounds and flags stay aligned: bounds[j] is the response bound
    of placed[j] computed with placed[:j] as its higher-priority set.
    """

    ts: TaskSet
    placed: list
    bounds: list
    flags: list


def new_partial_state(ts: TaskSet) -> PartialState:
    return PartialState(ts=ts, placed=[], bounds=[], flags=[])


def rta_lc_incremental(state: PartialState, next_id: int):
    """Place `next_id` below the current prefix and evaluate its bound.

    Returns (state, step_ok). Folding a full order through this function
    reproduces rta_lc exactly (same flags, same bounds).
    """
    if next_id in state.placed:
        raise ValueError(f"task {next_id} already placed")
    if not 0 <= next_id < state.ts.n:
        raise ValueError(f"task {next_id} out of range")
    C, T, D = task_arrays(state.ts)
    hp = np.asarray(state.placed, dtype=np.int64)
    hp_bounds = np.asarray(state.bounds, dtype=np.int64)
    b, passed, _, _ = _lc_bound(C, T, D, state.ts.m, hp, hp_bounds, next_id)
    state.placed.append(next_id)
    state.bounds.append(int(b))
    state.flags.append(bool(passed))
    return state, bool(passed)
