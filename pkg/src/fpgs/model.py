"""Task and taskset data model, validation, and JSON (de)serialization."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional


@dataclass(frozen=True)
class Task:
    """One periodic task in integer time.

    Attributes:
        id: index of the task within its taskset (0-based).
        C: worst-case execution time in ticks (>= 1).
        T: minimum inter-arrival time in ticks (>= 1).
        D: relative deadline in ticks; constrained model, C <= D <= T.
    """

    id: int
    C: int
    T: int
    D: int

    @property
    def utilization(self) -> Fraction:
        return Fraction(self.C, self.T)

    @property
    def density(self) -> Fraction:
        return Fraction(self.C, min(self.D, self.T))


@dataclass(frozen=True)
class TaskSet:
    """A set of tasks plus the platform they run on.

    Attributes:
        tasks: tasks ordered by id (ids 0..N-1).
        m: number of identical processors (>= 1).
        seed: generator seed this set was drawn from, if any.
        target_u: requested total utilization, if generated.
    """

    tasks: tuple[Task, ...]
    m: int
    seed: Optional[int] = None
    target_u: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))

    def __len__(self) -> int:
        return len(self.tasks)

    def __iter__(self) -> Iterator[Task]:
        return iter(self.tasks)

    def __getitem__(self, i: int) -> Task:
        return self.tasks[i]

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def utilization(self) -> Fraction:
        return sum((t.utilization for t in self.tasks), Fraction(0))


# A priority order is a permutation of task ids; position 0 is the highest
# priority. Plain lists keep the hot paths and the wire format simple.
PriorityOrder = List[int]


def validate(ts: TaskSet) -> list[str]:
    """Return every invariant violation of `ts`; an empty list means valid.

    Violations are data, not faults: callers that must reject invalid sets
    raise on a non-empty result (see `load`).
    """
    problems = []
    if ts.m < 1:
        problems.append(f"m {ts.m} < 1")
    ids = [t.id for t in ts.tasks]
    if ids != list(range(len(ids))):
        problems.append(f"task ids {ids} are not 0..{len(ids) - 1}")
    for i, t in enumerate(ts.tasks):
        if t.C < 1:
            problems.append(f"task {i}: C < 1")
        if t.T < 1:
            problems.append(f"task {i}: T < 1")
        if t.D < 1:
            problems.append(f"task {i}: D < 1")
        if t.C >= 1 and t.D >= 1 and t.C > t.D:
            problems.append(f"task {i}: C > D")
        if t.D >= 1 and t.T >= 1 and t.D > t.T:
            problems.append(f"task {i}: D > T")
    if not any(t.T < 1 for t in ts.tasks) and ts.m >= 1:
        u = sum((Fraction(t.C, t.T) for t in ts.tasks), Fraction(0))
        if u > ts.m:
            problems.append(f"utilization {u} > m={ts.m}")
    return problems


def check_order(n: int, order: PriorityOrder) -> None:
    """Raise ValueError unless `order` is a permutation of 0..n-1."""
    if len(order) != n or sorted(order) != list(range(n)):
        raise ValueError(f"order {order} is not a permutation of 0..{n - 1}")


def to_dict(ts: TaskSet) -> dict:
    return {
        "m": ts.m,
        "seed": ts.seed,
        "target_u": ts.target_u,
        "tasks": [{"id": t.id, "C": t.C, "T": t.T, "D": t.D} for t in ts.tasks],
    }


def from_dict(obj: dict) -> TaskSet:
    """Build a TaskSet from its JSON dict; raises ValueError on bad input."""
    if not isinstance(obj, dict):
        raise ValueError("taskset must be a JSON object")
    for key in ("m", "tasks"):
        if key not in obj:
            raise ValueError(f"taskset object missing key {key!r}")
    try:
        tasks = [Task(id=int(t["id"]), C=int(t["C"]), T=int(t["T"]), D=int(t["D"]))
                 for t in obj["tasks"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed task entry: {exc}") from exc
    ts = TaskSet(tasks=tasks, m=int(obj["m"]),
                 seed=obj.get("seed"), target_u=obj.get("target_u"))
    problems = validate(ts)
    if problems:
        raise ValueError("invalid taskset: " + "; ".join(problems))
    return ts


def save(ts: TaskSet, path) -> None:
    """Write one taskset as a single JSON object."""
    with open(path, "w") as fh:
        json.dump(to_dict(ts), fh)
        fh.write("\n")


def load(path) -> TaskSet:
    """Read one taskset; raises ValueError on parse or invariant failure."""
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"cannot parse {path}: {exc}") from exc
    return from_dict(obj)


def save_many(tasksets: Iterable[TaskSet], path) -> None:
    """Write tasksets as line-delimited JSON, one object per line."""
    with open(path, "w") as fh:
        for ts in tasksets:
            fh.write(json.dumps(to_dict(ts)))
            fh.write("\n")


def load_many(path) -> list[TaskSet]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: cannot parse: {exc}") from exc
            out.append(from_dict(obj))
    return out


def taskset_hash(ts: TaskSet) -> str:
    """Stable content hash of the scheduling-relevant fields (m and tasks).

    Used to key externally produced priority orders back to their taskset.
    The hash covers m and the (C, T, D) triples in id order; seed and
    target_u are provenance, not content.
    """
    canon = {"m": ts.m, "tasks": [[t.C, t.T, t.D] for t in ts.tasks]}
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
