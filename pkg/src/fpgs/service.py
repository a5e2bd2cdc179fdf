"""Line-delimited JSON evaluation service.

Long-lived process an external trainer talks to: it holds tasksets and
answers permutation-reward queries, heuristic orders, and generation
requests. One JSON object per line in both directions; a batch request is
answered with one reply line per item, in request order.

Messages:
    {"type": "load", "tasksets": [<taskset>, ...]}    -> {"ok": N}
    {"type": "eval", "id": i, "order": [...]}         -> reward reply
    {"type": "eval_batch", "items": [{"id","order"}]} -> one reply per item
    {"type": "heuristic", "id": i, "name": "DM"}      -> {"order": [...]}
    {"type": "gen", "cfg": <genconfig>, "count": k}   -> {"ids": [...]}
    {"type": "shutdown"}                              -> process exits 0

A reward reply is {"id", "per_task", "reward", "schedulable"}: per_task
holds the 0/1 per-step outcomes in decode order, reward their mean, and
schedulable is true iff every step passed (equivalently reward == 1).
Malformed input produces {"error": msg} and the session stays up.
"""

from __future__ import annotations

import json
import socketserver
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from .generate import GenConfig, gen_tasksets
from .model import TaskSet, from_dict
from .assign import HEURISTICS, heuristic_order
from .rta import _lc_bounds_for_order, task_arrays


class TasksetStore:
    """Appendable taskset registry shared by all sessions of one process."""

    def __init__(self):
        self._tasksets: List[TaskSet] = []
        self._lock = threading.Lock()

    def add(self, tasksets: List[TaskSet]) -> List[int]:
        with self._lock:
            base = len(self._tasksets)
            self._tasksets.extend(tasksets)
            return list(range(base, len(self._tasksets)))

    def get(self, ts_id) -> TaskSet:
        if not isinstance(ts_id, int) or isinstance(ts_id, bool):
            raise ValueError(f"id must be an integer, got {ts_id!r}")
        with self._lock:
            if not 0 <= ts_id < len(self._tasksets):
                raise ValueError(f"unknown taskset id {ts_id}")
            return self._tasksets[ts_id]


def evaluate_order(ts: TaskSet, order) -> dict:
    """Per-step pass flags (decode order), mean reward, schedulable flag."""
    if (not isinstance(order, list) or len(order) != ts.n
            or sorted(order) != list(range(ts.n))):
        raise ValueError(f"order is not a permutation of 0..{ts.n - 1}")
    C, T, D = task_arrays(ts)
    _, ok = _lc_bounds_for_order(C, T, D, ts.m, np.asarray(order, dtype=np.int64))
    per_task = [int(ok[k]) for k in order]
    return {
        "per_task": per_task,
        "reward": sum(per_task) / ts.n,
        "schedulable": bool(all(per_task)),
    }


def _parse_gen_config(obj: dict) -> GenConfig:
    try:
        return GenConfig(
            n=int(obj["n"]),
            m=int(obj["m"]),
            target_u=float(obj["target_u"]),
            period_range=tuple(obj.get("period_range", (10, 1000))),
            deadline_model=obj.get("deadline_model", "implicit"),
            seed=int(obj.get("seed", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed generator config: {exc}") from exc


class Session:
    """One request stream against a shared store."""

    def __init__(self, store: TasksetStore, jobs: int = 1):
        self.store = store
        self.jobs = max(1, jobs)

    def handle(self, msg: dict) -> list[dict]:
        """Replies for one message, one dict per output line."""
        kind = msg.get("type")
        if kind == "load":
            tasksets = [from_dict(obj) for obj in msg["tasksets"]]
            self.store.add(tasksets)
            return [{"ok": len(tasksets)}]
        if kind == "eval":
            return [self._eval_item(msg)]
        if kind == "eval_batch":
            items = msg["items"]
            if not isinstance(items, list):
                raise ValueError("items must be a list")
            if self.jobs > 1 and len(items) > 1:
                with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                    return list(pool.map(self._eval_item, items))
            return [self._eval_item(item) for item in items]
        if kind == "heuristic":
            ts = self.store.get(msg["id"])
            name = msg.get("name")
            if name not in HEURISTICS:
                raise ValueError(f"unknown heuristic {name!r}")
            order = heuristic_order(ts, name, seed=msg.get("seed"))
            return [{"order": order}]
        if kind == "gen":
            cfg = _parse_gen_config(msg["cfg"])
            count = int(msg.get("count", 1))
            if count < 1:
                raise ValueError("count must be >= 1")
            ids = self.store.add(gen_tasksets(cfg, count))
            return [{"ids": ids}]
        raise ValueError(f"unknown message type {kind!r}")

    def _eval_item(self, item: dict) -> dict:
        try:
            ts = self.store.get(item["id"])
            reply = evaluate_order(ts, item["order"])
            reply["id"] = item["id"]
            return reply
        except (KeyError, TypeError) as exc:
            return {"error": f"malformed eval item: {exc}"}
        except ValueError as exc:
            return {"error": str(exc)}

    def handle_line(self, line: str) -> tuple[list[str], bool]:
        """(reply lines, shutdown flag) for one raw input line."""
        line = line.strip()
        if not line:
            return [], False
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return [json.dumps({"error": f"cannot parse message: {exc}"})], False
        if not isinstance(msg, dict):
            return [json.dumps({"error": "message must be a JSON object"})], False
        if msg.get("type") == "shutdown":
            return [], True
        try:
            replies = self.handle(msg)
        except (ValueError, KeyError, TypeError) as exc:
            replies = [{"error": str(exc)}]
        return [json.dumps(r) for r in replies], False


def serve_stdio(jobs: int = 1) -> int:
    """Serve one session over stdin/stdout until shutdown or EOF."""
    session = Session(TasksetStore(), jobs=jobs)
    for line in sys.stdin:
        replies, stop = session.handle_line(line)
        for r in replies:
            sys.stdout.write(r + "\n")
        sys.stdout.flush()
        if stop:
            return 0
    return 0


def serve_tcp(port: int, jobs: int = 1, host: str = "127.0.0.1") -> int:
    """Serve TCP sessions sharing one taskset store until a shutdown message."""
    store = TasksetStore()
    done = threading.Event()

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            session = Session(store, jobs=jobs)
            for raw in self.rfile:
                replies, stop = session.handle_line(raw.decode())
                for r in replies:
                    self.wfile.write((r + "\n").encode())
                self.wfile.flush()
                if stop:
                    done.set()
                    return

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server((host, port), Handler) as server:
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        done.wait()
        server.shutdown()
    return 0
