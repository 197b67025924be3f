"""Discrete-event kernel: event queue, clock, random streams, replication plan."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Iterable

import numpy as np


class SimulationError(RuntimeError):
    pass


class EmptyWindow(ValueError):
    """A KPI was requested over a window with nothing in it."""


class EventKind(IntEnum):
    PALLET_ARRIVAL = 0
    WAVE_RELEASE = 1
    TRUCK_FREE = 2
    TASK_COMPLETE = 3
    END_OF_DAY = 4
    SAMPLE = 5


@dataclass(frozen=True, order=True)
class Event:
    time: float
    sequence: int
    kind: EventKind
    payload: Any = None


class EventQueue:
    """Time-ordered queue; equal times leave in scheduling order."""

    def __init__(self, start: float = 0.0):
        self._heap = []
        self._seq = 0
        self.clock = start

    def __len__(self):
        return len(self._heap)

    def schedule(self, time: float, kind: EventKind, payload: Any = None) -> Event:
        if time < self.clock:
            raise SimulationError(f"cannot schedule {kind.name} at {time} before clock {self.clock}")
        ev = Event(time, self._seq, kind, payload)
        self._seq += 1
        heapq.heappush(self._heap, (time, ev.sequence, kind, payload))
        return ev

    def pop(self) -> Event:
        if not self._heap:
            raise SimulationError("pop from an empty event queue")
        time, seq, kind, payload = heapq.heappop(self._heap)
        self.clock = time
        return Event(time, seq, kind, payload)

    def peek_time(self) -> float:
        return self._heap[0][0] if self._heap else float("inf")


def schedule(queue: EventQueue, event: Event) -> Event:
    """Enqueue a prepared event; its sequence number is reassigned."""
    return queue.schedule(event.time, event.kind, event.payload)


STREAM_NAMES = (
    "arrivals", "classes", "collars", "order_sizes", "order_skus", "policy_ties",
    "formats", "skus", "initial_stock",
)


class RngStreams:
    """Independent named generators for one (master seed, replication).

    Each stream is seeded from (master_seed, replication, stream index), so a
    stream's draws do not depend on which other streams a scenario consumes.
    """

    def __init__(self, master_seed: int, replication: int = 0):
        self.master_seed = int(master_seed)
        self.replication = int(replication)
        self._streams = {}

    def __getitem__(self, name: str) -> np.random.Generator:
        if name not in self._streams:
            if name not in STREAM_NAMES:
                raise KeyError(f"unknown random stream {name!r}")
            seq = np.random.SeedSequence(
                self.master_seed, spawn_key=(self.replication, STREAM_NAMES.index(name)))
            self._streams[name] = np.random.Generator(np.random.PCG64(seq))
        return self._streams[name]

    def __getattr__(self, name: str) -> np.random.Generator:
        if name.startswith("_"):
            raise AttributeError(name)
        try:
            return self[name]
        except KeyError as exc:
            raise AttributeError(name) from exc


@dataclass(frozen=True)
class ReplicationPlan:
    n_days: int = 80
    warm_up_days: int = 5
    day_length: float = 57_600.0
    replications: int = 10

    def __post_init__(self):
        if self.n_days < 0 or self.warm_up_days < 0:
            raise ValueError("day counts must be non-negative")
        if self.day_length <= 0 or self.replications < 1:
            raise ValueError("day_length must be positive and replications at least 1")

    @property
    def warm_up(self) -> float:
        return self.warm_up_days * self.day_length

    @property
    def horizon(self) -> float:
        return (self.warm_up_days + self.n_days) * self.day_length


def write_event_log(records: Iterable, path) -> None:
    """Newline-delimited JSON, one record per line: time, kind, entity fields."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(_record_dict(rec), separators=(",", ":"), default=_plain) + "\n")


def _plain(v):
    # numpy scalars leak into records from array lookups
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"cannot serialise {type(v).__name__} in the event log")


LOG_FIELDS = {
    "arrival": ("pallet", "sku", "class", "collars", "format"),
    "initial": ("pallet", "sku", "class", "collars", "slot"),
    "store": ("pallet", "slot", "truck"),
    "release": ("order", "wave", "pallets"),
    "pick": ("pallet", "slot", "order", "truck"),
    "relocate": ("pallet", "from_slot", "to_slot", "truck"),
    "stage": ("pallet", "order", "truck"),
    "complete": ("order",),
    "busy": ("truck", "role", "collars"),
    "free": ("truck", "role"),
    "day": ("day",),
    "diagnostic": ("message",),
}


def _record_dict(rec) -> dict:
    time, kind, *fields = rec
    names = LOG_FIELDS.get(kind, tuple(f"f{i}" for i in range(len(fields))))
    out = {"time": time, "kind": kind}
    out.update(zip(names, fields))
    return out


def run(scenario, plan: ReplicationPlan | None = None, seed: int | None = None,
        log: bool = True, replications: Iterable[int] | None = None) -> list:
    """Run every replication of ``scenario``; returns one result per replication.

    Each result carries the raw event log (when ``log``), per-order records,
    truck usage intervals and any diagnostics raised on the way.
    """
    from .processes import simulate_replication

    plan = plan or scenario.plan
    seed = scenario.master_seed if seed is None else seed
    reps = range(plan.replications) if replications is None else replications
    return [simulate_replication(scenario, plan, seed, r, log=log) for r in reps]
