"""Time maps and extended scheduling trajectories.

A :class:`TimeMap` lists which shifts (DT) or derivative orders (CT) of each
scheduling channel a parameter-varying matrix may depend on. Extending a
sampled scheduling trajectory with a time map stacks those shifted or
differentiated copies column-wise.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class TimeDomain(enum.Enum):
    DT = "dt"
    CT = "ct"

    @classmethod
    def parse(cls, value: "TimeDomain | str") -> "TimeDomain":
        if isinstance(value, TimeDomain):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown time domain {value!r}; use 'dt' or 'ct'") from None


class DomainMismatchError(ValueError):
    """Raised when CT and DT objects are combined."""


@dataclass(frozen=True)
class TimeMap:
    """Dynamic scheduling dependence.

    Column ``j`` of the extended signal is ``(names[j % n_p], orders[j // n_p])``:
    orders outer, channels inner, both ascending.
    """

    orders: tuple[int, ...]
    domain: TimeDomain = TimeDomain.DT
    names: tuple[str, ...] = ("p",)
    # column order as the user declared it; used to resolve basis indices
    declared: tuple[tuple[str, int], ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if len(self.orders) == 0:
            raise ValueError("time map needs at least one order")
        if list(self.orders) != sorted(set(self.orders)):
            raise ValueError("orders must be unique and ascending; use make_timemap")
        if self.domain is TimeDomain.CT and self.orders[0] < 0:
            raise ValueError("CT derivative orders must be non-negative")
        if len(self.names) == 0 or any(not n for n in self.names):
            raise ValueError("channel names must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate channel names in {self.names}")
        if list(self.names) != sorted(self.names):
            raise ValueError("channel names must be sorted; use make_timemap")

    @property
    def dim(self) -> int:
        return len(self.orders) * len(self.names)

    @property
    def columns(self) -> list[tuple[str, int]]:
        return [(n, o) for o in self.orders for n in self.names]

    @property
    def declared_columns(self) -> list[tuple[str, int]]:
        return list(self.declared) if self.declared else self.columns

    def index(self, name: str, order: int) -> int:
        try:
            return self.orders.index(order) * len(self.names) + self.names.index(name)
        except ValueError:
            raise KeyError(f"({name!r}, {order}) is not part of {self}") from None

    def contains(self, name: str, order: int) -> bool:
        return name in self.names and order in self.orders

    @property
    def max_lag(self) -> int:
        """Number of past samples required (DT), zero if none."""
        return max(0, -self.orders[0]) if self.domain is TimeDomain.DT else 0

    @property
    def max_lead(self) -> int:
        return max(0, self.orders[-1]) if self.domain is TimeDomain.DT else 0


def make_timemap(
    orders: Iterable[int],
    domain: TimeDomain | str = TimeDomain.DT,
    names: Sequence[str] | str | None = None,
) -> TimeMap:
    """Build a canonical time map, e.g. ``make_timemap([0, -1], "dt")``."""
    orders = [int(o) for o in orders]
    if not orders:
        raise ValueError("time map needs at least one order")
    domain = TimeDomain.parse(domain)
    if names is None:
        names = ["p"]
    elif isinstance(names, str):
        names = [names]
    names = list(names)
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate channel names in {names}")
    if domain is TimeDomain.CT and min(orders) < 0:
        raise ValueError("CT derivative orders must be non-negative")
    declared = tuple((n, o) for o in dict.fromkeys(orders) for n in names)
    return TimeMap(tuple(sorted(set(orders))), domain, tuple(sorted(names)), declared)


def merge_timemaps(a: TimeMap, b: TimeMap) -> tuple[TimeMap, np.ndarray, np.ndarray]:
    """Union of two time maps.

    Returns the merged map and, for each input, an integer array mapping its
    columns onto columns of the merged map.
    """
    if a.domain is not b.domain:
        raise DomainMismatchError(f"cannot merge {a.domain.value} and {b.domain.value} time maps")
    tm = TimeMap(
        tuple(sorted(set(a.orders) | set(b.orders))),
        a.domain,
        tuple(sorted(set(a.names) | set(b.names))),
    )
    idx_a = np.array([tm.index(n, o) for n, o in a.columns], dtype=int)
    idx_b = np.array([tm.index(n, o) for n, o in b.columns], dtype=int)
    return tm, idx_a, idx_b


def restrict(rho: np.ndarray, source: TimeMap, target: TimeMap) -> np.ndarray:
    """Select the columns of ``target`` out of an extended sample laid out per ``source``."""
    idx = [source.index(n, o) for n, o in target.columns]
    return np.asarray(rho)[..., idx]


@dataclass(frozen=True)
class SchedulingTrajectory:
    samples: np.ndarray
    channel_names: tuple[str, ...] = ("p",)
    sample_time: float = 1.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or s.shape[0] < 1:
            raise ValueError("scheduling samples must be an N x n_p array with N >= 1")
        names = (self.channel_names,) if isinstance(self.channel_names, str) else tuple(self.channel_names)
        if s.shape[1] != len(names):
            raise ValueError(f"{s.shape[1]} columns but {len(names)} channel names")
        if not np.all(np.isfinite(s)):
            raise ValueError("scheduling samples must be finite")
        if not self.sample_time > 0:
            raise ValueError("sample time must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "channel_names", names)

    def __len__(self):
        return self.samples.shape[0]

    def channel(self, name: str) -> np.ndarray:
        try:
            return self.samples[:, self.channel_names.index(name)]
        except ValueError:
            raise KeyError(f"no scheduling channel {name!r} in {self.channel_names}") from None


def as_trajectory(p, names: Sequence[str] | None = None, sample_time: float = 1.0) -> SchedulingTrajectory:
    """Accept a trajectory or a bare array (channels default to ``p``, ``p1``...)."""
    if isinstance(p, SchedulingTrajectory):
        return p
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if names is None:
        names = ("p",) if arr.shape[1] == 1 else tuple(f"p{i + 1}" for i in range(arr.shape[1]))
    return SchedulingTrajectory(arr, tuple(names), sample_time)


@dataclass(frozen=True)
class ExtendedTrajectory:
    samples: np.ndarray
    source_map: tuple[tuple[str, int], ...]
    valid_range: tuple[int, int]  # half-open [start, stop) into the source trajectory
    timemap: TimeMap = field(repr=False, default=None)


def _derivative(x: np.ndarray, dt: float, k: int) -> np.ndarray:
    for _ in range(k):
        x = np.gradient(x, dt)
    return x


def extend_trajectory(tm: TimeMap, p, boundary: str = "truncate") -> ExtendedTrajectory:
    """Stack shifted (DT) or differentiated (CT) scheduling samples.

    DT rows correspond to instants ``t`` for which every ``t + order`` lies in
    the record (``boundary="truncate"``). ``boundary="hold"`` instead keeps all
    ``N`` rows and clamps out-of-record shifts to the first/last sample; the
    simulators use this, corresponding to a system at rest before the record.
    CT derivatives are central differences with one-sided end points.
    """
    p = as_trajectory(p)
    n = len(p)
    cols = tm.columns
    chans = {name: p.channel(name) for name in tm.names}
    if tm.domain is TimeDomain.CT:
        out = np.column_stack([_derivative(chans[name], p.sample_time, o) for name, o in cols])
        return ExtendedTrajectory(out, tuple(cols), (0, n), tm)

    if boundary == "hold":
        t = np.arange(n)
        out = np.column_stack([chans[name][np.clip(t + o, 0, n - 1)] for name, o in cols])
        return ExtendedTrajectory(out, tuple(cols), (0, n), tm)
    if boundary != "truncate":
        raise ValueError(f"unknown boundary policy {boundary!r}")
    start = tm.max_lag
    stop = n - tm.max_lead
    if stop - start < 1:
        raise ValueError(
            f"trajectory of length {n} too short for shifts {tm.orders}"
        )
    t = np.arange(start, stop)
    out = np.column_stack([chans[name][t + o] for name, o in cols])
    return ExtendedTrajectory(out, tuple(cols), (start, stop), tm)


def read_scheduling_csv(path: str | Path) -> SchedulingTrajectory:
    """Load ``t,<name1>,<name2>,...`` CSV; sample time from the ``t`` column."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0].strip() != "t":
        raise ValueError("first CSV column must be 't'")
    data = np.array([[float(v) for v in r] for r in body if r], dtype=float)
    ts = float(data[1, 0] - data[0, 0]) if len(data) > 1 else 1.0
    return SchedulingTrajectory(data[:, 1:], tuple(h.strip() for h in header[1:]), ts)


def write_scheduling_csv(path: str | Path, p: SchedulingTrajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *p.channel_names])
        for i, row in enumerate(p.samples):
            w.writerow([repr(i * p.sample_time), *map(repr, row.tolist())])
