"""Intermittent-link timeline between the operator side and the remote side.

A schedule is pre-sampled for the whole trial horizon: alternating up/down
durations drawn from truncated Gaussians, starting with an up interval at
t = 0. Pre-sampling keeps trials reproducible for a given seed and makes
status queries a binary search.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Generator identity echoed into reports so runs can be reproduced elsewhere.
RNG_ID = "numpy.random.PCG64"

_MAX_REDRAWS = 10_000


class ChannelStatus(Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True, slots=True)
class ChannelParams:
    """Truncated-Gaussian up/down period parameters, seconds."""

    mean_up: float = 3.2
    std_up: float = 0.15
    mean_down: float = 0.8
    std_down: float = 0.1
    min_period: float = 0.05

    def __post_init__(self) -> None:
        if self.mean_up <= 0 or self.mean_down <= 0:
            raise ValueError("period means must be positive")
        if self.std_up < 0 or self.std_down < 0:
            raise ValueError("period stds must be nonnegative")
        if self.min_period <= 0:
            raise ValueError("min_period must be positive")


@dataclass(frozen=True, slots=True)
class Interval:
    start: float
    end: float
    status: ChannelStatus


@dataclass(frozen=True)
class OutageSchedule:
    """Contiguous alternating intervals covering [0, horizon), first one up."""

    intervals: tuple[Interval, ...]
    horizon: float
    _starts: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.intervals:
            raise ValueError("schedule must contain at least one interval")
        if self.intervals[0].start != 0.0 or self.intervals[0].status is not ChannelStatus.UP:
            raise ValueError("schedule must start at t=0 with an up interval")
        prev = self.intervals[0]
        for cur in self.intervals[1:]:
            if cur.start != prev.end or cur.status is prev.status:
                raise ValueError("intervals must be contiguous and alternate up/down")
            prev = cur
        if not math.isclose(prev.end, self.horizon, rel_tol=0, abs_tol=1e-12):
            raise ValueError("intervals must cover [0, horizon]")
        object.__setattr__(self, "_starts", tuple(iv.start for iv in self.intervals))


def _draw_duration(rng: np.random.Generator, mean: float, std: float, floor: float) -> float:
    """One period sample; redraw below the truncation floor."""
    if std == 0.0:
        if mean < floor:
            raise ValueError(f"degenerate period {mean} below truncation floor {floor}")
        return mean
    for _ in range(_MAX_REDRAWS):
        d = rng.normal(mean, std)
        if d >= floor:
            return d
    raise RuntimeError("exceeded redraw budget; period parameters sit almost entirely below the floor")


def generate_schedule(params: ChannelParams, horizon: float, seed: int) -> OutageSchedule:
    """Sample the alternating link timeline; deterministic per seed."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    intervals: list[Interval] = []
    t = 0.0
    status = ChannelStatus.UP
    while t < horizon:
        if status is ChannelStatus.UP:
            d = _draw_duration(rng, params.mean_up, params.std_up, params.min_period)
        else:
            d = _draw_duration(rng, params.mean_down, params.std_down, params.min_period)
        end = min(t + d, horizon)
        intervals.append(Interval(t, end, status))
        t = end
        status = ChannelStatus.DOWN if status is ChannelStatus.UP else ChannelStatus.UP
    return OutageSchedule(tuple(intervals), horizon)


def status_at(schedule: OutageSchedule, t: float) -> ChannelStatus:
    """Status of the interval containing t; interval starts are inclusive."""
    if not 0.0 <= t < schedule.horizon:
        raise ValueError(f"t={t} outside schedule horizon [0, {schedule.horizon})")
    idx = bisect_right(schedule._starts, t) - 1
    return schedule.intervals[idx].status


def outage_fraction(schedule: OutageSchedule) -> float:
    down = sum(iv.end - iv.start for iv in schedule.intervals if iv.status is ChannelStatus.DOWN)
    return down / schedule.horizon


def schedule_to_csv(schedule: OutageSchedule) -> str:
    """CSV dump `start,end,status`, one interval per row."""
    lines = ["start,end,status"]
    for iv in schedule.intervals:
        lines.append(f"{iv.start!r},{iv.end!r},{iv.status.value}")
    return "\n".join(lines) + "\n"
