"""Metric extraction and statistical summaries over simulation traces.

A MetricSpec names one observable; extract() turns one trace into (key, value)
samples for it and summarize() folds samples from a whole campaign into a
Report.  Time-valued samples are integer ticks so they can be compared exactly
against formal bounds; summaries are floats in time units.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .model import Platform, SystemModel
from .timebase import SCALE

if TYPE_CHECKING:  # traces are consumed structurally; no runtime import cycle
    from .simulator import TimedTrace

KINDS = ("job_latency", "makespan", "utilization", "energy", "overflow_count", "event_pair")

# metrics whose raw samples are tick counts and whose summaries are in units
TIME_KINDS = ("job_latency", "makespan", "event_pair")


class MissingPowerEntry(LookupError):
    pass


@dataclass(frozen=True)
class MetricSpec:
    kind: str
    name: str = ""  # defaults to kind
    job: str = ""  # job_latency: restrict to one job type
    resource: str = ""  # utilization: restrict to one resource
    first: tuple = ()  # event_pair anchors: (event kind, task id)
    second: tuple = ()

    @property
    def label(self) -> str:
        return self.name or self.kind


def default_metrics(model: SystemModel) -> list[MetricSpec]:
    """The standard campaign set: makespan, per-job latency, utilization per
    powered-on processor, energy, overflow count."""
    out = [MetricSpec("makespan")]
    for j in model.job_types:
        out.append(MetricSpec("job_latency", name=f"job_latency[{j.name}]", job=j.name))
    for pe in model.platform.active_processors():
        out.append(MetricSpec("utilization", name=f"utilization[{pe.id}]", resource=pe.id))
    out.append(MetricSpec("energy"))
    out.append(MetricSpec("overflow_count"))
    return out


def busy_intervals(trace: TimedTrace) -> dict[str, list[tuple[int, int]]]:
    """Start/end pairs per resource; rejects overlapping or dangling pairs."""
    out: dict[str, list[tuple[int, int]]] = {}
    open_at: dict[str, tuple] = {}
    for e in trace.events:
        if e.kind == "start":
            if e.resource in open_at:
                raise ValueError(f"{e.resource} starts while busy at {e.time}")
            open_at[e.resource] = (e.instance, e.task, e.time)
        elif e.kind == "end":
            got = open_at.pop(e.resource, None)
            if got is None or got[:2] != (e.instance, e.task):
                raise ValueError(f"unmatched end on {e.resource} at {e.time}")
            out.setdefault(e.resource, []).append((got[2], e.time))
    if open_at:
        raise ValueError(f"dangling starts: {sorted(open_at)}")
    return out


def utilization(trace: TimedTrace) -> dict[str, float]:
    """Busy fraction of the horizon per resource."""
    if trace.horizon <= 0:
        return {r: 0.0 for r in busy_intervals(trace)}
    return {
        r: sum(e - s for s, e in iv) / trace.horizon
        for r, iv in busy_intervals(trace).items()
    }


def energy(trace: TimedTrace, platform: Platform) -> float:
    """Total energy over the horizon, in watt x time units.

    A powered-on processor draws its lowest-frequency static power while idle
    and static+dynamic at the running frequency while busy; interconnects draw
    static power for the whole horizon plus dynamic power while transferring.
    """
    horizon = trace.horizon / SCALE
    busy: dict[str, float] = {}
    total = 0.0
    for res, iv in busy_intervals(trace).items():
        busy[res] = sum(en - st for st, en in iv) / SCALE

    ic_ids = {ic.id for ic in platform.interconnects}
    # active work, priced per interval at the frequency it ran at
    per_start: dict[str, list] = {}
    for e in trace.events:
        if e.kind == "start" and e.resource not in ic_ids:
            per_start.setdefault(e.resource, []).append(e)
    for res, iv in busy_intervals(trace).items():
        if res in ic_ids:
            continue
        proc = platform.processor(res)
        starts = per_start.get(res, [])
        for (st, en), ev in zip(iv, starts):
            f = ev.frequency
            if f not in proc.power:
                raise MissingPowerEntry(f"{res} has no power entry for {f}")
            stat, dyn = proc.power[f]
            total += (stat + dyn) * (en - st) / SCALE

    for proc in platform.processors:
        if not proc.initially_on:
            continue
        stat_idle, _ = proc.power[proc.min_frequency()]
        total += stat_idle * max(horizon - busy.get(proc.id, 0.0), 0.0)

    for ic in platform.interconnects:
        stat, dyn = ic.power
        total += stat * horizon + dyn * busy.get(ic.id, 0.0)
    return total


def _arrivals(trace: TimedTrace) -> dict[int, tuple[str, int]]:
    return {e.instance: (e.job, e.time) for e in trace.events if e.kind == "arrival"}


def _last_ends(trace: TimedTrace) -> dict[int, int]:
    out: dict[int, int] = {}
    for e in trace.events:
        if e.kind == "end":
            out[e.instance] = max(out.get(e.instance, e.time), e.time)
    return out


def extract(trace: TimedTrace, spec: MetricSpec, platform: Platform | None = None):
    """Samples for one metric from one trace, as (key, value) pairs.

    Time values are integer ticks; utilization and energy are floats;
    overflow_count is an integer.
    """
    if spec.kind == "job_latency":
        arr, ends = _arrivals(trace), _last_ends(trace)
        out = []
        for inst in sorted(ends):
            job, t0 = arr[inst]
            if spec.job and job != spec.job:
                continue
            out.append((str(inst), ends[inst] - t0))
        return out
    if spec.kind == "makespan":
        arr, ends = _arrivals(trace), _last_ends(trace)
        if not ends:
            return []
        t0 = min(t for _, t in arr.values())
        return [("", max(ends.values()) - t0)]
    if spec.kind == "utilization":
        us = utilization(trace)
        if spec.resource:
            return [(spec.resource, us.get(spec.resource, 0.0))]
        return sorted(us.items())
    if spec.kind == "energy":
        if platform is None:
            raise ValueError("energy metric needs the platform")
        return [("", energy(trace, platform))]
    if spec.kind == "overflow_count":
        return [("", trace.overflow_count)]
    if spec.kind == "event_pair":
        ka, ta = spec.first
        kb, tb = spec.second
        first: dict[int, int] = {}
        out = []
        for e in trace.events:
            if e.kind == ka and e.task == ta and e.instance not in first:
                first[e.instance] = e.time
        for e in trace.events:
            if e.kind == kb and e.task == tb and e.instance in first:
                out.append((str(e.instance), e.time - first.pop(e.instance)))
        return out
    raise ValueError(f"unknown metric kind {spec.kind}")


@dataclass
class Report:
    count: int
    mean: float
    std: float
    min: float
    max: float
    median: float
    p95: float
    histogram: list = field(default_factory=list)  # (lo, hi, count) rows

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "median": self.median,
            "p95": self.p95,
            "histogram": [list(row) for row in self.histogram],
        }


def histogram_csv(report: Report) -> str:
    """Two-column plot-ready form: left bin edge, count."""
    lines = ["bin_left,count"]
    for lo, _hi, c in report.histogram:
        lines.append(f"{lo!r},{c}")
    return "\n".join(lines) + "\n"


def summarize(values, bins: int = 20) -> Report:
    """Sample statistics; std is the n-1 sample deviation, p95 nearest-rank."""
    vals = sorted(float(v) for v in values)
    n = len(vals)
    if n == 0:
        return Report(0, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan, [])
    mean = statistics.fmean(vals)
    std = statistics.stdev(vals) if n >= 2 else 0.0
    p95 = vals[max(math.ceil(0.95 * n) - 1, 0)]
    lo, hi = vals[0], vals[-1]
    hist = []
    if hi > lo:
        width = (hi - lo) / bins
        counts = [0] * bins
        for v in vals:
            idx = min(int((v - lo) / width), bins - 1)
            counts[idx] += 1
        hist = [(lo + i * width, lo + (i + 1) * width, c) for i, c in enumerate(counts)]
    else:
        hist = [(lo, hi, n)]
    return Report(n, mean, std, lo, hi, statistics.median(vals), p95, hist)
