"""Monte-Carlo discrete-event simulation of one system model.

Each run draws arrival times and task durations uniformly from the model's
windows and replays the deployment's scheduling policy exactly as the formal
engine encodes it (same policy kernel, same tick arithmetic), so every
simulated completion time falls inside the formally derived bounds.

Event processing is strictly sequential and fully deterministic: heap order is
(time, rank, tiebreak) with ends before arrivals before starts at equal time,
and each processed event is followed by a dispatch cascade that fires every
start the policy allows before the next event is popped.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .generators import sample_arrivals
from .metrics import MetricSpec, Report, TIME_KINDS, default_metrics, extract, summarize
from .model import COMMUNICATION, SystemModel, expand_comm_tasks, task_duration
from .rng import SplitMix64, stream_for
from .schedulers import (
    TaskRef,
    apply_dispatch,
    empty_state,
    enqueue,
    next_dispatch,
    ready_order,
    release,
)
from .timebase import SCALE, format_ticks_fixed

RANK = {"end": 0, "arrival": 1, "overflow": 2, "freq_set": 3, "start": 4}


@dataclass(frozen=True)
class Event:
    time: int
    kind: str
    instance: int = -1
    job: str = ""
    task: str = ""
    resource: str = ""
    frequency: object = None  # Fraction on processor starts
    generator: int = -1

    def line(self) -> str:
        t = format_ticks_fixed(self.time)
        if self.kind == "arrival" or self.kind == "overflow":
            return f"{t} {self.kind} gen={self.generator} inst={self.instance} job={self.job}"
        if self.kind == "freq_set":
            return f"{t} freq_set pe={self.resource} f={self.frequency}"
        head = f"{t} {self.kind} inst={self.instance} job={self.job} task={self.task} on={self.resource}"
        if self.kind == "start" and self.frequency is not None:
            head += f" f={self.frequency}"
        return head


@dataclass
class TimedTrace:
    """One run's events (sorted), overflow count and observation horizon."""

    events: list[Event]
    horizon: int = 0
    overflow_count: int = 0
    seed: int | None = None
    run_index: int = 0
    model_hash: str = ""

    def lines(self) -> list[str]:
        head = []
        if self.seed is not None:
            head.append(f"# seed {self.seed}")
            head.append(f"# run {self.run_index}")
        if self.model_hash:
            head.append(f"# model {self.model_hash}")
        head.append("# rng splitmix64")
        return head + [e.line() for e in self.events]

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


@dataclass
class _Instance:
    job: str
    generator: int
    arrival: int
    total: int
    done: set = field(default_factory=set)
    started: set = field(default_factory=set)
    admitted: bool = False
    dropped: bool = False
    completion: int | None = None


def simulate(model: SystemModel, seed, run_index: int = 0,
             horizon: int | None = None, model_hash: str = "") -> TimedTrace:
    """One run; `seed` is a campaign seed (int) or a ready-made stream."""
    if isinstance(seed, SplitMix64):
        rng, meta_seed = seed, None
    else:
        rng, meta_seed = stream_for(seed, run_index), seed
    dep = model.deployment
    platform = model.platform
    jobs = {jt.name: expand_comm_tasks(jt, dep, platform) for jt in model.job_types}
    task_maps = {name: j.task_map() for name, j in jobs.items()}
    pred_maps = {name: j.preds() for name, j in jobs.items()}
    succ_maps = {name: j.succs() for name, j in jobs.items()}

    # arrivals are drawn up front, generator declaration order, then numbered
    # globally by (time, generator, index) so instance ids are canonical
    raw = []
    for gidx, g in enumerate(model.generators):
        for k, t in enumerate(sample_arrivals(g, rng)):
            raw.append((t, gidx, k))
    raw.sort()

    instances: list[_Instance] = []
    heap: list = []
    for inst, (t, gidx, _k) in enumerate(raw):
        g = model.generators[gidx]
        instances.append(_Instance(g.job_type, gidx, t, total=len(jobs[g.job_type].tasks)))
        heapq.heappush(heap, (t, RANK["arrival"], (gidx, inst), ("arrival", inst)))

    sched = empty_state(platform)
    running: dict[str, tuple[TaskRef, int]] = {}  # resource -> (ref, end time)
    last_freq: dict[str, object] = {}
    events: list[Event] = []
    backlog = 0
    overflow_count = 0

    def strict_view(pe_id):
        out = []
        for inst, rec in enumerate(instances):
            if not rec.admitted or rec.completion is not None:
                continue
            tm, preds = task_maps[rec.job], pred_maps[rec.job]
            for t in jobs[rec.job].tasks:
                if t.kind == COMMUNICATION or dep.mapping.get(t.id) != pe_id:
                    continue
                if t.id in rec.started or t.id in rec.done:
                    continue
                enabled = all(p in rec.done for p in preds[t.id])
                out.append((TaskRef(inst, rec.job, t.id), enabled))
        return out

    def cascade(now: int):
        nonlocal sched
        while True:
            d = next_dispatch(sched, dep, platform, strict_view)
            if d is None:
                return
            rec = instances[d.ref.instance]
            task = task_maps[rec.job][d.ref.task]
            is_comm = task.kind == COMMUNICATION
            sched = apply_dispatch(sched, d, dep, is_comm)
            rec.started.add(d.ref.task)
            window = task_duration(task, d.frequency)
            dur = window.lo if window.lo == window.hi else rng.uniform_ticks(window.lo, window.hi)
            if not is_comm and last_freq.get(d.resource) != d.frequency:
                last_freq[d.resource] = d.frequency
                events.append(Event(now, "freq_set", resource=d.resource, frequency=d.frequency))
            events.append(Event(now, "start", d.ref.instance, rec.job, d.ref.task, d.resource, d.frequency))
            running[d.resource] = (d.ref, now + dur)
            heapq.heappush(
                heap,
                (now + dur, RANK["end"], (d.ref.instance, rec.job, d.ref.task), ("end", d.resource)),
            )

    while heap:
        now, _rank, _tb, payload = heapq.heappop(heap)
        if payload[0] == "arrival":
            inst = payload[1]
            rec = instances[inst]
            if backlog >= dep.queue_capacity:
                rec.dropped = True
                overflow_count += 1
                events.append(Event(now, "overflow", inst, rec.job, generator=rec.generator))
                continue
            backlog += 1
            rec.admitted = True
            events.append(Event(now, "arrival", inst, rec.job, generator=rec.generator))
            sources = [
                TaskRef(inst, rec.job, t.id)
                for t in jobs[rec.job].tasks
                if not pred_maps[rec.job][t.id]
            ]
            for ref in ready_order(sources):
                sched = enqueue(sched, ref, task_maps[rec.job][ref.task], dep)
            cascade(now)
        else:  # end
            resource = payload[1]
            ref, _endt = running.pop(resource)
            sched = release(sched, resource)
            rec = instances[ref.instance]
            rec.done.add(ref.task)
            events.append(Event(now, "end", ref.instance, rec.job, ref.task, resource))
            if len(rec.done) == rec.total:
                rec.completion = now
                backlog -= 1
            else:
                newly = []
                for succ in succ_maps[rec.job][ref.task]:
                    if succ in rec.started or succ in rec.done:
                        continue
                    if all(p in rec.done for p in pred_maps[rec.job][succ]):
                        newly.append(TaskRef(ref.instance, rec.job, succ))
                for nref in ready_order(newly):
                    sched = enqueue(sched, nref, task_maps[rec.job][nref.task], dep)
            cascade(now)

    # events stay in processing order: non-decreasing time, ends handled
    # before arrivals before starts at each instant, and each dispatch
    # cascade recorded right after its trigger.  Re-sorting by kind rank
    # would lift a zero-width task's end above its own start and break
    # per-resource nesting.
    end = max((e.time for e in events), default=0)
    return TimedTrace(events, horizon if horizon is not None else end, overflow_count,
                      seed=meta_seed, run_index=run_index, model_hash=model_hash)


@dataclass
class CampaignResult:
    """Per-run metric samples plus aggregate reports.

    `per_run[label][i]` is run i's (key, value) sample list; time-valued
    samples are integer ticks, aggregates are floats in time units.
    """

    runs: int
    seed: int
    per_run: dict[str, list[list[tuple[str, object]]]]
    reports: dict[str, Report]
    horizons: list[int]
    overflow_runs: int
    overflow_total: int
    traces: list[TimedTrace] | None = None

    def values(self, label: str) -> list:
        return [v for samples in self.per_run[label] for _k, v in samples]


def run_campaign(model: SystemModel, runs: int, seed: int,
                 metrics: list[MetricSpec] | None = None,
                 horizon: int | None = None, keep_traces: bool = False,
                 model_hash: str = "") -> CampaignResult:
    """Independent runs; run i uses the rng stream (seed, i), so campaigns are
    reproducible and insensitive to how runs are distributed over workers."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    specs = default_metrics(model) if metrics is None else metrics
    per_run: dict[str, list] = {s.label: [] for s in specs}
    horizons: list[int] = []
    overflow_runs = 0
    overflow_total = 0
    traces: list[TimedTrace] | None = [] if keep_traces else None
    for i in range(runs):
        t = simulate(model, seed, i, horizon, model_hash)
        horizons.append(t.horizon)
        overflow_total += t.overflow_count
        overflow_runs += 1 if t.overflow_count else 0
        for s in specs:
            per_run[s.label].append(extract(t, s, model.platform))
        if traces is not None:
            traces.append(t)
    reports = {}
    for s in specs:
        flat = [v for samples in per_run[s.label] for _k, v in samples]
        if s.kind in TIME_KINDS:
            flat = [v / SCALE for v in flat]
        reports[s.label] = summarize(flat)
    return CampaignResult(runs, seed, per_run, reports, horizons,
                          overflow_runs, overflow_total, traces)
