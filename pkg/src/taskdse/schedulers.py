"""Deterministic scheduling policies shared by both analysis engines.

The policy state is a frozen value (plain tuples), so the formal engine can
hash it into discrete states and the simulator can mutate-by-replacement; both
therefore run the exact same decision code.  Tie-breaks are total: tasks that
become ready at the same instant enqueue in (instance index, job name, task id)
order, and free processors are considered in ascending id order.

Policies for computation tasks:

  fifo_global            one central queue, any free processor
  fifo_priority_global   one queue per priority level, higher level first
  fifo_local             one queue per processor via the fixed mapping
  strict_priority_local  a processor runs its highest-priority incomplete
                         task or idles until that task is enabled (hold-back)

Communication tasks always queue FIFO on their annotated interconnect,
whatever the policy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .model import COMMUNICATION, Deployment, Platform, TaskSpec


@dataclass(frozen=True, order=True)
class TaskRef:
    """One task instance: (instance index, job, task) is also the tie-break key."""

    instance: int
    job: str
    task: str


def ready_order(refs: list[TaskRef]) -> list[TaskRef]:
    """Canonical enqueue order for simultaneously enabled tasks."""
    return sorted(refs)


@dataclass(frozen=True)
class Dispatch:
    ref: TaskRef
    resource: str
    frequency: Fraction | None  # None on interconnects


@dataclass(frozen=True)
class SchedulerState:
    queue: tuple[TaskRef, ...] = ()  # fifo_global
    level_queues: tuple[tuple[int, tuple[TaskRef, ...]], ...] = ()  # priority, desc
    local_queues: tuple[tuple[str, tuple[TaskRef, ...]], ...] = ()  # per pe, asc id
    ic_queues: tuple[tuple[str, tuple[TaskRef, ...]], ...] = ()
    running: tuple[tuple[str, TaskRef], ...] = ()  # resource -> task, asc id

    def occupant(self, resource: str) -> TaskRef | None:
        for rid, ref in self.running:
            if rid == resource:
                return ref
        return None


def empty_state(platform: Platform) -> SchedulerState:
    ics = tuple((ic.id, ()) for ic in sorted(platform.interconnects, key=lambda i: i.id))
    return SchedulerState(ic_queues=ics)


def _tuple_map_set(entries: tuple, key, value) -> tuple:
    out = [e for e in entries if e[0] != key]
    out.append((key, value))
    out.sort(key=lambda e: e[0])
    return tuple(out)


def _tuple_map_get(entries: tuple, key, default=()):
    for k, v in entries:
        if k == key:
            return v
    return default


def enqueue(state: SchedulerState, ref: TaskRef, task: TaskSpec, dep: Deployment) -> SchedulerState:
    """Queue one enabled task instance according to the deployment policy."""
    if task.kind == COMMUNICATION:
        q = _tuple_map_get(state.ic_queues, task.interconnect)
        return replace(state, ic_queues=_tuple_map_set(state.ic_queues, task.interconnect, q + (ref,)))

    policy = dep.policy
    if policy == "fifo_global":
        return replace(state, queue=state.queue + (ref,))
    if policy == "fifo_priority_global":
        level = dep.priorities.get(ref.task, 0)
        q = _tuple_map_get(state.level_queues, level)
        return replace(state, level_queues=_tuple_map_set(state.level_queues, level, q + (ref,)))
    if policy == "fifo_local":
        pe = dep.mapping[ref.task]
        q = _tuple_map_get(state.local_queues, pe)
        return replace(state, local_queues=_tuple_map_set(state.local_queues, pe, q + (ref,)))
    if policy == "strict_priority_local":
        # hold-back policy keeps no queue; dispatch scans the incomplete set
        return state
    raise ValueError(f"unknown policy {policy}")


def _frequency_for(task_id: str, pe_id: str, dep: Deployment, platform: Platform) -> Fraction:
    f = dep.task_frequency.get(task_id)
    if f is not None:
        return f
    return platform.processor(pe_id).min_frequency()


def next_dispatch(
    state: SchedulerState,
    dep: Deployment,
    platform: Platform,
    strict_view=None,
) -> Dispatch | None:
    """First dispatch the policy fires in `state`, or None if none does.

    Engines call this repeatedly (applying each dispatch) until it returns
    None; that exhausts every work-conserving start without letting time pass.
    `strict_view(pe_id)` is required by strict_priority_local: it returns the
    processor's incomplete mapped task instances as (ref, enabled) pairs.
    """
    busy = {rid for rid, _ in state.running}
    pes = [p for p in platform.active_processors() if p.id not in busy]
    pes.sort(key=lambda p: p.id)

    policy = dep.policy
    for pe in pes:
        if policy == "fifo_global":
            if state.queue:
                ref = state.queue[0]
                return Dispatch(ref, pe.id, _frequency_for(ref.task, pe.id, dep, platform))
        elif policy == "fifo_priority_global":
            for level, q in sorted(state.level_queues, key=lambda e: -e[0]):
                if q:
                    return Dispatch(q[0], pe.id, _frequency_for(q[0].task, pe.id, dep, platform))
        elif policy == "fifo_local":
            q = _tuple_map_get(state.local_queues, pe.id)
            if q:
                ref = q[0]
                return Dispatch(ref, pe.id, _frequency_for(ref.task, pe.id, dep, platform))
        elif policy == "strict_priority_local":
            pending = strict_view(pe.id)
            if pending:
                # priority is primary within an instance, instance index outer
                best = min(pending, key=lambda p: (p[0].instance, -dep.priorities.get(p[0].task, 0), p[0]))
                ref, enabled = best
                if enabled:
                    return Dispatch(ref, pe.id, _frequency_for(ref.task, pe.id, dep, platform))
                # hold: this processor waits for its top task
        else:
            raise ValueError(f"unknown policy {policy}")

    for iid, q in state.ic_queues:
        if q and all(rid != iid for rid, _ in state.running):
            return Dispatch(q[0], iid, None)
    return None


def apply_dispatch(state: SchedulerState, d: Dispatch, dep: Deployment, is_comm: bool) -> SchedulerState:
    """Remove the dispatched task from its queue and mark the resource busy."""
    if is_comm:
        q = _tuple_map_get(state.ic_queues, d.resource)
        state = replace(state, ic_queues=_tuple_map_set(state.ic_queues, d.resource, q[1:]))
    else:
        policy = dep.policy
        if policy == "fifo_global":
            state = replace(state, queue=state.queue[1:])
        elif policy == "fifo_priority_global":
            level = dep.priorities.get(d.ref.task, 0)
            q = _tuple_map_get(state.level_queues, level)
            state = replace(state, level_queues=_tuple_map_set(state.level_queues, level, q[1:]))
        elif policy == "fifo_local":
            q = _tuple_map_get(state.local_queues, d.resource)
            state = replace(state, local_queues=_tuple_map_set(state.local_queues, d.resource, q[1:]))
        # strict_priority_local keeps no queue
    return replace(state, running=_tuple_map_set(state.running, d.resource, d.ref))


def release(state: SchedulerState, resource: str) -> SchedulerState:
    running = tuple(e for e in state.running if e[0] != resource)
    return replace(state, running=running)
