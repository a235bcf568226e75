"""Zone-graph reachability: exact makespan and response-time bounds.

The product of generators, scheduler and running tasks is searched as symbolic
states (discrete configuration, clock zone).  Zones are difference bound
matrices over a per-configuration clock layout, and configurations are kept
dispatch-stable: every start the policy allows fires inside the transition
that enabled it.  Arrivals and completions only move forward, so the discrete
space is acyclic and the search terminates without any widening; every
reported bound is therefore both sound and attained by some run.

Two ingredients keep the zone count tractable:

  * inclusion pruning: a zone covered by a stored zone is dropped;
  * exact union merging: when the entrywise hull of two zones provably equals
    their set union, the pair is replaced by the hull.  Interleavings of
    independent task completions generate exponentially many orderings whose
    union is one convex set, and this collapses them to a single zone while
    keeping all bounds exact.

Clock layout per configuration, in canonical order: the global clock, the
makespan anchor (reset at the first arrival), one response clock per admitted
incomplete instance, one clock per running task, and the generator's own
clocks (inter-arrival or sliding-window banks).  Clocks of finished tasks,
completed instances and exhausted generators are projected away.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .generators import BIBOUNDED_VAR, BOUNDED_VAR, JITTER, PERIODIC, UNCERTAIN
from .model import (
    COMMUNICATION,
    SystemModel,
    TimeInterval,
    duration_interval,
    expand_comm_tasks,
)
from .schedulers import (
    TaskRef,
    apply_dispatch,
    empty_state,
    enqueue,
    next_dispatch,
    ready_order,
    release,
)
from .zones import (
    clock_window,
    constrain_one,
    elapse,
    enc,
    enc_add,
    enc_neg,
    new_zero,
    relayout,
    zone_includes,
    LE_ZERO,
)

PENDING, QUEUED, RUNNING, DONE = 0, 1, 2, 3

_GROUP = {"T": 0, "M": 1, "resp": 2, "run": 3, "gen": 4}


class BudgetExceeded(RuntimeError):
    pass


class SearchCapExceeded(RuntimeError):
    pass


@dataclass
class ReachOptions:
    clock_budget: int = 25
    state_cap: int = 2_000_000
    merge: bool = True  # exact union merging (off: plain inclusion antichain)
    purge: bool = True  # project away dead clocks (off: keep dimensions)
    merge_limit: int = 4096  # skip hull checks beyond this many differing entries


@dataclass
class ReachResult:
    makespan: TimeInterval | None
    latency: TimeInterval | None
    instance_latency: dict[int, TimeInterval]
    overflow_reachable: bool
    terminal_reached: bool
    states: int  # configurations expanded
    zones: int  # zones stored at the end
    merges: int


@dataclass(frozen=True)
class DState:
    arrivals: tuple  # arrivals so far, per generator
    insts: tuple  # per instance: None, "dropped", or task status tuple
    sched: object  # SchedulerState
    overflow: bool = False


class Network:
    """Precomputed static structure of one model's timed network."""

    def __init__(self, model: SystemModel, options: ReachOptions | None = None):
        self.model = model
        self.options = options or ReachOptions()
        self.dep = model.deployment
        self.platform = model.platform
        self.jobs = {
            jt.name: expand_comm_tasks(jt, self.dep, self.platform) for jt in model.job_types
        }
        self.task_maps = {n: j.task_map() for n, j in self.jobs.items()}
        self.preds = {n: j.preds() for n, j in self.jobs.items()}
        self.succs = {n: j.succs() for n, j in self.jobs.items()}
        self.task_index = {
            n: {t.id: i for i, t in enumerate(j.tasks)} for n, j in self.jobs.items()
        }
        self.K = [min(g.count, model.instance_bound) for g in model.generators]
        self.inst_job: list[str] = []
        self.inst_of: dict[tuple[int, int], int] = {}
        for gidx, g in enumerate(model.generators):
            for k in range(1, self.K[gidx] + 1):
                self.inst_of[(gidx, k)] = len(self.inst_job)
                self.inst_job.append(g.job_type)
        self._wins: dict = {}

        gen_clocks = 0
        for g in model.generators:
            if g.variant == UNCERTAIN:
                gen_clocks += 1
            elif g.variant in (BOUNDED_VAR, BIBOUNDED_VAR):
                gen_clocks += g.max_events
        resources = len(self.platform.active_processors()) + len(self.platform.interconnects)
        concurrent = min(len(self.inst_job), self.dep.queue_capacity)
        need = 2 + concurrent + resources + gen_clocks
        if need > self.options.clock_budget:
            raise BudgetExceeded(
                f"model may need {need} clocks (budget {self.options.clock_budget})"
            )

    def window(self, ref: TaskRef, resource: str) -> tuple[int, int]:
        key = (ref.job, ref.task, resource)
        w = self._wins.get(key)
        if w is None:
            task = self.task_maps[ref.job][ref.task]
            if task.kind == COMMUNICATION:
                w = (task.work.lo, task.work.hi)
            else:
                f = self.dep.task_frequency.get(ref.task)
                if f is None:
                    f = self.platform.processor(resource).min_frequency()
                d = duration_interval(task.work, f)
                w = (d.lo, d.hi)
            self._wins[key] = w
        return w

    def initial(self) -> DState:
        return DState(
            arrivals=(0,) * len(self.model.generators),
            insts=(None,) * len(self.inst_job),
            sched=empty_state(self.platform),
        )


def build_network(model: SystemModel, options: ReachOptions | None = None) -> Network:
    return Network(model, options)


# ---------------------------------------------------------------------------
# discrete-state helpers


def _gen_purposes(net: Network, g, gidx: int):
    if g.variant == UNCERTAIN:
        return [("gen", gidx, 0)]
    if g.variant in (BOUNDED_VAR, BIBOUNDED_VAR):
        return [("gen", gidx, s) for s in range(g.max_events)]
    return []


def _layout(net: Network, d: DState) -> tuple:
    ps = [("T",), ("M",)]
    for i, st in enumerate(d.insts):
        if isinstance(st, tuple) and (not net.options.purge or any(s != DONE for s in st)):
            ps.append(("resp", i))
    for _rid, ref in d.sched.running:
        ps.append(("run", ref.instance, ref.task))
    for gidx, g in enumerate(net.model.generators):
        if net.options.purge and d.arrivals[gidx] >= net.K[gidx]:
            continue
        ps.extend(_gen_purposes(net, g, gidx))
    ps.sort(key=lambda p: (_GROUP[p[0]],) + p[1:])
    if len(ps) > net.options.clock_budget:
        raise BudgetExceeded(f"{len(ps)} live clocks (budget {net.options.clock_budget})")
    return tuple(ps)


def _index(lay: tuple) -> dict:
    return {p: i + 1 for i, p in enumerate(lay)}


def _backlog(insts) -> int:
    return sum(1 for st in insts if isinstance(st, (tuple, list)) and any(s != DONE for s in st))


def _terminal(net: Network, d: DState) -> bool:
    if any(a < k for a, k in zip(d.arrivals, net.K)):
        return False
    return all(
        st == "dropped" or (isinstance(st, tuple) and all(s == DONE for s in st))
        for st in d.insts
    )


def _freeze(arrivals, insts, sched) -> DState:
    return DState(
        tuple(arrivals),
        tuple(tuple(s) if isinstance(s, list) else s for s in insts),
        sched,
    )


def _cascade(net: Network, insts: list, sched):
    """Fire every start the policy allows; returns created run clocks."""
    resets = []

    def strict_view(pe_id):
        out = []
        for i, st in enumerate(insts):
            if not isinstance(st, (tuple, list)) or all(s == DONE for s in st):
                continue
            job = net.inst_job[i]
            tidx = net.task_index[job]
            for t in net.jobs[job].tasks:
                if t.kind == COMMUNICATION or net.dep.mapping.get(t.id) != pe_id:
                    continue
                s = st[tidx[t.id]]
                if s in (RUNNING, DONE):
                    continue
                enabled = all(st[tidx[p]] == DONE for p in net.preds[job][t.id])
                out.append((TaskRef(i, job, t.id), enabled))
        return out

    while True:
        disp = next_dispatch(sched, net.dep, net.platform, strict_view)
        if disp is None:
            return sched, resets
        job = disp.ref.job
        task = net.task_maps[job][disp.ref.task]
        sched = apply_dispatch(sched, disp, net.dep, task.kind == COMMUNICATION)
        st = list(insts[disp.ref.instance])
        st[net.task_index[job][disp.ref.task]] = RUNNING
        insts[disp.ref.instance] = st
        resets.append(("run", disp.ref.instance, disp.ref.task))


def _after_end(net: Network, d: DState, resource: str, ref: TaskRef):
    job = ref.job
    tidx = net.task_index[job]
    insts = list(d.insts)
    st = list(insts[ref.instance])
    st[tidx[ref.task]] = DONE
    insts[ref.instance] = st
    sched = release(d.sched, resource)
    completed = all(s == DONE for s in st)
    if not completed:
        newly = []
        for succ in net.succs[job][ref.task]:
            if st[tidx[succ]] != PENDING:
                continue
            if all(st[tidx[p]] == DONE for p in net.preds[job][succ]):
                newly.append(TaskRef(ref.instance, job, succ))
        for nref in ready_order(newly):
            st[tidx[nref.task]] = QUEUED
            sched = enqueue(sched, nref, net.task_maps[job][nref.task], net.dep)
    sched, resets = _cascade(net, insts, sched)
    d2 = _freeze(d.arrivals, insts, sched)
    return d2, resets, (ref.instance if completed else None)


def _after_arrival(net: Network, d: DState, gidx: int):
    """Admit (or drop) arrival k of generator gidx; returns (d2, resets)."""
    k = d.arrivals[gidx] + 1
    arrivals = tuple(a + 1 if i == gidx else a for i, a in enumerate(d.arrivals))
    inst = net.inst_of[(gidx, k)]
    job = net.inst_job[inst]
    insts = list(d.insts)
    resets = []
    g = net.model.generators[gidx]
    if g.variant == UNCERTAIN:
        resets.append(("gen", gidx, 0))
    elif g.variant in (BOUNDED_VAR, BIBOUNDED_VAR):
        resets.append(("gen", gidx, (k - 1) % g.max_events))
    if sum(d.arrivals) == 0:
        resets.append(("M",))

    if _backlog(insts) >= net.dep.queue_capacity:
        insts[inst] = "dropped"
        d2 = DState(arrivals, tuple(tuple(s) if isinstance(s, list) else s for s in insts), d.sched, True)
        return d2, resets

    st = [PENDING] * len(net.jobs[job].tasks)
    insts[inst] = st
    sched = d.sched
    sources = [TaskRef(inst, job, t.id) for t in net.jobs[job].tasks if not net.preds[job][t.id]]
    for ref in ready_order(sources):
        st[net.task_index[job][ref.task]] = QUEUED
        sched = enqueue(sched, ref, net.task_maps[job][ref.task], net.dep)
    sched, more = _cascade(net, insts, sched)
    return _freeze(arrivals, insts, sched), resets + more


# ---------------------------------------------------------------------------
# zone plumbing


def _invariants(net: Network, d: DState, idx: dict, mat) -> bool:
    """Intersect with every location invariant; False when that empties it."""
    for rid, ref in d.sched.running:
        _lo, hi = net.window(ref, rid)
        if not constrain_one(mat, idx[("run", ref.instance, ref.task)], 0, enc(hi)):
            return False
    t_idx = idx[("T",)]
    for gidx, g in enumerate(net.model.generators):
        k = d.arrivals[gidx] + 1
        if k > net.K[gidx]:
            continue
        if g.variant == PERIODIC:
            ok = constrain_one(mat, t_idx, 0, enc((k - 1) * g.period))
        elif g.variant == JITTER:
            ok = constrain_one(mat, t_idx, 0, enc((k - 1) * g.period + g.jitter))
        elif g.variant == UNCERTAIN:
            cap = g.jitter if k == 1 else g.period + g.jitter
            ok = constrain_one(mat, idx[("gen", gidx, 0)], 0, enc(cap))
        elif g.variant == BIBOUNDED_VAR:
            if k <= g.min_events:
                ok = constrain_one(mat, t_idx, 0, enc(g.window))
            else:
                slot = (k - g.min_events - 1) % g.max_events
                ok = constrain_one(mat, idx[("gen", gidx, slot)], 0, enc(g.window))
        else:  # max-rate only: nothing forces the next arrival
            ok = True
        if not ok:
            return False
    return True


def _shift(mat, old_idx: dict, new_lay: tuple, resets) -> np.ndarray:
    """Project a firing-instant zone onto the successor's clock layout."""
    rs = set(resets)
    srcs = [0] + [0 if p in rs else old_idx.get(p, 0) for p in new_lay]
    return relayout(mat, srcs)


def _hull_is_union(h, a, b, limit: int) -> bool:
    """Exact check that hull h (entrywise max of a, b) adds no new points.

    h differs from the union iff some point of h violates one bound of a and
    one bound of b; only bounds the hull strictly relaxed can be violated, so
    the pair search is restricted to those entries.
    """
    ta = np.argwhere(h > a)
    tb = np.argwhere(h > b)
    if len(ta) == 0 or len(tb) == 0:
        return True  # hull collapses to one operand
    if len(ta) > limit or len(tb) > limit:
        return False  # too wide to verify cheaply; keep zones separate
    for i, j in ta:
        z = h.copy()
        if not constrain_one(z, int(j), int(i), enc_neg(int(a[i, j]))):
            continue  # no point of h escapes a across this bound
        for k, l in tb:
            # one O(1) feasibility probe per candidate pair
            if enc_add(enc_neg(int(b[k, l])), int(z[k, l])) >= LE_ZERO:
                return False
    return True


def _family_hull(mats: list):
    """Hull of a completion family, exact by construction; None if no match.

    Interleaving the ends of concurrently running tasks produces one zone per
    completion order whose union is convex even though no proper subset's
    union is, so pairwise merging stalls from three concurrent tasks up.  The
    family shape is recognizable: against the m-way hull, each zone relaxes
    entries in a single clock row (its "ended last" clock) with non-negative
    bounds, and every relaxed entry points at another family row.  A point
    escaping the union would then need every family clock to strictly exceed
    some other family clock, contradicting whichever of them is minimal, so
    the hull adds no points and can replace the family without any search.

    Returns (hull, member indices) over the largest conforming subset.
    """
    idxs = list(range(len(mats)))
    while len(idxs) >= 2:
        h = mats[idxs[0]].copy()
        for i in idxs[1:]:
            np.maximum(h, mats[i], out=h)
        infos = {}
        drop = []
        for i in idxs:
            ta = np.argwhere(h > mats[i])
            if len(ta) == 0:
                return h, idxs  # hull equals this member, union is trivial
            rows = {int(p) for p, _q in ta}
            if len(rows) != 1:
                drop.append(i)
                continue
            r = rows.pop()
            if any(int(mats[i][p, q]) < LE_ZERO for p, q in ta):
                drop.append(i)
                continue
            infos[i] = (r, {int(q) for _p, q in ta})
        if not drop:
            rset = {info[0] for info in infos.values()}
            drop = [i for i in idxs if not infos[i][1] <= rset]
            if not drop:
                return h, idxs
        idxs = [i for i in idxs if i not in drop]
    return None


class _Store:
    """Per-configuration zone antichains with inclusion pruning and merging."""

    def __init__(self, merge: bool, merge_limit: int):
        self.zones: dict[DState, dict[bytes, np.ndarray]] = {}
        self.merge = merge
        self.merge_limit = merge_limit
        self.merges = 0

    def get(self, d: DState, b: bytes):
        return self.zones.get(d, {}).get(b)

    def insert(self, d: DState, mat: np.ndarray) -> bytes | None:
        """Store a zone; returns its key when it must be (re)explored."""
        zs = self.zones.setdefault(d, {})
        b = mat.tobytes()
        if b in zs:
            return None
        for ob in list(zs):
            om = zs[ob]
            if zone_includes(om, mat):
                return None
            if zone_includes(mat, om):
                del zs[ob]
        if self.merge:
            grown = True
            while grown:
                grown = False
                for ob in list(zs):
                    om = zs[ob]
                    h = np.maximum(mat, om)
                    if _hull_is_union(h, mat, om, self.merge_limit):
                        del zs[ob]
                        mat = h
                        self.merges += 1
                        for ob2 in list(zs):
                            if zone_includes(mat, zs[ob2]):
                                del zs[ob2]
                        grown = True
                        break
                if grown or not zs:
                    continue
                keys = list(zs)
                got = _family_hull([zs[k] for k in keys] + [mat])
                if got is None or len(keys) not in got[1]:
                    continue  # incoming zone must join, or there is no new key
                h, members = got
                self.merges += len(members) - 1
                for i in members:
                    if i < len(keys):
                        del zs[keys[i]]
                mat = h
                for ob2 in list(zs):
                    if zone_includes(mat, zs[ob2]):
                        del zs[ob2]
                grown = True
            b = mat.tobytes()
        zs[b] = mat
        return b

    def total(self) -> int:
        return sum(len(zs) for zs in self.zones.values())


class _Acc:
    def __init__(self):
        self.makespan = None
        self.per_inst: dict[int, tuple] = {}
        self.overflow = False
        self.terminal = False

    @staticmethod
    def _widen(cur, lo, hi):
        hi = math.inf if hi is None else hi
        if cur is None:
            return (lo, hi)
        return (min(cur[0], lo), max(cur[1], hi))

    def record_makespan(self, lo, hi):
        self.makespan = self._widen(self.makespan, lo, hi)

    def record_latency(self, inst, lo, hi):
        self.per_inst[inst] = self._widen(self.per_inst.get(inst), lo, hi)


# ---------------------------------------------------------------------------
# search


def reach_bounds(model: SystemModel, options: ReachOptions | None = None) -> ReachResult:
    """Exact bounds on makespan and per-instance response times.

    Assumes a model that passes validate_model.  Raises BudgetExceeded when
    the clock layout cannot fit the budget and SearchCapExceeded when more
    than state_cap configurations get expanded.
    """
    opts = options or ReachOptions()
    net = Network(model, opts)
    store = _Store(opts.merge, opts.merge_limit)
    acc = _Acc()

    d0 = net.initial()
    lay0 = _layout(net, d0)
    z0 = new_zero(len(lay0) + 1)
    elapse(z0)
    if not _invariants(net, d0, _index(lay0), z0):
        raise ValueError("initial state violates its own invariants")
    frontier: deque = deque()
    b0 = store.insert(d0, z0)
    frontier.append((d0, b0))
    explored = 0

    while frontier:
        d, b = frontier.popleft()
        mat = store.get(d, b)
        if mat is None:
            continue  # superseded by a merge or a wider zone
        explored += 1
        if explored > opts.state_cap:
            raise SearchCapExceeded(f"more than {opts.state_cap} configurations")
        lay = _layout(net, d)
        idx = _index(lay)

        # task completions, canonical order
        for rid, ref in sorted(d.sched.running, key=lambda e: e[1]):
            lo, _hi = net.window(ref, rid)
            zg = mat.copy()
            if not constrain_one(zg, 0, idx[("run", ref.instance, ref.task)], enc(-lo)):
                continue
            d2, resets, completed = _after_end(net, d, rid, ref)
            if completed is not None:
                rlo, rhi = clock_window(zg, idx[("resp", completed)])
                acc.record_latency(completed, rlo, rhi)
            if _terminal(net, d2):
                mlo, mhi = clock_window(zg, idx[("M",)])
                acc.record_makespan(mlo, mhi)
                acc.terminal = True
                continue
            _push(net, store, frontier, d2, zg, idx, resets)

        # arrivals, generator order
        for gidx, g in enumerate(net.model.generators):
            k = d.arrivals[gidx] + 1
            if k > net.K[gidx]:
                continue
            zg = mat.copy()
            if g.variant in (PERIODIC, JITTER):
                ok = constrain_one(zg, 0, idx[("T",)], enc(-(k - 1) * g.period))
            elif g.variant == UNCERTAIN:
                ok = k == 1 or constrain_one(zg, 0, idx[("gen", gidx, 0)], enc(-g.period))
            elif k > g.max_events:  # sliding-window variants
                slot = (k - 1) % g.max_events
                ok = constrain_one(zg, 0, idx[("gen", gidx, slot)], enc(-g.window, strict=True))
            else:
                ok = True
            if not ok:
                continue
            d2, resets = _after_arrival(net, d, gidx)
            if d2.overflow:
                acc.overflow = True
                continue  # absorbing: the run is flagged, not continued
            _push(net, store, frontier, d2, zg, idx, resets)

    def interval(pair):
        return None if pair is None else TimeInterval(pair[0], pair[1])

    overall = None
    for pair in acc.per_inst.values():
        overall = _Acc._widen(overall, pair[0], pair[1])
    return ReachResult(
        makespan=interval(acc.makespan),
        latency=interval(overall),
        instance_latency={i: interval(p) for i, p in sorted(acc.per_inst.items())},
        overflow_reachable=acc.overflow,
        terminal_reached=acc.terminal,
        states=explored,
        zones=store.total(),
        merges=store.merges,
    )


def _push(net, store, frontier, d2, zg, old_idx, resets):
    lay2 = _layout(net, d2)
    z2 = _shift(zg, old_idx, lay2, resets)
    idx2 = _index(lay2)
    if not _invariants(net, d2, idx2, z2):
        return
    elapse(z2)
    if not _invariants(net, d2, idx2, z2):
        return
    b2 = store.insert(d2, z2)
    if b2 is not None:
        frontier.append((d2, b2))
