"""Arrival-stream generators with bounded timing uncertainty.

Five variants:

  periodic        t_k = (k-1)*period, exactly
  jitter          t_k in [(k-1)*period, (k-1)*period + jitter], grid-anchored
  uncertain       t_k in [t_{k-1} + period, t_{k-1} + period + jitter]; drift accumulates
  bounded_var     any stream with at most max_events arrivals in every closed
                  window of length `window`
  bibounded_var   additionally at least min_events arrivals per window

The first three have uniform sampling semantics; the last two are pure
constraints (usable by the formal engine and as trace validators) and refuse
to sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import TimeInterval, Violation
from .rng import SplitMix64

PERIODIC = "periodic"
JITTER = "jitter"
UNCERTAIN = "uncertain"
BOUNDED_VAR = "bounded_var"
BIBOUNDED_VAR = "bibounded_var"

VARIANTS = (PERIODIC, JITTER, UNCERTAIN, BOUNDED_VAR, BIBOUNDED_VAR)
SAMPLABLE = (PERIODIC, JITTER, UNCERTAIN)


@dataclass
class Generator:
    job_type: str
    variant: str
    period: int = 0  # ticks
    jitter: int = 0  # ticks
    window: int = 0  # ticks (bounded_var / bibounded_var)
    min_events: int = 0
    max_events: int = 0
    count: int = 1  # finite stream length
    arrivals: list[int] | None = None  # explicit times, lets variants 4-5 simulate


def generator_violations(g: Generator) -> list[Violation]:
    out: list[Violation] = []
    sub = g.job_type

    if g.variant not in VARIANTS:
        out.append(Violation("UnknownGeneratorVariant", sub, g.variant))
        return out
    if g.count <= 0:
        out.append(Violation("BadInstanceCount", sub, str(g.count)))

    if g.variant == PERIODIC:
        if g.period <= 0:
            out.append(Violation("BadPeriod", sub, str(g.period)))
    elif g.variant in (JITTER, UNCERTAIN):
        if g.period <= 0:
            out.append(Violation("BadPeriod", sub, str(g.period)))
        if g.jitter < 0:
            out.append(Violation("BadJitter", sub, str(g.jitter)))
        if g.variant == JITTER and g.jitter >= g.period > 0:
            # windows of consecutive arrivals must stay disjoint
            out.append(Violation("JitterExceedsPeriod", sub, f"{g.jitter} >= {g.period}"))
    else:
        if g.window <= 0:
            out.append(Violation("BadWindow", sub, str(g.window)))
        if g.max_events <= 0:
            out.append(Violation("BadEventBound", sub, str(g.max_events)))
        if g.variant == BIBOUNDED_VAR and not (0 < g.min_events <= g.max_events):
            out.append(Violation("BadEventBound", sub, f"min {g.min_events}, max {g.max_events}"))

    if g.arrivals is not None:
        times = g.arrivals
        if any(b < a for a, b in zip(times, times[1:])) or (times and times[0] < 0):
            out.append(Violation("BadExplicitArrivals", sub, "not sorted and non-negative"))
        elif len(times) != g.count:
            out.append(Violation("BadExplicitArrivals", sub, f"{len(times)} times for count {g.count}"))
    return out


def arrival_window(g: Generator, k: int, prev: int | None = None) -> TimeInterval:
    """Inclusive window of the k-th arrival (1-based).

    `prev` is the realized (k-1)-th arrival; only the drift-accumulating
    variant needs it.  Variants 4-5 have no per-arrival window.
    """
    if k < 1:
        raise ValueError("arrival index is 1-based")
    if g.variant == PERIODIC:
        t = (k - 1) * g.period
        return TimeInterval(t, t)
    if g.variant == JITTER:
        base = (k - 1) * g.period
        return TimeInterval(base, base + g.jitter)
    if g.variant == UNCERTAIN:
        if k == 1:
            return TimeInterval(0, g.jitter)
        if prev is None:
            raise ValueError("uncertain windows need the previous arrival time")
        return TimeInterval(prev + g.period, prev + g.period + g.jitter)
    raise UnsupportedWindow(f"{g.variant} generators have no per-arrival window")


def sample_arrivals(g: Generator, rng: SplitMix64) -> list[int]:
    """Draw one concrete arrival list (uniform within each window)."""
    if g.arrivals is not None:
        return list(g.arrivals)
    if g.variant not in SAMPLABLE:
        raise NoProbabilisticSemantics(
            f"{g.variant} generators are constraints, not distributions; give explicit arrivals"
        )
    times: list[int] = []
    prev: int | None = None
    for k in range(1, g.count + 1):
        w = arrival_window(g, k, prev)
        t = rng.uniform_ticks(w.lo, w.hi)
        times.append(t)
        prev = t
    return times


def check_variability(times: list[int], window: int, max_events: int, min_events: int | None = None) -> bool:
    """Validate a trace against sliding-window event-count bounds.

    Every closed window [r, r+window] with r >= 0 must contain at most
    max_events times; when min_events is given, every such window with
    r+window <= times[-1] must also contain at least min_events.  The count
    only changes when a window boundary crosses an event, so it is enough to
    anchor r at 0, at each event (maxima) and just after each event (minima).
    """
    import bisect

    if window <= 0:
        raise ValueError("window must be positive")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be sorted")
    if not times:
        return min_events is None or min_events == 0

    for t in times:
        count = bisect.bisect_right(times, t + window) - bisect.bisect_left(times, t)
        if count > max_events:
            return False

    if min_events is not None and min_events > 0:
        last = times[-1]
        if window <= last:
            count = bisect.bisect_right(times, window) - bisect.bisect_left(times, 0)
            if count < min_events:
                return False
            for t in times:
                if t + window >= last:
                    continue
                count = bisect.bisect_right(times, t + window) - bisect.bisect_right(times, t)
                if count < min_events:
                    return False
    return True


class UnsupportedWindow(ValueError):
    pass


class NoProbabilisticSemantics(ValueError):
    pass
