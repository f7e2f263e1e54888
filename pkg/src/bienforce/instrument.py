"""Bidirectional instrumentation: the composite LTS of a monitor and a process."""
from __future__ import annotations

from functools import lru_cache

from . import monitor as mon
from . import process as proc
from .core import IN, OUT, TAU, Universe, term
from .lts import Lts, explore

RULES = ("biTrnO", "biTrnI", "biDisO", "biDisI", "biEnO", "biEnI", "biAsy", "biDef")


@term
class Composite:
    monitor: object
    process: object

    def __str__(self):
        return f"{mon.format_monitor(self.monitor)} [ {proc.format_process(self.process)} ]"


@lru_cache(maxsize=100000)
def _process_steps(p, universe):
    return tuple(proc.step(p, universe))


def composite_step(s: Composite, universe: Universe) -> list:
    """All transitions ``(action, successor, rule)`` of the composite ``s``.

    Environment inputs range over the universe values; the monitor decides
    which system-facing input (if any) reaches the process.  Inputs that no
    monitor transformation accepts are blocked.
    """
    e, p = s.monitor, s.process
    out = []
    output_insertions = False
    for a, e2 in mon.insertions(e):
        if a.direction == OUT:
            output_insertions = True
            out.append((a, Composite(e2, p), "biEnO"))
        else:
            for p2 in proc.input_derivatives(p, a.port, a.payload):
                out.append((TAU, Composite(e2, p2), "biDisI"))
    for a, p2 in _process_steps(p, universe):
        if a is TAU:
            out.append((TAU, Composite(e, p2), "biAsy"))
        elif a.direction == OUT:
            labels = mon.transforms(e, a)
            for result, e2 in labels:
                if result is None:
                    out.append((TAU, Composite(e2, p2), "biDisO"))
                else:
                    out.append((result, Composite(e2, p2), "biTrnO"))
            if not labels and not output_insertions:
                out.append((a, Composite(mon.ID, p2), "biDef"))
    for a in universe.inputs():
        for result, e2 in mon.transforms(e, a):
            if result is None:
                out.append((a, Composite(e2, p), "biEnI"))
            elif result.direction == IN:
                for p2 in proc.input_derivatives(p, result.port, result.payload):
                    out.append((a, Composite(e2, p2), "biTrnI"))
    return list(dict.fromkeys(out))


def explore_composite(s: Composite, universe: Universe, state_bound: int = 10000) -> Lts:
    return explore(s, lambda c: composite_step(c, universe), state_bound)


def instrument(e, p) -> Composite:
    return Composite(e, p)
