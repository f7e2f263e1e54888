"""Finite labelled transition systems, bounded exploration, and exports."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Optional

from .core import TAU, action_key, visible
from .errors import StateBoundExceeded


@dataclass
class Lts:
    """Explored LTS.  State ids are indices into ``state_table``; 0 is initial.

    Transitions are ``(src, action, dst, rule)`` tuples; ``rule`` is None for
    plain process transitions and the instrumentation rule name otherwise.
    """

    state_table: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    initial: int = 0

    def __post_init__(self):
        self._succ = None
        self._index = None

    @property
    def states(self) -> range:
        return range(len(self.state_table))

    def successors(self, s: int) -> list:
        if self._succ is None or len(self._succ) != len(self.state_table):
            succ = [[] for _ in self.state_table]
            for src, a, dst, rule in self.transitions:
                succ[src].append((a, dst, rule))
            self._succ = succ
        return self._succ[s]

    def index_of(self, term) -> Optional[int]:
        if self._index is None or len(self._index) != len(self.state_table):
            self._index = {t: i for i, t in enumerate(self.state_table)}
        return self._index.get(term)

    def to_json(self, fmt_state=str) -> dict:
        return {
            "initial": self.initial,
            "states": [fmt_state(t) for t in self.state_table],
            "transitions": [
                {"src": s, "action": str(a), "dst": d, **({"rule": r} if r else {})}
                for s, a, d, r in self.transitions
            ],
        }

    def to_dot(self, fmt_state=str, name="lts") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point];']
        for i, t in enumerate(self.state_table):
            label = json.dumps(fmt_state(t))
            lines.append(f"  s{i} [label={label}];")
        lines.append(f"  init -> s{self.initial};")
        for s, a, d, r in self.transitions:
            label = str(a) if r is None else f"{a} [{r}]"
            lines.append(f"  s{s} -> s{d} [label={json.dumps(label)}];")
        lines.append("}")
        return "\n".join(lines)


def explore(initial: Hashable, step: Callable, state_bound: int) -> Lts:
    """Breadth-first reachable LTS of ``initial`` under ``step``.

    ``step(state)`` yields ``(action, successor)`` or ``(action, successor,
    rule)`` tuples.  Raises StateBoundExceeded once more than ``state_bound``
    distinct states have been discovered.
    """
    return explore_many([initial], step, state_bound)


def explore_many(initials: Iterable[Hashable], step: Callable, state_bound: int) -> Lts:
    """Like :func:`explore` but seeds several roots into one shared table."""
    table: list = []
    index: dict = {}
    transitions: list = []
    queue: deque = deque()

    def intern(term) -> int:
        i = index.get(term)
        if i is None:
            i = len(table)
            if i >= state_bound:
                raise StateBoundExceeded(f"more than {state_bound} states")
            index[term] = i
            table.append(term)
            queue.append(i)
        return i

    for t in initials:
        intern(t)
    while queue:
        s = queue.popleft()
        seen = set()
        for entry in step(table[s]):
            a, nxt = entry[0], entry[1]
            rule = entry[2] if len(entry) > 2 else None
            d = intern(nxt)
            key = (a, d, rule)
            if key not in seen:
                seen.add(key)
                transitions.append((s, a, d, rule))
    lts = Lts(table, transitions, 0)
    lts._index = index
    return lts


def trace_to(lts: Lts, target: int, start: Optional[int] = None) -> list:
    """Shortest explicit trace from ``start`` (default initial) to ``target``."""
    start = lts.initial if start is None else start
    prev = {start: None}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        if s == target:
            break
        for a, d, _ in lts.successors(s):
            if d not in prev:
                prev[d] = (s, a)
                queue.append(d)
    if target not in prev:
        return []
    path = []
    node = target
    while prev[node] is not None:
        node, a = prev[node]
        path.append(a)
    return path[::-1]


def sorted_successors(lts: Lts, s: int) -> list:
    return sorted(lts.successors(s), key=lambda t: (action_key(t[0]), t[1]))


__all__ = ["Lts", "explore", "explore_many", "trace_to", "sorted_successors", "visible", "TAU"]
