"""Verification and quantitative analyses over explored composites.

Universally quantified enforcement properties are approximated by checking
a finite corpus of systems within exploration bounds: a ``FailsWithWitness``
verdict is a genuine counterexample, ``Holds`` is evidence for the given
corpus only, and ``InconclusiveAtBound`` reports truncated exploration.
"""
from __future__ import annotations

import heapq
import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import core
from . import formula as fm
from . import monitor as mon
from . import process as proc
from .core import IN, OUT, TAU, Bind, Pattern, Universe
from .errors import BoundExceeded, ClosureBoundExceeded
from .instrument import Composite, composite_step, explore_composite
from .lts import Lts, explore_many

HOLDS = "Holds"
FAILS = "FailsWithWitness"
INCONCLUSIVE = "InconclusiveAtBound"


# -- strong bisimilarity --------------------------------------------------


def refine(successors: Sequence[Sequence[tuple]]) -> list:
    """Signature-based partition refinement.

    ``successors[s]`` lists ``(action, target)`` pairs.  Returns the list of
    block assignments after each round; the last one is the coarsest strong
    bisimulation.
    """
    n = len(successors)
    block = [0] * n
    history = [block]
    count = 1 if n else 0
    while True:
        ids: dict = {}
        new = []
        for s in range(n):
            sig = (block[s], frozenset((a, block[d]) for a, d in successors[s]))
            new.append(ids.setdefault(sig, len(ids)))
        history.append(new)
        block = new
        if len(ids) == count:
            return history
        count = len(ids)


def _union_successors(lts1: Lts, lts2: Lts) -> list:
    offset = len(lts1.state_table)
    succ = [[(a, d) for a, d, _ in lts1.successors(s)] for s in lts1.states]
    succ += [[(a, d + offset) for a, d, _ in lts2.successors(s)] for s in lts2.states]
    return succ


def distinguishing_trace(successors, history, s: int, t: int) -> list:
    """Actions leading from ``(s, t)`` to a pair where one side has a move the other lacks."""
    k = next(i for i, blk in enumerate(history) if blk[s] != blk[t])
    trace: list = []
    while k > 0:
        prev = history[k - 1]
        found = None
        for x, y in ((s, t), (t, s)):
            for a, d in successors[x]:
                matches = [e for b, e in successors[y] if b == a]
                if all(prev[e] != prev[d] for e in matches):
                    found = (a, d, matches)
                    break
            if found:
                break
        a, d, matches = found
        trace.append(a)
        if not matches:
            return trace
        s, t = d, matches[0]
        k = next(i for i, blk in enumerate(history) if blk[s] != blk[t])
    return trace


@dataclass
class BisimResult:
    equivalent: bool
    witness: Optional[list] = None

    def __bool__(self):
        return self.equivalent


def bisimilar(lts1: Lts, lts2: Lts) -> BisimResult:
    """Strong bisimilarity of the two initial states over visible actions and tau."""
    succ = _union_successors(lts1, lts2)
    history = refine(succ)
    s, t = lts1.initial, lts2.initial + len(lts1.state_table)
    if history[-1][s] == history[-1][t]:
        return BisimResult(True)
    return BisimResult(False, distinguishing_trace(succ, history, s, t))


# -- verdicts -------------------------------------------------------------


@dataclass
class Verdict:
    check: str
    status: str
    witness: Optional[list] = None
    bound: Optional[int] = None
    detail: str = ""
    seed: Optional[int] = None

    def __bool__(self):
        return self.status == HOLDS

    def to_json(self) -> dict:
        out: dict = {"check": self.check, "status": self.status, "bound": self.bound}
        if self.witness is not None:
            out["witness"] = [str(a) for a in self.witness]
        if self.detail:
            out["detail"] = self.detail
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def _merge(check: str, bound: int, failures: list, inconclusive: list) -> Verdict:
    if failures:
        return failures[0]
    if inconclusive:
        return Verdict(check, INCONCLUSIVE, bound=bound, detail="; ".join(inconclusive))
    return Verdict(check, HOLDS, bound=bound)


def check_soundness(e, f, corpus, universe: Universe, state_bound: int = 10000) -> Verdict:
    """Every instrumented corpus system satisfies ``f``.

    An unsatisfiable formula makes the requirement vacuous.
    """
    if not fm.is_satisfiable(f):
        return Verdict("soundness", HOLDS, bound=state_bound, detail="formula is unsatisfiable")
    failures, inconclusive = [], []
    for i, p in enumerate(corpus):
        try:
            lts = explore_composite(Composite(e, p), universe, state_bound)
            res = fm.satisfies(lts, f)
        except BoundExceeded as exc:
            inconclusive.append(f"system {i}: {exc}")
            continue
        if not res:
            state = lts.state_table[res.state]
            failures.append(
                Verdict("soundness", FAILS, res.witness, state_bound, f"system {i} reaches {state}")
            )
    return _merge("soundness", state_bound, failures, inconclusive)


def check_transparency(e, f, corpus, universe: Universe, state_bound: int = 10000) -> Verdict:
    """Every corpus system satisfying ``f`` is bisimilar to its instrumentation."""
    failures, inconclusive = [], []
    for i, p in enumerate(corpus):
        try:
            lp = proc.explore_lts(p, universe, state_bound)
            if not fm.satisfies(lp, f):
                continue
            lc = explore_composite(Composite(e, p), universe, state_bound)
        except BoundExceeded as exc:
            inconclusive.append(f"system {i}: {exc}")
            continue
        res = bisimilar(lc, lp)
        if not res:
            failures.append(
                Verdict("transparency", FAILS, res.witness, state_bound,
                        f"system {i} is not bisimilar to its instrumentation")
            )
    return _merge("transparency", state_bound, failures, inconclusive)


def check_eventual_transparency(
    e, f, corpus, universe: Universe, depth: int = 8, state_bound: int = 10000,
    pair_bound: int = 200000,
) -> Verdict:
    """Along every composite run of at most ``depth`` visible actions, a reached
    ``e'[p']`` whose process satisfies the residual formula is bisimilar to ``p'``."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    check = "eventual-transparency"
    failures, inconclusive = [], []
    for i, p in enumerate(corpus):
        try:
            failure = _eventual_one(e, f, p, universe, depth, state_bound, pair_bound)
        except BoundExceeded as exc:
            inconclusive.append(f"system {i}: {exc}")
            continue
        if failure is not None:
            trace, state = failure
            failures.append(
                Verdict(check, FAILS, trace, depth,
                        f"system {i} reaches {state}, not bisimilar to its process")
            )
    return _merge(check, depth, failures, inconclusive)


def _eventual_one(e, f, p, universe, depth, state_bound, pair_bound):
    lc = explore_composite(Composite(e, p), universe, state_bound)
    lp = explore_many([c.process for c in lc.state_table],
                      lambda q: proc.step(q, universe), state_bound)
    history = refine(_union_successors(lc, lp))
    block = history[-1]
    offset = len(lc.state_table)
    sat_cache: dict = {}

    def satisfied(pi: int, g) -> bool:
        if g == fm.TT:
            return True
        if g == fm.FF:
            return False
        key = (pi, g)
        if key not in sat_cache:
            sat_cache[key] = bool(fm.satisfies(lp, g, start=pi))
        return sat_cache[key]

    root = (lc.initial, fm.top(f))
    parent = {root: None}
    queue = deque([(root, 0)])
    while queue:
        node, d = queue.popleft()
        c, g = node
        pi = lp.index_of(lc.state_table[c].process)
        if satisfied(pi, g) and block[c] != block[pi + offset]:
            path = []
            cur = node
            while parent[cur] is not None:
                cur, a = parent[cur]
                path.append(a)
            return path[::-1], lc.state_table[c]
        for a, dst, _ in lc.successors(c):
            if a is TAU:
                child, nd = (dst, g), d
            else:
                if d >= depth:
                    continue
                child, nd = (dst, fm.top(fm.after(g, a))), d + 1
            if child not in parent:
                if len(parent) >= pair_bound:
                    raise ClosureBoundExceeded(f"more than {pair_bound} run prefixes")
                parent[child] = (node, a)
                queue.append((child, nd))
    return None


# -- modification count ---------------------------------------------------

IDENTITY, MODIFY, INSERT, BLOCKED = "identity", "modify", "insert", "blocked"


@dataclass
class McResult:
    """Least modification count over all composite derivations of a trace.

    ``count`` is None when the search is Divergent (insertion chains exceed
    the step bound or no derivation terminates).  ``derivation`` lists
    ``(tag, action, rule)`` entries.  A derivation that gets stuck with
    visible actions left ends in a ``blocked`` entry, and ``residual`` holds
    the number of those actions.
    """

    count: Optional[int]
    derivation: list = field(default_factory=list)
    residual: int = 0

    @property
    def divergent(self) -> bool:
        return self.count is None

    def to_json(self) -> dict:
        return {
            "count": "Divergent" if self.count is None else self.count,
            "derivation": [
                {"tag": t, "action": "." if a is None else str(a), **({"rule": r} if r else {})}
                for t, a, r in self.derivation
            ],
        }


def trace_universe(universe: Universe, trace) -> Universe:
    """Extend ``universe`` with the ports and payloads that ``trace`` mentions."""
    acts = [a for a in trace if a is not TAU]
    return universe.extended([a.port for a in acts], [a.payload for a in acts])


def modification_count(e, trace, universe: Universe, step_bound: int = 256) -> McResult:
    trace = list(trace)
    u = trace_universe(universe, trace)
    systems = [proc.trace_system(trace[i:]) for i in range(len(trace) + 1)]
    position = {s: i for i, s in enumerate(systems)}
    residual = [len(core.visible(trace[i:])) for i in range(len(trace) + 1)]
    sink = ("sink",)
    start = (e, 0)
    dist = {start: 0}
    parent: dict = {start: None}
    tie = itertools.count()
    heap = [(0, next(tie), start)]
    limit = step_bound * (len(trace) + 1)
    expanded = 0
    while heap:
        d, _, node = heapq.heappop(heap)
        if node == sink:
            return _mc_result(d, parent, sink)
        if d > dist.get(node, d):
            continue
        expanded += 1
        if expanded > limit:
            return McResult(None)
        m, i = node
        steps = composite_step(Composite(m, systems[i]), u)
        edges = []
        if not steps:
            edges.append((residual[i], sink, (BLOCKED, None, None)))
        for a, nxt, rule in steps:
            j = position[nxt.process]
            if j == i:
                edges.append((1, (nxt.monitor, j), (INSERT, a, rule)))
            elif a == trace[i]:
                edges.append((0, (nxt.monitor, j), (IDENTITY, a, rule)))
            else:
                edges.append((1, (nxt.monitor, j), (MODIFY, a, rule)))
        for w, child, label in edges:
            nd = d + w
            if nd < dist.get(child, nd + 1):
                dist[child] = nd
                parent[child] = (node, label)
                heapq.heappush(heap, (nd, next(tie), child))
    return McResult(None)


def _mc_result(count, parent, sink) -> McResult:
    labels = []
    node = sink
    while parent[node] is not None:
        node, label = parent[node]
        labels.append(label)
    labels.reverse()
    residual = count - sum(1 for t, _, _ in labels if t in (MODIFY, INSERT))
    if residual == 0:
        labels.pop()
    return McResult(count, labels, residual)


# -- intrusiveness comparison ---------------------------------------------


@dataclass
class CompareReport:
    candidate_etp: frozenset
    reference_etp: frozenset
    rows: list

    @property
    def comparable(self) -> bool:
        """The reference uses no capability the candidate lacks."""
        return self.reference_etp <= self.candidate_etp

    @property
    def violations(self) -> list:
        return [r for r in self.rows if r[1] is None or (r[2] is not None and r[1] > r[2])]

    def to_json(self) -> dict:
        show = lambda c: "Divergent" if c is None else c  # noqa: E731
        return {
            "candidate_etp": sorted(self.candidate_etp),
            "reference_etp": sorted(self.reference_etp),
            "comparable": self.comparable,
            "rows": [
                {"trace": core.format_trace(t), "candidate": show(a), "reference": show(b)}
                for t, a, b in self.rows
            ],
            "violations": len(self.violations),
        }


def compare_intrusiveness(candidate, reference, f, traces, universe: Universe,
                          step_bound: int = 256) -> CompareReport:
    """Per-trace modification counts of ``candidate`` against ``reference``.

    ``f`` is the formula both monitors are meant to enforce; it is recorded
    for context only because adequacy is checked separately.
    """
    rows = []
    for t in traces:
        a = modification_count(candidate, t, universe, step_bound).count
        b = modification_count(reference, t, universe, step_bound).count
        rows.append((list(t), a, b))
    return CompareReport(mon.etp(candidate), mon.etp(reference), rows)


# -- random instances -----------------------------------------------------


def random_process(seed: int, universe: Universe, size_bound: int):
    """A closed, guarded regular process with about ``size_bound`` constructors."""
    if size_bound < 1:
        raise ValueError("size_bound must be at least 1")
    if size_bound == 1:
        return proc.NIL
    rng = random.Random(seed)
    names = (f"x{i}" for i in itertools.count())
    rec = rng.random() < 0.6
    budget = [size_bound - (1 if rec else 0)]
    body = _gen_proc(rng, universe, budget, (), rec, False, names)
    return proc.Rec("r", body) if rec and "r" in _recvars(body) else body


def _recvars(p) -> set:
    if isinstance(p, proc.RecVar):
        return {p.name}
    out: set = set()
    for attr in ("cont", "then", "orelse", "left", "right", "body"):
        if hasattr(p, attr):
            out |= _recvars(getattr(p, attr))
    return out


def _gen_proc(rng, u, budget, scope, rec, guarded, names, prefix_only=False):
    """Generate within the shared constructor ``budget``.

    ``guarded`` records that a prefix separates this position from the
    recursion binder, so the variable ``r`` may appear here.
    """
    if budget[0] <= 0 and not prefix_only:
        return proc.RecVar("r") if rec and guarded and rng.random() < 0.7 else proc.NIL
    budget[0] -= 1
    kinds = ["in", "out", "tau", "choice", "if"]
    weights = [4, 4, 1, 0 if prefix_only or budget[0] < 2 else 2, 0 if prefix_only or not scope else 1]
    kind = rng.choices(kinds, weights)[0]
    if kind == "in":
        x = next(names)
        cont = _gen_proc(rng, u, budget, scope + (x,), rec, True, names)
        return proc.InP(rng.choice(u.ports), x, cont)
    if kind == "out":
        payload = (core.Var(rng.choice(scope)) if scope and rng.random() < 0.5
                   else core.Const(rng.choice(u.values)))
        return proc.OutP(rng.choice(u.ports), payload, _gen_proc(rng, u, budget, scope, rec, True, names))
    if kind == "tau":
        return proc.TauP(_gen_proc(rng, u, budget, scope, rec, True, names))
    if kind == "choice":
        left = _gen_proc(rng, u, budget, scope, rec, guarded, names, prefix_only=True)
        right = _gen_proc(rng, u, budget, scope, rec, guarded, names, prefix_only=True)
        return proc.Choice(left, right)
    cond = core.eq(core.Var(rng.choice(scope)), core.Const(rng.choice(u.values)))
    then = _gen_proc(rng, u, budget, scope, rec, guarded, names)
    return proc.If(cond, then, _gen_proc(rng, u, budget, scope, rec, guarded, names))


def random_formula_nf(seed: int, universe: Universe, size_bound: int):
    """A closed normal-form formula of roughly ``size_bound`` constructors.

    Branches of every conjunction carry pairwise distinct (direction, port)
    keys, except that an output key may be split on its payload into
    complementary ``=``/``!=`` branches, so disjointness holds by construction.
    """
    if size_bound < 1:
        raise ValueError("size_bound must be at least 1")
    rng = random.Random(seed)
    if size_bound == 1:
        return fm.TT
    names = (f"z{i}" for i in itertools.count())
    use_max = rng.random() < 0.6
    budget = [size_bound - (1 if use_max else 0)]
    body = _gen_conj(rng, universe, budget, (), use_max, names)
    return fm.Max("X", body) if "X" in fm.free_fvars(body) else body


def _gen_conj(rng, u, budget, payloads, use_max, names):
    keys = [(d, p) for d in (IN, OUT) for p in u.ports]
    rng.shuffle(keys)
    width = rng.randint(1, min(3, len(keys)))
    branches = []
    for direction, port in keys[:width]:
        if budget[0] <= 0:
            break
        x, y = next(names), next(names)
        pat = Pattern(direction, Bind(x), Bind(y))
        port_cond = core.eq(core.Var(x), core.port_const(port))
        if direction == OUT and rng.random() < 0.4:
            ref = (core.Var(rng.choice(payloads)) if payloads and rng.random() < 0.5
                   else core.Const(rng.choice(u.values)))
            for op in ("=", "!="):
                budget[0] -= 1
                cond = core.mk_and(port_cond, core.Cmp(op, core.Var(y), ref))
                cont = _gen_cont(rng, u, budget, payloads + (y,), use_max, names)
                branches.append(fm.Nec(pat, cond, cont))
        else:
            budget[0] -= 1
            cont = _gen_cont(rng, u, budget, payloads + (y,), use_max, names)
            branches.append(fm.Nec(pat, port_cond, cont))
    if not branches:
        return fm.TT
    return fm.Conj(tuple(branches))


def _gen_cont(rng, u, budget, payloads, use_max, names):
    if budget[0] <= 0:
        return rng.choice([fm.FF, fm.FVar("X")] if use_max else [fm.FF, fm.TT])
    choice = rng.choices(["ff", "tt", "X", "conj"], [3, 1, 3 if use_max else 0, 4])[0]
    if choice == "ff":
        return fm.FF
    if choice == "tt":
        return fm.TT
    if choice == "X":
        return fm.FVar("X")
    budget[0] -= 1
    return _gen_conj(rng, u, budget, payloads, use_max, names)


__all__ = [
    "HOLDS", "FAILS", "INCONCLUSIVE", "Verdict", "BisimResult", "McResult", "CompareReport",
    "refine", "bisimilar", "check_soundness", "check_transparency",
    "check_eventual_transparency", "modification_count", "compare_intrusiveness",
    "random_process", "random_formula_nf", "trace_universe",
]
