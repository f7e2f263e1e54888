"""Safety Hennessy-Milner logic with recursion: syntax, after, normal form, satisfaction."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from . import core
from .core import IN, TAU, Bind, Lit, Pattern, Universe, term
from .errors import (
    ClosureBoundExceeded,
    FreeVariable,
    PayloadConstrainedInput,
    UnguardedFixpointVariable,
)
from .lts import Lts
from .parsing import FreshNames, TokenStream, identifiers, parse_condition, parse_pattern


@term
class Tt:
    pass


@term
class Ff:
    pass


@term
class Nec:
    """One necessity ``[pattern, cond] cont``; binders of the pattern scope over both."""

    pattern: Pattern
    cond: object
    cont: object


@term
class Conj:
    branches: tuple


@term
class Max:
    var: str
    body: object


@term
class FVar:
    name: str


TT = Tt()
FF = Ff()


# -- construction ---------------------------------------------------------


def necessity(pattern, cond, cont) -> Conj:
    return Conj((Nec(pattern, cond, cont),))


def unfold(f: Max):
    return _replace_fvar(f.body, f.var, f)


def top(f):
    """Unfold leading fixpoints of a closed formula (terminates by guardedness)."""
    while isinstance(f, Max):
        f = unfold(f)
    return f


def conj(parts: Iterable):
    """Smart conjunction: drops tt, ff absorbs, flattens, unfolds fixpoints.

    A single surviving conjunct is returned unchanged; fixpoints are unfolded
    only when they have to be merged with other conjuncts.
    """
    parts = [p for p in parts if p != TT]
    if any(p == FF for p in parts):
        return FF
    if not parts:
        return TT
    if len(parts) == 1:
        return parts[0]
    branches: list = []
    for p in parts:
        p = top(p)
        if p == FF:
            return FF
        if p == TT:
            continue
        if not isinstance(p, Conj):
            raise ValueError(f"cannot conjoin open formula {format_formula(p)}")
        for b in p.branches:
            if b not in branches:
                branches.append(b)
    if not branches:
        return TT
    return Conj(tuple(branches))


# -- substitution ---------------------------------------------------------


def subst(f, sigma: Mapping):
    """Replace free data variables by values; binders shadow.

    Values are closed, so no renaming is ever needed to avoid capture.
    """
    if not sigma or isinstance(f, (Tt, Ff, FVar)):
        return f
    if isinstance(f, Conj):
        return Conj(tuple(_subst_nec(b, sigma) for b in f.branches))
    if isinstance(f, Max):
        return Max(f.var, subst(f.body, sigma))
    raise TypeError(f"not a formula: {f!r}")


def _subst_nec(b: Nec, sigma):
    pat = core.subst_pattern(b.pattern, sigma)
    bound = core.bv(b.pattern)
    inner = {k: v for k, v in sigma.items() if k not in bound}
    return Nec(pat, core.subst_cond(b.cond, inner), subst(b.cont, inner))


def _replace_fvar(f, var, replacement):
    if isinstance(f, FVar):
        return replacement if f.name == var else f
    if isinstance(f, (Tt, Ff)):
        return f
    if isinstance(f, Conj):
        return Conj(
            tuple(
                Nec(b.pattern, b.cond, _replace_fvar(b.cont, var, replacement))
                for b in f.branches
            )
        )
    if isinstance(f, Max):
        if f.var == var:
            return f
        return Max(f.var, _replace_fvar(f.body, var, replacement))
    raise TypeError(f"not a formula: {f!r}")


def free_fvars(f) -> frozenset:
    if isinstance(f, FVar):
        return frozenset((f.name,))
    if isinstance(f, Conj):
        return frozenset().union(*(free_fvars(b.cont) for b in f.branches))
    if isinstance(f, Max):
        return free_fvars(f.body) - {f.var}
    return frozenset()


def fv_data(f) -> frozenset:
    """Free data variables."""
    if isinstance(f, Conj):
        out = frozenset()
        for b in f.branches:
            inner = core.fv_cond(b.cond) | fv_data(b.cont)
            out |= core.fv_pattern(b.pattern) | (inner - core.bv(b.pattern))
        return out
    if isinstance(f, Max):
        return fv_data(f.body)
    return frozenset()


# -- after ----------------------------------------------------------------


def after(f, a):
    """Residual of a closed formula after the explicit action ``a``."""
    if a is TAU or isinstance(f, (Tt, Ff)):
        return f
    if isinstance(f, Max):
        return after(unfold(f), a)
    if isinstance(f, Conj):
        return conj(_after_nec(b, a) for b in f.branches)
    raise ValueError(f"after is undefined on open formula {format_formula(f)}")


def _after_nec(b: Nec, a):
    sigma = core.symbolic_matches(b.pattern, b.cond, a)
    if sigma is None:
        return TT
    return subst(b.cont, sigma)


def after_trace(f, trace: Iterable):
    for a in trace:
        f = after(f, a)
    return f


# -- parsing --------------------------------------------------------------


def parse_formula(text: str):
    """Parse ``.shml`` text, desugaring values embedded in patterns.

    ``[x?(_)] F`` with ``x`` bound becomes ``[(x1)?(_), x1 = x] F`` and
    ``[b!cls] F`` becomes ``[(x1)!(y1), x1 = b && y1 = cls] F``, where the
    fresh names avoid every identifier of the text.
    """
    ts = TokenStream(text)
    fresh = FreshNames(identifiers(ts))
    f = _parse_conj(ts, fresh, frozenset(), frozenset(), frozenset())
    ts.expect_eof()
    return f


def _parse_conj(ts, fresh, scope, fvars, unguarded):
    left = _parse_unary(ts, fresh, scope, fvars, unguarded)
    if ts.accept("&"):
        right = _parse_conj(ts, fresh, scope, fvars, unguarded)
        if isinstance(left, FVar) or isinstance(right, FVar):
            ts.fail("a fixpoint variable cannot be a conjunct")
        return conj([left, right])
    return left


def _parse_unary(ts, fresh, scope, fvars, unguarded):
    tok = ts.current
    if ts.accept("("):
        f = _parse_conj(ts, fresh, scope, fvars, unguarded)
        ts.expect(")")
        return f
    if ts.at("["):
        return _parse_necessity(ts, fresh, scope, fvars)
    if tok.kind != "ident":
        ts.fail("expected a formula")
    ts.advance()
    if tok.text == "tt":
        return TT
    if tok.text == "ff":
        return FF
    if tok.text == "max":
        var = ts.ident("fixpoint variable")
        ts.expect(".")
        body = _parse_conj(ts, fresh, scope, fvars | {var}, unguarded | {var})
        return Max(var, body)
    if tok.text not in fvars:
        raise FreeVariable(f"free fixpoint variable {tok.text!r}", tok.line, tok.column)
    if tok.text in unguarded:
        raise UnguardedFixpointVariable(
            f"fixpoint variable {tok.text!r} is not guarded", tok.line, tok.column
        )
    return FVar(tok.text)


def _parse_necessity(ts, fresh, scope, fvars):
    start = ts.expect("[")
    pat = parse_pattern(ts, scope)
    inner_scope = scope | core.bv(pat)
    user = core.TRUE
    if ts.accept(","):
        user = parse_condition(ts, inner_scope)
    ts.expect("]")
    if pat.direction == IN:
        payload = pat.payload
        if isinstance(payload, Lit) or payload.name in core.fv_cond(user):
            raise PayloadConstrainedInput(
                "input necessities cannot constrain the payload",
                start.line,
                start.column,
            )
    pat, cond = _desugar(pat, user, fresh)
    cont = _parse_unary(ts, fresh, inner_scope | core.bv(pat), fvars, frozenset())
    return necessity(pat, cond, cont)


def _desugar(pat: Pattern, user, fresh):
    eqs = []
    port, payload = pat.port, pat.payload
    if isinstance(port, Lit):
        name = fresh("x")
        eqs.append(core.eq(core.Var(name), port.expr))
        port = Bind(name)
    if isinstance(payload, Lit):
        name = fresh("y")
        eqs.append(core.eq(core.Var(name), payload.expr))
        payload = Bind(name)
    return Pattern(pat.direction, port, payload), core.mk_and(*eqs, user)


# -- printing -------------------------------------------------------------


def format_formula(f, unary=False, trailing=False) -> str:
    if isinstance(f, Tt):
        return "tt"
    if isinstance(f, Ff):
        return "ff"
    if isinstance(f, FVar):
        return f.name
    if isinstance(f, Max):
        text = f"max {f.var}. " + format_formula(f.body)
        return f"({text})" if trailing else text
    if isinstance(f, Conj):
        n = len(f.branches)
        parts = [
            _format_nec(b, trailing if i == n - 1 else True) for i, b in enumerate(f.branches)
        ]
        text = " & ".join(parts)
        return f"({text})" if unary and n > 1 else text
    raise TypeError(f"not a formula: {f!r}")


def _format_nec(b: Nec, trailing: bool) -> str:
    head = core.format_pattern(b.pattern)
    if b.cond != core.TRUE:
        head += ", " + core.format_cond(b.cond)
    return f"[{head}] " + format_formula(b.cont, True, trailing)


# -- canonical forms ------------------------------------------------------


def canonical(f, _env=None, _depth=0, _fenv=None):
    """Alpha-normal form with conjunction branches sorted (equality modulo AC)."""
    env = _env or {}
    fenv = _fenv or {}
    if isinstance(f, (Tt, Ff)):
        return f
    if isinstance(f, FVar):
        return FVar(fenv.get(f.name, f.name))
    if isinstance(f, Max):
        name = f"X{len(fenv)}"
        return Max(name, canonical(f.body, env, _depth, {**fenv, f.var: name}))
    if isinstance(f, Conj):
        out = []
        for b in f.branches:
            renaming = dict(env)
            k = _depth
            for part in (b.pattern.port, b.pattern.payload):
                if isinstance(part, Bind) and part.name:
                    renaming[part.name] = f"v{k}"
                    k += 1
            pat = core.Pattern(
                b.pattern.direction,
                _rename_part(b.pattern.port, env, renaming),
                _rename_part(b.pattern.payload, env, renaming),
            )
            cond = core.rename_cond(b.cond, renaming)
            out.append(Nec(pat, cond, canonical(b.cont, renaming, k, fenv)))
        out.sort(key=lambda n: format_formula(Conj((n,))))
        return Conj(tuple(out))
    raise TypeError(f"not a formula: {f!r}")


def _rename_part(part, outer, renaming):
    if isinstance(part, Lit):
        return Lit(core.rename_expr(part.expr, outer))
    if part.name is None:
        return part
    return Bind(renaming[part.name])


def equivalent_syntax(f, g) -> bool:
    return canonical(f) == canonical(g)


# -- normal form ----------------------------------------------------------


@dataclass
class NfReport:
    ok: bool
    clause: Optional[str] = None
    message: str = ""
    witness: Optional[core.Action] = None

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        out = {"normal_form": self.ok}
        if not self.ok:
            out.update(clause=self.clause, message=self.message)
            if self.witness is not None:
                out["witness"] = str(self.witness)
        return out


def formula_constants(f) -> set:
    out: set = set()
    if isinstance(f, Conj):
        for b in f.branches:
            out |= core.cond_constants(b.cond)
            for part in (b.pattern.port, b.pattern.payload):
                if isinstance(part, Lit) and isinstance(part.expr, core.Const):
                    out.add(part.expr.value)
            out |= formula_constants(b.cont)
    elif isinstance(f, Max):
        out |= formula_constants(f.body)
    return out


def _syntactic_checks(f, fvars=frozenset(), unguarded=frozenset()):
    if isinstance(f, FVar):
        if f.name not in fvars:
            return "closed", f"free fixpoint variable {f.name}"
        if f.name in unguarded:
            return "guarded", f"fixpoint variable {f.name} is not guarded"
        return None
    if isinstance(f, Max):
        if f.var not in free_fvars(f.body):
            return "fixpoint", f"max {f.var} does not use {f.var} in its body"
        if isinstance(f.body, (Tt, Ff)):
            return "top-level", "tt/ff directly under a fixpoint"
        return _syntactic_checks(f.body, fvars | {f.var}, unguarded | {f.var})
    if isinstance(f, Conj):
        for b in f.branches:
            if b.pattern.direction == IN and isinstance(b.pattern.payload, Bind):
                if b.pattern.payload.name and b.pattern.payload.name in core.fv_cond(b.cond):
                    return "input", "input necessity constrains its payload binder"
            if isinstance(b.pattern.payload, Lit) and b.pattern.direction == IN:
                return "input", "input necessity fixes its payload"
            bad = _syntactic_checks(b.cont, fvars, frozenset())
            if bad:
                return bad
    return None


def is_normal_form(f, universe: Universe, instance_bound: int = 20000) -> NfReport:
    """Check the normal-form conditions, returning the first violation.

    Disjointness of conjunction branches is decided per closed instance of
    every reachable conjunction, by enumerating the universe extended with
    the constants that the instance's conditions mention.
    """
    bad = _syntactic_checks(f)
    if bad:
        clause, message = bad
        return NfReport(False, clause, message)
    if fv_data(f):
        return NfReport(False, "closed", "formula has free data variables")
    seen = {f}
    work = deque([f])
    while work:
        g = top(work.popleft())
        if not isinstance(g, Conj):
            continue
        consts = formula_constants(Conj(tuple(Nec(b.pattern, b.cond, TT) for b in g.branches)))
        ext = universe.extended(
            ports=[v.name for v in consts if isinstance(v, core.Atom)], values=consts
        )
        for a in ext.actions():
            matches = []
            for b in g.branches:
                sigma = core.symbolic_matches(b.pattern, b.cond, a)
                if sigma is not None:
                    matches.append(subst(b.cont, sigma))
            if len(matches) >= 2:
                return NfReport(
                    False, "disjoint", f"action {a} satisfies two conjunction branches", a
                )
            for h in matches:
                if h not in seen:
                    if len(seen) >= instance_bound:
                        raise ClosureBoundExceeded(
                            f"more than {instance_bound} closed formula instances"
                        )
                    seen.add(h)
                    work.append(h)
    return NfReport(True)


# -- satisfaction ---------------------------------------------------------


@dataclass
class SatResult:
    holds: bool
    witness: Optional[list] = None
    state: Optional[int] = None
    explored: int = 0

    def __bool__(self):
        return self.holds

    @property
    def visible_witness(self) -> Optional[list]:
        return None if self.witness is None else core.visible(self.witness)


def satisfies(lts: Lts, f, start: Optional[int] = None, closure_bound: int = 500000) -> SatResult:
    """Decide whether state ``start`` (default: initial) satisfies the closed ``f``.

    The search explores pairs of a state and a closed residual formula;
    silent moves keep the formula, a visible action moves to the
    instantiated continuation of each matching necessity.  A reachable
    ``ff`` refutes the formula and its path is returned as the witness.
    """
    s0 = lts.initial if start is None else start
    f0 = top(f)
    if f0 == FF:
        return SatResult(False, [], s0, 1)
    if f0 == TT:
        return SatResult(True, None, None, 1)
    root = (s0, f0)
    parent = {root: None}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        s, g = node
        for a, d, _ in lts.successors(s):
            if a is TAU:
                nexts = [g]
            else:
                nexts = []
                for b in g.branches:
                    sigma = core.symbolic_matches(b.pattern, b.cond, a)
                    if sigma is not None:
                        nexts.append(top(subst(b.cont, sigma)))
            for h in nexts:
                if h == TT:
                    continue
                if h == FF:
                    path = [a]
                    cur = node
                    while parent[cur] is not None:
                        cur, act = parent[cur]
                        path.append(act)
                    return SatResult(False, path[::-1], d, len(parent))
                child = (d, h)
                if child not in parent:
                    if len(parent) >= closure_bound:
                        raise ClosureBoundExceeded(
                            f"more than {closure_bound} state/formula pairs"
                        )
                    parent[child] = (node, a)
                    queue.append(child)
    return SatResult(True, None, None, len(parent))


def is_satisfiable(f) -> bool:
    """A closed sHML formula is satisfiable iff the inert process satisfies it."""
    return top(f) != FF
