"""Regular value-passing process terms: syntax, LTS semantics and trace systems."""
from __future__ import annotations

from typing import Iterable, Mapping

from . import core
from .core import IN, OUT, TAU, Action, Universe, term
from .errors import ClosureBoundExceeded, FreeVariable, UnguardedRecursion
from .lts import Lts, explore
from .parsing import TokenStream, parse_condition, parse_expr


@term
class Nil:
    pass


@term
class InP:
    port: str
    binder: str
    cont: object


@term
class OutP:
    port: str
    payload: object
    cont: object


@term
class TauP:
    cont: object


@term
class Let:
    binder: str
    expr: object
    cont: object


@term
class If:
    cond: object
    then: object
    orelse: object


@term
class Choice:
    left: object
    right: object


@term
class Rec:
    var: str
    body: object


@term
class RecVar:
    name: str


NIL = Nil()

_KEYWORDS = {"nil", "rec", "tau", "let", "in", "if", "then", "else"}


# -- parsing --------------------------------------------------------------


def parse_process(text: str):
    """Parse the ``.proc`` surface syntax into a closed, guarded process."""
    ts = TokenStream(text)
    p = _parse_sum(ts, frozenset(), frozenset(), frozenset())
    ts.expect_eof()
    return p


def _parse_sum(ts, scope, recvars, unguarded):
    left = _parse_unary(ts, scope, recvars, unguarded)
    if ts.accept("+"):
        return Choice(left, _parse_sum(ts, scope, recvars, unguarded))
    return left


def _parse_unary(ts, scope, recvars, unguarded):
    tok = ts.current
    if ts.accept("("):
        p = _parse_sum(ts, scope, recvars, unguarded)
        ts.expect(")")
        return p
    if tok.kind != "ident":
        ts.fail("expected a process")
    word = tok.text
    if word == "nil":
        ts.advance()
        return NIL
    if word == "rec":
        ts.advance()
        var = ts.ident("recursion variable")
        ts.expect(".")
        return Rec(var, _parse_sum(ts, scope, recvars | {var}, unguarded | {var}))
    if word == "tau":
        ts.advance()
        ts.expect(".")
        return TauP(_parse_unary(ts, scope, recvars, frozenset()))
    if word == "let":
        ts.advance()
        x = ts.ident("binder")
        ts.expect("=")
        e = parse_expr(ts, scope)
        ts.expect("in")
        return Let(x, e, _parse_unary(ts, scope | {x}, recvars, frozenset()))
    if word == "if":
        ts.advance()
        c = parse_condition(ts, scope)
        ts.expect("then")
        p = _parse_unary(ts, scope, recvars, unguarded)
        ts.expect("else")
        q = _parse_unary(ts, scope, recvars, unguarded)
        return If(c, p, q)
    if ts.at(IN, 1):
        ts.advance()
        ts.advance()
        ts.expect("(")
        x = ts.ident("binder")
        ts.expect(")")
        ts.expect(".")
        return InP(word, x, _parse_unary(ts, scope | {x}, recvars, frozenset()))
    if ts.at(OUT, 1):
        ts.advance()
        ts.advance()
        e = parse_expr(ts, scope)
        ts.expect(".")
        return OutP(word, e, _parse_unary(ts, scope, recvars, frozenset()))
    if word in _KEYWORDS:
        ts.fail("unexpected keyword")
    ts.advance()
    if word not in recvars:
        raise FreeVariable(f"free recursion variable {word!r}", tok.line, tok.column)
    if word in unguarded:
        raise UnguardedRecursion(f"recursion variable {word!r} is not guarded", tok.line, tok.column)
    return RecVar(word)


# -- printing -------------------------------------------------------------


def format_process(p, unary=False, trailing=False) -> str:
    if isinstance(p, Nil):
        return "nil"
    if isinstance(p, RecVar):
        return p.name
    if isinstance(p, InP):
        return f"{p.port}?({p.binder}). " + format_process(p.cont, True, trailing)
    if isinstance(p, OutP):
        return f"{p.port}!{core.format_expr(p.payload)}. " + format_process(p.cont, True, trailing)
    if isinstance(p, TauP):
        return "tau. " + format_process(p.cont, True, trailing)
    if isinstance(p, Let):
        head = f"let {p.binder} = {core.format_expr(p.expr)} in "
        return head + format_process(p.cont, True, trailing)
    if isinstance(p, If):
        return (
            f"if {core.format_cond(p.cond)} then {format_process(p.then, True, False)}"
            f" else {format_process(p.orelse, True, trailing)}"
        )
    if isinstance(p, Choice):
        text = format_process(p.left, True, True) + " + " + format_process(p.right, False, trailing)
        return f"({text})" if unary else text
    if isinstance(p, Rec):
        text = f"rec {p.var}. " + format_process(p.body)
        return f"({text})" if trailing else text
    raise TypeError(f"not a process: {p!r}")


# -- substitution ---------------------------------------------------------


def subst(p, sigma: Mapping):
    """Replace free data variables by values (binders shadow)."""
    if not sigma or isinstance(p, (Nil, RecVar)):
        return p
    if isinstance(p, InP):
        inner = {k: v for k, v in sigma.items() if k != p.binder}
        return InP(p.port, p.binder, subst(p.cont, inner))
    if isinstance(p, OutP):
        return OutP(p.port, core.subst_expr(p.payload, sigma), subst(p.cont, sigma))
    if isinstance(p, TauP):
        return TauP(subst(p.cont, sigma))
    if isinstance(p, Let):
        inner = {k: v for k, v in sigma.items() if k != p.binder}
        return Let(p.binder, core.subst_expr(p.expr, sigma), subst(p.cont, inner))
    if isinstance(p, If):
        return If(core.subst_cond(p.cond, sigma), subst(p.then, sigma), subst(p.orelse, sigma))
    if isinstance(p, Choice):
        return Choice(subst(p.left, sigma), subst(p.right, sigma))
    if isinstance(p, Rec):
        return Rec(p.var, subst(p.body, sigma))
    raise TypeError(f"not a process: {p!r}")


def _replace_recvar(p, var: str, replacement):
    if isinstance(p, RecVar):
        return replacement if p.name == var else p
    if isinstance(p, Nil):
        return p
    if isinstance(p, InP):
        return InP(p.port, p.binder, _replace_recvar(p.cont, var, replacement))
    if isinstance(p, OutP):
        return OutP(p.port, p.payload, _replace_recvar(p.cont, var, replacement))
    if isinstance(p, TauP):
        return TauP(_replace_recvar(p.cont, var, replacement))
    if isinstance(p, Let):
        return Let(p.binder, p.expr, _replace_recvar(p.cont, var, replacement))
    if isinstance(p, If):
        return If(
            p.cond,
            _replace_recvar(p.then, var, replacement),
            _replace_recvar(p.orelse, var, replacement),
        )
    if isinstance(p, Choice):
        return Choice(
            _replace_recvar(p.left, var, replacement), _replace_recvar(p.right, var, replacement)
        )
    if isinstance(p, Rec):
        if p.var == var:
            return p
        return Rec(p.var, _replace_recvar(p.body, var, replacement))
    raise TypeError(f"not a process: {p!r}")


def unfold(p: Rec):
    return _replace_recvar(p.body, p.var, p)


# -- semantics ------------------------------------------------------------


def step(p, universe: Universe) -> list:
    """One-step transitions ``(explicit action, successor)`` of a closed process.

    Inputs range over the universe's values; conditionals and recursion
    resolve silently, ``let`` emits a tau.
    """
    out: list = []
    _step(p, universe.values, None, out)
    return out


def input_derivatives(p, port: str, value) -> list:
    """Successors of ``p`` under the input ``port?value`` (any value accepted)."""
    out: list = []
    _step(p, (value,), port, out)
    return [q for a, q in out if a is not TAU and a.direction == IN and a.port == port]


def _step(p, values, only_port, out):
    if isinstance(p, Nil):
        return
    if isinstance(p, InP):
        if only_port is None or only_port == p.port:
            for v in values:
                out.append((Action(IN, p.port, v), subst(p.cont, {p.binder: v})))
        return
    if only_port is not None:
        # input-only query: skip everything that cannot start with an input
        if isinstance(p, (OutP, TauP, Let)):
            return
    if isinstance(p, OutP):
        out.append((Action(OUT, p.port, core.eval_expr(p.payload, {})), p.cont))
    elif isinstance(p, TauP):
        out.append((TAU, p.cont))
    elif isinstance(p, Let):
        v = core.eval_expr(p.expr, {})
        out.append((TAU, subst(p.cont, {p.binder: v})))
    elif isinstance(p, If):
        branch = p.then if core.eval_condition(p.cond, {}) else p.orelse
        _step(branch, values, only_port, out)
    elif isinstance(p, Choice):
        _step(p.left, values, only_port, out)
        _step(p.right, values, only_port, out)
    elif isinstance(p, Rec):
        _step(unfold(p), values, only_port, out)
    elif isinstance(p, RecVar):
        raise FreeVariable(f"free recursion variable {p.name!r} reached during execution")
    else:
        raise TypeError(f"not a process: {p!r}")


def tau_closure(p, universe: Universe, tau_bound: int) -> set:
    """States reachable from ``p`` by at most ``tau_bound`` tau steps.

    Raises ClosureBoundExceeded if new states still appear after ``tau_bound`` steps.
    """
    seen = {p}
    frontier = [p]
    for _ in range(tau_bound):
        nxt = []
        for q in frontier:
            for a, r in step(q, universe):
                if a is TAU and r not in seen:
                    seen.add(r)
                    nxt.append(r)
        frontier = nxt
        if not frontier:
            return seen
    if any(a is TAU and r not in seen for q in frontier for a, r in step(q, universe)):
        raise ClosureBoundExceeded(f"tau-chains longer than {tau_bound}")
    return seen


def weak_step(p, action: Action, universe: Universe, tau_bound: int = 64) -> set:
    """All ``action``-derivatives of ``p`` after at most ``tau_bound`` tau steps."""
    out = set()
    for q in tau_closure(p, universe, tau_bound):
        if action.direction == IN:
            out.update(input_derivatives(q, action.port, action.payload))
        else:
            out.update(r for a, r in step(q, universe) if a == action)
    return out


def trace_system(trace: Iterable) -> object:
    """Canonical process producing exactly the explicit trace (inputs on any value)."""
    p = NIL
    for a in reversed(list(trace)):
        if a is TAU:
            p = TauP(p)
        elif a.direction == IN:
            p = InP(a.port, "x", p)
        else:
            p = OutP(a.port, core.Const(a.payload), p)
    return p


def explore_lts(p, universe: Universe, state_bound: int = 10000) -> Lts:
    return explore(p, lambda q: step(q, universe), state_bound)


def input_ports(p) -> set:
    """Ports on which the process term (syntactically) performs inputs."""
    ports = set()
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, InP):
            ports.add(q.port)
            stack.append(q.cont)
        elif isinstance(q, (OutP, TauP, Let)):
            stack.append(q.cont)
        elif isinstance(q, If):
            stack.extend((q.then, q.orelse))
        elif isinstance(q, Choice):
            stack.extend((q.left, q.right))
        elif isinstance(q, Rec):
            stack.append(q.body)
    return ports
