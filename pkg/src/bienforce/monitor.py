"""Symbolic transducers: syntax, dynamics, the identity monitor and capabilities."""
from __future__ import annotations

from functools import lru_cache
from typing import Mapping, Optional

from . import core
from .core import IN, OUT, Action, Atom, Bind, Lit, Pattern, term
from .errors import (
    BothDot,
    DirectionMismatch,
    OpenTerm,
    ParseError,
    TypeMismatch,
    UnguardedRecursion,
)
from .parsing import (
    FreshNames,
    TokenStream,
    identifiers,
    looks_like_pattern,
    parse_condition,
    parse_expr,
    parse_pattern,
    parse_port_expr,
)


@term
class Template:
    """A possibly open transformation action ``port dir payload``."""

    direction: str
    port: object  # expression evaluating to an Atom naming the port
    payload: object


@term
class Prefix:
    """``(pat, cond, tact).cont``; ``pat`` or ``tact`` None stands for the dot."""

    pat: Optional[Pattern]
    cond: object
    tact: Optional[Template]
    cont: object


@term
class Sum:
    branches: tuple


@term
class MRec:
    var: str
    body: object


@term
class TVar:
    name: str


def replay(pat: Pattern) -> Template:
    """The transformation action that re-emits whatever ``pat`` matched."""

    def part(x):
        return core.Var(x.name) if isinstance(x, Bind) else x.expr

    return Template(pat.direction, part(pat.port), part(pat.payload))


def identity_monitor() -> MRec:
    """``rec y. ((x)?(z), x?z).y + ((x)!(z), x!z).y``."""
    branches = []
    for d in (IN, OUT):
        pat = Pattern(d, Bind("x"), Bind("z"))
        branches.append(Prefix(pat, core.TRUE, replay(pat), TVar("y")))
    return MRec("y", Sum(tuple(branches)))


ID = identity_monitor()


def mk_sum(branches) -> object:
    flat = []
    for b in branches:
        if isinstance(b, Sum):
            flat.extend(b.branches)
        else:
            flat.append(b)
    return flat[0] if len(flat) == 1 else Sum(tuple(flat))


# -- substitution and unfolding -------------------------------------------


def format_template(t: Template) -> str:
    return f"{core.format_expr(t.port)}{t.direction}{core.format_expr(t.payload)}"


def _subst_template(t: Template, sigma) -> Template:
    return Template(t.direction, core.subst_expr(t.port, sigma), core.subst_expr(t.payload, sigma))


def subst(m, sigma: Mapping):
    """Apply a data substitution eagerly (pattern binders shadow)."""
    if not sigma or isinstance(m, TVar):
        return m
    if isinstance(m, Prefix):
        pat = m.pat
        inner = sigma
        if pat is not None:
            bound = core.bv(pat)
            inner = {k: v for k, v in sigma.items() if k not in bound}
            pat = core.subst_pattern(pat, sigma)
        tact = None if m.tact is None else _subst_template(m.tact, inner)
        return Prefix(pat, core.subst_cond(m.cond, inner), tact, subst(m.cont, inner))
    if isinstance(m, Sum):
        return Sum(tuple(subst(b, sigma) for b in m.branches))
    if isinstance(m, MRec):
        return MRec(m.var, subst(m.body, sigma))
    raise TypeError(f"not a monitor: {m!r}")


def _replace_tvar(m, var, replacement):
    if isinstance(m, TVar):
        return replacement if m.name == var else m
    if isinstance(m, Prefix):
        return Prefix(m.pat, m.cond, m.tact, _replace_tvar(m.cont, var, replacement))
    if isinstance(m, Sum):
        return Sum(tuple(_replace_tvar(b, var, replacement) for b in m.branches))
    if isinstance(m, MRec):
        if m.var == var:
            return m
        return MRec(m.var, _replace_tvar(m.body, var, replacement))
    raise TypeError(f"not a monitor: {m!r}")


def unfold(m: MRec):
    return _replace_tvar(m.body, m.var, m)


def _prefixes(m, out):
    """Collect the prefixes reachable through sums and recursion unfolding."""
    if isinstance(m, Prefix):
        out.append(m)
    elif isinstance(m, Sum):
        for b in m.branches:
            _prefixes(b, out)
    elif isinstance(m, MRec):
        _prefixes(unfold(m), out)
    elif isinstance(m, TVar):
        raise OpenTerm(f"free recursion variable {m.name!r} reached during execution")
    return out


def _instantiate(t: Template, sigma) -> Action:
    port = core.eval_expr(t.port, sigma)
    if not isinstance(port, Atom):
        raise TypeMismatch(f"transformation port evaluates to non-port value {port}")
    return Action(t.direction, port.name, core.eval_expr(t.payload, sigma))


# -- dynamics -------------------------------------------------------------


@lru_cache(maxsize=200000)
def transforms(m, action: Action) -> tuple:
    """Labels ``(action |> result)`` of ``m``: pairs ``(result or None, successor)``.

    ``None`` as result is the suppression dot.
    """
    out = []
    for pre in _prefixes(m, []):
        if pre.pat is None:
            continue
        sigma = core.symbolic_matches(pre.pat, pre.cond, action)
        if sigma is None:
            continue
        result = None if pre.tact is None else _instantiate(pre.tact, sigma)
        out.append((result, subst(pre.cont, sigma)))
    return tuple(dict.fromkeys(out))


@lru_cache(maxsize=200000)
def insertions(m) -> tuple:
    """Insertion labels ``(. |> action)`` of ``m`` as ``(action, successor)`` pairs."""
    out = []
    for pre in _prefixes(m, []):
        if pre.pat is not None:
            continue
        if core.eval_condition(pre.cond, {}):
            out.append((_instantiate(pre.tact, {}), pre.cont))
    return tuple(dict.fromkeys(out))


def monitor_step(m, action: Optional[Action] = None) -> list:
    """Labels of ``m`` as ``((source, result), successor)``; None stands for the dot.

    With an action the transforms of that action are returned; without one
    the insertion labels.
    """
    if action is None:
        return [((None, a), n) for a, n in insertions(m)]
    return [((action, r), n) for r, n in transforms(m, action)]


# -- well-formedness ------------------------------------------------------


def check_well_formed(m, scope=frozenset(), recvars=frozenset(), unguarded=frozenset()):
    """Raise BothDot, DirectionMismatch, OpenTerm or UnguardedRecursion."""
    if isinstance(m, TVar):
        if m.name not in recvars:
            raise OpenTerm(f"free recursion variable {m.name!r}")
        if m.name in unguarded:
            raise UnguardedRecursion(f"recursion variable {m.name!r} is not guarded")
        return
    if isinstance(m, Sum):
        if not m.branches:
            raise ParseError("empty summation")
        for b in m.branches:
            check_well_formed(b, scope, recvars, unguarded)
        return
    if isinstance(m, MRec):
        check_well_formed(m.body, scope, recvars | {m.var}, unguarded | {m.var})
        return
    if not isinstance(m, Prefix):
        raise TypeError(f"not a monitor: {m!r}")
    if m.pat is None and m.tact is None:
        raise BothDot("a transformation cannot have both pattern and action as '.'")
    if m.pat is not None and m.tact is not None and m.pat.direction != m.tact.direction:
        raise DirectionMismatch("pattern and transformation action differ in direction")
    inner = scope
    if m.pat is not None:
        free = core.fv_pattern(m.pat) - scope
        if free:
            raise OpenTerm(f"unbound variables {sorted(free)} in pattern")
        inner = scope | core.bv(m.pat)
    free = core.fv_cond(m.cond)
    if m.tact is not None:
        free |= core.fv_expr(m.tact.port) | core.fv_expr(m.tact.payload)
    free -= inner
    if free:
        raise OpenTerm(f"unbound variables {sorted(free)}")
    check_well_formed(m.cont, inner, recvars, frozenset())


# -- parsing --------------------------------------------------------------


def parse_monitor(text: str):
    """Parse ``.mon`` text; ``id`` is the identity monitor and ``(PAT, C)``
    abbreviates the identity transformation of ``PAT``."""
    ts = TokenStream(text)
    fresh = FreshNames(identifiers(ts))
    m = _parse_sum(ts, fresh, frozenset(), frozenset(), frozenset())
    ts.expect_eof()
    return m


def _parse_sum(ts, fresh, scope, recvars, unguarded):
    branches = [_parse_unary(ts, fresh, scope, recvars, unguarded)]
    while ts.accept("+"):
        branches.append(_parse_unary(ts, fresh, scope, recvars, unguarded))
    return mk_sum(branches)


def _at_template(ts) -> bool:
    return ts.at(".") or (ts.at_ident() and (ts.at(IN, 1) or ts.at(OUT, 1)))


def _parse_unary(ts, fresh, scope, recvars, unguarded):
    tok = ts.current
    if ts.at("(") and (ts.at(".", 1) or _pattern_follows(ts)):
        return _parse_prefix(ts, fresh, scope, recvars)
    if ts.accept("("):
        m = _parse_sum(ts, fresh, scope, recvars, unguarded)
        ts.expect(")")
        return m
    if tok.kind != "ident":
        ts.fail("expected a monitor")
    ts.advance()
    if tok.text == "id":
        return ID
    if tok.text == "rec":
        var = ts.ident("recursion variable")
        ts.expect(".")
        return MRec(var, _parse_sum(ts, fresh, scope, recvars | {var}, unguarded | {var}))
    if tok.text not in recvars:
        raise OpenTerm(f"free recursion variable {tok.text!r}", tok.line, tok.column)
    if tok.text in unguarded:
        raise UnguardedRecursion(
            f"recursion variable {tok.text!r} is not guarded", tok.line, tok.column
        )
    return TVar(tok.text)


def _pattern_follows(ts) -> bool:
    saved = ts.pos
    ts.advance()
    try:
        return looks_like_pattern(ts)
    finally:
        ts.pos = saved


def _parse_template(ts, scope) -> Optional[Template]:
    if ts.accept("."):
        return None
    port = parse_port_expr(ts, scope)
    direction = ts.advance().text
    return Template(direction, port, parse_expr(ts, scope))


def _parse_prefix(ts, fresh, scope, recvars):
    start = ts.expect("(")
    if ts.accept("."):
        pat = None
        inner = scope
    else:
        pat = parse_pattern(ts, scope)
        inner = scope | core.bv(pat)
    cond = core.TRUE
    tact_given = False
    tact = None
    if ts.accept(","):
        if _at_template(ts):
            tact, tact_given = _parse_template(ts, inner), True
        else:
            cond = parse_condition(ts, inner)
            if ts.accept(","):
                tact, tact_given = _parse_template(ts, inner), True
    ts.expect(")")
    ts.expect(".")
    if not tact_given:
        if pat is None:
            raise BothDot("an insertion needs a transformation action", start.line, start.column)
        pat = _name_dont_cares(pat, fresh)
        tact = replay(pat)
    if pat is None and tact is None:
        raise BothDot(
            "a transformation cannot have both pattern and action as '.'", start.line, start.column
        )
    if pat is not None and tact is not None and pat.direction != tact.direction:
        raise DirectionMismatch(
            "pattern and transformation action differ in direction", start.line, start.column
        )
    cont = _parse_unary(ts, fresh, inner, recvars, frozenset())
    return Prefix(pat, cond, tact, cont)


def _name_dont_cares(pat: Pattern, fresh) -> Pattern:
    """Give don't-care binders fresh names so the identity action can replay them."""
    port, payload = pat.port, pat.payload
    if isinstance(port, Bind) and port.name is None:
        port = Bind(fresh("x"))
    if isinstance(payload, Bind) and payload.name is None:
        payload = Bind(fresh("y"))
    return Pattern(pat.direction, port, payload)


# -- printing -------------------------------------------------------------


def is_identity_prefix(pre: Prefix) -> bool:
    """Syntactic identity: the action replays the pattern's parts verbatim."""
    return pre.pat is not None and pre.tact is not None and pre.tact == _strict_replay(pre.pat)


def _strict_replay(pat: Pattern) -> Optional[Template]:
    if any(isinstance(p, Bind) and p.name is None for p in (pat.port, pat.payload)):
        return None
    return replay(pat)


def format_monitor(m, unary=False, trailing=False) -> str:
    if m == ID or (isinstance(m, MRec) and is_identity(m)):
        return "id"
    if isinstance(m, TVar):
        return m.name
    if isinstance(m, Prefix):
        return _format_prefix_head(m) + ". " + format_monitor(m.cont, True, trailing)
    if isinstance(m, Sum):
        n = len(m.branches)
        text = " + ".join(
            format_monitor(b, True, trailing if i == n - 1 else True)
            for i, b in enumerate(m.branches)
        )
        return f"({text})" if unary else text
    if isinstance(m, MRec):
        text = f"rec {m.var}. " + format_monitor(m.body)
        return f"({text})" if trailing else text
    raise TypeError(f"not a monitor: {m!r}")


def _format_prefix_head(m: Prefix) -> str:
    parts = ["." if m.pat is None else core.format_pattern(m.pat)]
    if m.cond != core.TRUE:
        parts.append(core.format_cond(m.cond))
    if not (m.pat is not None and is_identity_prefix(m)):
        parts.append("." if m.tact is None else format_template(m.tact))
    return "(" + ", ".join(parts) + ")"


# -- alpha-equivalence ----------------------------------------------------


def canonical(m, _env=None, _depth=0, _renv=None):
    """Alpha-normal form (level-indexed names) with sums flattened and sorted."""
    env = _env or {}
    renv = _renv or {}
    if isinstance(m, TVar):
        return TVar(renv.get(m.name, m.name))
    if isinstance(m, MRec):
        name = f"R{len(renv)}"
        return MRec(name, canonical(m.body, env, _depth, {**renv, m.var: name}))
    if isinstance(m, Sum):
        out = []
        for b in m.branches:
            c = canonical(b, env, _depth, renv)
            out.extend(c.branches if isinstance(c, Sum) else [c])
        out = sorted(set(out), key=_sort_key)
        return out[0] if len(out) == 1 else Sum(tuple(out))
    if isinstance(m, Prefix):
        inner = dict(env)
        k = _depth
        pat = m.pat
        if pat is not None:
            for part in (pat.port, pat.payload):
                if isinstance(part, Bind) and part.name:
                    inner[part.name] = f"v{k}"
                    k += 1

            def rp(part):
                if isinstance(part, Lit):
                    return Lit(core.rename_expr(part.expr, env))
                return part if part.name is None else Bind(inner[part.name])

            pat = Pattern(pat.direction, rp(pat.port), rp(pat.payload))
        tact = m.tact
        if tact is not None:
            tact = Template(
                tact.direction,
                core.rename_expr(tact.port, inner),
                core.rename_expr(tact.payload, inner),
            )
        cond = core.rename_cond(m.cond, inner)
        return Prefix(pat, cond, tact, canonical(m.cont, inner, k, renv))
    raise TypeError(f"not a monitor: {m!r}")


def _sort_key(m):
    return repr(m)


_ID_CANON = None


def is_identity(m) -> bool:
    global _ID_CANON
    if _ID_CANON is None:
        _ID_CANON = canonical(ID)
    return isinstance(m, MRec) and canonical(m) == _ID_CANON


def alpha_equivalent(m1, m2) -> bool:
    return canonical(m1) == canonical(m2)


# -- enforcement capabilities ---------------------------------------------

DIS, EN, ADPT = "dis", "en", "adpt"


def etp(m) -> frozenset:
    """Capabilities among ``dis``, ``en`` and ``adpt`` that the transducer uses."""
    if isinstance(m, TVar):
        return frozenset()
    if isinstance(m, Sum):
        return frozenset().union(*(etp(b) for b in m.branches))
    if isinstance(m, MRec):
        return etp(m.body)
    if not isinstance(m, Prefix):
        raise TypeError(f"not a monitor: {m!r}")
    rest = etp(m.cont)
    if m.pat is None:
        return rest | {DIS if m.tact.direction == IN else EN}
    if m.tact is None:
        return rest | {EN if m.pat.direction == IN else DIS}
    if m.tact == replay(m.pat):
        return rest
    return rest | {ADPT}


# -- simplification -------------------------------------------------------


def simplify(m):
    """Remove recursion binders whose variable is never used."""
    if isinstance(m, MRec):
        body = simplify(m.body)
        return MRec(m.var, body) if m.var in free_tvars(body) else body
    if isinstance(m, Sum):
        return mk_sum(simplify(b) for b in m.branches)
    if isinstance(m, Prefix):
        return Prefix(m.pat, m.cond, m.tact, simplify(m.cont))
    return m


def free_tvars(m) -> frozenset:
    if isinstance(m, TVar):
        return frozenset((m.name,))
    if isinstance(m, Prefix):
        return free_tvars(m.cont)
    if isinstance(m, Sum):
        return frozenset().union(*(free_tvars(b) for b in m.branches))
    if isinstance(m, MRec):
        return free_tvars(m.body) - {m.var}
    return frozenset()
