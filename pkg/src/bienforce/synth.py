"""Synthesis of action-disabling transducers from normal-form sHML formulas."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import core
from . import formula as fm
from . import monitor as mon
from .core import IN, Atom, Bind, Lit, Pattern, Universe
from .errors import NotNormalForm
from .parsing import FreshNames


@dataclass(frozen=True)
class SynthesisConfig:
    """Input ports the monitor may unblock and the value it inserts to do so."""

    ports: tuple
    default_value: core.Value = Atom("vdef")

    def __post_init__(self):
        if not self.ports:
            raise ValueError("synthesis needs at least one input port")
        object.__setattr__(self, "ports", tuple(dict.fromkeys(self.ports)))


def synthesize(f, cfg: SynthesisConfig, universe: Optional[Universe] = None, check: bool = True):
    """Translate a closed normal-form formula into a transducer.

    The formula is validated first (over ``universe``, or the configured
    ports and default value) and NotNormalForm carries the witness action.
    Fresh names are drawn deterministically and avoid every identifier of
    the formula.
    """
    if check:
        u = universe or Universe(cfg.ports, (cfg.default_value,))
        report = fm.is_normal_form(f, u)
        if not report.ok:
            raise NotNormalForm(report.message, report.witness)
    fresh = FreshNames(_formula_identifiers(f))
    return _synth(f, cfg, fresh)


def _synth(f, cfg, fresh):
    if isinstance(f, fm.FVar):
        return mon.TVar(f.name)
    if isinstance(f, (fm.Tt, fm.Ff)):
        return mon.ID
    if isinstance(f, fm.Max):
        return mon.MRec(f.var, _synth(f.body, cfg, fresh))
    if isinstance(f, fm.Conj):
        y = fresh("Y")
        branches = []
        for b in f.branches:
            if b.cont == fm.FF:
                branches.append(dis(b.pattern, b.cond, mon.TVar(y), cfg))
            else:
                pat = _name_binders(b.pattern, fresh)
                branches.append(mon.Prefix(pat, b.cond, mon.replay(pat), _synth(b.cont, cfg, fresh)))
        branches.append(default_branch(f, fresh))
        return mon.MRec(y, mon.mk_sum(branches))
    raise TypeError(f"not a formula: {f!r}")


def dis(pat: Pattern, cond, cont, cfg: SynthesisConfig):
    """Disable the actions of ``(pat, cond)`` and continue as ``cont``.

    Outputs are suppressed; inputs are never forwarded and instead the
    default value is inserted on every configured port whose substitution
    for the port binder satisfies the condition.
    """
    if pat.direction != IN:
        return mon.Prefix(pat, cond, None, cont)
    branches = []
    for port in cfg.ports:
        if isinstance(pat.port, Bind):
            c = cond if pat.port.name is None else core.subst_cond(cond, {pat.port.name: Atom(port)})
        else:
            c = core.mk_and(core.eq(core.port_const(port), pat.port.expr), cond)
        tact = mon.Template(IN, core.port_const(port), core.Const(cfg.default_value))
        branches.append(mon.Prefix(None, c, tact, cont))
    return mon.mk_sum(branches)


def default_branch(f: fm.Conj, fresh) -> mon.Prefix:
    """Forward, then stop enforcing, every input no input necessity covers."""
    xd, yd = fresh("xd"), fresh("yd")
    pat = Pattern(IN, Bind(xd), Bind(yd))
    negations = []
    for b in f.branches:
        if b.pattern.direction != IN:
            continue
        port = b.pattern.port
        if isinstance(port, Bind):
            c = b.cond if port.name is None else core.rename_cond(b.cond, {port.name: xd})
        else:
            c = core.mk_and(core.eq(core.Var(xd), port.expr), b.cond)
        negations.append(core.Not(c))
    return mon.Prefix(pat, core.mk_and(*negations), mon.replay(pat), mon.ID)


def _name_binders(pat: Pattern, fresh) -> Pattern:
    port, payload = pat.port, pat.payload
    if isinstance(port, Bind) and port.name is None:
        port = Bind(fresh("z"))
    if isinstance(payload, Bind) and payload.name is None:
        payload = Bind(fresh("z"))
    return Pattern(pat.direction, port, payload)


def _formula_identifiers(f) -> set:
    names: set = set()

    def expr(e):
        if isinstance(e, core.Var):
            names.add(e.name)
        elif isinstance(e, core.Const):
            value(e.value)
        elif isinstance(e, (core.TupleExpr,)):
            for i in e.items:
                expr(i)
        elif isinstance(e, core.ConsExpr):
            names.add(e.name)
            for i in e.args:
                expr(i)

    def value(v):
        if isinstance(v, Atom):
            names.add(v.name)
        elif isinstance(v, core.Tup):
            for i in v.items:
                value(i)
        elif isinstance(v, core.Cons):
            names.add(v.name)
            for i in v.args:
                value(i)

    def cond(c):
        if isinstance(c, core.Cmp):
            expr(c.left)
            expr(c.right)
        elif isinstance(c, (core.And, core.Or)):
            for p in c.parts:
                cond(p)
        elif isinstance(c, core.Not):
            cond(c.arg)

    def walk(g):
        if isinstance(g, fm.FVar):
            names.add(g.name)
        elif isinstance(g, fm.Max):
            names.add(g.var)
            walk(g.body)
        elif isinstance(g, fm.Conj):
            for b in g.branches:
                for part in (b.pattern.port, b.pattern.payload):
                    if isinstance(part, Bind) and part.name:
                        names.add(part.name)
                    elif isinstance(part, Lit):
                        expr(part.expr)
                cond(b.cond)
                walk(b.cont)

    walk(f)
    return names
