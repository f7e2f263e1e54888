"""Ports, values, actions, symbolic patterns and conditions.

Every term in the workbench is an immutable, hashable dataclass built with
:func:`term`.  Ports are plain strings inside actions; whenever a port flows
into the expression world (through a pattern binder or a literal in a
condition) it is represented as an :class:`Atom` of the same name, so that
``x = b`` compares a bound port against the port literal ``b``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union

from .errors import OpenSymbolicAction, TypeMismatch, UnboundVariable

IN = "?"
OUT = "!"
DIRECTIONS = (IN, OUT)


def term(cls):
    """Frozen dataclass whose structural hash is computed once and cached."""
    cls = dataclass(frozen=True)(cls)
    fields = tuple(cls.__dataclass_fields__)
    name = cls.__name__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash((name,) + tuple(getattr(self, f) for f in fields))
            object.__setattr__(self, "_hash", h)
            return h

    cls.__hash__ = __hash__
    return cls


# -- values ---------------------------------------------------------------


@term
class Int:
    value: int

    def __str__(self):
        return str(self.value)


@term
class Atom:
    name: str

    def __str__(self):
        return self.name


@term
class Tup:
    items: tuple

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("tuples have at least two components")

    def __str__(self):
        return "<" + ",".join(str(v) for v in self.items) + ">"


@term
class Cons:
    name: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("constructor applications take at least one argument")

    def __str__(self):
        return f"{self.name}(" + ",".join(str(v) for v in self.args) + ")"


Value = Union[Int, Atom, Tup, Cons]


def value_key(v: Value):
    """Total order on values, used wherever output must be deterministic."""
    if isinstance(v, Int):
        return (0, v.value)
    if isinstance(v, Atom):
        return (1, v.name)
    if isinstance(v, Tup):
        return (2, tuple(value_key(i) for i in v.items))
    return (3, v.name, tuple(value_key(i) for i in v.args))


# -- actions --------------------------------------------------------------


@term
class Action:
    direction: str
    port: str
    payload: Value

    @property
    def is_input(self):
        return self.direction == IN

    @property
    def is_output(self):
        return self.direction == OUT

    def __str__(self):
        return f"{self.port}{self.direction}{self.payload}"


class _Tau:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TAU"

    def __str__(self):
        return "tau"

    def __reduce__(self):
        return (_Tau, ())


TAU = _Tau()

ExplicitAction = Union[Action, _Tau]


def is_tau(a) -> bool:
    return a is TAU


def action_key(a: ExplicitAction):
    if a is TAU:
        return (0,)
    return (1, a.direction, a.port, value_key(a.payload))


def visible(trace: Iterable[ExplicitAction]) -> list:
    return [a for a in trace if a is not TAU]


def format_trace(trace: Iterable[ExplicitAction]) -> str:
    parts = [str(a) for a in trace]
    return " . ".join(parts) if parts else "eps"


# -- expressions ----------------------------------------------------------


@term
class Var:
    name: str


@term
class Const:
    value: Value


@term
class TupleExpr:
    items: tuple


@term
class ConsExpr:
    name: str
    args: tuple


Expr = Union[Var, Const, TupleExpr, ConsExpr]


def mk_tuple(items) -> Expr:
    items = tuple(items)
    if all(isinstance(i, Const) for i in items):
        return Const(Tup(tuple(i.value for i in items)))
    return TupleExpr(items)


def mk_cons(name, args) -> Expr:
    args = tuple(args)
    if all(isinstance(i, Const) for i in args):
        return Const(Cons(name, tuple(i.value for i in args)))
    return ConsExpr(name, args)


def port_const(port: str) -> Const:
    return Const(Atom(port))


def eval_expr(e: Expr, subst: Mapping[str, Value]) -> Value:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return subst[e.name]
        except KeyError:
            raise UnboundVariable(f"unbound variable {e.name!r}") from None
    if isinstance(e, TupleExpr):
        return Tup(tuple(eval_expr(i, subst) for i in e.items))
    if isinstance(e, ConsExpr):
        return Cons(e.name, tuple(eval_expr(i, subst) for i in e.args))
    raise TypeError(f"not an expression: {e!r}")


def subst_expr(e: Expr, subst: Mapping[str, Value]) -> Expr:
    if isinstance(e, Var):
        v = subst.get(e.name)
        return e if v is None else Const(v)
    if isinstance(e, TupleExpr):
        return mk_tuple(subst_expr(i, subst) for i in e.items)
    if isinstance(e, ConsExpr):
        return mk_cons(e.name, (subst_expr(i, subst) for i in e.args))
    return e


def rename_expr(e: Expr, renaming: Mapping[str, str]) -> Expr:
    if isinstance(e, Var):
        return Var(renaming.get(e.name, e.name))
    if isinstance(e, TupleExpr):
        return TupleExpr(tuple(rename_expr(i, renaming) for i in e.items))
    if isinstance(e, ConsExpr):
        return ConsExpr(e.name, tuple(rename_expr(i, renaming) for i in e.args))
    return e


def fv_expr(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, TupleExpr):
        return frozenset().union(*(fv_expr(i) for i in e.items))
    if isinstance(e, ConsExpr):
        return frozenset().union(*(fv_expr(i) for i in e.args))
    return frozenset()


def format_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, TupleExpr):
        return "<" + ",".join(format_expr(i) for i in e.items) + ">"
    if isinstance(e, ConsExpr):
        return f"{e.name}(" + ",".join(format_expr(i) for i in e.args) + ")"
    raise TypeError(f"not an expression: {e!r}")


# -- conditions -----------------------------------------------------------

COMPARISONS = ("=", "!=", "<=", ">=", "<", ">")
_ORDERINGS = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}


@term
class BoolConst:
    value: bool


@term
class Cmp:
    op: str
    left: Expr
    right: Expr


@term
class And:
    parts: tuple


@term
class Or:
    parts: tuple


@term
class Not:
    arg: object


Condition = Union[BoolConst, Cmp, And, Or, Not]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


def mk_and(*parts) -> Condition:
    flat = []
    for p in parts:
        if p == TRUE:
            continue
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def eq(left: Expr, right: Expr) -> Cmp:
    return Cmp("=", left, right)


def eval_condition(c: Condition, subst: Mapping[str, Value]) -> bool:
    """Evaluate ``c`` under ``subst``.

    Raises UnboundVariable for a free variable missing from ``subst`` and
    TypeMismatch when an ordering comparison meets a non-integer operand.
    """
    if isinstance(c, BoolConst):
        return c.value
    if isinstance(c, Cmp):
        a = eval_expr(c.left, subst)
        b = eval_expr(c.right, subst)
        if c.op == "=":
            return a == b
        if c.op == "!=":
            return a != b
        if not (isinstance(a, Int) and isinstance(b, Int)):
            raise TypeMismatch(f"ordering {c.op!r} applied to {a} and {b}")
        return _ORDERINGS[c.op](a.value, b.value)
    if isinstance(c, And):
        return all(eval_condition(p, subst) for p in c.parts)
    if isinstance(c, Or):
        return any(eval_condition(p, subst) for p in c.parts)
    if isinstance(c, Not):
        return not eval_condition(c.arg, subst)
    raise TypeError(f"not a condition: {c!r}")


def subst_cond(c: Condition, subst: Mapping[str, Value]) -> Condition:
    if not subst:
        return c
    if isinstance(c, Cmp):
        return Cmp(c.op, subst_expr(c.left, subst), subst_expr(c.right, subst))
    if isinstance(c, And):
        return And(tuple(subst_cond(p, subst) for p in c.parts))
    if isinstance(c, Or):
        return Or(tuple(subst_cond(p, subst) for p in c.parts))
    if isinstance(c, Not):
        return Not(subst_cond(c.arg, subst))
    return c


def rename_cond(c: Condition, renaming: Mapping[str, str]) -> Condition:
    if isinstance(c, Cmp):
        return Cmp(c.op, rename_expr(c.left, renaming), rename_expr(c.right, renaming))
    if isinstance(c, And):
        return And(tuple(rename_cond(p, renaming) for p in c.parts))
    if isinstance(c, Or):
        return Or(tuple(rename_cond(p, renaming) for p in c.parts))
    if isinstance(c, Not):
        return Not(rename_cond(c.arg, renaming))
    return c


def fv_cond(c: Condition) -> frozenset:
    if isinstance(c, Cmp):
        return fv_expr(c.left) | fv_expr(c.right)
    if isinstance(c, (And, Or)):
        return frozenset().union(*(fv_cond(p) for p in c.parts))
    if isinstance(c, Not):
        return fv_cond(c.arg)
    return frozenset()


def cond_constants(c: Condition) -> set:
    """Values mentioned literally in a condition."""
    out = set()

    def walk_expr(e):
        if isinstance(e, Const):
            out.add(e.value)
        elif isinstance(e, TupleExpr):
            for i in e.items:
                walk_expr(i)
        elif isinstance(e, ConsExpr):
            for i in e.args:
                walk_expr(i)

    def walk(c):
        if isinstance(c, Cmp):
            walk_expr(c.left)
            walk_expr(c.right)
        elif isinstance(c, (And, Or)):
            for p in c.parts:
                walk(p)
        elif isinstance(c, Not):
            walk(c.arg)

    walk(c)
    return out


_COND_PREC = {Or: 1, And: 2}


def format_cond(c: Condition, prec: int = 0) -> str:
    if isinstance(c, BoolConst):
        return "true" if c.value else "false"
    if isinstance(c, Cmp):
        return f"{format_expr(c.left)} {c.op} {format_expr(c.right)}"
    if isinstance(c, Not):
        return "!(" + format_cond(c.arg) + ")"
    sep = " || " if isinstance(c, Or) else " && "
    mine = _COND_PREC[type(c)]
    text = sep.join(format_cond(p, mine + 1) for p in c.parts)
    return f"({text})" if prec > mine else text


# -- patterns -------------------------------------------------------------


@term
class Bind:
    """A binding occurrence; ``name`` is None for the don't-care binder."""

    name: Optional[str]


@term
class Lit:
    expr: Expr


PatPart = Union[Bind, Lit]


@term
class Pattern:
    direction: str
    port: PatPart
    payload: PatPart

    @property
    def is_input(self):
        return self.direction == IN

    @property
    def is_output(self):
        return self.direction == OUT


def bv(p: Pattern) -> frozenset:
    return frozenset(
        part.name for part in (p.port, p.payload) if isinstance(part, Bind) and part.name
    )


def fv_pattern(p: Pattern) -> frozenset:
    out = frozenset()
    for part in (p.port, p.payload):
        if isinstance(part, Lit):
            out |= fv_expr(part.expr)
    return out


def subst_pattern(p: Pattern, subst: Mapping[str, Value]) -> Pattern:
    def part(x):
        return Lit(subst_expr(x.expr, subst)) if isinstance(x, Lit) else x

    return Pattern(p.direction, part(p.port), part(p.payload))


def rename_pattern(p: Pattern, renaming: Mapping[str, str]) -> Pattern:
    def part(x):
        if isinstance(x, Lit):
            return Lit(rename_expr(x.expr, renaming))
        if x.name is None:
            return x
        return Bind(renaming.get(x.name, x.name))

    return Pattern(p.direction, part(p.port), part(p.payload))


def _match_part(part: PatPart, value: Value, sigma: dict) -> bool:
    if isinstance(part, Bind):
        if part.name is not None:
            sigma[part.name] = value
        return True
    expr = part.expr
    if not isinstance(expr, Const):
        raise UnboundVariable(f"pattern literal {format_expr(expr)} is not closed")
    return expr.value == value


def match_pattern(p: Pattern, a: ExplicitAction) -> Optional[dict]:
    """Smallest substitution instantiating ``p`` to ``a``, or None."""
    if a is TAU or p.direction != a.direction:
        return None
    sigma: dict = {}
    if not _match_part(p.port, Atom(a.port), sigma):
        return None
    if not _match_part(p.payload, a.payload, sigma):
        return None
    return sigma


def instantiate_pattern(p: Pattern, sigma: Mapping[str, Value]) -> Action:
    """Rebuild the concrete action a pattern matched (for soundness checks)."""

    def part(x):
        if isinstance(x, Bind):
            return sigma[x.name]
        return eval_expr(x.expr, sigma)

    port = part(p.port)
    return Action(p.direction, port.name, part(p.payload))


def format_part(part: PatPart) -> str:
    if isinstance(part, Bind):
        return f"({part.name or '_'})"
    return format_expr(part.expr)


def format_pattern(p: Pattern) -> str:
    return f"{format_part(p.port)}{p.direction}{format_part(p.payload)}"


def symbolic_matches(p: Pattern, c: Condition, a: ExplicitAction) -> Optional[dict]:
    """Substitution when ``a`` matches ``p`` and satisfies ``c``, else None."""
    sigma = match_pattern(p, a)
    if sigma is None or not eval_condition(c, sigma):
        return None
    return sigma


# -- finite universes -----------------------------------------------------


@dataclass(frozen=True)
class Universe:
    """Finite carrier for ports and input values."""

    ports: tuple
    values: tuple

    def __post_init__(self):
        if not self.ports or not self.values:
            raise ValueError("a universe needs at least one port and one value")
        object.__setattr__(self, "ports", tuple(dict.fromkeys(self.ports)))
        object.__setattr__(self, "values", tuple(dict.fromkeys(self.values)))

    def actions(self, directions=DIRECTIONS) -> Iterator[Action]:
        for d, port, v in itertools.product(directions, self.ports, self.values):
            yield Action(d, port, v)

    def inputs(self) -> Iterator[Action]:
        return self.actions((IN,))

    def extended(self, ports=(), values=()) -> "Universe":
        return Universe(self.ports + tuple(ports), self.values + tuple(values))


def denotation(p: Pattern, c: Condition, universe: Universe) -> set:
    """Concrete actions of the universe denoted by the closed symbolic action."""
    if not fv_cond(c) <= bv(p) or fv_pattern(p):
        raise OpenSymbolicAction(
            f"symbolic action ({format_pattern(p)}, {format_cond(c)}) is not closed"
        )
    return {a for a in universe.actions() if symbolic_matches(p, c, a) is not None}
