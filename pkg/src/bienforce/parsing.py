"""Lexer and the grammar fragments shared by the process, formula and monitor languages."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

from . import core
from .core import IN, OUT, TAU, Action, Atom, Bind, Cmp, Int, Lit, Pattern
from .errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>!=|<=|>=|&&|\|\||[()\[\]<>,.?!=+&_])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "op" or "eof"
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 0) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind != "eof" and tok.text == text

    def at_ident(self, offset: int = 0) -> bool:
        return self.peek(offset).kind == "ident"

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> str:
        if not self.at_ident():
            self.fail(f"expected {what}")
        return self.advance().text

    def expect_eof(self):
        if self.current.kind != "eof":
            self.fail("unexpected trailing input")

    def fail(self, message: str, error=ParseError, token: Optional[Token] = None):
        tok = token or self.current
        found = tok.text if tok.kind != "eof" else "end of input"
        raise error(f"{message} (found {found!r})", tok.line, tok.column)

    def error_at(self, error, message: str, token: Token):
        return error(message, token.line, token.column)


def _is_action_marker(ts: TokenStream, offset: int) -> bool:
    return ts.at(IN, offset) or ts.at(OUT, offset)


# -- values and actions ---------------------------------------------------


def parse_value(ts: TokenStream) -> core.Value:
    tok = ts.current
    if tok.kind == "int":
        ts.advance()
        return Int(int(tok.text))
    if ts.accept("<"):
        items = [parse_value(ts)]
        while ts.accept(","):
            items.append(parse_value(ts))
        ts.expect(">")
        if len(items) < 2:
            ts.fail("tuples need at least two components", token=tok)
        return core.Tup(tuple(items))
    if tok.kind == "ident":
        ts.advance()
        if ts.accept("("):
            args = [parse_value(ts)]
            while ts.accept(","):
                args.append(parse_value(ts))
            ts.expect(")")
            return core.Cons(tok.text, tuple(args))
        return Atom(tok.text)
    ts.fail("expected a value")


def parse_explicit_action(ts: TokenStream) -> core.ExplicitAction:
    if ts.at("tau"):
        ts.advance()
        return TAU
    port = ts.ident("port")
    if not _is_action_marker(ts, 0):
        ts.fail("expected '?' or '!'")
    direction = ts.advance().text
    return Action(direction, port, parse_value(ts))


def parse_action_text(text: str) -> core.ExplicitAction:
    ts = TokenStream(text)
    a = parse_explicit_action(ts)
    ts.expect_eof()
    return a


def parse_trace_text(text: str) -> list:
    """Parse a ``.tr`` trace: actions separated by ``.`` or newlines."""
    ts = TokenStream(text)
    trace = []
    while ts.current.kind != "eof":
        trace.append(parse_explicit_action(ts))
        ts.accept(".")
    return trace


def format_trace_text(trace) -> str:
    return " . ".join(str(a) for a in trace)


def parse_value_text(text: str) -> core.Value:
    ts = TokenStream(text)
    v = parse_value(ts)
    ts.expect_eof()
    return v


# -- expressions and conditions ------------------------------------------


def parse_expr(ts: TokenStream, scope) -> core.Expr:
    """Expression; identifiers bound in ``scope`` are variables, others atoms."""
    tok = ts.current
    if tok.kind == "int":
        ts.advance()
        return core.Const(Int(int(tok.text)))
    if ts.accept("<"):
        items = [parse_expr(ts, scope)]
        while ts.accept(","):
            items.append(parse_expr(ts, scope))
        ts.expect(">")
        if len(items) < 2:
            ts.fail("tuples need at least two components", token=tok)
        return core.mk_tuple(items)
    if tok.kind == "ident":
        ts.advance()
        if ts.accept("("):
            args = [parse_expr(ts, scope)]
            while ts.accept(","):
                args.append(parse_expr(ts, scope))
            ts.expect(")")
            return core.mk_cons(tok.text, args)
        if tok.text in scope:
            return core.Var(tok.text)
        return core.Const(Atom(tok.text))
    ts.fail("expected an expression")


def parse_condition(ts: TokenStream, scope) -> core.Condition:
    parts = [_parse_conj(ts, scope)]
    while ts.accept("||"):
        parts.append(_parse_conj(ts, scope))
    return parts[0] if len(parts) == 1 else core.Or(tuple(parts))


def _parse_conj(ts, scope):
    parts = [_parse_literal(ts, scope)]
    while ts.accept("&&"):
        parts.append(_parse_literal(ts, scope))
    return parts[0] if len(parts) == 1 else core.And(tuple(parts))


def _parse_literal(ts, scope):
    if ts.accept("!"):
        return core.Not(_parse_literal(ts, scope))
    if ts.accept("("):
        c = parse_condition(ts, scope)
        ts.expect(")")
        return c
    if ts.at("true"):
        ts.advance()
        return core.TRUE
    if ts.at("false"):
        ts.advance()
        return core.FALSE
    left = parse_expr(ts, scope)
    tok = ts.current
    if tok.kind != "op" or tok.text not in core.COMPARISONS:
        ts.fail("expected a comparison operator")
    ts.advance()
    right = parse_expr(ts, scope)
    return Cmp(tok.text, left, right)


# -- patterns -------------------------------------------------------------


def looks_like_pattern(ts: TokenStream) -> bool:
    """True when the upcoming tokens start ``(x)?...``, ``(_)!...`` or ``a?...``."""
    if ts.at_ident() and _is_action_marker(ts, 1):
        return True
    return (
        ts.at("(")
        and (ts.at_ident(1) or ts.at("_", 1))
        and ts.at(")", 2)
        and _is_action_marker(ts, 3)
    )


def _parse_binder(ts: TokenStream, used: set) -> Bind:
    ts.expect("(")
    if ts.accept("_"):
        ts.expect(")")
        return Bind(None)
    tok = ts.current
    name = ts.ident("binder")
    if name in used:
        ts.fail(f"binder {name!r} occurs twice in one pattern", token=tok)
    used.add(name)
    ts.expect(")")
    return Bind(name)


def parse_pattern(ts: TokenStream, scope) -> Pattern:
    """Pattern ``PORT dir PAYLOAD``; parenthesised identifiers are binders."""
    used: set = set()
    if ts.at("("):
        port = _parse_binder(ts, used)
    else:
        name = ts.ident("port")
        port = Lit(core.Var(name)) if name in scope else Lit(core.port_const(name))
    if not _is_action_marker(ts, 0):
        ts.fail("expected '?' or '!'")
    direction = ts.advance().text
    if ts.at("(") and (ts.at_ident(1) or ts.at("_", 1)) and ts.at(")", 2):
        payload = _parse_binder(ts, used)
    else:
        payload = Lit(parse_expr(ts, scope))
    return Pattern(direction, port, payload)


def parse_port_expr(ts: TokenStream, scope) -> core.Expr:
    name = ts.ident("port")
    return core.Var(name) if name in scope else core.port_const(name)


def parse_with(text: str, rule: Callable[[TokenStream], object]):
    ts = TokenStream(text)
    result = rule(ts)
    ts.expect_eof()
    return result


class FreshNames:
    """Deterministic fresh-identifier supply avoiding a fixed set of names.

    Each prefix has its own counter, so the first fresh port binder of a
    text is ``x1`` unless ``x1`` already occurs in it.
    """

    def __init__(self, avoid=()):
        self.avoid = set(avoid)
        self.counters: dict = {}

    def __call__(self, prefix: str = "x") -> str:
        n = self.counters.get(prefix, 0)
        while True:
            n += 1
            name = f"{prefix}{n}"
            if name not in self.avoid:
                self.counters[prefix] = n
                self.avoid.add(name)
                return name


def identifiers(ts: TokenStream) -> set:
    return {t.text for t in ts.tokens if t.kind == "ident"}
