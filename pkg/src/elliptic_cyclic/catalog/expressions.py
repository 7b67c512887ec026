"""Closed-form coefficient expressions for catalog entries.

A small expression language shared by identity coefficients and integer
constraints.  It supports::

    numbers        1  2  0.5  (literal text is preserved for round-tripping)
    symbols        m  p  r  s  t  l  K  Kp  E  q  pi   and the shift
                   shorthands  a = 2rK/p,  a1 = 2sK/p,  a2 = 2tK/p,
                   b = 4rK/p,  b1 = 4sK/p
    arithmetic     +  -  *  /  ^   (with the usual precedence; ^ binds
                   tightest and associates right)
    functions      sn cn dn ns nc nd sc cs sd ds cd dc  (point values at the
                   context parameter), Zu (the zeta function of the argument)
    INT            the definite integral of the identity's product function
                   over one period [0, T] (supplied by the caller)
    SUM(v,lo,hi,body)      sum of body over integer v in [lo, hi]
    PROD(v,lo,hi,body)     product of body over integer v in [lo, hi]
    PRODX(v,lo,hi,x,body)  product skipping the single index v == x

Expressions are parsed to immutable ASTs; :func:`print_expr` emits a canonical
text form and ``parse_expr(print_expr(e)) == e`` holds for every AST.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

from ..errors import CatalogParseError

__all__ = [
    "Expr", "Num", "Sym", "Bin", "Neg", "Call", "Reduce", "IntToken",
    "parse_expr", "print_expr", "eval_expr", "ExprTokenizer",
    "FUNCTION_NAMES", "free_symbols",
]

#: Function tokens recognized in coefficient position.
FUNCTION_NAMES = ("sn", "cn", "dn", "ns", "nc", "nd", "sc", "cs", "sd", "ds",
                  "cd", "dc", "Zu")

_REDUCE_KINDS = ("SUM", "PROD", "PRODX")


class Expr:
    """Base class for expression AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    """Numeric literal; the source text is preserved verbatim."""

    text: str

    @property
    def value(self) -> float:
        return float(self.text)


@dataclass(frozen=True)
class Sym(Expr):
    name: str


@dataclass(frozen=True)
class Bin(Expr):
    op: str  # '+', '-', '*', '/', '^'
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Reduce(Expr):
    """SUM / PROD / PRODX over an integer index range."""

    kind: str
    var: str
    lo: Expr
    hi: Expr
    body: Expr
    exclude: Expr | None = None  # PRODX only


@dataclass(frozen=True)
class IntToken(Expr):
    """Placeholder for the one-period integral of the entry's product."""


class ExprTokenizer:
    """Shared tokenizer; tracks (line, col) for error reporting."""

    PUNCT = ("==", "!=", "<=", ">=", "+", "-", "*", "/", "^", "(", ")", ",",
             "[", "]", "{", "}", "<", ">", ";", ":")

    def __init__(self, text: str, line: int = 1, col0: int = 0) -> None:
        self.text = text
        self.pos = 0
        self.line = line
        self.col0 = col0  # column offset of text[0] within its line
        self.tokens: list[tuple[str, str, int]] = []  # (kind, value, pos)
        self._tokenize()
        self.idx = 0

    def _tokenize(self) -> None:
        text, n = self.text, len(self.text)
        i = 0
        while i < n:
            ch = text[i]
            if ch in " \t":
                i += 1
                continue
            if ch == "#":
                break
            if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
                j = i + 1
                seen_dot = ch == "."
                while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                    if text[j] == ".":
                        seen_dot = True
                    j += 1
                # exponent part
                if j < n and text[j] in "eE" and j + 1 < n and (
                        text[j + 1].isdigit() or (text[j + 1] in "+-" and j + 2 < n
                                                  and text[j + 2].isdigit())):
                    j += 2
                    while j < n and text[j].isdigit():
                        j += 1
                self.tokens.append(("num", text[i:j], i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i + 1
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.tokens.append(("name", text[i:j], i))
                i = j
                continue
            for punct in self.PUNCT:
                if text.startswith(punct, i):
                    self.tokens.append(("punct", punct, i))
                    i += len(punct)
                    break
            else:
                raise CatalogParseError(f"unexpected character {ch!r}",
                                        self.line, self.col0 + i + 1)
        self.tokens.append(("end", "", n))

    # -- cursor helpers -------------------------------------------------
    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.idx]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.idx]
        if tok[0] != "end":
            self.idx += 1
        return tok

    def col(self, tok: tuple[str, str, int]) -> int:
        return self.col0 + tok[2] + 1

    def error(self, message: str, tok=None, expected: str = ""):
        tok = tok or self.peek()
        raise CatalogParseError(message, self.line, self.col(tok), expected)

    def expect(self, value: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[1] != value:
            self.error(f"got {tok[1]!r}", tok, expected=repr(value))
        return tok

    def at_end(self) -> bool:
        return self.peek()[0] == "end"


# -- parsing ------------------------------------------------------------

def _parse_additive(tz: ExprTokenizer) -> Expr:
    node = _parse_multiplicative(tz)
    while tz.peek()[1] in ("+", "-"):
        op = tz.next()[1]
        node = Bin(op, node, _parse_multiplicative(tz))
    return node


def _parse_multiplicative(tz: ExprTokenizer) -> Expr:
    node = _parse_unary(tz)
    while tz.peek()[1] in ("*", "/"):
        op = tz.next()[1]
        node = Bin(op, node, _parse_unary(tz))
    return node


def _parse_unary(tz: ExprTokenizer) -> Expr:
    if tz.peek()[1] == "-":
        tz.next()
        return Neg(_parse_unary(tz))
    if tz.peek()[1] == "+":
        tz.next()
        return _parse_unary(tz)
    return _parse_power(tz)


def _parse_power(tz: ExprTokenizer) -> Expr:
    base = _parse_atom(tz)
    if tz.peek()[1] == "^":
        tz.next()
        # right-associative; allow unary minus in the exponent
        return Bin("^", base, _parse_unary_power(tz))
    return base


def _parse_unary_power(tz: ExprTokenizer) -> Expr:
    if tz.peek()[1] == "-":
        tz.next()
        return Neg(_parse_unary_power(tz))
    return _parse_power(tz)


def _parse_atom(tz: ExprTokenizer) -> Expr:
    kind, value, _pos = tz.peek()
    if kind == "num":
        tz.next()
        return Num(value)
    if value == "(":
        tz.next()
        node = _parse_additive(tz)
        tz.expect(")")
        return node
    if kind == "name":
        tz.next()
        if value in _REDUCE_KINDS:
            tz.expect("(")
            var_tok = tz.next()
            if var_tok[0] != "name":
                tz.error("reduction index must be a name", var_tok,
                         expected="index variable")
            tz.expect(",")
            lo = _parse_additive(tz)
            tz.expect(",")
            hi = _parse_additive(tz)
            tz.expect(",")
            exclude = None
            if value == "PRODX":
                exclude = _parse_additive(tz)
                tz.expect(",")
            body = _parse_additive(tz)
            tz.expect(")")
            return Reduce(value, var_tok[1], lo, hi, body, exclude)
        if value == "INT":
            return IntToken()
        if tz.peek()[1] == "(":
            tz.next()
            args = [_parse_additive(tz)]
            while tz.peek()[1] == ",":
                tz.next()
                args.append(_parse_additive(tz))
            tz.expect(")")
            return Call(value, tuple(args))
        return Sym(value)
    tz.error(f"got {value!r}", expected="number, name, or '('")
    raise AssertionError  # unreachable


def parse_expr(text: str, line: int = 1, col0: int = 0) -> Expr:
    """Parse a coefficient expression from ``text``."""
    tz = ExprTokenizer(text, line=line, col0=col0)
    node = _parse_additive(tz)
    if not tz.at_end():
        tz.error(f"trailing input {tz.peek()[1]!r}", expected="end of expression")
    return node


def parse_expr_prefix(tz: ExprTokenizer) -> Expr:
    """Parse an expression from an existing tokenizer (used by sub-grammars)."""
    return _parse_additive(tz)


# -- printing -----------------------------------------------------------

_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "neg": 25, "^": 30}


def _print(e: Expr, parent_prec: int) -> str:
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, IntToken):
        return "INT"
    if isinstance(e, Call):
        return f"{e.fn}({','.join(_print(a, 0) for a in e.args)})"
    if isinstance(e, Reduce):
        parts = [e.var, _print(e.lo, 0), _print(e.hi, 0)]
        if e.kind == "PRODX":
            parts.append(_print(e.exclude, 0))
        parts.append(_print(e.body, 0))
        return f"{e.kind}({','.join(parts)})"
    if isinstance(e, Neg):
        prec = _PREC["neg"]
        inner = _print(e.arg, prec)
        out = f"-{inner}"
        return f"({out})" if parent_prec > prec else out
    if isinstance(e, Bin):
        prec = _PREC[e.op]
        if e.op == "^":
            left = _print(e.left, prec + 1)
            right = _print(e.right, prec)
        else:
            left = _print(e.left, prec)
            right = _print(e.right, prec + 1)
        if e.op in ("+", "-"):
            out = f"{left} {e.op} {right}"
        else:
            out = f"{left}{e.op}{right}"
        return f"({out})" if parent_prec > prec else out
    raise TypeError(f"not an expression node: {e!r}")


def print_expr(e: Expr) -> str:
    """Canonical text form; ``parse_expr(print_expr(e)) == e``."""
    return _print(e, 0)


# -- evaluation ---------------------------------------------------------

def free_symbols(e: Expr, bound: frozenset[str] = frozenset()) -> set[str]:
    """All symbol names appearing in ``e`` outside reduction bindings."""
    if isinstance(e, Sym):
        return set() if e.name in bound else {e.name}
    if isinstance(e, Bin):
        return free_symbols(e.left, bound) | free_symbols(e.right, bound)
    if isinstance(e, Neg):
        return free_symbols(e.arg, bound)
    if isinstance(e, Call):
        out: set[str] = set()
        for a in e.args:
            out |= free_symbols(a, bound)
        return out
    if isinstance(e, Reduce):
        out = free_symbols(e.lo, bound) | free_symbols(e.hi, bound)
        if e.exclude is not None:
            out |= free_symbols(e.exclude, bound)
        out |= free_symbols(e.body, bound | {e.var})
        return out
    return set()


def _as_int(x: float, what: str) -> int:
    r = round(x)
    if abs(x - r) > 1e-9:
        raise ValueError(f"{what} must be an integer, got {x}")
    return int(r)


def eval_expr(e: Expr,
              env: Mapping[str, float],
              fn_eval: Callable[[str, list[float]], complex] | None = None,
              int_value: Callable[[], float] | None = None):
    """Evaluate ``e``.

    Parameters
    ----------
    env : mapping
        Symbol values (``m``, ``p``, ``r``, ..., shorthand shift arguments).
    fn_eval : callable, optional
        ``fn_eval(name, args) -> value`` for function tokens.
    int_value : callable, optional
        Supplies the value of the ``INT`` token.
    """
    def rec(node: Expr, scope: dict):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Sym):
            if node.name in scope:
                return scope[node.name]
            if node.name in env:
                return env[node.name]
            if node.name == "pi":
                return math.pi
            raise KeyError(f"unknown symbol {node.name!r}")
        if isinstance(node, Neg):
            return -rec(node.arg, scope)
        if isinstance(node, Bin):
            lv = rec(node.left, scope)
            rv = rec(node.right, scope)
            if node.op == "+":
                return lv + rv
            if node.op == "-":
                return lv - rv
            if node.op == "*":
                return lv * rv
            if node.op == "/":
                return lv / rv
            # '^': negative base with an integer exponent stays real
            if isinstance(lv, (int, float)) and lv < 0:
                rint = round(rv.real if isinstance(rv, complex) else rv)
                if abs(rv - rint) < 1e-12:
                    return lv ** int(rint)
            return lv ** rv
        if isinstance(node, Call):
            if fn_eval is None:
                raise ValueError(f"function {node.fn!r} not available here")
            args = [rec(a, scope) for a in node.args]
            return fn_eval(node.fn, args)
        if isinstance(node, IntToken):
            if int_value is None:
                raise ValueError("INT token not available in this context")
            return int_value()
        if isinstance(node, Reduce):
            lo = _as_int(rec(node.lo, scope), f"{node.kind} lower bound")
            hi = _as_int(rec(node.hi, scope), f"{node.kind} upper bound")
            excl = None
            if node.exclude is not None:
                excl = _as_int(rec(node.exclude, scope), "PRODX excluded index")
            if node.kind == "SUM":
                total = 0.0
                for v in range(lo, hi + 1):
                    total += rec(node.body, {**scope, node.var: v})
                return total
            prod = 1.0
            for v in range(lo, hi + 1):
                if excl is not None and v == excl:
                    continue
                prod *= rec(node.body, {**scope, node.var: v})
            return prod
        raise TypeError(f"not an expression node: {node!r}")

    return rec(e, {})
