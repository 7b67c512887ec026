"""Parse and print the catalog text format.

A catalog file looks like::

    catalog-version 1

    identity A.MI2.L0.dd
    family MI-II
    T 2K
    params r
    constraints coprime(r,p)
    lhs: cyc[uniform]{ dn[0]*dn[+r] } * 1
    rhs: const * p*(dn(a) - cs(a)*Zu(a))

Entries are separated by blank lines.  ``#`` starts a comment (to end of
line); comments and incidental whitespace are discarded by parsing, so
``print_catalog(parse_catalog(text))`` is the canonical *normalized* form,
and normalized text round-trips byte-identically.

Line layout per entry: ``identity`` header, then ``family``, ``T``, optional
``params``, optional ``constraints``, optional ``flags``, then one or more
``lhs:`` lines followed by one or more ``rhs:`` lines.  Each side line is
``<term> * <coefficient>`` (see :mod:`.model` for term kinds and
:mod:`.expressions` for the coefficient language).
"""

from __future__ import annotations

import re

from ..errors import CatalogParseError
from .expressions import (
    Call,
    Expr,
    ExprTokenizer,
    parse_expr_prefix,
    print_expr,
)
from .model import (
    CatalogFile,
    ChainFactor,
    Compare,
    Constraint,
    CyclicTerm,
    IdentitySpec,
    LinearShift,
    Pred,
    TermFactor,
)

__all__ = ["parse_catalog", "print_catalog", "print_entry", "parse_term_text"]

_ID_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")
_COMPARE_OPS = ("==", "!=", "<=", ">=", "<", ">")
_PREDICATES = ("odd", "even", "coprime", "distinct_modp")
_SHIFT_VARS = ("r", "s", "t")


# -- sub-parsers ----------------------------------------------------------

def _parse_shift(tz: ExprTokenizer) -> LinearShift:
    """Parse a shift: signed combination of integers and r/s/t atoms."""
    coeffs = {"c0": 0, "r": 0, "s": 0, "t": 0}
    first = True
    while True:
        kind, value, _ = tz.peek()
        sign = 1
        if value in ("+", "-"):
            sign = 1 if value == "+" else -1
            tz.next()
            kind, value, _ = tz.peek()
        elif not first:
            break
        if kind == "num":
            tz.next()
            if "." in value or "e" in value or "E" in value:
                tz.error(f"shift components must be integers, got {value!r}")
            mag = int(value)
            kind2, value2, _ = tz.peek()
            if kind2 == "name" and value2 in _SHIFT_VARS:
                tz.next()
                coeffs[value2] += sign * mag
            else:
                coeffs["c0"] += sign * mag
        elif kind == "name" and value in _SHIFT_VARS:
            tz.next()
            coeffs[value] += sign * 1
        else:
            tz.error(f"got {value!r}", expected="shift component "
                     "(integer or r/s/t)")
        first = False
        if tz.peek()[1] not in ("+", "-"):
            break
    return LinearShift(c0=coeffs["c0"], cr=coeffs["r"], cs=coeffs["s"],
                       ct=coeffs["t"])


def _parse_factor(tz: ExprTokenizer):
    kind, value, _ = tz.peek()
    if kind != "name":
        tz.error(f"got {value!r}", expected="factor (fn[shift] or chain(...))")
    if value == "chain":
        tz.next()
        tz.expect("(")
        fn_tok = tz.next()
        tz.expect(",")
        step = _parse_shift(tz)
        tz.expect(",")
        count = parse_expr_prefix(tz)
        tz.expect(")")
        return ChainFactor(fn=fn_tok[1], step=step, count=count)
    fn = tz.next()[1]
    tz.expect("[")
    shift = _parse_shift(tz)
    tz.expect("]")
    power = 1
    if tz.peek()[1] == "^":
        tz.next()
        ptok = tz.next()
        if ptok[0] != "num" or not ptok[1].isdigit():
            tz.error(f"got {ptok[1]!r}", ptok, expected="integer power")
        power = int(ptok[1])
    return TermFactor(fn=fn, shift=shift, power=power)


def _parse_term(tz: ExprTokenizer) -> CyclicTerm:
    kind, value, _ = tz.peek()
    if value == "const":
        tz.next()
        return CyclicTerm(kind="const")
    if value == "cyc":
        tz.next()
        tz.expect("[")
        sign_tok = tz.next()
        if sign_tok[1] not in ("uniform", "alt"):
            tz.error(f"got {sign_tok[1]!r}", sign_tok,
                     expected="'uniform' or 'alt'")
        tz.expect("]")
        term_kind, sign = "cyc", sign_tok[1]
    elif value == "prod":
        tz.next()
        term_kind, sign = "prod", "uniform"
    else:
        tz.error(f"got {value!r}", expected="'cyc', 'prod', or 'const'")
        raise AssertionError  # unreachable
    tz.expect("{")
    factors = [_parse_factor(tz)]
    while tz.peek()[1] == "*":
        tz.next()
        factors.append(_parse_factor(tz))
    tz.expect("}")
    return CyclicTerm(kind=term_kind, sign=sign, factors=tuple(factors))


def parse_term_text(text: str, line: int = 1) -> CyclicTerm:
    """Parse a standalone term (used by tests and tools)."""
    tz = ExprTokenizer(text, line=line)
    term = _parse_term(tz)
    if not tz.at_end():
        tz.error(f"trailing input {tz.peek()[1]!r}", expected="end of term")
    return term


def _parse_side_line(text: str, line: int) -> tuple[Expr, CyclicTerm]:
    tz = ExprTokenizer(text, line=line, col0=len("lhs: "))
    term = _parse_term(tz)
    tz.expect("*")
    coeff = parse_expr_prefix(tz)
    if not tz.at_end():
        tz.error(f"trailing input {tz.peek()[1]!r}",
                 expected="end of coefficient")
    return coeff, term


def _parse_constraints(text: str, line: int, col0: int) -> tuple[Constraint, ...]:
    out: list[Constraint] = []
    offset = 0
    for chunk in text.split(";"):
        chunk_stripped = chunk.strip()
        if not chunk_stripped:
            offset += len(chunk) + 1
            continue
        tz = ExprTokenizer(chunk, line=line, col0=col0 + offset)
        expr = parse_expr_prefix(tz)
        nxt = tz.peek()[1]
        if nxt in _COMPARE_OPS:
            tz.next()
            rhs = parse_expr_prefix(tz)
            if not tz.at_end():
                tz.error("trailing input in constraint")
            out.append(Compare(nxt, expr, rhs))
        else:
            if not tz.at_end():
                tz.error(f"got {nxt!r}", expected="comparison operator or "
                         "end of predicate")
            if not isinstance(expr, Call) or expr.fn not in _PREDICATES:
                raise CatalogParseError(
                    f"constraint {chunk_stripped!r} is neither a comparison "
                    f"nor a predicate", line, col0 + offset + 1,
                    expected=f"one of {_PREDICATES}")
            out.append(Pred(expr.fn, expr.args))
        offset += len(chunk) + 1
    return tuple(out)


# -- entry / file parsing -------------------------------------------------

def _strip_comment(raw: str) -> str:
    cut = raw.find("#")
    if cut >= 0:
        raw = raw[:cut]
    return raw.rstrip()


def parse_catalog(text: str) -> CatalogFile:
    """Parse catalog text into a :class:`~.model.CatalogFile`.

    Raises
    ------
    CatalogParseError
        With 1-based line/column and a description of what was expected.
    CatalogSemanticError
        For structurally invalid entries (bad family, zeta on the lhs, ...).
    """
    lines = text.splitlines()
    version: int | None = None
    entries: list[IdentitySpec] = []
    current: dict | None = None
    seen_ids: set[str] = set()

    def finish(lineno: int) -> None:
        nonlocal current
        if current is None:
            return
        if not current["lhs"] or not current["rhs"]:
            raise CatalogParseError(
                f"identity {current['id']!r} is missing "
                f"{'lhs' if not current['lhs'] else 'rhs'} lines",
                lineno, 1, expected="lhs:/rhs: lines")
        entries.append(IdentitySpec(
            id=current["id"], family=current["family"], T_kind=current["T"],
            params=tuple(current["params"]),
            constraints=current["constraints"],
            flags=tuple(current["flags"]),
            lhs=tuple(current["lhs"]), rhs=tuple(current["rhs"]),
        ))
        current = None

    for lineno, raw in enumerate(lines, start=1):
        stripped = _strip_comment(raw).strip()
        if not stripped:
            finish(lineno)
            continue
        if version is None:
            mt = re.match(r"^catalog-version\s+(\d+)$", stripped)
            if not mt:
                raise CatalogParseError("first line must declare the catalog "
                                        "version", lineno, 1,
                                        expected="'catalog-version 1'")
            version = int(mt.group(1))
            continue
        head, _, rest = stripped.partition(" ")
        rest = rest.strip()
        if head == "identity":
            finish(lineno)
            if not _ID_RE.match(rest):
                raise CatalogParseError(f"bad identity id {rest!r}", lineno, 1,
                                        expected="letters, digits, '.', '-', '_'")
            if rest in seen_ids:
                raise CatalogParseError(f"duplicate identity id {rest!r}",
                                        lineno, 1)
            seen_ids.add(rest)
            current = {"id": rest, "family": None, "T": None, "params": [],
                       "constraints": (), "flags": [], "lhs": [], "rhs": []}
            continue
        if current is None:
            raise CatalogParseError(f"unexpected line {stripped!r} outside an "
                                    f"identity block", lineno, 1,
                                    expected="'identity <id>'")
        if head == "family":
            current["family"] = rest
        elif head == "T":
            current["T"] = rest
        elif head == "params":
            current["params"] = rest.split()
        elif head == "constraints":
            col0 = raw.index("constraints") + len("constraints ")
            current["constraints"] = _parse_constraints(rest, lineno, col0)
        elif head == "flags":
            current["flags"] = rest.split()
        elif stripped.startswith("lhs:"):
            current["lhs"].append(_parse_side_line(stripped[4:].strip(), lineno))
        elif stripped.startswith("rhs:"):
            current["rhs"].append(_parse_side_line(stripped[4:].strip(), lineno))
        else:
            raise CatalogParseError(
                f"unknown directive {head!r}", lineno, 1,
                expected="family/T/params/constraints/flags/lhs:/rhs:")
    finish(len(lines) + 1)
    if version is None:
        raise CatalogParseError("empty catalog", 1, 1,
                                expected="'catalog-version 1'")
    return CatalogFile(version=version, entries=entries)


# -- printing -------------------------------------------------------------

def print_entry(spec: IdentitySpec) -> str:
    """Canonical text of one entry (no trailing newline)."""
    lines = [f"identity {spec.id}",
             f"family {spec.family}",
             f"T {spec.T_kind}"]
    if spec.params:
        lines.append(f"params {' '.join(spec.params)}")
    if spec.constraints:
        lines.append("constraints " + "; ".join(str(c) for c in spec.constraints))
    if spec.flags:
        lines.append(f"flags {' '.join(spec.flags)}")
    for coeff, term in spec.lhs:
        lines.append(f"lhs: {term} * {print_expr(coeff)}")
    for coeff, term in spec.rhs:
        lines.append(f"rhs: {term} * {print_expr(coeff)}")
    return "\n".join(lines)


def print_catalog(catalog: CatalogFile) -> str:
    """Canonical text of a whole catalog (normalized form)."""
    blocks = [f"catalog-version {catalog.version}"]
    blocks.extend(print_entry(e) for e in catalog.entries)
    return "\n\n".join(blocks) + "\n"
