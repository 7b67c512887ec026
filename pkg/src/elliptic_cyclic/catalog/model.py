"""Data model for cyclic-identity catalog entries.

An :class:`IdentitySpec` describes one identity

    sum over lhs lines of  coeff * term  ==  sum over rhs lines of  coeff * term

where each *term* is one of

* ``cyc[uniform]{ ... }`` — the cyclic sum ``sum_{j=1..p} f(x_j)`` of a product
  of shifted factors over the equally spaced points ``x_j = x0 + (j-1) T/p``,
* ``cyc[alt]{ ... }`` — the same sum with weights ``(-1)**(j-1)`` (requires
  even ``p``),
* ``prod{ ... }`` — the plain product over the ``p`` points (used by the
  identities whose left side is the product of *all* p shifted values), and
* ``const`` — the constant ``1``.

Factors are powers of ``sn``/``cn``/``dn``/``Z`` at integer shifts in units of
``T/p`` (the shift may involve the free parameters r, s, t), or a
``chain(fn, step, count)`` — the product ``prod_{n=0..count-1} fn(x + n*step*T/p)``
whose length is itself a parameter.

Shifts are symbolic and *never* reduced modulo p: factor arguments are always
``x0 + (j - 1 + shift) * T/p``, which matters for the functions whose sign
flips under a half-period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from ..errors import CatalogSemanticError, FamilyMismatchError
from .expressions import Expr, Num, Sym, eval_expr, free_symbols, print_expr

__all__ = [
    "LinearShift", "TermFactor", "ChainFactor", "CyclicTerm",
    "Constraint", "Compare", "Pred", "IdentitySpec", "CatalogFile",
    "FAMILIES", "FAMILY_PARITY", "FAMILY_PERIOD", "ALTERNATING_FAMILIES",
    "term_function_counts", "term_parity", "check_family_parity",
]

#: Declared identity families.  The first four cover uniform-sign sums whose
#: product function has the four possible (half-period, real-period) sign
#: signatures; the ``-alt`` pair covers alternating sums; ``direct`` marks
#: entries verified only by direct evaluation (no family bookkeeping).
FAMILIES = ("MI-I", "MI-II", "MI-III", "MI-IV", "MI-I-alt", "MI-II-alt",
            "direct")

ALTERNATING_FAMILIES = ("MI-I-alt", "MI-II-alt")

#: (P, Q) signature per family: f(z + 2iK') = (-1)**P f(z),
#: f(z + 2K) = (-1)**Q f(z).
FAMILY_PARITY = {
    "MI-I": (1, 0),
    "MI-II": (0, 0),
    "MI-III": (0, 1),
    "MI-IV": (1, 1),
    "MI-I-alt": (1, 0),
    "MI-II-alt": (0, 0),
}

#: Period T (in units of K) used for the cyclic spacing, per family.
FAMILY_PERIOD = {
    "MI-I": 2, "MI-II": 2, "MI-I-alt": 2, "MI-II-alt": 2,
    "MI-III": 4, "MI-IV": 4,
}

_SHIFT_VARS = ("r", "s", "t")


@dataclass(frozen=True)
class LinearShift:
    """Integer shift ``c0 + cr*r + cs*s + ct*t`` in units of ``T/p``."""

    c0: int = 0
    cr: int = 0
    cs: int = 0
    ct: int = 0

    def value(self, params: dict[str, int]) -> int:
        return (self.c0 + self.cr * params.get("r", 0)
                + self.cs * params.get("s", 0) + self.ct * params.get("t", 0))

    def used_params(self) -> set[str]:
        out = set()
        if self.cr:
            out.add("r")
        if self.cs:
            out.add("s")
        if self.ct:
            out.add("t")
        return out

    def __str__(self) -> str:
        if self == LinearShift():
            return "0"
        parts: list[str] = []
        for coef, name in ((self.cr, "r"), (self.cs, "s"), (self.ct, "t")):
            if coef:
                sign = "+" if coef > 0 else "-"
                mag = abs(coef)
                parts.append(f"{sign}{'' if mag == 1 else mag}{name}")
        if self.c0:
            parts.append(f"{'+' if self.c0 > 0 else '-'}{abs(self.c0)}")
        return "".join(parts)


@dataclass(frozen=True)
class TermFactor:
    """``fn(x + shift*T/p) ** power`` with fn in {sn, cn, dn, Z}."""

    fn: str
    shift: LinearShift = LinearShift()
    power: int = 1

    def __post_init__(self) -> None:
        if self.fn not in ("sn", "cn", "dn", "Z"):
            raise CatalogSemanticError(f"factor function must be sn/cn/dn/Z, "
                                       f"got {self.fn!r}")
        if self.power < 1:
            raise CatalogSemanticError(f"factor power must be >= 1, "
                                       f"got {self.power}")

    def __str__(self) -> str:
        body = f"{self.fn}[{self.shift}]"
        return body if self.power == 1 else f"{body}^{self.power}"


@dataclass(frozen=True)
class ChainFactor:
    """``prod_{n=0..count-1} fn(x + n*step*T/p)`` — a consecutive-shift chain."""

    fn: str
    step: LinearShift
    count: Expr

    def __post_init__(self) -> None:
        if self.fn not in ("sn", "cn", "dn"):
            raise CatalogSemanticError(f"chain function must be sn/cn/dn, "
                                       f"got {self.fn!r}")

    def __str__(self) -> str:
        return f"chain({self.fn},{self.step},{print_expr(self.count)})"


@dataclass(frozen=True)
class CyclicTerm:
    """One term: a cyclic sum, a plain product over the p points, or ``const``.

    ``kind`` is ``'cyc'``, ``'prod'`` or ``'const'``; ``sign`` is ``'uniform'``
    or ``'alt'`` (meaningful for ``cyc`` only).
    """

    kind: str
    sign: str = "uniform"
    factors: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in ("cyc", "prod", "const"):
            raise CatalogSemanticError(f"unknown term kind {self.kind!r}")
        if self.sign not in ("uniform", "alt"):
            raise CatalogSemanticError(f"unknown sign pattern {self.sign!r}")
        if self.kind == "const" and self.factors:
            raise CatalogSemanticError("const terms take no factors")
        if self.kind in ("cyc", "prod") and not self.factors:
            raise CatalogSemanticError(f"{self.kind} terms need factors")

    def __str__(self) -> str:
        if self.kind == "const":
            return "const"
        inner = "*".join(str(f) for f in self.factors)
        if self.kind == "prod":
            return f"prod{{ {inner} }}"
        return f"cyc[{self.sign}]{{ {inner} }}"

    def used_params(self) -> set[str]:
        out: set[str] = set()
        for f in self.factors:
            if isinstance(f, TermFactor):
                out |= f.shift.used_params()
            else:
                out |= f.step.used_params()
                out |= free_symbols(f.count)
        return out

    def has_zeta(self) -> bool:
        return any(isinstance(f, TermFactor) and f.fn == "Z"
                   for f in self.factors)


# -- constraints ---------------------------------------------------------

class Constraint:
    """Base class for parameter constraints."""

    __slots__ = ()


@dataclass(frozen=True)
class Compare(Constraint):
    op: str  # '==', '!=', '<', '<=', '>', '>='
    left: Expr
    right: Expr

    def holds(self, params: dict[str, int]) -> bool:
        lv = eval_expr(self.left, params)
        rv = eval_expr(self.right, params)
        return {
            "==": lv == rv, "!=": lv != rv, "<": lv < rv,
            "<=": lv <= rv, ">": lv > rv, ">=": lv >= rv,
        }[self.op]

    def __str__(self) -> str:
        return f"{print_expr(self.left)} {self.op} {print_expr(self.right)}"


@dataclass(frozen=True)
class Pred(Constraint):
    """Named predicate: odd, even, coprime, distinct_modp."""

    name: str
    args: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if self.name not in ("odd", "even", "coprime", "distinct_modp"):
            raise CatalogSemanticError(f"unknown predicate {self.name!r}")

    def holds(self, params: dict[str, int]) -> bool:
        vals = [round(eval_expr(a, params)) for a in self.args]
        if self.name == "odd":
            return all(v % 2 == 1 for v in vals)
        if self.name == "even":
            return all(v % 2 == 0 for v in vals)
        if self.name == "coprime":
            return math.gcd(*vals) == 1
        p = params["p"]
        residues = [v % p for v in vals]
        return len(set(residues)) == len(residues)

    def __str__(self) -> str:
        return f"{self.name}({','.join(print_expr(a) for a in self.args)})"


def constraints_hold(constraints: Iterable[Constraint],
                     params: dict[str, int]) -> bool:
    return all(c.holds(params) for c in constraints)


# -- identities ----------------------------------------------------------

@dataclass(frozen=True)
class IdentitySpec:
    """A parsed catalog entry.

    ``lhs`` and ``rhs`` are tuples of ``(coefficient, term)`` pairs; the
    identity asserts that the two coefficient-weighted sums agree for every
    admissible parameter assignment and base point.
    """

    id: str
    family: str
    T_kind: str  # '2K' or '4K'
    params: tuple[str, ...] = ()
    constraints: tuple[Constraint, ...] = ()
    flags: tuple[str, ...] = ()
    lhs: tuple[tuple[Expr, CyclicTerm], ...] = ()
    rhs: tuple[tuple[Expr, CyclicTerm], ...] = ()

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise CatalogSemanticError(
                f"{self.id}: unknown family {self.family!r}")
        if self.T_kind not in ("2K", "4K"):
            raise CatalogSemanticError(
                f"{self.id}: period kind must be '2K' or '4K', "
                f"got {self.T_kind!r}")
        if not self.lhs or not self.rhs:
            raise CatalogSemanticError(f"{self.id}: needs lhs and rhs lines")
        for _coeff, term in self.lhs:
            if term.kind == "const":
                raise CatalogSemanticError(
                    f"{self.id}: const terms are only allowed on the rhs")
            if term.has_zeta():
                raise CatalogSemanticError(
                    f"{self.id}: the zeta function may appear only in "
                    f"rhs basis terms")
        for name in self.params:
            if name not in ("r", "s", "t", "l"):
                raise CatalogSemanticError(
                    f"{self.id}: unknown parameter {name!r}")

    @property
    def is_alternating(self) -> bool:
        return any(term.sign == "alt" for _c, term in self.lhs)

    @property
    def verify_then_trust(self) -> bool:
        return "verify-then-trust" in self.flags

    def period_in_K(self) -> int:
        return 2 if self.T_kind == "2K" else 4

    def all_terms(self) -> Iterator[tuple[str, Expr, CyclicTerm]]:
        for coeff, term in self.lhs:
            yield "lhs", coeff, term
        for coeff, term in self.rhs:
            yield "rhs", coeff, term


@dataclass
class CatalogFile:
    """A parsed catalog: a format version and an ordered list of entries."""

    version: int
    entries: list[IdentitySpec] = field(default_factory=list)

    def by_id(self) -> dict[str, IdentitySpec]:
        return {e.id: e for e in self.entries}


# -- parity bookkeeping --------------------------------------------------

def term_function_counts(term: CyclicTerm, params: dict[str, int]) -> dict[str, int]:
    """Total powers of sn/cn/dn/Z in one product, for concrete parameters.

    For ``prod`` terms the factor counts are scaled by ``p``: the plain
    product over the p points is the length-p chain of its factor set, which
    is what the parity bookkeeping must see.
    """
    counts = {"sn": 0, "cn": 0, "dn": 0, "Z": 0}
    for f in term.factors:
        if isinstance(f, TermFactor):
            counts[f.fn] += f.power
        else:
            count = round(eval_expr(f.count, params))
            counts[f.fn] += count
    if term.kind == "prod":
        p = params["p"]
        counts = {k: v * p for k, v in counts.items()}
    return counts


def term_parity(term: CyclicTerm, params: dict[str, int]) -> tuple[int, int]:
    """(P, Q) signature of the product function of ``term``.

    ``P`` flips with each cn or dn power (sign under ``z -> z + 2iK'``);
    ``Q`` flips with each sn or cn power (sign under ``z -> z + 2K``).
    The zeta function counts as neutral in both (its additive quasi-period
    constants cancel in the sums where it is admitted).
    """
    if term.kind == "const":
        return (0, 0)
    counts = term_function_counts(term, params)
    P = (counts["dn"] + counts["cn"]) % 2
    Q = (counts["sn"] + counts["cn"]) % 2
    return (P, Q)


def _sample_param_assignments(spec: IdentitySpec,
                              max_assignments: int = 6) -> list[dict[str, int]]:
    """A few concrete constraint-satisfying parameter assignments.

    Point counts are drawn from the family's own admissible range: an
    alternating-family term like ``prod{ sn[0] }`` only ever runs at even p,
    and its parity signature is only defined there.
    """
    from .grid import default_p_values, iter_param_assignments  # avoid cycle

    out: list[dict[str, int]] = []
    for p in default_p_values(spec.family):
        for assignment in iter_param_assignments(spec, p):
            out.append(assignment)
            if len(out) >= max_assignments:
                return out
            break  # one assignment per p is enough for parity checks
    return out


def check_family_parity(spec: IdentitySpec) -> None:
    """Verify that every term's (P, Q) signature matches the family.

    Raises
    ------
    FamilyMismatchError
        If any lhs or rhs term disagrees with the declared family for some
        admissible parameter assignment (entries with family ``direct`` are
        exempt).
    """
    if spec.family == "direct":
        return
    expected = FAMILY_PARITY[spec.family]
    assignments = _sample_param_assignments(spec)
    if not assignments:
        raise FamilyMismatchError(
            f"{spec.id}: no admissible parameters found to check parity")
    for params in assignments:
        for side, _coeff, term in spec.all_terms():
            if term.kind == "const":
                if isinstance(_coeff, Num) and _coeff.value == 0:
                    continue  # a literal zero side carries no parity
                if expected != (0, 0):
                    raise FamilyMismatchError(
                        f"{spec.id}: const rhs term requires the neutral "
                        f"parity class, family is {spec.family}")
                continue
            got = term_parity(term, params)
            if got != expected:
                raise FamilyMismatchError(
                    f"{spec.id}: {side} term {term} has parity {got} at "
                    f"{params}, family {spec.family} requires {expected}")
