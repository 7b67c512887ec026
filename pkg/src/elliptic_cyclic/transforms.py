"""Restatements of catalog identities under argument/modulus substitutions.

Every cyclic identity in the catalog holds at each modulus ``m`` in (0, 1)
and at every complex base point.  This module turns that freedom into new,
independently checkable statements:

``imaginary_shift``
    Reads an identity at the complementary modulus ``1 - m`` and rewrites
    each function through its quarter-period translation image, producing an
    identity at modulus ``m`` whose sample points are separated by the pure
    imaginary step ``i T'/p``.

``complex_shift``
    Reads an identity at the reciprocal modulus ``1/m`` and rewrites it
    through the argument scaling ``u = x/sqrt(m)``, producing an identity at
    modulus ``m`` with complex shift steps ``2(K + iK')/p`` or
    ``4(K + iK')/p``.

``ratio_expand``
    The six half-argument formulas expressing a ratio of the three basic
    functions at ``x`` through their values at ``2x`` — plus, for three
    points spaced ``2K/3`` apart, the constant value of the pairwise product
    sum of ``cn*dn/sn``.

``weierstrass_form``
    The squared-function four-point identity restated for the Weierstrass P
    function on the lattice with half-periods ``(K, iK')``.

``theta_form``
    The odd-``p`` product identity restated as a product-versus-sum relation
    between ``theta_3/theta_4`` ratios at step ``pi/p``.

All transforms are evaluator wrappers: nothing is rewritten symbolically.
Each returned object re-derives its substitution data from the modulus
context supplied at call time, so a single wrapper serves every modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

import numpy as np

from .elliptic_core import ModulusContext, make_context
from .jacobi_fn import eval_fn, theta, weierstrass_P, weierstrass_invariants
from .cyclic_engine import (DEFAULT_POLE_EPS, eval_coefficient,
                            quadrature_token_value, _expanded_factors)
from .errors import (ConstraintError, DenominatorZeroError, DomainError)
from .catalog.model import CatalogFile, CyclicTerm, IdentitySpec, TermFactor
from .catalog.expressions import (Bin, Call, Expr, IntToken, Neg, Num,
                                  Reduce, Sym, free_symbols)

__all__ = [
    "TRANSFORM_KINDS", "TransformedIdentity",
    "imaginary_shift", "complex_shift", "double_imaginary_shift",
    "is_applicable", "applicable_entries",
    "RATIO_IDS", "RatioFormula", "ratio_expand", "ratio_shifted_form",
    "ratio_pair_sum", "ratio_pair_sum_constant", "PairSumCheck",
    "WeierstrassForm", "weierstrass_form",
    "ThetaForm", "theta_form",
    "half_period_products",
]

#: The transform kinds this module implements.
TRANSFORM_KINDS = ("imaginary_shift", "complex_shift", "ratio_expand",
                   "weierstrass_form", "theta_form")


# -- substitution tables -------------------------------------------------
#
# Each table maps a function code at the *source* modulus to
# ``(prefactor(target context), image code)`` such that
#
#     fn(x, source modulus) == prefactor * image(u, target modulus)
#
# where u is the transformed argument.  The tables cover all twelve codes so
# that reciprocal-modulus coefficient calls can be mapped as well; term
# factors only ever use sn/cn/dn.

def _imag_table(ctx: ModulusContext) -> dict[str, tuple[complex, str]]:
    """Images under ``u = i x + K + iK'`` of functions at modulus ``1 - m``."""
    rm = math.sqrt(ctx.m)
    rc = math.sqrt(1.0 - ctx.m)
    return {
        "sn": (-1.0 / rc, "dn"), "cn": (1j * rm / rc, "cn"), "dn": (rm, "sn"),
        "ns": (-rc, "nd"), "nc": (-1j * rc / rm, "nc"), "nd": (1.0 / rm, "ns"),
        "sc": (1j / rm, "dc"), "cs": (-1j * rm, "cd"),
        "sd": (-1.0 / (rm * rc), "ds"), "ds": (-rm * rc, "sd"),
        "cd": (1j / rc, "cs"), "dc": (-1j * rc, "sc"),
    }


def _recip_table(ctx: ModulusContext) -> dict[str, tuple[complex, str]]:
    """Images under ``u = x / sqrt(m)`` of functions at modulus ``1/m``."""
    rm = math.sqrt(ctx.m)
    return {
        "sn": (rm, "sn"), "cn": (1.0, "dn"), "dn": (1.0, "cn"),
        "ns": (1.0 / rm, "ns"), "nc": (1.0, "nd"), "nd": (1.0, "nc"),
        "sc": (rm, "sd"), "sd": (rm, "sc"), "cs": (1.0 / rm, "ds"),
        "ds": (1.0 / rm, "cs"), "cd": (1.0, "dc"), "dc": (1.0, "cd"),
    }


# -- generic mapped-term evaluation ---------------------------------------

def _eval_mapped_term(term: CyclicTerm, u0, params: Mapping[str, int],
                      ctx: ModulusContext,
                      fn_image: Mapping[str, tuple[complex, str]],
                      u_step: complex, pole_eps: float):
    """One term with every factor replaced by its substitution image."""
    u0 = np.asarray(u0, dtype=complex)
    p = int(params["p"])
    if term.kind == "const":
        return np.ones_like(u0)
    factors = _expanded_factors(term, dict(params))
    if term.kind == "cyc":
        total = np.zeros_like(u0)
        for j in range(p):
            weight = -1.0 if (term.sign == "alt" and j % 2 == 1) else 1.0
            value = np.full_like(u0, weight)
            for fn, sigma, power in factors:
                pref, img = fn_image[fn]
                fv = np.asarray(eval_fn(img, u0 + (sigma + j) * u_step, ctx,
                                        pole_eps=pole_eps), dtype=complex)
                value = value * (pref ** power) * fv ** power
            total = total + value
        return total
    total = np.ones_like(u0)
    for j in range(p):
        for fn, sigma, power in factors:
            pref, img = fn_image[fn]
            fv = np.asarray(eval_fn(img, u0 + (sigma + j) * u_step, ctx,
                                    pole_eps=pole_eps), dtype=complex)
            total = total * (pref ** power) * fv ** power
    return total


def _eval_mapped_lines(lines, u0, params, ctx, fn_image, u_step,
                       coeff_value: Callable[[Expr], complex],
                       pole_eps: float):
    total = None
    for coeff, term in lines:
        cval = complex(coeff_value(coeff))
        tval = _eval_mapped_term(term, u0, params, ctx, fn_image, u_step,
                                 pole_eps)
        contribution = cval * tval
        total = contribution if total is None else total + contribution
    return total


# -- applicability --------------------------------------------------------

def _walk_expr(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Bin):
        yield from _walk_expr(e.left)
        yield from _walk_expr(e.right)
    elif isinstance(e, Neg):
        yield from _walk_expr(e.arg)
    elif isinstance(e, Call):
        for a in e.args:
            yield from _walk_expr(a)
    elif isinstance(e, Reduce):
        yield from _walk_expr(e.lo)
        yield from _walk_expr(e.hi)
        if e.exclude is not None:
            yield from _walk_expr(e.exclude)
        yield from _walk_expr(e.body)


_RECIP_BAD_SYMBOLS = ("Kp", "E", "q")


def _shift_applicability(spec: IdentitySpec, kind: str) -> tuple[bool, str]:
    for side, _coeff, term in spec.all_terms():
        for f in term.factors:
            fn = f.fn
            if fn == "Z":
                return (False, f"{side} zeta factor has no substitution "
                               f"image")
    if kind == "complex_shift":
        for _side, coeff, _term in spec.all_terms():
            syms = free_symbols(coeff)
            for name in _RECIP_BAD_SYMBOLS:
                if name in syms:
                    return (False, f"coefficient symbol {name!r} has no "
                                   f"reciprocal-modulus value")
            for node in _walk_expr(coeff):
                if isinstance(node, IntToken):
                    return (False, "one-period integral is not defined at "
                                   "the reciprocal modulus")
                if isinstance(node, Call) and node.fn == "Zu":
                    return (False, "zeta coefficient call has no "
                                   "reciprocal-modulus image")
    return (True, "")


def _is_squared_pair_entry(spec: IdentitySpec) -> tuple[bool, str]:
    if spec.family != "MI-II":
        return (False, "needs the squared-function four-point family")
    if len(spec.lhs) != 1:
        return (False, "needs a single-line left side")
    _c, term = spec.lhs[0]
    if term.kind != "cyc" or term.sign != "uniform":
        return (False, "left side must be a uniform cyclic sum")
    fs = term.factors
    ok = (len(fs) == 2 and all(isinstance(f, TermFactor) for f in fs)
          and all(f.fn == "dn" and f.power == 2 for f in fs)
          and fs[0].shift.value({"p": 1, "r": 0, "s": 0, "t": 0, "l": 0}) == 0)
    if not ok:
        return (False, "left side must pair a squared factor with its "
                       "shifted square")
    if len(spec.rhs) != 2:
        return (False, "right side must be one cyclic line plus a constant")
    _c0, t0 = spec.rhs[0]
    _c1, t1 = spec.rhs[1]
    if not (t0.kind == "cyc" and len(t0.factors) == 1
            and isinstance(t0.factors[0], TermFactor)
            and t0.factors[0].fn == "dn" and t0.factors[0].power == 2):
        return (False, "right side must start with the squared-function "
                       "cyclic sum")
    if t1.kind != "const":
        return (False, "right side must end with a constant line")
    return (True, "")


def _is_product_entry(spec: IdentitySpec) -> tuple[bool, str]:
    if spec.family != "MI-I":
        return (False, "needs the first-kind family")
    if len(spec.lhs) != 1:
        return (False, "needs a single-line left side")
    _c, term = spec.lhs[0]
    ok = (term.kind == "prod" and len(term.factors) == 1
          and isinstance(term.factors[0], TermFactor)
          and term.factors[0].fn == "dn" and term.factors[0].power == 1)
    if not ok:
        return (False, "left side must be the plain product of dn over the "
                       "p points")
    if not (len(spec.rhs) == 1 and spec.rhs[0][1].kind == "cyc"):
        return (False, "right side must be a single cyclic line")
    return (True, "")


def is_applicable(spec: IdentitySpec, kind: str) -> tuple[bool, str]:
    """Whether ``kind`` supports ``spec``; on refusal the reason is returned.

    Restrictions per kind:

    * ``imaginary_shift`` — factors must be sn/cn/dn (zeta terms have no
      translation image in the table).
    * ``complex_shift`` — same, and coefficients must avoid ``Kp``/``E``/``q``
      symbols, zeta calls, and the one-period integral token, none of which
      are defined at the reciprocal modulus.
    * ``weierstrass_form`` — the squared-function pair identity shape.
    * ``theta_form`` — the plain-product identity shape.
    * ``ratio_expand`` — not entry-based (takes a formula id, not a spec).
    """
    if kind not in TRANSFORM_KINDS:
        raise DomainError(f"unknown transform kind {kind!r}; expected one "
                          f"of {TRANSFORM_KINDS}")
    if kind in ("imaginary_shift", "complex_shift"):
        return _shift_applicability(spec, kind)
    if kind == "weierstrass_form":
        return _is_squared_pair_entry(spec)
    if kind == "theta_form":
        return _is_product_entry(spec)
    return (False, "ratio_expand takes a formula id, not a catalog entry")


def applicable_entries(catalog: CatalogFile, kind: str,
                       limit: int | None = None) -> list[str]:
    """Ids of catalog entries supported by ``kind``, in catalog order."""
    out: list[str] = []
    for entry in catalog.entries:
        ok, _why = is_applicable(entry, kind)
        if ok:
            out.append(entry.id)
            if limit is not None and len(out) >= limit:
                break
    return out


# -- reciprocal-modulus coefficient evaluation ----------------------------

def _branch_pow(base, expo):
    """Power with the lower branch on the negative real axis.

    The reciprocal-modulus rewrite continues ``m -> 1/m`` through the lower
    half plane (the continuation with ``K(1/m) = sqrt(m)(K + iK')``), so a
    negative real base raised to a fractional power takes
    ``|base|**expo * exp(-i*pi*expo)`` rather than the principal value.
    """
    expo = complex(expo)
    if abs(expo.imag) > 1e-14:
        raise DomainError("exponent must be real in coefficient position")
    e = expo.real
    b = complex(base)
    if abs(b.imag) <= 1e-15 * abs(b.real) and b.real < 0.0:
        r = round(e)
        if abs(e - r) < 1e-12:
            return complex(b.real ** int(r))
        return complex(abs(b.real) ** e * np.exp(-1j * math.pi * e))
    return b ** e


def _reciprocal_env(params: Mapping[str, int],
                    ctx: ModulusContext) -> dict[str, complex]:
    p = int(params["p"])
    K_mu = math.sqrt(ctx.m) * (ctx.K + 1j * ctx.Kprime)
    env: dict[str, complex] = {"m": 1.0 / ctx.m, "K": K_mu, "p": float(p)}
    for name in ("r", "s", "t", "l"):
        if name in params:
            env[name] = float(params[name])
    r, s, t = params.get("r"), params.get("s"), params.get("t")
    if r is not None:
        env["a"] = 2.0 * r * K_mu / p
        env["b"] = 4.0 * r * K_mu / p
    if s is not None:
        env["a1"] = 2.0 * s * K_mu / p
        env["b1"] = 4.0 * s * K_mu / p
    if t is not None:
        env["a2"] = 2.0 * t * K_mu / p
    return env


def _as_index(x, what: str) -> int:
    r = round(x.real if isinstance(x, complex) else x)
    if abs(x - r) > 1e-9:
        raise DomainError(f"{what} must be an integer, got {x}")
    return int(r)


def _eval_reciprocal_coeff(e: Expr, params: Mapping[str, int],
                           ctx: ModulusContext) -> complex:
    """Value of a coefficient expression read at the reciprocal modulus.

    Symbols are bound to their reciprocal-modulus values (``m -> 1/m``, the
    quarter period to ``sqrt(m)(K + iK')``); function calls are routed
    through the substitution table back to the original modulus.
    """
    env = _reciprocal_env(params, ctx)
    table = _recip_table(ctx)
    rm = math.sqrt(ctx.m)

    def fn_value(name: str, args: list[complex]) -> complex:
        if name == "Zu":
            raise ConstraintError("zeta coefficient call has no "
                                  "reciprocal-modulus image")
        if name not in table:
            raise DomainError(f"unknown coefficient function {name!r}")
        (x,) = args
        pref, img = table[name]
        value = eval_fn(img, np.asarray(complex(x) / rm, dtype=complex), ctx)
        return pref * complex(np.asarray(value).ravel()[0])

    def rec(node: Expr, scope: dict[str, complex]) -> complex:
        if isinstance(node, Num):
            return complex(node.value)
        if isinstance(node, Sym):
            if node.name in scope:
                return scope[node.name]
            if node.name in env:
                return complex(env[node.name])
            if node.name == "pi":
                return complex(math.pi)
            raise ConstraintError(f"coefficient symbol {node.name!r} has no "
                                  f"reciprocal-modulus value")
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
            return _branch_pow(lv, rv)
        if isinstance(node, Call):
            return fn_value(node.fn, [rec(a, scope) for a in node.args])
        if isinstance(node, IntToken):
            raise ConstraintError("one-period integral is not defined at "
                                  "the reciprocal modulus")
        if isinstance(node, Reduce):
            lo = _as_index(rec(node.lo, scope), f"{node.kind} lower bound")
            hi = _as_index(rec(node.hi, scope), f"{node.kind} upper bound")
            excl = None
            if node.exclude is not None:
                excl = _as_index(rec(node.exclude, scope), "excluded index")
            if node.kind == "SUM":
                total = 0.0 + 0.0j
                for v in range(lo, hi + 1):
                    total += rec(node.body, {**scope, node.var: v})
                return total
            prod = 1.0 + 0.0j
            for v in range(lo, hi + 1):
                if excl is not None and v == excl:
                    continue
                prod *= rec(node.body, {**scope, node.var: v})
            return prod
        raise TypeError(f"not an expression node: {node!r}")

    return rec(e, {})


# -- shift transforms -----------------------------------------------------

@dataclass
class TransformedIdentity:
    """A catalog identity restated through a substitution chain.

    ``sides(u, params, ctx)`` evaluates both restated sides at complex base
    point(s) ``u`` for the given parameters and target modulus context;
    ``residual`` reduces that to the worst relative defect.  All substitution
    data is derived from ``ctx`` at call time.
    """

    kind: str
    spec: IdentitySpec
    _strategy: Callable = field(repr=False)
    _quad_cache: dict = field(default_factory=dict, repr=False)

    def sides(self, u, params: Mapping[str, int], ctx: ModulusContext,
              pole_eps: float = DEFAULT_POLE_EPS):
        """Both sides at ``u``; scalars in, scalars out."""
        scalar = np.ndim(u) == 0
        lhs, rhs = self._strategy(self, np.asarray(u, dtype=complex),
                                  dict(params), ctx, pole_eps)
        if scalar:
            return complex(np.asarray(lhs).ravel()[0]), \
                complex(np.asarray(rhs).ravel()[0])
        return lhs, rhs

    def residual(self, u, params: Mapping[str, int], ctx: ModulusContext,
                 pole_eps: float = DEFAULT_POLE_EPS) -> float:
        """Worst relative defect ``|lhs - rhs| / max(1, |lhs|, |rhs|)``."""
        lhs, rhs = self.sides(u, params, ctx, pole_eps=pole_eps)
        lhs = np.asarray(lhs)
        rhs = np.asarray(rhs)
        scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
        return float(np.max(np.abs(lhs - rhs) / scale))

    def default_points(self, ctx: ModulusContext, n: int = 16,
                       seed: int | None = None) -> np.ndarray:
        """Deterministic complex base points clear of the pole lattice.

        The imaginary parts stay in a band around ``0.4 K'`` chosen so that
        no cyclic translate lands near a pole line for any ``p <= 12``; with
        ``seed`` the points are drawn uniformly from the same safe box.
        """
        if n < 1:
            raise DomainError("need at least one base point")
        if seed is not None:
            rng = np.random.default_rng(seed)
            re = rng.uniform(0.08, 0.85, size=n)
            im = rng.uniform(0.401, 0.428, size=n)
        else:
            t = np.linspace(0.0, 1.0, n)
            re = 0.08 + 0.77 * t
            im = 0.401 + 0.027 * t
        return re * ctx.K + 1j * im * ctx.Kprime


def _imaginary_strategy(tr: TransformedIdentity, u, params, ctx, pole_eps):
    spec = tr.spec
    p = int(params["p"])
    ctx_src = make_context(1.0 - ctx.m)
    T_src = spec.period_in_K() * ctx_src.K
    u_step = 1j * T_src / p
    table = _imag_table(ctx)
    cache_key = ("imag", ctx.m, tuple(sorted(params.items())))

    def coeff_value(expr: Expr) -> complex:
        def int_value() -> float:
            if cache_key not in tr._quad_cache:
                tr._quad_cache[cache_key] = quadrature_token_value(
                    spec.lhs, params, ctx_src, T_src)
            return tr._quad_cache[cache_key]
        return eval_coefficient(expr, params, ctx_src, T_src,
                                int_value=int_value)

    lhs = _eval_mapped_lines(spec.lhs, u, params, ctx, table, u_step,
                             coeff_value, pole_eps)
    rhs = _eval_mapped_lines(spec.rhs, u, params, ctx, table, u_step,
                             coeff_value, pole_eps)
    return lhs, rhs


def _complex_strategy(tr: TransformedIdentity, u, params, ctx, pole_eps):
    spec = tr.spec
    p = int(params["p"])
    u_step = spec.period_in_K() * (ctx.K + 1j * ctx.Kprime) / p
    table = _recip_table(ctx)

    def coeff_value(expr: Expr) -> complex:
        return _eval_reciprocal_coeff(expr, params, ctx)

    lhs = _eval_mapped_lines(spec.lhs, u, params, ctx, table, u_step,
                             coeff_value, pole_eps)
    rhs = _eval_mapped_lines(spec.rhs, u, params, ctx, table, u_step,
                             coeff_value, pole_eps)
    return lhs, rhs


def _double_imaginary_strategy(tr: TransformedIdentity, x, params, ctx,
                               pole_eps):
    """Two complementary-modulus rewrites composed; lands back at ``ctx``.

    The composed statement is a function of the *original* base point ``x``
    and is directly comparable to the untransformed identity, which is what
    makes it a round-trip check of the substitution bookkeeping.
    """
    spec = tr.spec
    p = int(params["p"])
    ctx_mid = make_context(1.0 - ctx.m)
    first = _imag_table(ctx_mid)   # source ctx.m   -> target ctx_mid
    second = _imag_table(ctx)      # source ctx_mid -> target ctx.m
    composed: dict[str, tuple[complex, str]] = {}
    for code, (p1, i1) in first.items():
        p2, i2 = second[i1]
        composed[code] = (p1 * p2, i2)
    # u1 = i x + K_mid + i K'_mid at modulus 1 - m; u2 = i u1 + K + i K'.
    offset = (1j * (ctx_mid.K + 1j * ctx_mid.Kprime)
              + ctx.K + 1j * ctx.Kprime)
    u0 = -x + offset
    T_src = spec.period_in_K() * ctx.K
    u_step = -T_src / p
    cache_key = ("double", ctx.m, tuple(sorted(params.items())))

    def coeff_value(expr: Expr) -> complex:
        def int_value() -> float:
            if cache_key not in tr._quad_cache:
                tr._quad_cache[cache_key] = quadrature_token_value(
                    spec.lhs, params, ctx, T_src)
            return tr._quad_cache[cache_key]
        return eval_coefficient(expr, params, ctx, T_src,
                                int_value=int_value)

    lhs = _eval_mapped_lines(spec.lhs, u0, params, ctx, composed, u_step,
                             coeff_value, pole_eps)
    rhs = _eval_mapped_lines(spec.rhs, u0, params, ctx, composed, u_step,
                             coeff_value, pole_eps)
    return lhs, rhs


def _make_shift_transform(spec: IdentitySpec, kind: str, strategy: Callable,
                          label: str | None = None) -> TransformedIdentity:
    ok, why = _shift_applicability(spec, kind)
    if not ok:
        raise ConstraintError(f"{spec.id}: {kind} does not apply: {why}")
    return TransformedIdentity(kind=label or kind, spec=spec,
                               _strategy=strategy)


def imaginary_shift(spec: IdentitySpec) -> TransformedIdentity:
    """Restate ``spec`` with pure imaginary sample steps.

    The returned evaluator reads the identity at the complementary modulus
    ``1 - m`` (all closed-form coefficients, including the one-period
    integral, are evaluated there) and replaces every factor by its
    quarter-period translation image at modulus ``m``.  Sample points then
    step by ``i T'/p``, with ``T' = 2 K'`` or ``4 K'``.
    """
    return _make_shift_transform(spec, "imaginary_shift", _imaginary_strategy)


def complex_shift(spec: IdentitySpec) -> TransformedIdentity:
    """Restate ``spec`` with complex sample steps along ``K + iK'``.

    The returned evaluator reads the identity at the reciprocal modulus
    ``1/m`` — whose quarter period is ``sqrt(m)(K + iK')`` — and rewrites
    it through the argument scaling ``u = x/sqrt(m)``.  Sample points step
    by ``2(K + iK')/p`` or ``4(K + iK')/p`` at modulus ``m``.
    """
    return _make_shift_transform(spec, "complex_shift", _complex_strategy)


def double_imaginary_shift(spec: IdentitySpec) -> TransformedIdentity:
    """Compose the complementary-modulus rewrite with itself.

    The two substitutions cancel: the returned evaluator's sides, as
    functions of the original base point, agree with the untransformed
    identity at the original modulus to round-off.  Useful as a round-trip
    check that prefactors, images, and argument offsets are consistent.
    """
    return _make_shift_transform(spec, "imaginary_shift",
                                 _double_imaginary_strategy,
                                 label="double_imaginary_shift")


# -- ratio formulas --------------------------------------------------------

_RATIO_SINGULAR_EPS = 1e-12


def _point(code: str, x, ctx: ModulusContext) -> complex:
    if np.ndim(x) != 0:
        raise DomainError("ratio and product helpers take one base point "
                          "at a time")
    return complex(np.asarray(eval_fn(code, np.asarray(x, dtype=complex),
                                      ctx)).ravel()[0])


@dataclass(frozen=True)
class RatioFormula:
    """One half-argument formula: a three-function ratio at ``x`` expressed
    through single functions at ``2x``."""

    ratio_id: str
    numerator: tuple[str, ...]
    denominator: tuple[str, ...]
    #: rhs builder over (sn(2x), cn(2x), dn(2x), m)
    rhs_form: Callable[[complex, complex, complex, float], complex] = \
        field(repr=False)
    description: str = ""

    def lhs(self, x, ctx: ModulusContext) -> complex:
        num = 1.0 + 0.0j
        for code in self.numerator:
            num *= _point(code, x, ctx)
        den = 1.0 + 0.0j
        for code in self.denominator:
            value = _point(code, x, ctx)
            if abs(value) < _RATIO_SINGULAR_EPS:
                raise DenominatorZeroError(self.ratio_id, code, value)
            den *= value
        return num / den

    def rhs(self, x, ctx: ModulusContext) -> complex:
        sn2 = _point("sn", 2.0 * np.asarray(x, dtype=complex), ctx)
        cn2 = _point("cn", 2.0 * np.asarray(x, dtype=complex), ctx)
        dn2 = _point("dn", 2.0 * np.asarray(x, dtype=complex), ctx)
        if abs(sn2) < _RATIO_SINGULAR_EPS:
            raise DenominatorZeroError(self.ratio_id, "sn(2x)", sn2)
        return self.rhs_form(sn2, cn2, dn2, ctx.m)

    def residual(self, x, ctx: ModulusContext) -> float:
        lhs = self.lhs(x, ctx)
        rhs = self.rhs(x, ctx)
        return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


RATIO_FORMULAS: dict[str, RatioFormula] = {
    f.ratio_id: f for f in (
        RatioFormula("cn*dn/sn", ("cn", "dn"), ("sn",),
                     lambda s2, c2, d2, m: (d2 + c2) / s2,
                     "cn(x)dn(x)/sn(x) == (dn(2x) + cn(2x))/sn(2x)"),
        RatioFormula("sn*dn/cn", ("sn", "dn"), ("cn",),
                     lambda s2, c2, d2, m: (1.0 - c2) / s2,
                     "sn(x)dn(x)/cn(x) == (1 - cn(2x))/sn(2x)"),
        RatioFormula("sn*cn/dn", ("sn", "cn"), ("dn",),
                     lambda s2, c2, d2, m: (1.0 - d2) / (m * s2),
                     "sn(x)cn(x)/dn(x) == (1 - dn(2x))/(m sn(2x))"),
        RatioFormula("cn/(sn*dn)", ("cn",), ("sn", "dn"),
                     lambda s2, c2, d2, m: (1.0 + c2) / s2,
                     "cn(x)/(sn(x)dn(x)) == (1 + cn(2x))/sn(2x)"),
        RatioFormula("sn/(cn*dn)", ("sn",), ("cn", "dn"),
                     lambda s2, c2, d2, m: (d2 - c2) / ((1.0 - m) * s2),
                     "sn(x)/(cn(x)dn(x)) == (dn(2x) - cn(2x))/((1-m) sn(2x))"),
        RatioFormula("dn/(sn*cn)", ("dn",), ("sn", "cn"),
                     lambda s2, c2, d2, m: (1.0 + d2) / s2,
                     "dn(x)/(sn(x)cn(x)) == (1 + dn(2x))/sn(2x)"),
    )
}

#: Ids of the six half-argument ratio formulas, in catalog order.
RATIO_IDS = tuple(RATIO_FORMULAS)


def ratio_expand(ratio_id: str) -> RatioFormula:
    """The verified half-argument equality for one of the six ratios."""
    try:
        return RATIO_FORMULAS[ratio_id]
    except KeyError:
        raise DomainError(f"unknown ratio id {ratio_id!r}; expected one of "
                          f"{RATIO_IDS}") from None


def ratio_shifted_form(x, ctx: ModulusContext) -> complex:
    """Alternative double-argument form of ``cn*dn/sn``.

    Equals ``i (sqrt(m) cn(2x + iK') + dn(2x + iK'))`` — the same value as
    ``ratio_expand("cn*dn/sn")`` produces, reached through the translated
    double argument instead of the three-function quotient.
    """
    arg = 2.0 * np.asarray(x, dtype=complex) + 1j * ctx.Kprime
    return 1j * (math.sqrt(ctx.m) * _point("cn", arg, ctx)
                 + _point("dn", arg, ctx))


def ratio_pair_sum_constant(ctx: ModulusContext) -> float:
    """Closed form of the three-point pairwise product sum of ``cn*dn/sn``.

    With ``c = dn(2K/3)`` the value is
    ``c (2 + c) (m - (1 + c)^2) / (1 + c)^2``.
    """
    c = _point("dn", 2.0 * ctx.K / 3.0, ctx).real
    return float(c * (2.0 + c) * (ctx.m - (1.0 + c) ** 2) / (1.0 + c) ** 2)


@dataclass(frozen=True)
class PairSumCheck:
    """Three routes to the same number (see :func:`ratio_pair_sum`)."""

    pair_sum: complex
    shifted_form: complex
    constant: float

    @property
    def residual(self) -> float:
        scale = max(1.0, abs(self.pair_sum))
        return max(abs(self.pair_sum - self.shifted_form),
                   abs(self.pair_sum - self.constant)) / scale


def ratio_pair_sum(x, ctx: ModulusContext) -> PairSumCheck:
    """Pairwise products of ``cn*dn/sn`` at three points ``2K/3`` apart.

    Returns the direct pairwise sum, the equivalent form built from ``cn``
    and ``dn`` pair sums at doubled, quarter-shifted arguments, and the
    closed-form constant — all three agree for every base point.
    """
    ratio = RATIO_FORMULAS["cn*dn/sn"]
    xj = [np.asarray(x, dtype=complex) + 2.0 * j * ctx.K / 3.0
          for j in range(3)]
    r = [ratio.lhs(t, ctx) for t in xj]
    pair_sum = r[0] * r[1] + r[1] * r[2] + r[2] * r[0]
    uj = [2.0 * t + 1j * ctx.Kprime for t in xj]
    cns = [_point("cn", t, ctx) for t in uj]
    dns = [_point("dn", t, ctx) for t in uj]
    shifted = (-ctx.m * (cns[0] * cns[1] + cns[1] * cns[2] + cns[2] * cns[0])
               - (dns[0] * dns[1] + dns[1] * dns[2] + dns[2] * dns[0]))
    return PairSumCheck(pair_sum=pair_sum, shifted_form=shifted,
                        constant=ratio_pair_sum_constant(ctx))


# -- Weierstrass form -------------------------------------------------------

@dataclass
class WeierstrassForm:
    """The squared-function pair identity on the (K, iK') lattice.

    With ``P(u) = e3 + 1/sn(u)^2`` and the original identity's closed-form
    cyclic coefficient ``A`` and constant ``B``, the restated claim is::

        sum_j P(u_j) P(u_{j+r}) == (B + p A e1 - p e1^2)
                                   - (A - 2 e1) sum_j P(u_j)

    where ``u_j = u + 2 j K / p``.  The link is the translation
    ``P(u) - e1 = (cn/sn)^2(u)`` together with the original identity read a
    quarter period off the real axis.
    """

    spec: IdentitySpec
    _quad_cache: dict = field(default_factory=dict, repr=False)

    kind: str = "weierstrass_form"

    def constants(self, params: Mapping[str, int],
                  ctx: ModulusContext) -> tuple[float, float]:
        """``(A, B)``: the cyclic coefficient and the constant line value."""
        params = dict(params)
        T = self.spec.period_in_K() * ctx.K
        lam = eval_coefficient(self.spec.lhs[0][0], params, ctx, T)
        cache_key = (ctx.m, tuple(sorted(params.items())))

        def int_value() -> float:
            if cache_key not in self._quad_cache:
                self._quad_cache[cache_key] = quadrature_token_value(
                    self.spec.lhs, params, ctx, T)
            return self._quad_cache[cache_key]

        A = eval_coefficient(self.spec.rhs[0][0], params, ctx, T)
        B = eval_coefficient(self.spec.rhs[1][0], params, ctx, T,
                             int_value=int_value)
        return float(A / lam), float(B / lam)

    def sides(self, u, params: Mapping[str, int],
              ctx: ModulusContext) -> tuple[complex, complex]:
        p = int(params["p"])
        r = int(params.get("r", 1))
        A, B = self.constants(params, ctx)
        e1, _e2, _e3 = weierstrass_invariants(ctx)
        uj = [np.asarray(u, dtype=complex) + 2.0 * j * ctx.K / p
              for j in range(p)]
        P = [np.asarray(weierstrass_P(t, ctx), dtype=complex) for t in uj]
        lhs = sum(P[j] * P[(j + r) % p] for j in range(p))
        rhs = (B + p * A * e1 - p * e1 ** 2) - (A - 2.0 * e1) * sum(P)
        if np.ndim(u) == 0:
            return complex(np.asarray(lhs).ravel()[0]), \
                complex(np.asarray(rhs).ravel()[0])
        return lhs, rhs

    def residual(self, u, params: Mapping[str, int],
                 ctx: ModulusContext) -> float:
        lhs, rhs = self.sides(u, params, ctx)
        lhs = np.asarray(lhs)
        rhs = np.asarray(rhs)
        scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
        return float(np.max(np.abs(lhs - rhs) / scale))


def weierstrass_form(spec: IdentitySpec) -> WeierstrassForm:
    """Restate the squared-function pair identity for the Weierstrass P.

    ``spec`` must have the shape ``sum_j dn^2(x_j) dn^2(x_{j+r}) ==
    A sum_j dn^2(x_j) + B``; anything else is rejected.
    """
    ok, why = _is_squared_pair_entry(spec)
    if not ok:
        raise ConstraintError(f"{spec.id}: weierstrass_form does not "
                              f"apply: {why}")
    return WeierstrassForm(spec=spec)


# -- theta form --------------------------------------------------------------

_THETA_SINGULAR_EPS = 1e-12


@dataclass
class ThetaForm:
    """Product-versus-sum relation for ``theta_3/theta_4`` ratios.

    For odd ``p`` and ``z_j = z + j pi / p``::

        prod_j t(z_j) == C * sum_j t(z_j),    t = theta_3/theta_4,
        C = prod_{n=1}^{(p-1)/2} (theta_2(n pi/p) / theta_1(n pi/p))^2

    This is the plain-product identity read through ``dn(u) =
    (1-m)^{1/4} theta_3(z)/theta_4(z)`` at ``z = u pi / (2K)``; the
    fourth-root prefactors cancel between the constant and the two sides.
    """

    spec: IdentitySpec

    kind: str = "theta_form"

    @staticmethod
    def z_of_u(u, ctx: ModulusContext):
        """Map a function argument to the theta argument."""
        return np.asarray(u, dtype=complex) * math.pi / (2.0 * ctx.K)

    @staticmethod
    def _require_odd(p: int) -> None:
        if p % 2 == 0:
            raise ConstraintError(f"theta form needs odd p, got {p}")

    def constant(self, params: Mapping[str, int],
                 ctx: ModulusContext) -> float:
        p = int(params["p"])
        self._require_odd(p)
        value = 1.0
        for n in range(1, (p - 1) // 2 + 1):
            z = n * math.pi / p
            t1 = complex(np.asarray(theta(1, z, ctx)).ravel()[0])
            t2 = complex(np.asarray(theta(2, z, ctx)).ravel()[0])
            value *= (t2 / t1).real ** 2
        return value

    def cyclic_coefficient(self, params: Mapping[str, int],
                           ctx: ModulusContext) -> float:
        """The source identity's cyclic coefficient, for cross-checking.

        Equals ``(1 - m)^{(p-1)/4}`` times :meth:`constant`.
        """
        params = dict(params)
        T = self.spec.period_in_K() * ctx.K
        return float(eval_coefficient(self.spec.rhs[0][0], params, ctx, T))

    def ratios(self, z, params: Mapping[str, int],
               ctx: ModulusContext) -> list[np.ndarray]:
        p = int(params["p"])
        self._require_odd(p)
        out = []
        for j in range(p):
            zj = np.asarray(z, dtype=complex) + j * math.pi / p
            t3 = np.asarray(theta(3, zj, ctx), dtype=complex)
            t4 = np.asarray(theta(4, zj, ctx), dtype=complex)
            bad = np.abs(t4) < _THETA_SINGULAR_EPS
            if np.any(bad):
                value = complex(np.atleast_1d(t4)[np.argmax(np.atleast_1d(bad))])
                raise DenominatorZeroError("theta3/theta4", "theta4", value)
            out.append(t3 / t4)
        return out

    def sides(self, z, params: Mapping[str, int],
              ctx: ModulusContext) -> tuple[complex, complex]:
        ratios = self.ratios(z, params, ctx)
        C = self.constant(params, ctx)
        lhs = ratios[0].copy()
        total = ratios[0].copy()
        for rj in ratios[1:]:
            lhs = lhs * rj
            total = total + rj
        rhs = C * total
        if np.ndim(z) == 0:
            return complex(np.asarray(lhs).ravel()[0]), \
                complex(np.asarray(rhs).ravel()[0])
        return lhs, rhs

    def residual(self, z, params: Mapping[str, int],
                 ctx: ModulusContext) -> float:
        lhs, rhs = self.sides(z, params, ctx)
        lhs = np.asarray(lhs)
        rhs = np.asarray(rhs)
        scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
        return float(np.max(np.abs(lhs - rhs) / scale))

    def dn_ratio_residual(self, u, ctx: ModulusContext) -> float:
        """Defect of ``dn(u) == (1-m)^{1/4} theta_3(z)/theta_4(z)``."""
        z = self.z_of_u(u, ctx)
        t3 = np.asarray(theta(3, z, ctx), dtype=complex)
        t4 = np.asarray(theta(4, z, ctx), dtype=complex)
        via_theta = (1.0 - ctx.m) ** 0.25 * t3 / t4
        direct = np.asarray(eval_fn("dn", np.asarray(u, dtype=complex), ctx),
                            dtype=complex)
        return float(np.max(np.abs(via_theta - direct)))


def theta_form(spec: IdentitySpec) -> ThetaForm:
    """Restate the odd-``p`` plain-product identity through theta ratios.

    ``spec`` must be the plain product of ``dn`` over the ``p`` points
    equated to a constant times the cyclic sum; anything else is rejected.
    """
    ok, why = _is_product_entry(spec)
    if not ok:
        raise ConstraintError(f"{spec.id}: theta_form does not apply: {why}")
    return ThetaForm(spec=spec)


# -- quarter-period product facts --------------------------------------------

def half_period_products(x, ctx: ModulusContext) -> dict[str, tuple[complex, complex]]:
    """Products ``f(x) f(x + K)`` that collapse to modulus constants.

    Returns ``{label: (product value, expected constant)}`` for the four
    function codes whose quarter-period translate is proportional to their
    own reciprocal: ``dn``, ``nd``, ``cs``, ``sc``.
    """
    rc = math.sqrt(1.0 - ctx.m)
    out: dict[str, tuple[complex, complex]] = {}
    for code, expected in (("dn", rc), ("nd", 1.0 / rc),
                           ("cs", -rc), ("sc", -1.0 / rc)):
        value = _point(code, x, ctx) * _point(code,
                                              np.asarray(x) + ctx.K, ctx)
        out[f"{code}*{code}(+K)"] = (value, complex(expected))
    return out
