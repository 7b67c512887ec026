"""Reconstruction engine for lattice-pole cyclic sums.

This module turns the residue calculus behind the catalog's six identity
families into an executable predictor.  Given a summand ``f`` built from the
basic elliptic functions — doubly (anti-)periodic with all poles on the
horizontal line ``Im z = K'`` at spacing ``T/p`` — the engine

1. extracts the principal-part coefficients ``alpha_l`` of ``f`` at each
   lattice pole by contour integration (:func:`extract_alphas`),
2. combines them into the family weights ``gamma_l`` — plain sums across the
   pole set, or ``(-1)**w``-weighted sums for the alternating families
   (:func:`gamma_set`),
3. evaluates the archetypal lattice sums and their analytic derivatives,
   either as truncated nome series (:func:`archetypal`) or as direct p-term
   sums (:func:`archetypal_direct`), and
4. assembles the predicted value of the cyclic sum from those pieces alone
   (:func:`predict`, :func:`predict_entry`) — no identity-specific closed
   form enters; agreement with direct summation is a theorem-level check.

:func:`poisson_check` cross-validates the underlying mode-selection argument:
a cyclic sum keeps only the Fourier modes of ``f`` whose index is divisible
by ``p`` (congruent to ``p/2`` for alternating sums).

Contour samples inside one extraction are evaluated as a single vectorized
batch and reduced in fixed index order, so results are deterministic.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import quad

from .catalog.model import (ALTERNATING_FAMILIES, FAMILY_PARITY,
                            FAMILY_PERIOD, CyclicTerm, Expr, IdentitySpec)
from .cyclic_engine import (_expanded_factors, eval_coefficient,
                            eval_cyclic_sum, summand_function)
from .elliptic_core import ModulusContext
from .errors import (ConstraintError, ContourRadiusError, DomainError,
                     FamilyMismatchError, NonConvergenceError)
from .jacobi_fn import eval_fn, jacobi_zeta

__all__ = [
    "PoleData", "GammaSet", "ARCHETYPAL_KINDS",
    "extract_alphas", "gamma_set", "pole_sites",
    "archetypal", "archetypal_direct", "default_k_max",
    "predict", "predict_entry", "poisson_check",
]

logger = logging.getLogger(__name__)

#: Absolute threshold below which a trailing Laurent/gamma coefficient is
#: treated as zero and trimmed from the declared order.
COEFF_TRIM_TOL = 1e-8

#: Relative agreement required between successive contour refinements.
CONTOUR_RTOL = 1e-9

#: Contour point counts: start here, double until stable, fail beyond max.
CONTOUR_N_START = 256
CONTOUR_N_MAX = 4096

ARCHETYPAL_KINDS = ("sigma1", "sigma2", "sigma3", "sigma4",
                    "sigma1A", "sigma2A")

_VALID_FAMILIES = tuple(FAMILY_PERIOD)


# --------------------------------------------------------------------------
# Pole data containers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PoleData:
    """Principal part of a function about one pole.

    ``alphas[l-1]`` is the coefficient of ``(z - center)**(-l)``; ``order``
    equals ``len(alphas)`` and is trimmed so that ``abs(alphas[-1])`` exceeds
    :data:`COEFF_TRIM_TOL` (an order-0 result means the function is regular
    there to working precision).  ``radius`` and ``n_points`` record the
    contour actually used.
    """

    center: complex
    order: int
    alphas: tuple[complex, ...]
    radius: float
    n_points: int

    def __post_init__(self) -> None:
        if self.order != len(self.alphas):
            raise ValueError("order must equal len(alphas)")


@dataclass(frozen=True)
class GammaSet:
    """Weighted pole-coefficient sums across one fundamental strip.

    ``gammas[l-1]`` is ``sum_w weight(w) * alpha_l^{(w)}`` over the pole set
    ``center_w = i K' + w T/p``, ``w = 0..p-1``, with ``weight = 1`` for the
    ``"ordinary"`` variant and ``weight = (-1)**w`` for ``"alternating"``.
    The list is trimmed so the last entry exceeds :data:`COEFF_TRIM_TOL` in
    magnitude.  ``poles`` retains the per-pole data for inspection.
    """

    gammas: tuple[complex, ...]
    variant: str
    p: int
    period_kind: str
    poles: tuple[PoleData, ...] = ()

    @property
    def order(self) -> int:
        return len(self.gammas)


def pole_sites(p: int, ctx: ModulusContext, period_kind: str = "2K"
               ) -> list[complex]:
    """Centres ``i K' + w T/p`` (w = 0..p-1) of the standard pole lattice."""
    T = _period_length(period_kind, ctx)
    return [1j * ctx.Kprime + w * T / p for w in range(p)]


def _period_length(period_kind: str, ctx: ModulusContext) -> float:
    if period_kind == "2K":
        return 2.0 * ctx.K
    if period_kind == "4K":
        return 4.0 * ctx.K
    raise DomainError(f"period_kind must be '2K' or '4K', got {period_kind!r}")


# --------------------------------------------------------------------------
# Laurent-coefficient extraction
# --------------------------------------------------------------------------

def _contour_alphas(f: Callable, center: complex, radius: float,
                    max_order: int, n: int) -> np.ndarray:
    """Trapezoid evaluation of ``alpha_l`` (l = 1..max_order) on n points."""
    theta = 2.0 * np.pi * np.arange(n) / n
    ring = np.exp(1j * theta)
    values = np.asarray(f(center + radius * ring), dtype=complex)
    if values.shape != theta.shape:
        raise DomainError("f must evaluate elementwise on complex arrays")
    out = np.empty(max_order, dtype=complex)
    for l in range(1, max_order + 1):
        # alpha_l = (1/2 pi i) \oint f(z) (z - center)^(l-1) dz, evaluated on
        # the circle as radius^l * mean(f * e^{i l theta}).
        out[l - 1] = (radius ** l) * np.mean(values * np.exp(1j * l * theta))
    return out


def _alphas_close(a: np.ndarray, b: np.ndarray, rtol: float) -> bool:
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return bool(np.all(np.abs(a - b) <= rtol * scale))


def extract_alphas(f: Callable, pole_center: complex, max_order: int,
                   radius: float, *, check_radius: bool = True) -> PoleData:
    """Extract the principal part of ``f`` about ``pole_center``.

    ``f`` must accept complex ndarray arguments and be meromorphic on the
    closed disc of the given ``radius`` about ``pole_center`` with no
    singularity other than (possibly) the centre; ``radius`` should stay
    below a third of the distance to the nearest other pole.  ``max_order``
    must be at least the true pole order; surplus orders are trimmed.

    The contour integrals use the trapezoid rule, which is spectrally
    accurate on circles.  The point count starts at
    :data:`CONTOUR_N_START` and doubles until every coefficient is stable to
    :data:`CONTOUR_RTOL`; failure to stabilise by :data:`CONTOUR_N_MAX`
    raises :class:`NonConvergenceError`.  With ``check_radius`` the result
    is re-extracted on the half-radius contour and compared, which detects a
    second pole hiding inside the contour (:class:`ContourRadiusError`).
    """
    if max_order < 1:
        raise DomainError(f"max_order must be >= 1, got {max_order}")
    if not (radius > 0.0):
        raise DomainError(f"radius must be positive, got {radius}")

    n = CONTOUR_N_START
    alphas = _contour_alphas(f, pole_center, radius, max_order, n)
    converged = False
    while not converged and 2 * n <= CONTOUR_N_MAX:
        finer = _contour_alphas(f, pole_center, radius, max_order, 2 * n)
        converged = _alphas_close(alphas, finer, CONTOUR_RTOL)
        alphas, n = finer, 2 * n
    if not converged:
        raise NonConvergenceError(
            f"contour extraction at {pole_center} did not stabilise "
            f"with up to {CONTOUR_N_MAX} points")

    if check_radius:
        inner = _contour_alphas(f, pole_center, radius / 2.0, max_order, n)
        # A pole strictly inside the annulus r/2..r corrupts the outer
        # extraction by O(1); compare loosely enough to ignore roundoff.
        if not _alphas_close(alphas, inner, 1e-6):
            raise ContourRadiusError(
                pole_center, radius,
                "half-radius re-extraction disagrees; shrink the contour")

    order = max_order
    while order > 0 and abs(alphas[order - 1]) <= COEFF_TRIM_TOL:
        order -= 1
    return PoleData(center=complex(pole_center), order=order,
                    alphas=tuple(complex(a) for a in alphas[:order]),
                    radius=float(radius), n_points=n)


def default_contour_radius(p: int, ctx: ModulusContext) -> float:
    """A safe extraction radius for the standard lattice.

    Neighbouring poles sit ``2K/p`` apart horizontally (for the ``4K``
    period the mirrored half-set interleaves at that same spacing) and
    ``2K'`` apart vertically; a third of the smaller gap keeps every other
    pole well outside the contour.
    """
    return min(2.0 * ctx.K / p, 2.0 * ctx.Kprime) / 3.0


def gamma_set(f: Callable, p: int, ctx: ModulusContext,
              period_kind: str = "2K", variant: str = "ordinary", *,
              orders: Mapping[int, int] | int | None = None,
              max_order: int = 8, radius: float | None = None,
              check_radius: bool = True,
              verify_mirror: bool = False) -> GammaSet:
    """Collect the weighted Laurent data of ``f`` across the pole lattice.

    The pole set is ``i K' + w T/p`` for ``w = 0..p-1`` — one fundamental
    strip.  For the ``4K`` period the mirrored poles at ``i K' + 2K + w T/p``
    carry the negated coefficients (the half-period parity of the family);
    they are accounted for analytically in :func:`predict` rather than
    extracted, unless ``verify_mirror`` asks for an explicit spot check.

    ``orders`` bounds the per-site extraction order: a mapping ``w -> order``
    (sites mapped to 0 are skipped), a single integer for every site, or
    ``None`` to probe every site at ``max_order``.  ``variant`` selects the
    weights: ``"ordinary"`` sums the per-pole coefficients, ``"alternating"``
    applies ``(-1)**w`` (p must then be even for the weights to be
    well-defined on the cycle).
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if variant not in ("ordinary", "alternating"):
        raise DomainError(f"unknown variant {variant!r}")
    if variant == "alternating" and p % 2 != 0:
        raise ConstraintError(
            "alternating weights need even p; "
            f"got p={p}")
    T = _period_length(period_kind, ctx)
    if radius is None:
        radius = default_contour_radius(p, ctx)

    if orders is None:
        site_orders = {w: max_order for w in range(p)}
    elif isinstance(orders, int):
        site_orders = {w: orders for w in range(p)}
    else:
        site_orders = {w: orders.get(w, 0) for w in range(p)}

    poles: list[PoleData] = []
    length = max((o for o in site_orders.values()), default=0)
    gammas = np.zeros(max(length, 1), dtype=complex)
    for w in range(p):
        order_w = site_orders[w]
        if order_w <= 0:
            continue
        center = 1j * ctx.Kprime + w * T / p
        data = extract_alphas(f, center, order_w, radius,
                              check_radius=check_radius)
        poles.append(data)
        weight = (-1.0) ** w if variant == "alternating" else 1.0
        for l, alpha in enumerate(data.alphas, start=1):
            gammas[l - 1] += weight * alpha

    if verify_mirror and period_kind == "4K":
        probe = next((d for d in poles if d.order > 0), None)
        if probe is not None:
            mirror = extract_alphas(
                f, probe.center + 2.0 * ctx.K, max(probe.order, 1), radius,
                check_radius=check_radius)
            expect = tuple(-a for a in probe.alphas)
            got = mirror.alphas + (0.0,) * (len(expect) - len(mirror.alphas))
            scale = max(1.0, max(abs(a) for a in expect))
            if any(abs(g - e) > 1e-6 * scale for g, e in zip(got, expect)):
                raise FamilyMismatchError(
                    "mirrored pole set does not carry negated coefficients")

    order = len(gammas)
    while order > 0 and abs(gammas[order - 1]) <= COEFF_TRIM_TOL:
        order -= 1
    return GammaSet(gammas=tuple(complex(g) for g in gammas[:order]),
                    variant=variant, p=p, period_kind=period_kind,
                    poles=tuple(poles))


# --------------------------------------------------------------------------
# Monomial calculus in (sn, cn, dn)
# --------------------------------------------------------------------------

def _poly_derivative(poly: dict[tuple[int, int, int], float],
                     m: float) -> dict[tuple[int, int, int], float]:
    """One analytic derivative of ``sum c * sn^a cn^b dn^g``.

    Uses sn' = cn dn, cn' = -sn dn, dn' = -m sn cn.
    """
    out: dict[tuple[int, int, int], float] = {}

    def add(key: tuple[int, int, int], val: float) -> None:
        out[key] = out.get(key, 0.0) + val

    for (a, b, g), c in poly.items():
        if a:
            add((a - 1, b + 1, g + 1), c * a)
        if b:
            add((a + 1, b - 1, g + 1), -c * b)
        if g:
            add((a + 1, b + 1, g - 1), -c * g * m)
    return {k: v for k, v in out.items() if v != 0.0}


def _poly_eval(poly: dict[tuple[int, int, int], float], s, c, d):
    total = None
    for (a, b, g), coeff in poly.items():
        term = coeff * (s ** a) * (c ** b) * (d ** g)
        total = term if total is None else total + term
    if total is None:
        return np.zeros(np.shape(s))
    return total


_BASE_POLY = {
    "dn": {(0, 0, 1): 1.0},
    "dn2": {(0, 0, 2): 1.0},
    "sn": {(1, 0, 0): 1.0},
    "cn": {(0, 1, 0): 1.0},
}


def _derived_poly(base: str, n: int, m: float) -> dict:
    poly = _BASE_POLY[base]
    for _ in range(n):
        poly = _poly_derivative(poly, m)
    return poly


def _lattice_sum(base: str, deriv: int, x0, ctx: ModulusContext, p: int,
                 T: float, alternating: bool):
    """``sum_j w_j D^deriv[base](x0 + j T/p)`` with ``w_j = (+/-1)^j``."""
    poly = _derived_poly(base, deriv, ctx.m)
    total = None
    for j in range(p):
        u = np.asarray(x0) + j * T / p
        s = eval_fn("sn", u, ctx)
        c = eval_fn("cn", u, ctx)
        d = eval_fn("dn", u, ctx)
        value = _poly_eval(poly, s, c, d)
        if alternating and j % 2 == 1:
            value = -value
        total = value if total is None else total + value
    return total


def _zeta_lattice_sum(x0, ctx: ModulusContext, p: int, T: float,
                      alternating: bool):
    total = None
    for j in range(p):
        value = jacobi_zeta(np.asarray(x0) + j * T / p, ctx)
        if alternating and j % 2 == 1:
            value = -value
        total = value if total is None else total + value
    return total


# --------------------------------------------------------------------------
# Archetypal sums: nome series and direct lattice sums
# --------------------------------------------------------------------------

def default_k_max(ctx: ModulusContext, deriv: int = 0, *,
                  decay: float = 1.0) -> int:
    """Smallest truncation index with a geometric tail below 1e-16.

    Chooses the least ``k`` with
    ``(1+k)**deriv * q**(decay*k) < 1e-16 * (1 - q)``.  The polynomial
    factor covers termwise differentiation; ``decay`` is the exponent rate
    of the series at hand (the 4K-period kinds carry ``q**(k/2)`` terms, so
    they pass ``decay=0.5``).
    """
    q = ctx.q
    if not (0.0 <= q < 1.0):
        raise DomainError(f"nome must lie in [0, 1), got {q}")
    if not (0.0 < decay <= 1.0):
        raise DomainError(f"decay must lie in (0, 1], got {decay}")
    if q == 0.0:
        return 1
    bound = 1e-16 * (1.0 - q)
    k = max(1, int(math.ceil(math.log(bound) / (decay * math.log(q)))))
    while (1.0 + k) ** deriv * q ** (decay * k) >= bound:
        k += 1
        if k > 1_000_000:
            raise DomainError(
                "series tail bound unreachable: the nome is too close to 1; "
                "reduce m away from 1")
    return k


#: kind -> (period_kind, frequency lattice, trig, parity requirement)
_KIND_TABLE = {
    "sigma1": ("2K", "multiple", "cos", None),
    "sigma2": ("2K", "multiple", "cos", None),
    "sigma3": ("4K", "odd-multiple", "sin", "odd"),
    "sigma4": ("4K", "odd-multiple", "cos", "odd"),
    "sigma1A": ("2K", "half-odd", "cos", "even"),
    "sigma2A": ("2K", "half-odd", "sin", "even"),
}


def _kind_frequencies(kind: str, p: int, k_max: int) -> np.ndarray:
    lattice = _KIND_TABLE[kind][1]
    if lattice == "multiple":
        ks = np.arange(p, k_max + 1, p)
    elif lattice == "odd-multiple":
        ks = np.arange(p, k_max + 1, 2 * p)
    else:  # half-odd: odd multiples of p/2
        ks = np.arange(p // 2, k_max + 1, p)
    return ks.astype(float)


def archetypal(kind: str, x0, ctx: ModulusContext, p: int,
               k_max: int | None = None, *, deriv: int = 0):
    """Nome-series value of an archetypal lattice sum (or a derivative).

    The six kinds are the cyclic sums, over ``x_j = x0 + j T/p``, of:
    ``sigma1``: dn, ``sigma2``: dn**2, ``sigma3``: sn, ``sigma4``: cn
    (both with T = 4K and odd p; for even p these sums vanish identically
    and 0.0 is returned), ``sigma1A``: (-1)**j dn, and ``sigma2A``:
    (-1)**j Z — the alternating kinds require even p.  ``deriv`` applies
    termwise differentiation in ``x0``.  Truncation is at ``k_max`` (default
    :func:`default_k_max`), beyond which the geometric tail is below 1e-16.
    """
    if kind not in ARCHETYPAL_KINDS:
        raise DomainError(f"unknown archetypal kind {kind!r}")
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if deriv < 0:
        raise DomainError(f"deriv must be >= 0, got {deriv}")
    _period, _lattice, trig, parity = _KIND_TABLE[kind]
    if parity == "even" and p % 2 != 0:
        raise ConstraintError(f"{kind} requires even p, got p={p}")
    if parity == "odd" and p % 2 == 0:
        # The sn/cn lattice sums cancel pairwise for even p: x_{j+p/2}
        # differs by a half period 2K, which flips both functions' signs.
        return np.zeros(np.shape(x0)) if np.ndim(x0) else 0.0

    K, q, m = ctx.K, ctx.q, ctx.m
    if k_max is None:
        decay = 0.5 if kind in ("sigma3", "sigma4") else 1.0
        k_max = default_k_max(ctx, deriv=deriv, decay=decay)
    ks = _kind_frequencies(kind, p, k_max)

    if kind == "sigma1":
        coeffs = (2.0 * np.pi * p / K) * q ** ks / (1.0 + q ** (2 * ks))
        omega = np.pi * ks / K
    elif kind == "sigma2":
        coeffs = (2.0 * np.pi ** 2 * p / K ** 2) * ks * q ** ks \
            / (1.0 - q ** (2 * ks))
        omega = np.pi * ks / K
    elif kind == "sigma3":
        coeffs = (2.0 * np.pi * p / (K * math.sqrt(m))) \
            * q ** (ks / 2.0) / (1.0 - q ** ks)
        omega = np.pi * ks / (2.0 * K)
    elif kind == "sigma4":
        coeffs = (2.0 * np.pi * p / (K * math.sqrt(m))) \
            * q ** (ks / 2.0) / (1.0 + q ** ks)
        omega = np.pi * ks / (2.0 * K)
    elif kind == "sigma1A":
        coeffs = (2.0 * np.pi * p / K) * q ** ks / (1.0 + q ** (2 * ks))
        omega = np.pi * ks / K
    else:  # sigma2A
        coeffs = (2.0 * np.pi * p / K) * q ** ks / (1.0 - q ** (2 * ks))
        omega = np.pi * ks / K

    x = np.asarray(x0, dtype=float) if not np.iscomplexobj(x0) \
        else np.asarray(x0)
    phase = np.multiply.outer(x, omega) + deriv * np.pi / 2.0
    wave = np.cos(phase) if trig == "cos" else np.sin(phase)
    value = wave @ (coeffs * omega ** deriv)

    if deriv == 0:
        if kind == "sigma1":
            value = value + p * np.pi / (2.0 * K)
        elif kind == "sigma2":
            value = value + p * ctx.E / K
    if np.ndim(x0):
        return value
    return complex(value) if np.iscomplexobj(x0) else float(value)


def archetypal_direct(kind: str, x0, ctx: ModulusContext, p: int, *,
                      deriv: int = 0):
    """Direct p-term value of an archetypal sum, derivatives analytic.

    Same kinds and conventions as :func:`archetypal`; derivatives are taken
    through the closed differential system of (sn, cn, dn) — for
    ``sigma2A`` via Z' = dn**2 - E/K, whose constant cancels in the
    alternating sum — never by finite differences.
    """
    if kind not in ARCHETYPAL_KINDS:
        raise DomainError(f"unknown archetypal kind {kind!r}")
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if deriv < 0:
        raise DomainError(f"deriv must be >= 0, got {deriv}")
    period_kind, _lattice, _trig, parity = _KIND_TABLE[kind]
    if parity == "even" and p % 2 != 0:
        raise ConstraintError(f"{kind} requires even p, got p={p}")
    T = _period_length(period_kind, ctx)

    if kind == "sigma1":
        return _lattice_sum("dn", deriv, x0, ctx, p, T, alternating=False)
    if kind == "sigma2":
        return _lattice_sum("dn2", deriv, x0, ctx, p, T, alternating=False)
    if kind == "sigma3":
        return _lattice_sum("sn", deriv, x0, ctx, p, T, alternating=False)
    if kind == "sigma4":
        return _lattice_sum("cn", deriv, x0, ctx, p, T, alternating=False)
    if kind == "sigma1A":
        return _lattice_sum("dn", deriv, x0, ctx, p, T, alternating=True)
    # sigma2A
    if deriv == 0:
        return _zeta_lattice_sum(x0, ctx, p, T, alternating=True)
    return _lattice_sum("dn2", deriv - 1, x0, ctx, p, T, alternating=True)


# --------------------------------------------------------------------------
# Parity classification
# --------------------------------------------------------------------------

_PARITY_PROBES = (0.3719 + 0.2931j, 1.2193 - 0.4127j)
_PARITY_TOL = 1e-6


def _check_parity(f: Callable, family: str, ctx: ModulusContext) -> None:
    """Verify f's half-period signs match the declared family."""
    P, Q = FAMILY_PARITY[family]
    eps_p = (-1.0) ** P
    eps_q = (-1.0) ** Q
    for probe in _PARITY_PROBES:
        z = probe.real * ctx.K + 1j * probe.imag * ctx.Kprime
        base = complex(np.asarray(f(np.asarray([z])))[0])
        up = complex(np.asarray(f(np.asarray([z + 2j * ctx.Kprime])))[0])
        across = complex(np.asarray(f(np.asarray([z + 2.0 * ctx.K])))[0])
        scale = max(1.0, abs(base), abs(up), abs(across))
        if abs(up - eps_p * base) > _PARITY_TOL * scale:
            raise FamilyMismatchError(
                f"f(z + 2iK') != {eps_p:+.0f} f(z) at z={z:.4g}: "
                f"sign signature does not match family {family}")
        if abs(across - eps_q * base) > _PARITY_TOL * scale:
            raise FamilyMismatchError(
                f"f(z + 2K) != {eps_q:+.0f} f(z) at z={z:.4g}: "
                f"sign signature does not match family {family}")


# --------------------------------------------------------------------------
# The predictor
# --------------------------------------------------------------------------

def _integrate_period(f: Callable, T: float) -> float:
    """Adaptive quadrature of the (real-restriction of) f over [0, T]."""
    def real_part(x: float) -> float:
        return float(np.real(np.asarray(f(np.asarray([x])))[0]))
    value, _err = quad(real_part, 0.0, T, limit=300,
                       epsabs=1e-12, epsrel=1e-12)
    return value


def _factorials(n: int) -> list[float]:
    out = [1.0]
    for k in range(1, n + 1):
        out.append(out[-1] * k)
    return out


def predict(f: Callable, family: str, x0, ctx: ModulusContext, p: int, *,
            gammas: GammaSet | None = None,
            orders: Mapping[int, int] | int | None = None,
            max_order: int = 8, whole: bool = False,
            check_parity: bool = True, check_radius: bool = True,
            diagnostics: dict | None = None):
    """Reconstruct the cyclic sum of ``f`` from its pole data alone.

    ``f`` is the summand (vectorized over complex ndarrays); the value
    reconstructed is ``S(x0) = sum_j f(x0 + j T/p)`` for the ordinary
    families and ``sum_j (-1)**j f(...)`` for the alternating ones, with
    ``T`` fixed by the family.  With ``whole=True``, ``f`` is instead the
    finished lattice function itself (e.g. a product over the cycle) and
    ``S(x0) = f(x0)``; the same reconstruction applies with the pole sums
    and the period integral normalised by ``p``.

    The assembled value is the family's expansion over analytic derivatives
    of the archetypal lattice sums:

    * MI-I:    ``(p/2K) a0 + sum_l i (-1)**(l-1) gamma_l/(l-1)! * B_l`` with
      ``B_1`` the dn lattice sum minus its mean ``p pi/2K`` and ``B_l`` its
      (l-1)-th derivative; ``a0`` is the period integral of ``f``, verified
      against the residue relation ``a0 = i pi gamma_1``.
    * MI-II:   ``(p/2K) a0 + sum_{l>=2} (-1)**(l-1) gamma_l/(l-1)! * C_l``
      with ``C_2`` the dn**2 lattice sum minus ``p E/K`` and higher ``C_l``
      its derivatives; ``gamma_1 = 0`` here (total-residue theorem) and is
      checked.
    * MI-III:  ``sqrt(m) * sum_l (-1)**(l-1) gamma_l/(l-1)!`` times the
      (l-1)-th derivative of the sn lattice sum (period 4K).
    * MI-IV:   the same with ``i sqrt(m)`` and the cn lattice sum.
    * MI-I-alt / MI-II-alt: the alternating dn / Z lattice sums with the
      ``(-1)**w``-weighted gammas (derivatives of the alternating Z sum are
      alternating dn**2 sums).

    Returns a real float for real scalar ``x0`` (imaginary residue is
    checked and logged), an ndarray for array input, complex for complex
    input.  ``diagnostics``, if given a dict, receives the gamma set, pole
    data, ``a0`` and the consistency checks.
    """
    if family not in _VALID_FAMILIES:
        raise FamilyMismatchError(
            f"family {family!r} has no reconstruction; "
            f"expected one of {_VALID_FAMILIES}")
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    alternating = family in ALTERNATING_FAMILIES
    if alternating and p % 2 != 0:
        raise ConstraintError(
            f"family {family} needs even p, got p={p}")
    period_kind = "2K" if FAMILY_PERIOD[family] == 2 else "4K"
    T = _period_length(period_kind, ctx)
    m, K = ctx.m, ctx.K

    if check_parity:
        _check_parity(f, family, ctx)

    if gammas is None:
        gammas = gamma_set(f, p, ctx, period_kind,
                           "alternating" if alternating else "ordinary",
                           orders=orders, max_order=max_order,
                           check_radius=check_radius)
    scale = (1.0 / p) if whole else 1.0
    g = [scale * gamma for gamma in gammas.gammas]
    L = len(g)
    fact = _factorials(max(L, 2))

    if diagnostics is not None:
        diagnostics["gamma_set"] = gammas
        diagnostics["gammas_effective"] = tuple(g)
        diagnostics["whole"] = whole
        diagnostics["period_kind"] = period_kind

    value = None

    def accumulate(term):
        nonlocal value
        value = term if value is None else value + term

    if family == "MI-I":
        a0 = scale * _integrate_period(f, T)
        expected = 1j * np.pi * g[0] if L >= 1 else 0.0
        drift = abs(a0 - expected)
        if drift > 1e-7 * max(1.0, abs(a0)):
            logger.warning(
                "period integral %.6g differs from i*pi*gamma_1 %.6g "
                "by %.3e", a0, expected, drift)
        if diagnostics is not None:
            diagnostics["a0"] = a0
            diagnostics["a0_residue_form"] = expected
            diagnostics["a0_drift"] = drift
        accumulate((p / (2.0 * K)) * a0 + 0.0 * np.asarray(x0))
        for l in range(1, L + 1):
            base = _lattice_sum("dn", l - 1, x0, ctx, p, T, False)
            if l == 1:
                base = base - p * np.pi / (2.0 * K)
            accumulate(1j * (-1.0) ** (l - 1) * g[l - 1] / fact[l - 1] * base)
    elif family == "MI-II":
        a0 = scale * _integrate_period(f, T)
        gamma1 = abs(g[0]) if L >= 1 else 0.0
        gscale = max([1.0] + [abs(x) for x in g])
        if gamma1 > 1e-7 * gscale:
            logger.warning(
                "gamma_1 = %.3e is not negligible for an MI-II summand",
                gamma1)
        if diagnostics is not None:
            diagnostics["a0"] = a0
            diagnostics["gamma1_magnitude"] = gamma1
        accumulate((p / (2.0 * K)) * a0 + 0.0 * np.asarray(x0))
        for l in range(2, L + 1):
            base = _lattice_sum("dn2", l - 2, x0, ctx, p, T, False)
            if l == 2:
                base = base - p * ctx.E / K
            accumulate((-1.0) ** (l - 1) * g[l - 1] / fact[l - 1] * base)
    elif family == "MI-III":
        accumulate(0.0 * np.asarray(x0))
        for l in range(1, L + 1):
            base = _lattice_sum("sn", l - 1, x0, ctx, p, T, False)
            accumulate(math.sqrt(m) * (-1.0) ** (l - 1)
                       * g[l - 1] / fact[l - 1] * base)
    elif family == "MI-IV":
        accumulate(0.0 * np.asarray(x0))
        for l in range(1, L + 1):
            base = _lattice_sum("cn", l - 1, x0, ctx, p, T, False)
            accumulate(1j * math.sqrt(m) * (-1.0) ** (l - 1)
                       * g[l - 1] / fact[l - 1] * base)
    elif family == "MI-I-alt":
        accumulate(0.0 * np.asarray(x0))
        for l in range(1, L + 1):
            base = _lattice_sum("dn", l - 1, x0, ctx, p, T, True)
            accumulate(1j * (-1.0) ** (l - 1) * g[l - 1] / fact[l - 1] * base)
    else:  # MI-II-alt
        accumulate(0.0 * np.asarray(x0))
        if L >= 1:
            accumulate(g[0] * _zeta_lattice_sum(x0, ctx, p, T, True))
        for l in range(2, L + 1):
            base = _lattice_sum("dn2", l - 2, x0, ctx, p, T, True)
            accumulate((-1.0) ** (l - 1) * g[l - 1] / fact[l - 1] * base)

    value = np.asarray(value)
    if np.iscomplexobj(x0):
        result = value if np.ndim(x0) else complex(value)
        return result
    real = np.real(value)
    imag_max = float(np.max(np.abs(np.imag(value)))) if value.size else 0.0
    if imag_max > 1e-6 * max(1.0, float(np.max(np.abs(real)))):
        logger.warning(
            "reconstruction kept an imaginary residue of %.3e at real x0",
            imag_max)
    return real if np.ndim(x0) else float(real)


# --------------------------------------------------------------------------
# Catalog-entry front end
# --------------------------------------------------------------------------

def _site_orders_summand(lines: Sequence[tuple[Expr, CyclicTerm]],
                         params: Mapping[str, int], p: int) -> dict[int, int]:
    """Structural pole orders of the summand at each lattice site.

    A factor shifted by ``sigma`` puts its pole at the site ``-sigma mod p``;
    within one product line the orders add, across lines the maximum wins.
    """
    orders: dict[int, int] = {}
    for _coeff, term in lines:
        if term.kind == "const":
            continue
        line: dict[int, int] = {}
        for _fn, sigma, power in _expanded_factors(term, dict(params)):
            w = (-sigma) % p
            line[w] = line.get(w, 0) + power
        for w, o in line.items():
            orders[w] = max(orders.get(w, 0), o)
    return orders


def _site_orders_whole(lines: Sequence[tuple[Expr, CyclicTerm]],
                       params: Mapping[str, int], p: int) -> dict[int, int]:
    """Structural pole orders of the full lattice function at each site.

    A ``prod`` term sweeps every factor through every site, so each site
    carries the term's total degree; a ``cyc`` term places its per-line
    maximum at every site (each j-translate revisits the same profile).
    """
    degree = 0
    for _coeff, term in lines:
        if term.kind == "const":
            continue
        factors = _expanded_factors(term, dict(params))
        if term.kind == "prod":
            degree = max(degree, sum(power for _f, _s, power in factors))
        else:
            per_site: dict[int, int] = {}
            for _fn, sigma, power in _expanded_factors(term, dict(params)):
                w = sigma % p
                per_site[w] = per_site.get(w, 0) + power
            degree = max(degree, max(per_site.values(), default=0))
    return {w: degree for w in range(p)}


def _whole_lhs_function(spec: IdentitySpec, params: Mapping[str, int],
                        ctx: ModulusContext, T: float) -> Callable:
    """The full left-hand side as a vectorized function of the base point."""
    parts: list[tuple[complex, CyclicTerm]] = []
    for coeff, term in spec.lhs:
        cval = eval_coefficient(coeff, dict(params), ctx, T, int_value=None)
        parts.append((cval, term))

    def f(z):
        total = None
        for cval, term in parts:
            value = cval * np.asarray(
                eval_cyclic_sum(term, z, dict(params), ctx, T))
            total = value if total is None else total + value
        return total

    return f


def predict_entry(spec: IdentitySpec, x0, params: Mapping[str, int],
                  ctx: ModulusContext, *, check_parity: bool = True,
                  check_radius: bool = True,
                  diagnostics: dict | None = None):
    """Reconstruct a catalog entry's left-hand side from pole data alone.

    For ``cyc``-form entries the summand drives :func:`predict` directly;
    entries containing ``prod`` (or ``const``) terms are reconstructed in
    whole-function mode, where the complete left-hand side — itself a
    lattice-pole function of the base point — supplies the pole data.  The
    result approximates ``eval_identity``'s left-hand side at ``x0`` and
    agreement is a theorem-level consistency check, since no entry-specific
    closed form is consulted.
    """
    if spec.family not in _VALID_FAMILIES:
        raise FamilyMismatchError(
            f"entry {spec.id} has family {spec.family!r}, which has no "
            f"reconstruction")
    p = int(params["p"])
    T = spec.period_in_K() * ctx.K
    needs_whole = any(term.kind != "cyc" for _c, term in spec.lhs)
    if needs_whole:
        f = _whole_lhs_function(spec, params, ctx, T)
        orders = _site_orders_whole(spec.lhs, params, p)
        whole = True
    else:
        f = summand_function(list(spec.lhs), dict(params), ctx, T)
        orders = _site_orders_summand(spec.lhs, params, p)
        whole = False
    if diagnostics is not None:
        diagnostics["orders"] = dict(orders)
        diagnostics["mode"] = "whole" if whole else "summand"
    return predict(f, spec.family, x0, ctx, p, orders=orders, whole=whole,
                   check_parity=check_parity, check_radius=check_radius,
                   diagnostics=diagnostics)


# --------------------------------------------------------------------------
# Poisson-summation cross-check
# --------------------------------------------------------------------------

def poisson_check(f: Callable, x0: float, ctx: ModulusContext, p: int,
                  k_max: int | None = None, *, period_kind: str = "2K",
                  alternating: bool = False,
                  n_grid: int | None = None) -> float:
    """Residual between a direct cyclic sum and its Fourier-mode form.

    A cyclic sum over ``x_j = x0 + j T/p`` keeps exactly the Fourier modes
    of ``f`` (period ``T``) with index divisible by ``p``; the alternating
    sum keeps those congruent to ``p/2 mod p``.  This computes both sides at
    real ``x0`` — the mode coefficients by plain trapezoid quadrature over
    one period (no FFT), the direct side by p-term summation — and returns
    ``|direct - (p/T) sum_k a_k e^{2 pi i k x0 / T}|``.

    The residual is the result; nothing is raised on disagreement.
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if alternating and p % 2 != 0:
        raise ConstraintError(f"alternating sums need even p, got p={p}")
    T = _period_length(period_kind, ctx)
    if k_max is None:
        k_max = default_k_max(
            ctx, decay=0.5 if period_kind == "4K" else 1.0)
    if n_grid is None:
        n_grid = 1 << max(10, int(math.ceil(math.log2(4 * (k_max + 1)))))

    nodes = T * np.arange(n_grid) / n_grid
    samples = np.asarray(f(nodes), dtype=complex)

    if alternating:
        selected = np.arange(p // 2, k_max + 1, p)
        selected = np.concatenate([-selected[::-1], selected])
    else:
        positive = np.arange(p, k_max + 1, p)
        selected = np.concatenate([-positive[::-1], [0], positive])

    series = 0.0 + 0.0j
    index = np.arange(n_grid)
    for k in selected:
        ak = (T / n_grid) * np.sum(
            samples * np.exp(-2j * np.pi * k * index / n_grid))
        series += ak * np.exp(2j * np.pi * k * x0 / T)
    series *= p / T

    direct = 0.0 + 0.0j
    for j in range(p):
        term = complex(np.asarray(f(np.asarray([x0 + j * T / p])))[0])
        if alternating and j % 2 == 1:
            term = -term
        direct += term

    return float(abs(direct - series))
