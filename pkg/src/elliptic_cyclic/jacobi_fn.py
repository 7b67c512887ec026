"""Jacobi elliptic functions on real and complex arguments, and relatives.

Real arguments go through a descending arithmetic–geometric-mean ladder (the
amplitude is kept *continuous*, so all periodicity bookkeeping is exact).
Complex arguments are split as ``z = x + iy`` and reassembled from real
evaluations at parameter ``m`` (for ``x``) and ``1 - m`` (for ``y``) with the
classical addition-type decomposition; this keeps every evaluation anchored to
the well-conditioned real ladder.

The module also provides:

* the nine quotient functions (``ns``, ``nc``, ``nd``, ``sc``, ``cs``, ``sd``,
  ``ds``, ``cd``, ``dc``) with explicit near-zero-denominator guards,
* the four theta functions and their z-derivatives as truncated nome series
  with a documented truncation rule,
* the zeta function on complex arguments (log-derivative of ``theta_4``),
* the Weierstrass P function through its ``1/sn**2`` representation,
* pole-lattice geometry helpers used by the verification engines to mask
  samples that sit too close to a pole.

All evaluators are vectorized: scalars in, scalar out; ndarrays in,
ndarrays out.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .elliptic_core import ModulusContext, _agm_ladder, jacobi_zeta_u
from .errors import (
    DenominatorZeroError,
    DomainError,
    NonConvergenceError,
    PoleProximityError,
)

__all__ = [
    "JacobiTriple",
    "AUX_CODES",
    "BASIC_NAMES",
    "sncndn_real",
    "sncndn_complex",
    "aux_ratio",
    "eval_fn",
    "theta",
    "theta_dz",
    "jacobi_zeta",
    "weierstrass_invariants",
    "weierstrass_P",
    "weierstrass_P_prime",
    "pole_distance",
    "zero_lattice_distance",
    "DEFAULT_POLE_EPS",
]

DEFAULT_POLE_EPS = 1e-9

#: The three basic function names plus the zeta function.
BASIC_NAMES = ("sn", "cn", "dn", "Z")

#: All accepted point-evaluation codes: basic functions and the nine ratios.
AUX_CODES = ("sn", "cn", "dn", "ns", "nc", "nd", "sc", "cs", "sd", "ds",
             "cd", "dc")

_DENOM_EPS = 1e-14


class JacobiTriple(NamedTuple):
    """The values ``(sn, cn, dn)`` at a common argument and parameter.

    Satisfies ``sn**2 + cn**2 = 1`` and ``dn**2 + m*sn**2 = 1``.
    """

    sn: object
    cn: object
    dn: object


def _as_float_array(u):
    arr = np.asarray(u, dtype=float)
    return arr


def sncndn_real(u, m: float) -> JacobiTriple:
    """Evaluate ``(sn, cn, dn)`` for real ``u`` and parameter ``m in [0, 1]``.

    The endpoints degenerate smoothly: ``m = 0`` gives
    ``(sin u, cos u, 1)`` and ``m = 1`` gives ``(tanh u, sech u, sech u)``.
    There are no poles on the real axis, so no point is rejected.

    Parameters
    ----------
    u : float or ndarray
        Real argument(s).
    m : float
        Parameter in ``[0, 1]``.

    Returns
    -------
    JacobiTriple
        Componentwise arrays (or floats for scalar input).
    """
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"sncndn_real requires 0 <= m <= 1, got {m}")
    u = _as_float_array(u)
    scalar = u.ndim == 0
    if m == 0.0:
        sn, cn, dn = np.sin(u), np.cos(u), np.ones_like(u)
    elif m == 1.0:
        sn = np.tanh(u)
        cn = 1.0 / np.cosh(u)
        dn = cn
    else:
        a_seq, c_seq = _agm_ladder(m)
        n_levels = len(a_seq) - 1
        phi = (2.0 ** n_levels) * a_seq[-1] * u
        for n in range(n_levels, 0, -1):
            ratio = c_seq[n] / a_seq[n]
            phi = 0.5 * (phi + np.arcsin(np.clip(ratio * np.sin(phi),
                                                 -1.0, 1.0)))
        sn = np.sin(phi)
        cn = np.cos(phi)
        dn = np.sqrt(1.0 - m * sn * sn)
    if scalar:
        return JacobiTriple(float(sn), float(cn), float(dn))
    return JacobiTriple(sn, cn, dn)


def pole_distance(z, ctx: ModulusContext):
    """Distance from ``z`` to the common pole lattice of sn, cn, dn.

    The poles sit at ``2*a*K + (2*b + 1)*i*Kprime`` for integers a, b.

    Returns
    -------
    (distance, pole) : ndarray pair (or scalar pair)
        Euclidean distance and the nearest lattice pole for each point.
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    twoK = 2.0 * ctx.K
    twoKp = 2.0 * ctx.Kprime
    px = twoK * np.round(x / twoK)
    py = ctx.Kprime + twoKp * np.round((y - ctx.Kprime) / twoKp)
    dist = np.hypot(x - px, y - py)
    pole = px + 1j * py
    if z.ndim == 0:
        return float(dist), complex(pole)
    return dist, pole


def zero_lattice_distance(z, ctx: ModulusContext):
    """Distance from ``z`` to the lattice ``2*a*K + 2*b*i*Kprime``.

    These are the zeros of sn and the poles of the Weierstrass function.
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    twoK = 2.0 * ctx.K
    twoKp = 2.0 * ctx.Kprime
    px = twoK * np.round(x / twoK)
    py = twoKp * np.round(y / twoKp)
    dist = np.hypot(x - px, y - py)
    point = px + 1j * py
    if z.ndim == 0:
        return float(dist), complex(point)
    return dist, point


def _raise_if_near_pole(z, ctx: ModulusContext, pole_eps: float,
                        what: str) -> None:
    dist, pole = pole_distance(z, ctx)
    dist = np.atleast_1d(dist)
    if np.any(dist < pole_eps):
        idx = int(np.argmin(dist))
        zflat = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        pflat = np.atleast_1d(np.asarray(pole, dtype=complex)).ravel()
        raise PoleProximityError(complex(zflat[idx]), complex(pflat[idx]),
                                 float(dist.ravel()[idx]), what=what)


def sncndn_complex(z, ctx: ModulusContext,
                   pole_eps: float = DEFAULT_POLE_EPS) -> JacobiTriple:
    """Evaluate ``(sn, cn, dn)`` at complex argument(s).

    Splits ``z = x + i*y`` and combines real evaluations at parameters ``m``
    and ``1 - m``:

    with ``(s, c, d)`` at ``(x, m)`` and ``(s1, c1, d1)`` at ``(y, 1-m)`` and
    ``D = c1**2 + m * s**2 * s1**2``::

        sn = (s*d1 + i*c*d*s1*c1) / D
        cn = (c*c1 - i*s*d*s1*d1) / D
        dn = (d*c1*d1 - i*m*s*c*s1) / D

    Raises
    ------
    PoleProximityError
        If any point is within ``pole_eps`` of a lattice pole
        ``2aK + (2b+1)iK'``; the error carries the nearest pole.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    _raise_if_near_pole(z, ctx, pole_eps, what="sn/cn/dn")
    m = ctx.m
    s, c, d = sncndn_real(z.real, m)
    s1, c1, d1 = sncndn_real(z.imag, 1.0 - m)
    D = c1 * c1 + m * (s * s1) ** 2
    sn = (s * d1 + 1j * (c * d * s1 * c1)) / D
    cn = (c * c1 - 1j * (s * d * s1 * d1)) / D
    dn = (d * c1 * d1 - 1j * (m * s * c * s1)) / D
    if scalar:
        return JacobiTriple(complex(sn), complex(cn), complex(dn))
    return JacobiTriple(sn, cn, dn)


def _triple_at(z, ctx: ModulusContext, pole_eps: float) -> JacobiTriple:
    """Real fast path when every imaginary part vanishes."""
    z = np.asarray(z)
    if np.isrealobj(z) or not np.any(np.asarray(z).imag):
        return sncndn_real(np.asarray(z).real, ctx.m)
    return sncndn_complex(z, ctx, pole_eps=pole_eps)


def aux_ratio(code: str, z, ctx: ModulusContext,
              pole_eps: float = DEFAULT_POLE_EPS):
    """Evaluate a basic function or one of the nine quotients at ``z``.

    ``code`` is one of :data:`AUX_CODES`; e.g. ``"cs"`` is ``cn/sn``.

    Raises
    ------
    DenominatorZeroError
        If the denominator function is (numerically) zero at ``z``; the
        error names the denominator.
    """
    if code not in AUX_CODES:
        raise DomainError(f"unknown function code {code!r}; "
                          f"expected one of {AUX_CODES}")
    t = _triple_at(z, ctx, pole_eps)
    values = {"s": t.sn, "c": t.cn, "d": t.dn, "n": None}
    if code in ("sn", "cn", "dn"):
        return values[code[0]]
    num_key, den_key = code[0], code[1]
    num = 1.0 if num_key == "n" else values[num_key]
    den = 1.0 if den_key == "n" else values[den_key]
    if den_key != "n":
        den_arr = np.atleast_1d(np.asarray(den))
        if np.any(np.abs(den_arr) < _DENOM_EPS):
            name = {"s": "sn", "c": "cn", "d": "dn"}[den_key]
            bad = den_arr.ravel()[int(np.argmin(np.abs(den_arr)))]
            raise DenominatorZeroError(code, name, complex(bad))
    return num / den


_THETA_MAX_TERMS = 256


def _theta_terms(kind: int, z, q: float, derivative: bool):
    """Yield successive series terms and their magnitude bounds."""
    z = np.asarray(z, dtype=complex)
    ymax = float(np.max(np.abs(z.imag))) if z.size else 0.0
    for n in range(_THETA_MAX_TERMS):
        if kind in (1, 2):
            k = 2 * n + 1
            amp = q ** ((n + 0.5) ** 2)
            bound = 2.0 * amp * math.exp(k * ymax) * (k if derivative else 1.0)
            if kind == 1:
                sign = (-1.0) ** n
                term = (2.0 * sign * amp * (k * np.cos(k * z)) if derivative
                        else 2.0 * sign * amp * np.sin(k * z))
            else:
                term = (-2.0 * amp * (k * np.sin(k * z)) if derivative
                        else 2.0 * amp * np.cos(k * z))
        else:
            k = n + 1  # constant term handled by the caller
            amp = q ** (k * k)
            bound = 4.0 * amp * math.exp(2 * k * ymax) * (k if derivative else 1.0)
            sign = (-1.0) ** k if kind == 4 else 1.0
            term = (-4.0 * sign * amp * (k * np.sin(2 * k * z)) if derivative
                    else 2.0 * sign * amp * np.cos(2 * k * z))
        yield term, bound


def _theta_sum(kind: int, z, ctx: ModulusContext, derivative: bool):
    if kind not in (1, 2, 3, 4):
        raise DomainError(f"theta kind must be 1..4, got {kind}")
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    q = ctx.q
    if kind in (1, 2):
        acc = np.zeros_like(z)
    else:
        acc = np.zeros_like(z) if derivative else np.ones_like(z)
    # Truncation rule: stop once the next term's magnitude bound drops below
    # 1e-16 times the accumulated magnitude, where "accumulated magnitude" is
    # the running sum of term-magnitude bounds (monotone, so the rule is
    # well defined even at zeros of the function).
    acc_scale = 1.0 if (kind in (3, 4) and not derivative) else 0.0
    converged = False
    for nterms, (term, bound) in enumerate(_theta_terms(kind, z, q, derivative)):
        if nterms > 0 and bound <= 1e-16 * acc_scale:
            converged = True
            break
        acc = acc + term
        acc_scale += bound
    if not converged:
        ymax = float(np.max(np.abs(z.imag))) if z.size else 0.0
        raise NonConvergenceError(
            f"theta_{kind} series did not converge within {_THETA_MAX_TERMS} "
            f"terms (q={q:.3e}, max|Im z|={ymax:.3f})"
        )
    if scalar:
        return complex(acc)
    return acc


def theta(kind: int, z, ctx: ModulusContext):
    """Theta function ``theta_kind(z)`` at the context's nome.

    Series definitions (``q = ctx.q``)::

        theta_1 = 2 * sum_{n>=0} (-1)**n q**((n+1/2)**2) sin((2n+1) z)
        theta_2 = 2 * sum_{n>=0} q**((n+1/2)**2) cos((2n+1) z)
        theta_3 = 1 + 2 * sum_{n>=1} q**(n**2) cos(2 n z)
        theta_4 = 1 + 2 * sum_{n>=1} (-1)**n q**(n**2) cos(2 n z)

    Terms are added until the next term's magnitude bound falls below
    ``1e-16`` times the accumulated magnitude; a hard cap raises
    :class:`~elliptic_cyclic.errors.NonConvergenceError`.
    """
    return _theta_sum(kind, z, ctx, derivative=False)


def theta_dz(kind: int, z, ctx: ModulusContext):
    """Derivative ``d(theta_kind)/dz`` with the same truncation rule."""
    return _theta_sum(kind, z, ctx, derivative=True)


def jacobi_zeta(u, ctx: ModulusContext, pole_eps: float = DEFAULT_POLE_EPS):
    """Zeta function for real *or complex* argument(s).

    Real arguments use the incomplete-integral form (continuous amplitude);
    complex arguments use the logarithmic derivative of ``theta_4``::

        Z(u) = (pi / 2K) * theta_4'(z) / theta_4(z),   z = pi*u/(2K)

    Both branches agree to machine precision on the real axis.
    """
    arr = np.asarray(u)
    if np.isrealobj(arr) or not np.any(arr.imag):
        return jacobi_zeta_u(arr.real if np.iscomplexobj(arr) else arr, ctx)
    _raise_if_near_pole(arr, ctx, pole_eps, what="Z")
    zz = (math.pi / (2.0 * ctx.K)) * np.asarray(u, dtype=complex)
    out = (math.pi / (2.0 * ctx.K)) * theta_dz(4, zz, ctx) / theta(4, zz, ctx)
    if np.ndim(u) == 0:
        return complex(out)
    return out


def eval_fn(name: str, z, ctx: ModulusContext,
            pole_eps: float = DEFAULT_POLE_EPS):
    """Dispatch evaluation of ``sn``/``cn``/``dn``/``Z`` or any quotient code.

    Real inputs stay on the real fast path; complex inputs use the split
    formulas.  This is the single entry point the verification engines use.
    """
    if name == "Z":
        return jacobi_zeta(z, ctx, pole_eps=pole_eps)
    if name in ("sn", "cn", "dn"):
        arr = np.asarray(z)
        if np.isrealobj(arr) or not np.any(arr.imag):
            t = sncndn_real(arr.real if np.iscomplexobj(arr) else arr, ctx.m)
        else:
            t = sncndn_complex(arr, ctx, pole_eps=pole_eps)
        return getattr(t, name)
    return aux_ratio(name, z, ctx, pole_eps=pole_eps)


def weierstrass_invariants(ctx: ModulusContext) -> tuple[float, float, float]:
    """Stationary values ``(e1, e2, e3)`` of the Weierstrass function.

    With half-periods ``omega1 = K`` and ``omega3 = i*Kprime``:
    ``e1 = (2 - m)/3``, ``e2 = (2m - 1)/3``, ``e3 = -(1 + m)/3``.
    """
    m = ctx.m
    return ((2.0 - m) / 3.0, (2.0 * m - 1.0) / 3.0, -(1.0 + m) / 3.0)


def weierstrass_P(u, ctx: ModulusContext,
                  pole_eps: float = DEFAULT_POLE_EPS):
    """Weierstrass P with half-periods ``(K, i*Kprime)``.

    Computed purely through the elliptic-function layer as
    ``P(u) = e3 + 1 / sn(u)**2``.

    Raises
    ------
    PoleProximityError
        If ``u`` is within ``pole_eps`` of the period lattice
        ``2aK + 2b*i*Kprime`` (the double poles of P).
    """
    z = np.asarray(u, dtype=complex)
    dist, point = zero_lattice_distance(z, ctx)
    dist_arr = np.atleast_1d(dist)
    if np.any(dist_arr < pole_eps):
        idx = int(np.argmin(dist_arr))
        zf = np.atleast_1d(z).ravel()
        pf = np.atleast_1d(np.asarray(point, dtype=complex)).ravel()
        raise PoleProximityError(complex(zf[idx]), complex(pf[idx]),
                                 float(dist_arr.ravel()[idx]),
                                 what="weierstrass_P")
    _, _, e3 = weierstrass_invariants(ctx)
    # The sn-pole lattice is harmless here (1/sn**2 -> 0 smoothly), so the
    # sn evaluation runs unguarded; only this function's own pole lattice
    # (the sn zeros, checked above) is excluded.
    sn = sncndn_complex(z, ctx, pole_eps=0.0).sn
    out = e3 + 1.0 / (np.asarray(sn) ** 2)
    if np.ndim(u) == 0:
        return complex(out)
    return out


def weierstrass_P_prime(u, ctx: ModulusContext,
                        pole_eps: float = DEFAULT_POLE_EPS):
    """Derivative of :func:`weierstrass_P`: ``-2 * cn * dn / sn**3``."""
    z = np.asarray(u, dtype=complex)
    dist, point = zero_lattice_distance(z, ctx)
    dist_arr = np.atleast_1d(dist)
    if np.any(dist_arr < pole_eps):
        idx = int(np.argmin(dist_arr))
        zf = np.atleast_1d(z).ravel()
        pf = np.atleast_1d(np.asarray(point, dtype=complex)).ravel()
        raise PoleProximityError(complex(zf[idx]), complex(pf[idx]),
                                 float(dist_arr.ravel()[idx]),
                                 what="weierstrass_P_prime")
    t = sncndn_complex(z, ctx, pole_eps=0.0)
    sn = np.asarray(t.sn)
    out = -2.0 * np.asarray(t.cn) * np.asarray(t.dn) / (sn ** 3)
    if np.ndim(u) == 0:
        return complex(out)
    return out
