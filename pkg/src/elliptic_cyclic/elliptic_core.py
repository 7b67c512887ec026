"""Complete and incomplete elliptic integrals, amplitude, and the zeta function.

Everything in this module works with the *parameter* convention ``m`` (the
square of the modulus), real, with ``0 < m < 1`` for full contexts.  The
complete integrals are computed with the arithmetic-geometric mean, iterated
until the co-scale underflows at machine epsilon; incomplete integrals are
delegated to scipy's Carlson-based routines behind the module's own domain
checks.

The central object is :class:`ModulusContext`, an immutable bundle of the
quantities every higher layer needs: ``K``, ``K'``, ``E`` and the nome
``q = exp(-pi*K'/K)``.

Conventions
-----------
* ``amplitude(u, m)`` is the *continuous* inverse of ``u = F(phi, m)``:
  it increases without bound with ``u`` instead of being folded into
  ``(-pi/2, pi/2]``.  This makes ``jacobi_zeta_u`` exactly ``2K``-periodic.
* ``jacobi_zeta_u(u, ctx)`` is the zeta function of the *argument* ``u``
  (not of the amplitude angle): ``Z(u) = E(am(u), m) - (E/K) * u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .errors import DomainError, NonConvergenceError

__all__ = [
    "ModulusContext",
    "make_context",
    "complete_K",
    "complete_E",
    "nome",
    "amplitude",
    "incomplete_F",
    "incomplete_E",
    "jacobi_zeta_u",
]

_EPS = np.finfo(float).eps
_MAX_AGM_ITER = 64


@lru_cache(maxsize=512)
def _agm_ladder(m: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Return the AGM scale sequences ``(a_0..a_N, c_0..c_N)`` for parameter m.

    ``a_{n+1} = (a_n + b_n)/2``, ``b_{n+1} = sqrt(a_n b_n)``,
    ``c_{n+1} = (a_n - b_n)/2``, starting from ``a_0 = 1``,
    ``b_0 = sqrt(1-m)``, ``c_0 = sqrt(m)``.  Iteration stops once
    ``c_N <= eps * a_N`` (machine-epsilon agreement of a and b).
    """
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"AGM ladder requires 0 <= m <= 1, got {m}")
    a, b = 1.0, math.sqrt(1.0 - m)
    a_seq = [a]
    c_seq = [math.sqrt(m)]
    for _ in range(_MAX_AGM_ITER):
        if abs(c_seq[-1]) <= _EPS * a:
            break
        c_next = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        a_seq.append(a)
        c_seq.append(c_next)
    else:  # pragma: no cover - the AGM converges quadratically
        raise NonConvergenceError(f"AGM did not converge for m={m}")
    return tuple(a_seq), tuple(c_seq)


def complete_K(m: float) -> float:
    """Complete elliptic integral of the first kind, ``K(m)``.

    Accepts ``0 <= m < 1``; diverges as ``m -> 1``.
    """
    if not 0.0 <= m < 1.0:
        raise DomainError(f"complete_K requires 0 <= m < 1, got {m}")
    a_seq, _ = _agm_ladder(m)
    return math.pi / (2.0 * a_seq[-1])


def complete_E(m: float) -> float:
    """Complete elliptic integral of the second kind, ``E(m)``.

    Uses the AGM identity ``E = K * (1 - sum_n 2**(n-1) * c_n**2)``.
    """
    if not 0.0 <= m < 1.0:
        raise DomainError(f"complete_E requires 0 <= m < 1, got {m}")
    a_seq, c_seq = _agm_ladder(m)
    s = 0.0
    for n, c in enumerate(c_seq):
        s += 2.0 ** (n - 1) * c * c
    return complete_K(m) * (1.0 - s)


def nome(m: float) -> float:
    """The nome ``q = exp(-pi * K(1-m) / K(m))`` for ``0 < m < 1``."""
    if not 0.0 < m < 1.0:
        raise DomainError(f"nome requires 0 < m < 1, got {m}")
    return math.exp(-math.pi * complete_K(1.0 - m) / complete_K(m))


@dataclass(frozen=True)
class ModulusContext:
    """Immutable bundle of modulus-level constants.

    Attributes
    ----------
    m : float
        Parameter, ``0 < m < 1``.
    K : float
        Complete integral of the first kind at ``m`` (quarter period).
    Kprime : float
        Complete integral of the first kind at ``1 - m``.
    E : float
        Complete integral of the second kind at ``m``.
    q : float
        Nome ``exp(-pi * Kprime / K)``.
    """

    m: float
    K: float
    Kprime: float
    E: float
    q: float

    @property
    def Eprime(self) -> float:
        """Complete integral of the second kind at the complementary parameter."""
        return complete_E(1.0 - self.m)

    def legendre_residual(self) -> float:
        """Residual of the bilinear relation tying the four complete integrals.

        Returns ``E*Kprime + Eprime*K - K*Kprime - pi/2`` (ideally 0).
        """
        return self.E * self.Kprime + self.Eprime * self.K \
            - self.K * self.Kprime - math.pi / 2.0


@lru_cache(maxsize=256)
def make_context(m: float) -> ModulusContext:
    """Build a :class:`ModulusContext` for ``0 < m < 1``.

    Raises
    ------
    DomainError
        If ``m <= 0`` or ``m >= 1`` (including the degenerate endpoints:
        the trigonometric and hyperbolic limits are reached through the
        point-evaluation functions, never through a context).
    """
    if not isinstance(m, (int, float)) or isinstance(m, bool):
        raise DomainError(f"parameter m must be a real number, got {m!r}")
    m = float(m)
    if not 0.0 < m < 1.0 or math.isnan(m):
        raise DomainError(f"make_context requires 0 < m < 1, got {m}")
    K = complete_K(m)
    Kp = complete_K(1.0 - m)
    E = complete_E(m)
    ctx = ModulusContext(m=m, K=K, Kprime=Kp, E=E, q=math.exp(-math.pi * Kp / K))
    # Cheap internal consistency guards; both are mathematically guaranteed.
    if not 0.0 < E < K:
        raise NonConvergenceError(
            f"inconsistent integrals for m={m}: E={E}, K={K}")
    return ctx


def amplitude(u, m: float):
    """Continuous amplitude ``phi(u)`` with ``u = F(phi, m)``.

    Vectorized over ``u`` (scalar or ndarray).  Monotonically increasing in
    ``u`` for ``0 <= m < 1`` with ``phi(u + 2K) = phi(u) + pi``; at ``m = 1``
    it is the bounded hyperbolic-limit angle ``arcsin(tanh u)``.
    """
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"amplitude requires 0 <= m <= 1, got {m}")
    u = np.asarray(u, dtype=float)
    if m == 0.0:
        out = u.copy()
        return float(out) if out.ndim == 0 else out
    if m == 1.0:
        out = np.arcsin(np.tanh(u))
        return float(out) if out.ndim == 0 else out
    a_seq, c_seq = _agm_ladder(m)
    n_levels = len(a_seq) - 1
    phi = (2.0 ** n_levels) * a_seq[-1] * u
    for n in range(n_levels, 0, -1):
        ratio = c_seq[n] / a_seq[n]
        phi = 0.5 * (phi + np.arcsin(np.clip(ratio * np.sin(phi), -1.0, 1.0)))
    return float(phi) if phi.ndim == 0 else phi


def _check_incomplete_domain(m, name: str) -> None:
    marr = np.asarray(m, dtype=float)
    if np.any(marr < 0.0) or np.any(marr >= 1.0):
        raise DomainError(f"{name} requires 0 <= m < 1, got {m}")


def incomplete_F(phi, m):
    """Incomplete integral of the first kind ``F(phi, m)``, any real ``phi``.

    Satisfies ``F(phi + pi, m) = F(phi, m) + 2*K(m)``.  Vectorized.
    """
    _check_incomplete_domain(m, "incomplete_F")
    out = _sp.ellipkinc(phi, m)
    return float(out) if np.ndim(out) == 0 else out


def incomplete_E(phi, m):
    """Incomplete integral of the second kind ``E(phi, m)``, any real ``phi``.

    Satisfies ``E(phi + pi, m) = E(phi, m) + 2*E(m)``.  Vectorized.
    """
    _check_incomplete_domain(m, "incomplete_E")
    out = _sp.ellipeinc(phi, m)
    return float(out) if np.ndim(out) == 0 else out


def jacobi_zeta_u(u, ctx: ModulusContext):
    """Zeta function of the argument: ``Z(u) = E(am(u), m) - (E/K) u``.

    Built on the continuous amplitude, so it is exactly ``2K``-periodic, odd,
    and vanishes at ``0`` and ``K``.  Its derivative equals
    ``dn(u)**2 - E/K``.  Vectorized over ``u``.
    """
    phi = amplitude(u, ctx.m)
    out = _sp.ellipeinc(phi, ctx.m) - (ctx.E / ctx.K) * np.asarray(u, dtype=float)
    return float(out) if np.ndim(out) == 0 else out
