"""Numerical verification of catalog identities by direct summation.

The engine evaluates both sides of an :class:`~elliptic_cyclic.catalog.model.
IdentitySpec` on a deterministic grid of base points, moduli, point counts
``p`` and shift parameters, and reports the worst relative residual.

Evaluation conventions
----------------------
* The cyclic points are ``x_j = x0 + (j-1) * T/p`` for ``j = 1..p`` and the
  factor arguments are the *unwrapped* values ``x0 + (j - 1 + shift) * T/p``;
  shifts are never reduced modulo p.  (Half-period sign flips of sn and cn
  make wrapped evaluation wrong for products that span a full period.)
* An ``alt`` term weights the j-th summand with ``(-1)**(j-1)`` and requires
  even ``p``.
* Relative residuals are ``|lhs - rhs| / max(|lhs|, |rhs|, 1, floor/tol)``
  where ``floor = SUMMAND_NOISE_RELERR * kappa`` and ``kappa`` is the total
  summed magnitude ``sum_terms |coeff| * sum_j |summand_j|`` over both sides.
  The floor term keeps samples whose exact value is buried under the
  round-off of a deeply cancelling sum from failing spuriously, without
  loosening the check anywhere the data can actually discriminate.
* Base points: a fixed real ladder ``0.1 + 0.3*k`` plus seeded random complex
  points with ``|Im x0| < Kprime/4`` (and real part in ``(0, T)``), drawn from
  a per-identity generator so reports are byte-reproducible for a given seed
  regardless of concurrency or id filtering.

The one-period integral token ``INT`` is evaluated with adaptive quadrature
of the left side's summand over ``[0, T]`` to 1e-12 absolute accuracy and is
cached per (identity, modulus, parameters).
"""

from __future__ import annotations

import statistics
import zlib
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate as _integrate

from .catalog.expressions import Expr, eval_expr
from .catalog.grid import default_p_values, iter_param_assignments
from .catalog.model import (
    ChainFactor,
    CyclicTerm,
    IdentitySpec,
    TermFactor,
)
from .elliptic_core import ModulusContext, make_context
from .errors import (
    ConstraintError,
    DenominatorZeroError,
    PoleProximityError,
    SingularCoefficientError,
    VerificationConfigError,
)
from .jacobi_fn import (
    DEFAULT_POLE_EPS,
    eval_fn,
    jacobi_zeta,
    pole_distance,
    sncndn_complex,
    sncndn_real,
)

__all__ = [
    "SampleGrid", "SampleResult", "VerificationReport",
    "eval_cyclic_sum", "eval_identity", "verify", "verify_many",
    "coefficient_env", "eval_coefficient", "summand_function",
    "quadrature_token_value", "DEFAULT_TOLERANCE",
]

DEFAULT_TOLERANCE = 1e-9

#: Per-summand relative evaluation-error budget backing the round-off floor
#: of the residual denominator.  A single sn/cn/dn/zeta evaluation lands
#: within a few hundred ulps on the split-formula complex path, so a term
#: whose summands have total magnitude ``k`` can carry evaluation noise up
#: to about ``SUMMAND_NOISE_RELERR * k`` after the (possibly cancelling)
#: sum is scaled by its coefficient.
SUMMAND_NOISE_RELERR = 5e-13

#: Denominator threshold below which a coefficient-level quotient is treated
#: as structurally singular (the admissible-parameter filter).  Coefficient
#: arguments are rational multiples of K, so genuine zeros land within
#: roundoff of 0 and everything else stays orders of magnitude above this.
_COEFF_SINGULAR_EPS = 1e-8


@dataclass(frozen=True)
class SampleGrid:
    """Sampling plan for :func:`verify`.

    ``p_values=None`` uses the per-family default; ``base_points`` (if given)
    replaces both the real ladder and the random complex draws.
    ``max_param_sets`` bounds how many admissible (r, s, t, l) assignments
    are explored per ``p`` (chosen deterministically, diversifying r).
    """

    moduli: tuple[float, ...] = (0.1, 0.5, 0.9, 0.99)
    p_values: tuple[int, ...] | None = None
    max_param_sets: int = 2
    n_real: int = 8
    n_complex: int = 8
    base_points: tuple[complex, ...] | None = None


@dataclass
class SampleResult:
    """One verified sample point.

    ``noise_floor`` is the absolute round-off budget of this sample
    (``SUMMAND_NOISE_RELERR`` times the summed term magnitudes); the stored
    ``rel_residual`` divides by ``max(|lhs|, |rhs|, 1, floor/tol)`` so that
    residuals indistinguishable from evaluation noise do not read as
    failures.
    """

    x0: complex
    m: float
    params: dict[str, int]
    lhs: complex
    rhs: complex
    rel_residual: float
    noise_floor: float = 0.0

    def to_json_dict(self) -> dict:
        out: dict = {
            "x0": [self.x0.real, self.x0.imag],
            "m": self.m,
            "p": self.params["p"],
        }
        for name in ("r", "s", "t", "l"):
            if name in self.params:
                out[name] = self.params[name]
        out["lhs"] = [complex(self.lhs).real, complex(self.lhs).imag]
        out["rhs"] = [complex(self.rhs).real, complex(self.rhs).imag]
        out["rel_residual"] = self.rel_residual
        out["noise_floor"] = self.noise_floor
        return out


@dataclass
class VerificationReport:
    """Outcome of verifying one identity over a grid.

    ``passed`` is true exactly when at least one sample was evaluated and
    the maximum relative residual is below ``tolerance``.
    """

    id: str
    family: str
    tolerance: float
    seed: int
    samples: list[SampleResult] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)

    @property
    def max_rel(self) -> float:
        return max((s.rel_residual for s in self.samples), default=float("nan"))

    @property
    def median_rel(self) -> float:
        if not self.samples:
            return float("nan")
        return statistics.median(s.rel_residual for s in self.samples)

    @property
    def passed(self) -> bool:
        return bool(self.samples) and self.max_rel < self.tolerance

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "family": self.family,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "samples": [s.to_json_dict() for s in self.samples],
            "skipped": self.skipped,
            "max_rel": self.max_rel,
            "median_rel": self.median_rel,
            "pass": self.passed,
        }


# -- factor expansion ------------------------------------------------------

def _expanded_factors(term: CyclicTerm,
                      params: dict[str, int]) -> list[tuple[str, int, int]]:
    """Flatten a term's factors to ``(fn, integer shift, power)`` triples."""
    out: list[tuple[str, int, int]] = []
    for f in term.factors:
        if isinstance(f, TermFactor):
            out.append((f.fn, f.shift.value(params), f.power))
        elif isinstance(f, ChainFactor):
            count = round(eval_expr(f.count, params))
            if count < 1:
                raise ConstraintError(
                    f"chain count must be >= 1, got {count}")
            step = f.step.value(params)
            for n in range(count):
                out.append((f.fn, n * step, 1))
        else:  # pragma: no cover
            raise TypeError(f"unknown factor {f!r}")
    return out


class _PointCache:
    """Caches sn/cn/dn triples and zeta values per integer shift."""

    def __init__(self, x0, params: dict[str, int], ctx: ModulusContext,
                 T: float, pole_eps: float) -> None:
        self.x0 = np.asarray(x0)
        self.params = params
        self.ctx = ctx
        self.step = T / params["p"]
        self.pole_eps = pole_eps
        self.is_real = (np.isrealobj(self.x0)
                        or not np.any(np.asarray(self.x0).imag))
        self._triples: dict[int, tuple] = {}
        self._zetas: dict[int, np.ndarray] = {}
        p = params["p"]
        j = np.arange(p).reshape((p,) + (1,) * self.x0.ndim)
        self._base = self.x0[None, ...] + j * self.step

    def args_for(self, sigma: int) -> np.ndarray:
        return self._base + sigma * self.step

    def triple(self, sigma: int):
        if sigma not in self._triples:
            args = self.args_for(sigma)
            if self.is_real:
                self._triples[sigma] = sncndn_real(args.real, self.ctx.m)
            else:
                self._triples[sigma] = sncndn_complex(args, self.ctx,
                                                      pole_eps=self.pole_eps)
        return self._triples[sigma]

    def zeta(self, sigma: int) -> np.ndarray:
        if sigma not in self._zetas:
            args = self.args_for(sigma)
            if self.is_real:
                self._zetas[sigma] = np.asarray(
                    jacobi_zeta(args.real, self.ctx))
            else:
                self._zetas[sigma] = np.asarray(
                    jacobi_zeta(args, self.ctx, pole_eps=self.pole_eps))
        return self._zetas[sigma]

    def factor_value(self, fn: str, sigma: int, power: int) -> np.ndarray:
        if fn == "Z":
            val = self.zeta(sigma)
        else:
            val = np.asarray(getattr(self.triple(sigma), fn))
        return val if power == 1 else val ** power


def eval_cyclic_sum(term: CyclicTerm, x0, params: dict[str, int],
                    ctx: ModulusContext, T: float,
                    pole_eps: float = DEFAULT_POLE_EPS,
                    _cache: _PointCache | None = None,
                    return_scale: bool = False):
    """Evaluate one term (cyclic sum, product, or constant) at ``x0``.

    ``x0`` may be a scalar or an ndarray of base points; the result has the
    same shape.  Real base points return real values (the summands of every
    admissible term are real on the real axis).

    With ``return_scale=True`` the result is ``(value, scale)`` where
    ``scale`` is the summed magnitude ``sum_j |summand_j|`` (``|value|`` for
    products, 1 for constants) — the natural conditioning measure of the
    sum, used by :func:`verify` for its round-off floor.

    Raises
    ------
    ConstraintError
        For an alternating term with odd ``p``.
    PoleProximityError
        If any factor argument is within ``pole_eps`` of a function pole;
        the message identifies the offending point index and factor.
    """
    p = params["p"]
    if term.kind == "const":
        base = np.ones_like(np.asarray(x0, dtype=float if not np.iscomplexobj(
            np.asarray(x0)) else complex))
        out = base if np.ndim(x0) else float(base)
        if return_scale:
            return out, (np.abs(base) if np.ndim(x0) else 1.0)
        return out
    if term.sign == "alt" and p % 2 != 0:
        raise ConstraintError(
            f"alternating sums require even p, got p={p}")
    cache = _cache or _PointCache(x0, params, ctx, T, pole_eps)
    factors = _expanded_factors(term, params)
    value = None
    for fn, sigma, power in factors:
        try:
            fv = cache.factor_value(fn, sigma, power)
        except PoleProximityError as exc:
            args = cache.args_for(sigma)
            dist, _ = pole_distance(args, ctx)
            jbad, *_rest = np.unravel_index(int(np.argmin(dist)), dist.shape)
            raise PoleProximityError(
                exc.point, exc.nearest_pole, exc.distance,
                what=f"factor {fn}[{sigma:+d}] at point index j={jbad + 1}"
            ) from None
        value = fv if value is None else value * fv
    if term.kind == "prod":
        out = np.prod(value, axis=0)
        scale = np.abs(out)
    else:
        if term.sign == "alt":
            weights = np.resize(
                np.array([1.0, -1.0]), p).reshape((p,) + (1,) * (value.ndim - 1))
            value = value * weights
        out = np.sum(value, axis=0)
        scale = np.sum(np.abs(value), axis=0)
    if np.ndim(x0) == 0:
        if return_scale:
            return out.item(), float(scale)
        return out.item()
    if return_scale:
        return out, scale
    return out


# -- coefficients -----------------------------------------------------------

def coefficient_env(params: dict[str, int], ctx: ModulusContext,
                    T: float) -> dict[str, float]:
    """Symbol values available to coefficient expressions."""
    p = params["p"]
    env = {
        "m": ctx.m, "K": ctx.K, "Kp": ctx.Kprime, "E": ctx.E, "q": ctx.q,
        "p": float(p),
    }
    for name in ("r", "s", "t", "l"):
        if name in params:
            env[name] = float(params[name])
    r = params.get("r")
    s = params.get("s")
    t = params.get("t")
    if r is not None:
        env["a"] = 2.0 * r * ctx.K / p
        env["b"] = 4.0 * r * ctx.K / p
    if s is not None:
        env["a1"] = 2.0 * s * ctx.K / p
        env["b1"] = 4.0 * s * ctx.K / p
    if t is not None:
        env["a2"] = 2.0 * t * ctx.K / p
    return env


def _coefficient_fn_eval(ctx: ModulusContext) -> Callable:
    def fn_eval(name: str, args: list[float]):
        (x,) = args
        if name == "Zu":
            return jacobi_zeta(float(x), ctx)
        t = sncndn_real(float(x), ctx.m)
        values = {"s": t.sn, "c": t.cn, "d": t.dn, "n": 1.0}
        if name in ("sn", "cn", "dn"):
            return values[name[0]]
        num, den = values[name[0]], values[name[1]]
        if abs(den) < _COEFF_SINGULAR_EPS:
            raise SingularCoefficientError(
                f"{name}({x:.6g}) has near-zero denominator {den:.3e}")
        return num / den
    return fn_eval


def eval_coefficient(expr: Expr, params: dict[str, int], ctx: ModulusContext,
                     T: float, int_value: Callable[[], float] | None = None):
    """Evaluate a coefficient expression for concrete parameters.

    Raises
    ------
    SingularCoefficientError
        If a quotient token is evaluated at (numerically) a pole — e.g.
        ``cs`` at an argument congruent to 0 mod 2K.
    """
    env = coefficient_env(params, ctx, T)
    try:
        return eval_expr(expr, env, fn_eval=_coefficient_fn_eval(ctx),
                         int_value=int_value)
    except DenominatorZeroError as exc:  # pragma: no cover - defensive
        raise SingularCoefficientError(str(exc)) from exc


# -- the summand and its one-period integral ---------------------------------

def summand_function(lines: Sequence[tuple[Expr, CyclicTerm]],
                     params: dict[str, int], ctx: ModulusContext,
                     T: float, pole_eps: float = 1e-12) -> Callable:
    """Return ``f(z)`` with ``sum_j (+/-1)^{j-1} f(x_j)`` the value of ``lines``.

    Each line contributes ``coeff * prod(factors at z + shift*T/p)``.  The
    coefficients may not contain the INT token (it would be circular).
    """
    step = T / params["p"]
    expanded: list[tuple[complex, list[tuple[str, int, int]]]] = []
    for coeff, term in lines:
        cval = eval_coefficient(coeff, params, ctx, T, int_value=None)
        expanded.append((cval, _expanded_factors(term, params)))

    def f(z):
        z = np.asarray(z)
        total = None
        for cval, factors in expanded:
            val = None
            for fn, sigma, power in factors:
                arg = z + sigma * step
                if fn == "Z":
                    fv = np.asarray(jacobi_zeta(arg, ctx, pole_eps=pole_eps))
                else:
                    fv = np.asarray(eval_fn(fn, arg, ctx, pole_eps=pole_eps))
                if power != 1:
                    fv = fv ** power
                val = fv if val is None else val * fv
            val = cval * val
            total = val if total is None else total + val
        return total

    return f


def quadrature_token_value(lines: Sequence[tuple[Expr, CyclicTerm]],
                           params: dict[str, int], ctx: ModulusContext,
                           T: float) -> float:
    """Adaptive quadrature of the summand over one period ``[0, T]``.

    Target absolute accuracy 1e-12.  The summand is real on the real axis.
    """
    f = summand_function(lines, params, ctx, T)

    def f_real(x: float) -> float:
        return float(np.real(f(np.asarray(x))))

    value, _err = _integrate.quad(f_real, 0.0, T, epsabs=1e-13, epsrel=1e-13,
                                  limit=400)
    return value


# -- identity evaluation ------------------------------------------------------

def eval_identity(spec: IdentitySpec, x0, params: dict[str, int],
                  ctx: ModulusContext,
                  pole_eps: float = DEFAULT_POLE_EPS,
                  quad_cache: dict | None = None,
                  return_scale: bool = False):
    """Evaluate both sides of ``spec``; returns ``(lhs, rhs)`` arrays.

    With ``return_scale=True`` the result is ``(lhs, rhs, kappa)`` where
    ``kappa = sum_terms |coeff| * sum_j |summand_j|`` over both sides — the
    magnitude actually pushed through the floating-point sums, which bounds
    the attainable accuracy of ``lhs - rhs``.

    The INT token (one-period integral of the left summand) is computed by
    adaptive quadrature and cached in ``quad_cache`` under
    ``(spec.id, m, sorted params)``.
    """
    T = spec.period_in_K() * ctx.K

    def int_value() -> float:
        key = (spec.id, ctx.m, tuple(sorted(params.items())))
        if quad_cache is not None and key in quad_cache:
            return quad_cache[key]
        val = quadrature_token_value(spec.lhs, params, ctx, T)
        if quad_cache is not None:
            quad_cache[key] = val
        return val

    cache = _PointCache(x0, params, ctx, T, pole_eps)
    kappa = np.zeros(np.shape(x0))

    def side_value(lines):
        nonlocal kappa
        total = None
        for coeff, term in lines:
            cval = eval_coefficient(coeff, params, ctx, T, int_value=int_value)
            tval, tscale = eval_cyclic_sum(term, x0, params, ctx, T,
                                           pole_eps=pole_eps, _cache=cache,
                                           return_scale=True)
            contrib = cval * np.asarray(tval)
            total = contrib if total is None else total + contrib
            kappa = kappa + abs(cval) * np.asarray(tscale)
        return total

    lhs, rhs = side_value(spec.lhs), side_value(spec.rhs)
    if return_scale:
        return lhs, rhs, kappa
    return lhs, rhs


# -- grids and verification ---------------------------------------------------

def _identity_rng(seed: int, identity_id: str) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed,
                               spawn_key=(zlib.crc32(identity_id.encode()),)))


def _grid_base_points(grid: SampleGrid, ctx: ModulusContext, T: float,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """(real points, complex points) for one (m, p, params) combination."""
    if grid.base_points is not None:
        pts = np.asarray(grid.base_points, dtype=complex)
        return pts[pts.imag == 0].real, pts[pts.imag != 0]
    reals = 0.1 + 0.3 * np.arange(grid.n_real)
    re = rng.uniform(0.0, T, size=grid.n_complex)
    im = rng.uniform(-0.25 * ctx.Kprime, 0.25 * ctx.Kprime,
                     size=grid.n_complex)
    return reals, re + 1j * im


def _select_param_sets(spec: IdentitySpec, p: int,
                       max_sets: int) -> list[dict[str, int]]:
    """First admissible assignment, then diversity in r (deterministic)."""
    found: list[dict[str, int]] = []
    for assignment in iter_param_assignments(spec, p):
        if not found:
            found.append(assignment)
        elif assignment.get("r") != found[0].get("r"):
            found.append(assignment)
        if len(found) >= max_sets:
            break
    return found


def _pole_skip_mask(spec: IdentitySpec, x0: np.ndarray,
                    params: dict[str, int], ctx: ModulusContext, T: float,
                    margin: float) -> np.ndarray:
    """True for base points whose factor arguments all clear the pole lattice."""
    step = T / params["p"]
    ok = np.ones(x0.shape, dtype=bool)
    sigmas = set()
    for _c, term in list(spec.lhs) + list(spec.rhs):
        if term.kind == "const":
            continue
        for _fn, sigma, _pw in _expanded_factors(term, params):
            sigmas.add(sigma)
    p = params["p"]
    j = np.arange(p)[:, None]
    for sigma in sigmas:
        args = x0[None, :] + (j + sigma) * step
        dist, _ = pole_distance(args, ctx)
        ok &= dist.min(axis=0) > margin
    return ok


def verify(spec: IdentitySpec,
           grid: SampleGrid | None = None,
           tolerance: float = DEFAULT_TOLERANCE,
           seed: int = 0,
           pole_eps: float = DEFAULT_POLE_EPS,
           skip_margin: float = 1e-6) -> VerificationReport:
    """Verify one identity over a sample grid.

    Samples too close to a pole lattice (within ``skip_margin``) and
    parameter combinations with singular coefficients are skipped and
    recorded in the report; the identity fails only on genuine residuals.
    """
    grid = grid or SampleGrid()
    rng = _identity_rng(seed, spec.id)
    report = VerificationReport(id=spec.id, family=spec.family,
                                tolerance=tolerance, seed=seed)
    quad_cache: dict = {}
    p_values = grid.p_values or default_p_values(spec.family)
    for m in grid.moduli:
        ctx = make_context(m)
        T = spec.period_in_K() * ctx.K
        for p in p_values:
            for params in _select_param_sets(spec, p, grid.max_param_sets):
                reals, cplxs = _grid_base_points(grid, ctx, T, rng)
                x0s = np.concatenate([reals.astype(complex), cplxs])
                keep = _pole_skip_mask(spec, x0s, params, ctx, T, skip_margin)
                for bad in x0s[~keep]:
                    report.skipped.append({
                        "reason": "pole-proximity",
                        "x0": [bad.real, bad.imag],
                        "m": m, "params": dict(params),
                    })
                x0s = x0s[keep]
                if x0s.size == 0:
                    continue
                realmask = x0s.imag == 0
                try:
                    parts = []
                    if np.any(realmask):
                        lhs_r, rhs_r, kap_r = eval_identity(
                            spec, x0s[realmask].real, params, ctx,
                            pole_eps=pole_eps, quad_cache=quad_cache,
                            return_scale=True)
                        parts.append((x0s[realmask], lhs_r, rhs_r, kap_r))
                    if np.any(~realmask):
                        lhs_c, rhs_c, kap_c = eval_identity(
                            spec, x0s[~realmask], params, ctx,
                            pole_eps=pole_eps, quad_cache=quad_cache,
                            return_scale=True)
                        parts.append((x0s[~realmask], lhs_c, rhs_c, kap_c))
                except (SingularCoefficientError, DenominatorZeroError) as exc:
                    report.skipped.append({
                        "reason": "singular-coefficient",
                        "detail": str(exc),
                        "m": m, "params": dict(params),
                    })
                    continue
                except PoleProximityError as exc:
                    report.skipped.append({
                        "reason": "pole-proximity",
                        "detail": str(exc),
                        "m": m, "params": dict(params),
                    })
                    continue
                for pts, lhs, rhs, kappa in parts:
                    lhs = np.atleast_1d(lhs)
                    rhs = np.atleast_1d(rhs)
                    floor = SUMMAND_NOISE_RELERR * np.atleast_1d(kappa)
                    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)),
                                       np.maximum(1.0, floor / tolerance))
                    rel = np.abs(lhs - rhs) / scale
                    for k in range(pts.size):
                        report.samples.append(SampleResult(
                            x0=complex(pts[k]), m=m, params=dict(params),
                            lhs=complex(lhs[k]), rhs=complex(rhs[k]),
                            rel_residual=float(rel[k]),
                            noise_floor=float(floor[k]),
                        ))
    return report


def verify_many(specs: Iterable[IdentitySpec],
                grid: SampleGrid | None = None,
                tolerance: float = DEFAULT_TOLERANCE,
                seed: int = 0,
                jobs: int = 1) -> list[VerificationReport]:
    """Verify several identities, optionally concurrently.

    Reports are returned ordered by identity id regardless of ``jobs``; each
    identity's samples depend only on (seed, id), so concurrency never
    changes any report.
    """
    specs = sorted(specs, key=lambda s: s.id)
    if not specs:
        raise VerificationConfigError("no identities matched")
    if jobs <= 1:
        return [verify(s, grid=grid, tolerance=tolerance, seed=seed)
                for s in specs]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(verify, s, grid=grid, tolerance=tolerance,
                               seed=seed) for s in specs]
        return [f.result() for f in futures]
