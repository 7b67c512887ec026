"""Batch command-line front-end.

Three subcommands drive the library:

``verify``
    Run a verification campaign over the built-in identity corpus (or a user
    catalog), filtered by an id glob, and emit a report as a human table,
    JSON, or CSV.  Exit status 0 means every matched identity passed, 1 means
    at least one failed, 2 means the run was misconfigured (bad catalog, no
    matching ids, invalid tolerance, ...).

``gamma``
    Parse a single cyclic-product spec such as ``"dn[0]^2*dn[+1]^2"``, locate
    its poles in one fundamental strip, and print the extracted
    principal-part coefficients together with the aggregated pole weights
    (both the plain and the sign-alternating aggregation).

``table``
    Tabulate the constant value of an identity whose right-hand side is
    x0-independent over ranges of ``p`` and ``m``, as CSV with header
    ``id,p,r,m,constant``.

JSON reports are byte-identical for identical configuration and seed: they
contain no timestamps, the identity order is fixed, and keys are sorted.
Every report records full provenance — catalog hash, configuration, and
seed.  The seed falls back to the ``ELLIPTIC_CYCLIC_SEED`` environment
variable when the flag is absent.
"""

from __future__ import annotations

import argparse
import csv
import fnmatch
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass

from . import __version__
from .catalog import (CatalogFile, IdentitySpec, builtin_corpus, corpus_sha256,
                      default_p_values, iter_param_assignments, parse_catalog,
                      parse_term_text)
from .catalog.expressions import parse_expr
from .catalog.model import FAMILY_PARITY, term_parity
from .cyclic_engine import (DEFAULT_TOLERANCE, SampleGrid, eval_identity,
                            summand_function, verify_many)
from .elliptic_core import make_context
from .errors import (ConstraintError, EllipticCyclicError,
                     PoleProximityError, SingularCoefficientError,
                     VerificationConfigError)
from .master_engine import gamma_set

__all__ = [
    "RunConfig", "EXIT_OK", "EXIT_FAIL", "EXIT_CONFIG", "ENV_SEED",
    "load_catalog", "select_entries", "run_verify",
    "cmd_verify", "cmd_gamma", "cmd_table", "main",
]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

#: Environment variable consulted when ``--seed`` is not given.
ENV_SEED = "ELLIPTIC_CYCLIC_SEED"

#: Stable identifier of the JSON report layout.
REPORT_SCHEMA = "elliptic-cyclic.verify/1"


# --------------------------------------------------------------------------
# Run configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Everything a ``verify`` run depends on.

    ``catalog`` is a file path or the literal ``"builtin"``.  ``p_values``,
    ``moduli`` and ``samples`` override the default sampling grid when not
    ``None``.  ``output``/``fmt``/``jobs`` are plumbing: they never influence
    the verified numbers, so they are not echoed into the report's
    provenance block.
    """

    catalog: str = "builtin"
    id_filter: str = "*"
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = 0
    p_values: tuple[int, ...] | None = None
    moduli: tuple[float, ...] | None = None
    samples: int | None = None
    output: str | None = None
    fmt: str = "human"
    jobs: int = 1

    def __post_init__(self) -> None:
        if not (self.tolerance > 0):
            raise VerificationConfigError(
                f"tolerance must be > 0, got {self.tolerance}")
        if self.fmt not in ("human", "json", "csv"):
            raise VerificationConfigError(f"unknown format {self.fmt!r}")
        if self.jobs < 1:
            raise VerificationConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.samples is not None and self.samples < 1:
            raise VerificationConfigError(
                f"sample count must be >= 1, got {self.samples}")
        for p in self.p_values or ():
            if p < 2:
                raise VerificationConfigError(f"p must be >= 2, got {p}")
        for m in self.moduli or ():
            if not 0.0 < m < 1.0:
                raise VerificationConfigError(
                    f"modulus must lie in (0, 1), got {m}")

    def grid(self) -> SampleGrid:
        """The sampling grid these overrides describe."""
        kwargs: dict = {}
        if self.moduli is not None:
            kwargs["moduli"] = self.moduli
        if self.p_values is not None:
            kwargs["p_values"] = self.p_values
        if self.samples is not None:
            kwargs["n_real"] = self.samples
            kwargs["n_complex"] = self.samples
        return SampleGrid(**kwargs)

    def provenance(self) -> dict:
        """The configuration block echoed into reports."""
        return {
            "catalog": self.catalog,
            "id_filter": self.id_filter,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "p_values": list(self.p_values) if self.p_values else None,
            "moduli": list(self.moduli) if self.moduli else None,
            "samples": self.samples,
        }


# --------------------------------------------------------------------------
# Catalog loading and filtering
# --------------------------------------------------------------------------

def load_catalog(source: str) -> tuple[CatalogFile, str]:
    """Load ``"builtin"`` or a catalog file; return it with its SHA-256."""
    if source == "builtin":
        return builtin_corpus(), corpus_sha256()
    with open(source, "r", encoding="utf-8") as fh:
        text = fh.read()
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return parse_catalog(text), digest


def select_entries(catalog: CatalogFile, pattern: str) -> list[IdentitySpec]:
    """Entries whose id matches the glob ``pattern``, ordered by id."""
    out = [e for e in catalog.entries if fnmatch.fnmatchcase(e.id, pattern)]
    return sorted(out, key=lambda e: e.id)


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------

def _json_clean(node):
    """Replace non-finite floats by ``None`` so reports are strict JSON."""
    if isinstance(node, float):
        return node if math.isfinite(node) else None
    if isinstance(node, dict):
        return {k: _json_clean(v) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_json_clean(v) for v in node]
    return node


def run_verify(config: RunConfig) -> dict:
    """Execute a verification campaign and return the report payload.

    Raises :class:`VerificationConfigError` (or a catalog error) on
    misconfiguration; the caller maps those to exit status 2.
    """
    catalog, digest = load_catalog(config.catalog)
    entries = select_entries(catalog, config.id_filter)
    if not entries:
        raise VerificationConfigError(
            f"no identities matched {config.id_filter!r}")
    reports = verify_many(entries, grid=config.grid(),
                          tolerance=config.tolerance, seed=config.seed,
                          jobs=config.jobs)
    n_pass = sum(1 for r in reports if r.passed)
    finite_max = [r.max_rel for r in reports
                  if r.samples and math.isfinite(r.max_rel)]
    payload = {
        "schema": REPORT_SCHEMA,
        "package_version": __version__,
        "catalog_version": catalog.version,
        "catalog_sha256": digest,
        "config": config.provenance(),
        "seed": config.seed,
        "summary": {
            "identities": len(reports),
            "passed": n_pass,
            "failed": len(reports) - n_pass,
            "max_rel": max(finite_max) if finite_max else None,
            "pass": n_pass == len(reports),
        },
        "reports": [r.to_json_dict() for r in reports],
    }
    return _json_clean(payload)


def _format_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True,
                      allow_nan=False) + "\n"


def _format_csv(payload: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "family", "samples", "skipped",
                     "max_rel", "median_rel", "pass"])
    for rep in payload["reports"]:
        writer.writerow([
            rep["id"], rep["family"], len(rep["samples"]),
            len(rep["skipped"]),
            "" if rep["max_rel"] is None else repr(rep["max_rel"]),
            "" if rep["median_rel"] is None else repr(rep["median_rel"]),
            "pass" if rep["pass"] else "FAIL",
        ])
    return buf.getvalue()


def _format_human(payload: dict) -> str:
    rows = [("id", "family", "samples", "skipped", "max rel", "result")]
    for rep in payload["reports"]:
        max_rel = rep["max_rel"]
        rows.append((
            rep["id"], rep["family"], str(len(rep["samples"])),
            str(len(rep["skipped"])),
            "-" if max_rel is None else f"{max_rel:.3e}",
            "pass" if rep["pass"] else "FAIL",
        ))
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w)
                               for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    s = payload["summary"]
    lines.append("")
    lines.append(
        f"{s['identities']} identities: {s['passed']} passed, "
        f"{s['failed']} failed  (tolerance {payload['config']['tolerance']:g},"
        f" seed {payload['seed']},"
        f" catalog {payload['config']['catalog']}"
        f" @ {payload['catalog_sha256'][:12]})")
    return "\n".join(lines) + "\n"


def cmd_verify(config: RunConfig) -> int:
    """Run a campaign, write the report, and map the outcome to an exit code."""
    payload = run_verify(config)
    if config.fmt == "json":
        text = _format_json(payload)
    elif config.fmt == "csv":
        text = _format_csv(payload)
    else:
        text = _format_human(payload)
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        s = payload["summary"]
        print(f"report written to {config.output}: {s['passed']}/"
              f"{s['identities']} identities passed")
    else:
        sys.stdout.write(text)
    return EXIT_OK if payload["summary"]["pass"] else EXIT_FAIL


# --------------------------------------------------------------------------
# gamma
# --------------------------------------------------------------------------

def _fmt_complex(z: complex, digits: int = 10) -> str:
    z = complex(z)
    return f"{z.real:+.{digits}e} {z.imag:+.{digits}e}i"


def cmd_gamma(term_text: str, p: int, m: float, *, r: int = 1, s: int = 2,
              t: int = 3, max_order: int = 8,
              out=None) -> int:
    """Print pole centers, orders, principal parts, and aggregated weights.

    ``term_text`` is either a full term (``cyc[uniform]{...}``, ``prod{...}``)
    or a bare factor product such as ``"dn[0]^2*dn[+1]^2"``, which is read as
    a uniform-sign cyclic summand.  Both aggregation variants are printed;
    the sign-alternating one requires even ``p`` and is marked unavailable
    otherwise.
    """

    out = out or sys.stdout
    stripped = term_text.strip()
    if not stripped.startswith(("cyc", "prod", "const")):
        stripped = "cyc[uniform]{" + stripped + "}"
    term = parse_term_text(stripped)
    if not 0.0 < m < 1.0:
        raise VerificationConfigError(f"modulus must lie in (0, 1), got {m}")
    if p < 2:
        raise VerificationConfigError(f"p must be >= 2, got {p}")
    params = {"p": p, "r": r, "s": s, "t": t, "l": 1}
    parity = term_parity(term, params)
    period_kind = "2K" if parity in ((1, 0), (0, 0)) else "4K"
    family = next(name for name, pq in FAMILY_PARITY.items() if pq == parity)
    ctx = make_context(m)
    T = (2 if period_kind == "2K" else 4) * ctx.K
    f = summand_function([(parse_expr("1"), term)], params, ctx, T)

    gs = gamma_set(f, p, ctx, period_kind=period_kind, variant="ordinary",
                   max_order=max_order)
    print(f"term: {stripped}", file=out)
    print(f"p={p}  m={m:g}  parity (P,Q)={parity}  family {family}  "
          f"period {period_kind}", file=out)
    print(f"poles in one fundamental strip (Im z = K' = {ctx.Kprime:.6f}):",
          file=out)
    print("  w  center                     order  principal part", file=out)
    for w, pd in enumerate(gs.poles):
        center = f"{pd.center.real:+.6f} {pd.center.imag:+.6f}i"
        if pd.order == 0:
            print(f"  {w}  {center:<25}     0  regular", file=out)
            continue
        for l, alpha in enumerate(pd.alphas, start=1):
            lead = f"  {w}  {center:<25}  {pd.order:>4}" if l == 1 else \
                   f"     {'':<25}      "
            print(f"{lead}  alpha_{l} = {_fmt_complex(alpha)}", file=out)
    for variant in ("ordinary", "alternating"):
        if variant == "alternating" and p % 2:
            print("gamma (alternating): n/a (requires even p)", file=out)
            continue
        g = gs if variant == "ordinary" else gamma_set(
            f, p, ctx, period_kind=period_kind, variant=variant,
            max_order=max_order)
        if not g.gammas:
            print(f"gamma ({variant}): all zero to working precision",
                  file=out)
            continue
        print(f"gamma ({variant}):", file=out)
        for l, gamma in enumerate(g.gammas, start=1):
            print(f"  gamma_{l} = {_fmt_complex(gamma)}", file=out)
    return EXIT_OK


# --------------------------------------------------------------------------
# table
# --------------------------------------------------------------------------

def _parse_int_list(spec: str) -> tuple[int, ...]:
    """``"2..8"`` or ``"2,3,5"`` (a range may carry ``:step``)."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            body, _, step_s = part.partition(":")
            lo_s, _, hi_s = body.partition("..")
            step = int(step_s) if step_s else 1
            if step < 1:
                raise VerificationConfigError(f"step must be >= 1: {part!r}")
            out.extend(range(int(lo_s), int(hi_s) + 1, step))
        else:
            out.append(int(part))
    return tuple(out)


def _parse_float_list(spec: str) -> tuple[float, ...]:
    """``"0.1,0.5"`` or ``"0.1..0.9"`` (default step 0.1, or ``:step``)."""
    out: list[float] = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            body, _, step_s = part.partition(":")
            lo_s, _, hi_s = body.partition("..")
            lo, hi = float(lo_s), float(hi_s)
            step = float(step_s) if step_s else 0.1
            if step <= 0:
                raise VerificationConfigError(f"step must be > 0: {part!r}")
            n = int(round((hi - lo) / step))
            vals = [lo + k * step for k in range(n + 1)]
            out.extend(v for v in vals if v <= hi + 1e-12)
        else:
            out.append(float(part))
    return tuple(round(v, 12) for v in out)


#: Real base points (as fractions of K) tried in turn when the incidental
#: left-hand-side evaluation of a constant identity lands near a pole.
_TABLE_X0_LADDER = (0.37, 0.53, 0.61, 0.71)


def _constant_value(spec: IdentitySpec, params: dict, ctx) -> float:
    """The x0-independent value of a constant-right-hand-side identity."""
    quad_cache: dict = {}
    last: Exception | None = None
    for frac in _TABLE_X0_LADDER:
        try:
            _, rhs = eval_identity(spec, frac * ctx.K, params, ctx,
                                   quad_cache=quad_cache)
            return float(complex(rhs).real)
        except PoleProximityError as exc:
            last = exc
    raise last  # pragma: no cover - the ladder always clears the lattice


def cmd_table(identity_id: str, p_spec: str | None, m_spec: str | None, *,
              catalog: str = "builtin", out=None) -> int:
    """Write ``id,p,r,m,constant`` rows for a constant identity.

    ``p_spec``/``m_spec`` of ``None`` fall back to the family's default p
    values and a standard modulus ladder; a spec that parses to an empty
    range is a configuration error.
    """
    out = out or sys.stdout
    cat, _ = load_catalog(catalog)
    matched = select_entries(cat, identity_id)
    if not matched:
        raise VerificationConfigError(f"no identities matched {identity_id!r}")
    if len(matched) > 1:
        raise VerificationConfigError(
            f"{identity_id!r} matched {len(matched)} identities; "
            f"table takes exactly one")
    spec = matched[0]
    if any(term.kind != "const" for _, term in spec.rhs):
        raise VerificationConfigError(
            f"{spec.id} does not have a constant right-hand side; "
            f"table requires one")
    p_values = (default_p_values(spec.family) if p_spec is None
                else _parse_int_list(p_spec))
    m_values = ((0.1, 0.3, 0.5, 0.7, 0.9) if m_spec is None
                else _parse_float_list(m_spec))
    if not p_values or not m_values:
        raise VerificationConfigError("empty p or m range")
    for m in m_values:
        if not 0.0 < m < 1.0:
            raise VerificationConfigError(
                f"modulus must lie in (0, 1), got {m}")

    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", "p", "r", "m", "constant"])
    rows = 0
    for p in p_values:
        for params in iter_param_assignments(spec, p=p):
            for m in m_values:
                ctx = make_context(m)
                try:
                    value = _constant_value(spec, dict(params), ctx)
                except (SingularCoefficientError, ConstraintError) as exc:
                    print(f"note: skipped p={p} r={params.get('r', '')} "
                          f"m={m:g}: {exc}", file=sys.stderr)
                    continue
                writer.writerow([spec.id, p, params.get("r", ""),
                                 repr(float(m)), repr(value)])
                rows += 1
    if rows == 0:
        raise VerificationConfigError(
            "no admissible (p, r, m) combinations in the requested ranges")
    return EXIT_OK


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def _default_seed() -> int:
    raw = os.environ.get(ENV_SEED)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise VerificationConfigError(
            f"environment variable {ENV_SEED} must be an integer, "
            f"got {raw!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elliptic-cyclic",
        description="Verify cyclic identities of Jacobi elliptic functions, "
                    "inspect pole data, and tabulate identity constants.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run a verification campaign")
    pv.add_argument("--catalog", default="builtin",
                    help="catalog file, or 'builtin' (default)")
    pv.add_argument("--id", default="*", dest="id_filter",
                    help="identity id glob filter (default '*')")
    pv.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                    help=f"relative tolerance (default {DEFAULT_TOLERANCE:g})")
    pv.add_argument("--seed", type=int, default=None,
                    help=f"sampling seed (default ${ENV_SEED} or 0)")
    pv.add_argument("--p", default=None,
                    help="override p values, e.g. '2..8' or '3,5,7'")
    pv.add_argument("--m", default=None,
                    help="override moduli, e.g. '0.5' or '0.1..0.9:0.2'")
    pv.add_argument("--samples", type=int, default=None,
                    help="real and complex base points per (m, p, params)")
    pv.add_argument("--jobs", type=int, default=1,
                    help="verify identities concurrently (default 1)")
    pv.add_argument("--output", "-o", default=None,
                    help="write the report here instead of stdout")
    pv.add_argument("--format", default="human", dest="fmt",
                    choices=("human", "json", "csv"),
                    help="report format (default human; json is the stable "
                         "machine interface)")

    pg = sub.add_parser("gamma", help="pole data of one cyclic summand")
    pg.add_argument("term", help="factor product, e.g. 'dn[0]^2*dn[+1]^2'")
    pg.add_argument("--p", type=int, required=True, help="number of points")
    pg.add_argument("--m", type=float, required=True, help="modulus in (0,1)")
    pg.add_argument("--r", type=int, default=1, help="value of r (default 1)")
    pg.add_argument("--s", type=int, default=2, help="value of s (default 2)")
    pg.add_argument("--t", type=int, default=3, help="value of t (default 3)")
    pg.add_argument("--max-order", type=int, default=8,
                    help="highest pole order probed (default 8)")

    pt = sub.add_parser("table",
                        help="CSV of an identity's constant over (p, m)")
    pt.add_argument("id", help="identity id (or a glob matching exactly one)")
    pt.add_argument("--catalog", default="builtin",
                    help="catalog file, or 'builtin' (default)")
    pt.add_argument("--p", default=None,
                    help="p values, e.g. '2..8' (default: family defaults)")
    pt.add_argument("--m", default=None,
                    help="moduli, e.g. '0.1..0.9' (default 0.1,0.3,...,0.9)")
    pt.add_argument("--output", "-o", default=None,
                    help="write the CSV here instead of stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the exit status."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            seed = args.seed if args.seed is not None else _default_seed()
            config = RunConfig(
                catalog=args.catalog,
                id_filter=args.id_filter,
                tolerance=args.tol,
                seed=seed,
                p_values=_parse_int_list(args.p) if args.p else None,
                moduli=_parse_float_list(args.m) if args.m else None,
                samples=args.samples,
                output=args.output,
                fmt=args.fmt,
                jobs=args.jobs,
            )
            return cmd_verify(config)
        if args.command == "gamma":
            return cmd_gamma(args.term, args.p, args.m, r=args.r, s=args.s,
                             t=args.t, max_order=args.max_order)
        if args.command == "table":
            if args.output:
                with open(args.output, "w", encoding="utf-8") as fh:
                    return cmd_table(args.id, args.p, args.m,
                                     catalog=args.catalog, out=fh)
            return cmd_table(args.id, args.p, args.m, catalog=args.catalog)
        raise AssertionError(args.command)  # pragma: no cover
    except (EllipticCyclicError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
