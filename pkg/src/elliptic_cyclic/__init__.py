"""Cyclic identities for Jacobi elliptic functions.

A library and CLI that

* evaluates Jacobi elliptic functions and their relatives on real and complex
  arguments (:mod:`~elliptic_cyclic.elliptic_core`,
  :mod:`~elliptic_cyclic.jacobi_fn`),
* ships a machine-readable catalog of cyclic-sum identities — sums of shifted
  products like ``sum_j dn(x_j) dn(x_{j+r})`` over equally spaced points
  ``x_j = x0 + (j-1) T/p`` — with closed-form right-hand sides
  (:mod:`~elliptic_cyclic.catalog`),
* verifies every catalog entry numerically on configurable grids
  (:mod:`~elliptic_cyclic.cyclic_engine`), and
* independently *predicts* each identity class from first principles, by
  extracting pole data with contour integration and resumming with nome
  series (:mod:`~elliptic_cyclic.master_engine`), plus modulus/argument
  transforms that map entries to new identities
  (:mod:`~elliptic_cyclic.transforms`).
"""

from __future__ import annotations

from .elliptic_core import (
    ModulusContext,
    amplitude,
    complete_E,
    complete_K,
    incomplete_E,
    incomplete_F,
    jacobi_zeta_u,
    make_context,
    nome,
)
from .jacobi_fn import (
    AUX_CODES,
    JacobiTriple,
    aux_ratio,
    eval_fn,
    jacobi_zeta,
    sncndn_complex,
    sncndn_real,
    theta,
    theta_dz,
    weierstrass_P,
    weierstrass_P_prime,
    weierstrass_invariants,
)
from .errors import (
    CatalogParseError,
    CatalogSemanticError,
    ConstraintError,
    ContourRadiusError,
    DenominatorZeroError,
    DomainError,
    EllipticCyclicError,
    FamilyMismatchError,
    NonConvergenceError,
    PoleProximityError,
    SingularCoefficientError,
    VerificationConfigError,
)
from .catalog import (
    CatalogFile,
    IdentitySpec,
    builtin_corpus,
    corpus_sha256,
    default_p_values,
    iter_param_assignments,
    parse_catalog,
    print_catalog,
)
from .cyclic_engine import (
    DEFAULT_TOLERANCE,
    SampleGrid,
    SampleResult,
    VerificationReport,
    eval_cyclic_sum,
    eval_identity,
    verify,
    verify_many,
)
from .master_engine import (
    ARCHETYPAL_KINDS,
    GammaSet,
    PoleData,
    archetypal,
    archetypal_direct,
    default_k_max,
    extract_alphas,
    gamma_set,
    poisson_check,
    pole_sites,
    predict,
    predict_entry,
)
from .transforms import (
    RATIO_IDS,
    TRANSFORM_KINDS,
    PairSumCheck,
    RatioFormula,
    ThetaForm,
    TransformedIdentity,
    WeierstrassForm,
    applicable_entries,
    complex_shift,
    double_imaginary_shift,
    half_period_products,
    imaginary_shift,
    is_applicable,
    ratio_expand,
    ratio_pair_sum,
    ratio_pair_sum_constant,
    ratio_shifted_form,
    theta_form,
    weierstrass_form,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # modulus context and basic integrals
    "ModulusContext",
    "make_context",
    "complete_K",
    "complete_E",
    "nome",
    "amplitude",
    "incomplete_F",
    "incomplete_E",
    "jacobi_zeta_u",
    # function evaluation
    "JacobiTriple",
    "AUX_CODES",
    "sncndn_real",
    "sncndn_complex",
    "aux_ratio",
    "eval_fn",
    "jacobi_zeta",
    "theta",
    "theta_dz",
    "weierstrass_P",
    "weierstrass_P_prime",
    "weierstrass_invariants",
    # errors
    "EllipticCyclicError",
    "DomainError",
    "PoleProximityError",
    "DenominatorZeroError",
    "NonConvergenceError",
    "ContourRadiusError",
    "SingularCoefficientError",
    "ConstraintError",
    "FamilyMismatchError",
    "CatalogParseError",
    "CatalogSemanticError",
    "VerificationConfigError",
    # catalog
    "CatalogFile",
    "IdentitySpec",
    "builtin_corpus",
    "corpus_sha256",
    "parse_catalog",
    "print_catalog",
    "default_p_values",
    "iter_param_assignments",
    # grid verification
    "DEFAULT_TOLERANCE",
    "SampleGrid",
    "SampleResult",
    "VerificationReport",
    "eval_cyclic_sum",
    "eval_identity",
    "verify",
    "verify_many",
    # pole-data prediction
    "PoleData",
    "GammaSet",
    "ARCHETYPAL_KINDS",
    "extract_alphas",
    "gamma_set",
    "pole_sites",
    "archetypal",
    "archetypal_direct",
    "default_k_max",
    "predict",
    "predict_entry",
    "poisson_check",
    # transforms
    "TRANSFORM_KINDS",
    "TransformedIdentity",
    "imaginary_shift",
    "complex_shift",
    "double_imaginary_shift",
    "is_applicable",
    "applicable_entries",
    "RATIO_IDS",
    "RatioFormula",
    "ratio_expand",
    "ratio_shifted_form",
    "ratio_pair_sum",
    "ratio_pair_sum_constant",
    "PairSumCheck",
    "WeierstrassForm",
    "weierstrass_form",
    "ThetaForm",
    "theta_form",
    "half_period_products",
]
