"""Exception hierarchy for the elliptic_cyclic package.

Every error raised deliberately by this package derives from
:class:`EllipticCyclicError`, so callers can catch one base class.  Subclasses
carry structured context (offending value, nearest pole, parse location, ...)
as attributes in addition to the formatted message.
"""

from __future__ import annotations


class EllipticCyclicError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EllipticCyclicError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PoleProximityError(EllipticCyclicError, ArithmeticError):
    """An evaluation point is too close to a pole of the function.

    Attributes
    ----------
    point : complex
        The offending evaluation point.
    nearest_pole : complex
        The lattice pole closest to ``point``.
    distance : float
        ``abs(point - nearest_pole)``.
    """

    def __init__(self, point: complex, nearest_pole: complex, distance: float,
                 what: str = "function") -> None:
        self.point = point
        self.nearest_pole = nearest_pole
        self.distance = distance
        super().__init__(
            f"{what} evaluated at {point} is within {distance:.3e} of the "
            f"pole at {nearest_pole}"
        )


class DenominatorZeroError(EllipticCyclicError, ZeroDivisionError):
    """A ratio of basic functions has a (near-)vanishing denominator.

    Attributes
    ----------
    ratio : str
        Two-letter code of the ratio being formed (e.g. ``"cs"``).
    denominator : str
        Name of the function in the denominator (e.g. ``"sn"``).
    value : complex
        The near-zero denominator value.
    """

    def __init__(self, ratio: str, denominator: str, value: complex) -> None:
        self.ratio = ratio
        self.denominator = denominator
        self.value = value
        super().__init__(
            f"ratio {ratio!r}: denominator {denominator} is {value!r}, "
            f"too close to zero"
        )


class NonConvergenceError(EllipticCyclicError, ArithmeticError):
    """An iterative or series computation failed to reach its target."""


class ContourRadiusError(EllipticCyclicError, ValueError):
    """A contour for Laurent-coefficient extraction encloses a second pole.

    Attributes
    ----------
    center : complex
        Centre of the offending contour.
    radius : float
        Radius of the offending contour.
    """

    def __init__(self, center: complex, radius: float, detail: str = "") -> None:
        self.center = center
        self.radius = radius
        suffix = f": {detail}" if detail else ""
        super().__init__(
            f"contour of radius {radius:.6g} about {center} is not "
            f"pole-free in its interior apart from the centre{suffix}"
        )


class SingularCoefficientError(EllipticCyclicError, ArithmeticError):
    """A closed-form coefficient is singular for the given parameters.

    Attributes
    ----------
    detail : str
        Which sub-expression became singular.
    """

    def __init__(self, detail: str) -> None:
        self.detail = detail
        super().__init__(f"singular coefficient: {detail}")


class ConstraintError(EllipticCyclicError, ValueError):
    """Parameters violate a structural constraint (e.g. parity of p)."""


class FamilyMismatchError(EllipticCyclicError, ValueError):
    """A term's periodicity signature contradicts its declared family."""


class CatalogParseError(EllipticCyclicError, ValueError):
    """A catalog file or expression failed to parse.

    Attributes
    ----------
    line, col : int
        1-based location of the failure.
    expected : str
        Human-readable description of what the parser expected.
    """

    def __init__(self, message: str, line: int, col: int, expected: str = "") -> None:
        self.line = line
        self.col = col
        self.expected = expected
        suffix = f" (expected {expected})" if expected else ""
        super().__init__(f"line {line}, col {col}: {message}{suffix}")


class CatalogSemanticError(EllipticCyclicError, ValueError):
    """A parsed catalog entry is structurally invalid (e.g. zeta on the LHS)."""


class VerificationConfigError(EllipticCyclicError, ValueError):
    """A verification run was misconfigured (e.g. no identities matched)."""
