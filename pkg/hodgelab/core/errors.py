"""Exception types raised by hodgelab.

Every domain failure derives from :class:`HodgeLabError` (a ``ValueError``),
so callers can catch bad input in one place. Failures to *certify* a
result derive from ``RuntimeError`` instead.
"""

from __future__ import annotations


class HodgeLabError(ValueError):
    """Base class for invalid input or unmet mathematical preconditions."""


# -- exact arithmetic -------------------------------------------------------


class ReducibleMinpoly(HodgeLabError):
    """The defining polynomial factors over Q."""


class UnsupportedDegree(HodgeLabError):
    """Field or polynomial degree outside the supported range."""


class InvalidInvolution(HodgeLabError):
    """conj_image does not define an order-two field automorphism."""


class AmbiguousEmbedding(HodgeLabError):
    """The isolating box holds zero or several roots."""


class IncompatibleConjugation(HodgeLabError):
    """conj does not match complex conjugation under the embedding."""


class MissingEmbedding(HodgeLabError):
    """A sign or enclosure was requested in a field without an embedding."""


class FieldMismatch(HodgeLabError):
    """Operands live in different fields."""


class DivisionByZero(HodgeLabError, ZeroDivisionError):
    """Division by the zero element."""


class NotRealElement(HodgeLabError):
    """A sign was requested for an element with conj(x) != x."""


class AlreadySquare(HodgeLabError):
    """The element already has a square root in the base field."""


class ZeroDiscriminant(HodgeLabError):
    """A quadratic extension by zero was requested."""


class SignUndecided(RuntimeError):
    """Interval refinement hit its step cap without deciding a sign."""


# -- lattices ---------------------------------------------------------------


class NonSymmetricGram(HodgeLabError):
    """Gram matrix is not square and symmetric."""


class DependentBasis(HodgeLabError):
    """Sublattice basis vectors are linearly dependent."""


class NonIntegralAmbient(HodgeLabError):
    """Saturation needs an integer-valued Gram matrix."""


class NonIntegralClass(HodgeLabError):
    """A class that must lie in the integral lattice has a denominator."""


class NonIsotropicClass(HodgeLabError):
    """The extension class is not isotropic (d != 0)."""


# -- Hodge structures -------------------------------------------------------


class ZeroPeriod(HodgeLabError):
    """The period vector is zero."""


class NotIsotropic(HodgeLabError):
    """(sigma.sigma) != 0."""


class NotPositive(HodgeLabError):
    """(sigma.conj(sigma)) is not positive."""


class WrongSignature(HodgeLabError):
    """The lattice signature is not (2, r-2, 0)."""

    def __init__(self, message: str, suggestions: list | None = None) -> None:
        super().__init__(message)
        self.suggestions = suggestions or []


class NotIrreducible(HodgeLabError):
    """The transcendental lattice of the base period is a proper subspace."""


class NotAField(HodgeLabError):
    """The endomorphism algebra is not commutative or has zero divisors."""


class NotInAlgebra(HodgeLabError):
    """The matrix is not in the span of the algebra basis."""


# -- brilliant families -----------------------------------------------------


class NotOnConic(HodgeLabError):
    """(sigma.sigma) != 0 for a proposed family point."""


class NotTwistorType(HodgeLabError):
    """Operation only makes sense for d > 0."""


class NotBrauerType(HodgeLabError):
    """Operation only makes sense for d = 0."""


class NotNLPoint(HodgeLabError):
    """The point is not in the Noether-Lefschetz locus."""


class WrongComponent(HodgeLabError):
    """The d = 0 point lies on the conjugate line."""


# -- two-class families -----------------------------------------------------


class NonPositiveD(HodgeLabError):
    """Two-class families need d > 0."""


class InvalidConnector(HodgeLabError):
    """Base class for connector condition failures."""


class NotPositiveSquare(InvalidConnector):
    """(l'.l') <= 0."""


class NotPositiveWithF(InvalidConnector):
    """(l'.f) <= 0."""


class InSpanOfClasses(InvalidConnector):
    """l' has no component in T."""


class NoIntersectionInChart(HodgeLabError):
    """Only chart-excluded solutions exist."""


class PointIsSigmaZero(HodgeLabError):
    """The base period itself was passed where a deformation is needed."""


class SOutOfRange(HodgeLabError):
    """Specialization parameter outside [0, 1)."""


class UnsupportedTower(HodgeLabError):
    """A second quadratic extension layer would be needed."""


# -- CM propagation ---------------------------------------------------------


class BaseNotCM(HodgeLabError):
    """The base structure is not of CM type."""


class EmbeddingMissing(HodgeLabError):
    """No copy of the base K0 was found in the fiber algebra."""


class NotCMField(HodgeLabError):
    """The field is not a CM field."""


# -- fixtures and CLI -------------------------------------------------------


class ParseError(HodgeLabError):
    """Malformed fixture or command-line value."""


class ValidationError(HodgeLabError):
    """A fixture parsed but describes an invalid structure."""


class UnknownCommand(HodgeLabError):
    """Dispatch got a command it does not know."""


class MissingFlag(HodgeLabError):
    """A required flag for the command was not given."""


class CertificateFailure(RuntimeError):
    """Two independent code paths disagree on a checked fact."""
