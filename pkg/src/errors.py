"""Error types raised across the package.

All of them derive from ValueError, so callers validating input with
``except ValueError`` keep working.
"""


class BfconeError(ValueError):
    """Base class for every error raised by the verification engine."""


# indefinite hermitian algebra
class NotHermitian(BfconeError):
    pass


class AmbiguousSpectrum(BfconeError):
    pass


class DegenerateMinimalPoly(BfconeError):
    pass


class OnDomainBoundary(BfconeError):
    pass


class NotOrthogonal(BfconeError):
    pass


# polynomials and jets
class ZeroPolynomial(BfconeError):
    pass


class DomainError(BfconeError):
    pass


# cone geometry and curvature
class OutsideDomain(BfconeError):
    pass


class NotPositiveDefinite(BfconeError):
    pass


class NotInvariant(BfconeError):
    pass


class SingularSystem(BfconeError):
    pass


# families
class NearPole(BfconeError):
    pass


class SpecViolation(BfconeError):
    pass


class EmptyDomain(BfconeError):
    pass


class UnsupportedCase(BfconeError):
    pass


class BadParams(BfconeError):
    pass


class NoConvergence(BfconeError):
    pass


# polynomial machinery on the cone
class WrongCase(BfconeError):
    pass


class NearCollision(BfconeError):
    pass


# catalog
class UnknownId(BfconeError):
    pass


class IncompatibleCase(BfconeError):
    pass
