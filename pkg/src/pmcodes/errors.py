"""Exception hierarchy shared by every module in the package."""


class PMError(Exception):
    """Base class for all errors raised by pmcodes."""


# field / matrix arithmetic
class NotPrime(PMError, ValueError):
    pass


class FieldMismatch(PMError, TypeError):
    pass


class DivisionByZero(PMError, ZeroDivisionError):
    pass


class DimensionMismatch(PMError, ValueError):
    pass


class Singular(PMError, ArithmeticError):
    pass


class IndexOutOfRange(PMError, IndexError):
    pass


class Inconsistent(PMError, ArithmeticError):
    pass


class DuplicatePoint(PMError, ValueError):
    pass


class ZeroPoint(PMError, ValueError):
    pass


class DegeneratePoints(PMError, ValueError):
    pass


# parameters and construction
class InfeasibleParameters(PMError, ValueError):
    pass


class BadFieldOverride(PMError, ValueError):
    pass


class FieldTooSmall(PMError, ValueError):
    pass


# codec usage
class WrongLength(PMError, ValueError):
    pass


class SelfHelp(PMError, ValueError):
    pass


class BadHelperCount(PMError, ValueError):
    pass


class BadNodeCount(PMError, ValueError):
    pass


class WrongBranch(PMError, ValueError):
    pass


class DependentBasis(PMError, ValueError):
    pass


class InternalCorruption(PMError, RuntimeError):
    """A constructor-checked invariant no longer holds.

    Raised when a matrix that construction proved invertible turns out
    singular, or when the distinct-lambda property is violated.
    """


class SingularRepairMatrix(InternalCorruption):
    pass


class RankDeficient(InternalCorruption):
    pass


class ShapeMismatch(PMError, ValueError):
    pass


# share files and simulation
class FieldTooSmallForBytes(PMError, ValueError):
    pass


class ShareError(PMError):
    """Base for problems with share files (CLI exit code 4)."""


class HeaderMismatch(ShareError, ValueError):
    pass


class BadShareCount(ShareError, ValueError):
    pass


class CorruptShare(ShareError, ValueError):
    pass


class ConfigError(PMError, ValueError):
    pass


class RepairBlocked(PMError):
    pass
