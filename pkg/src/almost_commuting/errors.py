"""Exception hierarchy.

Errors fall into a few families so the CLI can map them to exit codes:
structural problems with the input matrices, indices that are not defined
for the given input, and solvers that refuse or fail.
"""


class AlmostCommutingError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


# -- structural -------------------------------------------------------------

class StructuralViolation(AlmostCommutingError, ValueError):
    """Input matrices do not satisfy an exact structural constraint."""

    exit_code = 2


class NotHermitian(StructuralViolation):
    pass


class NotUnitary(StructuralViolation):
    pass


class NotSkew(StructuralViolation):
    pass


class NotSelfDual(StructuralViolation):
    pass


class NotContraction(StructuralViolation):
    pass


class NotAnnular(StructuralViolation):
    pass


class NonFinite(StructuralViolation):
    pass


class DimensionMismatch(StructuralViolation):
    pass


class TooNegative(StructuralViolation):
    pass


class OddDimension(StructuralViolation):
    pass


class KindMismatch(StructuralViolation):
    pass


class BadComponent(StructuralViolation):
    pass


# -- index undefined --------------------------------------------------------

class IndexUndefined(AlmostCommutingError):
    """The requested index is not defined (or not certified) for this input."""

    exit_code = 3


class GapCollapse(IndexUndefined):
    pass


class NearSingular(IndexUndefined):
    pass


class BranchCut(IndexUndefined):
    pass


class DeltaTooLarge(IndexUndefined):
    pass


class RoundingUnsafe(IndexUndefined):
    pass


class CommutatorTooLarge(IndexUndefined):
    pass


class UnderSampled(IndexUndefined):
    pass


class ImaginaryResidue(IndexUndefined):
    pass


# -- solvers ----------------------------------------------------------------

class SolverFailure(AlmostCommutingError):
    """A constructive solve could not produce an acceptable output."""

    exit_code = 4


class IndexNonzero(SolverFailure):
    """The input carries a nonzero index, which obstructs commuting approximants."""


class DisplacementTooLarge(SolverFailure):
    pass


# -- lattice ----------------------------------------------------------------

class InfeasibleTarget(AlmostCommutingError, ValueError):
    exit_code = 2


class FermiOnEigenvalue(IndexUndefined):
    pass


class EmptyBand(AlmostCommutingError, ValueError):
    exit_code = 3


# -- io / usage -------------------------------------------------------------

class ParseError(AlmostCommutingError, ValueError):
    """Malformed matrix or config file. ``lineno`` is 1-based."""

    exit_code = 5

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        loc = ""
        if path is not None:
            loc += f"{path}:"
        if lineno is not None:
            loc += f"{lineno}:"
        super().__init__(f"{loc} {message}" if loc else message)


class UsageError(AlmostCommutingError):
    exit_code = 2


class UnknownFlag(UsageError):
    pass


class MissingRequired(UsageError):
    pass


class BadValue(UsageError):
    pass
