"""Exception hierarchy.

Errors fall in three families, which the command line maps onto exit codes:
input/shape problems, domain problems (the parameter point or path leaves the
allowed parameter space), and numerical problems (a discretization is too
coarse or an iteration did not converge).
"""

from __future__ import annotations


class BerryError(Exception):
    """Base class for every error raised by this package."""


# -- input / contract violations -------------------------------------------


class InputError(BerryError, ValueError):
    pass


class NonHermitianInput(InputError):
    pass


class NonAntiHermitian(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class InvalidSpin(InputError):
    pass


class InvalidJ(InputError):
    pass


class BadPresetParams(InputError):
    pass


class PathNotClosed(InputError):
    pass


class UnknownBranch(InputError):
    pass


class UnknownModel(InputError):
    pass


# -- domain errors ----------------------------------------------------------


class DomainError(BerryError):
    """The computation left the allowed parameter space.

    ``node`` is the path node index when the failure happened along a path.
    """

    def __init__(self, message: str, *, node: int | None = None, point=None):
        super().__init__(message)
        self.node = node
        self.point = None if point is None else [float(x) for x in point]


class OutOfDomain(DomainError):
    pass


class DegeneracyViolation(DomainError):
    pass


class GapCollapse(DomainError):
    pass


class SubspaceJump(DomainError):
    pass


class AtAntipode(DomainError):
    pass


class OutOfPatch(DomainError):
    pass


class PatchBoundary(DomainError):
    pass


class DegenerateLoop(DomainError):
    pass


# -- numerical errors -------------------------------------------------------


class NumericalError(BerryError, ArithmeticError):
    pass


class NoConvergence(NumericalError):
    pass


class SingularInput(NumericalError):
    pass


class NonConvergent(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass


class LogBranch(NumericalError):
    pass


class ZeroSample(NumericalError):
    pass


class AliasedSampling(NumericalError):
    pass


class WindingResidual(NumericalError):
    pass
