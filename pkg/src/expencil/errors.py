"""Exception hierarchy for the expencil package.

Every failure mode that callers are expected to branch on gets its own type.
``ConfigError`` covers bad user input (CLI exit code 2), ``InconsistentData``
covers scattering data that admits no potential (exit code 4), and everything
else derived from :class:`ComputeError` is a numerical/analytic failure
(exit code 3).
"""

from __future__ import annotations


class ExpencilError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ExpencilError):
    """Malformed or out-of-bounds user input (configs, tables, indices)."""


class IndexOutOfRange(ConfigError):
    """A structural index (gamma, s, n, j, tau, sector id) is out of bounds."""


class ComputeError(ExpencilError):
    """Base class for numerical/analytic failures during a computation."""


class InvalidPole(ComputeError):
    """A pole label that does not exist on the lattice (e.g. j = 0)."""


class NotDivisible(ComputeError):
    """A polynomial division that must be exact left a large remainder."""


class Resonance(ComputeError):
    """A pole-coefficient divisor vanished at an off-diagonal entry."""

    def __init__(self, message: str, n: int | None = None, j: int | None = None):
        super().__init__(message)
        self.n = n
        self.j = j


class SingularLevel(ComputeError):
    """The diagonal linear system at some level is numerically singular."""


class NearPole(ComputeError):
    """Evaluation point within the guard distance of a lattice pole."""

    def __init__(self, message: str, n: int | None = None, j: int | None = None,
                 tau: int | None = None):
        super().__init__(message)
        self.n = n
        self.j = j
        self.tau = tau


class OnCriticalRay(ComputeError):
    """Two exponent orderings tie: k sits on a sector boundary ray."""


class ContourThroughZero(ComputeError):
    """A winding contour passed too close to a zero of the determinant."""


class PoleOnContour(ComputeError):
    """A search region comes within the guard distance of a lattice pole."""


class EigenvalueHit(ComputeError):
    """The characteristic determinant vanishes at the requested point."""


class AmbiguousResidue(ComputeError):
    """Contour residue extraction did not stabilize under radius refinement."""


class StiffnessFailure(ComputeError):
    """The ODE integrator failed to advance (step underflow or breakdown)."""


class ToleranceNotMet(ComputeError):
    """Requested accuracy is unattainable with the given integration setup."""


class InconsistentData(ExpencilError):
    """Scattering data inconsistent with any potential at the tolerance."""
