"""Adjoint solver: series solutions of the formally adjoint pencil.

The adjoint equation

    (-1)^m Z^(2m)(x) + sum_gamma (-1)^gamma [p_gamma(x, k) Z]^(gamma) = k^{2m} Z

has, for each s, a solution with reversed carrier

    phi_s(x, k) = exp(-i k w_s x) * ( 1 + sum_alpha C_alpha(k) exp(-alpha x) ),

so its effective spectral direction is -w_s = w_{(s+m) mod 2m} and the pole
denominators become i n - k w_s (1 - w_j).  The same level engine applies with
two changes relative to the direct equation: the carrier index is shifted by m,
and the potential multiplier is (alpha - i k w_eff)^gamma with the *target*
level alpha — expanding (-1)^gamma (d/dx)^gamma [p_gamma Z] by Leibniz, every
term carries the full exponent of the already-shifted exponential, and the
binomial sum collapses because harmonic plus source level equals alpha.

These phi_s are what the resolvent kernel pairs against the direct solutions:
the bilinear identity

    sum_s i w_s phi_s(x, k) f_s^(j)(x, k) = (-1)^m 2m k^{2m-1} delta_{j, 2m-1}

holds identically in x and pins every constant in the kernel construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .levels import RESONANCE_TOL
from .model import PotentialCoefficients
from .solver import SolutionCoefficients, _eval_series, _solve_series

__all__ = ["AdjointCoefficients", "solve_adjoint_coefficients", "eval_adjoint"]


@dataclass
class AdjointCoefficients(SolutionCoefficients):
    """Series tables of the adjoint solutions phi_s, s = 0..2m-1.

    Storage layout matches SolutionCoefficients; the only behavioural
    difference is the direction map: index s evaluates along
    w_{(s+m) mod 2m} = -w_s.
    """

    def effective_direction(self, s: int) -> int:
        return (s + self.m) % (2 * self.m)


def solve_adjoint_coefficients(pot: PotentialCoefficients, truncation: int = 25,
                               resonance_tol: float = RESONANCE_TOL,
                               ) -> AdjointCoefficients:
    """Solve the adjoint level recurrences for all 2m carriers."""
    if truncation < 1:
        raise ValueError(f"truncation must be >= 1, got {truncation}")
    return _solve_series(pot, truncation, AdjointCoefficients, "adjoint", resonance_tol)


def eval_adjoint(table: AdjointCoefficients, s: int, x, k, d: int = 0):
    """d-th x-derivative of the truncated phi_s; broadcasts over x and k."""
    return _eval_series(table, s, x, k, d)
