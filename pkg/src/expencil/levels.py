"""Shared per-level coefficient-matching engine.

Substituting the exponential-series ansatz

    y(x, k) = sum_{alpha >= 0} phi_alpha(k) exp((i k w - alpha) x),   phi_0 = 1,

into the pencil equation and collecting the coefficient of each
exp((i k w - alpha) x) yields, for every level alpha >= 1,

    M_alpha(k) phi_alpha(k) + sum_{beta < alpha} P_{alpha-beta, beta}(k) phi_beta(k) = 0,

where M_alpha(k) = (i alpha + k w)^{2m} - k^{2m} is the shifted free symbol and
P_{h, beta}(k) collects the potential terms of harmonic h acting on level beta.
Each phi_alpha is a PolePolynomial (constant plus simple lattice poles), so the
equation splits into residue conditions at each pole and coefficient conditions
for each power of k.  Those splits are solved here level by level:

  (a) off-diagonal pole amplitudes by a single division per pole, the divisor
      being M_alpha evaluated at the pole;
  (b) the constant part from the k^{2m-1} coefficient (leading coefficient
      2m i alpha w^{2m-1}, never zero);
  (c) the diagonal pole amplitudes from the (2m-1) x (2m-1) system formed by
      the remaining coefficient rows, whose matrix entries come from
      quotient_main (the divisor vanishes at the diagonal pole, so those
      amplitudes enter only polynomially).

The same engine serves the adjoint equation: the carrier direction is flipped
(w = -w_s = w_{(s+m) mod 2m}) and the potential multiplier uses the target
level instead of the source level, because (-1)^gamma (d/dx)^gamma [p Z]
applies the full gamma derivatives to the already-shifted exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    ComplexPolynomial,
    PolePolynomial,
    affine_power,
    level_symbol,
    pp_mul_split,
    quotient_main,
    symbol_at_pole,
)
from .errors import Resonance, SingularLevel
from .model import PotentialCoefficients, omega

__all__ = [
    "RESONANCE_TOL",
    "LevelSolution",
    "potential_level_polynomial",
    "assemble_level_rhs",
    "solve_level",
    "phi_from_level",
    "advance_level",
]

#: Absolute tolerance below which an off-diagonal divisor counts as resonant.
RESONANCE_TOL = 1e-10


@dataclass
class LevelSolution:
    """Solved unknowns of one (level, direction) pair."""

    alpha: int
    pole_row: dict          # (n, j) -> amplitude, n < alpha
    constant: complex       # polynomial part of phi_alpha
    diagonal: dict          # j -> amplitude of the (alpha, j) pole


def potential_level_polynomial(pot: PotentialCoefficients, h: int, *, const: complex,
                               slope: complex) -> ComplexPolynomial:
    """P(k) = sum_{gamma, s} p[gamma, s, h] k^s (const + slope k)^gamma.

    ``const``/``slope`` encode the derivative symbol of the exponential the
    potential term acts on: (i k w - beta) in the direct equation (source
    level beta), (alpha - i k w) in the adjoint one (target level alpha).
    """
    total = ComplexPolynomial.zero()
    for (gamma, s), value in pot.harmonic_slice(h).items():
        term = affine_power(const, slope, gamma) * ComplexPolynomial.monomial(s)
        total = total + term.scale(value)
    return total


def assemble_level_rhs(m: int, dir_idx: int, alpha: int, phis: list,
                       pot: PotentialCoefficients, kind: str = "forward",
                       ) -> PolePolynomial:
    """sum_{beta < alpha} P_{alpha - beta, beta}(k) phi_beta(k) as a PolePolynomial.

    ``phis`` holds the already-solved phi_beta for beta = 0..alpha-1 in the
    (m, dir_idx) pole context.  ``kind`` selects the derivative symbol:
    "forward" uses the source level, "adjoint" the target level with the
    opposite spectral slope.
    """
    w = omega(m, dir_idx)
    rhs = PolePolynomial(m, dir_idx)
    for beta in range(alpha):
        h = alpha - beta
        if h > pot.max_harmonic:
            continue
        if kind == "forward":
            p_poly = potential_level_polynomial(pot, h, const=-beta, slope=1j * w)
        elif kind == "adjoint":
            p_poly = potential_level_polynomial(pot, h, const=alpha, slope=-1j * w)
        else:
            raise ValueError(f"unknown equation kind {kind!r}")
        if p_poly.is_zero():
            continue
        rhs = rhs + pp_mul_split(phis[beta], p_poly)
    return rhs


def solve_level(m: int, dir_idx: int, alpha: int, rhs: PolePolynomial,
                resonance_tol: float = RESONANCE_TOL) -> LevelSolution:
    """Solve one level's unknowns from the assembled right-hand side."""
    two_m = 2 * m
    w = omega(m, dir_idx)

    # (a) off-diagonal pole amplitudes: M_alpha(pole) * V + rhs residue = 0
    pole_row: dict = {}
    for (n, j), b in rhs.poles.items():
        divisor = symbol_at_pole(m, n, j, alpha)
        if abs(divisor) < resonance_tol:
            raise Resonance(
                f"divisor at pole (n={n}, j={j}) of level {alpha} is {abs(divisor):.2e}",
                n=n, j=j)
        pole_row[(n, j)] = -b / divisor

    # (b) constant part from the k^(2m-1) coefficient; only the free symbol
    # reaches that degree, with coefficient 2m * i * alpha * w^(2m-1)
    lead = two_m * 1j * alpha * w ** (two_m - 1)
    constant = -rhs.poly.coeff(two_m - 1) / lead

    # (c) diagonal amplitudes from coefficient rows gamma = 0..2m-2
    symbol = level_symbol(m, alpha, dir_idx)
    quotients = {(n, j): quotient_main(m, n, j, dir_idx, alpha) for (n, j) in pole_row}
    diag_quotients = [quotient_main(m, alpha, j, dir_idx, alpha) for j in range(1, two_m)]
    mat = np.zeros((two_m - 1, two_m - 1), dtype=complex)
    vec = np.zeros(two_m - 1, dtype=complex)
    for gamma in range(two_m - 1):
        for col, q in enumerate(diag_quotients):
            mat[gamma, col] = q.coeff(gamma)
        acc = rhs.poly.coeff(gamma) + symbol.coeff(gamma) * constant
        for key, amp in pole_row.items():
            acc += quotients[key].coeff(gamma) * amp
        vec[gamma] = -acc
    cond = np.linalg.cond(mat) if np.all(np.isfinite(mat)) else np.inf
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularLevel(
            f"diagonal system at level {alpha}, direction {dir_idx} is singular")
    solved = np.linalg.solve(mat, vec)
    diagonal = {j: complex(solved[j - 1]) for j in range(1, two_m)}
    return LevelSolution(alpha=alpha, pole_row=pole_row, constant=complex(constant),
                         diagonal=diagonal)


def phi_from_level(m: int, dir_idx: int, sol: LevelSolution) -> PolePolynomial:
    """Assemble phi_alpha from a solved level."""
    poles = dict(sol.pole_row)
    for j, amp in sol.diagonal.items():
        poles[(sol.alpha, j)] = poles.get((sol.alpha, j), 0j) + amp
    return PolePolynomial(m, dir_idx, ComplexPolynomial.constant(sol.constant), poles)


def advance_level(m: int, dir_idx: int, alpha: int, phis: list,
                  pot: PotentialCoefficients, kind: str = "forward",
                  resonance_tol: float = RESONANCE_TOL,
                  ) -> tuple[LevelSolution, PolePolynomial]:
    """Assemble, solve, and package one level; returns (solution, phi_alpha)."""
    rhs = assemble_level_rhs(m, dir_idx, alpha, phis, pot, kind)
    sol = solve_level(m, dir_idx, alpha, rhs, resonance_tol)
    return sol, phi_from_level(m, dir_idx, sol)
