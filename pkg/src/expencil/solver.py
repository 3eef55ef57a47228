"""Forward solver: truncated series solutions f_tau(x, k) and their evaluation.

For each direction tau the solution is represented as

    f_tau(x, k) = exp(i k w_tau x) * ( 1 + sum_{alpha=1..A} C_alpha(k) exp(-alpha x) ),

    C_alpha(k) = V_poly[tau, alpha]
               + sum_{j, n <= alpha} V_pole[tau, j, n, alpha] / (i n + k w_tau (1 - w_j)),

with the tables produced level by level through the coefficient-matching
engine.  Evaluation is meromorphic in k with simple poles on the tau-lattice;
a guard disk around each pole routes callers to residue_at_pole instead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NearPole
from .levels import RESONANCE_TOL, advance_level
from .model import PoleLattice, PotentialCoefficients, omega, pole_k
from .algebra import PolePolynomial

__all__ = [
    "SolutionCoefficients",
    "solve_coefficients",
    "combined_coefficient",
    "eval_solution",
    "residue_at_pole",
    "SeriesDiagnostics",
    "series_diagnostics",
]

log = logging.getLogger("expencil.solver")


@dataclass
class SolutionCoefficients:
    """Solved series tables for all 2m directions up to truncation level A.

    ``vpoly[tau, alpha]`` holds the constant part of C_alpha (alpha >= 1) and
    ``vpole[tau, j-1, n, alpha]`` the amplitude of the (n, j) lattice pole;
    entries with n > alpha are structurally zero.
    """

    m: int
    truncation: int
    vpoly: np.ndarray
    vpole: np.ndarray
    fingerprint: str = ""

    def effective_direction(self, tau: int) -> int:
        """Index of the omega actually multiplying k in the tau-th carrier."""
        return tau

    def v_poly(self, tau: int, alpha: int) -> complex:
        return complex(self.vpoly[tau, alpha])

    def v_pole(self, tau: int, n: int, j: int, alpha: int) -> complex:
        return complex(self.vpole[tau, j - 1, n, alpha])


def _store_level(table, tau: int, sol) -> None:
    table.vpoly[tau, sol.alpha] = sol.constant
    for (n, j), amp in sol.pole_row.items():
        table.vpole[tau, j - 1, n, sol.alpha] = amp
    for j, amp in sol.diagonal.items():
        table.vpole[tau, j - 1, sol.alpha, sol.alpha] = amp


def _solve_series(pot: PotentialCoefficients, truncation: int, cls, kind: str,
                  resonance_tol: float):
    """Run the level engine for all 2m directions into a table of class cls."""
    m = pot.m
    two_m = 2 * m
    table = cls(
        m=m,
        truncation=truncation,
        vpoly=np.zeros((two_m, truncation + 1), dtype=complex),
        vpole=np.zeros((two_m, two_m - 1, truncation + 1, truncation + 1), dtype=complex),
        fingerprint=pot.fingerprint(),
    )
    for tau in range(two_m):
        dir_idx = table.effective_direction(tau)
        phis = [PolePolynomial.constant(m, dir_idx, 1.0)]
        for alpha in range(1, truncation + 1):
            sol, phi = advance_level(m, dir_idx, alpha, phis, pot, kind, resonance_tol)
            _store_level(table, tau, sol)
            phis.append(phi)
        log.debug("%s direction %d solved to level %d", kind, tau, truncation)
    return table


def solve_coefficients(pot: PotentialCoefficients, truncation: int = 25,
                       resonance_tol: float = RESONANCE_TOL) -> SolutionCoefficients:
    """Solve the level recurrences for all directions up to the truncation."""
    if truncation < 1:
        raise ValueError(f"truncation must be >= 1, got {truncation}")
    return _solve_series(pot, truncation, SolutionCoefficients, "forward", resonance_tol)


# ---------------------------------------------------------------------------
# Evaluation


def combined_coefficient(table, tau: int, alpha: int, k):
    """C_alpha(k): constant part plus all lattice-pole terms, array-aware in k."""
    m = table.m
    dir_idx = table.effective_direction(tau)
    w = omega(m, dir_idx)
    k = np.asarray(k, dtype=complex)
    if alpha == 0:
        return np.ones(k.shape, dtype=complex) if k.shape else 1.0 + 0j
    total = np.full(k.shape, table.vpoly[tau, alpha], dtype=complex) if k.shape \
        else complex(table.vpoly[tau, alpha])
    for j in range(1, 2 * m):
        lam = w * (1 - omega(m, j))
        for n in range(1, alpha + 1):
            amp = table.vpole[tau, j - 1, n, alpha]
            if amp != 0:
                total = total + amp / (1j * n + k * lam)
    return total


def _check_pole_guard(table, tau: int, k) -> None:
    m = table.m
    dir_idx = table.effective_direction(tau)
    lattice = PoleLattice(m)
    guard = lattice.guard()
    kk = np.atleast_1d(np.asarray(k, dtype=complex))
    for j in range(1, 2 * m):
        u = lattice.ray(j, dir_idx)
        steps = np.clip(np.round((kk * np.conj(u)).real / abs(u) ** 2),
                        1, table.truncation)
        dist = np.abs(kk - steps * u)
        bad = np.nonzero(dist < guard)[0]
        if bad.size:
            i = int(bad[0])
            raise NearPole(
                f"k = {complex(kk[i])} is within {guard:.3e} of lattice pole "
                f"(n={int(steps[i])}, j={j}) of direction {tau}",
                n=int(steps[i]), j=j, tau=tau)


def _eval_series(table, tau: int, x, k, d: int) -> complex | np.ndarray:
    m = table.m
    if not 0 <= d <= 2 * m:
        raise ValueError(f"derivative order d must be in [0, {2 * m}], got {d}")
    _check_pole_guard(table, tau, k)
    w = omega(m, table.effective_direction(tau))
    x_arr = np.asarray(x, dtype=float)
    k_arr = np.asarray(k, dtype=complex)
    shape = np.broadcast(x_arr, k_arr).shape
    out = np.zeros(shape, dtype=complex)
    mu = 1j * k_arr * w
    for alpha in range(table.truncation + 1):
        coeff = combined_coefficient(table, tau, alpha, k_arr)
        rate = mu - alpha
        term = coeff * np.exp(rate * x_arr)
        if d:
            term = term * rate ** d
        out = out + term
    if shape == ():
        return complex(out)
    return out


def eval_solution(table: SolutionCoefficients, tau: int, x, k, d: int = 0):
    """d-th x-derivative of the truncated f_tau; broadcasts over x and k."""
    return _eval_series(table, tau, x, k, d)


def residue_at_pole(table, tau: int, n: int, j: int, x, d: int = 0):
    """Residue in k of the d-th x-derivative at the lattice pole (n, j).

    Read directly off the series: each pole term contributes its amplitude
    divided by the divisor slope, carried by the exponential whose rate is
    i k w - alpha frozen at the pole (i k[n,j,tau] w_tau = i n / (1 - w_j)).
    """
    m = table.m
    dir_idx = table.effective_direction(tau)
    if not (1 <= j <= 2 * m - 1 and 1 <= n <= table.truncation):
        raise ValueError(f"(n={n}, j={j}) is not a stored lattice pole")
    w = omega(m, dir_idx)
    slope = w * (1 - omega(m, j))
    mu_star = 1j * pole_k(m, n, j, dir_idx) * w
    x_arr = np.asarray(x, dtype=float)
    out = np.zeros(x_arr.shape, dtype=complex)
    for alpha in range(n, table.truncation + 1):
        amp = table.vpole[tau, j - 1, n, alpha]
        if amp == 0:
            continue
        rate = mu_star - alpha
        term = amp * np.exp(rate * x_arr)
        if d:
            term = term * rate ** d
        out = out + term
    out = out / slope
    if x_arr.shape == ():
        return complex(out)
    return out


# ---------------------------------------------------------------------------
# Convergence diagnostics


@dataclass
class SeriesDiagnostics:
    """Weighted tail sums of the solved tables and their decay behaviour.

    The three sums per direction are sum alpha^{2m-1} (alpha - n) |V_pole| / n
    (off-diagonal), sum alpha^{2m-1} |V_diag|, and sum alpha^{2m} |V_poly|.
    ``tail_ratio`` compares summed increments of the last quartile of levels
    against the preceding quartile; geometric decay gives a ratio well below 1.
    """

    sums: np.ndarray            # (2m, 3)
    increments: np.ndarray      # (2m, 3, A+1)
    tail_ratio: np.ndarray      # (2m, 3)
    decaying: bool = field(default=False)

    @property
    def max_tail_ratio(self) -> float:
        finite = self.tail_ratio[np.isfinite(self.tail_ratio)]
        return float(finite.max()) if finite.size else 0.0


def series_diagnostics(table) -> SeriesDiagnostics:
    m, A = table.m, table.truncation
    two_m = 2 * m
    inc = np.zeros((two_m, 3, A + 1))
    for tau in range(two_m):
        for alpha in range(1, A + 1):
            off = diag = 0.0
            for j in range(1, two_m):
                for n in range(1, alpha):
                    off += (alpha - n) / n * abs(table.vpole[tau, j - 1, n, alpha])
                diag += abs(table.vpole[tau, j - 1, alpha, alpha])
            inc[tau, 0, alpha] = alpha ** (two_m - 1) * off
            inc[tau, 1, alpha] = alpha ** (two_m - 1) * diag
            inc[tau, 2, alpha] = alpha ** two_m * abs(table.vpoly[tau, alpha])
    sums = inc.sum(axis=2)
    quarter = max(1, A // 4)
    last = inc[:, :, A - quarter + 1: A + 1].sum(axis=2)
    prev = inc[:, :, A - 2 * quarter + 1: A - quarter + 1].sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(prev > 0, last / np.where(prev > 0, prev, 1.0),
                         np.where(last > 0, np.inf, 0.0))
    return SeriesDiagnostics(sums=sums, increments=inc, tail_ratio=ratio,
                             decaying=bool(np.all(ratio[np.isfinite(ratio)] < 1.0)))
