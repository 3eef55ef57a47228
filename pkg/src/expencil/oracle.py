"""Brute-force verification: direct ODE integration and residual evaluation.

This module deliberately shares nothing with the series solvers beyond the
coefficient tables themselves: solutions are produced by integrating the
2m-dimensional first-order companion system downward from a point x_far where
the potential has decayed below tolerance, starting on the pure exponential
carrier.  Downward integration is the stable direction for carriers that decay
as x -> +infinity; for a carrier with decay rate below the sector maximum, the
mismatch delta = max_l Im(k w_l) - Im(k w_tau) amplifies the injected local
error by roughly exp(delta * x_far), which callers should budget for when
choosing rtol.

The residual evaluators implement the pencil and its formal adjoint literally,
term by term, so they double as an arbiter for any sign or constant dispute in
the assembled recurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StiffnessFailure, ToleranceNotMet
from .model import PotentialCoefficients, eval_coefficient, omega

__all__ = [
    "OdeSample",
    "residual_l",
    "residual_adjoint",
    "integrate_ode",
    "integrate_adjoint_ode",
    "ErrorReport",
    "compare",
]


@dataclass
class OdeSample:
    """Integrated solution values on a grid.

    ``values[d]`` holds the d-th derivative, d = 0..2m-1, on the ascending
    grid ``x``.  ``top_derivative`` evaluates the 2m-th derivative through the
    companion right-hand side at a grid point, for self-consistency checks.
    """

    x: np.ndarray
    values: np.ndarray
    k: complex
    direction: int
    rtol: float
    stats: dict = field(default_factory=dict)
    _rhs: object = None

    def evaluator(self):
        """(x, d) -> value lookup at grid points, usable by the residual evaluators."""
        def ev(x: float, d: int) -> complex:
            i = int(np.argmin(np.abs(self.x - x)))
            if d < self.values.shape[0]:
                return complex(self.values[d, i])
            y = self.values[:, i]
            return complex(self._rhs(self.x[i], y)[-1])
        return ev


def residual_l(pot: PotentialCoefficients, evaluator, x: float, k: complex) -> complex:
    """l(f)(x, k) = (-1)^m f^(2m) + sum_gamma p_gamma(x,k) f^(gamma) - k^{2m} f.

    ``evaluator(x, d)`` must supply derivatives up to order 2m.
    """
    m = pot.m
    total = (-1) ** m * evaluator(x, 2 * m) - k ** (2 * m) * evaluator(x, 0)
    for gamma in range(2 * m - 1):
        p = eval_coefficient(pot, gamma, x, k)
        if p != 0:
            total += p * evaluator(x, gamma)
    return total


def _coeff_x_derivative(pot: PotentialCoefficients, gamma: int, r: int, x: float,
                        k: complex) -> complex:
    """r-th x-derivative of p_gamma(x, k)."""
    total = 0j
    for (g, s, n), value in pot.table.items():
        if g == gamma:
            total += value * k ** s * (-n) ** r * math.exp(-n * x)
    return total


def residual_adjoint(pot: PotentialCoefficients, evaluator, x: float,
                     k: complex) -> complex:
    """Adjoint residual (-1)^m Z^(2m) + sum_gamma (-1)^gamma [p_gamma Z]^(gamma) - k^{2m} Z.

    The product derivative is expanded by Leibniz, so the evaluator only needs
    Z-derivatives up to order 2m.
    """
    m = pot.m
    total = (-1) ** m * evaluator(x, 2 * m) - k ** (2 * m) * evaluator(x, 0)
    for gamma in range(2 * m - 1):
        for r in range(gamma + 1):
            p_r = _coeff_x_derivative(pot, gamma, r, x, k)
            if p_r != 0:
                total += (-1) ** gamma * math.comb(gamma, r) * p_r \
                    * evaluator(x, gamma - r)
    return total


def _companion_rhs(pot: PotentialCoefficients, k: complex, adjoint: bool):
    """First-order system y' = F(x, y), y = (f, f', ..., f^(2m-1))."""
    m = pot.m
    two_m = 2 * m
    sign = (-1) ** m
    k2m = k ** two_m

    if not adjoint:
        def rhs(x, y):
            top = k2m * y[0]
            for gamma in range(two_m - 1):
                p = eval_coefficient(pot, gamma, x, k)
                if p != 0:
                    top -= p * y[gamma]
            out = np.empty(two_m, dtype=complex)
            out[:-1] = y[1:]
            out[-1] = sign * top
            return out
    else:
        def rhs(x, y):
            top = k2m * y[0]
            for gamma in range(two_m - 1):
                for r in range(gamma + 1):
                    p_r = _coeff_x_derivative(pot, gamma, r, x, k)
                    if p_r != 0:
                        top -= (-1) ** gamma * math.comb(gamma, r) * p_r * y[gamma - r]
            out = np.empty(two_m, dtype=complex)
            out[:-1] = y[1:]
            out[-1] = sign * top
            return out
    return rhs


def _integrate(pot: PotentialCoefficients, k: complex, idx: int, mu: complex,
               x_far: float, grid, rtol: float, atol: float, adjoint: bool,
               ) -> OdeSample:
    m = pot.m
    two_m = 2 * m
    tail = pot.norm_weight * math.exp(-x_far)
    if tail > rtol:
        raise ToleranceNotMet(
            f"potential tail {tail:.2e} at x_far={x_far} exceeds rtol={rtol:.2e}; "
            "increase x_far")
    if grid is None:
        grid = np.linspace(0.0, 5.0, 26)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[-1] >= x_far:
        raise ValueError("grid must end below x_far")
    rhs = _companion_rhs(pot, k, adjoint)
    # integrate the carrier-normalized solution (value 1 at x_far) downward
    y0 = np.array([mu ** d for d in range(two_m)], dtype=complex)
    sol = solve_ivp(rhs, (x_far, grid[0]), y0, method="DOP853",
                    t_eval=grid[::-1], rtol=rtol, atol=atol)
    if not sol.success or sol.y.shape[1] != grid.size:
        raise StiffnessFailure(f"integration failed: {sol.message}")
    values = sol.y[:, ::-1] * np.exp(mu * x_far)
    if not np.all(np.isfinite(values)):
        raise StiffnessFailure("integration produced non-finite values")
    return OdeSample(x=grid, values=values, k=k, direction=idx, rtol=rtol,
                     stats={"nfev": int(sol.nfev), "status": int(sol.status)},
                     _rhs=rhs)


def integrate_ode(pot: PotentialCoefficients, k: complex, tau: int,
                  x_far: float = 30.0, grid=None, rtol: float = 1e-9,
                  atol: float = 1e-12) -> OdeSample:
    """Integrate the pencil equation down from x_far on the tau-th carrier."""
    mu = 1j * k * omega(pot.m, tau)
    return _integrate(pot, k, tau, mu, x_far, grid, rtol, atol, adjoint=False)


def integrate_adjoint_ode(pot: PotentialCoefficients, k: complex, s: int,
                          x_far: float = 30.0, grid=None, rtol: float = 1e-9,
                          atol: float = 1e-12) -> OdeSample:
    """Integrate the adjoint equation down from x_far on the s-th carrier."""
    mu = -1j * k * omega(pot.m, s)
    return _integrate(pot, k, s, mu, x_far, grid, rtol, atol, adjoint=True)


@dataclass
class ErrorReport:
    """Pointwise comparison of a series evaluator against an integrated sample."""

    max_abs: np.ndarray     # per derivative order
    max_rel: np.ndarray     # per derivative order

    @property
    def worst_abs(self) -> float:
        return float(self.max_abs.max())

    @property
    def worst_rel(self) -> float:
        return float(self.max_rel.max())


def compare(series_evaluator, sample: OdeSample) -> ErrorReport:
    """Compare ``series_evaluator(x_array, d)`` with the sample, per derivative."""
    orders = sample.values.shape[0]
    max_abs = np.zeros(orders)
    max_rel = np.zeros(orders)
    for d in range(orders):
        series = np.asarray(series_evaluator(sample.x, d), dtype=complex)
        diff = np.abs(series - sample.values[d])
        scale = np.abs(sample.values[d])
        max_abs[d] = diff.max()
        max_rel[d] = (diff / np.maximum(scale, 1e-300)).max()
    return ErrorReport(max_abs=max_abs, max_rel=max_rel)
