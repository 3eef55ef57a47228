"""Independent oracles for the test suite.

Everything here is computed by routes that do not share code with the package
internals: a scalar three-term recurrence for the m = 1 single-exponential
potential, explicit partial fractions of that closed form, the Vandermonde
determinant for the free pencil, and plain bisection for a planted Wronskian
zero.  Tests freeze values produced here and compare the package against them.
"""

from __future__ import annotations

import math

import numpy as np

# ---------------------------------------------------------------------------
# Closed form for m = 1 with p_0(x) = c * exp(-x)  (table entry (0,0,1) -> c).
#
# Seeking y = sum_a g_a exp((mu - a) x), mu = i k w (w = +-1), in
# -y'' + c e^{-x} y = k^2 y gives g_0 = 1 and
#     g_a * [ (mu - a)^2 - mu^2 ] = c * g_{a-1}
# i.e. g_a = c * g_{a-1} / ( a * (a - 2 mu) ).


def closed_coeffs(c: complex, k: complex, tau: int, levels: int) -> np.ndarray:
    """Series coefficients g_0..g_levels of the m=1 closed form at spectral k."""
    mu = 1j * k * (1 if tau % 2 == 0 else -1)
    out = np.empty(levels + 1, dtype=complex)
    out[0] = 1.0
    for a in range(1, levels + 1):
        out[a] = c * out[a - 1] / (a * (a - 2 * mu))
    return out


def closed_f(c: complex, x, k: complex, tau: int, levels: int, d: int = 0):
    """x-derivative of order d of the truncated m=1 closed-form solution."""
    x = np.asarray(x, dtype=float)
    mu = 1j * k * (1 if tau % 2 == 0 else -1)
    g = closed_coeffs(c, k, tau, levels)
    total = np.zeros(x.shape, dtype=complex)
    for a in range(levels + 1):
        rate = mu - a
        total = total + g[a] * rate ** d * np.exp(rate * x)
    if total.shape == ():
        return complex(total)
    return total


def closed_pole_numerator(c: complex, beta: int, alpha: int) -> complex:
    """Partial-fraction numerator of g_alpha at the pole i*beta + 2*k*w = 0.

    With u = 2 i k w, g_alpha = c^alpha / (alpha! * prod_{g=1..alpha} (g - u)),
    and 1/(g - u) = i/(i g + 2 k w), so the coefficient of 1/(i beta + 2 k w)
    is i * c^alpha / (alpha! * prod_{g != beta} (g - beta)).  Independent of
    the carrier sign w, hence of tau.
    """
    if not 1 <= beta <= alpha:
        return 0j
    prod = 1.0
    for g in range(1, alpha + 1):
        if g != beta:
            prod *= g - beta
    return 1j * c ** alpha / (math.factorial(alpha) * prod)


def closed_wronskian_uhp(c: complex, k: complex, levels: int = 60) -> complex:
    """m=1 Wronskian on the upper half plane: value at x=0 of the tau=0 solution."""
    return complex(np.sum(closed_coeffs(c, k, 0, levels)))


def find_imaginary_zero(c: float, lo: float, hi: float, levels: int = 80,
                        tol: float = 1e-13) -> float:
    """Bisection zero kappa of W(i*kappa) on the imaginary axis (real-valued there)."""
    f = lambda kap: closed_wronskian_uhp(c, 1j * kap, levels).real
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]: {flo}, {fhi}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) < tol or hi - lo < tol:
            return mid
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Free pencil (zero potential): solutions are exactly exp(i k w_t x), so the
# boundary Wronskian is a Vandermonde determinant in the carrier slopes.


def vandermonde_wronskian(m: int, k: complex, column_taus) -> complex:
    """det over rows r=0..m-1 and the given solution columns of (i k w_t)^r."""
    slopes = [1j * k * np.exp(1j * t * math.pi / m) for t in column_taus]
    mat = np.array([[mu ** r for mu in slopes] for r in range(m)], dtype=complex)
    return complex(np.linalg.det(mat))


# ---------------------------------------------------------------------------
# Reference potentials used across the suite.


def bump_table_m2(rng: np.random.Generator, count: int = 5, norm_cap: float = 0.2):
    """Random sparse m=2 coefficient rows (gamma, s, n, value) under a weight cap."""
    keys = [(g, s, n) for g in range(3) for s in range(4 - g) for n in (1, 2, 3)]
    rng.shuffle(keys)
    rows = []
    budget = norm_cap
    for (g, s, n) in keys[:count]:
        w = n ** (g + s)
        mag = min(budget / (count * w), 0.05)
        val = mag * (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2)
        rows.append((g, s, n, complex(val)))
    return rows
