"""Exact algebra of polynomials in k and of lattice pole-polynomials.

Every coefficient of the exponential series solutions is a rational function
of k of a very specific shape: a polynomial plus simple poles at the lattice
points k[n, j, tau].  This module implements that shape (``PolePolynomial``)
and the two division identities that drive the recurrence engine:

* dividing the shifted free symbol (i a + k w)^{2m} - k^{2m} by the linear
  factor i n + k w (1 - w_j)  (``quotient_main``), and
* dividing k^s (i k w - t)^gamma minus its value at the pole by the same
  factor (``quotient_general``).

Both are instances of one primitive, synthetic division at a known root
(``poly_div_at_root``).  Multiplying a pole-polynomial by a polynomial
re-expresses each product b/(lin) * g(k) as b*quotient + b*g(root)/(lin)
(``pp_mul_split``); matching pole residues and polynomial coefficients of
the assembled products is what produces the level recurrences downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import NotDivisible
from .model import omega, pole_k

__all__ = [
    "binomial",
    "ComplexPolynomial",
    "PolePolynomial",
    "affine_power",
    "level_symbol",
    "symbol_at_pole",
    "linear_divisor",
    "poly_div_at_root",
    "split_at_root",
    "quotient_main",
    "quotient_general",
    "pp_mul_split",
]

#: Relative tolerance for declaring a division-by-linear-factor exact.
TOL_DIV = 1e-10


def binomial(n: int, r: int) -> int:
    """Binomial coefficient n! / ((n-r)! r!)."""
    return math.comb(n, r)


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial in k with complex coefficients, ascending degree.

    Trailing exact zeros are trimmed, so the leading stored coefficient is
    nonzero and the zero polynomial has an empty coefficient tuple.
    """

    coefficients: tuple = ()

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "ComplexPolynomial":
        return cls(())

    @classmethod
    def constant(cls, c: complex) -> "ComplexPolynomial":
        return cls((complex(c),))

    @classmethod
    def monomial(cls, power: int, coefficient: complex = 1.0) -> "ComplexPolynomial":
        return cls((0,) * power + (complex(coefficient),))

    # -- structure ---------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coefficients) - 1

    def coeff(self, power: int) -> complex:
        """Coefficient of k^power (0 beyond the stored degree)."""
        if 0 <= power < len(self.coefficients):
            return self.coefficients[power]
        return 0j

    def is_zero(self) -> bool:
        return not self.coefficients

    def as_array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=complex)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        a, b = self.coefficients, other.coefficients
        if len(a) < len(b):
            a, b = b, a
        summed = list(a)
        for i, c in enumerate(b):
            summed[i] += c
        return ComplexPolynomial(summed)

    def __neg__(self) -> "ComplexPolynomial":
        return ComplexPolynomial(tuple(-c for c in self.coefficients))

    def __sub__(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "ComplexPolynomial":
        if isinstance(other, ComplexPolynomial):
            if self.is_zero() or other.is_zero():
                return ComplexPolynomial.zero()
            return ComplexPolynomial(np.convolve(self.as_array(), other.as_array()))
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c: complex) -> "ComplexPolynomial":
        c = complex(c)
        if c == 0:
            return ComplexPolynomial.zero()
        return ComplexPolynomial(tuple(c * a for a in self.coefficients))

    def __call__(self, k):
        """Horner evaluation, broadcasting over array-valued k."""
        if np.isscalar(k) or isinstance(k, complex):
            result = 0j
            for c in reversed(self.coefficients):
                result = result * k + c
            return result
        k = np.asarray(k, dtype=complex)
        result = np.zeros_like(k)
        for c in reversed(self.coefficients):
            result = result * k + c
        return result


def affine_power(const: complex, slope: complex, n: int) -> ComplexPolynomial:
    """The polynomial (const + slope*k)^n expanded by the binomial theorem."""
    coeffs = [binomial(n, r) * const ** (n - r) * slope ** r for r in range(n + 1)]
    return ComplexPolynomial(coeffs)


def level_symbol(m: int, alpha: int, tau: int) -> ComplexPolynomial:
    """Free-pencil symbol on the shifted carrier: (i*alpha + k*w_tau)^{2m} - k^{2m}.

    The k^{2m} terms cancel exactly (w_tau^{2m} = 1), so the result is built
    directly as a degree 2m-1 polynomial with leading coefficient
    2m * i*alpha * w_tau^{2m-1}.
    """
    w = omega(m, tau)
    ia = 1j * alpha
    coeffs = [binomial(2 * m, g) * ia ** (2 * m - g) * w ** g for g in range(2 * m)]
    return ComplexPolynomial(coeffs)


def symbol_at_pole(m: int, n: int, j: int, alpha: int) -> complex:
    """Value of the level-alpha symbol at the pole k[n, j, tau].

    Independent of tau: with w_tau * k[n,j,tau] = k[n,j,0] and
    k[n,j,tau]^{2m} = k[n,j,0]^{2m}, the value is
    (i*alpha + k[n,j,0])^{2m} - k[n,j,0]^{2m}.  It vanishes identically when
    n = alpha, which is what forces the diagonal entries into the polynomial
    part of the level equations.
    """
    k0 = pole_k(m, n, j, 0)
    return (1j * alpha + k0) ** (2 * m) - k0 ** (2 * m)


def linear_divisor(m: int, n: int, j: int, tau: int) -> tuple[complex, complex]:
    """Root and slope of i*n + k*w_tau*(1 - w_j) = slope * (k - root)."""
    slope = omega(m, tau) * (1 - omega(m, j))
    return pole_k(m, n, j, tau), slope


def split_at_root(g: ComplexPolynomial, root: complex, divisor_slope: complex,
                  ) -> tuple[ComplexPolynomial, complex]:
    """Synthetic division of g by divisor_slope*(k - root), keeping the remainder.

    Returns (quotient, g(root)) with
    g(k) = quotient(k) * divisor_slope * (k - root) + g(root).
    """
    coeffs = g.coefficients
    if not coeffs:
        return ComplexPolynomial.zero(), 0j
    quotient = [0j] * (len(coeffs) - 1)
    carry = coeffs[-1]
    for i in range(len(coeffs) - 2, -1, -1):
        quotient[i] = carry
        carry = coeffs[i] + root * carry
    inv = 1.0 / divisor_slope
    return ComplexPolynomial([q * inv for q in quotient]), carry


def poly_div_at_root(numerator: ComplexPolynomial, root: complex,
                     divisor_slope: complex) -> ComplexPolynomial:
    """Exact division of numerator by divisor_slope*(k - root).

    The numerator must vanish at the root (to 1e-10 relative to its largest
    coefficient); a larger remainder signals a mis-built numerator and raises
    NotDivisible.
    """
    quotient, remainder = split_at_root(numerator, root, divisor_slope)
    scale = max((abs(c) for c in numerator.coefficients), default=0.0)
    if abs(remainder) > TOL_DIV * scale:
        raise NotDivisible(
            f"numerator does not vanish at root {root}: remainder {remainder!r} "
            f"exceeds {TOL_DIV} relative to coefficient scale {scale:.3e}")
    return quotient


def quotient_main(m: int, n: int, j: int, tau: int, alpha: int) -> ComplexPolynomial:
    """Quotient [(i*alpha + k*w_tau)^{2m} - k^{2m} - symbol_at_pole] / (i*n + k*w_tau*(1-w_j)).

    Degree <= 2m-2.  Its gamma-th coefficient multiplies the (n, j) pole
    amplitude in the polynomial rows of the level-alpha equations.
    """
    numerator = level_symbol(m, alpha, tau) - ComplexPolynomial.constant(
        symbol_at_pole(m, n, j, alpha))
    root, slope = linear_divisor(m, n, j, tau)
    return poly_div_at_root(numerator, root, slope)


def quotient_general(m: int, n: int, j: int, tau: int, s: int, gamma: int,
                     t: int) -> ComplexPolynomial:
    """Quotient [k^s (i*k*w_tau - t)^gamma - value at the pole] / (i*n + k*w_tau*(1-w_j)).

    The subtracted constant is k[n,j,tau]^s * (i*k[n,j,0] - t)^gamma, which is
    the numerator's value at the pole (i * k[n,j,tau] * w_tau = i * k[n,j,0]),
    so the division is exact by construction.  Degree <= gamma + s - 1.
    """
    w = omega(m, tau)
    numerator = affine_power(-t, 1j * w, gamma) * ComplexPolynomial.monomial(s)
    value = pole_k(m, n, j, tau) ** s * (1j * pole_k(m, n, j, 0) - t) ** gamma
    numerator = numerator - ComplexPolynomial.constant(value)
    root, slope = linear_divisor(m, n, j, tau)
    return poly_div_at_root(numerator, root, slope)


@dataclass
class PolePolynomial:
    """A polynomial in k plus simple poles on the lattice, for one carrier tau.

    Represents poly(k) + sum over (n, j) of b[n,j] / (i*n + k*w_tau*(1-w_j)).
    Zero-valued pole numerators are dropped on construction and after every
    operation.
    """

    m: int
    tau: int
    poly: ComplexPolynomial = field(default_factory=ComplexPolynomial.zero)
    poles: dict = field(default_factory=dict)

    def __post_init__(self):
        self.poles = {(int(n), int(j)): complex(b)
                      for (n, j), b in self.poles.items() if complex(b) != 0}
        for n, j in self.poles:
            if not (n >= 1 and 1 <= j <= 2 * self.m - 1):
                raise ValueError(f"pole key (n={n}, j={j}) outside the lattice")

    @classmethod
    def constant(cls, m: int, tau: int, c: complex) -> "PolePolynomial":
        return cls(m, tau, ComplexPolynomial.constant(c), {})

    @classmethod
    def single_pole(cls, m: int, tau: int, n: int, j: int,
                    numerator: complex = 1.0) -> "PolePolynomial":
        return cls(m, tau, ComplexPolynomial.zero(), {(n, j): numerator})

    def residue_numerator(self, n: int, j: int) -> complex:
        return self.poles.get((n, j), 0j)

    def __add__(self, other: "PolePolynomial") -> "PolePolynomial":
        if (self.m, self.tau) != (other.m, other.tau):
            raise ValueError("pole-polynomials live in different (m, tau) contexts")
        poles = dict(self.poles)
        for key, b in other.poles.items():
            poles[key] = poles.get(key, 0j) + b
        return PolePolynomial(self.m, self.tau, self.poly + other.poly, poles)

    def scale(self, c: complex) -> "PolePolynomial":
        return PolePolynomial(self.m, self.tau, self.poly.scale(c),
                              {key: c * b for key, b in self.poles.items()})

    def __mul__(self, g) -> "PolePolynomial":
        if isinstance(g, ComplexPolynomial):
            return pp_mul_split(self, g)
        return self.scale(g)

    __rmul__ = __mul__

    def __call__(self, k):
        """Evaluate at k (scalar or array), poles via their linear divisors."""
        result = self.poly(k)
        for (n, j), b in self.poles.items():
            result = result + b / (1j * n + np.asarray(k, dtype=complex)
                                   * omega(self.m, self.tau) * (1 - omega(self.m, j)))
        if np.isscalar(k) or isinstance(k, complex):
            return complex(result)
        return result


def pp_mul_split(f: PolePolynomial, g: ComplexPolynomial) -> PolePolynomial:
    """Product f * g re-expressed in PolePolynomial form.

    Each pole term obeys b/(lin) * g(k) = b*quotient(k) + b*g(root)/(lin):
    the quotient is absorbed into the polynomial part and the pole keeps the
    constant numerator b*g(root).
    """
    poly = f.poly * g
    poles = {}
    for (n, j), b in f.poles.items():
        root, slope = linear_divisor(f.m, n, j, f.tau)
        quotient, value = split_at_root(g, root, slope)
        poly = poly + quotient.scale(b)
        poles[(n, j)] = b * value
    return PolePolynomial(f.m, f.tau, poly, poles)
