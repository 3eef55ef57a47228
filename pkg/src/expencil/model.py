"""Operator-pencil model: order, exponent lattice, and coefficient tables.

The differential expression handled by this package is, for y on [0, inf),

    l(y) = (-1)^m y^(2m)(x) + sum_{gamma=0}^{2m-2} p_gamma(x, k) y^(gamma)(x) - k^{2m} y(x)

with half-bound boundary conditions y^(j)(0) = 0 for j = 0..m-1 and coefficients
that are finite sums of decaying exponentials with polynomial spectral weight:

    p_gamma(x, k) = sum_s sum_n  p[gamma, s, n] * k^s * exp(-n x),
    0 <= s <= 2m - gamma - 1,  n >= 1.

Everything downstream (series solutions, Wronskians, scattering) is built on the
two geometric ingredients defined here: the rotation multipliers
omega_j = exp(i j pi / m) and the pole lattice k[n, j, tau] = -i n / (omega_tau (1 - omega_j)).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, IndexOutOfRange, InvalidPole

__all__ = [
    "omega",
    "all_omegas",
    "pole_k",
    "PoleLattice",
    "PotentialCoefficients",
    "build_potential",
    "eval_coefficient",
    "weighted_norm",
    "load_potential_config",
    "parse_potential_mapping",
]

# Snap tolerance for canonicalizing roots of unity onto the exact axis points.
_SNAP = 1e-15


def omega(m: int, j: int) -> complex:
    """Rotation multiplier omega_j = exp(i j pi / m), canonicalized.

    Values within 1e-15 of +-1 or +-i are snapped to the exact constant so that
    identities like omega_m == -1 hold without roundoff dust.
    """
    if m < 1:
        raise IndexOutOfRange(f"order m must be >= 1, got {m}")
    if not 0 <= j < 2 * m:
        raise IndexOutOfRange(f"rotation index j must be in [0, {2 * m - 1}], got {j}")
    w = cmath.exp(1j * j * math.pi / m)
    for exact in (1.0 + 0j, -1.0 + 0j, 1j, -1j):
        if abs(w - exact) < _SNAP:
            return exact
    return w


def all_omegas(m: int) -> np.ndarray:
    """All 2m rotation multipliers as a complex array indexed by j."""
    return np.array([omega(m, j) for j in range(2 * m)], dtype=complex)


def pole_k(m: int, n: int, j: int, tau: int = 0) -> complex:
    """Lattice pole k[n, j, tau] = -i n / (omega_tau (1 - omega_j)).

    These are the only singular points of the series solutions: the solution
    with carrier index tau has simple poles exactly at k[n, j, tau] for
    n = 1..infinity and j = 1..2m-1.  j = 0 is not a pole (the divisor there is
    the constant i*n) and is rejected.
    """
    if not 0 <= tau < 2 * m:
        raise IndexOutOfRange(f"carrier index tau must be in [0, {2 * m - 1}], got {tau}")
    if j == 0:
        raise InvalidPole("j = 0 does not label a pole (the divisor is constant in k)")
    if not 1 <= j < 2 * m:
        raise IndexOutOfRange(f"pole index j must be in [1, {2 * m - 1}], got {j}")
    if n < 1:
        raise InvalidPole(f"harmonic index n must be >= 1, got {n}")
    return -1j * n / (omega(m, tau) * (1 - omega(m, j)))


@dataclass(frozen=True)
class PoleLattice:
    """Enumerable view of the pole lattice of a pencil of half-order m.

    For fixed (j, tau) the poles lie on a single ray through the origin with
    consecutive spacing |k[1, j, tau]| = 1/|1 - omega_j| (independent of tau);
    ``spacing`` is the minimum over j, which is what the evaluation guard
    distance is scaled by.
    """

    m: int

    def k(self, n: int, j: int, tau: int = 0) -> complex:
        return pole_k(self.m, n, j, tau)

    def ray(self, j: int, tau: int = 0) -> complex:
        """Unit step of the ray for pole index j (the n = 1 pole)."""
        return pole_k(self.m, 1, j, tau)

    def points(self, n_max: int, tau: int = 0) -> np.ndarray:
        """All poles with n <= n_max, shape (2m-1, n_max), row index j-1."""
        rays = np.array([self.ray(j, tau) for j in range(1, 2 * self.m)])
        return rays[:, None] * np.arange(1, n_max + 1)[None, :]

    def spacing(self) -> float:
        """Minimum consecutive-pole distance over all rays (tau-independent)."""
        return min(abs(self.ray(j)) for j in range(1, 2 * self.m))

    def guard(self) -> float:
        """Default evaluation guard distance: 1e-3 of the tightest spacing."""
        return 1e-3 * self.spacing()

    def nearest(self, k: complex, n_max: int, tau: int = 0) -> tuple[float, int, int]:
        """Distance from k to the tau-lattice restricted to n <= n_max.

        Returns (distance, n, j) of the closest pole.
        """
        best = (math.inf, 0, 0)
        for j in range(1, 2 * self.m):
            u = self.ray(j, tau)
            # project k on the ray direction to find the closest integer step
            t = (k * u.conjugate()).real / abs(u) ** 2
            for n in {max(1, min(n_max, round(t))), max(1, min(n_max, math.floor(t))),
                      max(1, min(n_max, math.ceil(t)))}:
                d = abs(k - n * u)
                if d < best[0]:
                    best = (d, n, j)
        return best


@dataclass(frozen=True)
class PotentialCoefficients:
    """Sparse coefficient table of the pencil's lower-order terms.

    ``table`` maps (gamma, s, n) -> complex amplitude.  The admissible index
    box is 0 <= gamma <= 2m-2, 0 <= s <= 2m-gamma-1, n >= 1.  ``max_harmonic``
    is the largest n present (0 for the free pencil).
    """

    m: int
    table: Mapping[tuple[int, int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        for (gamma, s, n), value in self.table.items():
            _check_indices(self.m, gamma, s, n)
            if not np.isfinite(value):
                raise ConfigError(f"coefficient (gamma={gamma}, s={s}, n={n}) is not finite")

    @property
    def max_harmonic(self) -> int:
        return max((n for (_, _, n) in self.table), default=0)

    @cached_property
    def norm_weight(self) -> float:
        """Cached convergence weight sum n^(gamma+s) |p[gamma,s,n]|."""
        return float(sum(n ** (g + s) * abs(v) for (g, s, n), v in self.table.items()))

    def harmonic_slice(self, n: int) -> dict[tuple[int, int], complex]:
        """All (gamma, s) -> amplitude entries at exponential harmonic n."""
        return {(g, s): v for (g, s, nn), v in self.table.items() if nn == n}

    def fingerprint(self) -> str:
        """Stable content hash used to tag derived coefficient tables."""
        import hashlib

        h = hashlib.blake2b(digest_size=12)
        h.update(str(self.m).encode())
        for key in sorted(self.table):
            v = complex(self.table[key])
            h.update(repr((key, round(v.real, 15), round(v.imag, 15))).encode())
        return h.hexdigest()


def _check_indices(m: int, gamma: int, s: int, n: int) -> None:
    if not 0 <= gamma <= 2 * m - 2:
        raise IndexOutOfRange(f"derivative order gamma={gamma} outside [0, {2 * m - 2}]")
    if not 0 <= s <= 2 * m - gamma - 1:
        raise IndexOutOfRange(
            f"spectral power s={s} outside [0, {2 * m - gamma - 1}] for gamma={gamma}")
    if n < 1:
        raise IndexOutOfRange(f"harmonic n={n} must be >= 1")


def build_potential(m: int, entries: Mapping[tuple[int, int, int], complex] | Iterable,
                    ) -> PotentialCoefficients:
    """Validate and freeze a coefficient table.

    ``entries`` is a mapping (gamma, s, n) -> value, an iterable of
    (gamma, s, n, value) rows, or an iterable of ((gamma, s, n), value) pairs.
    Duplicate keys are summed.
    """
    if m < 1:
        raise ConfigError(f"order m must be >= 1, got {m}")
    table: dict[tuple[int, int, int], complex] = {}
    items = entries.items() if isinstance(entries, Mapping) else entries
    for item in items:
        if len(item) == 4:
            gamma, s, n, value = item
        else:
            (gamma, s, n), value = item
        gamma, s, n = int(gamma), int(s), int(n)
        _check_indices(m, gamma, s, n)
        total = table.get((gamma, s, n), 0j) + complex(value)
        if total == 0 and (gamma, s, n) in table:
            del table[(gamma, s, n)]
        else:
            table[(gamma, s, n)] = total
    return PotentialCoefficients(m=m, table=table)


def eval_coefficient(pot: PotentialCoefficients, gamma: int, x, k) -> complex | np.ndarray:
    """Evaluate p_gamma(x, k) = sum_{s,n} p[gamma,s,n] k^s exp(-n x).

    Broadcasts over array-valued x or k.
    """
    if not 0 <= gamma <= 2 * pot.m - 2:
        raise IndexOutOfRange(f"gamma={gamma} outside [0, {2 * pot.m - 2}]")
    x = np.asarray(x)
    k = np.asarray(k)
    total = np.zeros(np.broadcast(x, k).shape, dtype=complex)
    for (g, s, n), value in pot.table.items():
        if g == gamma:
            total = total + value * k ** s * np.exp(-n * x)
    if total.shape == ():
        return complex(total)
    return total


def weighted_norm(pot: PotentialCoefficients) -> float:
    """Convergence weight sum_{gamma,s,n} n^(gamma+s) |p[gamma,s,n]|."""
    return pot.norm_weight


# ---------------------------------------------------------------------------
# Config files


def parse_potential_mapping(doc: Mapping, source: str = "<config>") -> PotentialCoefficients:
    """Build a potential from a decoded config mapping.

    Expected shape::

        m = 2
        [[entries]]        # or JSON {"m": 2, "entries": [...]}
        gamma = 0
        s = 1
        n = 1
        re = 0.25
        im = 0.0

    Errors name the offending entry by its position.
    """
    if "m" not in doc:
        raise ConfigError(f"{source}: missing required field 'm'")
    try:
        m = int(doc["m"])
    except (TypeError, ValueError):
        raise ConfigError(f"{source}: field 'm' must be an integer") from None
    if m < 1:
        raise ConfigError(f"{source}: field 'm' must be >= 1, got {m}")
    entries = doc.get("entries", [])
    if not isinstance(entries, (list, tuple)):
        raise ConfigError(f"{source}: 'entries' must be an array of tables")
    table: dict[tuple[int, int, int], complex] = {}
    for idx, entry in enumerate(entries):
        label = f"{source}: entries[{idx}]"
        if not isinstance(entry, Mapping):
            raise ConfigError(f"{label}: expected a table with gamma/s/n/re/im")
        vals = {}
        for fieldname in ("gamma", "s", "n"):
            if fieldname not in entry:
                raise ConfigError(f"{label}: missing field '{fieldname}'")
            try:
                vals[fieldname] = int(entry[fieldname])
            except (TypeError, ValueError):
                raise ConfigError(f"{label}: field '{fieldname}' must be an integer") from None
        re_part = entry.get("re", 0.0)
        im_part = entry.get("im", 0.0)
        try:
            value = complex(float(re_part), float(im_part))
        except (TypeError, ValueError):
            raise ConfigError(f"{label}: fields 're'/'im' must be numbers") from None
        key = (vals["gamma"], vals["s"], vals["n"])
        try:
            _check_indices(m, *key)
        except IndexOutOfRange as exc:
            raise ConfigError(f"{label}: {exc}") from None
        table[key] = table.get(key, 0j) + value
    return PotentialCoefficients(m=m, table=table)


def load_potential_config(path: str | Path) -> PotentialCoefficients:
    """Load a potential from a TOML or JSON config file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    suffix = path.suffix.lower()
    if suffix == ".json":
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    else:
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            doc = tomllib.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    if not isinstance(doc, Mapping):
        raise ConfigError(f"{path}: top level must be a table/object")
    return parse_potential_mapping(doc, source=str(path))
