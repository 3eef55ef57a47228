"""Sector geometry, Wronskians, eigenvalue search, and the resolvent kernel.

For fixed k off a finite set of rays, the 2m numbers Im(k w_j) are distinct
and split into m positive (solutions decaying at +infinity, hence in L2) and
m negative ones.  The ordering permutation is constant on maximal open
angular sectors whose boundaries are the tie rays arg(k) = -arg(w_a - w_b)
mod pi; eigenvalues in a sector are exactly the zeros of the boundary
Wronskian W(k) built from the decaying family, and the resolvent kernel is
assembled from both families together with the adjoint solutions.

The eigenvalue search uses the argument principle on polar boxes: adaptive
phase tracking along the boundary gives an integer winding count, boxes with
nonzero count are subdivided until small, and a Newton polish (finite
difference derivative) refines each isolated zero.  Counts are enforced to be
consistent at every subdivision level, with deterministic jitter retries when
a contour passes suspiciously close to a zero.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    ContourThroughZero,
    EigenvalueHit,
    IndexOutOfRange,
    OnCriticalRay,
    PoleOnContour,
)
from .model import PoleLattice, omega, pole_k
from .solver import eval_solution, residue_at_pole

__all__ = [
    "SectorContext",
    "tie_rays",
    "sector_catalogue",
    "sector_of",
    "sector_ordering",
    "sector_sample",
    "wronskian",
    "minor_A",
    "Eigenvalue",
    "SpectrumReport",
    "find_eigenvalues",
    "ResidueCheck",
    "verify_residue_identity",
    "resolvent_kernel",
]

log = logging.getLogger("expencil.spectral")

#: Relative tolerance (scaled by |k|) for declaring two Im(k w) values tied.
TIE_TOL = 1e-9


# ---------------------------------------------------------------------------
# Sector geometry


def tie_rays(m: int) -> np.ndarray:
    """Sorted angles in [0, 2pi) where some pair Im(k w_a) = Im(k w_b) ties.

    Im(k (w_a - w_b)) = 0 along arg k = -arg(w_a - w_b) mod pi; both
    representatives of each ray are returned.
    """
    found = set()
    for a in range(2 * m):
        for b in range(a + 1, 2 * m):
            diff = omega(m, a) - omega(m, b)
            theta = (-cmath.phase(diff)) % math.pi
            found.add(round(theta, 12) % round(math.pi, 12))
    rays = sorted({t % math.pi for t in found})
    both = sorted([t for t in rays] + [t + math.pi for t in rays])
    return np.array(both)


def sector_catalogue(m: int) -> list[tuple[float, float]]:
    """Open angular intervals of constant ordering, listed counterclockwise.

    Sector i spans (rays[i], rays[i+1]); the last wraps to rays[0] + 2pi.
    For m = 1 there are two sectors of width pi; for m >= 2 there are 4m
    sectors of width pi/(2m).
    """
    rays = tie_rays(m)
    out = []
    for i in range(len(rays)):
        hi = rays[i + 1] if i + 1 < len(rays) else rays[0] + 2 * math.pi
        out.append((float(rays[i]), float(hi)))
    return out


def sector_of(m: int, k: complex) -> int:
    """Index of the sector containing arg k; raises OnCriticalRay on a boundary."""
    if k == 0:
        raise OnCriticalRay("k = 0 lies on every critical ray")
    angle = cmath.phase(k) % (2 * math.pi)
    rays = tie_rays(m)
    for i, (lo, hi) in enumerate(sector_catalogue(m)):
        if lo < angle < hi:
            # distance to the nearest boundary, for the tie tolerance
            if min(angle - lo, hi - angle) * abs(k) < TIE_TOL * abs(k):
                break
            return i
    near = float(rays[np.argmin(np.abs(np.exp(1j * rays) - np.exp(1j * angle))))])
    raise OnCriticalRay(f"arg k = {angle:.6f} lies on the critical ray {near:.6f}")


def sector_sample(m: int, sector: int, radius: float = 1.0) -> complex:
    """A representative point at mid-angle of the given sector."""
    cat = sector_catalogue(m)
    if not 0 <= sector < len(cat):
        raise IndexOutOfRange(f"sector id {sector} outside [0, {len(cat) - 1}]")
    lo, hi = cat[sector]
    return radius * cmath.exp(1j * 0.5 * (lo + hi))


@dataclass(frozen=True)
class SectorContext:
    """Ordering data of one spectral point: permutation and family split."""

    m: int
    k: complex
    permutation: tuple      # all 2m indices, ascending Im(k w_j)
    sector: int

    @property
    def growing(self) -> tuple:
        """Indices with Im(k w) < 0, ascending (first m of the permutation)."""
        return self.permutation[: self.m]

    @property
    def decaying(self) -> tuple:
        """Indices with Im(k w) > 0, ascending (last m of the permutation)."""
        return self.permutation[self.m:]


def sector_ordering(m: int, k: complex) -> SectorContext:
    """Sort the carrier indices by Im(k w_j) and split into the two families."""
    k = complex(k)
    if k == 0:
        raise OnCriticalRay("k = 0 lies on every critical ray")
    ims = np.array([(k * omega(m, j)).imag for j in range(2 * m)])
    order = tuple(int(j) for j in np.argsort(ims, kind="stable"))
    sorted_ims = ims[list(order)]
    gaps = np.diff(sorted_ims)
    if np.any(gaps <= TIE_TOL * abs(k)):
        raise OnCriticalRay(
            f"two exponent orderings tie at k = {k}: Im(k w) gaps {gaps}")
    # the values come in +- pairs (w_{j+m} = -w_j), so the split is exact
    if sorted_ims[m - 1] >= 0 or sorted_ims[m] <= 0:
        raise OnCriticalRay(f"family split degenerate at k = {k}")
    return SectorContext(m=m, k=k, permutation=order, sector=sector_of(m, k))


# ---------------------------------------------------------------------------
# Wronskian and minors


def _boundary_matrix(table, columns, k: complex) -> np.ndarray:
    m = table.m
    return np.array([[eval_solution(table, c, 0.0, k, d=r) for c in columns]
                     for r in range(m)], dtype=complex)


def _det_fixed(table, columns, k: complex) -> complex:
    return complex(np.linalg.det(_boundary_matrix(table, columns, k)))


def wronskian(table, k: complex) -> complex:
    """Boundary determinant of the decaying family, rows = derivatives 0..m-1."""
    ctx = sector_ordering(table.m, k)
    return _det_fixed(table, ctx.decaying, k)


def minor_A(table, k: complex, replace_col: int, s: int) -> complex:
    """Wronskian with one decaying column replaced by a growing solution.

    ``replace_col`` indexes the decaying columns (0..m-1 in sector order);
    ``s`` in [m, 2m-1] selects the growing solution as s - m in sector order.
    Replacing a column by the matching decaying solution (s < m convention
    not used) is covered by the identity minor == W when the inserted column
    coincides with the removed one.
    """
    m = table.m
    ctx = sector_ordering(m, k)
    if not 0 <= replace_col < m:
        raise IndexOutOfRange(f"replace_col {replace_col} outside [0, {m - 1}]")
    if not m <= s < 2 * m:
        raise IndexOutOfRange(f"growing index s {s} outside [{m}, {2 * m - 1}]")
    columns = list(ctx.decaying)
    columns[replace_col] = ctx.growing[s - m]
    return _det_fixed(table, columns, k)


# ---------------------------------------------------------------------------
# Eigenvalue search (argument principle on polar boxes)


@dataclass
class Eigenvalue:
    k: complex
    residual: float
    multiplicity: int


@dataclass
class SpectrumReport:
    sector: int
    count: int
    eigenvalues: list
    r_min: float
    r_max: float
    tol_root: float
    evaluations: int = 0


class _PolarBox:
    __slots__ = ("r0", "r1", "t0", "t1")

    def __init__(self, r0, r1, t0, t1):
        self.r0, self.r1, self.t0, self.t1 = r0, r1, t0, t1

    def center(self) -> complex:
        return math.sqrt(self.r0 * self.r1) * cmath.exp(1j * 0.5 * (self.t0 + self.t1))

    def diameter(self) -> float:
        return math.hypot(self.r1 - self.r0, self.r1 * (self.t1 - self.t0))

    def contains(self, k: complex, slack: float = 0.0) -> bool:
        r, t = abs(k), cmath.phase(k) % (2 * math.pi)
        lo = (self.t0 - slack) % (2 * math.pi)
        width = (self.t1 - self.t0) + 2 * slack
        return (self.r0 * (1 - slack) <= r <= self.r1 * (1 + slack)
                and (t - lo) % (2 * math.pi) <= width)

    def edges(self):
        """Counterclockwise boundary as four parametric segments."""
        r0, r1, t0, t1 = self.r0, self.r1, self.t0, self.t1
        return [
            lambda u: (r0 + u * (r1 - r0)) * cmath.exp(1j * t0),
            lambda u: r1 * cmath.exp(1j * (t0 + u * (t1 - t0))),
            lambda u: (r1 + u * (r0 - r1)) * cmath.exp(1j * t1),
            lambda u: r0 * cmath.exp(1j * (t1 + u * (t0 - t1))),
        ]


def _winding(F, box: _PolarBox, per_edge: int = 16, max_refine: int = 2000) -> int:
    """Integer winding of F along the box boundary via adaptive phase tracking."""
    samples = []  # (edge index, parameter, value)
    for ei, edge in enumerate(box.edges()):
        for u in np.linspace(0.0, 1.0, per_edge + 1):
            samples.append([ei, float(u), F(edge(u))])
    scale = max(abs(v) for _, _, v in samples)
    if scale == 0 or min(abs(v) for _, _, v in samples) < 1e-12 * scale:
        raise ContourThroughZero(
            f"|W| drops below 1e-12 of contour scale on box around {box.center()}")
    edges = box.edges()
    refined = 0
    i = 0
    while i < len(samples) - 1:
        (e1, u1, v1), (e2, u2, v2) = samples[i], samples[i + 1]
        dphase = cmath.phase(v2 / v1)
        if abs(dphase) > 0.8 * math.pi and e1 == e2 and refined < max_refine:
            um = 0.5 * (u1 + u2)
            val = F(edges[e1](um))
            if abs(val) < 1e-12 * scale:
                raise ContourThroughZero(
                    f"|W| drops below 1e-12 of contour scale on box around {box.center()}")
            samples.insert(i + 1, [e1, um, val])
            refined += 1
            continue
        i += 1
    total = 0.0
    vals = [v for _, _, v in samples] + [samples[0][2]]
    for a, b in zip(vals[:-1], vals[1:]):
        total += cmath.phase(b / a)
    w = total / (2 * math.pi)
    if abs(w - round(w)) > 0.05:
        raise ContourThroughZero(
            f"winding {w:.3f} did not settle to an integer around {box.center()}")
    return int(round(w))


def _winding_jittered(F, box: _PolarBox) -> int:
    """Winding with deterministic retry shrinks when the contour grazes a zero."""
    last = None
    for shrink in (0.0, 0.004, -0.003, 0.008):
        dr = shrink * (box.r1 - box.r0)
        dt = shrink * (box.t1 - box.t0)
        trial = _PolarBox(box.r0 + dr, box.r1 - dr, box.t0 + dt, box.t1 - dt)
        try:
            return _winding(F, trial)
        except ContourThroughZero as exc:
            last = exc
    raise last


def _newton(F, k0: complex, tol_root: float, scale: float) -> complex | None:
    k = k0
    for _ in range(80):
        f = F(k)
        if abs(f) < 1e-16 * scale:
            break
        h = 1e-6 * max(abs(k), 1e-6)
        fp = (F(k + h) - F(k - h)) / (2 * h)
        if fp == 0:
            return None
        step = f / fp
        k = k - step
        if abs(step) < 1e-13 * max(abs(k), 1e-6):
            break
    return k if abs(F(k)) <= tol_root * max(scale, 1.0) else None


def _search_box(F, box: _PolarBox, tol_root: float, scale: float, depth: int,
                found: list) -> int:
    w = _winding_jittered(F, box)
    if w == 0:
        return 0
    if w < 0:
        raise ContourThroughZero(
            f"negative winding {w} around {box.center()}: contour corrupted")
    if box.diameter() < 0.02 * max(box.r0, 1e-6) or depth >= 16:
        root = _newton(F, box.center(), tol_root, scale)
        if root is None or not box.contains(root, slack=0.5):
            raise ContourThroughZero(
                f"winding {w} around {box.center()} but Newton failed to localize")
        found.append(Eigenvalue(k=root, residual=abs(F(root)), multiplicity=w))
        return w
    # split the longer side, with deterministic off-center retries
    for frac in (0.5, 0.53, 0.47):
        if (box.r1 - box.r0) > box.r1 * (box.t1 - box.t0):
            rm = box.r0 + frac * (box.r1 - box.r0)
            children = [_PolarBox(box.r0, rm, box.t0, box.t1),
                        _PolarBox(rm, box.r1, box.t0, box.t1)]
        else:
            tm = box.t0 + frac * (box.t1 - box.t0)
            children = [_PolarBox(box.r0, box.r1, box.t0, tm),
                        _PolarBox(box.r0, box.r1, tm, box.t1)]
        try:
            sub = sum(_search_box(F, c, tol_root, scale, depth + 1, found)
                      for c in children)
        except ContourThroughZero:
            continue
        if sub == w:
            return w
        raise ContourThroughZero(
            f"children account for {sub} of {w} zeros around {box.center()}")
    raise ContourThroughZero(f"could not split box around {box.center()} cleanly")


def find_eigenvalues(table, sector: int, r_min: float, r_max: float,
                     tol_root: float = 1e-8, pole_guard: float | None = None,
                     ) -> SpectrumReport:
    """Locate all Wronskian zeros in sector ∩ {r_min < |k| < r_max}.

    The decaying family is frozen at the sector midpoint (the ordering is
    constant across the open sector and extends analytically to its closure),
    so boundary contours never trip the tie detector.
    """
    m = table.m
    cat = sector_catalogue(m)
    if not 0 <= sector < len(cat):
        raise IndexOutOfRange(f"sector id {sector} outside [0, {len(cat) - 1}]")
    if not (0 < r_min < r_max):
        raise ConfigError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    t_lo, t_hi = cat[sector]
    kc = sector_sample(m, sector, math.sqrt(r_min * r_max))
    ctx = sector_ordering(m, kc)

    lattice = PoleLattice(m)
    guard = lattice.guard() if pole_guard is None else float(pole_guard)
    for tau in ctx.decaying:
        for j in range(1, 2 * m):
            for n in range(1, table.truncation + 1):
                p = pole_k(m, n, j, tau)
                r, t = abs(p), cmath.phase(p) % (2 * math.pi)
                rc = min(max(r, r_min), r_max)
                tc = min(max(t, t_lo), t_hi)
                nearest = rc * cmath.exp(1j * tc)
                if abs(p - nearest) <= guard:
                    raise PoleOnContour(
                        f"lattice pole (n={n}, j={j}, tau={tau}) at {p} lies "
                        f"within {guard:.2e} of the search region")

    evals = [0]

    def F(k: complex) -> complex:
        evals[0] += 1
        return _det_fixed(table, ctx.decaying, k)

    found: list[Eigenvalue] = []
    box = _PolarBox(r_min, r_max, t_lo, t_hi)
    scale = abs(F(kc)) or 1.0
    last_exc = None
    for jitter in (0.0, 0.01, -0.01):
        trial = _PolarBox(r_min * (1 - jitter), r_max * (1 + jitter), t_lo, t_hi)
        found.clear()
        try:
            count = _search_box(F, trial, tol_root, scale, 0, found)
            break
        except ContourThroughZero as exc:
            last_exc = exc
    else:
        raise last_exc
    found.sort(key=lambda ev: (round(ev.k.real, 10), round(ev.k.imag, 10)))
    report = SpectrumReport(sector=sector, count=count, eigenvalues=found,
                            r_min=r_min, r_max=r_max, tol_root=tol_root,
                            evaluations=evals[0])
    log.info("sector %d: %d eigenvalue(s) in [%g, %g] after %d evaluations",
             sector, count, r_min, r_max, evals[0])
    return report


# ---------------------------------------------------------------------------
# Residue identity


@dataclass
class ResidueCheck:
    """Comparison of a lattice-pole residue against the rotated solution."""

    n: int
    j: int
    v: int
    k_pole: complex
    partner: int               # (j + v) mod 2m
    c_fitted: complex
    c_expected: complex
    x_spread: float            # x-dependence of the fitted ratio (should be ~0)
    match_rel: float           # |c_fitted - c_expected| / |c_expected|
    trivial: bool = False


def verify_residue_identity(table, n: int, j: int, v: int, x_grid) -> ResidueCheck:
    """Check that the residue of f_v at pole (n, j) is a multiple of f_{j+v}.

    The residue, taken at k[n, j, v], equals c * f_{(j+v) mod 2m}(x, k[n,j,v])
    with the x-independent constant c = V[n,n] / (w_v (1 - w_j)) — the
    first-diagonal amplitude divided by the derivative of the vanishing
    denominator.
    """
    m = table.m
    two_m = 2 * m
    partner = (j + v) % two_m
    kp = pole_k(m, n, j, v)
    x_grid = np.asarray(x_grid, dtype=float)
    lhs = np.atleast_1d(residue_at_pole(table, v, n, j, x_grid))
    rhs = np.atleast_1d(eval_solution(table, partner, x_grid, kp))
    c_expected = table.v_pole(v, n, j, n) / (omega(m, v) * (1 - omega(m, j)))
    power = np.sum(np.abs(rhs) ** 2)
    if np.max(np.abs(lhs)) < 1e-300 or power == 0:
        return ResidueCheck(n=n, j=j, v=v, k_pole=kp, partner=partner,
                            c_fitted=0j, c_expected=c_expected, x_spread=0.0,
                            match_rel=abs(c_expected), trivial=True)
    c_fit = complex(np.sum(lhs * np.conj(rhs)) / power)
    spread = float(np.max(np.abs(lhs - c_fit * rhs)) / np.max(np.abs(lhs)))
    match = abs(c_fit - c_expected) / max(abs(c_expected), 1e-300)
    return ResidueCheck(n=n, j=j, v=v, k_pole=kp, partner=partner, c_fitted=c_fit,
                        c_expected=c_expected, x_spread=spread, match_rel=match)


# ---------------------------------------------------------------------------
# Resolvent kernel


def resolvent_kernel(table, adjoint_table, k: complex, x, t, dx: int = 0,
                     tol_eigen: float = 1e-10):
    """Green kernel R(x, t, k) of the pencil with the half-bound conditions.

    With kappa_s = i w_s / (2m k^{2m-1}) and X[d, g] the Cramer ratio
    minor/W of the boundary system, the kernel is

        R = sum_{d,g} kappa_g phi_g(t) X[d,g] f_d(x)
            + [x > t] sum_d kappa_d phi_d(t) f_d(x)
            - [x < t] sum_g kappa_g phi_g(t) f_g(x),

    summing d over the decaying family and g over the growing one.  Rows
    vanish at x = 0 through derivative m-1 by construction, the (2m-1)-th
    x-derivative jumps by (-1)^m across x = t, and the two branch formulas
    agree at x = t.  ``dx`` applies that many x-derivatives to the f factors.
    Broadcasts over x and t.
    """
    m = table.m
    two_m = 2 * m
    if table.fingerprint != adjoint_table.fingerprint:
        raise ConfigError("solution and adjoint tables built from different potentials")
    from .adjoint import eval_adjoint

    ctx = sector_ordering(m, k)
    mat = _boundary_matrix(table, ctx.decaying, k)
    W = complex(np.linalg.det(mat))
    col_scale = np.prod(np.maximum(np.linalg.norm(mat, axis=0), 1e-300))
    if abs(W) < tol_eigen * max(col_scale, 1e-300):
        raise EigenvalueHit(f"Wronskian {abs(W):.2e} vanishes at k = {k}")

    kappa = {s: 1j * omega(m, s) / (two_m * k ** (two_m - 1)) for s in range(two_m)}
    x_arr = np.asarray(x, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    shape = np.broadcast(x_arr, t_arr).shape
    common = np.zeros(shape, dtype=complex)
    after = np.zeros(shape, dtype=complex)   # branch x > t
    before = np.zeros(shape, dtype=complex)  # branch x < t

    f_vals = {d: eval_solution(table, d, x_arr, k, dx) for d in ctx.permutation}
    phi_vals = {s: eval_adjoint(adjoint_table, s, t_arr, k) for s in ctx.permutation}

    for di, d in enumerate(ctx.decaying):
        for g in ctx.growing:
            replaced = mat.copy()
            replaced[:, di] = [eval_solution(table, g, 0.0, k, d=r) for r in range(m)]
            ratio = complex(np.linalg.det(replaced)) / W
            common = common + kappa[g] * phi_vals[g] * ratio * f_vals[d]
    for d in ctx.decaying:
        after = after + kappa[d] * phi_vals[d] * f_vals[d]
    for g in ctx.growing:
        before = before - kappa[g] * phi_vals[g] * f_vals[g]

    out = common + np.where(x_arr >= t_arr, after, before)
    if shape == ():
        return complex(out)
    return out
