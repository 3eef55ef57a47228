"""Spectral analysis and inverse scattering for exponential operator pencils.

The package solves, on the half line [0, inf), the pencil

    (-1)^m y^(2m) + sum_{gamma<=2m-2} p_gamma(x, k) y^(gamma) = k^{2m} y,

whose coefficients are finite sums p_gamma = sum p[gamma,s,n] k^s e^{-nx}.
It constructs the 2m exponential-series solutions and their adjoints, the
sectorial Wronskians and eigenvalues, the resolvent kernel, the pole-residue
normalizers, and the inverse map recovering the coefficient table from
scattering data.
"""

from .errors import (
    ExpencilError,
    ConfigError,
    IndexOutOfRange,
    ComputeError,
    InvalidPole,
    NotDivisible,
    Resonance,
    SingularLevel,
    NearPole,
    OnCriticalRay,
    ContourThroughZero,
    PoleOnContour,
    EigenvalueHit,
    AmbiguousResidue,
    StiffnessFailure,
    InconsistentData,
)
from .model import (
    omega,
    all_omegas,
    pole_k,
    PoleLattice,
    PotentialCoefficients,
    build_potential,
    eval_coefficient,
    weighted_norm,
    load_potential_config,
)
from .algebra import (
    binomial,
    ComplexPolynomial,
    PolePolynomial,
    poly_div_at_root,
    quotient_main,
    quotient_general,
    pp_mul_split,
)

__version__ = "0.1.0"
