"""Equivalence of ensembles for Bernoulli measures with fixed particle number and first moment."""

from .errors import (
    CapExceeded,
    DegenerateCorrelation,
    DomainError,
    EnsembleError,
    GridTooCoarse,
    InfeasibleConstraint,
    IntervalMismatch,
    NoConvergence,
    OutOfDomain,
)
from .profile import F, G, MacroState, ProfileParams, beta, dilog, log_g, phi
from .inversion import InversionResult, a_of_b_rho, invert
from .ensemble import (
    CanonicalSpec,
    CountTable,
    ParticleConfig,
    count,
    exact_marginal,
    sample_exact,
    sample_mcmc,
    verify_class_uniformity,
)
from .llt import WeightedSumModel, char_fn, exact_pmf, gaussian_q0, sup_error
from .young import Curve, HeightFunction, height_from_config, limit_curve, moment_test, scaled_height, sup_distance
from .vershik import BoseCurveParams, bose_L, gamma_scale, identify_curves, ode_residual, rotate_to_fermi

__version__ = "0.1.0"
