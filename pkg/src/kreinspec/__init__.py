"""Spectra of J-selfadjoint operators and numerical checks of their enclosures."""

__version__ = "0.1.0"

from .krein import (
    FundamentalSymmetry,
    KreinOperator,
    NumericalError,
    SpectralPoint,
    SpectralType,
    StadiumRegion,
    classify_eigenpairs,
    classify_spectrum,
    compression_inverse_residual,
    krein_adjoint,
    krein_inner,
    krein_projection,
    resolvent_growth_check,
    stadium_membership,
)
from .blocks import BlockOperator, assemble, enclosure, r_alpha, resolvent_order_one, sharp_example
from .perturbation import (
    NonNegativePair,
    bounds_main1,
    bounds_main2,
    spectral_projections,
    tau_eta_quadrature,
    tau_quadrature,
    verify_main1,
    verify_main2,
)
from .sturm import (
    Potential,
    SturmLiouvilleProblem,
    discretize,
    krein_resolvent_a0,
    m_endpoints,
    resolvent_norm_bound_check,
    sl_enclosure,
    solve_and_verify,
    tau0_estimate_sl,
)

__all__ = [name for name in dir() if not name.startswith("_")]
