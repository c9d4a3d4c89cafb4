"""Finite-difference numerical differentiation and case-study benchmarks."""

from .convergence import ConvergenceResult, CostProfile, cost_profile, observed_order
from .metrics import ErrorReport, case_error_table, error_variants, signed_relative_error
from .models import (
    LogisticModel,
    MarketModel,
    SingularityError,
    TemperatureModel,
    equilibrium_price,
    f1,
    logistic_rate,
    logistic_singularity,
    logistic_value,
    market_price,
    market_rate,
    sample_model,
    temperature_rate,
    temperature_value,
)
from .series import Series, read_series_csv, write_series_csv
from .stencils import (
    SCHEMES,
    BoundaryPolicy,
    Scheme,
    Stencil,
    StencilError,
    builtin_stencil,
    differentiate_series,
    estimate,
    generate_stencil,
    theoretical_order,
)

__version__ = "0.1.0"
