"""Maximal Fermi coordinate charts of Robertson-Walker cosmologies.

Builds the metric of a big-bang cosmology in Fermi coordinates along a
comoving observer, extends the chart through the big bang to negative
cosmological time, and verifies the numerics against closed forms for
power-law scale factors and against finite differences.

Quick start::

    from fermichart import make_model, sample

    model = make_model("power", alpha=2.0)
    pt, ms = sample(model, tau=1.0, rho=0.3)
    print(pt.region, ms.g_tautau)

The command line front end is ``fermi-chart`` (see :mod:`fermichart.cli`).
"""

from .errors import (ConfigError, DivergenceError, DomainError,
                     FermiChartError, HypothesisViolationError,
                     InvalidArgumentError, NumericalFailureError,
                     OutOfChartError, SingularEvaluationError)
from .scalefactor import (ADOT0_INFINITE, ADOT0_POSITIVE, ADOT0_ZERO,
                          GridSpec, HorizonClassification, RegularityReport,
                          ScaleFactorModel, check_regularity,
                          classify_horizons, hubble_and_q, make_model)
from .quadrature import (DEFAULT_TOLERANCES, QuadratureResult, Tolerances,
                         adaptive_gk, chi_coordinate, fermi_radius,
                         fermi_radius_rate, proper_distance, singular_integral,
                         tanh_sinh)
from .oracle import (PowerLawParams, c_alpha, dg_drho_closed, dg_dtau_closed,
                     dt0_dtau_closed, g_tautau_closed, gamma_fn, hyp2f1,
                     rho_closed)
from .chart import (CSV_HEADER, ChartGridSpec, ChartPoint, MetricSample,
                    REGION_MINUS, REGION_PLUS, REGION_ZERO, csv_row, dg_drho,
                    dg_dtau, dt0_partials, g_angular, g_tautau, grid,
                    metric_matrix, rho_max, sample, solve_t0)
from .geodesic import (Christoffels2D, GeodesicTrace, TRACE_CSV_HEADER,
                       christoffels_2d, null_check_M0, trace_radial)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "FermiChartError", "InvalidArgumentError", "SingularEvaluationError",
    "NumericalFailureError", "OutOfChartError", "HypothesisViolationError",
    "DivergenceError", "DomainError", "ConfigError",
    # scale factors
    "ScaleFactorModel", "GridSpec", "RegularityReport",
    "HorizonClassification", "make_model", "hubble_and_q",
    "check_regularity", "classify_horizons",
    "ADOT0_ZERO", "ADOT0_POSITIVE", "ADOT0_INFINITE",
    # quadrature lane
    "QuadratureResult", "Tolerances", "DEFAULT_TOLERANCES", "adaptive_gk",
    "tanh_sinh", "singular_integral", "proper_distance", "fermi_radius",
    "fermi_radius_rate", "chi_coordinate",
    # closed-form lane
    "PowerLawParams", "gamma_fn", "hyp2f1", "c_alpha", "g_tautau_closed",
    "rho_closed", "dt0_dtau_closed", "dg_drho_closed", "dg_dtau_closed",
    # chart
    "REGION_PLUS", "REGION_ZERO", "REGION_MINUS", "ChartPoint",
    "MetricSample", "ChartGridSpec", "CSV_HEADER", "solve_t0", "g_tautau",
    "dg_drho", "dg_dtau", "dt0_partials", "rho_max", "g_angular",
    "metric_matrix", "sample", "grid", "csv_row",
    # geodesics
    "Christoffels2D", "GeodesicTrace", "TRACE_CSV_HEADER", "christoffels_2d",
    "trace_radial", "null_check_M0",
]
