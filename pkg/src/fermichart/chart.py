"""Fermi chart of a Robertson-Walker cosmology, extended through the big bang.

For an observer at fixed comoving position, Fermi coordinates label each
event by its proper time tau on the worldline and the proper distance rho
along the orthogonal spacelike radial geodesic.  The geodesic leaving the
worldline at time tau reaches cosmological time t0(tau, rho), strictly
decreasing in rho; t0 = 0 at rho = rho_M(tau) (the big-bang boundary M0)
and t0 < 0 beyond it, where the chart continues into the evenly extended
spacetime.  The full chart covers 0 <= rho < rho_max(tau) <= 2*rho_M(tau).

The metric in these coordinates is

    ds^2 = g_tautau(tau, rho) dtau^2 + drho^2 + g_thetatheta dOmega^2,

with g_tautau = -(1 - adot(tau) * f(tau, t0))^2 built from the supporting
integral f.  This module solves for t0, evaluates g_tautau and its two
first partials (with boundary-limit formulas engaged within boundary_eps of
M0), the angular coefficients for spatial curvature k in {-1, 0, +1}, the
4x4 metric matrix, and row-major grid sweeps with CSV serialization.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Tuple

import numpy as np

from .errors import (FermiChartError, HypothesisViolationError,
                     InvalidArgumentError, NumericalFailureError,
                     OutOfChartError, SingularEvaluationError)
from .quadrature import (DEFAULT_TOLERANCES, QuadratureResult, Tolerances,
                         adaptive_gk, chi_coordinate, dG_dtau, f_integral,
                         fermi_radius, fermi_radius_rate, I1, I2,
                         partial_tau_f0, proper_distance, singular_integral)
from .scalefactor import (ADOT0_INFINITE, ADOT0_POSITIVE, ADOT0_ZERO,
                          ScaleFactorModel)

__all__ = [
    "REGION_PLUS",
    "REGION_ZERO",
    "REGION_MINUS",
    "ChartPoint",
    "MetricSample",
    "ChartGridSpec",
    "CSV_HEADER",
    "solve_t0",
    "g_tautau",
    "dg_drho",
    "dg_dtau",
    "dt0_partials",
    "rho_max",
    "g_angular",
    "metric_matrix",
    "sample",
    "grid",
    "csv_row",
]

REGION_PLUS = "M_plus"    # t0 > boundary_eps: ordinary cosmological region
REGION_ZERO = "M_zero"    # |t0| <= boundary_eps: big-bang boundary
REGION_MINUS = "M_minus"  # t0 < -boundary_eps: negative cosmological time

CSV_HEADER = "tau,rho,t0,region,g_tautau,dg_drho,dg_dtau,g_thetatheta,lambda,err_max"

_SAMPLE_FIELDS = ("g_tautau", "dg_drho", "dg_dtau", "g_thetatheta", "lambda_k")


@dataclass(frozen=True)
class ChartPoint:
    """One chart location with its resolved cosmological time and region tag."""

    tau: float
    rho: float
    t0: float
    region: str


@dataclass(frozen=True)
class MetricSample:
    """Metric components at one chart point, with per-field error estimates.

    ``g_thetatheta`` and ``lambda_k`` are NaN when the angular coefficient is
    not defined for the requested curvature at this point (and ``failure``
    explains why); ``error_estimates`` maps field names to a posteriori
    absolute error estimates.  ``failure`` is None for clean samples.
    """

    g_tautau: float
    dg_drho: float
    dg_dtau: float
    g_thetatheta: float = math.nan
    lambda_k: float = math.nan
    error_estimates: dict = field(default_factory=dict)
    failure: Optional[str] = None

    def g_phiphi(self, theta: float) -> float:
        """Azimuthal coefficient g_phiphi = g_thetatheta * sin(theta)**2."""
        return self.g_thetatheta * math.sin(theta) ** 2

    @property
    def err_max(self) -> float:
        if not self.error_estimates:
            return math.nan
        return max(self.error_estimates.values())


@dataclass(frozen=True)
class ChartGridSpec:
    """Row-major sampling grid: n_tau proper times x n_rho radii.

    Radii are the fractions ``linspace(0, rho_fraction_max, n_rho)`` of the
    per-row boundary radius rho_M(tau); rho_fraction_max must stay inside
    (0, 2) so every requested point lies in the chart domain.
    """

    tau_min: float
    tau_max: float
    n_tau: int
    rho_fraction_max: float
    n_rho: int

    def __post_init__(self):
        if not (0.0 < self.tau_min <= self.tau_max):
            raise InvalidArgumentError(
                f"need 0 < tau_min <= tau_max, got {self.tau_min}, {self.tau_max}")
        if self.n_tau < 2 or self.n_rho < 2:
            raise InvalidArgumentError("n_tau and n_rho must be >= 2")
        if not (0.0 < self.rho_fraction_max < 2.0):
            raise InvalidArgumentError(
                f"rho_fraction_max must lie in (0, 2), got {self.rho_fraction_max}")

    def taus(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, self.n_tau)

    def fractions(self) -> np.ndarray:
        return np.linspace(0.0, self.rho_fraction_max, self.n_rho)


def _region_of(t0: float, tol: Tolerances) -> str:
    if t0 > tol.boundary_eps:
        return REGION_PLUS
    if t0 >= -tol.boundary_eps:
        return REGION_ZERO
    return REGION_MINUS


def _is_milne(model: ScaleFactorModel) -> bool:
    if model.family == "milne":
        return True
    return model.family == "power" and float(model.params.get("alpha", 0.0)) == 1.0


def _gk_value(f, breakpoints, tol: Tolerances, what: str) -> QuadratureResult:
    res = adaptive_gk(f, breakpoints, 0.5 * tol.quad_abs, tol.quad_rel)
    if not res.converged:
        raise NumericalFailureError(
            f"{what}: quadrature failed to converge "
            f"(estimate {res.abs_error_estimate:.3e})",
            value=res.value, error_estimate=res.abs_error_estimate)
    return res


def solve_t0(model: ScaleFactorModel, tau: float, rho: float,
             tol: Optional[Tolerances] = None,
             rho_m: Optional[float] = None,
             guess: Optional[float] = None) -> float:
    """Invert rho(tau, .) for the cosmological time t0 of a chart point.

    Safeguarded Newton iteration (analytic derivative drho/dt0 =
    -a(|t0|)/sqrt(a(tau)^2 - a(t0)^2), bisection fallback) on the strictly
    decreasing map t0 -> rho(tau, t0), driven to |rho(t0) - rho| <=
    root_tol.  When rho is within root_tol of rho_M(tau) the exact boundary
    root t0 = 0 is returned, so boundary-limit formulas engage for points
    constructed at rho = fermi_radius(tau).

    ``rho_m`` passes a precomputed fermi_radius(tau); ``guess`` warm-starts
    the iteration (grid sweeps hand in the previous point's root).

    Raises OutOfChartError for rho >= 2*rho_M(tau), where no root exists.
    """
    tol = tol or DEFAULT_TOLERANCES
    if not tau > 0.0:
        raise InvalidArgumentError("tau must be > 0")
    if not rho >= 0.0:
        raise InvalidArgumentError("rho must be >= 0")
    if rho_m is None:
        rho_m = fermi_radius(model, tau, tol)
    if rho >= 2.0 * rho_m:
        raise OutOfChartError(
            f"rho={rho} is outside the chart domain [0, {2.0 * rho_m}) at tau={tau}")
    if rho == 0.0:
        return tau
    if abs(rho - rho_m) <= tol.root_tol:
        return 0.0

    def resid(t0: float) -> float:
        if t0 >= 0.5 * tau:
            return proper_distance(model, tau, t0, tol) - rho
        # away from the singular endpoint, rho(t0) = rho_M - G(t0) with
        # G = integral 0..t0 of a(|t|)/sqrt(a(tau)^2 - a(t)^2) dt, a smooth
        # integrand on |t| <= tau/2; reuses the precomputed rho_M

        def f(t):
            u = np.abs(t)
            return model.d(0, u) / np.sqrt(model.a2_diff(tau, u, tau - u))

        if t0 > 0.0:
            G = _gk_value(f, [0.0, t0], tol, "solve_t0").value
        elif t0 < 0.0:
            G = -_gk_value(f, [t0, 0.0], tol, "solve_t0").value
        else:
            G = 0.0
        return rho_m - G - rho

    lo = -tau * (1.0 - 1e-15)   # rho -> 2*rho_M as t0 -> -tau
    hi = tau                    # rho(tau) = 0
    t0 = guess if guess is not None else tau * (1.0 - rho / rho_m)
    if not (lo < t0 < hi):
        t0 = 0.5 * (lo + hi)
    r = resid(t0)
    for _ in range(100):
        if abs(r) <= tol.root_tol:
            return t0
        if r > 0.0:
            lo = t0
        else:
            hi = t0
        x = abs(t0)
        a0sq = float(model.a2_diff(tau, x, tau - x))
        deriv = -float(model.d(0, x)) / math.sqrt(a0sq) if a0sq > 0.0 else -math.inf
        t_new = t0 - r / deriv if math.isfinite(deriv) and deriv < 0.0 else 0.5 * (lo + hi)
        if not (lo < t_new < hi):
            t_new = 0.5 * (lo + hi)
        if t_new == t0:  # bracket exhausted at float resolution
            break
        t0 = t_new
        r = resid(t0)
    raise NumericalFailureError(
        f"solve_t0(tau={tau}, rho={rho}) stalled with residual {r:.3e}",
        value=t0, error_estimate=abs(r))


def _resolve(model: ScaleFactorModel, tau: float, rho: float, tol: Tolerances,
             rho_m: Optional[float], guess: Optional[float] = None
             ) -> Tuple[float, float]:
    if rho_m is None:
        rho_m = fermi_radius(model, tau, tol)
    t0 = solve_t0(model, tau, rho, tol, rho_m=rho_m, guess=guess)
    return rho_m, t0


def _J(model: ScaleFactorModel, tau: float, x: float, tol: Tolerances) -> QuadratureResult:
    """integral x..tau of (addot/adot^2) / sqrt(a(tau)^2 - a(t)^2) dt."""

    def g(u, d):
        ad = model.d(1, u)
        add = model.d(2, u)
        return (add / (ad * ad)) / np.sqrt(model.a2_diff(tau, u, d))

    res = singular_integral(model, tau, x, g, tol)
    if not res.converged:
        raise NumericalFailureError(
            "J integral failed to converge",
            value=res.value, error_estimate=res.abs_error_estimate)
    return res


def _g_pieces(model: ScaleFactorModel, tau: float, t0: float, tol: Tolerances):
    """(f, f_err, bracket, g, g_err) with the boundary pin applied."""
    t0_eff = 0.0 if abs(t0) <= tol.boundary_eps else t0
    fres = f_integral(model, tau, t0_eff, tol, result=True)
    ad_tau = float(model.d(1, tau))
    bracket = 1.0 - ad_tau * fres.value
    g = -bracket * bracket
    g_err = 2.0 * abs(bracket) * abs(ad_tau) * fres.abs_error_estimate
    return fres.value, fres.abs_error_estimate, bracket, g, g_err


def g_tautau(model: ScaleFactorModel, tau: float, rho: float,
             tol: Optional[Tolerances] = None,
             rho_m: Optional[float] = None) -> float:
    """Time-time metric component g_tautau(tau, rho) on [0, 2*rho_M(tau)).

    Equals -(1 - adot(tau) * f(tau, t0(tau, rho)))^2 <= 0; exactly -1 on
    the worldline and everywhere for Milne.  The domain is the full
    two-sided extension; the stricter chart bound rho < rho_max(tau) is
    enforced by :func:`metric_matrix` and the geodesic tracer, not here
    (rho_max itself locates the zero of this function).
    """
    tol = tol or DEFAULT_TOLERANCES
    _, t0 = _resolve(model, tau, rho, tol, rho_m)
    return _g_pieces(model, tau, t0, tol)[3]


def dg_drho(model: ScaleFactorModel, tau: float, rho: float,
            tol: Optional[Tolerances] = None,
            rho_m: Optional[float] = None) -> float:
    """Radial partial of g_tautau at fixed tau.

    Interior: 2*s * adot(tau) * adot(|t0|) * J(|t0|) with J the convergent
    tail integral of (addot/adot^2)/sqrt(a(tau)^2 - a(t)^2) and
    s = 1 - adot(tau)*f the signed bracket whose square is -g.  Using the
    signed s (not sqrt(-g) = |s|) keeps the formula valid past an interior
    zero of g, i.e. beyond rho_max inside the extended domain.  Within
    boundary_eps of M0 the limit formula replaces it:
    2*s * adot(tau) / a(tau) when adot(0+) = 0, and
    2*s * adot(tau) * adot(0+) * J(0+) when 0 < adot(0+) < infinity.
    adot(0+) = infinity admits no derivative extension and raises
    HypothesisViolationError.
    """
    tol = tol or DEFAULT_TOLERANCES
    _, t0 = _resolve(model, tau, rho, tol, rho_m)
    return _dg_drho_from_t0(model, tau, t0, tol)[0]


def _dg_drho_from_t0(model: ScaleFactorModel, tau: float, t0: float,
                     tol: Tolerances) -> Tuple[float, float]:
    if t0 >= tau:  # worldline: g == -1 identically along rho = 0
        return 0.0, 0.0
    _, f_err, s, g, g_err = _g_pieces(model, tau, t0, tol)
    ad_tau = float(model.d(1, tau))
    if abs(t0) <= tol.boundary_eps:
        cls = model.adot0_class
        if cls == ADOT0_INFINITE:
            raise HypothesisViolationError(
                "adot(0+) is infinite: g_tautau extends continuously through "
                "the boundary but its radial derivative diverges there")
        if cls == ADOT0_ZERO:
            val = 2.0 * s * ad_tau / float(model.d(0, tau))
            err = 2.0 * abs(ad_tau) / float(model.d(0, tau)) * abs(ad_tau) * f_err
            return val, err
        ad0 = float(model._limit0[1])
        jres = _J(model, tau, 0.0, tol)
        val = 2.0 * s * ad_tau * ad0 * jres.value
        err = 2.0 * abs(ad_tau * ad0) * (abs(s) * jres.abs_error_estimate
                                         + abs(jres.value) * abs(ad_tau) * f_err)
        return val, err
    x = abs(t0)
    ad_x = float(model.d(1, x))
    jres = _J(model, tau, x, tol)
    val = 2.0 * s * ad_tau * ad_x * jres.value
    err = 2.0 * abs(ad_tau * ad_x) * (abs(s) * jres.abs_error_estimate
                                      + abs(jres.value) * abs(ad_tau) * f_err)
    return val, err


def dt0_partials(model: ScaleFactorModel, tau: float, rho: float,
                 tol: Optional[Tolerances] = None,
                 rho_m: Optional[float] = None) -> Tuple[float, float]:
    """(dt0/drho, dt0/dtau) of the implicit function t0(tau, rho).

    dt0/drho = -sqrt(a(tau)^2 - a(t0)^2) / a(|t0|);
    dt0/dtau = (sqrt(a(tau)^2 - a(t0)^2) / a(|t0|)) * (drho_M/dtau - dG/dtau),
    both valid on either side of the boundary.  At the boundary itself the
    partials blow up (a(|t0|) -> 0) and SingularEvaluationError is raised;
    callers must switch to boundary-limit formulas of the quantities they
    actually need.
    """
    tol = tol or DEFAULT_TOLERANCES
    _, t0 = _resolve(model, tau, rho, tol, rho_m)
    if t0 >= tau:
        return 0.0, 1.0                     # worldline limit t0(tau, 0) = tau
    if abs(t0) <= tol.boundary_eps:
        raise SingularEvaluationError(
            "dt0 partials are singular at the boundary t0 = 0")
    x = abs(t0)
    sA0 = math.sqrt(float(model.a2_diff(tau, x, tau - x)))
    a_x = float(model.d(0, x))
    rate = fermi_radius_rate(model, tau, tol)
    dG = dG_dtau(model, tau, t0, tol)
    return -sA0 / a_x, (sA0 / a_x) * (rate - dG)


def dg_dtau(model: ScaleFactorModel, tau: float, rho: float,
            tol: Optional[Tolerances] = None,
            rho_m: Optional[float] = None) -> float:
    """Proper-time partial of g_tautau at fixed rho.

    Interior assembly: 2*s * [addot(tau)*f + adot(tau)*(df/dtau)] with
    s = 1 - adot(tau)*f the signed bracket (see dg_drho for why s rather
    than sqrt(-g) = |s|),
    where df/dtau combines the fixed-t0 tau-derivative of f (the I1 + I2
    pair for t0 > 0, its reflection 2*d/dtau f(tau,0) - (I1+I2) for t0 < 0)
    with the t0-motion term (df/dt0) * (dt0/dtau).  Within boundary_eps the
    boundary limit is used instead:
    df/dtau|_M0 = d/dtau f(tau,0) - (drho_M/dtau)/a(tau) when adot(0+) = 0,
    and d/dtau f(tau,0) - adot(0+)*(drho_M/dtau)*J(0+) when adot(0+) is
    finite and positive; infinite adot(0+) raises HypothesisViolationError.
    """
    tol = tol or DEFAULT_TOLERANCES
    _, t0 = _resolve(model, tau, rho, tol, rho_m)
    return _dg_dtau_from_t0(model, tau, t0, tol)[0]


def _dg_dtau_from_t0(model: ScaleFactorModel, tau: float, t0: float,
                     tol: Tolerances) -> Tuple[float, float]:
    if t0 >= tau:  # worldline: g == -1 identically along rho = 0
        return 0.0, 0.0
    fval, f_err, s, g, g_err = _g_pieces(model, tau, t0, tol)
    ad_tau = float(model.d(1, tau))
    add_tau = float(model.d(2, tau))
    if abs(t0) <= tol.boundary_eps:
        cls = model.adot0_class
        if cls == ADOT0_INFINITE:
            raise HypothesisViolationError(
                "adot(0+) is infinite: g_tautau extends continuously through "
                "the boundary but its tau derivative diverges there")
        ptf0 = partial_tau_f0(model, tau, tol, result=True)
        rate = fermi_radius_rate(model, tau, tol, result=True)
        if cls == ADOT0_ZERO:
            dtf = ptf0.value - rate.value / float(model.d(0, tau))
            dtf_err = ptf0.abs_error_estimate + rate.abs_error_estimate / float(model.d(0, tau))
        else:
            ad0 = float(model._limit0[1])
            jres = _J(model, tau, 0.0, tol)
            dtf = ptf0.value - ad0 * rate.value * jres.value
            dtf_err = (ptf0.abs_error_estimate
                       + abs(ad0) * (abs(rate.value) * jres.abs_error_estimate
                                     + abs(jres.value) * rate.abs_error_estimate))
        val = 2.0 * s * (add_tau * fval + ad_tau * dtf)
        err = 2.0 * abs(s) * (abs(add_tau) * f_err + abs(ad_tau) * dtf_err) \
            + 2.0 * abs(add_tau * fval + ad_tau * dtf) * abs(ad_tau) * f_err
        return val, err

    x = abs(t0)
    i1 = I1(model, tau, x, tol, result=True)
    i2 = I2(model, tau, x, tol, result=True)
    i12 = i1.value + i2.value
    i12_err = i1.abs_error_estimate + i2.abs_error_estimate
    if t0 > 0.0:
        dtf_fixed = i12
        dtf_fixed_err = i12_err
    else:
        ptf0 = partial_tau_f0(model, tau, tol, result=True)
        dtf_fixed = 2.0 * ptf0.value - i12
        dtf_fixed_err = 2.0 * ptf0.abs_error_estimate + i12_err
    sA0 = math.sqrt(float(model.a2_diff(tau, x, tau - x)))
    a_x = float(model.d(0, x))
    ad_x = float(model.d(1, x))
    jres = _J(model, tau, x, tol)
    df_dt0 = -(a_x * ad_x / sA0) * jres.value
    rate = fermi_radius_rate(model, tau, tol, result=True)
    dG = dG_dtau(model, tau, t0, tol, result=True)
    dt0dtau = (sA0 / a_x) * (rate.value - dG.value)
    motion = df_dt0 * dt0dtau
    motion_err = (abs(ad_x * (rate.value - dG.value)) * jres.abs_error_estimate
                  + abs(ad_x * jres.value) * (rate.abs_error_estimate
                                              + dG.abs_error_estimate))
    dtf = dtf_fixed + motion
    dtf_err = dtf_fixed_err + motion_err
    val = 2.0 * s * (add_tau * fval + ad_tau * dtf)
    err = 2.0 * abs(s) * (abs(add_tau) * f_err + abs(ad_tau) * dtf_err) \
        + 2.0 * abs(add_tau * fval + ad_tau * dtf) * abs(ad_tau) * f_err
    return val, err


def rho_max(model: ScaleFactorModel, tau: float,
            tol: Optional[Tolerances] = None, samples: int = 256) -> float:
    """Chart radius: first zero of g_tautau(tau, .) on (0, 2*rho_M(tau)).

    Scans the bracket 1 - adot(tau)*f (whose zero is g's, crossed
    transversally) on ``samples`` equispaced radii, bisects the first sign
    change to root_tol, and returns 2*rho_M(tau) when no zero exists.  A
    near-zero interior minimum without a sign change triggers one x4
    refinement of the scan around it before the fallback is accepted, since
    a coarse scan can straddle a narrow double crossing.
    """
    tol = tol or DEFAULT_TOLERANCES
    if samples < 8:
        raise InvalidArgumentError("samples must be >= 8")
    rho_m = fermi_radius(model, tau, tol)
    ad_tau = float(model.d(1, tau))
    last_t0 = [None]

    def h(rho: float) -> float:
        if rho == 0.0:
            return 1.0
        t0 = solve_t0(model, tau, rho, tol, rho_m=rho_m, guess=last_t0[0])
        last_t0[0] = t0
        t0_eff = 0.0 if abs(t0) <= tol.boundary_eps else t0
        return 1.0 - ad_tau * f_integral(model, tau, t0_eff, tol)

    def first_crossing(rhos: np.ndarray) -> Optional[Tuple[float, float]]:
        prev_r, prev_h = rhos[0], h(float(rhos[0]))
        for r in rhos[1:]:
            cur = h(float(r))
            if prev_h > 0.0 >= cur:
                return float(prev_r), float(r)
            prev_r, prev_h = r, cur
        return None

    rhos = np.linspace(0.0, 2.0 * rho_m, samples, endpoint=False)
    bracket = first_crossing(rhos)
    if bracket is None:
        hs = np.array([h(float(r)) for r in rhos])
        i = int(np.argmin(hs))
        if 0 < i < samples - 1 and hs[i] < 0.05:
            fine = np.linspace(rhos[i - 1], rhos[i + 1], 4 * samples)
            bracket = first_crossing(fine)
        if bracket is None:
            return 2.0 * rho_m
    lo, hi = bracket
    while hi - lo > tol.root_tol:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def g_angular(model: ScaleFactorModel, tau: float, rho: float, k: int = 0,
              tol: Optional[Tolerances] = None,
              rho_m: Optional[float] = None) -> Tuple[float, float]:
    """Angular coefficient g_thetatheta and shape function lambda_k.

    Interior (|t0| > boundary_eps): g_thetatheta = a(t0)^2 * S_k(chi)^2
    with chi = chi_|t0|(tau) and S_k = sinh, identity, sin for k = -1, 0,
    +1; lambda_k = (g_thetatheta - rho^2)/rho^4.  On the boundary (k = 0):
    g_thetatheta = 1/H(0+)^2, which is exactly 0 for big-bang models, and
    lambda_k = (g_thetatheta - rho_M^2)/rho_M^4.

    Curvature support: k = 0 extends through the whole chart.  k = -1
    extends only for Milne, where a(t0)*sinh(chi) = rho identically and the
    smooth (Minkowski) continuation g_thetatheta = rho^2, lambda = 0 is
    returned everywhere; for any other model k = -1 is interior-only and
    boundary/negative-time points raise HypothesisViolationError.  k = +1
    is interior-only for every model.  rho = 0 returns (0.0, 0.0) by the
    defining limit lambda_k(tau, 0) = 0.
    """
    tol = tol or DEFAULT_TOLERANCES
    if k not in (-1, 0, 1):
        raise InvalidArgumentError(f"k must be -1, 0 or +1, got {k}")
    if not rho >= 0.0:
        raise InvalidArgumentError("rho must be >= 0")
    if rho == 0.0:
        return 0.0, 0.0
    if k == -1 and _is_milne(model):
        if rho_m is None:
            rho_m = fermi_radius(model, tau, tol)
        if rho >= 2.0 * rho_m:
            raise OutOfChartError(
                f"rho={rho} is outside the chart domain [0, {2.0 * rho_m})")
        return rho * rho, 0.0
    rho_m, t0 = _resolve(model, tau, rho, tol, rho_m)
    return _angular_from_t0(model, tau, rho, t0, k, tol, rho_m)


def metric_matrix(model: ScaleFactorModel, tau: float,
                  x: float, y: float, z: float, k: int = 0,
                  tol: Optional[Tolerances] = None) -> np.ndarray:
    """4x4 Fermi metric at Cartesian chart position (x, y, z).

    Rows/columns are ordered (tau, x, y, z): entry (0,0) is g_tautau and the
    spatial block is delta_ij + lambda_k * (rho^2 delta_ij - x_i x_j).  The
    point must satisfy rho < rho_max(tau) (the chart domain); on the
    boundary sphere rho = rho_M(tau) with k = 0 the matrix has rank 2.
    """
    tol = tol or DEFAULT_TOLERANCES
    pos = np.array([x, y, z], dtype=float)
    rho = float(np.sqrt(np.sum(pos * pos)))
    rmax = rho_max(model, tau, tol)
    if rho >= rmax:
        raise OutOfChartError(
            f"rho={rho} is outside the chart domain [0, {rmax}) at tau={tau}")
    g = g_tautau(model, tau, rho, tol)
    M = np.zeros((4, 4))
    M[0, 0] = g
    if rho == 0.0:
        M[1:, 1:] = np.eye(3)
        return M
    _, lam = g_angular(model, tau, rho, k, tol)
    M[1:, 1:] = (1.0 + lam * rho * rho) * np.eye(3) - lam * np.outer(pos, pos)
    return M


def sample(model: ScaleFactorModel, tau: float, rho: float, k: int = 0,
           tol: Optional[Tolerances] = None,
           rho_m: Optional[float] = None) -> MetricSample:
    """Evaluate all metric fields at one chart point.

    Raises on failure; :func:`grid` wraps this and records per-point
    failures in-row instead.
    """
    tol = tol or DEFAULT_TOLERANCES
    rho_m, t0 = _resolve(model, tau, rho, tol, rho_m)
    return _sample_from_t0(model, tau, rho, t0, k, tol, rho_m)


def _sample_from_t0(model: ScaleFactorModel, tau: float, rho: float,
                    t0: float, k: int, tol: Tolerances,
                    rho_m: float) -> MetricSample:
    errs = {}
    _, _, _, g, g_err = _g_pieces(model, tau, t0, tol)
    dgr, dgr_err = _dg_drho_from_t0(model, tau, t0, tol)
    # the root solve contributes |dg/drho| * root_tol of g-uncertainty
    errs["g_tautau"] = g_err + abs(dgr) * tol.root_tol
    errs["dg_drho"] = dgr_err
    dgt, dgt_err = _dg_dtau_from_t0(model, tau, t0, tol)
    errs["dg_dtau"] = dgt_err
    if k == -1 and _is_milne(model):
        gth, lam = rho * rho, 0.0
        errs["g_thetatheta"] = 0.0
    else:
        gth, lam = _angular_from_t0(model, tau, rho, t0, k, tol, rho_m)
        errs["g_thetatheta"] = 8.0 * tol.quad_abs * max(1.0, gth)
    return MetricSample(g_tautau=g, dg_drho=dgr, dg_dtau=dgt,
                        g_thetatheta=gth, lambda_k=lam,
                        error_estimates=errs)


def _angular_from_t0(model: ScaleFactorModel, tau: float, rho: float,
                     t0: float, k: int, tol: Tolerances,
                     rho_m: float) -> Tuple[float, float]:
    if rho == 0.0:
        return 0.0, 0.0
    if abs(t0) <= tol.boundary_eps or t0 < 0.0:
        where = ("on the boundary" if abs(t0) <= tol.boundary_eps
                 else "at negative cosmological time")
        if k == -1:
            raise HypothesisViolationError(
                f"k=-1 angular coefficients admit no continuous extension {where} "
                "(only the Milne model does)")
        if k == 1:
            raise InvalidArgumentError(
                f"k=+1 angular coefficients are defined at interior points only, not {where}")
        if abs(t0) <= tol.boundary_eps:
            a0 = model._limit0[0]
            if a0 is None or a0 != 0.0:
                raise HypothesisViolationError(
                    "boundary angular limit requires a(0+) = 0 (big-bang model)")
            gth = 0.0  # 1/H(0+)^2 with H(0+) = +infinity
            return gth, (gth - rho_m * rho_m) / rho_m ** 4
    x = abs(t0)
    chi = chi_coordinate(model, tau, x, tol)
    a_x = float(model.d(0, x))
    s = {0: chi, -1: math.sinh(chi), 1: math.sin(chi)}[k]
    gth = a_x * a_x * s * s
    return gth, (gth - rho * rho) / rho ** 4


def grid(model: ScaleFactorModel, spec: ChartGridSpec, k: int = 0,
         tol: Optional[Tolerances] = None,
         threads: Optional[int] = None
         ) -> Iterator[Tuple[ChartPoint, MetricSample]]:
    """Row-major sweep over the grid: yields (ChartPoint, MetricSample).

    Rows are proper times, columns the per-row radii
    rho = fraction * rho_M(tau).  Per-point failures are recorded in the
    sample's ``failure`` field (with NaN values) rather than aborting the
    sweep.  ``threads`` (default: the FERMI_CHART_THREADS environment
    variable, else 1) distributes whole rows over a thread pool; the merge
    order, and therefore all output, is identical for any thread count.
    """
    tol = tol or DEFAULT_TOLERANCES
    if threads is None:
        threads = int(os.environ.get("FERMI_CHART_THREADS", "1") or "1")
    threads = max(1, threads)
    taus = spec.taus()
    fracs = spec.fractions()

    def compute_row(tau: float):
        rows = []
        try:
            rho_m = fermi_radius(model, tau, tol)
        except FermiChartError as exc:
            for frac in fracs:
                pt = ChartPoint(tau=tau, rho=math.nan, t0=math.nan,
                                region=REGION_ZERO)
                rows.append((pt, MetricSample(math.nan, math.nan, math.nan,
                                              failure=f"fermi_radius: {exc}")))
            return rows
        prev_t0 = None
        for frac in fracs:
            rho = float(frac) * rho_m
            try:
                t0 = solve_t0(model, tau, rho, tol, rho_m=rho_m, guess=prev_t0)
                prev_t0 = t0
            except FermiChartError as exc:
                region = REGION_PLUS if rho < rho_m else REGION_MINUS
                pt = ChartPoint(tau=tau, rho=rho, t0=math.nan, region=region)
                rows.append((pt, MetricSample(math.nan, math.nan, math.nan,
                                              failure=f"solve_t0: {exc}")))
                continue
            pt = ChartPoint(tau=tau, rho=rho, t0=t0, region=_region_of(t0, tol))
            try:
                ms = _sample_from_t0(model, tau, rho, t0, k, tol, rho_m)
            except FermiChartError as exc:
                ms = MetricSample(math.nan, math.nan, math.nan,
                                  failure=str(exc))
            rows.append((pt, ms))
        return rows

    if threads == 1:
        for tau in taus:
            yield from compute_row(float(tau))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for rows in pool.map(compute_row, [float(t) for t in taus]):
                yield from rows


def _fmt(v: float) -> str:
    return "%.17g" % v


def csv_row(point: ChartPoint, ms: MetricSample) -> str:
    """One CSV row in the fixed column order of :data:`CSV_HEADER`."""
    return ",".join([
        _fmt(point.tau), _fmt(point.rho), _fmt(point.t0), point.region,
        _fmt(ms.g_tautau), _fmt(ms.dg_drho), _fmt(ms.dg_dtau),
        _fmt(ms.g_thetatheta), _fmt(ms.lambda_k), _fmt(ms.err_max),
    ])
