"""Geodesic verification of the extended Fermi chart.

Two differential-geometric claims are checked numerically rather than
assumed: the radial coordinate lines tau = const are geodesics of the 1+1
metric diag(g_tautau, 1) all the way across the big-bang boundary M0, and
M0 itself -- the curve rho = rho_M(tau) -- is lightlike.

The tracer integrates the geodesic equations with honestly evaluated
connection coefficients; it does not hard-code the known solution.  For the
exact initial data (tau0, 0) with tangent (0, 1) every tau-increment is
proportional to dtau/ds = 0, so a healthy metric keeps the trace on
tau = tau0 to machine precision, while any inf/NaN in the coefficients
would immediately poison the state.  The discrete geodesic-equation
residual is recomputed afterwards by finite differences of the stored
trace, independent of the integrator's right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .chart import (REGION_MINUS, REGION_PLUS, REGION_ZERO, _dg_drho_from_t0,
                    _dg_dtau_from_t0, _g_pieces, _region_of, rho_max, solve_t0)
from .errors import InvalidArgumentError, OutOfChartError
from .quadrature import (DEFAULT_TOLERANCES, Tolerances, fermi_radius,
                         fermi_radius_rate)
from .scalefactor import ScaleFactorModel

__all__ = [
    "Christoffels2D",
    "GeodesicTrace",
    "TRACE_CSV_HEADER",
    "christoffels_2d",
    "trace_radial",
    "null_check_M0",
]

TRACE_CSV_HEADER = "rho,tau,dtau_drho,region,residual"


@dataclass(frozen=True)
class Christoffels2D:
    """The four nonzero connection coefficients of diag(g_tautau(tau,rho), 1).

    ``gamma_tau_rhotau`` equals ``gamma_tau_taurho`` by symmetry of the
    lower indices; both are carried so the full set of nonzero symbols is
    explicit.
    """

    gamma_tau_tautau: float   # dg_dtau / (2 g)
    gamma_tau_taurho: float   # dg_drho / (2 g)
    gamma_tau_rhotau: float   # = gamma_tau_taurho
    gamma_rho_tautau: float   # -dg_drho / 2


@dataclass(frozen=True)
class GeodesicTrace:
    """Stored radial geodesic trace and its quality measures.

    ``points`` holds (rho, tau, dtau_drho) triples in step order;
    ``regions`` the per-point region tags; ``residuals`` the per-point
    finite-difference geodesic-equation residuals whose maximum is
    ``residual_norm``.  ``converged`` is False when the residual norm still
    exceeded the tolerance after the automatic 4x step refinement.
    """

    tau0: float
    rho_end: float
    steps: int
    points: List[Tuple[float, float, float]]
    regions: List[str]
    residuals: np.ndarray
    residual_norm: float
    max_tau_deviation: float
    converged: bool

    def csv_rows(self):
        for (rho, tau, slope), region, res in zip(self.points, self.regions,
                                                  self.residuals):
            yield ("%.17g,%.17g,%.17g,%s,%.17g"
                   % (rho, tau, slope, region, res))


def christoffels_2d(model: ScaleFactorModel, tau: float, rho: float,
                    tol: Optional[Tolerances] = None) -> Christoffels2D:
    """Connection coefficients of the 1+1 chart metric at (tau, rho).

    All identically zero for Milne (the metric is constant).  Finite across
    the boundary M0 whenever the C1 extension hypotheses hold.
    """
    tol = tol or DEFAULT_TOLERANCES
    rmax = rho_max(model, tau, tol)
    if not 0.0 <= rho < rmax:
        raise OutOfChartError(
            f"rho={rho} is outside the chart domain [0, {rmax}) at tau={tau}")
    rho_m = fermi_radius(model, tau, tol)
    t0 = solve_t0(model, tau, rho, tol, rho_m=rho_m)
    g = _g_pieces(model, tau, t0, tol)[3]
    dgr = _dg_drho_from_t0(model, tau, t0, tol)[0]
    dgt = _dg_dtau_from_t0(model, tau, t0, tol)[0]
    return Christoffels2D(
        gamma_tau_tautau=dgt / (2.0 * g),
        gamma_tau_taurho=dgr / (2.0 * g),
        gamma_tau_rhotau=dgr / (2.0 * g),
        gamma_rho_tautau=-0.5 * dgr,
    )


def _make_metric_memo(model: ScaleFactorModel, tol: Tolerances):
    """Per-trace metric evaluator with (tau, rho)-keyed memoization.

    RK4 stage positions coincide (the two midpoint stages share one
    position; each step's last stage is the next step's first), so the memo
    roughly halves the metric evaluations.  rho_M and the boundary-formula
    scalars depend on tau only and are cached per tau value.
    """
    memo: Dict[Tuple[float, float], Tuple[float, float, float]] = {}
    row: Dict[float, float] = {}
    warm: Dict[float, float] = {}

    def rho_m_of(tau: float) -> float:
        if tau not in row:
            row[tau] = fermi_radius(model, tau, tol)
        return row[tau]

    def metric_at(tau: float, rho: float) -> Tuple[float, float, float]:
        key = (tau, rho)
        hit = memo.get(key)
        if hit is not None:
            return hit
        rho_m = rho_m_of(tau)
        t0 = solve_t0(model, tau, rho, tol, rho_m=rho_m, guess=warm.get(tau))
        warm[tau] = t0
        g = _g_pieces(model, tau, t0, tol)[3]
        dgr = _dg_drho_from_t0(model, tau, t0, tol)[0]
        dgt = _dg_dtau_from_t0(model, tau, t0, tol)[0]
        out = (g, dgr, dgt)
        memo[key] = out
        return out

    def t0_at(tau: float, rho: float) -> float:
        rho_m = rho_m_of(tau)
        return solve_t0(model, tau, rho, tol, rho_m=rho_m, guess=warm.get(tau))

    return metric_at, t0_at


def trace_radial(model: ScaleFactorModel, tau0: float, rho_end: float,
                 steps: int = 2048, tol: Optional[Tolerances] = None,
                 residual_tol: float = 1e-6,
                 _allow_refine: bool = True) -> GeodesicTrace:
    """Integrate the radial geodesic from (tau0, 0) with tangent (0, 1).

    Classic fixed-step fourth-order Runge-Kutta in the arc-length
    parameter, state (tau, dtau/ds, rho, drho/ds).  The step count is fixed
    (not adaptive) so the boundary crossing at rho_M(tau0) is sampled
    deterministically.  After integration the geodesic-equation residual is
    evaluated at every interior point by centered finite differences of the
    stored arrays; when its maximum exceeds ``residual_tol`` the trace is
    recomputed once with 4x the steps, then flagged unconverged if still
    over.

    ``rho_end`` must stay strictly below rho_max(tau0), where g_tautau may
    vanish and the connection coefficients blow up.
    """
    tol = tol or DEFAULT_TOLERANCES
    if steps < 8:
        raise InvalidArgumentError("steps must be >= 8")
    if not tau0 > 0.0:
        raise InvalidArgumentError("tau0 must be > 0")
    rmax = rho_max(model, tau0, tol)
    if not 0.0 < rho_end < rmax:
        raise OutOfChartError(
            f"rho_end={rho_end} is outside (0, rho_max={rmax}) at tau0={tau0}")

    metric_at, t0_at = _make_metric_memo(model, tol)

    def gammas(tau: float, rho: float) -> Tuple[float, float, float]:
        g, dgr, dgt = metric_at(tau, rho)
        return dgt / (2.0 * g), dgr / (2.0 * g), -0.5 * dgr

    def rhs(state):
        tau, p, rho, q = state
        g_t_tt, g_t_tr, g_r_tt = gammas(tau, rho)
        return np.array([
            p,
            -g_t_tt * p * p - 2.0 * g_t_tr * p * q,
            q,
            -g_r_tt * p * p,
        ])

    h = rho_end / steps
    state = np.array([tau0, 0.0, 0.0, 1.0])
    taus = [tau0]
    rhos = [0.0]
    slopes = [0.0]
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        taus.append(float(state[0]))
        rhos.append(float(state[2]))
        slopes.append(float(state[1] / state[3]))

    taus_a = np.array(taus)
    rhos_a = np.array(rhos)
    slopes_a = np.array(slopes)

    # residuals of both geodesic equations from the stored trace, by
    # centered differences in the arc-length parameter s = i*h
    res = np.zeros(steps + 1)
    for i in range(1, steps):
        tp = (taus_a[i + 1] - taus_a[i - 1]) / (2.0 * h)
        tpp = (taus_a[i + 1] - 2.0 * taus_a[i] + taus_a[i - 1]) / (h * h)
        rp = (rhos_a[i + 1] - rhos_a[i - 1]) / (2.0 * h)
        rpp = (rhos_a[i + 1] - 2.0 * rhos_a[i] + rhos_a[i - 1]) / (h * h)
        g_t_tt, g_t_tr, g_r_tt = gammas(float(taus_a[i]), float(rhos_a[i]))
        res_tau = tpp + g_t_tt * tp * tp + 2.0 * g_t_tr * tp * rp
        res_rho = rpp + g_r_tt * tp * tp
        res[i] = max(abs(res_tau), abs(res_rho))
    if steps >= 2:
        res[0] = res[1]
        res[-1] = res[-2]

    regions = [_region_of(t0_at(float(t), float(r)), tol)
               for t, r in zip(taus_a, rhos_a)]
    residual_norm = float(np.max(res))
    max_dev = float(np.max(np.abs(taus_a - tau0)))

    if residual_norm > residual_tol and _allow_refine:
        refined = trace_radial(model, tau0, rho_end, steps=4 * steps, tol=tol,
                               residual_tol=residual_tol, _allow_refine=False)
        return refined

    return GeodesicTrace(
        tau0=tau0, rho_end=rho_end, steps=steps,
        points=list(zip(rhos, taus, slopes)),
        regions=regions,
        residuals=res,
        residual_norm=residual_norm,
        max_tau_deviation=max_dev,
        converged=residual_norm <= residual_tol,
    )


def null_check_M0(model: ScaleFactorModel, tau: float,
                  tol: Optional[Tolerances] = None) -> float:
    """Lightlikeness defect of the boundary curve rho = rho_M(tau).

    The tangent u = (1, drho_M/dtau) of the boundary has
    g(u, u) = g_tautau(tau, rho_M) + (drho_M/dtau)^2, which vanishes
    exactly when M0 is lightlike.  Returns that defect (expected ~0; the
    two terms come from independent quadratures).
    """
    tol = tol or DEFAULT_TOLERANCES
    rate = fermi_radius_rate(model, tau, tol)
    g = _g_pieces(model, tau, 0.0, tol)[3]
    return g + rate * rate
