"""Singular integrals of the Fermi-chart construction.

Every integral here runs over cosmological time t up to an endpoint tau
where the integrand carries a 1/sqrt(a(tau)^2 - a(t)^2) blow-up.  The
interval [t0, tau] is split at its midpoint; on the singular half the
substitution t = tau - w**2 turns the inverse-square-root singularity into a
bounded integrand, and the offset delta = tau - t = w**2 is handed to the
model's cancellation-free ``a2_diff`` so no precision is lost as t -> tau.
Both halves are integrated by adaptive 15-point Gauss-Kronrod with
batch-vectorized node evaluation.

For t0 < 0 the integrands are even extensions; an explicit breakpoint at
t = 0 keeps each subinterval smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError, InvalidArgumentError, NumericalFailureError
from .scalefactor import ScaleFactorModel, classify_horizons

__all__ = [
    "QuadratureResult",
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "adaptive_gk",
    "tanh_sinh",
    "singular_integral",
    "proper_distance",
    "fermi_radius",
    "fermi_radius_rate",
    "chi_coordinate",
    "f_integral",
    "I1",
    "I2",
    "partial_tau_f0",
    "dG_dtau",
]


@dataclass(frozen=True)
class QuadratureResult:
    """Value and a posteriori error estimate of one integral evaluation."""

    value: float
    abs_error_estimate: float
    subdivisions: int
    converged: bool

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances threaded through the whole library.

    quad_abs/quad_rel control quadrature convergence; root_tol bounds the
    residual of implicit-function root solves; fd_step is the default
    finite-difference step of the verification helpers; boundary_eps is the
    distance from t0 = 0 inside which boundary-limit formulas replace
    interior quadrature.
    """

    quad_abs: float = 1e-10
    quad_rel: float = 1e-10
    root_tol: float = 1e-12
    fd_step: float = 1e-5
    boundary_eps: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("quad_abs", "quad_rel", "root_tol", "fd_step", "boundary_eps"):
            if not getattr(self, name) > 0.0:
                raise InvalidArgumentError(f"tolerance {name} must be > 0")


DEFAULT_TOLERANCES = Tolerances()

# 15-point Kronrod nodes with embedded 7-point Gauss rule (QUADPACK qk15).
_XK = np.array([
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691,
    -0.7415311855993944, -0.5860872354676911, -0.4058451513773972,
    -0.2077849550078985, 0.0,
    0.2077849550078985, 0.4058451513773972, 0.5860872354676911,
    0.7415311855993944, 0.8648644233597691, 0.9491079123427585,
    0.9914553711208126,
])
_WK = np.array([
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278,
    0.2044329400752989, 0.1903505780647854, 0.1690047266392679,
    0.1406532597155259, 0.1047900103222502, 0.0630920926299785,
    0.0229353220105292,
])
_WG = np.array([
    0.0, 0.1294849661688697, 0.0,
    0.2797053914892767, 0.0, 0.3818300505051189,
    0.0, 0.4179591836734694,
    0.0, 0.3818300505051189, 0.0,
    0.2797053914892767, 0.0, 0.1294849661688697,
    0.0,
])


def _gk_batch(f: Callable, lo: np.ndarray, hi: np.ndarray):
    """Apply the K15/G7 pair to every [lo_i, hi_i] in one vectorized call."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _XK[None, :]
    v = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    k15 = half * (v @ _WK)
    g7 = half * (v @ _WG)
    u = np.abs(k15 - g7)
    err = np.minimum(u, (200.0 * u) ** 1.5)
    return k15, err


def adaptive_gk(f: Callable, breakpoints, tol_abs: float, tol_rel: float,
                max_intervals: int = 4096) -> QuadratureResult:
    """Adaptive Gauss-Kronrod integration of a vectorized integrand.

    ``breakpoints`` is an increasing sequence; each consecutive pair seeds
    one interval.  Every round, all intervals whose error exceeds their
    share of the tolerance budget are bisected simultaneously (one batched
    integrand call per round).
    """
    bp = [float(b) for b in breakpoints]
    lo = np.array(bp[:-1])
    hi = np.array(bp[1:])
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return QuadratureResult(0.0, 0.0, 0, True)
    vals, errs = _gk_batch(f, lo, hi)
    for _ in range(64):
        total = float(np.sum(vals))
        esum = float(np.sum(errs))
        tol = max(tol_abs, tol_rel * abs(total))
        if esum <= tol:
            return QuadratureResult(total, esum, int(lo.size), True)
        if lo.size >= max_intervals:
            break
        thresh = tol / (4.0 * lo.size)
        split = errs > thresh
        if not np.any(split):
            split = errs == errs.max()
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        # degenerate intervals mean the floating grid is exhausted
        ok = new_hi > new_lo
        if not np.any(ok):
            break
        sv, se = _gk_batch(f, new_lo[ok], new_hi[ok])
        lo = np.concatenate([lo[~split], new_lo[ok]])
        hi = np.concatenate([hi[~split], new_hi[ok]])
        vals = np.concatenate([vals[~split], sv])
        errs = np.concatenate([errs[~split], se])
    total = float(np.sum(vals))
    esum = float(np.sum(errs))
    return QuadratureResult(total, esum, int(lo.size), esum <= max(tol_abs, tol_rel * abs(total)))


def tanh_sinh(f: Callable, lo: float, hi: float, tol_abs: float,
              tol_rel: float, max_level: int = 11) -> QuadratureResult:
    """Double-exponential quadrature on [lo, hi] for endpoint singularities.

    The tanh-sinh substitution clusters nodes doubly exponentially toward
    both endpoints, so integrable algebraic singularities there (any
    exponent > -1) converge at spectral rate.  Nodes whose abscissa rounds
    onto an endpoint are dropped; their weights decay fast enough that this
    is exact in the limit whenever the integral converges.  The integrand
    must accept an array and is never called at lo or hi exactly.

    Abscissae are materialized as lo + offset (resp. hi - offset).  When
    lo == 0 the lower offsets are exact down to 1e-300, so a singularity
    at 0 is resolved to full precision; a singularity at hi is resolved
    only down to offsets ~eps*|hi|, which limits e.g. an inverse-sqrt
    singularity there to ~1e-8 absolute.  Place the singular endpoint at
    zero (shifting the variable if needed) for full accuracy.
    """
    if not hi > lo:
        return QuadratureResult(0.0, 0.0, 0, True)
    c = 0.5 * (hi - lo)
    x_cut = math.asinh(330.0 * math.log(10.0) / math.pi)  # beyond: weights underflow
    total = math.nan
    evals = 0
    for level in range(max_level + 1):
        h = 1.0 / 2.0 ** level
        kmax = int(math.ceil(x_cut / h))
        if level == 0:
            ks = np.arange(-kmax, kmax + 1)
        else:  # only the nodes new at this level (odd multiples of h)
            ks = np.arange(-kmax, kmax + 1)
            ks = ks[ks % 2 != 0]
        x = ks * h
        with np.errstate(over="ignore", under="ignore"):
            u = 0.5 * math.pi * np.sinh(x)
            # offsets from the two endpoints: hi - t = c*(1 - tanh u) etc.;
            # computed through exp to avoid catastrophic cancellation
            sech = 1.0 / np.cosh(u)
            off_hi = c * 2.0 / (1.0 + np.exp(2.0 * u))
            off_lo = c * 2.0 / (1.0 + np.exp(-2.0 * u))
            t = np.where(u >= 0.0, hi - off_hi, lo + off_lo)
            w = 0.5 * math.pi * np.cosh(x) * sech * sech * c
        ok = (t > lo) & (t < hi) & (w > 0.0) & np.isfinite(w)
        t, w = t[ok], w[ok]
        contrib = float(np.sum(np.asarray(f(t), dtype=float) * w)) * h
        evals += t.size
        prev, total = total, (contrib if level == 0 else 0.5 * total + contrib)
        if level >= 2:
            delta = abs(total - prev)
            if delta <= max(tol_abs, tol_rel * abs(total)):
                return QuadratureResult(total, delta, evals, True)
    return QuadratureResult(total, abs(total - prev), evals, False)


def singular_integral(model: ScaleFactorModel, tau: float, t0: float,
                      g: Callable, tol: Tolerances,
                      head_de: bool = False) -> QuadratureResult:
    """Integrate g(u, delta) dt over t in [t0, tau], singular at t = tau.

    ``g`` receives arrays u = |t| (native-domain argument of the even
    extension) and delta = tau - u >= 0.  On the singular half, nodes are
    generated in w with t = tau - w**2, so delta = w**2 is exact and the
    1/sqrt blow-up of g is compensated by the Jacobian 2w.

    ``head_de`` switches the regular half to tanh-sinh quadrature; use it
    when the integrand is also (integrably) singular at the lower endpoint,
    as chi's is at t0 = 0.
    """
    if t0 >= tau:
        return QuadratureResult(0.0, 0.0, 0, True)
    m = 0.5 * tau if t0 < 0.0 else 0.5 * (t0 + tau)

    def f_reg(t):
        u = np.abs(t)
        return g(u, tau - u)

    def f_sing(w):
        d = w * w
        return 2.0 * w * g(tau - d, d)

    reg_breaks = [t0, 0.0, m] if t0 < 0.0 else [t0, m]
    half_abs = 0.5 * tol.quad_abs
    if head_de:
        r1 = tanh_sinh(f_reg, t0, m, half_abs, tol.quad_rel)
    else:
        r1 = adaptive_gk(f_reg, reg_breaks, half_abs, tol.quad_rel)
    r2 = adaptive_gk(f_sing, [0.0, math.sqrt(tau - m)], half_abs, tol.quad_rel)
    return QuadratureResult(
        value=r1.value + r2.value,
        abs_error_estimate=r1.abs_error_estimate + r2.abs_error_estimate,
        subdivisions=r1.subdivisions + r2.subdivisions,
        converged=r1.converged and r2.converged,
    )


def _finish(res: QuadratureResult, scale: float, what: str,
            result: bool):
    out = QuadratureResult(scale * res.value, abs(scale) * res.abs_error_estimate,
                           res.subdivisions, res.converged)
    if not out.converged:
        raise NumericalFailureError(
            f"{what}: quadrature failed to converge "
            f"(estimate {out.abs_error_estimate:.3e})",
            value=out.value, error_estimate=out.abs_error_estimate)
    return out if result else out.value

def _check_tau_t0(tau: float, t0: float, closed_right: bool) -> None:
    if not tau > 0.0:
        raise InvalidArgumentError("tau must be > 0")
    hi_ok = (t0 <= tau) if closed_right else (t0 < tau)
    if not (-tau < t0 and hi_ok):
        raise InvalidArgumentError(
            f"t0={t0!r} outside ({-tau!r}, {tau!r}{']' if closed_right else ')'}")


def proper_distance(model: ScaleFactorModel, tau: float, t0: float,
                    tol: Optional[Tolerances] = None, result: bool = False):
    """Proper distance rho(tau, t0) along the orthogonal spacelike geodesic.

    rho = integral from t0 to tau of a(|t|)/sqrt(a(tau)^2 - a(t)^2) dt;
    strictly decreasing in t0, with rho(tau, tau) = 0.  t0 may be negative
    (even extension), down to but excluding -tau.

    Pass ``result=True`` for the full :class:`QuadratureResult`.
    """
    tol = tol or DEFAULT_TOLERANCES
    _check_tau_t0(tau, t0, closed_right=True)

    def g(u, d):
        return model.d(0, u) / np.sqrt(model.a2_diff(tau, u, d))

    res = singular_integral(model, tau, t0, g, tol)
    return _finish(res, 1.0, f"proper_distance(tau={tau}, t0={t0})", result)


def fermi_radius(model: ScaleFactorModel, tau: float,
                 tol: Optional[Tolerances] = None, result: bool = False):
    """Radius rho_M(tau) of the Fermi spaceslice: proper distance to t0 = 0."""
    return proper_distance(model, tau, 0.0, tol=tol, result=result)


def fermi_radius_rate(model: ScaleFactorModel, tau: float,
                      tol: Optional[Tolerances] = None, result: bool = False):
    """d rho_M / d tau, strictly positive for strongly regular models.

    Equals H(tau) * integral from 0 to tau of
    (1 - a*addot/adot^2) * a / sqrt(a(tau)^2 - a(t)^2) dt.  Strong
    regularity of the model is the caller's obligation; it guarantees the
    integrand's bracket is bounded so the integral converges.
    """
    tol = tol or DEFAULT_TOLERANCES
    if not tau > 0.0:
        raise InvalidArgumentError("tau must be > 0")
    H = float(model.d(1, tau)) / float(model.d(0, tau))

    def g(u, d):
        a = model.d(0, u)
        ad = model.d(1, u)
        add = model.d(2, u)
        return (1.0 - a * add / (ad * ad)) * a / np.sqrt(model.a2_diff(tau, u, d))

    res = singular_integral(model, tau, 0.0, g, tol)
    return _finish(res, H, f"fermi_radius_rate(tau={tau})", result)


def chi_coordinate(model: ScaleFactorModel, tau: float, t0: float,
                   tol: Optional[Tolerances] = None, result: bool = False):
    """Comoving radial coordinate chi_|t0|(tau) of the Fermi geodesic.

    chi = integral from |t0| to tau of a(tau) / (a(t) * sqrt(a(tau)^2 -
    a(t)^2)) dt, for 0 < |t0| < tau.  t0 = 0 is admitted only when the
    particle horizon is finite (otherwise chi diverges and a
    :class:`~fermichart.errors.DivergenceError` is raised).
    """
    tol = tol or DEFAULT_TOLERANCES
    _check_tau_t0(tau, t0, closed_right=False)
    x = abs(t0)
    if x == 0.0 and not classify_horizons(model).particle_horizon_finite:
        raise DivergenceError(
            "chi at t0=0 diverges: the particle horizon integral of 1/a is infinite")
    a_tau = float(model.d(0, tau))

    def g(u, d):
        return a_tau / (model.d(0, u) * np.sqrt(model.a2_diff(tau, u, d)))

    res = singular_integral(model, tau, x, g, tol, head_de=(x == 0.0))
    return _finish(res, 1.0, f"chi_coordinate(tau={tau}, t0={t0})", result)


def f_integral(model: ScaleFactorModel, tau: float, t0: float,
               tol: Optional[Tolerances] = None, result: bool = False):
    """The supporting integral f(tau, t0) of the metric extension.

    For 0 <= t0 < tau:
        f = integral t0..tau of (addot/adot^2) *
            (sqrt(a(tau)^2 - a(t0)^2)/sqrt(a(tau)^2 - a(t)^2) - 1) dt,
    continuous down to t0 = 0.  For t0 < 0 the extension is defined by
    reflection: f(tau, t0) = 2 f(tau, 0) - f(tau, -t0).  t0 = tau (empty
    interval) returns 0, which closes -g_tautau = 1 on the worldline.
    """
    tol = tol or DEFAULT_TOLERANCES
    _check_tau_t0(tau, t0, closed_right=True)
    if t0 < 0.0:
        f0 = f_integral(model, tau, 0.0, tol=tol, result=True)
        fp = f_integral(model, tau, -t0, tol=tol, result=True)
        out = QuadratureResult(2.0 * f0.value - fp.value,
                               2.0 * f0.abs_error_estimate + fp.abs_error_estimate,
                               f0.subdivisions + fp.subdivisions,
                               f0.converged and fp.converged)
        return out if result else out.value
    if t0 == tau:
        out = QuadratureResult(0.0, 0.0, 0, True)
        return out if result else 0.0
    sqrt_A0 = math.sqrt(float(model.a2_diff(tau, t0, tau - t0)))
    a0_sq = float(model.d(0, t0)) ** 2

    def g(u, d):
        ad = model.d(1, u)
        add = model.d(2, u)
        # sqrt_A0/sqrt(A_t) - 1 regrouped as (a(u)^2 - a(t0)^2) / (sqrt(A_t) *
        # (sqrt_A0 + sqrt(A_t))): the direct form loses ~eps absolute to
        # cancellation near the head, which the divergent addot/adot^2 factor
        # would amplify into an irreducible noise floor.
        sq = np.sqrt(model.a2_diff(tau, u, d))
        num = model.d(0, u) ** 2 - a0_sq
        return (add / (ad * ad)) * num / (sq * (sqrt_A0 + sq))

    res = singular_integral(model, tau, t0, g, tol)
    return _finish(res, 1.0, f"f_integral(tau={tau}, t0={t0})", result)


def I1(model: ScaleFactorModel, tau: float, t0: float,
       tol: Optional[Tolerances] = None, result: bool = False):
    """First tau-derivative integral of f at interior t0 > 0.

    I1 = -H(tau) * integral t0..tau of
         (3*addot^2*a/adot^4 - adddot*a/adot^3) *
         (sqrt(a(tau)^2 - a(t0)^2)/sqrt(a(tau)^2 - a(t)^2) - 1) dt.
    Together with :func:`I2` it assembles the partial of f in tau at fixed
    positive t0.
    """
    tol = tol or DEFAULT_TOLERANCES
    if not (0.0 < t0 < tau):
        raise InvalidArgumentError("I1 requires 0 < t0 < tau")
    H = float(model.d(1, tau)) / float(model.d(0, tau))
    sqrt_A0 = math.sqrt(float(model.a2_diff(tau, t0, tau - t0)))
    a0_sq = float(model.d(0, t0)) ** 2

    def g(u, d):
        a = model.d(0, u)
        ad = model.d(1, u)
        add = model.d(2, u)
        addd = model.d(3, u)
        coeff = 3.0 * add * add * a / ad ** 4 - addd * a / ad ** 3
        # cancellation-free regrouping of sqrt_A0/sqrt(A_t) - 1; see f_integral
        sq = np.sqrt(model.a2_diff(tau, u, d))
        return coeff * (a * a - a0_sq) / (sq * (sqrt_A0 + sq))

    res = singular_integral(model, tau, t0, g, tol)
    return _finish(res, -H, f"I1(tau={tau}, t0={t0})", result)


def I2(model: ScaleFactorModel, tau: float, t0: float,
       tol: Optional[Tolerances] = None, result: bool = False):
    """Second tau-derivative integral of f at interior t0 > 0.

    I2 = H(tau) * integral t0..tau of (addot/adot^2) *
         (a(tau)^2 / (sqrt(a(tau)^2 - a(t)^2) * sqrt(a(tau)^2 - a(t0)^2))
          - 1) dt.
    """
    tol = tol or DEFAULT_TOLERANCES
    if not (0.0 < t0 < tau):
        raise InvalidArgumentError("I2 requires 0 < t0 < tau")
    H = float(model.d(1, tau)) / float(model.d(0, tau))
    a_tau2 = float(model.d(0, tau)) ** 2
    A0 = float(model.a2_diff(tau, t0, tau - t0))
    sqrt_A0 = math.sqrt(A0)
    a0_sq = float(model.d(0, t0)) ** 2

    def g(u, d):
        a = model.d(0, u)
        ad = model.d(1, u)
        add = model.d(2, u)
        # a_tau2/(sqrt(A_t)*sqrt_A0) - 1 regrouped over the common denominator;
        # the numerator a(tau)^4 - A_t*A0 = a(u)^2*A0 + a(tau)^2*a(t0)^2 is a
        # sum of positive terms, so no cancellation survives (see f_integral).
        s = np.sqrt(model.a2_diff(tau, u, d)) * sqrt_A0
        num = a * a * A0 + a_tau2 * a0_sq
        return (add / (ad * ad)) * num / (s * (a_tau2 + s))

    res = singular_integral(model, tau, t0, g, tol)
    return _finish(res, H, f"I2(tau={tau}, t0={t0})", result)


def partial_tau_f0(model: ScaleFactorModel, tau: float,
                   tol: Optional[Tolerances] = None, result: bool = False):
    """Partial derivative of f(tau, 0) with respect to tau.

    Equals H(tau) * integral 0..tau of
    (addot/adot^2 + adddot*a/adot^3 - 3*addot^2*a/adot^4) *
    (a(tau)/sqrt(a(tau)^2 - a(t)^2) - 1) dt; the bracket vanishes fast
    enough at t = 0 that the head of the integral converges for strongly
    regular models with bounded third-derivative ratio.
    """
    tol = tol or DEFAULT_TOLERANCES
    if not tau > 0.0:
        raise InvalidArgumentError("tau must be > 0")
    H = float(model.d(1, tau)) / float(model.d(0, tau))
    a_tau = float(model.d(0, tau))

    def g(u, d):
        a = model.d(0, u)
        ad = model.d(1, u)
        add = model.d(2, u)
        addd = model.d(3, u)
        coeff = add / (ad * ad) + addd * a / ad ** 3 - 3.0 * add * add * a / ad ** 4
        # a_tau/sqrt(A_t) - 1 regrouped as a(u)^2 / (sqrt(A_t)*(a_tau +
        # sqrt(A_t))), cancellation-free against the divergent coeff head
        sq = np.sqrt(model.a2_diff(tau, u, d))
        return coeff * (a * a) / (sq * (a_tau + sq))

    res = singular_integral(model, tau, 0.0, g, tol)
    return _finish(res, H, f"partial_tau_f0(tau={tau})", result)


def dG_dtau(model: ScaleFactorModel, tau: float, t0: float,
            tol: Optional[Tolerances] = None, result: bool = False):
    """Tau-derivative of the distance deficit G(tau, t0) = rho_M - rho.

    Equals -a(tau)*adot(tau) * integral 0..t0 of
    a(t) * (a(tau)^2 - a(t)^2)^(-3/2) dt.  The integrand's primitive is odd
    under the even extension, so dG_dtau(tau, -t0) = -dG_dtau(tau, t0);
    the integral itself is nonsingular because |t0| < tau.
    """
    tol = tol or DEFAULT_TOLERANCES
    _check_tau_t0(tau, t0, closed_right=False)
    if t0 == 0.0:
        out = QuadratureResult(0.0, 0.0, 0, True)
        return out if result else 0.0
    x = abs(t0)
    pref = -float(model.d(0, tau)) * float(model.d(1, tau)) * math.copysign(1.0, t0)

    def f(t):
        u = np.abs(t)
        return model.d(0, u) * model.a2_diff(tau, u, tau - u) ** -1.5

    res = adaptive_gk(f, [0.0, x], tol.quad_abs, tol.quad_rel)
    return _finish(res, pref, f"dG_dtau(tau={tau}, t0={t0})", result)
