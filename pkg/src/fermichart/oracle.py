"""Closed-form power-law evaluator: the ground truth for the quadrature lane.

For a(t) = t**alpha every chart quantity has a closed form in the Gauss
hypergeometric function and the Gamma function.  Both special functions are
implemented here from scratch (Lanczos approximation; power series plus the
z -> 1-z linear transformation) so the oracle shares no code--and no
systematic error--with the quadrature machinery it referees.

Conventions: z = (t0/tau)**(2*alpha) in [0, 1]; the square root
sqrt(1 - z) is taken positive throughout, matching the squared bracket that
defines -g_tautau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (DomainError, InvalidArgumentError, NumericalFailureError,
                     SingularEvaluationError)

__all__ = [
    "PowerLawParams",
    "gamma_fn",
    "hyp2f1",
    "c_alpha",
    "g_tautau_closed",
    "rho_closed",
    "dt0_dtau_closed",
    "dg_drho_closed",
    "dg_dtau_closed",
]

# Lanczos approximation, g = 7, 9 coefficients (double-precision set).
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_WORLDLINE_CUTOFF = 1.0 - 1e-8  # t0/tau above this: exact Minkowski limit


def _gamma_any(x: float) -> float:
    """Gamma for any non-pole real argument (internal; reflection below 0.5)."""
    if x < 0.5:
        s = math.sin(math.pi * x)
        if s == 0.0:
            raise DomainError(f"gamma pole at x={x}")
        return math.pi / (s * _gamma_any(1.0 - x))
    y = x - 1.0
    acc = _LANCZOS_C[0]
    for i in range(1, len(_LANCZOS_C)):
        acc += _LANCZOS_C[i] / (y + i)
    t = y + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (y + 0.5) * math.exp(-t) * acc


def gamma_fn(x: float) -> float:
    """Gamma(x) for x > 0, relative error <= 1e-12 on [0.1, 50].

    Validated against a committed high-precision value table (see the test
    suite).  Negative or zero arguments raise InvalidArgumentError; the
    oracle formulas never need the reflection domain publicly.
    """
    x = float(x)
    if not x > 0.0:
        raise InvalidArgumentError(f"gamma_fn requires x > 0, got {x}")
    return _gamma_any(x)


def _hyp_series(a: float, b: float, c: float, z: float) -> float:
    """Power series sum of 2F1 with term-ratio stopping at 1e-15."""
    term = 1.0
    total = 1.0
    for n in range(100000):
        term *= (a + n) * (b + n) / ((c + n) * (1.0 + n)) * z
        total += term
        if term == 0.0 or abs(term) <= 1e-15 * abs(total):
            return total
    raise NumericalFailureError("2F1 series did not converge", value=total,
                                error_estimate=abs(term))


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for z in [0, 1].

    Power series for z <= 0.9; the z -> 1-z linear transformation above
    (needs c - a - b non-integer, which holds for every oracle use where
    c - a - b = 1/2); Gauss summation Gamma(c)Gamma(c-a-b) /
    (Gamma(c-a)Gamma(c-b)) at z = 1, valid only for c - a - b > 0.

    Raises
    ------
    DomainError
        z = 1 with c - a - b <= 0 (the series diverges there).
    InvalidArgumentError
        z outside [0, 1] or c a nonpositive integer.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if not (0.0 <= z <= 1.0):
        raise InvalidArgumentError(f"hyp2f1 requires z in [0, 1], got {z}")
    if c <= 0.0 and abs(c - round(c)) < 1e-14:
        raise InvalidArgumentError(f"hyp2f1 pole: c={c} is a nonpositive integer")
    if a == 0.0 or b == 0.0 or z == 0.0:
        return 1.0
    s = c - a - b
    if z == 1.0:
        if s <= 0.0:
            raise DomainError(
                f"2F1 diverges at z=1 for c-a-b={s} <= 0")
        return _gamma_any(c) * _gamma_any(s) / (_gamma_any(c - a) * _gamma_any(c - b))
    if z > 0.9:
        if abs(s - round(s)) < 1e-12:
            # logarithmic case of the transformation; fall back to the
            # series, which still converges (slowly) for z < 1
            return _hyp_series(a, b, c, z)
        w = 1.0 - z
        first = (_gamma_any(c) * _gamma_any(s)
                 / (_gamma_any(c - a) * _gamma_any(c - b))
                 * _hyp_series(a, b, 1.0 - s, w))
        second = (w ** s * _gamma_any(c) * _gamma_any(-s)
                  / (_gamma_any(a) * _gamma_any(b))
                  * _hyp_series(c - a, c - b, 1.0 + s, w))
        return first + second
    return _hyp_series(a, b, c, z)


def c_alpha(alpha: float) -> float:
    """The boundary constant C_alpha = sqrt(pi)*Gamma((1+alpha)/(2*alpha)) / Gamma(1/(2*alpha)).

    rho_M(tau) = C_alpha * tau for a(t) = t**alpha; C_1 = 1 (Milne) and
    C_{1/2} = pi/2.
    """
    if not alpha > 0.0:
        raise InvalidArgumentError("alpha must be > 0")
    return math.sqrt(math.pi) * _gamma_any((1.0 + alpha) / (2.0 * alpha)) / _gamma_any(1.0 / (2.0 * alpha))


@dataclass(frozen=True)
class PowerLawParams:
    """Power-law exponent with its derived boundary constant."""

    alpha: float
    C_alpha: float

    @classmethod
    def of(cls, alpha: float) -> "PowerLawParams":
        return cls(alpha=float(alpha), C_alpha=c_alpha(alpha))


def _check(alpha: float, tau: float, t0: float) -> None:
    if not alpha > 0.0:
        raise InvalidArgumentError("alpha must be > 0")
    if not tau > 0.0:
        raise InvalidArgumentError("tau must be > 0")
    if not (0.0 <= t0 <= tau):
        raise InvalidArgumentError(f"t0={t0} outside [0, tau={tau}]")


def _F(alpha: float, z: float) -> float:
    return hyp2f1(0.5, (1.0 - alpha) / (2.0 * alpha), (1.0 + alpha) / (2.0 * alpha), z)


def g_tautau_closed(alpha: float, tau: float, t0: float) -> float:
    """Closed-form g_tautau for a(t) = t**alpha at interior t0 > 0.

    g = -[r - sqrt(1-z)*(r*F - C_alpha)]**2 with r = (tau/t0)**(alpha-1),
    z = (t0/tau)**(2*alpha), F = 2F1(1/2, (1-alpha)/(2a); (1+alpha)/(2a); z).
    t0 = 0 returns the big-bang limit -C_alpha**2; t0/tau > 1 - 1e-8 returns
    the exact Minkowski limit -1 instead of pushing the series.
    """
    _check(alpha, tau, t0)
    C = c_alpha(alpha)
    if t0 == 0.0:
        return -C * C
    x = t0 / tau
    if x > _WORLDLINE_CUTOFF:
        return -1.0
    z = x ** (2.0 * alpha)
    r = (tau / t0) ** (alpha - 1.0)
    h = r - math.sqrt(1.0 - z) * (r * _F(alpha, z) - C)
    return -h * h


def rho_closed(alpha: float, tau: float, t0: float) -> float:
    """Closed-form proper distance rho(tau, t0) for a(t) = t**alpha, t0 >= 0.

    rho = tau * [C_alpha - (t0/tau)**(1+alpha) * F2 / (1+alpha)] with
    F2 = 2F1(1/2, (1+alpha)/(2a); (1+3a)/(2a); z).
    """
    _check(alpha, tau, t0)
    C = c_alpha(alpha)
    if t0 == 0.0:
        return C * tau
    x = t0 / tau
    z = x ** (2.0 * alpha)
    F2 = hyp2f1(0.5, (1.0 + alpha) / (2.0 * alpha), (1.0 + 3.0 * alpha) / (2.0 * alpha), z)
    return tau * (C - x ** (1.0 + alpha) * F2 / (1.0 + alpha))


def _sqrt_A0(alpha: float, tau: float, t0: float) -> float:
    """sqrt(tau**(2*alpha) - t0**(2*alpha)) without cancellation."""
    return math.sqrt(tau ** (2.0 * alpha)
                     * -math.expm1(2.0 * alpha * math.log(t0 / tau))) if t0 > 0.0 \
        else tau ** alpha


def _solve_t0_closed(alpha: float, tau: float, rho: float) -> float:
    """Invert rho_closed in t0 over (0, tau] using only closed forms."""
    C = c_alpha(alpha)
    rho_m = C * tau
    lo, hi = 0.0, tau  # rho(lo) = rho_m, rho(hi) = 0; rho decreasing in t0
    t0 = min(max(tau * (1.0 - rho / rho_m), 1e-3 * tau), tau)
    for _ in range(200):
        r = rho_closed(alpha, tau, t0) - rho
        if abs(r) <= 1e-14 * max(tau, rho_m):
            return t0
        if r > 0.0:
            lo = t0
        else:
            hi = t0
        deriv = -t0 ** alpha / _sqrt_A0(alpha, tau, t0)
        step_ok = deriv != 0.0 and math.isfinite(deriv)
        t0_new = t0 - r / deriv if step_ok else 0.5 * (lo + hi)
        if not (lo < t0_new < hi):
            t0_new = 0.5 * (lo + hi)
        if t0_new == t0:
            return t0
        t0 = t0_new
    raise NumericalFailureError("closed-form t0 inversion stalled", value=t0)


def dt0_dtau_closed(alpha: float, tau: float, rho: float) -> float:
    """Closed-form partial of t0(tau, rho) in tau for a(t) = t**alpha.

    Equals (sqrt(tau**2a - t0**2a)/t0**a) * (rho/tau) + t0/tau, with t0
    recovered from rho by closed-form inversion.  Valid for
    0 <= rho < rho_M(tau); the boundary itself is singular (the partials of
    the implicit function blow up as t0 -> 0).
    """
    if not alpha > 0.0 or not tau > 0.0:
        raise InvalidArgumentError("alpha and tau must be > 0")
    rho_m = c_alpha(alpha) * tau
    if not rho >= 0.0:
        raise InvalidArgumentError(f"rho={rho} must be >= 0")
    if rho >= rho_m * (1.0 - 1e-14):
        raise SingularEvaluationError(
            f"rho={rho} at or beyond rho_M={rho_m}; dt0/dtau diverges there")
    if rho == 0.0:
        return 1.0
    t0 = _solve_t0_closed(alpha, tau, rho)
    if t0 <= 0.0:
        raise SingularEvaluationError("dt0_dtau is singular at the boundary t0=0")
    return (_sqrt_A0(alpha, tau, t0) / t0 ** alpha) * (rho / tau) + t0 / tau


def dg_drho_closed(alpha: float, tau: float, t0: float) -> float:
    """Closed-form partial of g_tautau in rho for a(t) = t**alpha, t0 >= 0.

    Interior: (2*alpha/tau) * sqrt(-g) * (F - (t0/tau)**(alpha-1)*C_alpha).
    Boundary t0 = 0: 2*alpha*C_alpha/tau for alpha > 1; 0 for alpha = 1
    (Minkowski); -inf for alpha < 1, returned as an explicit infinity flag.
    """
    _check(alpha, tau, t0)
    C = c_alpha(alpha)
    if t0 == 0.0:
        if alpha > 1.0:
            return 2.0 * alpha * C / tau
        if alpha == 1.0:
            return 0.0
        return -math.inf
    x = t0 / tau
    if x > _WORLDLINE_CUTOFF:
        return 0.0
    z = x ** (2.0 * alpha)
    sq = math.sqrt(-g_tautau_closed(alpha, tau, t0))
    return (2.0 * alpha / tau) * sq * (_F(alpha, z) - x ** (alpha - 1.0) * C)


def dg_dtau_closed(alpha: float, tau: float, t0: float) -> float:
    """Closed-form partial of g_tautau in tau (at fixed rho) for a(t) = t**alpha.

    Assembled by the chain rule from the fixed-t0 tau-derivative of the
    closed bracket and dt0_dtau_closed -- not from the scaling identity
    dg_dtau = -(rho/tau) * dg_drho, so that identity stays an independent
    cross-check.  Boundary t0 = 0: -2*alpha*C_alpha**2/tau for alpha > 1;
    0 for alpha = 1; +inf flag for alpha < 1.
    """
    _check(alpha, tau, t0)
    C = c_alpha(alpha)
    if t0 == 0.0:
        if alpha > 1.0:
            return -2.0 * alpha * C * C / tau
        if alpha == 1.0:
            return 0.0
        return math.inf
    x = t0 / tau
    if x > _WORLDLINE_CUTOFF:
        return 0.0
    z = x ** (2.0 * alpha)
    r = (tau / t0) ** (alpha - 1.0)
    s = math.sqrt(1.0 - z)
    a_, b_, c_ = 0.5, (1.0 - alpha) / (2.0 * alpha), (1.0 + alpha) / (2.0 * alpha)
    F = hyp2f1(a_, b_, c_, z)
    Fp = (a_ * b_ / c_) * hyp2f1(a_ + 1.0, b_ + 1.0, c_ + 1.0, z)
    dz = -2.0 * alpha * z / tau
    dr = (alpha - 1.0) * r / tau
    ds = -dz / (2.0 * s)
    dF = Fp * dz
    h = r - s * (r * F - C)
    dh = dr - ds * (r * F - C) - s * (dr * F + r * dF)
    partial_fixed_t0 = -2.0 * h * dh
    drho_dt0 = -t0 ** alpha / _sqrt_A0(alpha, tau, t0)
    rho = rho_closed(alpha, tau, t0)
    dt0dtau = (_sqrt_A0(alpha, tau, t0) / t0 ** alpha) * (rho / tau) + t0 / tau
    return partial_fixed_t0 + dg_drho_closed(alpha, tau, t0) * drho_dt0 * dt0dtau
