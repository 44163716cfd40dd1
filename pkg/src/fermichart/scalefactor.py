"""Scale-factor families: evaluation, even extension, regularity, horizons.

A scale factor a(t) with a(0)=0, a>0 and adot>0 on t>0 defines a
Robertson-Walker cosmology with a big bang.  For the extension of Fermi
charts to negative cosmological time every model is extended as an even
function, a(-t) = a(t); odd-order derivatives of the extension flip sign for
t < 0.

Built-in families (native domain t >= 0):

========== ============================== ===========================
family     a(t)                           parameters
========== ============================== ===========================
power      t**alpha                       alpha > 0
milne      t                              (none)
sinh       sinh(t)                        (none)
lambda_gamma  A*sinh(beta*t)**p           Lambda>0, gamma>0, A>0 with
                                          p = 2/(3*gamma),
                                          beta = (3/2)*sqrt(Lambda/3)*gamma
user       expression in t, or spline     expression=str, or t=, a= arrays
========== ============================== ===========================

The lambda_gamma family is the exact solution of the Friedmann equations for
a single fluid of equation of state p = (gamma - 1) * rho * c**2 with a
positive cosmological constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, SingularEvaluationError

__all__ = [
    "ScaleFactorModel",
    "GridSpec",
    "RegularityReport",
    "HorizonClassification",
    "make_model",
    "eval",
    "hubble_and_q",
    "check_regularity",
    "classify_horizons",
]

_REGULARITY_TOL = 1e-9

# adot(0+) classes
ADOT0_ZERO = "zero"
ADOT0_POSITIVE = "positive_finite"
ADOT0_INFINITE = "infinite"


@dataclass(frozen=True, eq=False)
class ScaleFactorModel:
    """Immutable scale-factor model (construct with :func:`make_model`).

    ``_derivs`` holds vectorized callables for d^k a/dt^k, k = 0..3, valid
    for t >= 0; the even extension is applied by :func:`eval` and by the
    quadrature layer.  ``_a2_diff`` evaluates a(tau)^2 - a(tau - delta)^2 in
    a cancellation-free form (delta is passed exactly where it matters).
    ``_limit0`` holds the one-sided limits of the derivatives at t = 0+,
    with None marking an infinite limit.
    """

    family: str
    params: dict = field(repr=True)
    _derivs: tuple = field(repr=False)
    _a2_diff: Callable = field(repr=False)
    _limit0: tuple = field(repr=False)
    adot0_class: str = field(repr=False, default=ADOT0_ZERO)
    notes: str = field(repr=False, default="")

    def d(self, order: int, u):
        """d^order a/dt^order on the native domain (u >= 0, array ok)."""
        return self._derivs[order](u)

    def a2_diff(self, tau: float, u, delta):
        """a(tau)^2 - a(u)^2 with u = tau - delta, evaluated stably.

        ``u`` and ``delta`` may be arrays; both refer to the native domain
        (u >= 0).  On singular-half quadrature nodes delta is exact by
        construction, which keeps the result accurate as delta -> 0.
        """
        return self._a2_diff(tau, u, delta)

    def label(self) -> str:
        if self.params:
            inner = ", ".join(
                f"{k}={v:g}" if isinstance(v, (int, float)) else f"{k}={v}"
                for k, v in self.params.items())
            return f"{self.family}({inner})"
        return self.family


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid for regularity checks: n points covering (t_min, t_max).

    Points are geometrically spaced (t_min must be positive).
    """

    t_min: float = 1e-4
    t_max: float = 100.0
    n: int = 400

    def points(self) -> np.ndarray:
        if not (0.0 < self.t_min < self.t_max) or self.n < 2:
            raise InvalidArgumentError(
                f"grid requires 0 < t_min < t_max and n >= 2, got {self}")
        return np.geomspace(self.t_min, self.t_max, self.n)


@dataclass(frozen=True)
class HorizonClassification:
    """Finiteness verdicts for the two horizon integrals.

    ``event_horizon_finite`` decides the tail integral of 1/a toward
    infinity, ``particle_horizon_finite`` the head integral toward 0.  When
    the doubling-interval heuristic cannot commit, the corresponding
    ``*_indeterminate`` flag is set and the boolean holds the geometric
    best guess -- never a silent one.
    """

    event_horizon_finite: bool
    particle_horizon_finite: bool
    event_indeterminate: bool = False
    particle_indeterminate: bool = False

    def __iter__(self):
        return iter((self.event_horizon_finite, self.particle_horizon_finite))


@dataclass(frozen=True)
class RegularityReport:
    """Verdicts and witness values from grid sampling plus limit probes.

    All verdicts mean "no violation found at tolerance", not proofs.
    ``K_estimate`` is the negated infimum of a*addot/adot^2 over the samples
    (strong regularity demands it be finite); ``C_estimate`` is the supremum
    of \\|adddot*a^2/adot^3\\|, the third-derivative bound used by the
    tau-differentiability hypotheses.
    """

    is_regular: bool
    is_strongly_regular: bool
    K_estimate: float
    C_estimate: float
    adot0_class: str
    event_horizon_finite: bool
    particle_horizon_finite: bool
    witness_t: float
    notes: str = ""


# ----------------------------------------------------------------------
# model construction
# ----------------------------------------------------------------------

def _power_pieces(alpha: float):
    a = alpha

    def d0(u):
        return np.power(u, a)

    def d1(u):
        return a * np.power(u, a - 1.0)

    def d2(u):
        return a * (a - 1.0) * np.power(u, a - 2.0)

    def d3(u):
        return a * (a - 1.0) * (a - 2.0) * np.power(u, a - 3.0)

    def a2_diff(tau, u, delta):
        # tau^2a - (tau-delta)^2a = tau^2a * (1 - (1 - delta/tau)^2a)
        with np.errstate(divide="ignore"):
            return tau ** (2.0 * a) * (-np.expm1(2.0 * a * np.log1p(-np.asarray(delta) / tau)))

    def limit0(k: int) -> Optional[float]:
        if k == 0:
            return 0.0
        coeff = 1.0
        for j in range(k):
            coeff *= (a - j)
        if coeff == 0.0 or a > k:
            return 0.0
        if abs(a - k) < 1e-14:
            return float(math.factorial(k))
        return None  # a < k with nonzero coefficient: infinite limit

    if alpha > 1.0:
        cls = ADOT0_ZERO
    elif alpha == 1.0:
        cls = ADOT0_POSITIVE
    else:
        cls = ADOT0_INFINITE
    return (d0, d1, d2, d3), a2_diff, tuple(limit0(k) for k in range(4)), cls


def _milne_pieces():
    def d0(u):
        return np.asarray(u, dtype=float) + 0.0

    def d1(u):
        return np.ones_like(np.asarray(u, dtype=float))

    def d2(u):
        return np.zeros_like(np.asarray(u, dtype=float))

    d3 = d2

    def a2_diff(tau, u, delta):
        delta = np.asarray(delta, dtype=float)
        return delta * (2.0 * tau - delta)

    return (d0, d1, d2, d3), a2_diff, (0.0, 1.0, 0.0, 0.0), ADOT0_POSITIVE


def _sinh_pieces():
    def a2_diff(tau, u, delta):
        # sinh^2(tau) - sinh^2(u) = sinh(tau-u) * sinh(tau+u)
        delta = np.asarray(delta, dtype=float)
        return np.sinh(delta) * np.sinh(2.0 * tau - delta)

    return (np.sinh, np.cosh, np.sinh, np.cosh), a2_diff, (0.0, 1.0, 0.0, 1.0), ADOT0_POSITIVE


def _lambda_gamma_pieces(Lambda: float, gamma: float, A: float):
    p = 2.0 / (3.0 * gamma)
    beta = 1.5 * math.sqrt(Lambda / 3.0) * gamma

    def d0(u):
        return A * np.sinh(beta * np.asarray(u, dtype=float)) ** p

    def d1(u):
        s = np.sinh(beta * np.asarray(u, dtype=float))
        c = np.cosh(beta * np.asarray(u, dtype=float))
        return A * p * beta * s ** (p - 1.0) * c

    def d2(u):
        s = np.sinh(beta * np.asarray(u, dtype=float))
        c = np.cosh(beta * np.asarray(u, dtype=float))
        return A * p * beta ** 2 * s ** (p - 2.0) * ((p - 1.0) * c * c + s * s)

    def d3(u):
        s = np.sinh(beta * np.asarray(u, dtype=float))
        c = np.cosh(beta * np.asarray(u, dtype=float))
        return (A * p * beta ** 3 * s ** (p - 3.0) * c
                * ((p - 1.0) * (p - 2.0) * c * c + (3.0 * p - 2.0) * s * s))

    def a2_diff(tau, u, delta):
        # ratio = sinh(beta*u)/sinh(beta*tau) = cosh(bd) - coth(bt)*sinh(bd)
        bd = beta * np.asarray(delta, dtype=float)
        x = 2.0 * np.sinh(0.5 * bd) ** 2 - np.sinh(bd) / np.tanh(beta * tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (A * A) * np.sinh(beta * tau) ** (2.0 * p) * (-np.expm1(2.0 * p * np.log1p(x)))
        # x <= -1 can round past -1 at delta ~ tau; the difference is a(tau)^2
        out = np.where(np.asarray(x) <= -1.0, (A * np.sinh(beta * tau) ** p) ** 2, out)
        return out

    def limit0(k: int) -> Optional[float]:
        if k == 0:
            return 0.0
        if p > k:
            return 0.0
        if abs(p - k) < 1e-12:
            return A * beta ** k * math.gamma(p + 1.0)
        if abs(p - round(p)) < 1e-12:
            # integer p < k: a is smooth at 0; table for k <= 3
            ip = int(round(p))
            if ip == 1:
                return A * beta ** k if k % 2 == 1 else 0.0
            if ip == 2:
                return 2.0 * A * beta ** 2 if k == 2 else 0.0
            if ip == 3:
                return 6.0 * A * beta ** 3 if k == 3 else 0.0
            return 0.0
        return None

    if p > 1.0:
        cls = ADOT0_ZERO
    elif p == 1.0:
        cls = ADOT0_POSITIVE
    else:
        cls = ADOT0_INFINITE
    return (d0, d1, d2, d3), a2_diff, tuple(limit0(k) for k in range(4)), cls


def _user_expression_pieces(expression: str):
    import sympy

    t = sympy.Symbol("t", positive=True)
    expr = sympy.sympify(expression, locals={"t": t})
    funcs = []
    for k in range(4):
        funcs.append(sympy.lambdify(t, sympy.diff(expr, t, k), modules="numpy"))

    def wrap(fn):
        def g(u):
            return np.asarray(fn(np.asarray(u, dtype=float)), dtype=float) + np.zeros_like(np.asarray(u, dtype=float))
        return g

    derivs = tuple(wrap(f) for f in funcs)

    def a2_diff(tau, u, delta):
        at = float(derivs[0](np.asarray(tau, dtype=float)))
        return at * at - derivs[0](u) ** 2

    limit0, cls = _probe_limits(derivs)
    return derivs, a2_diff, limit0, cls


def _user_table_pieces(t_table: Sequence[float], a_table: Sequence[float]):
    from scipy.interpolate import CubicSpline

    spl = CubicSpline(np.asarray(t_table, dtype=float), np.asarray(a_table, dtype=float))
    derivs = tuple(spl.derivative(k) if k else spl for k in range(4))

    def a2_diff(tau, u, delta):
        at = float(spl(tau))
        return at * at - np.asarray(spl(u), dtype=float) ** 2

    limit0, cls = _probe_limits(derivs)
    return derivs, a2_diff, limit0, cls


def _probe_limits(derivs) -> tuple:
    """Probe-ladder classification of derivative limits at t = 0+.

    Used for user models only (built-ins are classified in closed form: the
    absolute thresholds a probe can use are unreliable for slowly varying
    limits, e.g. adot ~ t**(1/3)).  The log-log slope over t = 10^-k decides
    between vanishing, finite, and infinite limits.
    """
    ladder = 10.0 ** -np.arange(4, 11, dtype=float)
    out = []
    for k in range(4):
        with np.errstate(all="ignore"):
            v = np.asarray(derivs[k](ladder), dtype=float)
        if not np.all(np.isfinite(v)):
            out.append(None)
            continue
        av = np.abs(v)
        if np.all(av < 1e-12):
            out.append(0.0)
            continue
        with np.errstate(all="ignore"):
            slopes = np.diff(np.log(np.maximum(av, 1e-300))) / np.diff(np.log(ladder))
        s = float(np.median(slopes))
        if s > 0.1:
            out.append(0.0)
        elif s < -0.1:
            out.append(None)
        else:
            out.append(float(v[-1]))
    limits = tuple(out)
    if limits[1] is None:
        cls = ADOT0_INFINITE
    elif limits[1] == 0.0:
        cls = ADOT0_ZERO
    else:
        cls = ADOT0_POSITIVE
    return limits, cls


def make_model(family: str, **params) -> ScaleFactorModel:
    """Construct a scale-factor model.

    Parameters
    ----------
    family : str
        One of ``power``, ``milne``, ``sinh``, ``lambda_gamma``, ``user``.
    **params
        Family parameters: ``alpha`` for power; ``Lambda``, ``gamma``, ``A``
        for lambda_gamma (defaults 3.0, required, 1.0); for user either
        ``expression`` (a string in t, parsed symbolically) or ``t`` and
        ``a`` arrays (cubic-spline interpolated, with spline-accuracy
        derivatives).
    """
    notes = ""
    if family == "power":
        alpha = float(params.get("alpha", 2.0))
        if alpha <= 0.0:
            raise InvalidArgumentError("power family requires alpha > 0")
        derivs, a2d, lim0, cls = _power_pieces(alpha)
        kept = {"alpha": alpha}
    elif family == "milne":
        derivs, a2d, lim0, cls = _milne_pieces()
        kept = {}
    elif family == "sinh":
        derivs, a2d, lim0, cls = _sinh_pieces()
        kept = {}
    elif family == "lambda_gamma":
        Lambda = float(params.get("Lambda", 3.0))
        gamma = float(params.get("gamma", 0.5))
        A = float(params.get("A", 1.0))
        if Lambda <= 0.0 or gamma <= 0.0 or A <= 0.0:
            raise InvalidArgumentError("lambda_gamma requires Lambda, gamma, A > 0")
        derivs, a2d, lim0, cls = _lambda_gamma_pieces(Lambda, gamma, A)
        kept = {"Lambda": Lambda, "gamma": gamma, "A": A}
    elif family == "user":
        if "expression" in params:
            derivs, a2d, lim0, cls = _user_expression_pieces(str(params["expression"]))
            kept = {"expression": params["expression"]}
        elif "t" in params and "a" in params:
            derivs, a2d, lim0, cls = _user_table_pieces(params["t"], params["a"])
            kept = {"n_points": int(len(params["t"]))}
            notes = ("tabulated model: derivatives are cubic-spline estimates; "
                     "third derivatives are piecewise constant")
        else:
            raise InvalidArgumentError(
                "user family requires expression=... or t=, a= arrays")
    else:
        raise InvalidArgumentError(f"unknown scale-factor family {family!r}")
    return ScaleFactorModel(family=family, params=kept, _derivs=derivs,
                            _a2_diff=a2d, _limit0=lim0, adot0_class=cls,
                            notes=notes)


# ----------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------

def eval(model: ScaleFactorModel, t: float, order: int = 0) -> float:  # noqa: A001
    """Evaluate d^order a/dt^order at t under the even extension.

    Even extension: a(-t) = a(t), so odd-order derivatives flip sign for
    t < 0.  At t = 0 the one-sided limit from t > 0 is returned when it is
    finite (for any infinite one-sided limit a
    :class:`~fermichart.errors.SingularEvaluationError` is raised -- the
    extension has no derivative there).

    Raises
    ------
    InvalidArgumentError
        If ``order`` is not in 0..3.
    SingularEvaluationError
        Derivative request at t = 0 with an infinite one-sided limit.
    """
    if order not in (0, 1, 2, 3):
        raise InvalidArgumentError(f"order must be in 0..3, got {order}")
    t = float(t)
    if t == 0.0:
        lim = model._limit0[order]
        if lim is None:
            raise SingularEvaluationError(
                f"derivative of order {order} of {model.label()} has an "
                f"infinite one-sided limit at t=0")
        return float(lim)
    u = abs(t)
    value = float(model.d(order, u))
    if t < 0.0 and order % 2 == 1:
        value = -value
    return value


def hubble_and_q(model: ScaleFactorModel, t: float) -> tuple:
    """Hubble parameter H = adot/a and deceleration q = -a*addot/adot^2 at t > 0."""
    t = float(t)
    if t <= 0.0:
        raise InvalidArgumentError("hubble_and_q requires t > 0")
    a = float(model.d(0, t))
    ad = float(model.d(1, t))
    add = float(model.d(2, t))
    return ad / a, -a * add / (ad * ad)


# ----------------------------------------------------------------------
# horizons
# ----------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _interval_integral_inv_a(model: ScaleFactorModel, lo: float, hi: float) -> float:
    """Fixed 32-node Gauss-Legendre integral of 1/a over [lo, hi]."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid + half * _GL_NODES
    with np.errstate(all="ignore"):
        a = np.asarray(model.d(0, x), dtype=float)
        vals = np.where(np.isfinite(a) & (a > 0.0), 1.0 / a, 0.0)
    return float(half * np.sum(_GL_WEIGHTS * vals))


def _classify_tail(model: ScaleFactorModel, head: bool) -> tuple:
    """Doubling-interval convergence verdict for one horizon integral.

    Returns (finite: bool, indeterminate: bool).  ``head=True`` examines
    [2^-j-1, 2^-j] toward 0 (particle horizon), else [2^j, 2^j+1] toward
    infinity (event horizon).  Verdict from the last three interval ratios:
    all < 0.99 means the tail is dominated by a convergent geometric series;
    all > 0.999 and stable-or-increasing means divergence; anything else is
    flagged indeterminate with the geometric best guess.
    """
    vals = []
    jmax = 50 if head else 40
    for j in range(jmax):
        if head:
            lo, hi = 2.0 ** (-j - 1), 2.0 ** (-j)
        else:
            lo, hi = 2.0 ** j, 2.0 ** (j + 1)
        I = _interval_integral_inv_a(model, lo, hi)
        if not math.isfinite(I):
            return (head, True)  # cannot evaluate; guess by typical behavior
        if I <= 1e-280:
            return (True, False)  # tail vanished outright
        vals.append(I)
        if len(vals) >= 4:
            r = [vals[-1] / vals[-2], vals[-2] / vals[-3], vals[-3] / vals[-4]]
            if max(r) < 0.99:
                return (True, False)
            if min(r) > 0.999 and (r[0] >= 0.999):
                # require the trend to be stable within 1% or increasing
                if r[0] >= r[2] * 0.99:
                    return (False, False)
    if len(vals) >= 4:
        r3 = vals[-1] / vals[-2]
        return (r3 < 1.0, True)
    return (True, True)


def classify_horizons(model: ScaleFactorModel) -> HorizonClassification:
    """Decide finiteness of the event/particle horizon integrals of 1/a.

    The event horizon is finite iff the tail integral of 1/a to infinity
    converges; the particle horizon is finite iff the head integral from 0
    converges.  Convergence is decided by the doubling-interval heuristic in
    :func:`_classify_tail`; an inconclusive test sets the indeterminate
    flag rather than guessing silently.
    """
    ev_finite, ev_ind = _classify_tail(model, head=False)
    pa_finite, pa_ind = _classify_tail(model, head=True)
    return HorizonClassification(
        event_horizon_finite=ev_finite,
        particle_horizon_finite=pa_finite,
        event_indeterminate=ev_ind,
        particle_indeterminate=pa_ind,
    )


# ----------------------------------------------------------------------
# regularity
# ----------------------------------------------------------------------

def check_regularity(model: ScaleFactorModel, grid: GridSpec = GridSpec()) -> RegularityReport:
    """Sample the regularity conditions on a grid plus limit probes.

    Checks a(0) = 0, positivity and monotonicity of a, the deceleration
    bound a*addot/adot^2 <= 1, boundedness below of the same ratio (strong
    regularity, reported through ``K_estimate``), and the third-derivative
    ratio \\|adddot*a^2/adot^3\\| (``C_estimate``).  Verdicts are sampled
    facts, not proofs.
    """
    pts = grid.points()
    # limit probes toward 0 and toward infinity extend the grid
    probes_low = grid.t_min * 10.0 ** -np.arange(1, 7, dtype=float)
    probes_high = grid.t_max * 2.0 ** np.arange(1, 7, dtype=float)
    full = np.concatenate([probes_low[::-1], pts, probes_high])

    with np.errstate(all="ignore"):
        a = np.asarray(model.d(0, full), dtype=float)
        ad = np.asarray(model.d(1, full), dtype=float)
        add = np.asarray(model.d(2, full), dtype=float)
        try:
            addd = np.asarray(model.d(3, full), dtype=float)
        except Exception:
            addd = np.full_like(full, np.nan)

    witness = math.nan
    notes = model.notes
    regular = True

    # positive overflow at the largest probes is a float64 limitation of
    # rapidly growing models (sinh-type), not a regularity violation
    keep = ~((a == np.inf) | (ad == np.inf))
    full, a, ad, add, addd = (arr[keep] for arr in (full, a, ad, add, addd))
    if full.size == 0:
        return RegularityReport(
            is_regular=False, is_strongly_regular=False,
            K_estimate=math.inf, C_estimate=math.inf,
            adot0_class=model.adot0_class,
            event_horizon_finite=False, particle_horizon_finite=False,
            witness_t=grid.t_min,
            notes=(notes + "; " if notes else "") + "a overflows on the whole grid")

    a0 = float(model.d(0, np.asarray(0.0)))
    if not (abs(a0) == 0.0):
        regular = False
        witness = 0.0
        notes = (notes + "; " if notes else "") + f"a(0) = {a0:g} != 0"

    bad = ~(np.isfinite(a) & (a > 0.0) & np.isfinite(ad) & (ad > 0.0))
    if np.any(bad):
        regular = False
        if math.isnan(witness):
            witness = float(full[np.argmax(bad)])
        notes = (notes + "; " if notes else "") + "a or adot not positive on grid"

    with np.errstate(all="ignore"):
        ratio = a * add / (ad * ad)
    ok = np.isfinite(ratio)
    if regular and np.any(ok) and np.nanmax(ratio[ok]) > 1.0 + _REGULARITY_TOL:
        regular = False
        witness = float(full[ok][np.nanargmax(ratio[ok])])
        notes = (notes + "; " if notes else "") + "a*addot/adot^2 exceeds 1"

    if np.any(ok):
        K_estimate = float(-np.nanmin(ratio[ok]))
    else:
        K_estimate = math.inf
    # unboundedness heuristic: ratio diverging along the probe ladders
    strongly = regular and math.isfinite(K_estimate)
    if strongly:
        low_ratio = ratio[: len(probes_low)]
        if np.all(np.isfinite(low_ratio)) and len(low_ratio) >= 3:
            drops = low_ratio[:-1] - low_ratio[1:]
            # probes are ordered toward larger t; index 0 is the smallest t
            if low_ratio[0] < -1e6 and np.all(low_ratio[:3] < -1e3):
                strongly = False
                notes = (notes + "; " if notes else "") + "a*addot/adot^2 unbounded below near 0"
            del drops

    with np.errstate(all="ignore"):
        cratio = np.abs(addd * a * a / (ad ** 3))
    cok = np.isfinite(cratio)
    C_estimate = float(np.nanmax(cratio[cok])) if np.any(cok) else math.inf

    horizons = classify_horizons(model)

    return RegularityReport(
        is_regular=regular,
        is_strongly_regular=strongly,
        K_estimate=K_estimate,
        C_estimate=C_estimate,
        adot0_class=model.adot0_class,
        event_horizon_finite=horizons.event_horizon_finite,
        particle_horizon_finite=horizons.particle_horizon_finite,
        witness_t=witness,
        notes=notes,
    )
