"""Release acceptance gates.

Twelve end-to-end checks, each enforcing one published guarantee of the
package at its stated tolerance; `pytest -v` reports one pass/fail line
per criterion.  On success each test also prints a one-line summary of
the measured extremes (visible with -s or in captured output).
"""

import math
import time

import numpy as np
import pytest

from fermichart import (classify_horizons, dg_drho, dg_dtau, dg_drho_closed,
                        dg_dtau_closed, fermi_radius, fermi_radius_rate,
                        g_angular, g_tautau, g_tautau_closed, gamma_fn, grid,
                        hubble_and_q, make_model, metric_matrix, null_check_M0,
                        proper_distance, rho_closed, rho_max, solve_t0,
                        trace_radial, ChartGridSpec, REGION_MINUS, REGION_PLUS)
import fermichart.scalefactor as sf


def _c_alpha_reference(alpha: float) -> float:
    return (math.sqrt(math.pi) * gamma_fn((1.0 + alpha) / (2.0 * alpha))
            / gamma_fn(1.0 / (2.0 * alpha)))


def _report(n: int, name: str, detail: str) -> None:
    print(f"criterion {n:02d} ({name}): PASS [{detail}]")


def test_criterion_01_milne_flatness():
    """50x50 grid: g_tautau = -1 within 1e-10, t0 closed form within 1e-9,
    under 5 s."""
    milne = make_model("milne")
    start = time.perf_counter()
    spec = ChartGridSpec(tau_min=0.5, tau_max=3.0, n_tau=50,
                         rho_fraction_max=1.9, n_rho=50)
    worst_g = worst_t0 = 0.0
    for pt, ms in grid(milne, spec):
        assert ms.failure is None
        worst_g = max(worst_g, abs(ms.g_tautau + 1.0))
        tau, rho = pt.tau, pt.rho
        if rho <= tau:
            ref = math.sqrt(tau * tau - rho * rho)
        else:
            ref = -math.sqrt(tau * tau - (2.0 * tau - rho) ** 2)
        worst_t0 = max(worst_t0, abs(pt.t0 - ref))
    elapsed = time.perf_counter() - start
    assert worst_g <= 1e-10
    assert worst_t0 <= 1e-9
    assert elapsed < 5.0
    _report(1, "Milne flatness",
            f"max|g+1|={worst_g:.2e} max|t0 err|={worst_t0:.2e} "
            f"{elapsed:.2f}s")


def test_criterion_02_power_law_boundary_constants():
    """rho_M / tau matches the gamma-function constant within 1e-8,
    under 10 s; the alpha=2 value is about 0.6."""
    start = time.perf_counter()
    worst = 0.0
    for alpha in (1.5, 2.0, 3.0):
        m = make_model("power", alpha=alpha)
        ref = _c_alpha_reference(alpha)
        for tau in (0.5, 1.0, 2.0):
            dev = abs(fermi_radius(m, tau) / tau - ref)
            worst = max(worst, dev)
            assert dev <= 1e-8
    assert abs(_c_alpha_reference(2.0) - 0.6) < 0.01
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    _report(2, "power-law boundary constants",
            f"max dev={worst:.2e} C_2={_c_alpha_reference(2.0):.6f} "
            f"{elapsed:.2f}s")


def test_criterion_03_big_bang_limit_of_g():
    """|g(tau, rho_M) + C_alpha^2| <= 1e-7 for alpha in {1.5,2,3},
    tau in {0.5,1,2}."""
    worst = 0.0
    for alpha in (1.5, 2.0, 3.0):
        m = make_model("power", alpha=alpha)
        C2 = _c_alpha_reference(alpha) ** 2
        for tau in (0.5, 1.0, 2.0):
            rho_m = fermi_radius(m, tau)
            dev = abs(g_tautau(m, tau, rho_m, rho_m=rho_m) + C2)
            worst = max(worst, dev)
            assert dev <= 1e-7
    _report(3, "big-bang limit of g_tautau", f"max dev={worst:.2e}")


def test_criterion_04_boundary_and_interior_derivatives():
    """alpha=2, tau=1 boundary partials match 2aC/tau and -2aC^2/tau within
    1e-6; interior partials match centered differences (step 1e-5) within
    1e-5 relative on 100 random chart points per model."""
    pw2 = make_model("power", alpha=2.0)
    C = _c_alpha_reference(2.0)
    rho_m = fermi_radius(pw2, 1.0)
    bnd_r = dg_drho(pw2, 1.0, rho_m, rho_m=rho_m)
    bnd_t = dg_dtau(pw2, 1.0, rho_m, rho_m=rho_m)
    assert abs(bnd_r - 4.0 * C) <= 1e-6
    assert abs(bnd_t + 4.0 * C * C) <= 1e-6

    h = 1e-5
    models = [("power 1.5", make_model("power", alpha=1.5)),
              ("power 2", pw2),
              ("power 3", make_model("power", alpha=3.0)),
              ("sinh", make_model("sinh"))]
    rng = np.random.default_rng(20260823)
    worst = 0.0
    for _, m in models:
        taus = (0.6, 0.9, 1.2, 1.5, 1.8)
        caps = {}
        for tau in taus:
            rm = fermi_radius(m, tau)
            caps[tau] = (rm, min(1.9 * rm, 0.97 * rho_max(m, tau)))
        n = 0
        while n < 100:
            tau = taus[int(rng.integers(len(taus)))]
            rm, cap = caps[tau]
            rho = float(rng.uniform(0.03, 1.0)) * cap
            if abs(rho - rm) < 10.0 * h:
                continue        # straddling the boundary defeats the stencil
            n += 1
            a_r = dg_drho(m, tau, rho, rho_m=rm)
            fd_r = (g_tautau(m, tau, rho + h, rho_m=rm)
                    - g_tautau(m, tau, rho - h, rho_m=rm)) / (2.0 * h)
            a_t = dg_dtau(m, tau, rho, rho_m=rm)
            fd_t = (g_tautau(m, tau + h, rho)
                    - g_tautau(m, tau - h, rho)) / (2.0 * h)
            for a, fd in ((a_r, fd_r), (a_t, fd_t)):
                dev = abs(a - fd) / max(1.0, abs(a), abs(fd))
                worst = max(worst, dev)
                assert dev <= 1e-5
    _report(4, "boundary and interior derivatives",
            f"bnd dev=({abs(bnd_r - 4 * C):.1e},{abs(bnd_t + 4 * C * C):.1e}) "
            f"max fd dev={worst:.2e}")


def test_criterion_05_oracle_equivalence():
    """Quadrature-lane rho, g and both partials agree with closed forms to
    1e-8 absolute on a 10x20 (tau, t0) lattice per alpha, under 60 s."""
    start = time.perf_counter()
    worst = 0.0
    for alpha in (1.5, 2.0, 3.0):
        m = make_model("power", alpha=alpha)
        for tau in np.linspace(0.5, 2.0, 10):
            tau = float(tau)
            rho_m = fermi_radius(m, tau)
            for frac in np.linspace(0.05, 0.95, 20):
                t0 = float(frac) * tau
                rho_ref = rho_closed(alpha, tau, t0)
                devs = (
                    abs(proper_distance(m, tau, t0) - rho_ref),
                    abs(g_tautau(m, tau, rho_ref, rho_m=rho_m)
                        - g_tautau_closed(alpha, tau, t0)),
                    abs(dg_drho(m, tau, rho_ref, rho_m=rho_m)
                        - dg_drho_closed(alpha, tau, t0)),
                    abs(dg_dtau(m, tau, rho_ref, rho_m=rho_m)
                        - dg_dtau_closed(alpha, tau, t0)),
                )
                worst = max(worst, *devs)
                assert worst <= 1e-8
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    _report(5, "oracle equivalence",
            f"max abs dev={worst:.2e} over 600 points {elapsed:.1f}s")


def test_criterion_06_radius_bound_and_monotonicity():
    """rho_M * H <= pi/2 + 1e-9 and drho_M/dtau > 0 for all built-ins at
    tau in {0.5, 1, 2, 5, 10}."""
    models = [make_model("power", alpha=1.5), make_model("power", alpha=2.0),
              make_model("power", alpha=3.0), make_model("power", alpha=0.5),
              make_model("milne"), make_model("sinh"),
              make_model("lambda_gamma", Lambda=3.0, gamma=0.5, A=1.0)]
    worst_prod = 0.0
    min_rate = math.inf
    for m in models:
        for tau in (0.5, 1.0, 2.0, 5.0, 10.0):
            H, _ = hubble_and_q(m, tau)
            prod = fermi_radius(m, tau) * H
            rate = fermi_radius_rate(m, tau)
            worst_prod = max(worst_prod, prod)
            min_rate = min(min_rate, rate)
            assert prod <= math.pi / 2.0 + 1e-9
            assert rate > 0.0
    _report(6, "radius bound and monotonicity",
            f"max rho_M*H={worst_prod:.6f} min rate={min_rate:.3e}")


def test_criterion_07_lightlike_boundary():
    """|g(tau, rho_M) + (drho_M/dtau)^2| <= 1e-6 across model families."""
    models = [make_model("power", alpha=1.5), make_model("power", alpha=2.0),
              make_model("power", alpha=3.0), make_model("sinh"),
              make_model("lambda_gamma", Lambda=3.0, gamma=0.5, A=1.0)]
    worst = 0.0
    for m in models:
        for tau in (0.5, 1.0, 2.0):
            defect = abs(null_check_M0(m, tau))
            worst = max(worst, defect)
            assert defect <= 1e-6
    _report(7, "lightlike boundary", f"max null defect={worst:.2e}")


def test_criterion_08_rank_degeneracy_at_boundary():
    """The 4x4 metric at boundary points has exactly two singular values
    below 1e-8 and two above 0.1 (k=0, alpha=2)."""
    pw2 = make_model("power", alpha=2.0)
    svs = []
    for tau in (0.5, 1.0, 2.0):
        rho_m = fermi_radius(pw2, tau)
        M = metric_matrix(pw2, tau, rho_m, 0.0, 0.0, k=0)
        sv = np.linalg.svd(M, compute_uv=False)
        svs.append(sv)
        assert np.sum(sv < 1e-8) == 2
        assert np.sum(sv > 0.1) == 2
    _report(8, "rank degeneracy at the boundary",
            "sv pattern 2 below 1e-8 / 2 above 0.1 at three points")


def test_criterion_09_angular_limit_vanishing():
    """g_thetatheta(tau, rho_M) <= 1e-10 for k=0, alpha in {2,3} and sinh."""
    models = [make_model("power", alpha=2.0), make_model("power", alpha=3.0),
              make_model("sinh")]
    worst = 0.0
    for m in models:
        for tau in (0.5, 1.0, 2.0):
            rho_m = fermi_radius(m, tau)
            gth, _ = g_angular(m, tau, rho_m, k=0, rho_m=rho_m)
            worst = max(worst, abs(gth))
            assert abs(gth) <= 1e-10
    _report(9, "angular limit vanishing", f"max |g_thth(M0)|={worst:.2e}")


def test_criterion_10_continuity_across_boundary():
    """One-sided samples at rho_M +/- delta differ by <= 10 delta |dg/drho|
    for delta in {1e-4, 1e-5, 1e-6}, alpha in {1.5, 2, 3}."""
    worst_ratio = 0.0
    for alpha in (1.5, 2.0, 3.0):
        m = make_model("power", alpha=alpha)
        rho_m = fermi_radius(m, 1.0)
        slope = abs(dg_drho(m, 1.0, rho_m, rho_m=rho_m))
        for delta in (1e-4, 1e-5, 1e-6):
            jump = abs(g_tautau(m, 1.0, rho_m + delta, rho_m=rho_m)
                       - g_tautau(m, 1.0, rho_m - delta, rho_m=rho_m))
            worst_ratio = max(worst_ratio, jump / (delta * slope))
            assert jump <= 10.0 * delta * slope
    _report(10, "continuity across the boundary",
            f"max jump/(delta*|dg/drho|)={worst_ratio:.3f} (limit 10)")


def test_criterion_11_horizon_classification():
    """Horizon truth table for alpha=2, alpha=1/2 and Milne; the alpha=1/2
    comoving distance ratio t/a at t=1e-12 is at most 1e-6."""
    assert tuple(classify_horizons(make_model("power", alpha=2.0))) == \
        (True, False)
    pw05 = make_model("power", alpha=0.5)
    assert tuple(classify_horizons(pw05)) == (False, True)
    assert tuple(classify_horizons(make_model("milne"))) == (False, False)
    t = 1e-12
    ratio = t / sf.eval(pw05, t)
    assert ratio <= 1e-6
    _report(11, "horizon classification",
            f"tables match; t/a(1e-12)={ratio:.2e}")


def test_criterion_12_geodesic_straightness():
    """The radial geodesic from tau0=1 to rho=0.9 (alpha=2) keeps
    |tau - 1| <= 1e-7 and crosses into negative cosmological time just
    past rho = 0.599."""
    pw2 = make_model("power", alpha=2.0)
    tr = trace_radial(pw2, 1.0, 0.9, steps=512)
    assert tr.converged
    assert tr.max_tau_deviation <= 1e-7
    assert tr.regions[0] == REGION_PLUS
    assert tr.regions[-1] == REGION_MINUS
    idx = next(i for i, r in enumerate(tr.regions) if r == REGION_MINUS)
    first_minus = tr.points[idx][0]
    assert 0.589 <= first_minus <= 0.65
    _report(12, "geodesic straightness",
            f"max|tau-1|={tr.max_tau_deviation:.1e} "
            f"crosses M_minus at rho={first_minus:.4f}")
