"""Adaptive and double-exponential quadrature plus the chart integral bank."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _reference import C_ALPHA, CHI_AT_ZERO, MILNE, PW2, SINH, LG05
from fermichart import (DEFAULT_TOLERANCES, DivergenceError,
                        NumericalFailureError, QuadratureResult, Tolerances,
                        adaptive_gk, chi_coordinate, fermi_radius,
                        fermi_radius_rate, make_model, proper_distance,
                        tanh_sinh)
from fermichart.quadrature import I1, I2, dG_dtau, f_integral, partial_tau_f0


# ----------------------------------------------------------------------
# adaptive Gauss-Kronrod core
# ----------------------------------------------------------------------

def test_adaptive_gk_polynomial_exact():
    res = adaptive_gk(lambda x: x * x, [0.0, 1.0], 1e-12, 1e-12)
    assert res.converged
    assert res.value == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert res.abs_error_estimate < 1e-12


def test_adaptive_gk_sine():
    res = adaptive_gk(np.sin, [0.0, math.pi], 1e-13, 1e-13)
    assert res.value == pytest.approx(2.0, abs=1e-13)


def test_adaptive_gk_breakpoints_handle_kink():
    res = adaptive_gk(lambda x: np.abs(x), [-1.0, 0.0, 1.0], 1e-13, 1e-13)
    assert res.value == pytest.approx(1.0, abs=1e-14)


def test_adaptive_gk_error_estimate_is_honest():
    res = adaptive_gk(lambda x: np.exp(-x) * np.cos(10.0 * x), [0.0, 5.0],
                      1e-12, 1e-12)
    exact = (1.0 - math.exp(-5.0) * (math.cos(50.0) - 10.0 * math.sin(50.0))) \
        / 101.0
    assert abs(res.value - exact) <= max(res.abs_error_estimate, 1e-14)


def test_adaptive_gk_reports_nonconvergence():
    res = adaptive_gk(lambda x: 1.0 / np.sqrt(np.abs(x - 0.3)),
                      [0.0, 1.0], 1e-14, 1e-14, max_intervals=8)
    assert not res.converged


def test_quadrature_result_float_protocol():
    res = adaptive_gk(lambda x: np.ones_like(x), [0.0, 2.0], 1e-12, 1e-12)
    assert float(res) == pytest.approx(2.0, abs=1e-15)
    assert res.subdivisions >= 1


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-3.0, 3.0), b=st.floats(-3.0, 3.0), c=st.floats(-5.0, 5.0))
def test_adaptive_gk_constant(a, b, c):
    lo, hi = min(a, b), max(a, b)
    if hi - lo < 1e-6:
        hi = lo + 1.0
    res = adaptive_gk(lambda x, c=c: np.full_like(x, c), [lo, hi],
                      1e-12, 1e-12)
    assert res.value == pytest.approx(c * (hi - lo), abs=1e-12, rel=1e-13)


# ----------------------------------------------------------------------
# double-exponential quadrature
# ----------------------------------------------------------------------

def test_tanh_sinh_inverse_sqrt():
    res = tanh_sinh(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, 1e-14, 1e-14)
    assert res.converged
    assert res.value == pytest.approx(2.0, abs=1e-13)


def test_tanh_sinh_log_endpoint():
    res = tanh_sinh(np.log, 0.0, 1.0, 1e-14, 1e-14)
    assert res.value == pytest.approx(-1.0, abs=1e-13)


def test_tanh_sinh_beta_integrand_split_at_symmetry():
    # singularities placed at the lower endpoint are resolved exactly
    res = tanh_sinh(lambda x: 2.0 / np.sqrt(x * (1.0 - x)), 0.0, 0.5,
                    1e-14, 1e-14)
    assert res.value == pytest.approx(math.pi, abs=1e-12)


def test_tanh_sinh_upper_endpoint_rounding_limit():
    # an upper-endpoint inverse-sqrt singularity is limited to ~1e-8 by
    # float rounding of hi - offset; see the tanh_sinh docstring
    res = tanh_sinh(lambda x: 1.0 / np.sqrt(x * (1.0 - x)), 0.0, 1.0,
                    1e-14, 1e-14)
    assert res.value == pytest.approx(math.pi, abs=1e-7)


def test_tanh_sinh_smooth():
    res = tanh_sinh(np.exp, 0.0, 1.0, 1e-14, 1e-14)
    assert res.value == pytest.approx(math.e - 1.0, abs=1e-14)


# ----------------------------------------------------------------------
# tolerances
# ----------------------------------------------------------------------

def test_default_tolerances():
    t = DEFAULT_TOLERANCES
    assert t.quad_abs == 1e-10
    assert t.quad_rel == 1e-10
    assert t.root_tol == 1e-12
    assert t.fd_step == 1e-5
    assert t.boundary_eps == 1e-8


def test_result_flag_returns_quadrature_result(pw2):
    out = proper_distance(pw2, 1.0, 0.5, result=True)
    assert isinstance(out, QuadratureResult)
    assert out.converged


# ----------------------------------------------------------------------
# proper distance and the boundary radius
# ----------------------------------------------------------------------

def test_proper_distance_power_frozen(pw2):
    assert proper_distance(pw2, 1.0, 0.5) == pytest.approx(
        PW2["rho_05"], abs=1e-11)
    assert proper_distance(pw2, 1.0, 0.25) == pytest.approx(
        PW2["rho_025"], abs=1e-11)
    assert proper_distance(pw2, 1.0, -0.5) == pytest.approx(
        PW2["rho_m05"], abs=1e-11)


def test_proper_distance_at_tau_is_zero(pw2):
    assert proper_distance(pw2, 1.0, 1.0) == 0.0


def test_fermi_radius_matches_constant():
    for alpha in (1.5, 2.0, 3.0):
        m = make_model("power", alpha=alpha)
        for tau in (0.5, 1.0, 2.0):
            assert fermi_radius(m, tau) == pytest.approx(
                C_ALPHA[alpha] * tau, abs=1e-10 * max(1.0, tau))


def test_fermi_radius_rate_matches_constant():
    for alpha in (1.5, 2.0, 3.0):
        m = make_model("power", alpha=alpha)
        assert fermi_radius_rate(m, 1.0) == pytest.approx(
            C_ALPHA[alpha], abs=1e-9)


def test_fermi_radius_milne(milne):
    for tau in (0.5, 1.0, 3.0):
        assert fermi_radius(milne, tau) == pytest.approx(tau, abs=1e-11)
    assert fermi_radius_rate(milne, 1.0) == pytest.approx(1.0, abs=1e-9)


def test_fermi_radius_sinh_frozen(sinh_model):
    assert fermi_radius(sinh_model, 0.5) == pytest.approx(
        SINH["rho_m_05"], abs=1e-10)
    assert fermi_radius(sinh_model, 1.0) == pytest.approx(
        SINH["rho_m_1"], abs=1e-10)
    assert fermi_radius(sinh_model, 2.0) == pytest.approx(
        SINH["rho_m_2"], abs=1e-10)
    assert fermi_radius_rate(sinh_model, 1.0) == pytest.approx(
        SINH["rate_1"], abs=1e-9)


def test_fermi_radius_lambda_gamma_frozen(lg05):
    assert fermi_radius(lg05, 1.0) == pytest.approx(LG05["rho_m_1"], abs=1e-10)
    assert fermi_radius_rate(lg05, 1.0) == pytest.approx(
        LG05["rate_1"], abs=1e-9)


# ----------------------------------------------------------------------
# chi coordinate
# ----------------------------------------------------------------------

def test_chi_interior_frozen(pw2):
    assert chi_coordinate(pw2, 1.0, 0.5) == pytest.approx(
        PW2["chi_05"], abs=1e-10)


def test_chi_at_zero_closed_forms():
    for alpha, ref in CHI_AT_ZERO.items():
        m = make_model("power", alpha=alpha)
        assert chi_coordinate(m, 1.0, 0.0) == pytest.approx(ref, rel=1e-10)


def test_chi_at_zero_diverges_without_particle_horizon(pw2):
    with pytest.raises(DivergenceError):
        chi_coordinate(pw2, 1.0, 0.0)


# ----------------------------------------------------------------------
# tilt integral f and its relatives
# ----------------------------------------------------------------------

def test_f_integral_frozen(pw2):
    assert f_integral(pw2, 1.0, 0.0) == pytest.approx(PW2["f_0"], abs=1e-10)
    assert f_integral(pw2, 1.0, 0.5) == pytest.approx(PW2["f_05"], abs=1e-10)
    assert f_integral(pw2, 1.0, 0.25) == pytest.approx(PW2["f_025"], abs=1e-10)
    assert f_integral(pw2, 1.0, -0.5) == pytest.approx(PW2["f_m05"], abs=1e-10)


def test_f_integral_reflection_identity(pw2, sinh_model):
    for m in (pw2, sinh_model):
        for x in (0.2, 0.5, 0.8):
            lhs = f_integral(m, 1.0, -x)
            rhs = 2.0 * f_integral(m, 1.0, 0.0) - f_integral(m, 1.0, x)
            assert lhs == pytest.approx(rhs, abs=5e-10)


def test_f_integral_vanishes_on_worldline(pw2):
    assert f_integral(pw2, 1.0, 1.0) == 0.0


def test_f_integral_sinh_frozen(sinh_model):
    assert f_integral(sinh_model, 1.0, 0.0) == pytest.approx(
        SINH["f0_1"], abs=1e-10)
    assert f_integral(sinh_model, 1.0, 0.5) == pytest.approx(
        SINH["f_05"], abs=1e-10)


def test_f_integral_lambda_gamma_frozen(lg05):
    assert f_integral(lg05, 1.0, 0.0) == pytest.approx(
        LG05["f0_1"], abs=1e-10)


def test_f_integral_milne_vanishes(milne):
    for t0 in (-0.5, 0.0, 0.5):
        assert f_integral(milne, 1.0, t0) == pytest.approx(0.0, abs=1e-13)


def test_rate_integrals_frozen(pw2):
    assert I1(pw2, 1.0, 0.5) == pytest.approx(PW2["I1_05"], abs=1e-9)
    assert I2(pw2, 1.0, 0.5) == pytest.approx(PW2["I2_05"], abs=1e-9)
    assert I1(pw2, 1.0, 0.25) + I2(pw2, 1.0, 0.25) == pytest.approx(
        PW2["I1pI2_025"], abs=1e-9)
    assert partial_tau_f0(pw2, 1.0) == pytest.approx(
        PW2["dtau_f0"], abs=1e-9)


def test_dG_dtau_frozen(pw2, milne):
    assert dG_dtau(pw2, 1.0, 0.5) == pytest.approx(
        PW2["dG_dtau_05"], abs=1e-10)
    assert dG_dtau(pw2, 1.0, -0.5) == pytest.approx(
        -PW2["dG_dtau_05"], abs=1e-10)
    assert dG_dtau(pw2, 1.0, 0.0) == 0.0
    assert dG_dtau(milne, 1.0, 0.5) == pytest.approx(
        MILNE["dG_dtau_05"], abs=1e-10)


# ----------------------------------------------------------------------
# scaling behaviour (power-law self-similarity)
# ----------------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(lam=st.floats(0.3, 3.0), frac=st.floats(0.05, 0.95))
def test_proper_distance_scales_linearly(lam, frac):
    m = make_model("power", alpha=2.0)
    base = proper_distance(m, 1.0, frac)
    scaled = proper_distance(m, lam, lam * frac)
    assert scaled == pytest.approx(lam * base, rel=1e-8, abs=1e-10)
