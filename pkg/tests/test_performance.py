import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fwdturnpike.errors import ValidationError
from fwdturnpike.measure import DiracMixture, LebesgueSegment
from fwdturnpike.performance import (criterion_point, marginal_utility, prudence, r_pde_residual,
                                     risk_tolerance, risk_tolerance_x, risk_tolerance_xx,
                                     utility_curve, utility_drift, utility_from_z)

TWO = DiracMixture([2.0, 4.0], [1.0, 1.0])
ONE = DiracMixture([2.0], [1.0])
LEB = LebesgueSegment(1.0, 2.0)
ZERO = LebesgueSegment(0.0, 2.0)


def two_dirac_r(x, t):
    # r = h_z = 2 e^{2z-2t} + 4 e^{4z-8t} = 2x + 2 e^{-8t} q^2, q = e^{2z}
    with mp.workdps(60):
        x, t = mp.mpf(x), mp.mpf(t)
        q = 2 * x / (mp.e ** (-2 * t) + mp.sqrt(mp.e ** (-4 * t) + 4 * x * mp.e ** (-8 * t)))
        return float(2 * x + 2 * mp.e ** (-8 * t) * q * q)


@pytest.mark.parametrize("t", [0.0, 1.0, 10.0, 50.0])
def test_two_dirac_risk_tolerance(t):
    xs = np.geomspace(0.1, 100, 13)
    r = risk_tolerance(TWO, xs, t)
    ex = np.array([two_dirac_r(x, t) for x in xs])
    assert np.max(np.abs(r / ex - 1)) < 1e-12


def test_single_dirac_risk_tolerance_is_linear():
    xs = np.geomspace(1e-3, 1e6, 19)
    for t in [0.0, 3.0, 100.0]:
        assert np.max(np.abs(risk_tolerance(ONE, xs, t) / (2 * xs) - 1)) < 1e-14
        assert np.allclose(risk_tolerance_x(ONE, xs, t), 2.0, rtol=1e-14)
        assert np.allclose(prudence(ONE, xs, t), 1.5, rtol=1e-14)


def test_marginal_utility_single_dirac():
    # u_x = x^{-1/2} e^{-t/2}
    xs = np.array([0.25, 1.0, 9.0])
    assert np.allclose(marginal_utility(ONE, xs, 2.0), xs**-0.5 * np.exp(-1.0), rtol=1e-14)


def test_criterion_point_two_dirac_origin():
    cp = criterion_point(TWO, 2.0, 0.0)
    assert np.isclose(cp.r, 6.0, rtol=1e-15)
    assert np.isclose(cp.r_x, 20.0 / 6.0, rtol=1e-15)
    assert np.isclose(cp.prudence, 2.0 * (1 + 20.0 / 6.0) / 6.0, rtol=1e-15)
    assert np.isclose(cp.u_x, 1.0, rtol=1e-15)


@pytest.mark.parametrize("m", [TWO, LEB, ZERO], ids=["two", "leb", "zero"])
@pytest.mark.parametrize("x,t", [(0.5, 0.0), (2.0, 1.0), (30.0, 5.0)])
def test_rxx_analytic_vs_finite_difference(m, x, t):
    a = risk_tolerance_xx(m, x, t, analytic=True)
    fd = risk_tolerance_xx(m, x, t)
    assert abs(a - fd) <= 1e-5 * max(1.0, abs(a))


@pytest.mark.parametrize("m", [ONE, TWO, LEB, ZERO], ids=["one", "two", "leb", "zero"])
@pytest.mark.parametrize("x,t", [(1.0, 0.5), (3.0, 2.0), (0.2, 4.0), (50.0, 1.0)])
def test_r_equation(m, x, t):
    r = risk_tolerance(m, x, t)
    assert abs(r_pde_residual(m, x, t)) <= 1e-3 * max(1.0, r)


def test_rxx_step_validation():
    with pytest.raises(ValidationError):
        risk_tolerance_xx(LEB, 1.0, 1.0, dx=2.0)


def test_utility_curve_single_dirac_closed_form():
    # u(x, t) = 2 sqrt(x) e^{-t/2} + const
    xs = np.array([0.1, 1.0, 4.0, 100.0])
    for t in [0.0, 1.0, 7.0]:
        got = utility_curve(ONE, 1.0, xs, t)
        assert np.allclose(got, 2 * (np.sqrt(xs) - 1) * np.exp(-t / 2), rtol=1e-13, atol=1e-14)
    assert np.isclose(utility_drift(ONE, 1.0, 2.0), 2 * (np.exp(-1.0) - 1), rtol=1e-11)


def test_utility_curve_against_quadrature():
    xs = np.array([0.3, 2.0, 40.0])
    for m, t in [(LEB, 1.0), (TWO, 3.0), (ZERO, 0.0)]:
        got = utility_curve(m, 1.0, xs, t)
        for x, g in zip(xs, got):
            ex, _ = quad(lambda v: marginal_utility(m, v, t), 1.0, x, epsrel=1e-12, limit=200)
            assert abs(g - ex) <= 1e-10 * max(1.0, abs(ex))


def test_utility_from_z_order_and_duplicates():
    zs = np.array([[2.0, -1.0], [2.0, 0.5]])
    got = utility_from_z(LEB, 0.5, zs, 1.0)
    assert got.shape == zs.shape
    assert got[0, 0] == got[1, 0]
    assert got[1, 1] == 0.0
    assert got[0, 1] < 0 < got[0, 0]


def test_utility_drift_matches_time_derivative():
    # d/dt u(x_ref, t) = -u_x r / 2
    t, dt = 2.0, 1e-4
    fd = (utility_drift(LEB, 1.0, t + dt) - utility_drift(LEB, 1.0, t - dt)) / (2 * dt)
    ex = -0.5 * marginal_utility(LEB, 1.0, t) * risk_tolerance(LEB, 1.0, t)
    assert abs(fd - ex) < 1e-7


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 7), st.floats(0, 60))
def test_risk_tolerance_bounds(log10_x, t):
    # a x <= r <= b x and r_x >= a (r is increasing and convex in x)
    x = 10.0**log10_x
    for m in (TWO, LEB, ZERO):
        s = m.support
        r = risk_tolerance(m, x, t)
        assert s.a * x * (1 - 1e-12) <= r <= s.b * x * (1 + 1e-12)
        assert risk_tolerance_x(m, x, t) >= s.a * (1 - 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 5), st.floats(0, 30), st.floats(1.01, 3))
def test_risk_tolerance_increasing_and_convex(log10_x, t, k):
    x = 10.0**log10_x
    for m in (TWO, LEB):
        r = risk_tolerance(m, np.array([x, k * x, k * k * x]), t)
        assert r[0] < r[1] < r[2]
        assert risk_tolerance_xx(m, x, t, analytic=True) >= -1e-12 * r[0] / x


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 5), st.floats(0, 30))
def test_marginal_utility_decreasing(log10_x, t):
    x = 10.0**log10_x
    for m in (TWO, LEB, ZERO):
        u = marginal_utility(m, np.array([x, 1.1 * x]), t)
        assert u[1] < u[0]
