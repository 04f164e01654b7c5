import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwdturnpike.errors import NoConvergenceError, ValidationError
from fwdturnpike.harmonic import h_eval, h_inverse, heat_residual, inverse_z, log_h
from fwdturnpike.measure import DiracMixture, LebesgueSegment, TabulatedDensity, exp_moment

TWO = DiracMixture([2.0, 4.0], [1.0, 1.0])
ONE = DiracMixture([2.0], [1.0])
LEB = LebesgueSegment(1.0, 2.0)
ZERO = LebesgueSegment(0.0, 2.0)
MEASURES = [ONE, TWO, LEB, ZERO, TabulatedDensity(0.5, 3.0, [1.0, 2.0, 0.5, 1.0])]


def two_dirac_inverse(x, t):
    # e^{-2t} q + e^{-8t} q^2 = x with q = e^{2z}
    with mp.workdps(60):
        x, t = mp.mpf(x), mp.mpf(t)
        q = 2 * x / (mp.e ** (-2 * t) + mp.sqrt(mp.e ** (-4 * t) + 4 * x * mp.e ** (-8 * t)))
        return float(mp.log(q) / 2)


def test_h_eval_two_dirac_origin():
    he = h_eval(TWO, 0.0, 0.0)
    assert np.allclose([he.h, he.h_z, he.h_zz, he.h_zzz], [2.0, 6.0, 20.0, 72.0], rtol=1e-15, atol=0)
    assert np.isclose(he.h_t, -10.0, rtol=1e-15)


def test_h_eval_single_dirac():
    he = h_eval(ONE, 0.7, 1.5)
    assert np.isclose(he.h, np.exp(1.4 - 3.0), rtol=1e-15)
    assert np.isclose(he.h_zzz, 8 * he.h, rtol=1e-15)


@pytest.mark.parametrize("x", [1e-3, 0.1, 1.0, 7.0, 1e4, 1e8])
@pytest.mark.parametrize("t", [0.0, 0.5, 10.0, 300.0])
def test_two_dirac_inverse_against_quadratic(x, t):
    z = inverse_z(TWO, x, t)
    assert abs(z - two_dirac_inverse(x, t)) <= 1e-12 * max(1.0, abs(z))


def test_single_dirac_inverse_closed_form():
    x = np.geomspace(1e-3, 1e6, 25)
    for t in [0.0, 1.0, 100.0]:
        assert np.allclose(inverse_z(ONE, x, t), 0.5 * np.log(x) + t, rtol=1e-14, atol=1e-14)


def test_lebesgue_inverse_at_t0_against_mpmath():
    # h(z, 0) = (e^{2z} - e^z)/z on [1, 2]
    for x in [0.5, 3.0, 1e5]:
        with mp.workdps(40):
            ex = mp.findroot(lambda z: (mp.e ** (2 * z) - mp.e**z) / z - x, 1.0 + mp.log(x) / 2)
        assert abs(inverse_z(LEB, x, 0.0) - float(ex)) < 1e-12 * max(1.0, abs(float(ex)))


def test_h_inverse_time_derivative():
    x, t, dt = 3.0, 2.0, 1e-5
    inv = h_inverse(LEB, x, t)
    fd = (inverse_z(LEB, x, t + dt) - inverse_z(LEB, x, t - dt)) / (2 * dt)
    assert abs(inv.z_t - fd) < 1e-7
    assert inv.iterations < 30


def test_inverse_shapes_and_errors():
    out = inverse_z(LEB, np.ones((2, 3)), 1.0)
    assert out.shape == (2, 3)
    assert isinstance(inverse_z(LEB, 2.0, 1.0), float)
    with pytest.raises(ValidationError):
        inverse_z(LEB, -1.0, 0.0)
    with pytest.raises(ValidationError):
        inverse_z(LEB, 1.0, -1.0)
    with pytest.raises(NoConvergenceError):
        inverse_z(LEB, 1.0, 1.0, max_iter=1)


@pytest.mark.parametrize("m", MEASURES, ids=lambda m: m.kind)
def test_round_trip_wide_range(m):
    x = np.geomspace(1e-3, 1e6, 31)
    for t in [0.0, 1.0, 10.0, 100.0, 1000.0]:
        z = inverse_z(m, x, t)
        back = np.exp(log_h(m, z, t))
        assert np.max(np.abs(back / x - 1)) < 1e-10


@pytest.mark.parametrize("m", MEASURES, ids=lambda m: m.kind)
@pytest.mark.parametrize("z,t", [(0.0, 0.0), (1.0, 0.5), (-2.0, 3.0), (5.0, 2.0), (10.0, 8.0)])
def test_heat_equation(m, z, t):
    h = exp_moment(m, z, t)
    assert abs(heat_residual(m, z, t)) <= 1e-5 * max(1.0, h)


@settings(max_examples=80, deadline=None)
@given(st.floats(-25, 25), st.floats(-25, 25), st.floats(0, 40))
def test_h_strictly_increasing(z1, z2, t):
    if abs(z1 - z2) < 1e-6:
        return
    lo, hi = min(z1, z2), max(z1, z2)
    for m in (TWO, LEB, ZERO):
        v = log_h(m, np.array([lo, hi]), t)
        assert v[1] > v[0]


@settings(max_examples=80, deadline=None)
@given(st.floats(-6, 12), st.floats(0, 200))
def test_round_trip_property(log10_x, t):
    x = 10.0**log10_x
    for m in (TWO, LEB, ZERO):
        z = inverse_z(m, x, t)
        assert abs(float(log_h(m, z, t)) - np.log(x)) < 1e-11 * max(1.0, abs(np.log(x)))


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 6), st.floats(0, 50), st.floats(1.0001, 5))
def test_inverse_increasing_in_x(log10_x, t, k):
    x = 10.0**log10_x
    for m in (TWO, LEB):
        assert inverse_z(m, k * x, t) > inverse_z(m, x, t)
