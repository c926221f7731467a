import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ohmicbath import analytic as an
from ohmicbath.core import OscillatorParams, ReservoirCondition, Trajectory

from conftest import REGIMES


@pytest.mark.parametrize("name", list(REGIMES))
def test_q_homogeneous_solves_damped_ode(name):
    p = REGIMES[name]
    t = np.linspace(0.0, 5.0, 41)
    sol = integrate.solve_ivp(lambda _, y: [y[1], -p.gamma * y[1] - p.omega0**2 * y[0]], (0, 5),
                              [1.0, 0.0], t_eval=t, method="DOP853", rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(an.q_homogeneous(p, 1.0, t), sol.y[0], atol=1e-10)


def test_q_homogeneous_high_precision_point(fig1):
    mp.mp.dps = 30
    w1 = mp.sqrt(35)
    t = mp.mpf("1.7")
    ref = mp.exp(-t / 2) * (mp.cos(w1 * t / 2) + mp.sin(w1 * t / 2) / w1)
    assert an.q_homogeneous(fig1, 1.0, 1.7) == pytest.approx(float(ref), abs=1e-15)


@pytest.mark.parametrize("name", list(REGIMES))
def test_derivatives_match_finite_differences(name):
    p = REGIMES[name]
    t = np.array([-2.0, -0.4, 0.3, 1.9])
    h = 1e-5
    q, qd, qdd = an.q_homogeneous_derivatives(p, 1.3, t)
    fd1 = (an.q_homogeneous(p, 1.3, t + h) - an.q_homogeneous(p, 1.3, t - h)) / (2 * h)
    fd2 = (an.q_homogeneous_derivatives(p, 1.3, t + h)[1]
           - an.q_homogeneous_derivatives(p, 1.3, t - h)[1]) / (2 * h)
    np.testing.assert_allclose(qd, fd1, atol=1e-8)
    np.testing.assert_allclose(qdd, fd2, atol=1e-7)


def test_figure1_shape(fig1):
    t = np.linspace(-10, 10, 2001)
    q = an.q_homogeneous(fig1, 1.0, t)
    assert an.q_homogeneous(fig1, 1.0, 0.0) == 1.0
    np.testing.assert_allclose(q, q[::-1], atol=1e-12)
    w1 = np.sqrt(35.0)
    assert np.all(np.abs(q) <= np.exp(-0.5 * np.abs(t)) * (1 + 1 / w1) + 1e-15)


def test_general_homogeneous(fig1):
    t = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(an.q_general_homogeneous(fig1, 0.7, 0.7, t), an.q_homogeneous(fig1, 0.7, t))
    big = an.q_general_homogeneous(fig1, 0.2, 1.0, np.array([-60.0, 60.0]))
    np.testing.assert_allclose(big, [-0.4, 0.4], atol=1e-10)
    with pytest.raises(ValueError):
        an.q_general_homogeneous(OscillatorParams(1.0, 0.0), 0.0, 1.0, t)


def test_reservoir_partner_equation(fig1, ohmic):
    """X'' + w**2 X = alpha(w) q with X(0) = X'(0) = 0."""
    w = 2.4
    t = np.linspace(-3, 3, 25)
    h = 1e-4
    x = lambda s: an.x_reservoir_homogeneous(fig1, 1.0, w, s)  # noqa: E731
    xdd = (x(t + h) - 2 * x(t) + x(t - h)) / h**2
    from ohmicbath.coupling import alpha

    rhs = float(alpha(ohmic, w)) * an.q_homogeneous(fig1, 1.0, t) - w**2 * x(t)
    np.testing.assert_allclose(xdd, rhs, atol=1e-5)
    assert x(0.0) == pytest.approx(0.0, abs=1e-15)


def test_spectrum_is_fourier_transform(fig1):
    t = 1.3
    w = np.linspace(0, 200, 400001)
    spec = an.homogeneous_spectrum(fig1, 1.0, w)
    # q(t) = (1/pi) int_0^inf q(w) cos(w t) dw for a real even q
    val = integrate.simpson(spec.values * np.cos(w * t), x=w) / np.pi
    assert val == pytest.approx(an.q_homogeneous(fig1, 1.0, t), abs=1e-8)


def test_green_retarded_properties(fig1):
    assert an.green_retarded(fig1, -0.5) == 0.0
    h = 1e-7
    assert (an.green_retarded(fig1, h) - an.green_retarded(fig1, 0.0)) / h == pytest.approx(1.0, rel=1e-5)
    # G_R settles to the zero-mode constant gamma/omega0**2, whose transform is i*c/omega
    c = fig1.gamma / fig1.omega0**2
    assert an.green_retarded(fig1, 80.0) == pytest.approx(c, abs=1e-14)
    f = lambda s: an.green_retarded(fig1, s) - c  # noqa: E731
    for w in (0.7, 3.0, 8.0):
        re = integrate.quad(f, 0, 80, weight="cos", wvar=w, limit=400)[0]
        im = integrate.quad(f, 0, 80, weight="sin", wvar=w, limit=400)[0] + c / w
        assert complex(re, im) == pytest.approx(complex(an.green_retarded_freq(fig1, w, 0.0)), abs=1e-8)


@pytest.mark.parametrize("t0", [-0.7, 0.0, 0.7])
def test_two_sided_green_jump(fig1, t0):
    h = 1e-6
    g = lambda s: float(an.green_two_sided(fig1, s, t0))  # noqa: E731
    assert g(t0 + h) == pytest.approx(g(t0 - h), abs=1e-5)
    jump = (g(t0 + 2 * h) - g(t0 + h)) / h - (g(t0 - h) - g(t0 - 2 * h)) / h
    assert jump == pytest.approx(1.0, abs=1e-4)
    assert np.max(np.abs(an.two_sided_residual(fig1, t0, [t0 - 0.3, t0, t0 + 0.4]))) <= 1e-6


def test_memory_residual(fig1):
    q = lambda s: an.q_homogeneous(fig1, 1.0, s)  # noqa: E731
    qdd = lambda s: an.q_homogeneous_derivatives(fig1, 1.0, s)[2]  # noqa: E731
    res = an.memory_residual(fig1, q, qdd, np.linspace(-5, 5, 21))
    assert np.max(np.abs(res)) <= 1e-7 * fig1.omega0**2


def test_condition_maps_round_trip(fig1, ohmic):
    xi = np.linspace(0, 200, 40001)
    spec = an.homogeneous_spectrum(fig1, 1.0, xi)
    w = np.linspace(0.1, 20, 120)
    asym = an.map_conditions(fig1, ohmic, spec, ReservoirCondition.time_zero(), omega=w)
    back = an.map_conditions(fig1, ohmic, spec, asym, omega=w)
    a0, b0 = back.sample(w)
    assert np.max(np.abs(a0)) + np.max(np.abs(b0)) <= 1e-10


def test_reservoir_from_q_matches_closed_form(fig1, ohmic):
    t = np.linspace(-4, 4, 8001)
    q, qd, _ = an.q_homogeneous_derivatives(fig1, 1.0, t)
    res = an.reservoir_from_q(fig1, ohmic, ReservoirCondition.time_zero(), Trajectory(t, q, qd), 2.0)
    np.testing.assert_allclose(res.x, an.x_reservoir_homogeneous(fig1, 1.0, 2.0, t), atol=1e-9)


def test_reservoir_from_q_rejects_missing_origin(fig1, ohmic):
    t = np.linspace(0.1, 1, 11)
    tr = Trajectory(t, np.ones(11), np.zeros(11))
    with pytest.raises(ValueError):
        an.reservoir_from_q(fig1, ohmic, ReservoirCondition.time_zero(), tr, 1.0)


def test_q_from_asymptotic_vacuum_and_coverage(fig1):
    rc = ReservoirCondition.asymptotic(a=0.25)
    np.testing.assert_allclose(an.q_from_asymptotic(fig1, rc, [0.0, 1.0]), 0.25, atol=1e-14)
    loud = ReservoirCondition.asymptotic(A=lambda w: np.ones_like(w) * 10.0)
    with pytest.raises(an.GridCoverageError):
        an.q_from_asymptotic(fig1, loud, [0.0], omega_max=5.0)


@settings(max_examples=30, deadline=None)
@given(s=st.floats(0.05, 20.0), t=st.floats(-6.0, 6.0), g=st.floats(0.0, 9.0))
def test_rescaling_of_time(s, t, g):
    """Scaling omega0 and gamma by s is the same as running time s times faster."""
    p = OscillatorParams(3.0, g)
    assert an.q_homogeneous(p.scaled(s), 1.0, t / s) == pytest.approx(an.q_homogeneous(p, 1.0, t), abs=1e-12)
