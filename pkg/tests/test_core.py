import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ohmicbath.core import (
    ConditionKind,
    OscillatorParams,
    Regime,
    ReservoirCondition,
    SpectralGrid,
    Trajectory,
    classify_regime,
    damped_pair,
    derived_rates,
)

from conftest import REGIMES


def test_params_validation():
    with pytest.raises(ValueError):
        OscillatorParams(0.0, 1.0)
    with pytest.raises(ValueError):
        OscillatorParams(1.0, -1.0)
    with pytest.raises(ValueError):
        OscillatorParams(float("nan"), 1.0)


@pytest.mark.parametrize("name,regime", [("under", Regime.UNDER), ("critical", Regime.CRITICAL),
                                         ("over", Regime.OVER)])
def test_regimes(name, regime):
    assert classify_regime(REGIMES[name]) is regime


def test_derived_rates():
    assert derived_rates(OscillatorParams(3.0, 1.0)).omega1 == pytest.approx(np.sqrt(35.0))
    assert derived_rates(OscillatorParams(1.0, 5.0)).gamma1 == pytest.approx(np.sqrt(21.0))
    assert derived_rates(OscillatorParams(1.0, 2.0)).omega1 == 0.0


def _pair_mp(w0, g, t):
    """exp(-gamma t/2) (cos, sin/omega1) of omega1 t / 2 at 40 digits."""
    mp.mp.dps = 40
    w0, g, t = mp.mpf(w0), mp.mpf(g), mp.mpf(t)
    disc = 4 * w0**2 - g**2
    e = mp.exp(-g * t / 2)
    if disc == 0:
        return e, e * t / 2
    w1 = mp.sqrt(disc)  # complex when overdamped; the pair stays real
    c = mp.cos(w1 * t / 2)
    s = mp.sin(w1 * t / 2) / w1
    return mp.re(e * c), mp.re(e * s)


@pytest.mark.parametrize("name", list(REGIMES))
def test_damped_pair_against_high_precision(name):
    p = REGIMES[name]
    t = np.linspace(0.0, 5.0, 23)
    ec, es = damped_pair(p, t)
    ref = np.array([[float(v) for v in _pair_mp(p.omega0, p.gamma, x)] for x in t])
    np.testing.assert_allclose(ec, ref[:, 0], rtol=0, atol=1e-14)
    np.testing.assert_allclose(es, ref[:, 1], rtol=0, atol=1e-14)


def test_damped_pair_near_critical_is_continuous():
    t = np.linspace(0.0, 4.0, 9)
    base = damped_pair(OscillatorParams(1.0, 2.0), t)
    for eps in (1e-9, -1e-9, 1e-6, -1e-6):
        near = damped_pair(OscillatorParams(1.0, 2.0 + eps), t)
        np.testing.assert_allclose(near, base, atol=5 * abs(eps))


@settings(max_examples=40, deadline=None)
@given(w0=st.floats(0.2, 5.0), g=st.floats(0.0, 12.0), t=st.floats(0.0, 6.0))
def test_damped_pair_derivative_identities(w0, g, t):
    """d/dt (E C) and d/dt (E S) from the stated C', S' relations."""
    p = OscillatorParams(w0, g)
    h = 1e-5
    (c0, s0), (cp, sp), (cm, sm) = (damped_pair(p, x, rate=0.0) for x in (t, t + h, t - h))
    dc = (cp - cm) / (2 * h)
    ds = (sp - sm) / (2 * h)
    assert dc == pytest.approx(-0.5 * p.disc * s0, rel=1e-7, abs=1e-6 * (1 + abs(p.disc)))
    assert ds == pytest.approx(0.5 * c0, rel=1e-7, abs=1e-6)


def test_grids_integrate_polynomials():
    f = lambda w: w**3 + 1.0  # noqa: E731
    exact = 2.0**4 / 4 + 2.0
    assert SpectralGrid.simpson(0.0, 2.0, 11).integrate(f(SpectralGrid.simpson(0.0, 2.0, 11).nodes)) \
        == pytest.approx(exact, rel=1e-13)
    gl = SpectralGrid.gauss_legendre([0.0, 1.0, 2.0], order=4)
    assert gl.integrate(f(gl.nodes)) == pytest.approx(exact, rel=1e-13)
    mid = SpectralGrid.midpoint(2.0, 400)
    assert mid.integrate(f(mid.nodes)) == pytest.approx(exact, rel=1e-4)
    assert mid.upper_edge == pytest.approx(2.0)
    m = SpectralGrid.mapped(200, 1.0)
    assert m.integrate(1.0 / (1.0 + m.nodes**2)) == pytest.approx(np.pi / 2, rel=1e-10)


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        SpectralGrid(np.array([1.0, 0.5]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        SpectralGrid(np.array([0.5, 1.0]), np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        SpectralGrid(np.array([0.5]), np.array([1.0]), eta=0.0)


def test_tail_estimate_power_law():
    g = SpectralGrid.midpoint(10.0, 1000)
    tail = g.tail_estimate(1.0 / g.nodes**3)
    assert tail == pytest.approx(0.5 / g.nodes[-1] ** 2, rel=1e-2)
    assert g.tail_estimate(1.0 / g.nodes) == float("inf")


def test_trajectory_validation():
    t = np.linspace(0, 1, 5)
    with pytest.raises(ValueError):
        Trajectory(t, np.zeros(4), np.zeros(5))
    with pytest.raises(ValueError):
        Trajectory(t, np.zeros(5) + 1j, np.zeros(5))
    tr = Trajectory(t, np.zeros(5), np.zeros(5), {2.0: np.ones(5)})
    assert tr.dt == pytest.approx(0.25)


def test_reservoir_condition_sampling():
    rc = ReservoirCondition.asymptotic(A=lambda w: w, B=lambda w: -w, a=0.5)
    a, b = rc.sample(np.array([1.0, 2.0]))
    np.testing.assert_allclose(a, [1.0, 2.0])
    np.testing.assert_allclose(b, [-1.0, -2.0])
    assert rc.kind is ConditionKind.ASYMPTOTIC
    tab = ReservoirCondition.from_samples(ConditionKind.TIME_ZERO, [1.0, 2.0], [0.0, 1.0], [1.0, 0.0])
    a, b = tab.sample(np.array([1.5]))
    assert a[0] == pytest.approx(0.5) and b[0] == pytest.approx(0.5)
