import numpy as np
import pytest

from ohmicbath import analytic as an
from ohmicbath import quantization as qz
from ohmicbath.core import OscillatorParams, ReservoirCondition
from ohmicbath.coupling import OhmicCoupling, Verdict, alpha_sq

P = OscillatorParams(3.0, 1.0)
C = OhmicCoupling(P)


@pytest.fixture(scope="module")
def ec():
    return qz.build_coefficients(C, P)


def test_normalisation_on_the_boundary(ec):
    assert ec.verdict is Verdict.ZERO_MODE_BOUNDARY_OK
    rep = qz.verify_commutators(ec)
    assert rep.norm_integral == pytest.approx(1.0, abs=1e-4)
    assert rep.delta_residual <= 1e-8


def test_normalisation_below_and_above():
    below = qz.verify_commutators(qz.build_coefficients(C.scaled(0.5), P))
    assert below.norm_integral == pytest.approx(1.0, abs=1e-4)
    above = qz.verify_commutators(qz.build_coefficients(C.scaled(2.0), P, enforce=False))
    assert abs(above.norm_integral - 1.0) > 0.05


def test_rejections():
    with pytest.raises(qz.NotDiagonalizableError):
        qz.build_coefficients(C.scaled(2.0), P)
    p0 = OscillatorParams(3.0, 0.0)
    with pytest.raises(qz.NotDiagonalizableError):
        qz.build_coefficients(OhmicCoupling(p0), p0)


def test_spectral_identity(ec):
    """Im G = (pi alpha**2 / 2 omega) |G|**2 away from omega = 0."""
    w = ec.grid.nodes
    lhs = ec.G.imag
    rhs = np.pi * alpha_sq(C, w) / (2 * w) * np.abs(ec.G) ** 2
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-14)


def test_dynamical_equation(ec):
    assert qz.dynamical_residual(ec) <= 1e-8
    np.testing.assert_allclose(ec.f_pi_q, -1j * ec.grid.nodes * ec.f_q)


def test_phase_freedom_keeps_norm():
    shifted = qz.build_coefficients(C, P, phase=lambda w: 0.3 * w)
    assert qz.verify_commutators(shifted).norm_integral == pytest.approx(1.0, abs=1e-4)


def test_nonzero_h_q_breaks_normalisation(ec):
    bump = lambda w: 0.05 * np.exp(-((w - 3.0) / 0.2) ** 2)  # noqa: E731
    assert abs(qz.verify_commutators(ec, h_q=bump).norm_integral - 1.0) > 1e-3


def test_reservoir_coefficient_regular_part(ec):
    fx = ec.f_X(2.0)
    assert np.all(np.isfinite(fx[np.abs(ec.grid.nodes - 2.0) > 1e-9]))


def test_coherent_state_reproduces_classical_motion(ec):
    a_r = lambda w: an.fig1_asymptotic_amplitudes(P, 1.0, w)[0]  # noqa: E731
    b_r = lambda w: an.fig1_asymptotic_amplitudes(P, 1.0, w)[1]  # noqa: E731
    ca = qz.coherent_amplitude(ReservoirCondition.asymptotic(a_r, b_r), ec.grid)
    t = np.linspace(-5, 5, 41)
    q = qz.q_expectation_from_coherent(ca, ec, t)
    assert np.max(np.abs(q - an.q_homogeneous(P, 1.0, t))) <= 1e-3
    phi = qz.phi_expectation(ca, [0.0, 0.4])
    w = ec.grid.nodes
    np.testing.assert_allclose(phi[1], a_r(w) * np.cos(0.4 * w) + b_r(w) * np.sin(0.4 * w), atol=1e-14)


def test_vacuum_and_validation(ec):
    ca = qz.coherent_amplitude(ReservoirCondition.asymptotic(), ec.grid)
    assert np.max(np.abs(qz.q_expectation_from_coherent(ca, ec, np.linspace(-5, 5, 11)))) <= 1e-12
    with pytest.raises(ValueError):
        qz.coherent_amplitude(ReservoirCondition.time_zero(), ec.grid)
