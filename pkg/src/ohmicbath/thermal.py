"""Thermal-equilibrium moments of the damped oscillator (hbar = k_B = 1).

All quantities are real-axis quadratures of coth(omega / 2T) against
spectral functions built from the Green function. For the Ohmic coupling at
the zero-mode boundary the omega = 0 pole of G is regulated by ``eta``; the
resulting divergence of <q**2> is reported, never dropped.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate

from .core import OscillatorParams, SpectralGrid
from .coupling import (
    CouplingSpec,
    DivergentIntegralError,
    OhmicCoupling,
    Verdict,
    diagonalizability,
    susceptibility,
    susceptibility_derivative,
)
from .quadrature import coth_half

__all__ = [
    "ThermalParams",
    "PositionCorrelation",
    "ReservoirTerms",
    "planck_occupation",
    "im_green",
    "position_correlation",
    "momentum_correlation",
    "reservoir_energy_terms",
    "thermal_energy",
    "free_energy_limit",
]


@dataclass(frozen=True)
class ThermalParams:
    """Temperature, pole regulator and an optional fixed quadrature grid.

    Without ``grid`` the integrals go through adaptive quadrature; with it,
    the integrand is summed on the grid nodes and nothing beyond the last
    node is added.
    """

    T: float
    eta: float = 1e-3
    grid: Optional[SpectralGrid] = None

    def __post_init__(self):
        if not np.isfinite(self.T) or self.T < 0:
            raise ValueError("T must be finite and >= 0")
        if not np.isfinite(self.eta) or self.eta <= 0:
            raise ValueError("eta must be finite and > 0")

    def occupation(self, omega):
        return planck_occupation(omega, self.T)


def planck_occupation(omega, T: float):
    """1 / (exp(omega/T) - 1) for omega > 0; identically 0 at T = 0."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("occupation is defined for omega > 0")
    if T == 0:
        return np.zeros_like(w)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(w / T)


def _zero_mode_ohmic(c: CouplingSpec, p: OscillatorParams) -> bool:
    """Ohmic coupling sitting exactly on the zero-mode boundary for ``p``."""
    return (isinstance(c, OhmicCoupling) and c.strength == 1.0 and c.params == p
            and p.gamma > 0)


def _decoupled(c: CouplingSpec) -> bool:
    return isinstance(c, OhmicCoupling) and (c.params.gamma == 0 or c.strength == 0)


def _check(c: CouplingSpec, p: OscillatorParams):
    if _zero_mode_ohmic(c, p) or _decoupled(c):
        return
    verdict = diagonalizability(c, p).verdict
    if verdict is Verdict.FAILS:
        raise DivergentIntegralError("no thermal state: the coupling fails the diagonalisability test")
    if verdict is Verdict.ZERO_MODE_BOUNDARY_OK:
        raise DivergentIntegralError(
            "zero-mode pole without a closed form; only the Ohmic coupling is regulated")


def _green(c: CouplingSpec, p: OscillatorParams, w):
    chi = susceptibility(c, p, w)
    return chi, -1.0 / (w * w - p.omega0**2 * (1.0 - chi))


def im_green(c: CouplingSpec, p: OscillatorParams, omega, eta: float = 0.0,
             regulator: str = "modulus"):
    """Im G(omega) for omega > 0.

    For the Ohmic coupling on the zero-mode boundary the pole is regulated.
    ``regulator="modulus"`` gives (pi alpha**2 / 2w) |G_R|**2, that is
    gamma w w0**2 / ((w**2 + eta**2) D(w)); ``"retarded"`` gives Im G_R(w)
    itself, which carries an extra eta w (w**2 - w0**2 + gamma**2) in the
    numerator. Both agree as eta -> 0 pointwise, but at T > 0 the finite
    part of <q**2> differs by T (gamma**2 - w0**2) / w0**4 between them.
    ``eta = 0`` drops the regulator and is only safe where the integrand
    carries a factor omega.
    """
    w = np.asarray(omega, dtype=float)
    if regulator not in ("modulus", "retarded"):
        raise ValueError("regulator must be 'modulus' or 'retarded'")
    if _zero_mode_ohmic(c, p):
        g, w0 = p.gamma, p.omega0
        d = (w * w - w0 * w0) ** 2 + (g * w) ** 2
        num = g * w * w0 * w0
        if regulator == "retarded":
            num = num + eta * w * (w * w - w0 * w0 + g * g)
        return num / ((w * w + eta * eta) * d)
    if _decoupled(c):
        return np.zeros_like(w)  # the delta line at omega0 is not representable pointwise
    return np.imag(_green(c, p, w)[1])


# --------------------------------------------------------------------------
# quadrature engine


def _breaks(c: CouplingSpec, p: OscillatorParams, T: float, eta: float):
    w0, g = p.omega0, p.gamma
    scale = max(w0, g, T)
    pts = [eta * k for k in (1, 3, 10, 30, 100, 300, 1000)]
    width = max(g, 1e-6 * w0)
    for k in (0.3, 1, 3, 10, 30, 100):
        pts += [w0 - k * width, w0 + k * width]
    pts += [g, T, 2.0 * scale, 5.0 * scale, 10.0 * scale]
    if not isinstance(c, OhmicCoupling):
        pts += list(np.geomspace(c.omega[0] if c.omega[0] > 0 else c.omega[1], c.omega_max, 12))
    upper = 50.0 * scale if isinstance(c, OhmicCoupling) else c.omega_max
    pts = np.unique([x for x in pts if 1e-6 * eta < x < upper])
    return np.concatenate(([0.0], pts, [upper])), isinstance(c, OhmicCoupling)


def _quad(f: Callable, breaks, tau: float, infinite_tail: bool) -> float:
    with warnings.catch_warnings():
        # oscillatory panels hit the roundoff floor long before 1e-12
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return _quad_panels(f, breaks, tau, infinite_tail)


def _quad_panels(f, breaks, tau, infinite_tail):
    total = 0.0
    kw = dict(limit=400, epsabs=1e-16, epsrel=1e-12)
    for a, b in zip(breaks[:-1], breaks[1:]):
        if tau == 0:
            total += integrate.quad(f, a, b, **kw)[0]
        else:
            total += integrate.quad(f, a, b, weight="cos", wvar=tau, **kw)[0]
    if infinite_tail:
        last = breaks[-1]
        if tau == 0:
            total += integrate.quad(f, last, np.inf, limit=400, epsabs=1e-15, epsrel=1e-12)[0]
        else:
            total += integrate.quad(f, last, np.inf, weight="cos", wvar=tau,
                                    limlst=200, epsabs=1e-14)[0]
    return total


def _spectral_integral(f: Callable, c, p, tp: ThermalParams, tau: float, eta: float) -> float:
    """int_0^inf f(w) cos(w tau) dw, f vectorised."""
    if tp.grid is not None:
        w = tp.grid.nodes
        w = w[w > 0]
        vals = f(w) * np.cos(w * tau)
        weights = tp.grid.weights[tp.grid.nodes > 0]
        return float(np.sum(weights * vals))
    breaks, tail = _breaks(c, p, tp.T, eta)
    return _quad(lambda x: float(f(np.asarray(x))), breaks, tau, tail)


# --------------------------------------------------------------------------
# correlation functions


class PositionCorrelation(NamedTuple):
    """<q(t) q(t')> (symmetrised) split into its regulator dependence.

    ``value`` is the correlation at the requested ``eta``. It behaves as
    finite_part + divergent_coefficient/eta + log_coefficient*ln(omega0/eta)
    for small eta. ``divergent`` flags values dominated by the pole term.
    """

    value: float
    finite_part: float
    divergent_coefficient: float
    log_coefficient: float
    eta: float
    divergent: bool


def _q2_integrand(c, p, T, eta, regulator):
    def f(w):
        return im_green(c, p, w, eta, regulator) * coth_half(w, T) / np.pi
    return f


def position_correlation(p: OscillatorParams, c: CouplingSpec, tp: ThermalParams,
                         t_minus_tprime: float = 0.0,
                         regulator: str = "modulus") -> PositionCorrelation:
    """(1/pi) int_0^inf cos(w tau) coth(w/2T) Im G(w) dw.

    For the Ohmic zero-mode coupling the pole term is extracted from the
    values at eta, eta/2 and eta/4 with the model F + c/eta + d*eta (the
    ln(omega0/eta) piece present only at T = 0 is known in closed form and
    removed first). Other couplings have no pole and report zero
    coefficients. ``regulator`` is passed to :func:`im_green`; use
    ``"retarded"`` when combining with :func:`reservoir_energy_terms`.
    """
    _check(c, p)
    tau = abs(float(t_minus_tprime))
    eta = tp.eta
    if _decoupled(c):
        # Im G is a delta line at omega0
        value = float(np.cos(p.omega0 * tau) * coth_half(p.omega0, tp.T)) / (2.0 * p.omega0)
        return PositionCorrelation(value, value, 0.0, 0.0, eta, False)
    value = _spectral_integral(_q2_integrand(c, p, tp.T, eta, regulator), c, p, tp, tau, eta)
    if not _zero_mode_ohmic(c, p):
        return PositionCorrelation(value, value, 0.0, 0.0, eta, False)
    if tp.T == 0:
        ell = p.gamma / (np.pi * p.omega0**2)
        finite = float(value - ell * np.log(p.omega0 / eta))
        return PositionCorrelation(value, finite, 0.0, ell, eta, False)
    etas = eta * np.array([1.0, 0.5, 0.25])
    vals = [value] + [_spectral_integral(_q2_integrand(c, p, tp.T, e, regulator), c, p, tp, tau, e)
                      for e in etas[1:]]
    design = np.column_stack([np.ones(3), 1.0 / etas, etas])
    finite, coef, _ = np.linalg.solve(design, np.asarray(vals))
    return PositionCorrelation(value, float(finite), float(coef), 0.0, eta,
                               bool(abs(coef / eta) > abs(finite)))


def momentum_correlation(p: OscillatorParams, c: CouplingSpec, tp: ThermalParams,
                         t_minus_tprime: float = 0.0) -> float:
    """(1/pi) int_0^inf w**2 cos(w tau) coth(w/2T) Im G(w) dw (no pole contribution)."""
    _check(c, p)
    if _decoupled(c):
        tau = float(t_minus_tprime)
        return 0.5 * p.omega0 * float(np.cos(p.omega0 * tau) * coth_half(p.omega0, tp.T))

    def f(w):
        return w * w * im_green(c, p, w) * coth_half(w, tp.T) / np.pi

    return _spectral_integral(f, c, p, tp, abs(float(t_minus_tprime)), tp.eta)


# --------------------------------------------------------------------------
# energies


class ReservoirTerms(NamedTuple):
    bath_term: float
    cross_term: float


def _chi_parts(c, p, w, eta):
    """(chi, dchi/dw, G) with the regulated retarded G for the Ohmic zero mode."""
    if _zero_mode_ohmic(c, p):
        g, w0 = p.gamma, p.omega0
        wc = w.astype(complex)
        chi = g / (g - 1j * wc)
        G = -(wc + 1j * g) / ((wc + 1j * eta) * (wc * wc + 1j * g * wc - w0 * w0))
        return chi, 1j * g / (g - 1j * wc) ** 2, G
    chi, G = _green(c, p, w)
    return chi, susceptibility_derivative(c, p, w), G


def reservoir_energy_terms(p: OscillatorParams, c: CouplingSpec, tp: ThermalParams) -> ReservoirTerms:
    """Bath energy (w0**2/2pi) Im int coth (chi + w chi') G and the coupling
    term (w0**2/pi) Im int coth chi G.

    For the Ohmic zero-mode coupling both carry a 1/eta piece at T > 0 that
    cancels against <q**2> in the energy assembly.
    """
    _check(c, p)
    if _decoupled(c):
        return ReservoirTerms(0.0, 0.0)
    w02 = p.omega0**2
    eta = tp.eta

    def bath(w):
        chi, dchi, G = _chi_parts(c, p, w, eta)
        return w02 / (2 * np.pi) * np.imag((chi + w * dchi) * G) * coth_half(w, tp.T)

    def cross(w):
        chi, _, G = _chi_parts(c, p, w, eta)
        return w02 / np.pi * np.imag(chi * G) * coth_half(w, tp.T)

    return ReservoirTerms(_spectral_integral(bath, c, p, tp, 0.0, eta),
                          _spectral_integral(cross, c, p, tp, 0.0, eta))


def thermal_energy(p: OscillatorParams, c: CouplingSpec, tp: ThermalParams) -> float:
    """Oscillator thermal energy <H>_q including the zero-point part.

    The Ohmic zero-mode coupling uses the closed imaginary part
    gamma w w0**2 (gamma**2 + 3w**2 - w0**2) / ((w**2 + gamma**2) D); other
    couplings take Im of {w0**2 (w chi' - chi + 1) + w**2} G pointwise.
    """
    _check(c, p)
    w0, g = p.omega0, p.gamma
    if _decoupled(c):
        return 0.5 * w0 * float(coth_half(w0, tp.T))
    if _zero_mode_ohmic(c, p):
        def f(w):
            d = (w * w - w0 * w0) ** 2 + (g * w) ** 2
            num = g * w * w0 * w0 * (g * g + 3 * w * w - w0 * w0)
            return num / ((w * w + g * g) * d) * coth_half(w, tp.T) / (2 * np.pi)
    else:
        def f(w):
            chi, dchi, G = _chi_parts(c, p, w, tp.eta)
            br = w0 * w0 * (w * dchi - chi + 1.0) + w * w
            return np.imag(br * G) * coth_half(w, tp.T) / (2 * np.pi)
    return _spectral_integral(f, c, p, tp, 0.0, tp.eta)


def free_energy_limit(p: OscillatorParams, T: float) -> float:
    """Weak-damping limit of the Ohmic thermal energy: (w0/2) coth(w0/2T) - T/2."""
    return 0.5 * p.omega0 * float(coth_half(p.omega0, T)) - 0.5 * T
