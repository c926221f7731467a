"""Coupling functions, principal-value kernels and the effective susceptibility.

Two coupling families are supported: the closed-form Ohmic coupling

    alpha(w) = omega0 * w * sqrt(2 gamma / (pi (w**2 + gamma**2)))

(optionally with alpha**2 scaled by ``strength``), and couplings tabulated on
a grid with linear interpolation. alpha**2 is always extended as an even
function of frequency.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy import integrate

from .core import OscillatorParams, SpectralGrid
from .quadrature import gl_panels, log_term, pv_on_grid

__all__ = [
    "OhmicCoupling",
    "TabulatedCoupling",
    "CouplingSpec",
    "Susceptibility",
    "KKReport",
    "ZeroModeResult",
    "Verdict",
    "DiagonalizabilityResult",
    "DivergentIntegralError",
    "FitDegeneracyError",
    "alpha",
    "alpha_sq",
    "integrate_alpha_sq",
    "pv_kernel_integral",
    "susceptibility",
    "susceptibility_derivative",
    "kramers_kronig_check",
    "zero_mode_condition",
    "diagonalizability",
]


class DivergentIntegralError(ValueError):
    pass


class FitDegeneracyError(RuntimeError):
    pass


@dataclass(frozen=True)
class OhmicCoupling:
    """Coupling that produces damping proportional to velocity.

    ``strength`` multiplies alpha**2; 1 is the Ohmic coupling proper.
    """

    params: OscillatorParams
    strength: float = 1.0

    def __post_init__(self):
        if self.strength < 0:
            raise ValueError("strength must be >= 0")

    def scaled(self, s: float) -> "OhmicCoupling":
        return OhmicCoupling(self.params, self.strength * s)


@dataclass(frozen=True)
class TabulatedCoupling:
    """alpha >= 0 sampled on strictly increasing omega >= 0."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omega = self.omega.nodes if isinstance(self.omega, SpectralGrid) else self.omega
        omega = np.asarray(omega, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if omega.shape != values.shape or omega.size < 2:
            raise ValueError("need matching omega/alpha arrays with >= 2 entries")
        if omega[0] < 0 or np.any(np.diff(omega) <= 0):
            raise ValueError("omega must be non-negative and strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("tabulated alpha must be finite and >= 0")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    @property
    def omega_max(self) -> float:
        return float(self.omega[-1])

    @classmethod
    def from_function(cls, f, omega):
        omega = np.asarray(omega, dtype=float)
        return cls(omega, np.asarray(f(omega), dtype=float))


CouplingSpec = Union[OhmicCoupling, TabulatedCoupling]


def alpha_sq(c: CouplingSpec, omega):
    """alpha**2 at |omega|."""
    w = np.abs(np.asarray(omega, dtype=float))
    if isinstance(c, OhmicCoupling):
        p = c.params
        if p.gamma == 0:
            return np.zeros_like(w)
        return c.strength * 2.0 * p.gamma * p.omega0**2 * w * w / (np.pi * (w * w + p.gamma**2))
    return alpha(c, w) ** 2


def alpha(c: CouplingSpec, omega):
    """alpha(omega) for omega >= 0; tabulated couplings reject out-of-grid queries."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("alpha is defined for omega >= 0")
    if isinstance(c, OhmicCoupling):
        return np.sqrt(alpha_sq(c, w))
    if np.any(w < c.omega[0]) or np.any(w > c.omega[-1]):
        raise ValueError(
            f"omega outside tabulated range [{c.omega[0]:g}, {c.omega[-1]:g}]")
    return np.interp(w, c.omega, c.values)


def _scale(c: CouplingSpec) -> float:
    if isinstance(c, OhmicCoupling):
        return c.params.gamma if c.params.gamma > 0 else c.params.omega0
    return c.omega_max / 100.0


def integrate_alpha_sq(c: CouplingSpec, kernel, points=(), tail=None, order: int = 8):
    """int_0^inf alpha**2(xi) kernel(xi) dxi for a regular (vectorised) kernel.

    Ohmic couplings use adaptive quadrature on [0, inf) split at ``points``.
    Tabulated couplings use Gauss-Legendre panels between table nodes and
    ``points``; beyond the table alpha**2 is held at its last value and the
    tail is ``tail(alpha_sq_last, omega_last)`` or, if absent, integrated
    adaptively.
    """
    if isinstance(c, OhmicCoupling):
        f = lambda x: float(alpha_sq(c, x) * kernel(np.asarray(x)))  # noqa: E731
        pts = sorted({float(x) for x in points if x > 0})
        edges = [0.0] + pts
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            total += integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=400)[0]
        total += integrate.quad(f, edges[-1], np.inf, epsabs=0, epsrel=1e-12, limit=400)[0]
        return total
    lo, hi = c.omega[0], c.omega[-1]
    breaks = np.concatenate([c.omega, [x for x in points if lo < x < hi]])
    nodes, weights = gl_panels(breaks, order)
    total = np.sum(weights * alpha_sq(c, nodes) * kernel(nodes))
    a2 = c.values[-1] ** 2
    if tail is not None:
        total += tail(a2, hi)
    elif a2 > 0:
        total += a2 * integrate.quad(lambda x: float(kernel(np.asarray(x))), hi, np.inf,
                                     epsabs=0, epsrel=1e-12, limit=200)[0]
    return total


def pv_kernel_integral(c: CouplingSpec, omega, method: str = "auto"):
    """P int_0^inf alpha**2(xi) / (xi**2 - omega**2) dxi.

    ``method="closed"`` (Ohmic only) returns strength*gamma**2 omega0**2/(omega**2+gamma**2);
    ``"quad"`` subtracts alpha**2(omega) at the pole, using that the principal
    value of 1/(xi**2 - omega**2) over [0, inf) vanishes. ``"auto"`` picks
    the closed form when available.
    """
    w = np.abs(np.asarray(omega, dtype=float))
    ohmic = isinstance(c, OhmicCoupling)
    if method == "auto":
        method = "closed" if ohmic else "quad"
    if method == "closed":
        if not ohmic:
            raise ValueError("closed form exists only for the Ohmic coupling")
        p = c.params
        return c.strength * p.gamma**2 * p.omega0**2 / (w * w + p.gamma**2)
    if method != "quad":
        raise ValueError(f"unknown method {method!r}")
    out = np.array([_pv_quad(c, float(x)) for x in np.atleast_1d(w)])
    return out.reshape(w.shape) if w.ndim else float(out[0])


def _pv_quad(c: CouplingSpec, w: float) -> float:
    if w == 0:
        return integrate_alpha_sq(c, lambda x: 1.0 / (x * x), points=())
    if isinstance(c, OhmicCoupling):
        a2w = float(alpha_sq(c, w))

        def f(x):
            if x == w:
                return 0.0
            return (float(alpha_sq(c, x)) - a2w) / (x * x - w * w)

        total = 0.0
        for a, b in ((0.0, w), (w, 2.0 * w + _scale(c))):
            total += integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=400)[0]
        total += integrate.quad(f, 2.0 * w + _scale(c), np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)[0]
        return total
    lo, hi = c.omega[0], c.omega[-1]
    if w > hi:
        raise ValueError(f"omega={w:g} beyond tabulated range")
    a2w = float(alpha_sq(c, w))
    breaks = np.concatenate([c.omega, [w]])
    nodes, weights = gl_panels(breaks, 8)
    g = (alpha_sq(c, nodes) - a2w) / (nodes * nodes - w * w)
    total = float(np.sum(weights * g))
    total += a2w * float(log_term(w, hi) - (log_term(w, lo) if lo > 0 else 0.0))
    # alpha**2 held constant beyond the table
    a2last = c.values[-1] ** 2
    if hi != w:
        total -= a2last * float(log_term(w, hi))
    return total


@dataclass(frozen=True)
class Susceptibility:
    omega: np.ndarray
    values: np.ndarray
    closed_form: bool = False

    def __post_init__(self):
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    @classmethod
    def sample(cls, c: CouplingSpec, p: OscillatorParams, omega, method: str = "auto"):
        closed = isinstance(c, OhmicCoupling) and method in ("auto", "closed")
        return cls(omega, susceptibility(c, p, omega, method), closed)


def susceptibility(c: CouplingSpec, p: OscillatorParams, omega, method: str = "auto"):
    """Dimensionless chi(omega) for real omega != 0 (negative omega by conjugation)."""
    w = np.asarray(omega, dtype=complex if np.iscomplexobj(omega) else float)
    if np.any(w == 0):
        raise ValueError("susceptibility is evaluated at omega != 0")
    ohmic = isinstance(c, OhmicCoupling)
    if method == "auto":
        method = "closed" if ohmic else "quad"
    if method == "closed":
        if not ohmic:
            raise ValueError("closed form exists only for the Ohmic coupling")
        g = c.params.gamma
        return c.strength * g / (g - 1j * w)
    wr = np.real(w)
    pv = pv_kernel_integral(c, np.abs(wr), method="quad")
    return (pv + 1j * np.pi * alpha_sq(c, wr) / (2.0 * wr)) / p.omega0**2


def susceptibility_derivative(c: CouplingSpec, p: OscillatorParams, omega, h: float | None = None):
    """d chi / d omega: closed form for Ohmic, central differences otherwise."""
    w = np.asarray(omega, dtype=float)
    if isinstance(c, OhmicCoupling):
        g = c.params.gamma
        return c.strength * 1j * g / (g - 1j * w) ** 2
    h = h if h is not None else 1e-4 * _scale(c)
    return (susceptibility(c, p, w + h) - susceptibility(c, p, w - h)) / (2.0 * h)


class KKReport(NamedTuple):
    max_abs_error: float
    tail_uncertainty: float
    status: str
    reconstructed: np.ndarray
    interior: np.ndarray


def kramers_kronig_check(s: Susceptibility, grid: SpectralGrid | None = None,
                         tol: float = 1e-3, interior_fraction: float = 0.9) -> KKReport:
    """Rebuild Re chi from Im chi by a Hilbert transform and compare.

    Uses Re chi(w) = (2/pi) P int_0^inf xi Im chi(xi) / (xi**2 - w**2) dxi on
    the (uniform) sample grid, assuming Im chi ~ 1/xi beyond the last node.
    ``tail_uncertainty`` is the spread between that tail and a 1/xi**2 tail;
    a failure is reported as ``"tail_dominated"`` when it exceeds ``tol``.
    """
    xi = s.omega if grid is None else grid.nodes
    if xi.shape != s.values.shape:
        raise ValueError("susceptibility samples do not match the grid")
    if np.any(np.abs(np.diff(xi, 2)) > 1e-9 * xi[-1]):
        raise ValueError("Hilbert reconstruction needs a uniform grid")
    f = xi * s.values.imag
    hi = xi[-1]
    interior = (xi > xi[0]) & (xi <= interior_fraction * hi) & (xi > 0)
    w = xi[interior]

    def tail_1(flast, upper, om):
        return flast * np.log((upper + om) / (upper - om)) / (2.0 * om)

    rec = (2.0 / np.pi) * pv_on_grid(xi, f, w, upper_tail=tail_1)
    alt = flast_alt = f[-1]
    alt = (flast_alt * hi / (2.0 * w * w)) * np.log(hi * hi / (hi * hi - w * w))
    tail_unc = float(np.max(np.abs((2.0 / np.pi) * (tail_1(f[-1], hi, w) - alt)), initial=0.0))
    err = float(np.max(np.abs(rec - s.values.real[interior]), initial=0.0))
    if err <= tol:
        status = "ok"
    elif tail_unc > tol:
        status = "tail_dominated"
    else:
        status = "interior_mismatch"
    return KKReport(err, tail_unc, status, rec, w)


class ZeroModeResult(NamedTuple):
    integral: float
    satisfied: bool


def zero_mode_integral(c: CouplingSpec) -> float:
    """int_0^inf alpha**2 / omega**2 d omega."""
    if isinstance(c, TabulatedCoupling) and c.omega[0] == 0 and c.values[0] != 0:
        raise DivergentIntegralError("alpha(0) != 0 makes alpha**2/omega**2 non-integrable")
    if isinstance(c, OhmicCoupling) and c.params.gamma == 0:
        return 0.0
    return integrate_alpha_sq(c, lambda x: 1.0 / (x * x),
                              tail=lambda a2, hi: a2 / hi)


def zero_mode_condition(c: CouplingSpec, p: OscillatorParams, tol: float = 1e-8) -> ZeroModeResult:
    integral = zero_mode_integral(c)
    return ZeroModeResult(integral, abs(integral - p.omega0**2) <= tol * p.omega0**2)


class Verdict(enum.Enum):
    STRICTLY_BELOW = "strictly_below"
    ZERO_MODE_BOUNDARY_OK = "zero_mode_boundary_ok"
    FAILS = "fails"


class DiagonalizabilityResult(NamedTuple):
    verdict: Verdict
    integral: float
    kappa_exponent_estimate: float


def denominator_on_imaginary_axis(c: CouplingSpec, p: OscillatorParams, kappa, integral=None):
    """omega0**2 + kappa**2 - int alpha**2/(xi**2 + kappa**2), cancellation-free.

    Written as (omega0**2 - I0) + kappa**2 + kappa**2 int alpha**2/(xi**2 (xi**2+kappa**2)).
    """
    i0 = zero_mode_integral(c) if integral is None else integral
    out = []
    for k in np.atleast_1d(np.asarray(kappa, dtype=float)):
        rest = integrate_alpha_sq(c, lambda x, k=k: 1.0 / (x * x * (x * x + k * k)),
                                  points=(k,), tail=lambda a2, hi, k=k: a2 * _tail_xk(hi, k))
        out.append((p.omega0**2 - i0) + k * k + k * k * rest)
    out = np.asarray(out)
    return out if np.ndim(kappa) else float(out[0])


def _tail_xk(hi, k):
    # int_hi^inf dx / (x^2 (x^2 + k^2))
    return (1.0 / hi - np.arctan2(k, hi) / k) / (k * k) if k > 0 else 1.0 / (3 * hi**3)


def diagonalizability(c: CouplingSpec, p: OscillatorParams, tol: float = 1e-6,
                      fit_range=(1e-4, 1e-2), n_kappa: int = 9,
                      exponent_tol: float = 0.05) -> DiagonalizabilityResult:
    """Classify a coupling by the eigenmode criterion.

    Strictly below: omega0**2 > int alpha**2/xi**2. On the boundary (equality
    within ``tol`` relative) the small-kappa order of the imaginary-axis
    denominator is fitted on kappa in ``fit_range`` times the coupling's rate
    scale and must not exceed 1 (+ ``exponent_tol``). Anything else fails.
    """
    i0 = zero_mode_integral(c)
    w02 = p.omega0**2
    if i0 < w02 * (1 - tol):
        return DiagonalizabilityResult(Verdict.STRICTLY_BELOW, i0, float("nan"))
    if i0 > w02 * (1 + tol):
        return DiagonalizabilityResult(Verdict.FAILS, i0, float("nan"))
    kappa = np.geomspace(fit_range[0], fit_range[1], n_kappa) * _scale(c)
    d = denominator_on_imaginary_axis(c, p, kappa, i0)
    noise = 1e-12 * w02
    if np.any(d <= noise):
        raise FitDegeneracyError("imaginary-axis denominator is at the noise floor")
    n = float(np.polyfit(np.log(kappa), np.log(d), 1)[0])
    verdict = Verdict.ZERO_MODE_BOUNDARY_OK if n <= 1 + exponent_tol else Verdict.FAILS
    return DiagonalizabilityResult(verdict, i0, n)
