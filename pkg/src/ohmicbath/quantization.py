"""Eigenmode coefficients of the diagonalised Hamiltonian and coherent states.

Only c-number data are represented: the expansion coefficients of q in the
eigenmode operators, the Green function G(omega), and expectation values
in coherent states. hbar = 1 throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .core import ConditionKind, OscillatorParams, ReservoirCondition, SpectralGrid
from .coupling import (
    CouplingSpec,
    OhmicCoupling,
    Verdict,
    alpha,
    alpha_sq,
    diagonalizability,
    pv_kernel_integral,
    susceptibility,
    zero_mode_integral,
)

__all__ = [
    "EigenmodeCoefficients",
    "CoherentAmplitude",
    "CommutatorReport",
    "NotDiagonalizableError",
    "default_grid",
    "green_from_susceptibility",
    "build_coefficients",
    "verify_commutators",
    "dynamical_residual",
    "coherent_amplitude",
    "phi_expectation",
    "q_expectation_from_coherent",
]


class NotDiagonalizableError(ValueError):
    pass


def default_grid(p: OscillatorParams, omega_max: float | None = None, n: int = 40001,
                 eta: float | None = None) -> SpectralGrid:
    """Simpson grid on [10 eta, omega_max]; the [0, 10 eta] cutout is handled analytically."""
    eta = SpectralGrid.default_eta(p) if eta is None else eta
    omega_max = 500.0 * max(p.omega0, p.gamma) / 3.0 if omega_max is None else omega_max
    return SpectralGrid.simpson(10.0 * eta, omega_max, n, eta)


def green_from_susceptibility(c: CouplingSpec, p: OscillatorParams, omega, method: str = "auto"):
    """G(omega) = -1 / (omega**2 - omega0**2 (1 - chi(omega))) for real omega != 0."""
    w = np.asarray(omega, dtype=float)
    chi = susceptibility(c, p, w, method)
    return -1.0 / (w * w - p.omega0**2 * (1.0 - chi))


@dataclass(frozen=True)
class EigenmodeCoefficients:
    """q = int (f_q C e^{-iwt} + h.c.) d omega with f_q = h_X alpha G (h_q = 0)."""

    coupling: CouplingSpec
    params: OscillatorParams
    grid: SpectralGrid
    G: np.ndarray
    h_X: np.ndarray
    verdict: Verdict

    @property
    def alpha(self):
        return alpha(self.coupling, self.grid.nodes)

    @property
    def f_q(self):
        return self.h_X * self.alpha * self.G

    @property
    def f_pi_q(self):
        return -1j * self.grid.nodes * self.f_q

    def f_X(self, omega_res: float):
        """Regular part of f_X(omega_res, omega) on the grid (the delta line is dropped)."""
        w = self.grid.nodes
        a = float(alpha(self.coupling, omega_res))
        return a * self.f_q / (omega_res**2 - w * w)


def build_coefficients(c: CouplingSpec, p: OscillatorParams, grid: SpectralGrid | None = None,
                       method: str = "auto", phase: Optional[Callable] = None,
                       enforce: bool = True) -> EigenmodeCoefficients:
    """Green function and eigenmode coefficients on ``grid`` (default :func:`default_grid`).

    ``phase`` multiplies h_X by exp(i*phase(omega)). With ``enforce`` a
    coupling classified as failing the diagonalisability test, or one that
    vanishes identically, is rejected.
    """
    grid = default_grid(p) if grid is None else grid
    w = grid.nodes
    if np.any(w <= 0):
        raise ValueError("coefficient grid must exclude omega = 0")
    verdict = diagonalizability(c, p).verdict
    if enforce:
        if verdict is Verdict.FAILS:
            raise NotDiagonalizableError("coupling fails the diagonalisability condition")
        if zero_mode_integral(c) == 0.0:
            raise NotDiagonalizableError("decoupled oscillator: f_q has poles at omega0")
    G = green_from_susceptibility(c, p, w, method)
    h = np.sqrt(1.0 / (2.0 * w)).astype(complex)
    if phase is not None:
        h = h * np.exp(1j * np.asarray(phase(w), dtype=float))
    return EigenmodeCoefficients(c, p, grid, G, h, verdict)


class CommutatorReport(NamedTuple):
    norm_integral: float
    delta_residual: float
    head: float
    tail: float


def _is_ohmic_boundary(c):
    return isinstance(c, OhmicCoupling) and c.strength == 1.0 and c.params.gamma > 0


def verify_commutators(ec: EigenmodeCoefficients, h_q: Optional[Callable] = None,
                       n_pairs: int = 32, seed: int = 0) -> CommutatorReport:
    """Normalisation int 2 omega |f_q|**2 (must be 1) and the off-diagonal check.

    The head [0, first node] is added analytically: from the regulated
    zero-mode pole for the Ohmic coupling on the boundary, by a constant
    extrapolation otherwise. The tail assumes |f_q|**2 ~ omega**-5.
    ``delta_residual`` is the largest bracket

        1 + [1/G*(w) - 1/G(w') + I(w)* - I(w')] / (w**2 - w'**2)

    over ``n_pairs`` random pairs with |w - w'| > 10 grid spacings, where
    I(w) = P int alpha**2/(xi**2 - w**2) + i pi alpha**2(w)/(2w) comes from
    the principal-value quadrature rather than the closed form.
    """
    g = ec.grid
    w = g.nodes
    f_q = ec.f_q
    if h_q is not None:
        f_q = f_q + np.asarray(h_q(w), dtype=complex)
    dens = 2.0 * w * np.abs(f_q) ** 2
    body = float(g.integrate(dens))
    first = w[0]
    p = ec.params
    if _is_ohmic_boundary(ec.coupling):
        eta = g.eta
        head = 2.0 * p.gamma / (np.pi * p.omega0**2) * (first - eta * np.arctan(first / eta))
    else:
        head = float(dens[0] * first)
    tail = float(dens[-1] * w[-1] / 3.0)
    norm = body + head + tail

    rng = np.random.Generator(np.random.Philox(seed))
    spacing = float(np.min(np.diff(w))) if w.size > 1 else 1.0
    lo, hi = w[0], min(w[-1], 50.0 * max(p.omega0, p.gamma))
    worst = 0.0
    count = 0
    while count < n_pairs:
        a, b = rng.uniform(lo, hi, 2)
        if abs(a - b) <= 10.0 * spacing:
            continue
        count += 1
        ia = 1.0 / complex(green_from_susceptibility(ec.coupling, p, a))
        ib = 1.0 / complex(green_from_susceptibility(ec.coupling, p, b))
        sa = complex(pv_kernel_integral(ec.coupling, a, method="quad"), np.pi * float(alpha_sq(ec.coupling, a)) / (2 * a))
        sb = complex(pv_kernel_integral(ec.coupling, b, method="quad"), np.pi * float(alpha_sq(ec.coupling, b)) / (2 * b))
        bracket = 1.0 + (np.conj(ia) - ib + np.conj(sa) - sb) / (a * a - b * b)
        worst = max(worst, abs(bracket))
    return CommutatorReport(norm, worst, head, tail)


def dynamical_residual(ec: EigenmodeCoefficients) -> float:
    """max |(w**2 - w0**2 + I(w)) f_q + alpha h_X| with I from principal-value quadrature,
    relative to max |alpha h_X|."""
    w = ec.grid.nodes
    sample = w[:: max(1, w.size // 200)]
    idx = np.searchsorted(w, sample)
    pv = pv_kernel_integral(ec.coupling, sample, method="quad")
    a2 = alpha_sq(ec.coupling, sample)
    bracket = sample**2 - ec.params.omega0**2 + pv + 1j * np.pi * a2 / (2.0 * sample)
    drive = ec.alpha[idx] * ec.h_X[idx]
    res = bracket * ec.f_q[idx] + drive
    return float(np.max(np.abs(res)) / max(np.max(np.abs(drive)), np.finfo(float).tiny))


@dataclass(frozen=True)
class CoherentAmplitude:
    grid: SpectralGrid
    C: np.ndarray


def coherent_amplitude(rc: ReservoirCondition, grid: SpectralGrid) -> CoherentAmplitude:
    """Eigenmode amplitude C = sqrt(omega/2) (A_R + i B_R) of the matching coherent state.

    With this sign <Phi_omega(t)> = A_R cos(omega t) + B_R sin(omega t),
    the free part of the classical reservoir solution in the far past.
    """
    if rc.kind is not ConditionKind.ASYMPTOTIC:
        raise ValueError("coherent amplitudes are defined from asymptotic conditions")
    w = grid.nodes
    a, b = rc.sample(w)
    return CoherentAmplitude(grid, np.sqrt(w / 2.0) * (a + 1j * b))


def phi_expectation(ca: CoherentAmplitude, t):
    """<Phi_omega(t)> on the grid for each t (rows: t, columns: omega)."""
    w = ca.grid.nodes
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.real(np.sqrt(2.0 / w) * ca.C * np.exp(-1j * np.outer(t, w)))


def q_expectation_from_coherent(ca: CoherentAmplitude, ec: EigenmodeCoefficients, t):
    """<q(t)> = 2 Re int f_q C exp(-i omega t) d omega (zero-mode line excluded)."""
    if ca.grid is not ec.grid and not (
        ca.grid.nodes.shape == ec.grid.nodes.shape and np.array_equal(ca.grid.nodes, ec.grid.nodes)
    ):
        raise ValueError("coherent amplitude and coefficients live on different grids")
    w = ec.grid.nodes
    amp = ec.grid.weights * ec.f_q * ca.C
    t = np.atleast_1d(np.asarray(t, dtype=float))
    # head [0, first node] by the value at the first node
    head = w[0] * ec.f_q[0] * ca.C[0]
    out = np.empty(t.size)
    for lo in range(0, t.size, 64):
        ph = np.exp(-1j * np.outer(t[lo:lo + 64], w))
        out[lo:lo + 64] = 2.0 * np.real(ph @ amp + head)
    return out
