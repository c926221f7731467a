"""Domain types and shared conventions.

Units: hbar = k_B = 1. Frequencies, rates and temperatures share one
caller-chosen scale; times are measured in its inverse.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

__all__ = [
    "Regime",
    "OscillatorParams",
    "DerivedRates",
    "SpectralGrid",
    "Trajectory",
    "Spectrum",
    "ReservoirCondition",
    "ConditionKind",
    "GridTooCoarseWarning",
    "classify_regime",
    "derived_rates",
    "total_energy",
    "damped_pair",
]

# below this |omega1|/omega0 the trig/hyperbolic pair is replaced by its series
CRITICAL_SERIES_THRESHOLD = 1e-6


class GridTooCoarseWarning(UserWarning):
    """The tail of a frequency integral is not negligible on the grid used."""


class Regime(enum.Enum):
    UNDER = "under"
    CRITICAL = "critical"
    OVER = "over"


@dataclass(frozen=True)
class OscillatorParams:
    """Free frequency ``omega0`` and damping rate ``gamma`` of the oscillator."""

    omega0: float
    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.omega0) or self.omega0 <= 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0!r}")
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma!r}")

    def scaled(self, s: float) -> "OscillatorParams":
        return OscillatorParams(self.omega0 * s, self.gamma * s)

    @property
    def disc(self) -> float:
        """Signed square 4*omega0**2 - gamma**2 (= omega1**2 or -gamma1**2)."""
        return 4.0 * self.omega0**2 - self.gamma**2


@dataclass(frozen=True)
class DerivedRates:
    omega1: Optional[float] = None
    gamma1: Optional[float] = None


def classify_regime(p: OscillatorParams, tol: float = 1e-12) -> Regime:
    """Under-, critically or over-damped, with ``tol`` an absolute band on gamma."""
    if abs(p.gamma - 2.0 * p.omega0) <= tol:
        return Regime.CRITICAL
    if p.gamma < 2.0 * p.omega0:
        return Regime.UNDER
    return Regime.OVER


def derived_rates(p: OscillatorParams, tol: float = 1e-12) -> DerivedRates:
    regime = classify_regime(p, tol)
    if regime is Regime.CRITICAL:
        return DerivedRates(omega1=0.0)
    if regime is Regime.UNDER:
        return DerivedRates(omega1=float(np.sqrt(p.disc)))
    return DerivedRates(gamma1=float(np.sqrt(-p.disc)))


def damped_pair(p: OscillatorParams, t, rate: Optional[float] = None):
    """Return ``(E*C, E*S)`` with ``E = exp(-rate*t/2)`` for ``t >= 0``.

    ``C(t) = cos(omega1 t / 2)`` and ``S(t) = sin(omega1 t / 2) / omega1``
    continued analytically to all regimes (cosh/sinh with gamma1 when
    overdamped, series near critical damping). ``S`` is odd, ``C`` even, and

        C' = -(disc/2) S,   S' = C/2,   disc = omega1**2 (signed).

    ``rate`` defaults to gamma. The exponential is folded into the pair so
    overdamped values are formed without cancellation.
    """
    t = np.asarray(t, dtype=float)
    rate = p.gamma if rate is None else rate
    s = p.disc
    w1 = np.sqrt(abs(s))
    env = np.exp(-0.5 * rate * t)
    if w1 < CRITICAL_SERIES_THRESHOLD * p.omega0:
        x2 = s * t * t / 4.0
        c = 1.0 - x2 / 2.0 + x2 * x2 / 24.0
        sv = 0.5 * t * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)
        return env * c, env * sv
    if s > 0:
        x = 0.5 * w1 * t
        return env * np.cos(x), env * np.sin(x) / w1
    # overdamped: exp(-rate t/2) cosh(gamma1 t/2) as a sum of decaying exponentials
    a = np.exp(-0.5 * (rate - w1) * t)
    b = np.exp(-0.5 * (rate + w1) * t)
    return 0.5 * (a + b), 0.5 * (a - b) / w1


@dataclass(frozen=True)
class SpectralGrid:
    """Frequency nodes with quadrature weights.

    ``eta`` is the pole regulator standing in for an infinitesimal positive
    shift; it defaults to ``1e-4 * min(gamma, omega0)`` when built through
    the constructors with an :class:`OscillatorParams`.
    """

    nodes: np.ndarray
    weights: np.ndarray
    eta: float = 1e-6

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("grid needs at least one node")
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights differ in length")
        if nodes[0] < 0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be non-negative and strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def omega_max(self) -> float:
        return float(self.nodes[-1])

    def __len__(self):
        return self.nodes.size

    @property
    def upper_edge(self) -> float:
        """Right end of the interval the weights cover (exact for symmetric rules)."""
        span = self.nodes[-1] - self.nodes[0]
        return float(self.nodes[-1] + 0.5 * (np.sum(self.weights) - span))

    @staticmethod
    def default_eta(p: OscillatorParams) -> float:
        scale = min(p.gamma, p.omega0) if p.gamma > 0 else p.omega0
        return 1e-4 * scale

    @classmethod
    def midpoint(cls, omega_max: float, n: int, eta: float = 1e-6) -> "SpectralGrid":
        """Uniform cells on [0, omega_max] sampled at their centres."""
        d = omega_max / n
        nodes = (np.arange(n) + 0.5) * d
        return cls(nodes, np.full(n, d), eta)

    @classmethod
    def simpson(cls, omega_min: float, omega_max: float, n: int, eta: float = 1e-6) -> "SpectralGrid":
        """Uniform nodes with composite Simpson weights (``n`` is made odd)."""
        if n % 2 == 0:
            n += 1
        nodes = np.linspace(omega_min, omega_max, n)
        h = nodes[1] - nodes[0]
        w = np.full(n, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return cls(nodes, w * h / 3.0, eta)

    @classmethod
    def gauss_legendre(cls, breaks, order: int = 16, eta: float = 1e-6) -> "SpectralGrid":
        """Composite Gauss-Legendre rule on consecutive ``breaks`` panels."""
        from .quadrature import gl_panels

        nodes, weights = gl_panels(np.asarray(breaks, dtype=float), order)
        return cls(nodes, weights, eta)

    @classmethod
    def mapped(cls, n: int, scale: float, eta: float = 1e-6) -> "SpectralGrid":
        """Gauss-Legendre in theta with omega = scale*tan(theta), covering [0, inf).

        Suited to integrands decaying at least like 1/omega**2.
        """
        x, w = np.polynomial.legendre.leggauss(n)
        theta = 0.25 * np.pi * (x + 1.0)
        nodes = scale * np.tan(theta)
        weights = 0.25 * np.pi * w * scale / np.cos(theta) ** 2
        return cls(nodes, weights, eta)

    def integrate(self, values) -> complex | float:
        return np.sum(self.weights * np.asarray(values), axis=-1)

    def tail_estimate(self, values) -> float:
        """Integral beyond the last node assuming a power-law tail.

        The exponent is read off the last two nodes; integrands decaying no
        faster than 1/omega report ``inf``.
        """
        v = np.abs(np.asarray(values))
        if v[-1] == 0:
            return 0.0
        if v[-2] == 0 or self.nodes.size < 2:
            return float("inf")
        k = -np.log(v[-1] / v[-2]) / np.log(self.nodes[-1] / self.nodes[-2])
        if k <= 1:
            return float("inf")
        return float(v[-1] * self.nodes[-1] / (k - 1))


@dataclass(frozen=True)
class Trajectory:
    """Sampled q(t), qdot(t) and optionally X_omega(t) on a uniform time grid."""

    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    x: Mapping[float, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        n = t.size
        arrays = {"q": self.q, "qdot": self.qdot}
        for k, v in self.x.items():
            arrays[f"x@{k}"] = v
        for name, v in arrays.items():
            v = np.asarray(v)
            if v.shape != t.shape:
                raise ValueError(f"{name} has {v.size} samples, t has {n}")
            if np.iscomplexobj(v):
                scale = max(np.max(np.abs(v.real)), 1e-300)
                if np.max(np.abs(v.imag)) > 1e-12 * scale:
                    raise ValueError(f"{name} carries an imaginary residue")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "q", np.real(np.asarray(self.q, dtype=complex)).astype(float))
        object.__setattr__(self, "qdot", np.real(np.asarray(self.qdot, dtype=complex)).astype(float))
        object.__setattr__(self, "x", {float(k): np.real(np.asarray(v)).astype(float) for k, v in self.x.items()})

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


@dataclass(frozen=True)
class Spectrum:
    """Complex samples on a real frequency grid (may include negative values)."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if omega.shape != values.shape:
            raise ValueError("omega and values differ in length")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    def conjugate_symmetry_error(self) -> float:
        """Max relative deviation from value(-w) = conj(value(w)) on mirrored nodes."""
        pos = self.omega > 0
        wp = self.omega[pos]
        idx = np.searchsorted(self.omega, -wp[::-1])
        idx = np.clip(idx, 0, self.omega.size - 1)
        ok = np.isclose(self.omega[idx], -wp[::-1], rtol=0, atol=1e-12 * max(1.0, wp.max(initial=1.0)))
        if not np.any(ok):
            raise ValueError("grid has no mirrored node pairs")
        neg_vals = self.values[idx][ok]
        pos_vals = self.values[pos][::-1][ok]
        scale = max(np.max(np.abs(pos_vals)), 1e-300)
        return float(np.max(np.abs(neg_vals - np.conj(pos_vals))) / scale)


class ConditionKind(enum.Enum):
    TIME_ZERO = "time_zero"
    ASYMPTOTIC = "asymptotic"


def _zero(omega):
    return np.zeros_like(np.asarray(omega, dtype=float))


@dataclass(frozen=True)
class ReservoirCondition:
    """State of the reservoir: at t=0 (``A0, B0`` plus b1, b2) or at t -> -inf
    (``A_R, B_R`` plus the zero-mode displacement ``a``).

    ``A`` and ``B`` are vectorised callables of omega >= 0.
    """

    kind: ConditionKind
    A: Callable = _zero
    B: Callable = _zero
    zero_mode_a: float = 0.0
    b1: float = 0.0
    b2: float = 0.0

    def __post_init__(self):
        if self.kind is ConditionKind.TIME_ZERO and self.zero_mode_a != 0.0:
            raise ValueError("zero_mode_a belongs to asymptotic conditions")
        if self.kind is ConditionKind.ASYMPTOTIC and (self.b1 != 0.0 or self.b2 != 0.0):
            raise ValueError("b1, b2 belong to time-zero conditions")

    @classmethod
    def time_zero(cls, A=_zero, B=_zero, b1=0.0, b2=0.0):
        return cls(ConditionKind.TIME_ZERO, A, B, b1=b1, b2=b2)

    @classmethod
    def asymptotic(cls, A=_zero, B=_zero, a=0.0):
        return cls(ConditionKind.ASYMPTOTIC, A, B, zero_mode_a=a)

    @classmethod
    def from_samples(cls, kind: ConditionKind, omega, A, B, **kw):
        """Wrap sampled amplitudes with linear interpolation (zero outside)."""
        omega = np.asarray(omega, dtype=float)
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("amplitudes must be finite")
        fa = lambda w: np.interp(w, omega, A, left=0.0, right=0.0)  # noqa: E731
        fb = lambda w: np.interp(w, omega, B, left=0.0, right=0.0)  # noqa: E731
        return cls(kind, fa, fb, **kw)

    def sample(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.asarray(self.A(omega), dtype=float), np.asarray(self.B(omega), dtype=float)


def total_energy(p: OscillatorParams, coupling, q: float, qdot: float, grid: SpectralGrid,
                 x, xdot, tail_tol: float = 1e-6) -> float:
    """Total energy of an instantaneous state with the reservoir sampled on ``grid``.

    Warns with :class:`GridTooCoarseWarning` if the power-law tail of the
    reservoir integrand exceeds ``tail_tol`` of the returned value.
    """
    from .coupling import alpha

    w = grid.nodes
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    dens = 0.5 * (xdot**2 + w**2 * x**2) - alpha(coupling, w) * q * x
    e = 0.5 * qdot**2 + 0.5 * p.omega0**2 * q**2 + float(grid.integrate(dens))
    tail = grid.tail_estimate(dens)
    ref = max(abs(e), 0.5 * p.omega0**2 * q**2 + 0.5 * qdot**2, np.finfo(float).tiny)
    if tail > tail_tol * ref:
        warnings.warn(f"reservoir tail {tail:.3g} exceeds {tail_tol:g} of the energy",
                      GridTooCoarseWarning, stacklevel=2)
    return e
