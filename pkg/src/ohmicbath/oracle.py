"""Finite bath of oscillators standing in for the continuum.

The reservoir integral is replaced by a sum over grid nodes with couplings
alpha(omega_j) * sqrt(w_j). The resulting linear system is integrated with
fixed-step RK4, or propagated exactly through its normal modes when
ensemble statistics are needed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from .core import OscillatorParams, SpectralGrid, Trajectory
from .coupling import CouplingSpec, OhmicCoupling, alpha, alpha_sq

__all__ = [
    "DiscreteBath",
    "OracleRun",
    "EnsembleStats",
    "InstabilityError",
    "build_bath",
    "integrate",
    "zero_mode_state",
    "normal_modes",
    "thermal_sample",
    "thermal_moments",
]


class InstabilityError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiscreteBath:
    frequencies: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        c = np.asarray(self.couplings, dtype=float)
        if f.size == 0:
            raise ValueError("bath needs at least one mode")
        if f.shape != c.shape or np.any(f <= 0):
            raise ValueError("frequencies must be > 0 and match couplings")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "couplings", c)

    def __len__(self):
        return self.frequencies.size

    def zero_mode_sum(self) -> float:
        """Discrete counterpart of int alpha**2 / omega**2."""
        return float(np.sum(self.couplings**2 / self.frequencies**2))


def build_bath(c: CouplingSpec, grid: SpectralGrid, lump_tail: bool = False) -> DiscreteBath:
    """One bath mode per grid node, coupling alpha(omega_j) * sqrt(w_j).

    With ``lump_tail`` an extra mode at the cutoff carries the part of
    int alpha**2/omega**2 beyond the grid (alpha**2 held at its last value
    for tabulated couplings), so the discrete zero-mode sum matches the
    continuum one up to the quadrature defect.
    """
    if len(grid) == 0:
        raise ValueError("empty grid")
    nodes = grid.nodes
    keep = nodes > 0
    freqs = nodes[keep]
    coup = alpha(c, freqs) * np.sqrt(grid.weights[keep])
    if lump_tail:
        om = grid.upper_edge
        if isinstance(c, OhmicCoupling):
            pr = c.params
            tail = c.strength * 2.0 * pr.gamma * pr.omega0**2 / np.pi * np.arctan2(pr.gamma, om)
        else:
            tail = float(alpha_sq(c, om)) / om
        top = om * (1.0 + 1e-9)
        freqs = np.append(freqs, top)
        coup = np.append(coup, top * np.sqrt(tail))
    return DiscreteBath(freqs, coup)


class OracleRun(NamedTuple):
    trajectory: Trajectory
    energy: np.ndarray
    max_energy_drift: float


def discrete_energy(b: DiscreteBath, p: OscillatorParams, q, qdot, x, xdot):
    w = b.frequencies
    return (0.5 * qdot**2 + 0.5 * p.omega0**2 * q**2
            + 0.5 * np.sum(xdot**2 + (w * x) ** 2, axis=-1) - q * np.sum(b.couplings * x, axis=-1))


def _energy_scale(b, p, q, qdot, x, xdot):
    w = b.frequencies
    return 0.5 * qdot**2 + 0.5 * p.omega0**2 * q**2 + 0.5 * np.sum(xdot**2 + (w * x) ** 2)


def integrate(b: DiscreteBath, p: OscillatorParams, t_span, dt: float, q0: float = 1.0,
              qdot0: float = 0.0, x0=None, xdot0=None, record: Sequence[float] = (),
              stride: int = 1, drift_tol: float = 1e-4) -> OracleRun:
    """Fixed-step RK4 of q'' = -omega0**2 q + sum c_j X_j, X_j'' = -omega_j**2 X_j + c_j q.

    ``t_span = (t0, t1)`` may run backwards. ``record`` lists frequencies
    whose nearest bath mode is stored in the trajectory. Aborts with
    :class:`InstabilityError` if the discrete energy drifts by more than
    ``drift_tol`` relative to its positive-definite scale.
    """
    t0, t1 = (float(v) for v in t_span)
    n_steps = int(round(abs(t1 - t0) / dt))
    if n_steps == 0:
        raise ValueError("t_span shorter than one step")
    h = (t1 - t0) / n_steps
    if abs(h) * b.frequencies.max() > 2.0:
        raise InstabilityError(f"dt={abs(h):g} too large for omega_max={b.frequencies.max():g}")
    w2 = b.frequencies**2
    cpl = b.couplings
    w02 = p.omega0**2
    n = len(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    v = np.zeros(n) if xdot0 is None else np.array(xdot0, dtype=float)
    q, qd = float(q0), float(qdot0)
    idx = [int(np.argmin(np.abs(b.frequencies - f))) for f in record]

    def acc(q, x):
        return -w02 * q + cpl @ x, -w2 * x + cpl * q

    n_rec = n_steps // stride + 1
    ts = t0 + h * stride * np.arange(n_rec)
    qs, qds = np.empty(n_rec), np.empty(n_rec)
    es = np.empty(n_rec)
    xs = np.empty((len(idx), n_rec))
    scale = max(_energy_scale(b, p, q, qd, x, v), np.finfo(float).tiny)
    e_start = discrete_energy(b, p, q, qd, x, v)

    def store(k):
        qs[k], qds[k] = q, qd
        es[k] = discrete_energy(b, p, q, qd, x, v)
        xs[:, k] = x[idx]

    store(0)
    for step in range(1, n_steps + 1):
        a1q, a1x = acc(q, x)
        q2, x2 = q + 0.5 * h * qd, x + 0.5 * h * v
        v2q, v2x = qd + 0.5 * h * a1q, v + 0.5 * h * a1x
        a2q, a2x = acc(q2, x2)
        q3, x3 = q + 0.5 * h * v2q, x + 0.5 * h * v2x
        v3q, v3x = qd + 0.5 * h * a2q, v + 0.5 * h * a2x
        a3q, a3x = acc(q3, x3)
        q4, x4 = q + h * v3q, x + h * v3x
        v4q, v4x = qd + h * a3q, v + h * a3x
        a4q, a4x = acc(q4, x4)
        q = q + h / 6.0 * (qd + 2.0 * v2q + 2.0 * v3q + v4q)
        x = x + h / 6.0 * (v + 2.0 * v2x + 2.0 * v3x + v4x)
        qd = qd + h / 6.0 * (a1q + 2.0 * a2q + 2.0 * a3q + a4q)
        v = v + h / 6.0 * (a1x + 2.0 * a2x + 2.0 * a3x + a4x)
        if step % stride == 0:
            k = step // stride
            store(k)
            if abs(es[k] - e_start) > drift_tol * scale:
                raise InstabilityError(
                    f"energy drift {abs(es[k] - e_start) / scale:.3g} at t={ts[k]:g} exceeds {drift_tol:g}")
    traj = Trajectory(ts, qs, qds, {float(b.frequencies[i]): xs[j] for j, i in enumerate(idx)})
    drift = float(np.max(np.abs(es - e_start)) / scale)
    return OracleRun(traj, es, drift)


def zero_mode_state(b: DiscreteBath, a: float = 1.0):
    """Static reservoir displacement a*c_j/omega_j**2 that pairs with q = a."""
    return a * b.couplings / b.frequencies**2


def normal_modes(b: DiscreteBath, p: OscillatorParams):
    """Eigenfrequencies and orthonormal eigenvectors of the coupled system.

    Index 0 of each eigenvector is the oscillator, the rest the bath modes.
    """
    n = len(b)
    k = np.zeros((n + 1, n + 1))
    k[0, 0] = p.omega0**2
    k[0, 1:] = k[1:, 0] = -b.couplings
    k[np.arange(1, n + 1), np.arange(1, n + 1)] = b.frequencies**2
    lam, vec = np.linalg.eigh(k)
    if lam[0] <= 0:
        raise ValueError("coupled system has a non-positive mode; no thermal state exists")
    return np.sqrt(lam), vec


def _mode_variances(freq, T, quantum):
    """(position, velocity) variances of an oscillator of frequency ``freq`` at T."""
    if quantum:
        from .quadrature import coth_half

        cth = coth_half(freq, T)
        return cth / (2.0 * freq), 0.5 * freq * cth
    return T / freq**2, np.full_like(freq, T)


class EnsembleStats(NamedTuple):
    t: np.ndarray
    q2: np.ndarray
    qdot2: np.ndarray
    q_mean: np.ndarray
    n_samples: int
    seed: int


def thermal_sample(b: DiscreteBath, p: OscillatorParams, T: float, n_samples: int, seed: int,
                   t=np.linspace(0.0, 10.0, 101), quantum: bool = False,
                   q0: float | None = None, qdot0: float | None = None) -> EnsembleStats:
    """Monte-Carlo moments of q and qdot from Gaussian thermal initial data.

    Without ``q0``/``qdot0`` every normal mode of the coupled system is drawn
    from its thermal Gaussian, so the ensemble is stationary. With them the
    oscillator starts from the given values and each bath mode is drawn from
    its uncoupled thermal Gaussian. ``quantum`` uses (N + 1/2) occupations
    (Wigner sampling of the Gaussian state); otherwise equipartition.
    Propagation is exact in the normal-mode basis. Streams come from
    ``numpy.random.Philox(seed)``, one sample per row.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if T < 0:
        raise ValueError("T must be >= 0")
    rng = np.random.Generator(np.random.Philox(seed))
    t = np.asarray(t, dtype=float)
    om, vec = normal_modes(b, p)
    if q0 is None and qdot0 is None:
        vx, vv = _mode_variances(om, T, quantum)
        a = rng.standard_normal((n_samples, om.size)) * np.sqrt(vx)
        bb = rng.standard_normal((n_samples, om.size)) * np.sqrt(vv)
    else:
        vx, vv = _mode_variances(b.frequencies, T, quantum)
        x = np.empty((n_samples, om.size))
        v = np.empty((n_samples, om.size))
        x[:, 0] = 0.0 if q0 is None else q0
        v[:, 0] = 0.0 if qdot0 is None else qdot0
        x[:, 1:] = rng.standard_normal((n_samples, len(b))) * np.sqrt(vx)
        v[:, 1:] = rng.standard_normal((n_samples, len(b))) * np.sqrt(vv)
        a, bb = x @ vec, v @ vec
    row = vec[0]
    cos_t = np.cos(np.outer(t, om)) * row
    sin_t = np.sin(np.outer(t, om)) * row
    q = cos_t @ a.T + (sin_t / om) @ bb.T
    qd = -(sin_t * om) @ a.T + cos_t @ bb.T
    return EnsembleStats(t, np.mean(q * q, axis=1), np.mean(qd * qd, axis=1), np.mean(q, axis=1),
                         n_samples, seed)


def thermal_moments(b: DiscreteBath, p: OscillatorParams, T: float, quantum: bool = True):
    """Exact stationary (<q**2>, <qdot**2>) of the coupled discrete system."""
    om, vec = normal_modes(b, p)
    vx, vv = _mode_variances(om, T, quantum)
    w = vec[0] ** 2
    return float(np.sum(w * vx)), float(np.sum(w * vv))
