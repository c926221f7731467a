"""Closed-form solutions for the Ohmic coupling.

Everything here is written with the regime-independent pair

    C(t) = cos(omega1 t / 2),   S(t) = sin(omega1 t / 2) / omega1,

which stays real for every damping (see :func:`ohmicbath.core.damped_pair`),
so one set of formulas covers under-, critically and over-damped motion.
Fourier convention: f(t) = (1/2pi) int f(omega) exp(-i omega t) d omega.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import integrate

from .core import (
    ConditionKind,
    OscillatorParams,
    ReservoirCondition,
    Spectrum,
    Trajectory,
    damped_pair,
)
from .coupling import OhmicCoupling, alpha
from .quadrature import gl_panels, pv_on_grid, refine_breaks

__all__ = [
    "q_homogeneous",
    "q_homogeneous_derivatives",
    "q_general_homogeneous",
    "x_reservoir_homogeneous",
    "homogeneous_spectrum",
    "fig1_asymptotic_amplitudes",
    "green_retarded",
    "green_retarded_freq",
    "green_two_sided",
    "green_two_sided_freq",
    "forcing_from_asymptotic",
    "q_from_asymptotic",
    "reservoir_from_q",
    "ReservoirSamples",
    "map_conditions",
    "memory_residual",
    "weak_residual",
    "mollifier",
    "GridCoverageError",
    "retarded_memory",
    "two_sided_memory",
    "retarded_residual",
    "two_sided_residual",
]


class GridCoverageError(ValueError):
    pass


def _pair(p, t):
    """(E*C, E*S) at signed t, with E = exp(-gamma|t|/2); S is odd."""
    t = np.asarray(t, dtype=float)
    ec, es = damped_pair(p, np.abs(t))
    return ec, np.sign(t) * es


# ---------------------------------------------------------------- homogeneous

def q_homogeneous(p: OscillatorParams, b: float, t):
    """Solution damped into past and future with q(0) = b, qdot(0) = 0."""
    ec, es = damped_pair(p, np.abs(np.asarray(t, dtype=float)))
    return b * (ec + p.gamma * es)


def q_homogeneous_derivatives(p: OscillatorParams, b: float, t):
    """(q, qdot, qddot) of :func:`q_homogeneous` from the closed forms."""
    t = np.asarray(t, dtype=float)
    ec, es = damped_pair(p, np.abs(t))
    w2 = p.omega0**2
    q = b * (ec + p.gamma * es)
    qdot = -2.0 * w2 * b * np.sign(t) * es
    qddot = -w2 * b * (ec - p.gamma * es)
    return q, qdot, qddot


def q_general_homogeneous(p: OscillatorParams, b1: float, b2: float, t):
    """Two-amplitude family; reduces to :func:`q_homogeneous` when b1 == b2.

    Tends to +(b2-b1)/2 as t -> inf and to -(b2-b1)/2 as t -> -inf.
    """
    t = np.asarray(t, dtype=float)
    d = b2 - b1
    if d != 0 and p.gamma == 0:
        raise ValueError("b1 != b2 needs gamma > 0")
    g = p.gamma
    w2 = p.omega0**2
    ec, es = damped_pair(p, np.abs(t))
    if d == 0:
        return b1 * (ec + g * es)
    pos = 0.5 * d + b1 * ec + ((b1 * g * g + d * w2) / g) * es
    neg = -0.5 * d + b2 * ec + ((b2 * g * g - d * w2) / g) * es
    return np.where(t >= 0, pos, neg)


def x_reservoir_homogeneous(p: OscillatorParams, b: float, omega, t):
    """Reservoir partner of :func:`q_homogeneous` (X and its velocity vanish at t=0)."""
    w = np.asarray(omega, dtype=float)
    t = np.asarray(t, dtype=float)
    g, w02 = p.gamma, p.omega0**2
    if np.any(w <= 0):
        raise ValueError("omega must be > 0")
    den = (w * w - w02) ** 2 + g * g * w * w
    pref = b * w * p.omega0 / den * np.sqrt(2.0 * g / (np.pi * (w * w + g * g)))
    ec, es = damped_pair(p, np.abs(t))
    brace = ((w02 - g * g - w * w) * np.cos(w * t)
             + (g * w02 / w) * np.sin(w * np.abs(t))
             + (w * w + g * g - w02) * ec
             + g * (w * w + g * g - 3.0 * w02) * es)
    return pref * brace


def homogeneous_spectrum(p: OscillatorParams, b: float, omega) -> Spectrum:
    """q(omega) = 2 gamma omega0**2 b / D(omega), the transform of q_homogeneous."""
    w = np.asarray(omega, dtype=float)
    den = (w * w - p.omega0**2) ** 2 + p.gamma**2 * w * w
    return Spectrum(w, 2.0 * p.gamma * p.omega0**2 * b / den)


def fig1_asymptotic_amplitudes(p: OscillatorParams, b: float, omega):
    """(A_R, B_R): the reservoir at t -> -inf that evolves into q_homogeneous."""
    w = np.asarray(omega, dtype=float)
    g, w0 = p.gamma, p.omega0
    den = (w * w - w0 * w0) ** 2 + g * g * w * w
    root = np.sqrt(2.0 * g / (np.pi * (w * w + g * g)))
    a_r = -b * root * w * w0 * (w * w + g * g - w0 * w0) / den
    b_r = -b * root * g * w0**3 / den
    return a_r, b_r


# ------------------------------------------------------------ Green functions

def green_retarded(p: OscillatorParams, t, eta: float = 0.0):
    """Causal Green function; plateaus at gamma/omega0**2 * exp(-eta t)."""
    t = np.asarray(t, dtype=float)
    tp = np.maximum(t, 0.0)
    ec, es = damped_pair(p, tp)
    w2 = p.omega0**2
    g = (p.gamma / w2) * (np.exp(-eta * tp) - ec) - ((p.gamma**2 - 2.0 * w2) / w2) * es
    return np.where(t > 0, g, 0.0)


def green_retarded_freq(p: OscillatorParams, omega, eta: float):
    w = np.asarray(omega, dtype=complex)
    g = p.gamma
    return -(w + 1j * g) / ((w + 1j * eta) * (w * w + 1j * g * w - p.omega0**2))


def _bracket(p, ec, es, sign):
    """gamma*C + sign*(gamma**2 - 2 omega0**2)*S (envelope included)."""
    return p.gamma * ec + sign * (p.gamma**2 - 2.0 * p.omega0**2) * es


def green_two_sided(p: OscillatorParams, t, t0: float, eta: float = 0.0):
    """Green function of the memory equation with the lower limit at t = 0.

    Continuous in t and t0; dG/dt jumps by 1 at t = t0.
    """
    if p.gamma <= 0:
        raise ValueError("two-sided Green function needs gamma > 0")
    t = np.asarray(t, dtype=float)
    g, w2 = p.gamma, p.omega0**2
    ect, est = damped_pair(p, np.abs(t))
    front = ect + g * est
    ev, sv = damped_pair(p, abs(t0))
    back = (g * g - w2) * ev + (g * g - 3.0 * w2) * g * sv
    last = -front * back / (2.0 * g * w2)
    u = t - t0
    ecu, esu = damped_pair(p, np.abs(u))
    if t0 >= 0:
        step = 2.0 * (t < 0) - 1.0 * (u < 0)
        out = step * (g / w2) * np.exp(eta * t)
        out = out + np.where(t >= 0, 1.0, -1.0) * _bracket(p, ect, est, 1.0) / w2
        out = out - np.where(u >= 0, _bracket(p, ecu, esu, 1.0), 0.0) / w2
        return out + last
    before = u < 0
    out = np.where(before, (g / w2) * np.exp(eta * t), 0.0)
    out = out - np.where(before, _bracket(p, ecu, esu, 1.0), 0.0) / w2
    return out + last


def green_two_sided_freq(p: OscillatorParams, omega, t0: float, eta: float):
    """Frequency form of :func:`green_two_sided` (pole at omega = i*eta)."""
    w = np.asarray(omega, dtype=complex)
    g, w2 = p.gamma, p.omega0**2
    den = (w * w - w2) ** 2 + g * g * w * w
    ev, sv = damped_pair(p, abs(t0))
    tail = ((w2 - g * g) * ev - g * (g * g - 3.0 * w2) * sv) / den
    shift = np.exp(1j * w * t0)
    if t0 >= 0:
        return (-(w + 1j * g) * shift / ((w - 1j * eta) * (w * w - w2 + 1j * g * w))
                - 2j * g * w2 / ((w - 1j * eta) * den) + tail)
    return -(w - 1j * g) * shift / ((w - 1j * eta) * (w * w - w2 - 1j * g * w)) + tail


# ------------------------------------------------- asymptotic reconstruction

def _omega_nodes(omega_max, panel, order=8):
    return gl_panels(np.linspace(0.0, omega_max, max(2, int(np.ceil(omega_max / panel))) + 1), order)


def forcing_from_asymptotic(p: OscillatorParams, rc: ReservoirCondition, t,
                            omega_max: float, panel: float):
    """g(t) = int alpha(w) [A cos wt + B sin wt] dw on [0, omega_max]."""
    nodes, weights = _omega_nodes(omega_max, panel)
    a_r, b_r = rc.sample(nodes)
    amp = weights * alpha(OhmicCoupling(p), nodes)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.size)
    for lo in range(0, t.size, 512):
        ph = np.outer(t[lo:lo + 512], nodes)
        out[lo:lo + 512] = np.cos(ph) @ (amp * a_r) + np.sin(ph) @ (amp * b_r)
    return out


def q_from_asymptotic(p: OscillatorParams, rc: ReservoirCondition, t, *,
                      omega_max: float | None = None, dt: float | None = None,
                      t_min: float | None = None, eta: float = 0.0, tol: float = 1e-3):
    """q(t) = a + int_{-inf}^t G_R(t - t') g(t') dt' by time-domain trapezoid.

    ``g`` is built from the asymptotic amplitudes on [0, omega_max]; the
    lower limit is cut at ``t_min`` (default 40/gamma before the earliest
    requested time). Raises :class:`GridCoverageError` when the spectral
    tail beyond ``omega_max`` could shift q by more than ``tol``.
    """
    if rc.kind is not ConditionKind.ASYMPTOTIC:
        raise ValueError("q_from_asymptotic needs an asymptotic condition")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if p.gamma == 0:
        return np.full(t.shape, rc.zero_mode_a)
    scale = max(p.omega0, p.gamma)
    omega_max = 15.0 * scale if omega_max is None else omega_max
    dt = min(0.005 / scale * 3.0, 0.2 / omega_max) if dt is None else dt
    t_min = t.min() - 40.0 / p.gamma if t_min is None else t_min
    a_hi, b_hi = rc.sample(np.array([omega_max]))
    spec_tail = float(alpha(OhmicCoupling(p), omega_max) * np.hypot(a_hi, b_hi)[0])
    if spec_tail / (3.0 * omega_max) > tol:
        raise GridCoverageError(
            f"reservoir spectrum at omega_max={omega_max:g} too large for tol={tol:g}")
    panel = min(0.1 * min(p.gamma, p.omega0), np.pi / (2.0 * max(abs(t_min), abs(t.max()), 1.0)))
    grid = np.arange(t_min, t.max() + dt, dt)
    g_grid = forcing_from_asymptotic(p, rc, grid, omega_max, panel)
    out = np.empty(t.size)
    for i, ti in enumerate(t):
        k = int(np.searchsorted(grid, ti, side="right"))
        tk = grid[:k]
        f = green_retarded(p, ti - tk, eta) * g_grid[:k]
        val = integrate.trapezoid(f, tk) if k > 1 else 0.0
        # last partial interval: integrand vanishes at t' = ti because G_R(0) = 0
        if k >= 1:
            val += 0.5 * (ti - tk[-1]) * f[-1]
        out[i] = val
    return rc.zero_mode_a + out


class ReservoirSamples(NamedTuple):
    x: np.ndarray
    truncation_error: float


def reservoir_from_q(p: OscillatorParams, c, rc: ReservoirCondition, q: Trajectory,
                     omega: float) -> ReservoirSamples:
    """X_omega on ``q.t`` from the memory integral of a sampled q(t).

    Time-zero conditions integrate from t = 0 (which must be a grid point).
    Asymptotic conditions cut the lower limit at ``q.t[0]`` and continue q
    as a constant before it; the Abel-regularised remainder of that
    constant is added exactly and ``truncation_error`` estimates the rest
    from the slope of q at the cut.
    """
    if omega <= 0:
        raise ValueError("omega must be > 0")
    t = q.t
    al = float(alpha(c, omega))
    a0, b0 = (float(v[0]) for v in rc.sample(np.array([omega])))
    free = a0 * np.cos(omega * t) + b0 * np.sin(omega * t)
    qc, qs = q.q * np.cos(omega * t), q.q * np.sin(omega * t)
    if rc.kind is ConditionKind.TIME_ZERO:
        i0 = int(np.argmin(np.abs(t)))
        if abs(t[i0]) > 1e-9 * max(1.0, abs(t).max()):
            raise ValueError("time grid must contain t = 0 for time-zero conditions")
        cc, cs = np.zeros_like(t), np.zeros_like(t)
        for arr, out in ((qc, cc), (qs, cs)):
            if t.size - i0 > 1:
                out[i0:] = _cumulative(t[i0:], arr[i0:])
            if i0 > 0:
                out[:i0 + 1] = -_cumulative(-t[:i0 + 1][::-1], arr[:i0 + 1][::-1])[::-1]
        mem = np.sin(omega * t) * cc - np.cos(omega * t) * cs
        return ReservoirSamples(free + al / omega * mem, 0.0)
    cc = _cumulative(t, qc)
    cs = _cumulative(t, qs)
    mem = np.sin(omega * t) * cc - np.cos(omega * t) * cs
    q_first = float(q.q[0])
    mem += q_first * np.cos(omega * (t - t[0])) / omega
    # next term of the integration by parts of the neglected history
    err = abs(al / omega) * abs(float(q.qdot[0])) / omega**2
    return ReservoirSamples(free + al / omega * mem, err)


def _cumulative(t, f):
    """int_{t[0]}^{t[k]} f for each k (t increasing)."""
    return integrate.cumulative_simpson(f, x=t, initial=0.0)


# --------------------------------------------------------- condition mapping

def map_conditions(p: OscillatorParams, c, q: Spectrum, rc_in: ReservoirCondition,
                   omega=None, a: float = 0.0, b1: float = 0.0, b2: float = 0.0) -> ReservoirCondition:
    """Convert time-zero amplitudes to asymptotic ones (or back) for a fixed q(omega).

    ``q`` must be sampled on a uniform grid of omega >= 0 reaching far into
    its decay; ``omega`` (default: the positive nodes of ``q``) is where the
    new amplitudes are sampled. The returned condition interpolates linearly.
    """
    xi = q.omega
    if np.any(xi < 0):
        xi_mask = xi >= 0
        xi, vals = xi[xi_mask], q.values[xi_mask]
    else:
        vals = q.values
    w = xi[xi > 0] if omega is None else np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("target frequencies must be > 0")
    re_q = np.interp(w, xi, vals.real)
    im_q = np.interp(w, xi, vals.imag)

    def tail(flast, upper, om):
        # f assumed to decay like 1/xi**4 beyond the grid
        return flast * upper**4 * _tail_inv4(upper, om)

    pv_re = pv_on_grid(xi, vals.real, w, upper_tail=tail)
    pv_im = pv_on_grid(xi, xi * vals.imag, w, upper_tail=tail)
    if not (np.all(np.isfinite(pv_re)) and np.all(np.isfinite(pv_im))):
        raise ArithmeticError("principal-value quadrature failed")
    al = alpha(c, w)
    da = (al / (2.0 * w)) * (im_q + (2.0 * w / np.pi) * pv_re)
    db = (al / (2.0 * w)) * (re_q - (2.0 / np.pi) * pv_im)
    a_in, b_in = rc_in.sample(w)
    if rc_in.kind is ConditionKind.TIME_ZERO:
        return ReservoirCondition.from_samples(ConditionKind.ASYMPTOTIC, w, a_in + da, b_in - db,
                                               zero_mode_a=a)
    return ReservoirCondition.from_samples(ConditionKind.TIME_ZERO, w, a_in - da, b_in + db,
                                           b1=b1, b2=b2)


def _tail_inv4(upper, om):
    # int_upper^inf dxi / (xi**4 (xi**2 - om**2)), expanded for om < upper
    r = (om / upper) ** 2
    return (1.0 / (5.0 * upper**5)) * (1.0 + 5.0 * r / 7.0 + 5.0 * r * r / 9.0)


# ----------------------------------------------------------------- residuals

def memory_residual(p: OscillatorParams, q, qddot, t, forcing=None):
    """qddot + omega0**2 q - sgn(t) gamma omega0**2 int_0^t q(t') exp(-gamma|t-t'|) dt' - f.

    ``q`` and ``qddot`` are callables; the memory integral uses adaptive
    quadrature.
    """
    g, w2 = p.gamma, p.omega0**2
    out = []
    for ti in np.atleast_1d(np.asarray(t, dtype=float)):
        mem = integrate.quad(lambda s: float(q(s)) * np.exp(-g * abs(ti - s)), 0.0, ti,
                             epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        r = float(qddot(ti)) + w2 * float(q(ti)) - np.sign(ti) * g * w2 * mem
        if forcing is not None:
            r -= float(forcing(ti))
        out.append(r)
    return np.asarray(out)


def mollifier(sigma: float):
    """Unit-mass Gaussian of width ``sigma`` and its second derivative."""
    norm = 1.0 / (sigma * np.sqrt(2.0 * np.pi))

    def phi(x):
        return norm * np.exp(-0.5 * (x / sigma) ** 2)

    def phi2(x):
        return phi(x) * ((x / sigma) ** 2 - 1.0) / sigma**2

    return phi, phi2


def weak_residual(p: OscillatorParams, green, memory, source: float, taus, sigma: float | None = None,
                  kinks=(), order: int = 48):
    """Residual of a Green-function equation tested against a narrow Gaussian.

    For each centre tau returns

        int G phi_tau'' + omega0**2 int G phi_tau - int M phi_tau - phi_tau(source),

    i.e. the equation G'' + omega0**2 G - M = delta(t - source) integrated
    against phi_tau(t) = phi(t - tau). ``green`` and ``memory`` are callables
    of t (``memory`` returns the memory term M(t)); ``kinks`` lists points
    where G is not smooth so the quadrature can split there.
    """
    sigma = 1e-3 / p.omega0 if sigma is None else sigma
    phi, phi2 = mollifier(sigma)
    out = []
    for tau in np.atleast_1d(np.asarray(taus, dtype=float)):
        lo, hi = tau - 10.0 * sigma, tau + 10.0 * sigma
        breaks = refine_breaks(list(kinks), lo, hi, 2.5 * sigma)
        s, w = gl_panels(breaks, order)
        gv = green(s)
        mv = np.array([memory(x) for x in s])
        # phi'' integrates to zero; removing G(tau) keeps its rounding out of the sum
        g_ref = float(green(np.array([tau]))[0])
        val = (np.sum(w * (gv - g_ref) * phi2(s - tau)) + p.omega0**2 * np.sum(w * gv * phi(s - tau))
               - np.sum(w * mv * phi(s - tau)))
        out.append(val - phi(source - tau))
    return np.asarray(out)


def retarded_memory(p: OscillatorParams, t: float, eta: float = 0.0) -> float:
    """gamma omega0**2 int_{-inf}^t G_R(t') exp(-gamma (t - t')) dt'."""
    if t <= 0:
        return 0.0
    g = p.gamma
    val = integrate.quad(lambda s: float(green_retarded(p, s, eta)) * np.exp(-g * (t - s)), 0.0, t,
                         epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    return g * p.omega0**2 * val


def two_sided_memory(p: OscillatorParams, t: float, t0: float, eta: float = 0.0) -> float:
    """sgn(t) gamma omega0**2 int_0^t G(t', t0) exp(-gamma |t - t'|) dt'."""
    if t == 0:
        return 0.0
    g = p.gamma
    lo, hi = sorted((0.0, t))
    pts = [t0] if lo < t0 < hi else None
    val = integrate.quad(lambda s: float(green_two_sided(p, s, t0, eta)) * np.exp(-g * abs(t - s)),
                         lo, hi, points=pts, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    # int_0^t = -int_t^0 for t < 0, and sgn(t) = -1 there: the two signs cancel
    return g * p.omega0**2 * val


def retarded_residual(p: OscillatorParams, taus, sigma: float | None = None):
    """Weak residual of the retarded Green-function equation at each centre."""
    return weak_residual(p, lambda s: green_retarded(p, s), lambda s: retarded_memory(p, s),
                         0.0, taus, sigma, kinks=(0.0,))


def two_sided_residual(p: OscillatorParams, t0: float, taus, sigma: float | None = None):
    """Weak residual of the two-sided Green-function equation with source at t0."""
    return weak_residual(p, lambda s: green_two_sided(p, s, t0), lambda s: two_sided_memory(p, s, t0),
                         t0, taus, sigma, kinks=(0.0, t0))
