"""Quadrature helpers: composite Gauss-Legendre panels, pole-subtracted
principal values and a cancellation-free coth."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def gl_panels(breaks, order: int = 16):
    """Nodes and weights of a composite Gauss-Legendre rule over ``breaks``."""
    breaks = np.unique(np.asarray(breaks, dtype=float))
    x, w = _leggauss(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def refine_breaks(points, lo: float, hi: float, max_width: float):
    """Sorted breakpoints inside [lo, hi] with panels no wider than ``max_width``."""
    pts = np.asarray([lo, hi] + [p for p in points if lo < p < hi], dtype=float)
    pts = np.unique(pts)
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(np.ceil((b - a) / max_width)))
        out.extend(np.linspace(a, b, k + 1)[1:])
    return np.asarray(out)


def geometric_breaks(lo: float, hi: float, ratio: float = 2.0):
    """Panels growing geometrically from ``lo`` to ``hi`` (both > 0)."""
    n = max(1, int(np.ceil(np.log(hi / lo) / np.log(ratio))))
    return np.geomspace(lo, hi, n + 1)


def log_term(omega, upper):
    """P int_0^upper dxi / (xi^2 - omega^2) for 0 < omega, omega != upper."""
    omega = np.asarray(omega, dtype=float)
    return np.log(np.abs(upper - omega) / (upper + omega)) / (2.0 * omega)


def coth(x):
    """coth for x > 0 written as 1 + 2/expm1(2x); exact 1 for x = inf."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        return 1.0 + 2.0 / np.expm1(2.0 * x)


def coth_half(omega, T):
    """coth(omega / 2T) with coth -> 1 at T = 0, valid for omega > 0."""
    omega = np.asarray(omega, dtype=float)
    if T == 0:
        return np.ones_like(omega)
    with np.errstate(over="ignore"):
        return coth(omega / (2.0 * T))


def pv_on_grid(xi, f, omega, upper_tail=None):
    """P int_{xi[0]}^{xi[-1]} f(xi)/(xi^2 - omega^2) dxi on a uniform grid.

    The pole is removed by subtracting f(omega) (linear interpolation) and
    adding the exact log integral of the subtracted constant; the regular
    remainder is integrated with the trapezoid rule, its value at the pole
    being f'(omega)/(2 omega) by central differences. ``upper_tail`` may
    return the contribution of [xi[-1], inf) given (f_last, xi_last, omega).
    """
    xi = np.asarray(xi, dtype=float)
    f = np.asarray(f)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    h = xi[1] - xi[0]
    lo, hi = xi[0], xi[-1]
    df = np.gradient(f, h)
    out = np.empty(omega.shape, dtype=f.dtype if np.iscomplexobj(f) else float)
    tw = np.full(xi.size, h)
    tw[0] = tw[-1] = 0.5 * h
    for k, w in enumerate(omega):
        fw = np.interp(w, xi, f.real) + (1j * np.interp(w, xi, f.imag) if np.iscomplexobj(f) else 0.0)
        den = xi * xi - w * w
        near = np.abs(xi - w) < 1e-9 * max(h, w)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = (f - fw) / den
        if np.any(near):
            dfw = np.interp(w, xi, df.real) + (1j * np.interp(w, xi, df.imag) if np.iscomplexobj(f) else 0.0)
            g[near] = dfw / (2.0 * w)
        val = np.sum(tw * g)
        # exact P int_lo^hi dxi/(xi^2-w^2)
        val += fw * (np.log(np.abs(hi - w) / (hi + w)) - np.log(np.abs(lo - w) / (lo + w))) / (2.0 * w)
        if upper_tail is not None:
            val += upper_tail(f[-1], hi, w)
        out[k] = val
    return out
