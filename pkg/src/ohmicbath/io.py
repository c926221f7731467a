"""File formats: CSV tables, JSON reports and small SVG plots.

Every writer is deterministic: floats are written with 17 significant
digits, JSON keys are sorted, and the SVG carries no timestamp.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Trajectory
from .coupling import TabulatedCoupling

__all__ = [
    "write_trajectory_csv",
    "read_trajectory_csv",
    "load_tabulated_coupling",
    "write_table_csv",
    "write_coefficients_csv",
    "to_jsonable",
    "write_json",
    "svg_lines",
    "svg_heatmap",
]


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_table_csv(path, header: Sequence[str], columns: Iterable[np.ndarray]) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Columns t, q, qdot, then x@<omega> for each recorded reservoir mode."""
    keys = sorted(traj.x)
    header = ["t", "q", "qdot"] + [f"x@{_fmt(k)}" for k in keys]
    write_table_csv(path, header, [traj.t, traj.q, traj.qdot] + [traj.x[k] for k in keys])


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    if header[:3] != ["t", "q", "qdot"]:
        raise ValueError(f"{path}: expected columns t,q,qdot, got {header[:3]}")
    x = {float(h[2:]): data[:, i] for i, h in enumerate(header) if h.startswith("x@")}
    return Trajectory(data[:, 0], data[:, 1], data[:, 2], x)


def load_tabulated_coupling(path) -> TabulatedCoupling:
    """Read an ``omega,alpha`` CSV (header optional, '#' comments allowed)."""
    omega, vals = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                w, a = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header
                raise ValueError(f"{path}:{lineno}: expected two numbers") from None
            omega.append(w)
            vals.append(a)
    return TabulatedCoupling(np.array(omega), np.array(vals))


def write_coefficients_csv(path, ec) -> None:
    """Dump omega, Re f_q, Im f_q, h_X, Re G, Im G of eigenmode coefficients."""
    f = ec.f_q
    write_table_csv(path, ["omega", "Re_fq", "Im_fq", "hX", "Re_G", "Im_G"],
                    [ec.grid.nodes, f.real, f.imag, np.abs(ec.h_X), ec.G.real, ec.G.imag])


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, enums, tuples and NamedTuples."""
    if hasattr(obj, "_asdict"):
        return {k: to_jsonable(v) for k, v in obj._asdict().items()}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enum
        return obj.name
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# SVG

_W, _H, _PAD = 640, 400, 48


def _scale(lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return lambda v: a + (np.asarray(v) - lo) / span * (b - a)


def svg_lines(path, series: Mapping[str, tuple], title: str = "", xlabel: str = "",
              ylabel: str = "") -> None:
    """Polyline plot of ``{label: (x, y)}``."""
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    sx = _scale(xs.min(), xs.max(), _PAD, _W - _PAD)
    sy = _scale(ys.min(), ys.max(), _H - _PAD, _PAD)
    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" '
           'fill="none" stroke="black"/>']
    for i, (label, (x, y)) in enumerate(series.items()):
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(sx(x), sy(y)))
        col = colours[i % len(colours)]
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{_W - _PAD - 4}" y="{_PAD + 16 * (i + 1)}" text-anchor="end" '
                   f'font-size="12" fill="{col}">{label}</text>')
    out += _labels(title, xlabel, ylabel, xs, ys)
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def svg_heatmap(path, x, y, z, title: str = "", xlabel: str = "", ylabel: str = "",
                max_cells: int = 120) -> None:
    """Raster of ``z[i, j]`` over rows ``y[i]`` and columns ``x[j]`` (blue-white-red)."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    si = max(1, y.size // max_cells)
    sj = max(1, x.size // max_cells)
    x, y, z = x[::sj], y[::si], z[::si, ::sj]
    zmax = float(np.max(np.abs(z))) or 1.0
    cw = (_W - 2 * _PAD) / x.size
    ch = (_H - 2 * _PAD) / y.size
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
           '<rect width="100%" height="100%" fill="white"/>']
    for i in range(y.size):
        top = _H - _PAD - (i + 1) * ch
        for j in range(x.size):
            v = z[i, j] / zmax
            r, g, b = (255, int(255 * (1 - v)), int(255 * (1 - v))) if v >= 0 else \
                (int(255 * (1 + v)), int(255 * (1 + v)), 255)
            out.append(f'<rect x="{_PAD + j * cw:.2f}" y="{top:.2f}" width="{cw + 0.05:.2f}" '
                       f'height="{ch + 0.05:.2f}" fill="#{r:02x}{g:02x}{b:02x}"/>')
    out += _labels(title, xlabel, ylabel, x, y)
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def _labels(title, xlabel, ylabel, xs, ys):
    return [
        f'<text x="{_W / 2}" y="{_PAD / 2}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="14" y="{_H / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {_H / 2})">{ylabel}</text>',
        f'<text x="{_PAD}" y="{_H - _PAD + 14}" font-size="10">{np.min(xs):.3g}</text>',
        f'<text x="{_W - _PAD}" y="{_H - _PAD + 14}" text-anchor="end" font-size="10">{np.max(xs):.3g}</text>',
        f'<text x="{_PAD - 4}" y="{_H - _PAD}" text-anchor="end" font-size="10">{np.min(ys):.3g}</text>',
        f'<text x="{_PAD - 4}" y="{_PAD + 8}" text-anchor="end" font-size="10">{np.max(ys):.3g}</text>',
    ]
