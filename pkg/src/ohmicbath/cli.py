"""Command-line driver: ``ohmicbath {figure1,verify,thermal,oracle-compare,coefficients}``.

Settings come from built-in defaults, then an optional ``key=value`` config
file (``--config``), then command-line flags. Exit codes: 0 success,
1 a check failed, 2 bad configuration, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import integrate

from . import analytic, oracle, quantization, thermal
from .core import OscillatorParams, SpectralGrid, classify_regime
from .coupling import (
    OhmicCoupling,
    Susceptibility,
    Verdict,
    diagonalizability,
    kramers_kronig_check,
    susceptibility,
    zero_mode_condition,
)
from .io import svg_heatmap, svg_lines, write_coefficients_csv, write_json, write_table_csv

log = logging.getLogger("ohmicbath")

COMMANDS = ("figure1", "verify", "thermal", "oracle-compare", "coefficients")
FORMATS = {"csv", "json", "svg"}

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    omega0: float = 3.0
    gamma: float = 1.0
    b: float = 1.0
    strength: float = 1.0
    temperature: float = 0.0
    eta: float = 1e-3
    omega_max: Optional[float] = None
    n_modes: Optional[int] = None
    dt: float = 5e-4
    t_span: Optional[tuple] = None
    seed: int = 0
    out: str = "."
    format: frozenset = frozenset(FORMATS)

    @property
    def params(self) -> OscillatorParams:
        return OscillatorParams(self.omega0, self.gamma)

    @property
    def coupling(self) -> OhmicCoupling:
        return OhmicCoupling(self.params, self.strength)

    def wants(self, fmt: str) -> bool:
        return fmt in self.format


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _convert(name: str, raw):
    try:
        if name in ("n_modes", "seed"):
            v = int(raw)
            if float(raw) != v:
                raise ValueError
            return v
        if name == "t_span":
            parts = raw if isinstance(raw, (list, tuple)) else str(raw).replace(",", " ").split()
            lo, hi = (float(x) for x in parts)
            return (lo, hi)
        if name == "format":
            items = raw if isinstance(raw, (list, tuple, frozenset, set)) else str(raw).split(",")
            return frozenset(s.strip() for s in items if s.strip())
        if name == "out":
            return str(raw)
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None


def read_config_file(path) -> dict:
    """``key=value`` lines; '#' starts a comment; keys may use '-' or '_'."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "command" or key not in _FIELDS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def validate(cfg: RunConfig) -> RunConfig:
    def need(ok, name, what):
        if not ok:
            raise ConfigError(f"{name}: {what}")

    finite = np.isfinite
    need(cfg.command in COMMANDS, "command", f"must be one of {', '.join(COMMANDS)}")
    need(finite(cfg.omega0) and cfg.omega0 > 0, "omega0", "must be > 0")
    need(finite(cfg.gamma) and cfg.gamma >= 0, "gamma", "must be >= 0")
    need(finite(cfg.b), "b", "must be finite")
    need(finite(cfg.strength) and cfg.strength >= 0, "strength", "must be >= 0")
    need(finite(cfg.temperature) and cfg.temperature >= 0, "temperature", "must be >= 0")
    need(finite(cfg.eta) and cfg.eta > 0, "eta", "must be > 0")
    need(cfg.omega_max is None or (finite(cfg.omega_max) and cfg.omega_max > 0), "omega_max", "must be > 0")
    need(cfg.n_modes is None or cfg.n_modes >= 2, "n_modes", "must be >= 2")
    need(finite(cfg.dt) and cfg.dt > 0, "dt", "must be > 0")
    need(cfg.t_span is None or (all(finite(cfg.t_span)) and cfg.t_span[0] < cfg.t_span[1]),
         "t_span", "needs two finite values lo < hi")
    need(cfg.format and cfg.format <= FORMATS, "format", "must be a subset of csv,json,svg")
    return cfg


def build_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for name in _FIELDS:
        v = getattr(args, name, None)
        if v is not None and name != "command":
            values[name] = v
    kw = {k: _convert(k, v) for k, v in values.items()}
    return validate(RunConfig(command=args.command, **kw))


# --------------------------------------------------------------------------
# commands


def _out_dir(cfg: RunConfig) -> Path:
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _params_dict(cfg):
    return {"omega0": cfg.omega0, "gamma": cfg.gamma, "strength": cfg.strength}


def cmd_figure1(cfg: RunConfig) -> int:
    p = cfg.params
    lo, hi = cfg.t_span or (-10.0, 10.0)
    t = np.linspace(lo, hi, 401)
    q, qdot, _ = analytic.q_homogeneous_derivatives(p, cfg.b, t)
    omega = np.linspace(0.0, cfg.omega_max or 10.0, 201)[1:]
    if p.gamma > 0:
        x = analytic.x_reservoir_homogeneous(p, cfg.b, omega[:, None], t[None, :])
    else:
        x = np.zeros((omega.size, t.size))
    d = _out_dir(cfg)
    if cfg.wants("csv"):
        write_table_csv(d / "qt.csv", ["t", "q", "qdot"], [t, q, qdot])
        ww, tt = np.meshgrid(omega, t, indexing="ij")
        write_table_csv(d / "xomega.csv", ["omega", "t", "x"], [ww.ravel(), tt.ravel(), x.ravel()])
    if cfg.wants("svg"):
        svg_heatmap(d / "figure1.svg", t, omega, x, title="reservoir X_omega(t)",
                    xlabel="t", ylabel="omega")
        svg_lines(d / "qt.svg", {"q(t)": (t, q)}, title="oscillator q(t)", xlabel="t", ylabel="q")
    if cfg.wants("json"):
        row = int(np.argmax(np.abs(x[:, -1])))
        write_json(d / "figure1.json", {
            "params": _params_dict(cfg), "b": cfg.b, "regime": classify_regime(p),
            "q_at_zero": float(analytic.q_homogeneous(p, cfg.b, 0.0)),
            "late_time_peak_omega": float(omega[row]),
        })
    return EXIT_OK


def _check(name, value, threshold, extra=None):
    entry = {"value": float(value), "threshold": float(threshold), "pass": bool(value <= threshold)}
    if extra:
        entry.update(extra)
    return name, entry


def verification_checks(cfg: RunConfig) -> dict:
    """Residual checks on the configured parameters; failures are data, not exceptions."""
    p, c = cfg.params, cfg.coupling
    checks = {}

    def add(item):
        checks[item[0]] = item[1]

    t = np.linspace(0.0, 5.0, 51)
    sol = integrate.solve_ivp(lambda _, y: [y[1], -p.gamma * y[1] - p.omega0**2 * y[0]],
                              (0.0, 5.0), [cfg.b, 0.0], t_eval=t, method="DOP853",
                              rtol=1e-12, atol=1e-14)
    add(_check("ode_equivalence", np.max(np.abs(sol.y[0] - analytic.q_homogeneous(p, cfg.b, t))), 1e-8))

    if p.gamma == 0:
        checks["decoupled"] = {"value": 0.0, "threshold": 0.0, "pass": True,
                               "note": "gamma = 0: coupling vanishes, reservoir checks skipped"}
        zm = zero_mode_condition(c, p)
        checks["zero_mode_condition"] = {"integral": float(zm.integral), "satisfied": bool(zm.satisfied),
                                         "pass": True, "informational": True}
        return checks

    qf = lambda s: analytic.q_homogeneous(p, cfg.b, s)  # noqa: E731
    qdd = lambda s: analytic.q_homogeneous_derivatives(p, cfg.b, s)[2]  # noqa: E731
    tm = np.linspace(-5.0, 5.0, 11)
    add(_check("memory_kernel", np.max(np.abs(analytic.memory_residual(p, qf, qdd, tm))),
               1e-7 * p.omega0**2))
    taus = np.array([-0.5, 0.3, 1.0])
    add(_check("green_retarded", np.max(np.abs(analytic.retarded_residual(p, taus))), 1e-6))
    add(_check("green_two_sided", max(float(np.max(np.abs(analytic.two_sided_residual(p, t0, taus))))
                                      for t0 in (-0.7, 0.0, 0.7)), 1e-6))

    w = np.geomspace(0.01 * p.gamma, 50 * p.gamma, 25)
    err = np.max(np.abs(susceptibility(c, p, w, "quad") - susceptibility(c, p, w, "closed")))
    add(_check("susceptibility", err, 1e-6))
    grid = SpectralGrid.midpoint(100.0 * p.gamma, 4000)
    kk = kramers_kronig_check(Susceptibility.sample(c, p, grid.nodes), grid)
    add(_check("kramers_kronig", kk.max_abs_error, 1e-3))

    diag = diagonalizability(c, p)
    checks["diagonalizability"] = {"verdict": diag.verdict.name, "integral": float(diag.integral),
                                   "pass": diag.verdict is not Verdict.FAILS}
    if diag.verdict is not Verdict.FAILS:
        ec = quantization.build_coefficients(c, p)
        rep = quantization.verify_commutators(ec, seed=cfg.seed)
        add(_check("normalization", abs(rep.norm_integral - 1.0), 1e-4,
                   {"norm_integral": rep.norm_integral}))
    zm = zero_mode_condition(c, p)
    checks["zero_mode_condition"] = {"integral": float(zm.integral), "satisfied": bool(zm.satisfied),
                                     "pass": True, "informational": True}
    return checks


def cmd_verify(cfg: RunConfig) -> int:
    checks = verification_checks(cfg)
    ok = all(v["pass"] for v in checks.values())
    for name, v in checks.items():
        log.info("%-22s %s", name, "pass" if v["pass"] else "FAIL")
    d = _out_dir(cfg)
    write_json(d / "verification.json", {"params": _params_dict(cfg), "checks": checks, "pass": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_thermal(cfg: RunConfig) -> int:
    p, c = cfg.params, cfg.coupling
    tp = thermal.ThermalParams(cfg.temperature, cfg.eta)
    q2 = thermal.position_correlation(p, c, tp)
    report = {
        "params": _params_dict(cfg), "T": cfg.temperature, "eta": cfg.eta,
        "q2": q2._asdict(),
        "p2": thermal.momentum_correlation(p, c, tp),
        "energy": thermal.thermal_energy(p, c, tp),
        "weak_damping_energy": thermal.free_energy_limit(p, cfg.temperature),
        "grid": {"method": "adaptive quadrature", "eta_fit": [cfg.eta, cfg.eta / 2, cfg.eta / 4]},
    }
    write_json(_out_dir(cfg) / "thermal.json", report)
    return EXIT_OK


def cmd_oracle_compare(cfg: RunConfig) -> int:
    p, c = cfg.params, cfg.coupling
    lo, hi = cfg.t_span or (0.0, 5.0)
    if lo != 0.0:
        raise ConfigError("t_span: oracle runs start at t = 0")
    n = cfg.n_modes or 4000
    grid = SpectralGrid.midpoint(cfg.omega_max or 100.0, n)
    bath = oracle.build_bath(c, grid)
    stride = max(1, int(round(0.01 / cfg.dt)))
    run = oracle.integrate(bath, p, (0.0, hi), cfg.dt, q0=cfg.b, stride=stride)
    traj = run.trajectory
    ref = analytic.q_homogeneous(p, cfg.b, traj.t)
    err = float(np.max(np.abs(traj.q - ref)))
    ok = err <= 1e-2
    d = _out_dir(cfg)
    if cfg.wants("csv"):
        write_table_csv(d / "oracle.csv", ["t", "q_oracle", "q_analytic"], [traj.t, traj.q, ref])
    if cfg.wants("svg"):
        svg_lines(d / "oracle.svg", {"oracle": (traj.t, traj.q), "analytic": (traj.t, ref)},
                  title="discrete bath vs continuum", xlabel="t", ylabel="q")
    write_json(d / "oracle.json", {
        "params": _params_dict(cfg), "n_modes": n, "omega_max": grid.upper_edge, "dt": cfg.dt,
        "max_abs_error": err, "threshold": 1e-2, "energy_drift": run.max_energy_drift, "pass": ok,
    })
    return EXIT_OK if ok else EXIT_FAIL


def cmd_coefficients(cfg: RunConfig) -> int:
    p, c = cfg.params, cfg.coupling
    grid = None
    if cfg.omega_max or cfg.n_modes:
        n = cfg.n_modes or 40001
        grid = quantization.default_grid(p, cfg.omega_max, n + (1 - n % 2))
    ec = quantization.build_coefficients(c, p, grid)
    rep = quantization.verify_commutators(ec, seed=cfg.seed)
    ok = abs(rep.norm_integral - 1.0) <= 1e-4
    d = _out_dir(cfg)
    if cfg.wants("csv"):
        write_coefficients_csv(d / "coefficients.csv", ec)
    write_json(d / "coefficients.json", {
        "params": _params_dict(cfg), "verdict": ec.verdict, "n_nodes": len(ec.grid),
        "omega_max": ec.grid.omega_max, "norm_integral": rep.norm_integral,
        "delta_residual": rep.delta_residual, "pass": ok,
    })
    return EXIT_OK if ok else EXIT_FAIL


HANDLERS = {
    "figure1": cmd_figure1,
    "verify": cmd_verify,
    "thermal": cmd_thermal,
    "oracle-compare": cmd_oracle_compare,
    "coefficients": cmd_coefficients,
}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ohmicbath", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key=value settings file (flags take precedence)")
    num = [("--omega0", "omega0"), ("--gamma", "gamma"), ("--b", "b"), ("--strength", "strength"),
           ("--temperature", "temperature"), ("--eta", "eta"), ("--omega-max", "omega_max"),
           ("--dt", "dt")]
    for flag, dest in num:
        ap.add_argument(flag, dest=dest)
    ap.add_argument("--n-modes", dest="n_modes")
    ap.add_argument("--t-span", dest="t_span", nargs=2, metavar=("LO", "HI"))
    ap.add_argument("--seed")
    ap.add_argument("--out")
    ap.add_argument("--format", help="comma-separated subset of csv,json,svg")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"ohmicbath: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ohmicbath: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
