"""Scenario runner: ``quadprop <command> [options]``.

Commands write one data file each (``--out``), prefixed by a header block that
records the configuration, tolerances and the EMP invariant checks.

Exit codes: 0 success, 1 bad input or pipeline failure, 2 invariant violation
(the file is still written, with a warning in its header).
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classical import bargmann_lift, locate_caustics, niederer_forward, trajectory
from .emp import BOUNDARY_GUARD, EmpError, EmpSolution, invariant_report, solve_emp
from .integrators import DEFAULT_ATOL, DEFAULT_RTOL, IntegrationError
from .profiles import ProfileError, SystemProfile, parse_profile_block
from .propagator import CausticError, GridResolutionError, evolve_wavepacket, gaussian_packet, general_propagator
from .propagator import probability_density
from .serialize import write_chart, write_emp_table, write_packet, write_table

COMMANDS = ("emp", "caustics", "density", "phase", "trajectory", "evolve")

EXIT_OK, EXIT_ERROR, EXIT_INVARIANT = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    """Everything a run depends on. ``omega_bar=None`` selects it automatically."""

    kind: str = "constant"
    params: dict = field(default_factory=lambda: {"omega0": 1.0})
    omega_bar: float | None = None
    hbar: float = 1.0
    t_min: float = 0.0
    t_max: float = 10.0
    grid: int = 1001
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    root_tol: float = 1e-13
    rho0: float | None = None
    rho_dot0: float | None = None
    out: str | None = None
    format: str = "csv"

    def validate(self):
        if not self.t_max > self.t_min:
            raise ConfigError("t_span must be nonempty (t_max > t_min)")
        if self.grid < 2:
            raise ConfigError("grid density must be >= 2")
        for name in ("rtol", "atol", "root_tol", "hbar"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.omega_bar is not None and self.omega_bar <= 0:
            raise ConfigError("omega_bar must be > 0")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")

    def profile(self) -> SystemProfile:
        return parse_profile_block({"kind": self.kind, **self.params})

    def emp_start(self, p: SystemProfile) -> tuple[float, float, float]:
        """``(omega_bar, rho0, rho_dot0)``.

        Constant-frequency profiles default to ``omega_bar^2 = omega0^2 - lambda0^2/4``
        with ``rho = exp(-lambda0 t/2)``, which makes the fake time equal to ``t``.
        Anything else starts from ``omega_bar = 1``, ``rho = 1``, ``rho' = 0``.
        """
        wb, rho0, rd0 = 1.0, 1.0, 0.0
        if p.kind in ("constant", "caldirola_kanai"):
            l0 = p.params.get("lambda0", 0.0)
            shifted = p.params["omega0"] ** 2 - 0.25 * l0**2
            if shifted > 0:
                wb = float(np.sqrt(shifted))
                rho0, rd0 = float(np.exp(-0.5 * l0 * self.t_min)), -0.5 * l0 * float(np.exp(-0.5 * l0 * self.t_min))
        if self.omega_bar is not None:
            wb = self.omega_bar
        return wb, rho0 if self.rho0 is None else self.rho0, rd0 if self.rho_dot0 is None else self.rho_dot0

    def meta(self, command: str) -> dict:
        d = asdict(self)
        d.pop("out")
        return {"quadprop": __version__, "command": command, **{k: v for k, v in d.items() if k != "params"},
                "params": dict(sorted(self.params.items()))}


_SCALAR_KEYS = {
    "omega_bar": float, "hbar": float, "t_min": float, "t_max": float, "grid": int, "rtol": float, "atol": float,
    "root_tol": float, "rho0": float, "rho_dot0": float, "out": str, "format": str,
}
# per-command keys accepted in config files
_EXTRA_KEYS = {"a": float, "b": float, "center": float, "width": float, "momentum": float, "t2": float,
               "x_max": float, "n_x": int}


def read_config(path: str | Path) -> dict:
    """Flat ``key = value`` file; ``param.NAME = value`` sets profile parameters."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[scenario]\n" + Path(path).read_text(encoding="utf-8"))
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out: dict = {"params": {}}
    for key, raw in parser["scenario"].items():
        key = key.replace("-", "_")
        if key.startswith("param."):
            out["params"][key[6:]] = _number(raw, key)
        elif key == "profile":
            out["kind"] = raw.strip()
        elif key in _SCALAR_KEYS or key in _EXTRA_KEYS:
            conv = _SCALAR_KEYS.get(key) or _EXTRA_KEYS[key]
            out[key] = raw.strip() if conv is str else conv(_number(raw, key))
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return out


def _number(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw!r}") from None


def _param(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{key}: not a number: {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("scenario")
    g.add_argument("--config", help="flat key = value file; command-line flags override it")
    g.add_argument("--profile", dest="kind", choices=("constant", "caldirola_kanai", "mathieu"))
    g.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VAL",
                   help="profile parameter (repeatable), e.g. omega0=2 or a=2")
    g.add_argument("--omega-bar", type=float, help="EMP frequency (default: automatic)")
    g.add_argument("--hbar", type=float)
    g.add_argument("--t-min", type=float)
    g.add_argument("--t-max", type=float)
    g.add_argument("--grid", type=int, help="number of output time samples")
    g.add_argument("--rtol", type=float)
    g.add_argument("--atol", type=float)
    g.add_argument("--root-tol", type=float)
    g.add_argument("--rho0", type=float)
    g.add_argument("--rho-dot0", type=float)
    g.add_argument("--out", help="output file (default: <command>.<format>)")
    g.add_argument("--format", choices=("csv", "json"))

    ap = argparse.ArgumentParser(prog="quadprop", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("emp", parents=[common], help="rho/tau table with the omega_bar report")
    sub.add_parser("caustics", parents=[common], help="caustics t_l and boundaries r_k (JSON)")
    sub.add_parser("density", parents=[common], help="t-scan of |K(x,t|0,t0)|^2")
    ph = sub.add_parser("phase", parents=[common], help="phase factor along the path with slope a")
    ph.add_argument("--a", type=float)
    tr = sub.add_parser("trajectory", parents=[common], help="classical path, mapped coordinates and lift")
    tr.add_argument("--a", type=float)
    tr.add_argument("--b", type=float)
    ev = sub.add_parser("evolve", parents=[common], help="Gaussian packet evolved to t2")
    ev.add_argument("--center", type=float)
    ev.add_argument("--width", type=float)
    ev.add_argument("--momentum", type=float)
    ev.add_argument("--t2", type=float)
    ev.add_argument("--x-max", type=float)
    ev.add_argument("--n-x", type=int)
    return ap


def resolve(args: argparse.Namespace) -> tuple[ScenarioConfig, dict]:
    """Merge defaults, config file and flags (in increasing priority)."""
    values = read_config(args.config) if args.config else {"params": {}}
    params = values.pop("params")
    extra = {k: values.pop(k) for k in list(values) if k in _EXTRA_KEYS}
    ns = vars(args)
    for key in ("kind", *_SCALAR_KEYS):
        if ns.get(key) is not None:
            values[key] = ns[key]
    for key in _EXTRA_KEYS:
        if ns.get(key) is not None:
            extra[key] = ns[key]
    params.update(dict(ns.get("param") or []))
    if "kind" in values or params:
        values["params"] = params
    cfg = ScenarioConfig(**values)
    cfg.validate()
    return cfg, extra


def _solve(cfg: ScenarioConfig, t_end: float | None = None) -> tuple[EmpSolution, dict]:
    p = cfg.profile()
    wb, rho0, rd0 = cfg.emp_start(p)
    t_end = cfg.t_max if t_end is None else t_end
    sol = solve_emp(p, wb, (cfg.t_min, t_end), rho0=rho0, rho_dot0=rd0, rtol=cfg.rtol, atol=cfg.atol,
                    hbar=cfg.hbar, check=False)
    return sol, invariant_report(sol)


def _meta(cfg: ScenarioConfig, command: str, sol: EmpSolution, report: dict, **more) -> dict:
    meta = cfg.meta(command)
    meta["omega_bar_used"] = sol.omega_bar
    meta["invariants"] = {k: v for k, v in report.items()}
    if not report["ok"]:
        meta["WARNING"] = "EMP invariant check failed; data below are not trustworthy"
    meta.update(more)
    return meta


def _times(cfg: ScenarioConfig) -> np.ndarray:
    return np.linspace(cfg.t_min, cfg.t_max, cfg.grid)


def cmd_emp(cfg: ScenarioConfig, extra: dict, out: Path) -> dict:
    sol, report = _solve(cfg)
    write_emp_table(out, sol, _times(cfg), cfg.format, _meta(cfg, "emp", sol, report))
    return report


def cmd_caustics(cfg: ScenarioConfig, extra: dict, out: Path) -> dict:
    sol, report = _solve(cfg)
    chart = locate_caustics(sol, cfg.root_tol)
    write_chart(out, chart, _meta(cfg, "caustics", sol, report))
    return report


def cmd_density(cfg: ScenarioConfig, extra: dict, out: Path) -> dict:
    sol, report = _solve(cfg)
    t = _times(cfg)
    dens = np.atleast_1d(probability_density(sol, t))
    rows = [(ti, di, not np.isfinite(di)) for ti, di in zip(t, dens)]
    write_table(out, ("t", "density", "at_caustic"), rows, cfg.format, _meta(cfg, "density", sol, report))
    return report


def cmd_phase(cfg: ScenarioConfig, extra: dict, out: Path) -> dict:
    sol, report = _solve(cfg)
    a = extra.get("a", 1.0)
    rows = []
    for t in _times(cfg):
        x, _ = trajectory(sol, a, 0.0, t)
        v = general_propagator(sol, float(x), t, 0.0, sol.t0)
        p = complex(np.nan, np.nan) if v.at_caustic else v.amplitude / v.modulus
        rows.append((t, np.real(p), np.imag(p), v.maslov_index))
    write_table(out, ("t", "re_P", "im_P", "maslov_index"), rows, cfg.format,
                _meta(cfg, "phase", sol, report, a=a))
    return report


def cmd_trajectory(cfg: ScenarioConfig, extra: dict, out: Path) -> dict:
    sol, report = _solve(cfg)
    a, b = extra.get("a", 1.0), extra.get("b", 0.0)
    t = _times(cfg)
    x, xd = trajectory(sol, a, b, t)
    _, _, s = bargmann_lift(sol, a, b, 0.0, t)
    cos = np.cos(sol.omega_bar * sol.tau(t))
    ok = np.abs(cos) >= BOUNDARY_GUARD
    X = np.full_like(t, np.nan)
    T = np.full_like(t, np.nan)
    X[ok], T[ok] = niederer_forward(sol, x[ok], t[ok])
    write_table(out, ("t", "x", "x_dot", "X", "T", "s"), list(zip(t, x, xd, X, T, s)), cfg.format,
                _meta(cfg, "trajectory", sol, report, a=a, b=b, s0=0.0))
    return report


def cmd_evolve(cfg: ScenarioConfig, extra: dict, out: Path) -> dict:
    t2 = extra.get("t2", cfg.t_max)
    if not cfg.t_min < t2:
        raise ConfigError("t2 must exceed t_min")
    sol, report = _solve(cfg, max(cfg.t_max, t2))
    x_max, n_x = extra.get("x_max", 10.0), extra.get("n_x", 1024)
    if x_max <= 0 or n_x < 2:
        raise ConfigError("need x_max > 0 and n_x >= 2")
    grid = np.linspace(-x_max, x_max, n_x)
    packet = dict(center=extra.get("center", 0.0), width=extra.get("width", 1.0),
                  momentum=extra.get("momentum", 0.0))
    psi0 = gaussian_packet(grid, time=cfg.t_min, hbar=cfg.hbar, **packet)
    psi = evolve_wavepacket(sol, psi0, t2)
    n0, n1 = psi0.norm(), psi.norm()
    meta = _meta(cfg, "evolve", sol, report, t2=t2, x_max=x_max, n_x=n_x, **packet,
                 norm_initial=n0, norm_final=n1, norm_drift=abs(n1 - n0))
    write_packet(out.with_name(out.stem + "_initial" + out.suffix), psi0, cfg.format, meta)
    write_packet(out, psi, cfg.format, meta)
    print(f"norm: initial {n0:.12f}  evolved {n1:.12f}  drift {abs(n1 - n0):.3e}")
    return report


HANDLERS = {
    "emp": cmd_emp, "caustics": cmd_caustics, "density": cmd_density,
    "phase": cmd_phase, "trajectory": cmd_trajectory, "evolve": cmd_evolve,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2, which is reserved for invariant failures here
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        cfg, extra = resolve(args)
        fmt = "json" if args.command == "caustics" else cfg.format
        out = Path(cfg.out or f"{args.command}.{fmt}")
        report = HANDLERS[args.command](cfg, extra, out)
    except (ConfigError, ProfileError, EmpError, IntegrationError, CausticError, GridResolutionError,
            ValueError) as exc:
        print(f"quadprop {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"wrote {out}")
    if args.command == "emp":
        print(f"omega_bar^2 mean {report['omega_bar_sq_mean']:.12g}  "
              f"max rel dev {report['omega_bar_sq_max_rel_dev']:.3e}")
    if not report["ok"]:
        print(f"quadprop {args.command}: warning: EMP invariants violated: {report}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
