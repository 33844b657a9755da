"""Command-line front end.

Usage::

    nfpe --config run.yaml --command evolve-fd --out results/ \\
         --override model.epsilon=0.01

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import csv
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import yaml
from scipy.interpolate import CubicSpline

from .errors import NfpeError, NumericalError, ParameterError
from .exact import ExactKernelParams, evolve_const_diffusion, evolve_quadratic, \
    solvable_configuration
from .grid import DensityGrid
from .model import SELF_CONSISTENT, CoefficientSet, ModelParams, exp_decay
from .moments import moment_ode_solve
from .reference import FdConfig, fd_solve, grid_metrics, max_diffusion
from .transform import TransformContext, x_of_y, y_of_x
from . import semiclassical as sc

logger = logging.getLogger("nfpe")

SCHEMA_VERSION = "1"
COMMANDS = ("moment", "evolve-const", "evolve-exact", "evolve-semiclassical", "evolve-fd",
            "compare", "residual")
SOLVERS = {"const": "evolve-const", "exact": "evolve-exact",
           "semiclassical": "evolve-semiclassical", "fd": "evolve-fd"}


class ConfigError(ParameterError):
    """Invalid configuration; the message starts with the offending dot path."""


# --------------------------------------------------------------------------
# configuration access

def _get(block, key, path, default=..., kind=None):
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected a mapping")
    if key not in block or block[key] is None:
        if default is ...:
            raise ConfigError(f"{path}.{key}: missing required field")
        return default
    value = block[key]
    if kind is float:
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}.{key}: expected a number, got {value!r}") from None
        if not math.isfinite(value):
            raise ConfigError(f"{path}.{key}: must be finite")
    elif kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
        value = int(value)
    elif kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {value!r}")
    return value


def apply_override(config: dict, item: str) -> None:
    """Set a dot-path ``key=value``; the value is parsed as YAML."""
    if "=" not in item:
        raise ConfigError(f"override {item!r}: expected key=value")
    key, raw = item.split("=", 1)
    parts = key.strip().split(".")
    if not all(parts):
        raise ConfigError(f"override {item!r}: empty path component")
    node = config
    for part in parts[:-1]:
        child = node.get(part)
        if child is None:
            child = node[part] = {}
        if not isinstance(child, dict):
            raise ConfigError(f"override {key}: {part} is not a mapping")
        node = child
    node[parts[-1]] = yaml.safe_load(raw)


def load_config(path, overrides=()):
    try:
        with open(path, encoding="utf-8") as fh:
            config = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: not valid YAML ({exc})") from None
    if not isinstance(config, dict):
        raise ConfigError("config: top level must be a mapping")
    config = copy.deepcopy(config)
    for item in overrides:
        apply_override(config, item)
    version = str(_get(config, "schema", "config"))
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config.schema: unsupported version {version!r}")
    config["_base"] = os.path.dirname(os.path.abspath(path))
    return config


def _read_table(path, base, where):
    full = path if os.path.isabs(path) else os.path.join(base, path)
    try:
        data = np.loadtxt(full, delimiter=",", skiprows=1, ndmin=2)
    except OSError:
        raise ConfigError(f"{where}.path: file {path!r} not found") from None
    except ValueError as exc:
        raise ConfigError(f"{where}.path: cannot parse {path!r} ({exc})") from None
    if data.shape[1] < 2 or data.shape[0] < 4:
        raise ConfigError(f"{where}.path: need two columns and at least 4 rows")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise ConfigError(f"{where}.path: first column must be strictly increasing")
    return data[:, 0], data[:, 1]


def _time_function(entry, where, base):
    """``(fn, derivative)`` for a {const | exp-decay | table} block."""
    if not isinstance(entry, dict):
        try:
            return None, float(entry)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: expected a number or a typed block, got {entry!r}") \
                from None
    kind = _get(entry, "type", where, kind=str)
    if kind == "const":
        return None, _get(entry, "value", where, kind=float)
    if kind == "exp-decay":
        return exp_decay(_get(entry, "amplitude", where, kind=float),
                         _get(entry, "rate", where, kind=float),
                         _get(entry, "t0", where, 0.0, kind=float)), None
    if kind == "table":
        t, v = _read_table(_get(entry, "path", where, kind=str), base, where)
        spline = CubicSpline(t, v)
        lo, hi = t[0], t[-1]

        def fn(x, spline=spline):
            return spline(np.clip(x, lo, hi))

        def dfn(x, d=spline.derivative()):
            return d(np.clip(x, lo, hi))
        return (fn, dfn), None
    raise ConfigError(f"{where}.type: unknown kind {kind!r} (const, exp-decay, table)")


def build_params(config) -> ModelParams:
    block = _get(config, "model", "config")
    values = {"alpha": _get(block, "alpha", "model", kind=float)}
    for key, default in (("kappa", 0.0), ("a", 0.0), ("epsilon", 1.0), ("s", 0.0)):
        values[key] = _get(block, key, "model", default, kind=float)
    try:
        return ModelParams(**values)
    except ParameterError as exc:
        raise ConfigError(f"model: {exc}") from None


def build_coefficients(config) -> CoefficientSet:
    block = _get(config, "coefficients", "config", {})
    base = config["_base"]
    parts = {}
    for name in ("f", "g"):
        pair, const = _time_function(_get(block, name, "coefficients", 0.0 if name == "g" else 1.0),
                                     f"coefficients.{name}", base)
        parts[name] = (const, None) if pair is None else pair
    beta_entry = _get(block, "beta", "coefficients", 0.0)
    if isinstance(beta_entry, dict) and beta_entry.get("type") == SELF_CONSISTENT:
        beta = SELF_CONSISTENT
    elif beta_entry == SELF_CONSISTENT:
        beta = SELF_CONSISTENT
    else:
        pair, const = _time_function(beta_entry, "coefficients.beta", base)
        beta = const if pair is None else pair[0]
    (f, f_dot), (g, g_dot) = parts["f"], parts["g"]
    try:
        return CoefficientSet.from_functions(f, g, beta, f_dot=f_dot, g_dot=g_dot)
    except ParameterError as exc:
        raise ConfigError(f"coefficients: {exc}") from None


# --------------------------------------------------------------------------
# run context

@dataclass
class Run:
    config: dict
    params: ModelParams
    coeffs: CoefficientSet
    tau_end: float
    times: list
    x: np.ndarray
    initial: DensityGrid
    profile: Optional[Callable]
    X_gamma: float
    Y_s: Optional[float] = None
    xi_profile: Optional[Callable] = None
    kernel: Optional[ExactKernelParams] = None
    kernel_coeffs: Optional[CoefficientSet] = None

    @property
    def solver(self):
        return self.config.get("solver") or {}

    def sub(self, key):
        return self.solver.get(key) or {}


def _initial_entry(config):
    block = _get(config, "initial", "config")
    kinds = [k for k in ("gaussian", "table", "pullback") if k in block]
    if len(kinds) != 1:
        raise ConfigError("initial: exactly one of gaussian, table, pullback is required")
    return kinds[0], block[kinds[0]]


def _pullback_center(params, coeffs, Y_s, variance):
    ctx = TransformContext(params, coeffs)
    x_c = float(x_of_y(ctx, Y_s, params.s))
    f, g = ctx.fg(params.s)
    sd = math.sqrt(params.epsilon * variance * (f + (params.a * x_c + g) ** 2))
    return ctx, x_c, sd


def build_run(config, command) -> Run:
    params = build_params(config)
    coeffs = build_coefficients(config)
    solver = _get(config, "solver", "config", {})
    tau_end = _get(solver, "tau_end", "solver", 1.0, kind=float)
    if not tau_end > params.s:
        raise ConfigError("solver.tau_end: must be after model.s")
    times = [float(t) for t in _get(solver, "times", "solver", [tau_end], kind=list)]
    if any(not params.s <= t <= tau_end for t in times):
        raise ConfigError("solver.times: every output time must lie in [model.s, solver.tau_end]")
    kind, entry = _initial_entry(config)
    Y_s = xi_profile = None
    if kind == "gaussian":
        mean = _get(entry, "mean", "initial.gaussian", kind=float)
        var = _get(entry, "var", "initial.gaussian", kind=float)
        if not var > 0:
            raise ConfigError("initial.gaussian.var: must be > 0")
        center, sd = mean, math.sqrt(var)

        def profile(x, mean=mean, var=var):
            return np.exp(-0.5 * (x - mean) ** 2 / var) / math.sqrt(2 * math.pi * var)
        X_gamma = mean
    elif kind == "pullback":
        profile = None
        if params.a == 0:
            raise ConfigError("initial.pullback: needs model.a != 0")
        Y_s = _get(entry, "Y_s", "initial.pullback", kind=float)
        var = _get(entry, "var", "initial.pullback", 1.0, kind=float)
        if not var > 0:
            raise ConfigError("initial.pullback.var: must be > 0")
        ctx, center, sd = _pullback_center(params, coeffs.with_beta(0.0), Y_s, var)
        X_gamma = None
    else:
        xt, ut = _read_table(_get(entry, "path", "initial.table", kind=str), config["_base"],
                             "initial.table")
        table = DensityGrid(float(xt[0]), float(xt[1] - xt[0]), ut)
        if np.max(np.abs(np.diff(xt) - table.dx)) > 1e-9 * max(1.0, table.dx):
            raise ConfigError("initial.table.path: x column must be uniformly spaced")
        center, sd = table.mean(), math.sqrt(table.variance())
        profile = table.interpolator()
        X_gamma = table.mean()

    grid = solver.get("grid") or {}
    width = _get(grid, "width", "solver.grid", 10.0, kind=float)
    nx = _get(grid, "nx", "solver.grid", 2001, kind=int)
    x_min = _get(grid, "x_min", "solver.grid", center - width * sd, kind=float)
    x_max = _get(grid, "x_max", "solver.grid", center + width * sd, kind=float)
    if not x_min < x_max or nx < 3:
        raise ConfigError("solver.grid: need x_min < x_max and nx >= 3")
    x = np.linspace(x_min, x_max, nx)

    if kind == "pullback":
        gam = lambda z, var=var: np.exp(-0.5 * z * z / var) / math.sqrt(2 * math.pi * var)
        initial, scale = sc.pullback_initial_density(ctx, Y_s, gam, x)
        xi_profile = lambda z, c=scale, gam=gam: c * gam(z)
        X_gamma = initial.mean()
    else:
        initial = DensityGrid(float(x[0]), float(x[1] - x[0]), profile(x), params.s)
    kernel = kernel_coeffs = None
    block = (config.get("coefficients") or {}).get("solvable")
    if block is not None:
        if any(k in config["coefficients"] for k in ("f", "g")):
            raise ConfigError("coefficients.solvable: f and g follow from the solvable family; "
                              "remove coefficients.f and coefficients.g")
        if params.a == 0:
            raise ConfigError("coefficients.solvable: needs model.a != 0")
        kernel, kernel_coeffs = solvable_configuration(
            params, _get(block, "f_s", "coefficients.solvable", kind=float),
            _get(block, "g_s", "coefficients.solvable", kind=float), X_gamma)
        coeffs = kernel_coeffs.with_beta(SELF_CONSISTENT)
    return Run(config, params, coeffs, tau_end, times, x, initial, profile, X_gamma,
               Y_s, xi_profile, kernel, kernel_coeffs)


def resolved_coefficients(run: Run, epsilon=None, tau_end=None) -> CoefficientSet:
    """Coefficients with a self-consistent beta replaced by the moment trajectory."""
    if not run.coeffs.self_consistent:
        return run.coeffs
    params = run.params if epsilon is None else run.params.with_(epsilon=epsilon)
    n = _get(run.sub("moment"), "n_steps", "solver.moment", 400, kind=int)
    grid = np.linspace(params.s, run.tau_end if tau_end is None else tau_end, n + 1)
    return run.coeffs.with_beta(moment_ode_solve(params, run.coeffs, run.X_gamma, grid))


# --------------------------------------------------------------------------
# solvers

def solve_const(run: Run):
    p, c = run.params, run.coeffs
    if p.a != 0:
        raise ConfigError("model.a: evolve-const needs a = 0")
    ts = np.linspace(p.s, run.tau_end, 11)
    f = np.broadcast_to(np.asarray(c.f(ts), float), ts.shape)
    g = np.broadcast_to(np.asarray(c.g(ts), float), ts.shape)
    if np.ptp(f) > 0 or np.ptp(g) > 0:
        raise ConfigError("coefficients: evolve-const needs constant f and g")
    f0, g0 = float(f[0]), float(g[0])
    if not c.self_consistent:
        raise ConfigError("coefficients.beta: evolve-const needs a self-consistent beta")
    eff = p.with_(epsilon=p.epsilon * (f0 + g0 * g0))
    return [evolve_const_diffusion(eff, run.initial, t, profile=run.profile,
                                   X_gamma=run.X_gamma) for t in run.times]


def solve_exact(run: Run):
    p = run.params
    if run.kernel is not None:
        kernel, coeffs = run.kernel, run.kernel_coeffs
    else:
        coeffs = resolved_coefficients(run)
        kernel = ExactKernelParams(p, float(coeffs.f(p.s)), float(coeffs.g(p.s)),
                                   beta=coeffs.beta)
    return [evolve_quadratic(kernel, run.initial, t, coeffs=coeffs, profile=run.profile)
            for t in run.times]


def _semiclassical_state(run: Run, epsilon=None, tau_end=None):
    p = run.params if epsilon is None else run.params.with_(epsilon=epsilon)
    block = run.sub("semiclassical")
    coeffs = resolved_coefficients(run, epsilon, tau_end)
    ctx = TransformContext(p, coeffs)
    n_tau = _get(block, "n_tau", "solver.semiclassical", 101, kind=int)
    half = _get(block, "xi_half_width", "solver.semiclassical", 12.0, kind=float)
    n_xi = _get(block, "n_xi", "solver.semiclassical", 481, kind=int)
    xi = sc.default_xi_grid(half, n_xi)
    tau_end = run.tau_end if tau_end is None else tau_end
    tau_grid = np.linspace(p.s, tau_end, n_tau)
    if run.Y_s is not None:
        Y_s, gamma = run.Y_s, run.xi_profile
    else:
        Y_s = float(y_of_x(ctx, run.X_gamma, p.s))
        rt = math.sqrt(p.epsilon)

        def gamma(z, profile=run.profile):
            return profile(x_of_y(ctx, Y_s + rt * np.asarray(z, float), p.s))
    return sc.build_state(ctx, Y_s, tau_grid, gamma, xi_grid=xi, gamma_support=(xi[0], xi[-1]),
                          gamma_resolution=_get(block, "resolution", "solver.semiclassical",
                                                0.2, kind=float)), ctx


def solve_semiclassical(run: Run):
    if run.params.a == 0:
        raise ConfigError("model.a: evolve-semiclassical needs a != 0")
    state, ctx = _semiclassical_state(run)
    use_phi1 = _get(run.sub("semiclassical"), "include_phi1", "solver.semiclassical", True,
                    kind=bool)
    return [sc.assemble_density(state, t, run.x, ctx, include_phi1=use_phi1)
            for t in run.times]


def solve_fd(run: Run):
    solver = run.solver
    scheme = _get(solver, "scheme", "solver", "semi-implicit", kind=str)
    dt = _get(solver, "dt", "solver", None, kind=float)
    x_min, x_max = float(run.x[0]), float(run.x[-1])
    if dt is None and scheme == "explicit":
        dx = run.x[1] - run.x[0]
        times = np.linspace(run.params.s, run.tau_end, 21)
        dt = dx * dx / (4.0 * max_diffusion(run.params, run.coeffs, x_min, x_max, times))
    try:
        cfg = FdConfig(x_min, x_max, run.x.size, 1e-3 if dt is None else dt, scheme)
    except ParameterError as exc:
        raise ConfigError(f"solver: {exc}") from None
    feedback = _get(solver, "feedback", "solver", False, kind=bool)
    result = fd_solve(run.params, run.coeffs, run.initial, cfg, run.tau_end, times=run.times,
                      feedback=feedback, X_gamma=run.X_gamma)
    return list(result.densities)


SOLVE = {"evolve-const": solve_const, "evolve-exact": solve_exact,
         "evolve-semiclassical": solve_semiclassical, "evolve-fd": solve_fd}


# --------------------------------------------------------------------------
# output

def fmt(value) -> str:
    return "%.17g" % value


def _json(value, indent=0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(value, dict):
        items = [f'{pad}"{k}": {_json(v, indent + 1)}' for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(pad + _json(v, indent + 1) for v in value) + "\n" \
            + "  " * indent + "]"
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt(value) if math.isfinite(value) else "null"
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_json(path, value):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_json(value) + "\n")


def write_table(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _time_tag(t):
    return ("%.6g" % t).replace("-", "m")


def density_summary(u: DensityGrid, reference: Optional[DensityGrid] = None):
    return {"tau": u.tau, "norm": u.norm(), "mean": u.mean(), "variance": u.variance(),
            "l1_vs_reference": None if reference is None else grid_metrics(u, reference).l1}


def _write_densities(out, name, densities, references=None):
    for u in densities:
        write_table(os.path.join(out, f"density_{name}_t{_time_tag(u.tau)}.csv"), ["x", "u"],
                    zip(u.x, u.values))
    refs = references or [None] * len(densities)
    write_json(os.path.join(out, f"summary_{name}.json"),
               {"command": f"evolve-{name}",
                "results": [density_summary(u, r) for u, r in zip(densities, refs)]})


# --------------------------------------------------------------------------
# commands

def cmd_moment(run: Run, out):
    n = _get(run.sub("moment"), "n_steps", "solver.moment", 100, kind=int)
    grid = np.linspace(run.params.s, run.tau_end, n + 1)
    traj = moment_ode_solve(run.params, run.coeffs, run.X_gamma, grid)
    write_table(os.path.join(out, "moment.csv"), ["tau", "X"], zip(traj.tau, traj.values))
    write_json(os.path.join(out, "summary_moment.json"),
               {"command": "moment", "X_gamma": run.X_gamma, "tau_end": run.tau_end,
                "X_end": float(traj.values[-1])})


def cmd_evolve(run: Run, out, command):
    name = command.split("-", 1)[1]
    densities = SOLVE[command](run)
    references = None
    ref = run.solver.get("reference")
    if ref is not None:
        if ref not in SOLVERS:
            raise ConfigError(f"solver.reference: unknown solver {ref!r}")
        references = SOLVE[SOLVERS[ref]](run)
    _write_densities(out, name, densities, references)


def cmd_compare(run: Run, out):
    block = run.sub("compare")
    names = _get(block, "solvers", "solver.compare", ["exact", "fd"], kind=list)
    if len(names) != 2 or any(n not in SOLVERS for n in names):
        raise ConfigError(f"solver.compare.solvers: need two of {sorted(SOLVERS)}")
    first, second = (SOLVE[SOLVERS[n]](run) for n in names)
    rows = []
    for u, v in zip(first, second):
        m = grid_metrics(u, v)
        rows.append((u.tau, m.l1, m.linf, m.moment_diff, m.variance_diff))
    write_table(os.path.join(out, "metrics.csv"),
                ["tau", "l1", "linf", "moment_diff", "variance_diff"], rows)
    worst = max(r[1] for r in rows)
    threshold = _get(block, "l1_threshold", "solver.compare", None, kind=float)
    write_json(os.path.join(out, "summary_compare.json"),
               {"command": "compare", "solvers": list(names), "l1_threshold": threshold,
                "results": [density_summary(u, v) for u, v in zip(first, second)],
                "l1_vs_reference": worst})
    if threshold is not None and worst > threshold:
        raise NumericalError(f"L1 distance {worst:.3e} exceeds solver.compare.l1_threshold "
                             f"{threshold:.3e}")


def cmd_residual(run: Run, out):
    if run.params.a == 0:
        raise ConfigError("model.a: residual needs a != 0")
    block = run.sub("residual")
    epsilons = [float(e) for e in _get(block, "epsilons", "solver.residual",
                                       [run.params.epsilon, 0.5 * run.params.epsilon], kind=list)]
    tau = _get(block, "tau", "solver.residual", run.tau_end - 0.1 * (run.tau_end - run.params.s),
               kind=float)
    dtau = _get(block, "dtau", "solver.residual", 0.02, kind=float)
    ablation = _get(block, "ablation", "solver.residual", False, kind=bool)
    span = run.tau_end - run.params.s
    state, ctx = _semiclassical_state(run, tau_end=max(run.tau_end, tau + 2 * dtau + 0.05 * span))
    rows = []
    for include in (True, False) if ablation else (True,):
        for eps in epsilons:
            rep = sc.residual(state, tau, eps, include_phi1=include, dtau=dtau, ctx=ctx)
            rows.append((rep.epsilon, rep.tau, rep.residual_norm, rep.solution_norm, rep.ratio,
                         rep.fd_error, "true" if include else "false"))
    write_table(os.path.join(out, "residual.csv"),
                ["epsilon", "tau", "residual_norm", "solution_norm", "ratio", "fd_error",
                 "include_phi1"], rows)
    write_json(os.path.join(out, "summary_residual.json"),
               {"command": "residual", "tau": tau,
                "ratios": [{"epsilon": r[0], "ratio": r[4], "include_phi1": r[6] == "true"}
                           for r in rows]})


def run(command, config, out) -> None:
    if command not in COMMANDS:
        raise ConfigError(f"command: unknown {command!r}; choose from {', '.join(COMMANDS)}")
    os.makedirs(out, exist_ok=True)
    ctx = build_run(config, command)
    if command == "moment":
        cmd_moment(ctx, out)
    elif command == "compare":
        cmd_compare(ctx, out)
    elif command == "residual":
        cmd_residual(ctx, out)
    else:
        cmd_evolve(ctx, out, command)


def build_parser():
    parser = argparse.ArgumentParser(prog="nfpe", description=__doc__.split("\n")[0])
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--command", choices=COMMANDS,
                        help="command to run (default: the config's 'command' key)")
    parser.add_argument("--out", help="output directory (default: output.dir or '.')")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="dot-path override, e.g. model.epsilon=0.01 (repeatable)")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved for stochastic extensions; unused by current commands")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="nfpe: %(levelname)s: %(message)s")
    try:
        config = load_config(args.config, args.override)
        command = args.command or config.get("command")
        if command is None:
            raise ConfigError("command: give --command or a 'command' key in the config")
        out = args.out or (config.get("output") or {}).get("dir") or "."
        run(command, config, out)
    except NumericalError as exc:
        print(f"nfpe: numerical failure: {exc}", file=sys.stderr)
        return 2
    except NfpeError as exc:
        print(f"nfpe: invalid configuration: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
