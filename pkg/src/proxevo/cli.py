"""Config-driven experiment runner.

Commands: ``solve <config>``, ``suite <name>``, ``validate <config>``.
Configs are TOML; forcing and initial-data fields are written in a small
expression grammar over the declared variables (constants, arithmetic,
sin/cos/exp/log/sqrt/tanh/abs, pi and e).  Outputs are a long-format
trajectory CSV (t, component_index, u, v, eta), a JSON report, and a plain
text summary.
"""
from __future__ import annotations

import argparse
import ast
import csv
import json
import logging
import math
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .coupling import LinearCoupling, NemytskiiCoupling, CubicCoupling, ZeroCoupling
from .errors import ConfigError, SolverError, UnknownSuite
from .pde1d import Mesh1D, assemble_problem
from .picard import (MODE_GLOBAL, MODE_LOCAL, ProblemSpec, SolverConfig,
                     continue_maximal, picard_solve)
from .potentials import make_potential
from .suites import run_suite

log = logging.getLogger("proxevo")

EXIT_OK = 0
EXIT_SOLVER_ERROR = 1
EXIT_BLOWUP = 2
EXIT_CONFIG_ERROR = 64

_ALLOWED_CALLS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "log": math.log, "sqrt": math.sqrt, "abs": abs, "tanh": math.tanh,
    "min": min, "max": max,
}
_ALLOWED_CONSTS = {"pi": math.pi, "e": math.e}

_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Call,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Mod, ast.USub, ast.UAdd,
    ast.Load,
)


def compile_expression(src: str, variables=("t",)):
    """Compile a config expression into a callable of the given variables."""
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad expression {src!r}: {exc}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ConfigError(
                f"expression {src!r} uses forbidden construct {type(node).__name__}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_CALLS:
                raise ConfigError(f"expression {src!r} calls a forbidden function")
        if isinstance(node, ast.Name):
            if node.id not in variables and node.id not in _ALLOWED_CONSTS \
                    and node.id not in _ALLOWED_CALLS:
                raise ConfigError(
                    f"expression {src!r} references unknown name {node.id!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"expression {src!r} has a non-numeric constant")
    code = compile(tree, "<config>", "eval")
    env = dict(_ALLOWED_CALLS, **_ALLOWED_CONSTS)

    def fn(*args):
        scope = dict(env)
        scope.update(zip(variables, args))
        return float(eval(code, {"__builtins__": {}}, scope))

    return fn


def _load_config(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file {path!r} does not exist")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid TOML: {exc}") from None


def _build_coupling(section: dict, config_dir: str):
    kind = section.get("kind", "zero")
    if kind == "zero":
        return ZeroCoupling()
    if kind == "linear":
        matrix = section.get("matrix")
        if isinstance(matrix, str):
            path = os.path.join(config_dir, matrix)
            if not os.path.exists(path):
                raise ConfigError(f"coupling matrix file {path!r} does not exist")
            matrix = np.loadtxt(path, delimiter=",", ndmin=2)
        elif isinstance(matrix, (int, float)):
            matrix = [[float(matrix)]]
        if matrix is None:
            raise ConfigError("linear coupling requires a matrix")
        return LinearCoupling(np.asarray(matrix, float))
    if kind == "cubic":
        return CubicCoupling(sign=section.get("sign", -1.0),
                             coeff=section.get("coeff", 1.0))
    if kind == "nemytskii":
        expr = compile_expression(section["b"], variables=("t", "x", "u"))
        sites = section.get("sites")
        if sites is None:
            raise ConfigError("nemytskii coupling requires sites")
        return NemytskiiCoupling(expr, section["c_b"], sites=sites)
    raise ConfigError(f"unknown coupling kind {kind!r}")


def _build_potential(section: dict):
    params = {k: v for k, v in section.items() if k != "kind"}
    try:
        return make_potential(section.get("kind", "zero"), **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad potential section: {exc}") from None


def build_spec(config: dict, config_dir: str) -> ProblemSpec:
    try:
        problem = config["problem"]
    except KeyError:
        raise ConfigError("config needs a [problem] section") from None

    if "pde1d" in problem:
        return _build_pde_spec(problem)

    dim = int(problem.get("dim", 1))
    horizon = float(problem.get("horizon", 1.0))
    u0 = np.atleast_1d(np.asarray(problem.get("u0", [0.0] * dim), float))
    v0 = np.atleast_1d(np.asarray(problem.get("v0", [0.0] * dim), float))
    forcing_src = problem.get("forcing", ["0"])
    if isinstance(forcing_src, str):
        forcing_src = [forcing_src]
    if len(forcing_src) == 1 and dim > 1:
        forcing_src = forcing_src * dim
    if len(forcing_src) != dim:
        raise ConfigError("forcing must have one expression per component")
    fns = [compile_expression(s, variables=("t",)) for s in forcing_src]
    forcing = lambda t: np.array([fn(t) for fn in fns])
    potential = _build_potential(problem.get("potential", {"kind": "zero"}))
    coupling = _build_coupling(problem.get("coupling", {"kind": "zero"}), config_dir)
    try:
        return ProblemSpec(dim=dim, potential=potential, coupling=coupling,
                           forcing=forcing, u0=u0, v0=v0, horizon=horizon)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _build_pde_spec(problem: dict) -> ProblemSpec:
    sec = problem["pde1d"]
    mesh = Mesh1D(n_cells=int(sec.get("n_cells", 8)),
                  length=float(sec.get("length", 1.0)),
                  left_value=float(sec.get("left_value", 0.0)),
                  right_value=float(sec.get("right_value", 0.0)))
    psi = _build_potential(sec.get("psi", {"kind": "quadratic"}))
    f = compile_expression(sec.get("forcing", "0"), variables=("t", "x"))
    u0 = compile_expression(sec.get("u0", "0"), variables=("x",))
    v0 = compile_expression(sec.get("v0", "0"), variables=("x",))
    b_src = sec.get("b")
    b = compile_expression(b_src, variables=("t", "x", "u")) if b_src else None
    return assemble_problem(mesh, psi, b=b, c_b=float(sec.get("c_b", 0.0)),
                            f=f, u0=u0, v0=v0,
                            horizon=float(problem.get("horizon", 1.0)))


def build_solver_config(config: dict, overrides: dict) -> SolverConfig:
    section = dict(config.get("solver", {}))
    section.update({k: v for k, v in overrides.items() if v is not None})
    mode = section.get("mode", MODE_GLOBAL)
    if mode not in (MODE_GLOBAL, MODE_LOCAL):
        raise ConfigError(f"solver mode must be 'global' or 'local', got {mode!r}")
    cfg = SolverConfig(
        n_steps=int(section.get("n_steps", 1000)),
        picard_tol=float(section.get("picard_tol", 1e-8)),
        picard_max_iter=int(section.get("picard_max_iter", 200)),
        prox_tol=float(section.get("prox_tol", 1e-12)),
        ball_radius=float(section.get("ball_radius", 1.0)),
        blowup_threshold=float(section.get("blowup_threshold", 1e6)),
        mode=mode,
    )
    if cfg.n_steps < 1 or cfg.picard_tol <= 0 or cfg.prox_tol <= 0 \
            or cfg.ball_radius <= 0 or cfg.blowup_threshold <= 0:
        raise ConfigError("solver numeric fields must be positive")
    return cfg


def _write_trajectory_csv(path, times, u_vals, v_vals, eta_vals=None):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "component_index", "u", "v", "eta"])
        for k, t in enumerate(times):
            for j in range(u_vals.shape[1]):
                if eta_vals is not None and k >= 1:
                    eta = repr(float(eta_vals[k - 1, j]))
                else:
                    eta = ""
                writer.writerow([repr(float(t)), j,
                                 repr(float(u_vals[k, j])),
                                 repr(float(v_vals[k, j])), eta])


def _finite_or_marker(x):
    x = float(x)
    return x if math.isfinite(x) else "blowup"


def run(config_path: str, overrides=None, out_dir=None) -> int:
    """Execute one experiment; returns the process exit status."""
    overrides = overrides or {}
    config = _load_config(config_path)
    config_dir = os.path.dirname(os.path.abspath(config_path))
    spec = build_spec(config, config_dir)
    cfg = build_solver_config(config, overrides)
    output = dict(config.get("output", {}))
    out_dir = out_dir or output.get("dir", "out")
    os.makedirs(out_dir, exist_ok=True)
    traj_path = os.path.join(out_dir, output.get("trajectory", "trajectory.csv"))
    report_path = os.path.join(out_dir, output.get("report", "report.json"))
    summary_path = os.path.join(out_dir, output.get("summary", "summary.txt"))
    continuation = bool(config.get("solver", {}).get("continuation", False))

    if continuation:
        result = continue_maximal(spec, cfg)
        _write_trajectory_csv(traj_path, result.times, result.u_values,
                              result.v_values)
        report = {
            "status": "blowup" if result.blowup else "ok",
            "windows": result.windows,
            "covered_time": _finite_or_marker(result.times[-1]),
            "u_at_end": [_finite_or_marker(x) for x in result.u_values[-1]],
        }
        if result.blowup:
            report["blowup_time"] = _finite_or_marker(result.blowup[0])
            report["blowup_norm"] = _finite_or_marker(result.blowup[1])
        summary = (f"continuation over {result.windows} windows; "
                   + (f"blow-up at t = {result.blowup[0]:.6g} "
                      f"(|u| = {result.blowup[1]:.3g})" if result.blowup
                      else f"covered [0, {result.times[-1]:.6g}]"))
        status = EXIT_BLOWUP if result.blowup else EXIT_OK
    else:
        u, v, eta, rep = picard_solve(spec, cfg)
        _write_trajectory_csv(traj_path, u.grid.nodes, u.values, v.values,
                              eta.eta_values)
        report = {
            "status": "ok",
            "iterations": rep.iterations,
            "final_residual": _finite_or_marker(rep.final_residual),
            "measured_contraction": [_finite_or_marker(r)
                                     for r in rep.measured_contraction],
            "horizon_used": _finite_or_marker(rep.horizon_used),
            "t1": None if math.isnan(rep.t1) else _finite_or_marker(rep.t1),
            "t2": None if math.isinf(rep.t2) else _finite_or_marker(rep.t2),
            "l_tilde": _finite_or_marker(rep.l_tilde),
            "u_at_T": [_finite_or_marker(x) for x in u.values[-1]],
        }
        summary = (f"solved on [0, {rep.horizon_used:.6g}] in {rep.iterations} "
                   f"Picard iterations (residual {rep.final_residual:.3g}); "
                   f"u(T) = {np.array2string(u.values[-1], precision=6)}")
        status = EXIT_OK

    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    with open(summary_path, "w") as fh:
        fh.write(summary + "\n")
    print(summary)
    return status


def validate(config_path: str) -> int:
    config = _load_config(config_path)
    build_spec(config, os.path.dirname(os.path.abspath(config_path)))
    build_solver_config(config, {})
    print(f"{config_path}: ok")
    return EXIT_OK


def suite(name: str) -> int:
    rows = run_suite(name)
    width = max(len(r[0]) for r in rows)
    all_ok = True
    for check, measured, bound, passed in rows:
        all_ok &= passed
        print(f"{check:<{width}}  measured={measured:<12.6g} "
              f"bound={bound:<12.6g} {'PASS' if passed else 'FAIL'}")
    print(f"suite {name}: {'PASS' if all_ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_SOLVER_ERROR


def _make_parser():
    parser = argparse.ArgumentParser(
        prog="proxevo",
        description="Proximal implicit-Euler / Picard solver for second-order "
                    "evolution inclusions u'' + dPsi(u') + B(t,u) ∋ f")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one experiment from a config")
    p_solve.add_argument("config")
    p_solve.add_argument("--n-steps", type=int, default=None)
    p_solve.add_argument("--tol", type=float, default=None)
    p_solve.add_argument("--mode", choices=(MODE_LOCAL, MODE_GLOBAL), default=None)
    p_solve.add_argument("--out", default=None, help="output directory override")

    p_suite = sub.add_parser("suite", help="run a named verification suite")
    p_suite.add_argument("name")

    p_val = sub.add_parser("validate", help="check a config without solving")
    p_val.add_argument("config")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("PROXEVO_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            overrides = {"n_steps": args.n_steps, "picard_tol": args.tol,
                         "mode": args.mode}
            return run(args.config, overrides=overrides, out_dir=args.out)
        if args.command == "validate":
            return validate(args.config)
        if args.command == "suite":
            return suite(args.name)
    except (ConfigError, UnknownSuite) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
