"""Batch front end.

Exit codes: 0 success, 1 usage error or unknown command, 2 validation failure
(bad config, violated assumption, unordered comparison data, unstable grid),
3 solver non-convergence or a failed comparison (artifacts are still written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .config import ConfigError, ProblemFile, _control, load_problem, parse_problem
from .core import (Grid, GridError, ProblemSpec, default_bounds, min_time_steps, problem_grid,
                   validate_problem)
from .gexp import ArityError, cylinder_field, sup_over_scenarios
from .harness import OrderingError, comparison_check, reconstruct_paths
from .obstacle import (PenaltySchedule, PenaltyStabilityError, complementarity_residual,
                       refinement_study, solve_obstacle)
from .output import field_rows, versions, write_csv, write_json
from .picard import PicardConfig, picard_global_solve
from .sde import moment_diagnostics, simulate_gsde

COMMANDS = ("solve", "picard", "gexp", "mc-bound", "simulate", "compare", "study")
OUT_ENV = "RGBSDE_OUT"
EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class Failure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_grid(p):
    g = p.add_argument_group("grid")
    g.add_argument("--nx", type=int, help="space nodes (default from [grid] or 201)")
    g.add_argument("--nt", type=int, help="time steps (default: smallest stable)")
    g.add_argument("--x-min", type=float)
    g.add_argument("--x-max", type=float)
    g.add_argument("--x0", type=float, help="reporting point (default from [grid] or 1.0)")
    g.add_argument("--t-stride", type=int, help="write every n-th time level of fields")


def _add_schedule(p):
    g = p.add_argument_group("penalty schedule")
    g.add_argument("--j-max", type=int, help="use m = 1, 2, ..., 2^j_max")
    g.add_argument("--stop-tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rgbsde", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def common(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", default=os.environ.get(OUT_ENV, "out"),
                       help=f"output directory (default ${OUT_ENV} or ./out)")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = common("solve", "penalty-schedule obstacle solve")
    p.add_argument("--problem", required=True)
    _add_grid(p)
    _add_schedule(p)

    p = common("picard", "slab-wise Picard solve")
    p.add_argument("--problem", required=True)
    _add_grid(p)
    _add_schedule(p)
    p.add_argument("--h", type=float, help="initial slab width")
    p.add_argument("--rho", type=float)
    p.add_argument("--inner-tol", type=float)

    p = common("gexp", "G-expectation of a cylinder functional by PDE")
    p.add_argument("--problem", required=True)
    _add_grid(p)

    p = common("mc-bound", "Monte-Carlo lower bound over scenario controls")
    p.add_argument("--problem", required=True)
    p.add_argument("--n-paths", type=int)

    p = common("simulate", "forward paths under a scenario control")
    p.add_argument("--problem", required=True)
    _add_grid(p)
    _add_schedule(p)
    p.add_argument("--n-steps", type=int)
    p.add_argument("--n-paths", type=int)
    p.add_argument("--control", help="lo, hi or switch (default from [simulate] or hi)")
    p.add_argument("--reconstruct", action="store_true",
                   help="also solve the obstacle problem and rebuild (Y, Z, A) along paths")
    p.add_argument("--moments", action="store_true", help="write moment diagnostics")

    p = common("compare", "comparison check between two ordered problems")
    p.add_argument("--problem-hi", required=True)
    p.add_argument("--problem-lo", required=True)
    _add_grid(p)
    _add_schedule(p)

    p = common("study", "CFL-preserving refinement study of the PDE residual")
    p.add_argument("--problem", required=True)
    p.add_argument("--refine", type=int, default=3)
    p.add_argument("--t-max", type=float, help="residual window end (default T/2)")
    _add_grid(p)
    return parser


# ---------------------------------------------------------------------------
# Shared setup
# ---------------------------------------------------------------------------


def _load(path: str) -> ProblemFile:
    """Load a TOML problem file or the problem embedded in a run manifest."""
    if path.endswith(".json"):
        try:
            data = json.loads(Path(path).read_text())
            return parse_problem(data["problem_file"], data.get("problem_path", path))
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    return load_problem(path)


def _need_spec(pf: ProblemFile) -> ProblemSpec:
    if pf.spec is None:
        raise ConfigError(f"{pf.path}: no [[component]] tables")
    return pf.spec


def _schedule(pf: ProblemFile, args) -> PenaltySchedule:
    s = pf.schedule
    if getattr(args, "j_max", None) is not None:
        s = PenaltySchedule.doubling(args.j_max, s.stop_tol)
    if getattr(args, "stop_tol", None) is not None:
        s = PenaltySchedule(s.m_values, args.stop_tol)
    return s


def _x0(pf: ProblemFile, args) -> float:
    if getattr(args, "x0", None) is not None:
        return args.x0
    return float(pf.grid.get("x0", 1.0))


def _grid(pf: ProblemFile, args, spec: ProblemSpec, m_max: float = 0.0, nx_default: int = 201,
          nt_multiple: int = 1, extra: ProblemSpec | None = None) -> Grid:
    """Grid from CLI flags, then the [grid] table, then defaults.

    The default nt is the smallest one that is stable for every problem in
    play and keeps dt * m_max <= 1, rounded up to a multiple of ``nt_multiple``.
    """
    specs = [spec] if extra is None else [spec, extra]
    strikes = [K for s in specs for K in s.strikes()]
    lo, hi = default_bounds(_x0(pf, args), spec.g_params.sigma_hi, spec.T, strikes)
    x_min = args.x_min if args.x_min is not None else float(pf.grid.get("x_min", lo))
    x_max = args.x_max if args.x_max is not None else float(pf.grid.get("x_max", hi))
    nx = args.nx if args.nx is not None else int(pf.grid.get("nx", nx_default))
    auto = [problem_grid(s, x_min, x_max, nx, None, m_max) for s in specs]
    nt = args.nt if args.nt is not None else pf.grid.get("nt")
    if nt is None:
        nt = max(g.nt for g in auto)
        nt = -(-nt // nt_multiple) * nt_multiple
    return Grid(x_min, x_max, nx, int(nt), spec.T, max(g.sigma_hi_sq for g in auto))


def _stride(args, grid) -> int:
    if getattr(args, "t_stride", None) is not None:
        if args.t_stride < 1:
            raise ConfigError("--t-stride must be >= 1")
        return args.t_stride
    return max(1, grid.nt // 100)


def _validate(spec: ProblemSpec, grid, out: Path, seed: int):
    rep = validate_problem(spec, grid, seed=seed)
    write_json(out / "validation.json", rep.to_dict())
    if not rep.ok:
        names = ", ".join(f"{c.name} ({c.value:.4g})" for c in rep.failures())
        raise Failure(EXIT_INVALID, f"assumption check failed: {names}")
    return rep


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _manifest(out: Path, args, pf_list, effective: dict, files: list, status: str) -> None:
    rerun = [args.command]
    for key, val in effective.get("cli", {}).items():
        if val is None or val is False:
            continue
        flag = "--" + key.replace("_", "-")
        rerun += [flag] if val is True else [flag, str(val)]
    data = {
        "command": args.command,
        "status": status,
        "seed": args.seed,
        "versions": versions(),
        "effective": effective,
        "rerun": rerun,
        "outputs": {f.name: _sha256(f) for f in files},
    }
    if len(pf_list) == 1:
        data["problem_path"] = pf_list[0].path
        data["problem_file"] = pf_list[0].raw
    else:
        data["problems"] = {p.path: p.raw for p in pf_list}
    write_json(out / "manifest.json", data)


def _grid_cli(grid, x0=None) -> dict:
    d = {"nx": grid.nx, "nt": grid.nt, "x_min": repr(grid.x_min), "x_max": repr(grid.x_max)}
    if x0 is not None:
        d["x0"] = repr(x0)
    return d


def _schedule_dict(s: PenaltySchedule, tol: float | None = None) -> dict:
    return {"m_values": list(s.m_values), "stop_tol": s.stop_tol, "resolved_stop_tol": tol}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_solve(args, out: Path) -> int:
    pf = _load(args.problem)
    spec = _need_spec(pf)
    sched = _schedule(pf, args)
    grid = _grid(pf, args, spec, m_max=sched.m_values[-1])
    _validate(spec, grid, out, args.seed)
    res = solve_obstacle(spec, grid, sched)
    stride = _stride(args, grid)
    obst = np.stack([np.stack([spec.l[i](t, grid.x) for t in grid.t]) for i in range(spec.k)])
    files = [
        write_csv(out / "field.csv", ("i", "t", "x", "u", "l", "residual"),
                  field_rows(res.u.values, obst, res.residual, grid.t, grid.x, stride)),
        write_csv(out / "residual.csv", ("i", "t", "residual_sup"),
                  ((i + 1, grid.t[n], float(np.max(np.abs(res.residual[i, n]))))
                   for i in range(spec.k) for n in range(0, grid.nt + 1, stride))),
        write_csv(out / "trace.csv", ("m", "sup_delta", "sup_neg_part", "min_increment"),
                  ((e.m, e.sup_delta, e.sup_neg_part, e.min_increment) for e in res.trace)),
    ]
    x0 = _x0(pf, args)
    summary = {
        "value": [res.value(x0, i) for i in range(spec.k)], "x0": x0,
        "converged": res.converged, "m_final": res.m_final, "stop_tol": res.stop_tol,
        "residual_sup": res.residual_sup,
        **{k: v for k, v in res.diagnostics.items() if k != "wall_time_s"},
    }
    write_json(out / "diagnostics.json", {**summary, "wall_time_s": res.diagnostics["wall_time_s"]})
    effective = {"grid": grid.to_dict(), "schedule": _schedule_dict(sched, res.stop_tol),
                 "problem": spec.to_dict(),
                 "cli": {"problem": args.problem, **_grid_cli(grid, x0), "t_stride": stride,
                         "stop_tol": repr(res.stop_tol), "seed": args.seed}}
    if sched.m_values == PenaltySchedule.doubling(sched.j_max).m_values:
        effective["cli"]["j_max"] = sched.j_max
    _manifest(out, args, [pf], effective, files, "converged" if res.converged else "not converged")
    print(f"u(0, {x0:g}) = {', '.join(f'{v:.8g}' for v in summary['value'])}  "
          f"m_final = {res.m_final}  residual_sup = {res.residual_sup:.3g}")
    if not res.converged:
        raise Failure(EXIT_NONCONVERGED, f"penalty schedule did not reach stop_tol {res.stop_tol:.3g}")
    return EXIT_OK


def cmd_picard(args, out: Path) -> int:
    pf = _load(args.problem)
    spec = _need_spec(pf)
    sched = _schedule(pf, args)
    base = pf.picard or PicardConfig(h=spec.T, penalty_m=sched.m_values[-1])
    changes = {k: v for k, v in (("h", args.h), ("rho", args.rho), ("inner_tol", args.inner_tol))
               if v is not None}
    if args.j_max is not None and pf.picard is None:
        changes["penalty_m"] = sched.m_values[-1]
    cfg = replace(base, **changes)
    grid = _grid(pf, args, spec, m_max=cfg.penalty_m)
    _validate(spec, grid, out, args.seed)
    res = picard_global_solve(spec, grid, cfg)
    resid = complementarity_residual(res.u, spec, grid)
    stride = _stride(args, grid)
    obst = np.stack([np.stack([spec.l[i](t, grid.x) for t in grid.t]) for i in range(spec.k)])
    files = [
        write_csv(out / "field.csv", ("i", "t", "x", "u", "l", "residual"),
                  field_rows(res.u.values, obst, resid.field, grid.t, grid.x, stride)),
        write_csv(out / "slabs.csv",
                  ("slab", "t_start", "t_end", "h", "iterations", "factor", "sup_delta"),
                  ((s.index, s.t_start, s.t_end, s.h, s.iterations, s.factor, s.sup_delta)
                   for s in res.slabs)),
    ]
    x0 = _x0(pf, args)
    write_json(out / "diagnostics.json", {
        "value": [float(res.u.at(i, 0.0, x0)) for i in range(spec.k)], "x0": x0,
        "converged": res.converged, "h_final": res.h_final, "halvings": res.halvings,
        "certificate": max((s.factor for s in res.slabs), default=0.0),
        "residual_sup": resid.sup,
    })
    effective = {"grid": grid.to_dict(), "picard": asdict(cfg), "problem": spec.to_dict(),
                 "cli": {"problem": args.problem, **_grid_cli(grid, x0), "t_stride": stride,
                         "h": repr(cfg.h), "rho": repr(cfg.rho),
                         "inner_tol": repr(cfg.inner_tol), "seed": args.seed}}
    _manifest(out, args, [pf], effective, files, "converged" if res.converged else "not converged")
    print(f"u(0, {x0:g}) = {', '.join(f'{float(res.u.at(i, 0.0, x0)):.8g}' for i in range(spec.k))}"
          f"  slabs = {len(res.slabs)}  h = {res.h_final:g}")
    if not res.converged:
        raise Failure(EXIT_NONCONVERGED,
                      f"Picard iteration failed (last factor {res.last_factor:.3g}, "
                      f"{res.halvings} halvings)")
    return EXIT_OK


def _gexp_grid(pf: ProblemFile, args):
    func = pf.cylinder
    if func is None:
        raise ConfigError(f"{pf.path}: no [gexp] payoff")
    gp = pf.g_params
    horizon = func.times[-1]
    sec = pf.gexp
    strikes = func.params[1::2] if func.kind == "legs" else ()
    lo, hi = default_bounds(0.0, gp.sigma_hi, horizon, strikes)
    x_min = args.x_min if args.x_min is not None else float(sec.get("x_min", lo))
    x_max = args.x_max if args.x_max is not None else float(sec.get("x_max", hi))
    nx = args.nx if args.nx is not None else int(sec.get("nx", 401))
    nt = args.nt if args.nt is not None else sec.get("nt")
    if nt is None:
        nt = min_time_steps(horizon, (x_max - x_min) / (nx - 1), gp.sigma_hi_sq)
    return func, Grid(x_min, x_max, nx, int(nt), horizon, gp.sigma_hi_sq)


def cmd_gexp(args, out: Path) -> int:
    pf = _load(args.problem)
    func, grid = _gexp_grid(pf, args)
    levels = cylinder_field(func, pf.g_params, grid)
    value = float(np.interp(0.0, grid.x, levels[0]))
    stride = _stride(args, grid)
    n_levels = levels.shape[0]
    idx = list(range(0, n_levels, stride))
    if idx[-1] != n_levels - 1:
        idx.append(n_levels - 1)
    files = [write_csv(out / "field.csv", ("t", "x", "u"),
                       ((grid.t[n], xj, levels[n, j]) for n in idx
                        for j, xj in enumerate(grid.x)))]
    write_json(out / "diagnostics.json", {"value": value, "times": list(func.times),
                                          "kind": func.kind, "params": list(func.params)})
    effective = {"grid": grid.to_dict(), "g_params": pf.g_params.__dict__,
                 "cli": {"problem": args.problem, **_grid_cli(grid), "t_stride": stride,
                         "seed": args.seed}}
    _manifest(out, args, [pf], effective, files, "ok")
    print(f"G-expectation = {value:.10g}")
    return EXIT_OK


def cmd_mc_bound(args, out: Path) -> int:
    pf = _load(args.problem)
    func = pf.cylinder
    if func is None:
        raise ConfigError(f"{pf.path}: no [gexp] payoff")
    n_paths = args.n_paths if args.n_paths is not None else int(pf.gexp.get("n_paths", 10_000))
    controls = pf.controls(func.times[-1])
    bound = sup_over_scenarios(func, pf.g_params, controls, n_paths, args.seed)
    files = [write_csv(out / "scenarios.csv", ("control_id", "mean", "stderr"), bound.table())]
    write_json(out / "diagnostics.json", {"value": bound.value, "best": bound.best.control_id,
                                          "best_stderr": bound.best.stderr})
    effective = {"n_paths": n_paths, "controls": [c.__dict__ for c in controls],
                 "cli": {"problem": args.problem, "n_paths": n_paths, "seed": args.seed}}
    _manifest(out, args, [pf], effective, files, "ok")
    print(f"sup over scenarios = {bound.value:.8g} +- {bound.best.stderr:.2g} "
          f"({bound.best.control_id})")
    return EXIT_OK


def cmd_simulate(args, out: Path) -> int:
    pf = _load(args.problem)
    spec = _need_spec(pf)
    sec = pf.simulate
    x0 = args.x0 if args.x0 is not None else float(sec.get("x0", pf.grid.get("x0", 1.0)))
    n_steps = args.n_steps if args.n_steps is not None else int(sec.get("n_steps", 500))
    n_paths = args.n_paths if args.n_paths is not None else int(sec.get("n_paths", 1000))
    craw = args.control if args.control is not None else sec.get("control", "hi")
    control = _control(craw, spec.g_params, spec.T, "control")
    ens = simulate_gsde(spec, control, x0, n_steps, n_paths, args.seed)
    stride = max(1, args.t_stride or 1)
    steps = list(range(0, n_steps + 1, stride))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    files = [write_csv(out / "paths.csv", ("path", "t", "x"),
                       ((p, ens.times[j], ens.states[p, j]) for p in range(n_paths)
                        for j in steps))]
    effective = {"control": control.__dict__, "n_steps": n_steps, "n_paths": n_paths,
                 "cli": {"problem": args.problem, "x0": repr(x0), "n_steps": n_steps,
                         "n_paths": n_paths, "t_stride": stride, "seed": args.seed,
                         "reconstruct": args.reconstruct, "moments": args.moments}}
    if isinstance(craw, str):
        effective["cli"]["control"] = craw
    diag = {"control": control.label}
    status = "ok"
    if args.moments:
        deltas = sec.get("deltas", [0.1, 0.05, 0.025, 0.0125])
        table = moment_diagnostics(spec, sec.get("x0s", [x0]), deltas,
                                   n_paths=n_paths, seed=args.seed)
        files.append(write_csv(out / "moments.csv",
                               ("x0", "delta", "moment", "stderr", "ratio", "worst_control"),
                               ((r.x0, r.delta, r.moment, r.stderr, r.ratio, r.worst_control)
                                for r in table.rows)))
        diag["moment_slopes"] = {repr(k): v for k, v in table.slopes.items()}
        diag["moment_ratio_spread"] = table.ratio_spread
    if args.reconstruct:
        sched = _schedule(pf, args)
        grid = _grid(pf, args, spec, m_max=sched.m_values[-1], nt_multiple=n_steps)
        _validate(spec, grid, out, args.seed)
        res = solve_obstacle(spec, grid, sched)
        sol = reconstruct_paths(res.u, spec, grid, ens, control, res.residual_sup)
        files.append(write_csv(out / "path_extrema.csv",
                               ("i", "path", "min_gap", "min_dA", "A_T"),
                               ((int(r[0]) + 1, int(r[1]), r[2], r[3], r[4])
                                for r in sol.per_path_extrema())))
        diag.update(sol.summary())
        diag["solver_converged"] = res.converged
        effective["grid"] = grid.to_dict()
        effective["schedule"] = _schedule_dict(sched, res.stop_tol)
        effective["cli"].update({k: v for k, v in _grid_cli(grid).items()})
        effective["cli"]["stop_tol"] = repr(res.stop_tol)
        if not res.converged:
            status = "not converged"
    write_json(out / "diagnostics.json", diag)
    _manifest(out, args, [pf], effective, files, status)
    print(f"simulated {n_paths} paths x {n_steps} steps under {control.label}")
    if status != "ok":
        raise Failure(EXIT_NONCONVERGED, "obstacle solve did not converge")
    return EXIT_OK


def cmd_compare(args, out: Path) -> int:
    pf_hi, pf_lo = _load(args.problem_hi), _load(args.problem_lo)
    hi, lo = _need_spec(pf_hi), _need_spec(pf_lo)
    if abs(hi.T - lo.T) > 1e-12:
        raise ConfigError("compared problems must share the horizon T")
    sched = _schedule(pf_hi, args)
    grid = _grid(pf_hi, args, hi, m_max=sched.m_values[-1], extra=lo)
    _validate(hi, grid, out, args.seed)
    _validate(lo, grid, out, args.seed)
    try:
        rep = comparison_check(hi, lo, grid, sched)
    except OrderingError as exc:
        raise Failure(EXIT_INVALID, str(exc)) from exc
    files = [write_csv(out / "comparison.csv",
                       ("tol", "worst_violation", "max_diff", "min_diff"),
                       [(rep.tol, rep.worst_violation, rep.max_diff, rep.min_diff)])]
    write_json(out / "diagnostics.json", rep.to_dict())
    effective = {"grid": grid.to_dict(), "schedule": _schedule_dict(sched),
                 "cli": {"problem_hi": args.problem_hi, "problem_lo": args.problem_lo,
                         **_grid_cli(grid), "seed": args.seed}}
    if sched.stop_tol is not None:
        effective["cli"]["stop_tol"] = repr(sched.stop_tol)
    ok = rep.ordered and all(rep.converged)
    _manifest(out, args, [pf_hi, pf_lo], effective, files, "ordered" if ok else "failed")
    print(f"worst violation {rep.worst_violation:.3g} (tolerance {rep.tol:.3g})")
    if not all(rep.converged):
        raise Failure(EXIT_NONCONVERGED, "penalty schedule did not converge for both problems")
    if not rep.ordered:
        raise Failure(EXIT_NONCONVERGED, "computed solutions are not ordered")
    return EXIT_OK


def cmd_study(args, out: Path) -> int:
    pf = _load(args.problem)
    spec = _need_spec(pf)
    if args.refine < 1:
        raise ConfigError("--refine must be >= 1")
    grid = _grid(pf, args, spec, nx_default=51)
    _validate(spec, grid, out, args.seed)
    x0 = _x0(pf, args)
    rows = refinement_study(spec, grid, args.refine, x0, args.t_max)
    files = [write_csv(out / "study.csv",
                       ("level", "nx", "nt", "dx", "dt", "value", "residual_sup", "delta", "ratio"),
                       ((r.level, r.nx, r.nt, r.dx, r.dt, r.value, r.residual_sup, r.delta,
                         r.ratio) for r in rows))]
    effective = {"grid": grid.to_dict(), "t_max": args.t_max if args.t_max is not None else spec.T / 2,
                 "cli": {"problem": args.problem, **_grid_cli(grid, x0), "refine": args.refine,
                         "t_max": None if args.t_max is None else repr(args.t_max),
                         "seed": args.seed}}
    _manifest(out, args, [pf], effective, files, "ok")
    print(f"{'level':>5} {'dx':>10} {'dt':>11} {'value':>12} {'residual':>11} "
          f"{'delta':>10} {'ratio':>7}")
    for r in rows:
        print(f"{r.level:5d} {r.dx:10.5g} {r.dt:11.5g} {r.value:12.8f} {r.residual_sup:11.4g} "
              f"{r.delta:10.3g} {r.ratio:7.3f}")
    return EXIT_OK


HANDLERS = {"solve": cmd_solve, "picard": cmd_picard, "gexp": cmd_gexp,
            "mc-bound": cmd_mc_bound, "simulate": cmd_simulate, "compare": cmd_compare,
            "study": cmd_study}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv or argv[0] in ("-h", "--help"):
        parser.print_help()
        return EXIT_OK if argv else EXIT_USAGE
    if argv[0] not in COMMANDS:
        parser.print_usage(sys.stderr)
        print(f"rgbsde: unknown command {argv[0]!r} (choose from {', '.join(COMMANDS)})",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"rgbsde: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help inside a subcommand
        return int(exc.code or 0)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"rgbsde: output directory {out} is not writable: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return HANDLERS[args.command](args, out)
    except Failure as exc:
        print(f"rgbsde: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, GridError, PenaltyStabilityError, ArityError, ValueError) as exc:
        print(f"rgbsde: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
