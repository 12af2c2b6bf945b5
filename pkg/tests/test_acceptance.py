"""Acceptance criteria 1-10, one pass/fail line each.

Run with pytest (lines appear under "acceptance criteria" in the summary) or
directly with ``python3 tests/test_acceptance.py``.
"""

import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from rgbsde import corpus  # noqa: E402
from rgbsde.cli import main as cli_main  # noqa: E402
from rgbsde.core import GParams, Grid, problem_grid  # noqa: E402
from rgbsde.gexp import CylinderFunctional, evaluate_cylinder, sup_over_scenarios  # noqa: E402
from rgbsde.harness import classical_oracle, comparison_check, reconstruct_paths  # noqa: E402
from rgbsde.obstacle import (PenaltySchedule, penalty_trace, refinement_study,  # noqa: E402
                             solve_obstacle)
from rgbsde.picard import PicardConfig, picard_global_solve  # noqa: E402
from rgbsde.sde import extreme_controls, simulate_gsde  # noqa: E402

EXAMPLES = Path(__file__).resolve().parents[1] / "docs" / "examples"

HEAT_GP = GParams(1.0, 4.0)
HEAT_GRID = Grid(-12.0, 12.0, 401, 4000, 1.0, 4.0)


def _rel(a, b):
    return abs(a - b) / abs(b)


def criterion_1():
    sq = evaluate_cylinder(CylinderFunctional((1.0,), "square", (1.0,)), HEAT_GP, HEAT_GRID)
    neg = evaluate_cylinder(CylinderFunctional((1.0,), "square", (-1.0,)), HEAT_GP, HEAT_GRID)
    lin = evaluate_cylinder(CylinderFunctional((1.0,), "linear", (1.0, 0.0)), HEAT_GP, HEAT_GRID)
    ok = _rel(sq, 4.0) <= 5e-3 and _rel(neg, -1.0) <= 5e-3 and abs(lin) <= 1e-6
    return ok, f"E[B^2]={sq:.6f} (4), E[-B^2]={neg:.6f} (-1), E[B]={lin:.1e} (0)"


def criterion_2():
    # (payoff, index of the control expected to attain: 1 = hi, 0 = lo, None = no claim)
    cases = [
        ("B^2", CylinderFunctional((1.0,), "square", (1.0,)), 1),
        ("-B^2", CylinderFunctional((1.0,), "square", (-1.0,)), 0),
        ("put(0)", CylinderFunctional((1.0,), "legs", (-1.0, 0.0)), 1),
        ("put(1)", CylinderFunctional((1.0,), "legs", (-1.0, 1.0)), 1),
        ("put(0.5)->call(0)", CylinderFunctional((0.5, 1.0), "legs", (-1.0, 0.5, 1.0, 0.0)), None),
    ]
    ok = True
    parts = []
    for name, func, attain in cases:
        exact = evaluate_cylinder(func, HEAT_GP, HEAT_GRID)
        bound = sup_over_scenarios(func, HEAT_GP, extreme_controls(HEAT_GP, 1.0), 10_000, seed=0)
        band = lambda row: 5e-3 * abs(exact) + 3 * row.stderr  # noqa: E731
        ok &= all(r.mean <= exact + band(r) for r in bound.rows)
        if attain is not None:
            row = bound.rows[attain]
            ok &= abs(row.mean - exact) <= band(row)
        parts.append(f"{name}: mc {bound.value:.4f} vs {exact:.4f}")
    return ok, "; ".join(parts)


def criterion_3():
    worst = 0.0
    for T in (0.5, 1.0):
        for K in (0.9, 1.0, 1.1):
            for rate in (0.0, 0.05):
                spec = corpus.american_put(strike=K, T=T, rate=rate)
                res = solve_obstacle(spec, problem_grid(spec, 0.0, 2.5, 251, m_max=256))
                oracle = classical_oracle("binomial_american", S0=1.0, K=K, T=T, sigma=0.2,
                                          option="put", rate=rate)
                worst = max(worst, _rel(res.value(1.0), oracle))
    return worst <= 1e-2, f"max relative error {worst:.2e} over 12 cases (r = 0 and 0.05)"


def criterion_4():
    worst = 0.0
    for kind in ("call", "put"):
        spec = corpus.european(kind, sigma_lo=0.1, sigma_hi=0.2)
        res = solve_obstacle(spec, problem_grid(spec, 0.0, 2.5, 251, m_max=256))
        oracle = classical_oracle("bs_european", S0=1.0, K=1.0, T=1.0, sigma=0.2, option=kind)
        worst = max(worst, _rel(res.value(1.0), oracle))
    return worst <= 1e-2, f"max relative error {worst:.2e} vs Black-Scholes at sigma_hi"


def criterion_5():
    spec = corpus.american_put(rate=0.05)
    grid = problem_grid(spec, 0.0, 2.5, 126, m_max=256)
    m_values = PenaltySchedule.doubling(8).m_values
    trace = penalty_trace(spec, grid, m_values)
    inc = min(e.min_increment for e in trace[1:])
    neg = [e.sup_neg_part for e in trace]
    deltas = [e.sup_delta for e in trace[1:]]
    a = inc >= -10 * grid.dt
    b = all(q < p for p, q in zip(neg, neg[1:])) and neg[-1] < neg[0] / 10
    c = all(q < p for p, q in zip(deltas, deltas[1:]))
    return a and b and c, (f"(a) min increment {inc:.2e} >= {-10 * grid.dt:.2e}; "
                           f"(b) violation {neg[0]:.2e} -> {neg[-1]:.2e}; "
                           f"(c) deltas {deltas[0]:.2e} -> {deltas[-1]:.2e}")


def criterion_6():
    schedule = PenaltySchedule.doubling(10)
    parts = []
    ok = True
    for name, hi, lo in corpus.comparison_corpus():
        grid = problem_grid(hi, 0.0, 2.5, 126, m_max=1024)
        rep = comparison_check(hi, lo, grid, schedule)
        ok &= rep.worst_violation <= rep.tol
        parts.append(f"{name} {rep.worst_violation:.1e}")
    return ok, "worst violation per pair: " + ", ".join(parts)


def criterion_7():
    ok = True
    parts = []
    for spec in (corpus.american_put(), corpus.american_put(rate=0.05), corpus.coupled_arctan(),
                 corpus.coupled_linear()):
        grid = problem_grid(spec, 0.0, 2.5, 101, m_max=256)
        cfg = PicardConfig(h=spec.T)
        pic = picard_global_solve(spec, grid, cfg)
        obs = solve_obstacle(spec, grid)
        diff = float(np.max(np.abs(pic.u.values - obs.u.values)))
        ok &= pic.converged and diff <= 2 * (obs.stop_tol + cfg.inner_tol)
        ok &= all(s.factor <= 0.5 for s in pic.slabs)
        parts.append(f"k={spec.k} {diff:.1e} (max factor {max(s.factor for s in pic.slabs):.2f})")
    return ok, "; ".join(parts)


def criterion_8():
    ok = True
    parts = []
    for spec in (corpus.american_put(), corpus.american_put(rate=0.05), corpus.coupled_linear()):
        grid = problem_grid(spec, 0.0, 2.5, 126, nt=1250, m_max=256)
        res = solve_obstacle(spec, grid)
        ctrl = extreme_controls(spec.g_params, spec.T)[1]
        ens = simulate_gsde(spec, ctrl, 1.0, 250, 1000, seed=1)
        sol = reconstruct_paths(res.u, spec, grid, ens, ctrl, res.residual_sup)
        ok &= sol.min_gap >= -sol.tol_path and sol.min_dA >= -sol.tol_path
        sk = np.abs(sol.skorohod_mean) <= 3 * sol.skorohod_stderr
        ok &= bool(np.all(sk))
        parts.append(f"k={spec.k} gap {sol.min_gap:.1e}, dA {sol.min_dA:.1e}, "
                     f"tol {sol.tol_path:.1e}, skorohod {sol.skorohod_mean[0]:.1e}"
                     f"+-{sol.skorohod_stderr[0]:.1e}")
    return ok, "; ".join(parts)


def criterion_9():
    spec = corpus.american_put()
    rows = refinement_study(spec, problem_grid(spec, 0.0, 2.5, 51), levels=3)
    ratios = [r.ratio for r in rows[1:]]
    ok = len(ratios) == 3 and all(3.0 <= q <= 5.0 for q in ratios)
    return ok, "residual ratios " + ", ".join(f"{q:.3f}" for q in ratios)


def criterion_10():
    put = EXAMPLES / "american_put.toml"
    runs = [
        ["solve", "--problem", put, "--nx", "101"],
        ["simulate", "--problem", put, "--nx", "101", "--n-steps", "50", "--n-paths", "200",
         "--reconstruct", "--moments", "--seed", "7"],
        ["mc-bound", "--problem", EXAMPLES / "g_square.toml", "--n-paths", "5000", "--seed", "7"],
    ]
    checked = 0
    with tempfile.TemporaryDirectory() as tmp:
        for idx, argv in enumerate(runs):
            dirs = [Path(tmp) / f"{idx}_{rep}" for rep in range(2)]
            for d in dirs:
                if cli_main([str(a) for a in argv] + ["--out", str(d)]) != 0:
                    return False, f"run {argv[0]} failed"
            for csv in sorted(dirs[0].glob("*.csv")):
                if csv.read_bytes() != (dirs[1] / csv.name).read_bytes():
                    return False, f"{argv[0]}: {csv.name} differs"
                checked += 1
            man = json.loads((dirs[0] / "manifest.json").read_text())
            if man["outputs"] != json.loads((dirs[1] / "manifest.json").read_text())["outputs"]:
                return False, f"{argv[0]}: manifest hashes differ"
    return True, f"{checked} CSV files byte-identical across repeated runs"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10]


def run_criterion(n: int) -> tuple:
    t0 = time.perf_counter()
    ok, detail = CRITERIA[n - 1]()
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f}s) {detail}"
    return bool(ok), line


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n):
    ok, line = run_criterion(n)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(n) for n in range(1, len(CRITERIA) + 1)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
