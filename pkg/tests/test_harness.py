import math

import numpy as np
import pytest

from conftest import bs_put_atm_zero_rate
from rgbsde import corpus
from rgbsde.core import problem_grid
from rgbsde.harness import (OrderingError, binomial_american, black_scholes, check_data_ordering,
                            classical_oracle, comparison_check, reconstruct_paths)
from rgbsde.obstacle import PenaltySchedule, solve_obstacle, solve_penalized
from rgbsde.sde import ScenarioControl, extreme_controls, simulate_gsde


# --- oracles -------------------------------------------------------------------

def test_bs_put_closed_form():
    v = classical_oracle("bs_european", S0=1.0, K=1.0, T=1.0, sigma=0.2, option="put")
    assert v == pytest.approx(bs_put_atm_zero_rate(0.2, 1.0), rel=1e-12)
    assert v == pytest.approx(0.0797, abs=1e-4)


def test_put_call_parity():
    c = black_scholes(1.0, 1.1, 0.5, 0.3, "call", rate=0.03)
    p = black_scholes(1.0, 1.1, 0.5, 0.3, "put", rate=0.03)
    assert c - p == pytest.approx(1.0 - 1.1 * math.exp(-0.015), abs=1e-12)


def test_binomial_zero_rate_matches_european():
    am = classical_oracle("binomial_american", S0=1.0, K=1.0, T=1.0, sigma=0.2, option="put")
    eu = classical_oracle("bs_european", S0=1.0, K=1.0, T=1.0, sigma=0.2, option="put")
    assert abs(am - eu) < 1e-3


def test_binomial_early_exercise_premium():
    am = binomial_american(1.0, 1.0, 1.0, 0.2, "put", rate=0.05)
    eu = black_scholes(1.0, 1.0, 1.0, 0.2, "put", rate=0.05)
    assert am > eu + 1e-3


def test_small_vol_limit():
    assert classical_oracle("bs_european", S0=1.0, K=1.0, T=1.0, sigma=1e-8, option="put") < 1e-7
    assert classical_oracle("binomial_american", S0=1.0, K=1.0, T=1.0, sigma=1e-6,
                            option="put", steps=200) < 1e-5


@pytest.mark.parametrize("kw", [dict(sigma=0.0), dict(T=0.0), dict(sigma=-0.1)])
def test_oracle_rejects_nonpositive(kw):
    params = dict(S0=1.0, K=1.0, T=1.0, sigma=0.2) | kw
    with pytest.raises(ValueError):
        classical_oracle("bs_european", **params)
    with pytest.raises(ValueError):
        classical_oracle("binomial_american", **params)


def test_unknown_oracle():
    with pytest.raises(ValueError):
        classical_oracle("heston", S0=1.0)


# --- path reconstruction ----------------------------------------------------------

def test_constant_solution_paths():
    spec = corpus.constant_problem(0.5)
    grid = problem_grid(spec, 0.0, 3.0, 61, nt=1000, m_max=256)
    u = solve_penalized(spec, 16, grid)
    ctrl = ScenarioControl.constant(0.04, 1.0)
    ens = simulate_gsde(spec, ctrl, 1.0, 100, 50, seed=0)
    sol = reconstruct_paths(u, spec, grid, ens, ctrl)
    assert np.all(sol.Y == 0.5)
    assert np.all(sol.Z == 0.0)
    assert np.all(sol.dA == 0.0)


def test_time_mismatch_rejected(put_spec, put_grid):
    u = solve_penalized(put_spec, 0, put_grid)
    ctrl = ScenarioControl.constant(0.04, 1.0)
    ens = simulate_gsde(put_spec, ctrl, 1.0, 7, 5, seed=0)
    with pytest.raises(ValueError, match="align"):
        reconstruct_paths(u, put_spec, put_grid, ens, ctrl)


@pytest.fixture(scope="module")
def put_paths():
    spec = corpus.american_put(rate=0.05)
    grid = problem_grid(spec, 0.0, 2.5, 126, nt=1250, m_max=256)
    res = solve_obstacle(spec, grid)
    ctrl = ScenarioControl.constant(0.04, 1.0, "hi")
    ens = simulate_gsde(spec, ctrl, 1.0, 250, 1000, seed=1)
    return res, reconstruct_paths(res.u, spec, grid, ens, ctrl, res.residual_sup)


def test_put_path_obstacle_gap(put_paths):
    _, sol = put_paths
    assert sol.min_gap >= -sol.tol_path
    assert sol.min_dA >= -sol.tol_path
    assert np.all(sol.dA >= -sol.tol_steps)
    assert 0.0 < sol.active_fraction < 1.0


def test_put_path_skorohod_reported(put_paths):
    _, sol = put_paths
    s = sol.summary()
    assert set(s) >= {"tol_path", "min_obstacle_gap", "min_dA", "skorohod_mean",
                      "skorohod_stderr", "active_fraction"}
    assert abs(sol.skorohod_mean[0]) <= 3 * sol.skorohod_stderr[0] + sol.tol_path * 1e-2


def test_put_path_z_matches_delta(put_paths):
    res, sol = put_paths
    grid = res.u.grid
    # Z = sigma(x) u_x with sigma(x) = x, checked at t = 0 against a one-sided difference.
    x0 = 1.0
    j = grid.node(x0)
    delta = (res.u.values[0, 0, j + 1] - res.u.values[0, 0, j - 1]) / (2 * grid.dx)
    assert sol.Z[0, 0, 0] == pytest.approx(x0 * delta, rel=1e-9)


def test_unreflected_convex_no_push():
    # dx = 0.01: at dx = 0.02 the interpolation bias in Y (about -8e-5) is
    # comparable to the Monte-Carlo band.
    spec = corpus.european("call")
    grid = problem_grid(spec, 0.0, 2.5, 251, nt=5000)
    u = solve_penalized(spec, 0, grid)
    ctrl = extreme_controls(spec.g_params, 1.0)[1]
    ens = simulate_gsde(spec, ctrl, 1.0, 1250, 1000, seed=0)
    sol = reconstruct_paths(u, spec, grid, ens, ctrl)
    assert abs(sol.a_total_mean[0]) <= 3 * sol.a_total_stderr[0]
    lo = extreme_controls(spec.g_params, 1.0)[0]
    ens_lo = simulate_gsde(spec, lo, 1.0, 1250, 1000, seed=0)
    sol_lo = reconstruct_paths(u, spec, grid, ens_lo, lo)
    # under the lower volatility the K-defect shows up as a positive drift of -K
    assert sol_lo.a_total_mean[0] > 3 * sol_lo.a_total_stderr[0]


# --- comparison -----------------------------------------------------------------

@pytest.fixture(scope="module")
def cmp_grid():
    spec = corpus.american_put(rate=0.05)
    return problem_grid(spec, 0.0, 2.5, 101, m_max=1024)


def test_identical_specs_equal(cmp_grid):
    spec = corpus.american_put(rate=0.05)
    rep = comparison_check(spec, spec, cmp_grid)
    assert rep.max_diff <= 1e-12 and rep.min_diff >= -1e-12
    assert rep.ordered


def test_ordered_corpus(cmp_grid):
    for name, hi, lo in corpus.comparison_corpus():
        rep = comparison_check(hi, lo, cmp_grid, PenaltySchedule.doubling(10))
        assert rep.ordered, name
        assert rep.worst_violation == 0.0 or rep.worst_violation <= rep.tol
        assert all(rep.converged), name


def test_terminal_shift_difference_bounded(cmp_grid):
    name, hi, lo = corpus.comparison_corpus()[0]
    rep = comparison_check(hi, lo, cmp_grid)
    assert rep.max_diff <= 0.1 + rep.tol


def test_unordered_terminal_rejected(cmp_grid):
    spec = corpus.american_put(rate=0.05)
    lower = spec.replace(l=[f.shifted(-0.2) for f in spec.l])
    higher = lower.replace(phi=[f.shifted(0.1) for f in lower.phi])
    with pytest.raises(OrderingError) as exc:
        check_data_ordering(lower, higher, cmp_grid)
    assert exc.value.condition == "(ii)"
    assert "(ii)" in str(exc.value)


def test_unordered_obstacle_rejected(cmp_grid):
    spec = corpus.american_put(rate=0.05)
    lower = spec.replace(l=[f.shifted(-0.1) for f in spec.l])
    with pytest.raises(OrderingError) as exc:
        comparison_check(lower, spec, cmp_grid)
    assert exc.value.condition == "(iii)"


def test_swap_symmetry():
    spec = corpus.coupled_arctan()
    grid = problem_grid(spec, 0.0, 2.5, 101, m_max=256)
    a = solve_obstacle(spec, grid)
    b = solve_obstacle(corpus.swapped(spec), grid)
    assert np.max(np.abs(a.u.values - b.u.values[::-1])) <= 1e-12
