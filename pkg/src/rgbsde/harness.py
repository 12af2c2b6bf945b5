"""Path-level reconstruction of (Y, Z, A), comparison checks and classical oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .core import Grid, ProblemSpec, ValueField
from .obstacle import PenaltySchedule, complementarity_residual, solve_obstacle
from .sde import PathEnsemble, ScenarioControl
from .stencils import first_diff, second_diff


class OrderingError(ValueError):
    """Declared ordering of a comparison pair is violated by the data."""

    def __init__(self, condition: str, message: str):
        self.condition = condition
        super().__init__(f"condition {condition} violated: {message}")


# ---------------------------------------------------------------------------
# Path reconstruction
# ---------------------------------------------------------------------------


@dataclass
class PathSolution:
    """Per-path ledgers of shape (k, n_paths, n_steps [+ 1])."""

    Y: np.ndarray
    Z: np.ndarray
    dA: np.ndarray
    obstacle: np.ndarray
    tol_steps: np.ndarray  # per-step tolerance (k, n_paths, n_steps)
    tol_path: float
    min_gap: float
    min_dA: float
    active_fraction: float
    skorohod_mean: np.ndarray  # per component mean over paths of sum_j (Y_j - l_j) dA_j
    skorohod_stderr: np.ndarray
    a_total_mean: np.ndarray  # per component mean over paths of A_T - A_0
    a_total_stderr: np.ndarray
    tol_parts: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "tol_path": self.tol_path,
            "min_obstacle_gap": self.min_gap,
            "min_dA": self.min_dA,
            "active_fraction": self.active_fraction,
            "skorohod_mean": self.skorohod_mean.tolist(),
            "skorohod_stderr": self.skorohod_stderr.tolist(),
            "a_total_mean": self.a_total_mean.tolist(),
            "a_total_stderr": self.a_total_stderr.tolist(),
            **{f"tol_{k}": v for k, v in self.tol_parts.items()},
        }

    def per_path_extrema(self) -> np.ndarray:
        """Rows (component, path, min gap, min dA, sum dA)."""
        k, n = self.Y.shape[:2]
        gap = (self.Y - self.obstacle).min(axis=2)
        rows = []
        for i in range(k):
            for p in range(n):
                rows.append((i, p, gap[i, p], self.dA[i, p].min(), self.dA[i, p].sum()))
        return np.array(rows)


def _level_stride(grid: Grid, ens: PathEnsemble) -> int:
    if abs(ens.times[-1] - grid.T) > 1e-9 * grid.T or grid.nt % ens.n_steps:
        raise ValueError(f"ensemble time grid ({ens.n_steps} steps to {ens.times[-1]}) "
                         f"does not align with solver grid ({grid.nt} steps to {grid.T})")
    return grid.nt // ens.n_steps


def reconstruct_paths(u: ValueField, spec: ProblemSpec, grid: Grid, ensemble: PathEnsemble,
                      control: ScenarioControl, residual_sup: float | None = None) -> PathSolution:
    """Evaluate Y = u(t, X), Z = sigma D u(t, X) along simulated paths and the A defect.

    dA_j = Y_j - Y_{j+1} - f dt - g d<B> + Z dB. Each step carries the tolerance

        tol_j = 2 (dx^2 / 8) max|D2 u| + |Gamma_j| |dB_j^2 - d<B>_j| / 2
                + |D3 u| |dX_j|^3 / 6 + residual_sup * dt

    (interpolation error of the two Y values, Ito remainder with Gamma the
    local sigma^2 D2 u, third-order Taylor term, scheme defect) and
    ``tol_path`` is its maximum.
    """
    stride = _level_stride(grid, ensemble)
    if residual_sup is None:
        residual_sup = complementarity_residual(u, spec, grid).sup
    x = grid.x
    dx = grid.dx
    X = ensemble.states
    n_paths, n_steps = X.shape[0], X.shape[1] - 1
    k = spec.k
    levels = np.arange(n_steps + 1) * stride
    times = levels * grid.dt
    vals = u.values[:, levels]  # (k, n_steps+1, nx)
    d1 = first_diff(vals, dx)
    d2 = second_diff(vals, dx)
    d3 = np.zeros_like(vals)
    d3[..., 1:-1] = (d2[..., 2:] - d2[..., :-2]) / (2 * dx)

    Y = np.empty((k, n_paths, n_steps + 1))
    Z = np.empty_like(Y)
    obst = np.empty_like(Y)
    absd2 = np.empty_like(Y)
    absd3 = np.empty_like(Y)
    for j in range(n_steps + 1):
        xj = X[:, j]
        sig = spec.sigma(times[j], xj)
        # Largest curvature among the nodes bracketing the step.
        lo = np.minimum(xj, X[:, min(j + 1, n_steps)])
        hi = np.maximum(xj, X[:, min(j + 1, n_steps)])
        ilo = np.clip(np.floor((lo - grid.x_min) / dx).astype(int), 0, grid.nx - 1)
        ihi = np.clip(np.ceil((hi - grid.x_min) / dx).astype(int), 0, grid.nx - 1)
        for i in range(k):
            Y[i, :, j] = np.interp(xj, x, vals[i, j])
            Z[i, :, j] = sig * np.interp(xj, x, d1[i, j])
            obst[i, :, j] = spec.l[i](times[j], xj)
            a2 = np.abs(d2[i, j])
            a3 = np.abs(d3[i, j])
            width = int(np.max(ihi - ilo)) + 1
            win2 = np.lib.stride_tricks.sliding_window_view(np.pad(a2, (0, width)), width + 1)
            win3 = np.lib.stride_tricks.sliding_window_view(np.pad(a3, (0, width)), width + 1)
            absd2[i, :, j] = (sig * sig) * win2.max(axis=1)[ilo]
            absd3[i, :, j] = win3.max(axis=1)[ilo]

    dt = ensemble.times[1] - ensemble.times[0]
    dA = np.empty((k, n_paths, n_steps))
    for j in range(n_steps):
        t = times[j]
        xj = X[:, j]
        yvec = Y[:, :, j]
        for i in range(k):
            fi = spec.f[i](t, xj, yvec, Z[i, :, j])
            gi = spec.g[i](t, xj, yvec, Z[i, :, j])
            dA[i, :, j] = (Y[i, :, j] - Y[i, :, j + 1] - fi * dt - gi * ensemble.dqv[j]
                           + Z[i, :, j] * ensemble.db[:, j])

    interp = 2.0 * dx * dx / 8.0 * float(np.max(np.abs(d2)))
    dX = np.abs(np.diff(X, axis=1))[None]
    ito = 0.5 * absd2[:, :, :-1] * np.abs(ensemble.db ** 2 - ensemble.dqv[None, :])[None]
    third = absd3[:, :, :-1] * dX ** 3 / 6.0
    tol_steps = interp + ito + third + residual_sup * dt
    tol_path = float(np.max(tol_steps))

    gap = Y - obst
    skor = np.sum(gap[:, :, :-1] * dA, axis=2)
    return PathSolution(
        Y=Y, Z=Z, dA=dA, obstacle=obst, tol_steps=tol_steps, tol_path=tol_path,
        min_gap=float(gap.min()), min_dA=float(dA.min()),
        active_fraction=float(np.mean(gap[:, :, :-1] <= tol_path)),
        skorohod_mean=skor.mean(axis=1),
        skorohod_stderr=skor.std(axis=1, ddof=1) / math.sqrt(n_paths),
        a_total_mean=dA.sum(axis=2).mean(axis=1),
        a_total_stderr=dA.sum(axis=2).std(axis=1, ddof=1) / math.sqrt(n_paths),
        tol_parts={"interp": interp, "ito_max": float(ito.max()),
                   "third_max": float(third.max()), "scheme": residual_sup * dt},
    )


# ---------------------------------------------------------------------------
# Comparison
# ---------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    tol: float
    worst_violation: float  # max of (u_lo - u_hi)^+ over nodes
    max_diff: float  # max of u_hi - u_lo
    min_diff: float
    m_final: tuple
    converged: tuple

    @property
    def ordered(self) -> bool:
        return self.worst_violation <= self.tol

    def to_dict(self) -> dict:
        return {"tol": self.tol, "worst_violation": self.worst_violation,
                "max_diff": self.max_diff, "min_diff": self.min_diff,
                "ordered": self.ordered, "m_final": list(self.m_final),
                "converged": list(self.converged)}


def check_data_ordering(spec_hi: ProblemSpec, spec_lo: ProblemSpec, grid: Grid) -> None:
    """Sampled check of xi >= xi_bar (ii) and S >= S_bar (iii); raises OrderingError."""
    if spec_hi.k != spec_lo.k:
        raise OrderingError("structure", f"k differs ({spec_hi.k} vs {spec_lo.k})")
    x = grid.x
    for i in range(spec_hi.k):
        d = spec_lo.phi[i](spec_hi.T, x) - spec_hi.phi[i](spec_hi.T, x)
        if np.max(d) > 1e-12:
            j = int(np.argmax(d))
            raise OrderingError("(ii)", f"terminal of component {i + 1} below the lower "
                                        f"problem's at x = {x[j]:.6g} by {d[j]:.3g}")
        for t in np.linspace(0.0, spec_hi.T, 11):
            d = spec_lo.l[i](t, x) - spec_hi.l[i](t, x)
            if np.max(d) > 1e-12:
                j = int(np.argmax(d))
                raise OrderingError("(iii)", f"obstacle of component {i + 1} below the lower "
                                             f"problem's at (t, x) = ({t:.6g}, {x[j]:.6g})")


def comparison_check(spec_hi: ProblemSpec, spec_lo: ProblemSpec, grid: Grid,
                     schedule: PenaltySchedule | None = None) -> ComparisonReport:
    """Solve both problems and measure the nodewise ordering u_hi >= u_lo - 10 stop_tol.

    The generator condition (i) is trusted as declared by the caller.
    """
    check_data_ordering(spec_hi, spec_lo, grid)
    schedule = schedule or PenaltySchedule()
    hi = solve_obstacle(spec_hi, grid, schedule)
    lo = solve_obstacle(spec_lo, grid, schedule)
    diff = hi.u.values - lo.u.values
    tol = 10.0 * max(hi.stop_tol, lo.stop_tol)
    return ComparisonReport(tol, float(max(0.0, -diff.min())), float(diff.max()),
                            float(diff.min()), (hi.m_final, lo.m_final),
                            (hi.converged, lo.converged))


# ---------------------------------------------------------------------------
# Classical oracles
# ---------------------------------------------------------------------------


def black_scholes(S0: float, K: float, T: float, sigma: float, option: str = "put",
                  rate: float = 0.0) -> float:
    if sigma <= 0 or T <= 0:
        raise ValueError("volatility and maturity must be positive")
    sd = sigma * math.sqrt(T)
    d1 = (math.log(S0 / K) + (rate + 0.5 * sigma * sigma) * T) / sd
    d2 = d1 - sd
    disc = math.exp(-rate * T)
    if option == "call":
        return S0 * norm.cdf(d1) - K * disc * norm.cdf(d2)
    if option == "put":
        return K * disc * norm.cdf(-d2) - S0 * norm.cdf(-d1)
    raise ValueError(f"unknown option type {option!r}")


def binomial_american(S0: float, K: float, T: float, sigma: float, option: str = "put",
                      rate: float = 0.0, steps: int = 2000) -> float:
    """Cox-Ross-Rubinstein tree with early exercise at every node."""
    if sigma <= 0 or T <= 0:
        raise ValueError("volatility and maturity must be positive")
    if option not in ("put", "call"):
        raise ValueError(f"unknown option type {option!r}")
    dt = T / steps
    up = math.exp(sigma * math.sqrt(dt))
    down = 1.0 / up
    growth = math.exp(rate * dt)
    p = (growth - down) / (up - down)
    disc = 1.0 / growth
    sign = 1.0 if option == "call" else -1.0
    j = np.arange(steps + 1)
    prices = S0 * up ** (steps - 2 * j)
    values = np.maximum(sign * (prices - K), 0.0)
    for n in range(steps - 1, -1, -1):
        prices = prices[:-1] * down
        values = disc * (p * values[:-1] + (1 - p) * values[1:])
        values = np.maximum(values, sign * (prices - K))
    return float(values[0])


def classical_oracle(kind: str, **params) -> float:
    """``binomial_american`` (CRR, 2000 steps) or ``bs_european``; zero rate unless given."""
    params.setdefault("rate", 0.0)
    if kind == "bs_european":
        return black_scholes(**params)
    if kind == "binomial_american":
        params.setdefault("steps", 2000)
        return binomial_american(**params)
    raise ValueError(f"unknown oracle {kind!r}")
