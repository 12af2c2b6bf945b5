"""G-expectations of cylinder functionals.

``evaluate_cylinder`` runs the backward G-heat recursion
``d_t u + G(d_xx u) = 0`` through the observation times; ``sup_over_scenarios``
gives the Monte-Carlo lower bound ``max_P E_P[xi]`` over a finite family of
piecewise-constant volatility scenarios.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import GParams, Grid, GridError, g_apply
from .sde import ScenarioControl, path_normals
from .stencils import second_diff

PAYOFF_KINDS = ("linear", "square", "legs", "clip")


class ArityError(ValueError):
    pass


@dataclass(frozen=True)
class CylinderFunctional:
    """phi(B_{t_1}, ..., B_{t_n}) for n <= 2 with a catalog payoff.

    Payoff layouts:

    * ``linear``: ``(a_1, ..., a_n, c)`` for ``sum a_i x_i + c``
    * ``square``: ``(scale,)`` for ``scale * (x_n - x_{n-1})**2`` (``x_0 = 0``)
    * ``legs``: ``(type_1, K_1, ..., type_n, K_n)`` with type +1 for a call leg
      ``(x - K)^+`` and -1 for a put leg ``(K - x)^+``; the payoff is the product
    * ``clip``: ``(lo, hi, c_0, c_1, ...)`` for ``clip(sum c_j x_n**j, lo, hi)``
    """

    times: tuple
    kind: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        n = len(self.times)
        if n == 0:
            raise ValueError("need at least one observation time")
        if n > 2:
            raise ArityError(f"cylinder functionals support n <= 2 times, got {n}")
        if self.times[0] <= 0 or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("observation times must be positive and strictly increasing")
        if self.kind not in PAYOFF_KINDS:
            raise ValueError(f"unknown payoff kind {self.kind!r}")
        expected = {"linear": n + 1, "square": 1, "legs": 2 * n}.get(self.kind)
        if expected is not None and len(self.params) != expected:
            raise ValueError(f"{self.kind} payoff with n = {n} takes {expected} params")
        if self.kind == "clip" and (len(self.params) < 3 or self.params[0] > self.params[1]):
            raise ValueError("clip payoff takes (lo, hi, c_0, ...) with lo <= hi")

    @property
    def n(self) -> int:
        return len(self.times)

    def __call__(self, *xs):
        """Evaluate with one broadcastable array per observation time."""
        if len(xs) != self.n:
            raise ValueError(f"expected {self.n} arguments")
        xs = [np.asarray(x, dtype=float) for x in xs]
        p = self.params
        if self.kind == "linear":
            out = p[-1]
            for a, x in zip(p[:-1], xs):
                out = out + a * x
            return np.asarray(out, dtype=float)
        if self.kind == "square":
            prev = xs[-2] if self.n == 2 else 0.0
            return p[0] * (xs[-1] - prev) ** 2
        if self.kind == "legs":
            out = 1.0
            for j, x in enumerate(xs):
                typ, K = p[2 * j], p[2 * j + 1]
                out = out * (np.maximum(x - K, 0.0) if typ > 0 else np.maximum(K - x, 0.0))
            return np.asarray(out, dtype=float)
        lo, hi = p[0], p[1]
        return np.clip(np.polynomial.polynomial.polyval(xs[-1], p[2:]), lo, hi)


def _check_finite(terminal: np.ndarray) -> None:
    bad = np.argwhere(~np.isfinite(terminal))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        where = idx[0] if len(idx) == 1 else idx
        raise ValueError(f"terminal value is not finite at node {where}")


def _g_heat_steps(u: np.ndarray, gp: GParams, dx: float, dt: float, steps: int,
                  keep: list | None = None) -> np.ndarray:
    for _ in range(steps):
        u = u + dt * g_apply(gp, second_diff(u, dx))
        if keep is not None:
            keep.append(u)
    return u


def solve_g_heat(terminal, gp: GParams, t_start: float, t_end: float, grid: Grid,
                 keep_levels: bool = True) -> np.ndarray:
    """March ``d_t u + G(d_xx u) = 0`` backward from ``t_end`` to ``t_start``.

    ``terminal`` has the grid's nodes on its last axis (leading axes are a
    batch). Returns levels stacked on a new first axis with index 0 at
    ``t_start`` and the last index at ``t_end``; with ``keep_levels=False``
    only the ``t_start`` values are returned.
    """
    if not t_start < t_end:
        raise ValueError(f"need t_start < t_end, got {t_start}, {t_end}")
    if gp.sigma_hi_sq > grid.sigma_hi_sq * (1 + 1e-12):
        raise GridError("grid was built for a smaller upper variance than gp.sigma_hi_sq")
    terminal = np.asarray(terminal, dtype=float)
    if terminal.shape[-1] != grid.nx:
        raise ValueError(f"terminal has {terminal.shape[-1]} nodes, grid has {grid.nx}")
    _check_finite(terminal)
    steps = grid.level(t_end) - grid.level(t_start)
    if not keep_levels:
        return _g_heat_steps(terminal, gp, grid.dx, grid.dt, steps)
    levels = [terminal]
    _g_heat_steps(terminal, gp, grid.dx, grid.dt, steps, keep=levels)
    return np.stack(levels[::-1])


def _value_at_origin(grid: Grid, values: np.ndarray) -> float:
    return float(np.interp(0.0, grid.x, values))


def evaluate_cylinder(func: CylinderFunctional, gp: GParams, grid: Grid) -> float:
    """G-expectation of ``func`` at time 0 with B_0 = 0."""
    if func.n > 2:
        raise ArityError("n > 2 is unsupported")
    if func.times[-1] > grid.T * (1 + 1e-12):
        raise GridError(f"last observation time {func.times[-1]} exceeds grid horizon {grid.T}")
    x = grid.x
    if func.n == 1:
        u0 = solve_g_heat(func(x), gp, 0.0, func.times[0], grid, keep_levels=False)
        return _value_at_origin(grid, u0)
    t1, t2 = func.times
    # Row a holds the inner problem parameterized by x_1 = x[a].
    inner = func(x[:, None], x[None, :])
    inner_t1 = solve_g_heat(inner, gp, t1, t2, grid, keep_levels=False)
    glued = np.diagonal(inner_t1).copy()
    u0 = solve_g_heat(glued, gp, 0.0, t1, grid, keep_levels=False)
    return _value_at_origin(grid, u0)


def cylinder_field(func: CylinderFunctional, gp: GParams, grid: Grid) -> np.ndarray:
    """Levels of the time-0 solve on [0, t_1] (index 0 at t = 0).

    For n = 1 this is u(t, x) = E[phi(x + B_{t_1} - B_t)]; for n = 2 it is the
    outer solve whose terminal is the inner value glued on the diagonal.
    """
    if func.n > 2:
        raise ArityError("n > 2 is unsupported")
    if func.times[-1] > grid.T * (1 + 1e-12):
        raise GridError(f"last observation time {func.times[-1]} exceeds grid horizon {grid.T}")
    x = grid.x
    if func.n == 1:
        return solve_g_heat(func(x), gp, 0.0, func.times[0], grid)
    t1, t2 = func.times
    inner_t1 = solve_g_heat(func(x[:, None], x[None, :]), gp, t1, t2, grid, keep_levels=False)
    return solve_g_heat(np.diagonal(inner_t1).copy(), gp, 0.0, t1, grid)


@dataclass
class ScenarioRow:
    control_id: str
    mean: float
    stderr: float


@dataclass
class ScenarioBound:
    """Best empirical mean over the controls plus the per-control table."""

    value: float
    best: ScenarioRow
    rows: list

    def table(self) -> list:
        return [(r.control_id, r.mean, r.stderr) for r in self.rows]


def sample_cylinder(func: CylinderFunctional, control: ScenarioControl, n_paths: int,
                    seed: int, stream: int = 0) -> np.ndarray:
    """Exact draws of phi(B_{t_1}, ..., B_{t_n}) under one volatility scenario."""
    xi = path_normals(seed, stream, n_paths, func.n)
    b = np.zeros(n_paths)
    prev = 0.0
    obs = []
    for j, t in enumerate(func.times):
        b = b + np.sqrt(control.integrated_variance(prev, t)) * xi[:, j]
        obs.append(b)
        prev = t
    return func(*obs)


def sup_over_scenarios(func: CylinderFunctional, gp: GParams,
                       controls: Sequence[ScenarioControl], n_paths: int = 10_000,
                       seed: int = 0) -> ScenarioBound:
    """Monte-Carlo lower bound on the G-expectation: max over controls of E_P[phi]."""
    if n_paths < 1000:
        raise ValueError("n_paths must be at least 1000")
    if not controls:
        raise ValueError("need at least one control")
    rows = []
    for idx, control in enumerate(controls):
        control.check_band(gp)
        if control.horizon < func.times[-1] - 1e-12:
            raise ValueError(f"control {idx} ends at {control.horizon} before {func.times[-1]}")
        vals = sample_cylinder(func, control, n_paths, seed, idx)
        rows.append(ScenarioRow(control.label or f"c{idx}", float(vals.mean()),
                                float(vals.std(ddof=1) / np.sqrt(n_paths))))
    best = max(rows, key=lambda r: r.mean)
    return ScenarioBound(best.mean, best, rows)
