"""Penalized fully nonlinear PDE system and its obstacle-problem limit.

Each component solves

    d_t u^i + F^i(D2 u^i, D u^i, u, x, t) + m (u^i - l^i)^- = 0,   u^i(T) = phi^i,

with F^i(A, p, r, x, t) = G(sigma^2 A + 2 p h + 2 g^i(t, x, r, sigma p)) + b p
+ f^i(t, x, r, sigma p). Time stepping is explicit and backward from T. One
step applies the F^i update using the level n+1 values (including the coupling
vector r), then the penalty update ``v + dt m (l - v)^+``. Each of the two
updates is monotone on its own: the first under the CFL bound, the second
whenever ``dt * m <= 1``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import GridError, Grid, ProblemSpec, ValueField, g_apply
from .stencils import first_diff, second_diff


class PenaltyStabilityError(ValueError):
    pass


@dataclass(frozen=True)
class PenaltySchedule:
    """Increasing penalty parameters; ``stop_tol=None`` means 1e-4 (1 + sup|phi|)."""

    m_values: tuple = tuple(2 ** j for j in range(9))
    stop_tol: float | None = None

    def __post_init__(self):
        m = tuple(int(v) for v in self.m_values)
        object.__setattr__(self, "m_values", m)
        if not m or m[0] <= 0 or any(b <= a for a, b in zip(m, m[1:])):
            raise ValueError("penalty values must be positive and strictly increasing")
        if self.stop_tol is not None and self.stop_tol < 0:
            raise ValueError("stop_tol must be non-negative")

    @classmethod
    def doubling(cls, j_max: int = 8, stop_tol: float | None = None) -> "PenaltySchedule":
        return cls(tuple(2 ** j for j in range(j_max + 1)), stop_tol)

    @property
    def j_max(self) -> int:
        return len(self.m_values) - 1

    def resolve_tol(self, spec: ProblemSpec, grid: Grid) -> float:
        if self.stop_tol is not None:
            return self.stop_tol
        sup_phi = max(float(np.max(np.abs(p(spec.T, grid.x)))) for p in spec.phi)
        return 1e-4 * (1.0 + sup_phi)


@dataclass
class TraceEntry:
    m: int
    sup_delta: float  # sup-norm distance to the previous schedule member (nan for the first)
    sup_neg_part: float  # sup of (u^m - l)^-
    min_increment: float  # min of u^m - u^{previous m} (nan for the first)


@dataclass
class SolveResult:
    u: ValueField
    trace: list
    residual: np.ndarray
    residual_sup: float
    converged: bool
    m_final: int
    stop_tol: float
    diagnostics: dict = field(default_factory=dict)

    def value(self, x: float, i: int = 0, t: float = 0.0) -> float:
        return float(self.u.at(i, t, x))


# ---------------------------------------------------------------------------
# Operator
# ---------------------------------------------------------------------------


def _f_eval(spec: ProblemSpec, i: int, A, p, r, x, t, sig, b, h):
    z = sig * p
    a = sig * sig * A + 2.0 * p * h + 2.0 * spec.g[i](t, x, r, z)
    return g_apply(spec.g_params, a) + b * p + spec.f[i](t, x, r, z)


def f_operator(spec: ProblemSpec, i: int, A: float, p: float, r: Sequence[float],
               x: float, t: float) -> float:
    """F^i(A, p, r, x, t) for a scalar state (component index ``i`` is 0-based)."""
    if not 0 <= i < spec.k:
        raise IndexError(f"component {i} outside 0..{spec.k - 1}")
    r = np.asarray(r, dtype=float)
    if r.shape != (spec.k,):
        raise ValueError(f"r must have length k = {spec.k}")
    out = _f_eval(spec, i, float(A), float(p), r, float(x), float(t),
                  float(spec.sigma(t, x)), float(spec.b(t, x)), float(spec.h(t, x)))
    return float(out)


# ---------------------------------------------------------------------------
# Explicit marching
# ---------------------------------------------------------------------------


def effective_cfl(spec: ProblemSpec, grid: Grid) -> float:
    s = spec.sigma(0.0, grid.x)
    return float(grid.dt * spec.g_params.sigma_hi_sq * np.max(s * s) / grid.dx ** 2)


def _check_grid(spec: ProblemSpec, grid: Grid) -> None:
    if abs(grid.T - spec.T) > 1e-12 * spec.T:
        raise GridError(f"grid horizon {grid.T} differs from problem horizon {spec.T}")
    c = effective_cfl(spec, grid)
    if c > 0.5 + 1e-12:
        raise GridError(f"dt * sigma_hi^2 * max sigma(x)^2 / dx^2 = {c:.4g} > 1/2; refine the time grid")


def _check_penalty(grid: Grid, m_values) -> None:
    m_max = max(m_values)
    if grid.dt * m_max > 1.0 + 1e-12:
        raise PenaltyStabilityError(
            f"dt * m = {grid.dt * m_max:.4g} > 1 breaks monotonicity; "
            f"use a finer time grid with nt >= {int(np.ceil(grid.T * m_max))}")


class _Stepper:
    """Time-homogeneous coefficients sampled once on the nodes."""

    def __init__(self, spec: ProblemSpec, grid: Grid):
        self.spec, self.grid = spec, grid
        x = grid.x
        self.x = x
        self.sig = spec.sigma(0.0, x)
        self.b = spec.b(0.0, x)
        self.h = spec.h(0.0, x)

    def obstacle(self, t: float) -> np.ndarray:
        return np.stack([li(t, self.x) for li in self.spec.l])

    def rhs(self, u: np.ndarray, t: float, frozen: np.ndarray | None = None) -> np.ndarray:
        """F^i evaluated on ``u`` of shape (..., k, nx).

        With ``frozen`` (shape (k, nx)) component i sees
        (frozen_1, ..., u_i, ..., frozen_k) as its coupling vector.
        """
        spec, dx = self.spec, self.grid.dx
        d2 = second_diff(u, dx)
        d1 = first_diff(u, dx)
        out = np.empty_like(u)
        r_all = np.moveaxis(u, -2, 0)
        for i in range(spec.k):
            if frozen is None:
                r = r_all
            else:
                r = np.broadcast_to(frozen, u.shape).copy()
                r[..., i, :] = u[..., i, :]
                r = np.moveaxis(r, -2, 0)
            out[..., i, :] = _f_eval(spec, i, d2[..., i, :], d1[..., i, :], r, self.x, t,
                                     self.sig, self.b, self.h)
        return out

    def march(self, terminal: np.ndarray, n_start: int, n_end: int, m: np.ndarray,
              frozen: np.ndarray | None = None, keep: bool = True,
              on_level: Callable | None = None):
        """Backward from level ``n_end`` to ``n_start``.

        ``terminal`` has shape (k, nx); ``m`` is a 1-d array of penalty values
        solved side by side. Returns an array (len(m), k, levels, nx) with
        level index 0 at ``n_start`` when ``keep``, else the ``n_start`` slice.
        ``frozen`` (shape (k, levels, nx), same level indexing) freezes the
        off-diagonal coupling for Picard sweeps.
        """
        grid = self.grid
        dt = grid.dt
        m = np.asarray(m, dtype=float)
        u = np.broadcast_to(terminal, (len(m),) + terminal.shape).astype(float)
        pen = (dt * m)[:, None, None]
        store = None
        if keep:
            store = np.empty((len(m), terminal.shape[0], n_end - n_start + 1, grid.nx))
            store[:, :, -1] = u
        if on_level is not None:
            on_level(n_end, u)
        for n in range(n_end - 1, n_start - 1, -1):
            t_next = n * dt + dt
            fz = None if frozen is None else frozen[:, n + 1 - n_start]
            v = u + dt * self.rhs(u, t_next, fz)
            if np.any(m > 0):
                v = v + pen * np.maximum(self.obstacle(n * dt) - v, 0.0)
            u = v
            if keep:
                store[:, :, n - n_start] = u
            if on_level is not None:
                on_level(n, u)
        return store if keep else u


def terminal_slice(spec: ProblemSpec, grid: Grid) -> np.ndarray:
    return np.stack([p(spec.T, grid.x) for p in spec.phi])


def solve_penalized(spec: ProblemSpec, m: float, grid: Grid) -> ValueField:
    """Penalized system for one penalty value (m = 0 is the unreflected system)."""
    if m < 0:
        raise ValueError("penalty must be non-negative")
    _check_grid(spec, grid)
    _check_penalty(grid, [m])
    st = _Stepper(spec, grid)
    out = st.march(terminal_slice(spec, grid), 0, grid.nt, np.array([m]))
    return ValueField(out[0], grid)


# ---------------------------------------------------------------------------
# Schedule driver
# ---------------------------------------------------------------------------


class _TraceMonitor:
    def __init__(self, stepper: _Stepper, n_m: int):
        self.st = stepper
        self.delta = np.zeros(n_m)
        self.neg = np.zeros(n_m)
        self.min_inc = np.full(n_m, np.inf)

    def __call__(self, n: int, u: np.ndarray) -> None:
        viol = np.maximum(self.st.obstacle(n * self.st.grid.dt) - u, 0.0)
        self.neg = np.maximum(self.neg, viol.max(axis=(1, 2)))
        if u.shape[0] > 1:
            diff = u[1:] - u[:-1]
            self.delta[1:] = np.maximum(self.delta[1:], np.abs(diff).max(axis=(1, 2)))
            self.min_inc[1:] = np.minimum(self.min_inc[1:], diff.min(axis=(1, 2)))

    def entries(self, m_values) -> list:
        out = []
        for j, m in enumerate(m_values):
            out.append(TraceEntry(int(m), float("nan") if j == 0 else float(self.delta[j]),
                                  float(self.neg[j]),
                                  float("nan") if j == 0 else float(self.min_inc[j])))
        return out


def penalty_trace(spec: ProblemSpec, grid: Grid, m_values: Sequence[int]) -> list:
    """Trace over the full list of penalties, no early stop."""
    _check_grid(spec, grid)
    _check_penalty(grid, m_values)
    st = _Stepper(spec, grid)
    mon = _TraceMonitor(st, len(m_values))
    st.march(terminal_slice(spec, grid), 0, grid.nt, np.asarray(m_values), keep=False,
             on_level=mon)
    return mon.entries(m_values)


def solve_obstacle(spec: ProblemSpec, grid: Grid,
                   schedule: PenaltySchedule | None = None) -> SolveResult:
    """Run the penalty schedule and stop once consecutive solutions agree.

    Schedule members with ``dt * m > 1`` are dropped (recorded in the
    diagnostics); a run that never meets the stop tolerance is returned with
    ``converged=False``.
    """
    schedule = schedule or PenaltySchedule()
    _check_grid(spec, grid)
    t0 = time.perf_counter()
    admissible = [m for m in schedule.m_values if grid.dt * m <= 1.0 + 1e-12]
    if not admissible:
        raise PenaltyStabilityError(f"no schedule member satisfies dt * m <= 1 (dt = {grid.dt})")
    tol = schedule.resolve_tol(spec, grid)
    trace = penalty_trace(spec, grid, admissible)
    stop = None
    for j in range(1, len(trace)):
        if trace[j].sup_delta < tol:
            stop = j
            break
    converged = stop is not None
    last = stop if converged else len(trace) - 1
    m_final = trace[last].m
    u = solve_penalized(spec, m_final, grid)
    res = complementarity_residual(u, spec, grid)
    diagnostics = {
        "n_solves": len(trace) + 1,
        "schedule": list(schedule.m_values),
        "schedule_truncated": len(admissible) < len(schedule.m_values),
        "max_admissible_m": admissible[-1],
        "effective_cfl": effective_cfl(spec, grid),
        "wall_time_s": time.perf_counter() - t0,
    }
    return SolveResult(u, trace[: last + 1], res.field, res.sup, converged, m_final, tol,
                       diagnostics)


# ---------------------------------------------------------------------------
# Residual
# ---------------------------------------------------------------------------


@dataclass
class Residual:
    field: np.ndarray  # (k, nt + 1, nx); zero where not evaluated (edges, terminal level)
    sup: float
    pde_sup: float  # sup of |PDE part| alone over the evaluated nodes


def complementarity_residual(u: ValueField, spec: ProblemSpec, grid: Grid,
                             t_max: float | None = None) -> Residual:
    """min(u - l, -D_t u - F) at interior nodes of levels 0..nt-1.

    D_t is the forward difference (u^{n+1} - u^n)/dt and F is evaluated on
    level n, so for the explicit scheme the PDE part equals
    F(u^{n+1}) - F(u^n): the one-step consistency defect. ``t_max`` limits the
    sup-norms to levels with t_n <= t_max.
    """
    st = _Stepper(spec, grid)
    vals = u.values
    lev = np.moveaxis(vals[:, :-1], 1, 0)  # (nt, k, nx)
    dt = grid.dt
    pde = np.empty_like(lev)
    for n in range(lev.shape[0]):
        pde[n] = -(vals[:, n + 1] - vals[:, n]) / dt - st.rhs(lev[n], n * dt)
    obst = np.stack([st.obstacle(n * dt) for n in range(lev.shape[0])])
    res = np.minimum(lev - obst, pde)
    full = np.zeros_like(vals)
    full[:, :-1, 1:-1] = np.moveaxis(res, 0, 1)[:, :, 1:-1]
    n_hi = grid.nt if t_max is None else min(grid.nt, int(np.floor(t_max / dt + 1e-9)) + 1)
    window = full[:, :n_hi, 1:-1]
    pde_window = np.moveaxis(pde, 0, 1)[:, :n_hi, 1:-1]
    return Residual(full, float(np.max(np.abs(window))) if window.size else 0.0,
                    float(np.max(np.abs(pde_window))) if pde_window.size else 0.0)


# ---------------------------------------------------------------------------
# Refinement study
# ---------------------------------------------------------------------------


@dataclass
class StudyRow:
    level: int
    nx: int
    nt: int
    dx: float
    dt: float
    value: float  # u^0(0, x0)
    residual_sup: float  # PDE residual sup over levels with t <= t_max
    delta: float  # |value - previous value| (nan on level 0)
    ratio: float  # previous residual / this residual (nan on level 0)


def refinement_study(spec: ProblemSpec, grid: Grid, levels: int = 3, x0: float = 1.0,
                     t_max: float | None = None) -> list:
    """Solve the unreflected system on ``grid.refined(0..levels)``.

    Each refinement halves dx and quarters dt, so the CFL number is unchanged.
    The residual is the PDE consistency defect; ``t_max`` defaults to T/2 to
    keep the terminal payoff kink out of the sup-norm.
    """
    if levels < 1:
        raise ValueError("need at least one refinement level")
    t_max = spec.T / 2 if t_max is None else t_max
    rows = []
    for lev in range(levels + 1):
        g = grid.refined(lev)
        u = solve_penalized(spec, 0, g)
        res = complementarity_residual(u, spec, g, t_max=t_max)
        value = float(u.at(0, 0.0, x0))
        prev = rows[-1] if rows else None
        rows.append(StudyRow(
            lev, g.nx, g.nt, g.dx, g.dt, value, res.pde_sup,
            float("nan") if prev is None else abs(value - prev.value),
            float("nan") if prev is None or res.pde_sup == 0 else prev.residual_sup / res.pde_sup,
        ))
    return rows
