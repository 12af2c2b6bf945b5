"""Forward simulation of dX = b ds + h d<B> + sigma dB under volatility scenarios.

Random numbers: path ``p`` of stream ``stream`` draws its normals from its own
``numpy.random.PCG64`` generator seeded by ``SeedSequence([seed, stream, p])``.
A path therefore never depends on ``n_paths`` or on the other paths, and
ensembles can be split across workers without changing any value. Streams
separate the controls of one run (stream = control index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import GParams, ProblemSpec


def path_rng(seed: int, stream: int, path: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream, path])))


def path_normals(seed: int, stream: int, n_paths: int, n_draws: int) -> np.ndarray:
    """Standard normals of shape (n_paths, n_draws), row p from ``path_rng(seed, stream, p)``."""
    if n_paths < 1 or n_draws < 1:
        raise ValueError("need n_paths >= 1 and n_draws >= 1")
    out = np.empty((n_paths, n_draws))
    for p in range(n_paths):
        out[p] = path_rng(seed, stream, p).standard_normal(n_draws)
    return out


@dataclass(frozen=True)
class ScenarioControl:
    """Piecewise-constant variance path v(s) = variances[j] on [breakpoints[j], breakpoints[j+1])."""

    breakpoints: tuple
    variances: tuple
    label: str = ""

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vs = tuple(float(v) for v in self.variances)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "variances", vs)
        if len(bp) != len(vs) + 1 or not vs:
            raise ValueError("need len(breakpoints) == len(variances) + 1 >= 2")
        if bp[0] != 0.0 or any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must start at 0 and increase strictly")
        if any(v <= 0 or not math.isfinite(v) for v in vs):
            raise ValueError("variances must be positive and finite")

    @classmethod
    def constant(cls, variance: float, horizon: float, label: str = "") -> "ScenarioControl":
        return cls((0.0, horizon), (variance,), label or f"const({variance:g})")

    @classmethod
    def switch(cls, v_before: float, v_after: float, t_switch: float, horizon: float,
               label: str = "") -> "ScenarioControl":
        return cls((0.0, t_switch, horizon), (v_before, v_after),
                   label or f"switch({v_before:g}->{v_after:g}@{t_switch:g})")

    @property
    def horizon(self) -> float:
        return self.breakpoints[-1]

    def check_band(self, gp: GParams) -> None:
        lo, hi = gp.sigma_lo_sq, gp.sigma_hi_sq
        for v in self.variances:
            if not lo * (1 - 1e-12) <= v <= hi * (1 + 1e-12):
                raise ValueError(f"control variance {v} outside band [{lo}, {hi}]")

    def variance_at(self, t):
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.variances) - 1)
        return np.asarray(self.variances)[idx]

    def integrated_variance(self, a: float, b: float) -> float:
        """Integral of v over [a, b]; the last value extends past the horizon."""
        total = 0.0
        bp = self.breakpoints
        for j, v in enumerate(self.variances):
            lo = bp[j]
            hi = bp[j + 1] if j + 1 < len(self.variances) else max(b, bp[j + 1])
            seg = min(hi, b) - max(lo, a)
            if seg > 0:
                total += v * seg
        return total

    def restricted(self, horizon: float) -> "ScenarioControl":
        """Same path cut (or extended) to end at ``horizon``."""
        bp = [b for b in self.breakpoints[:-1] if b < horizon]
        return ScenarioControl(tuple(bp) + (horizon,), self.variances[:len(bp)], self.label)


def extreme_controls(gp: GParams, horizon: float) -> list:
    """Constant lower and upper variance plus a lower-to-upper switch at mid-horizon."""
    return [
        ScenarioControl.constant(gp.sigma_lo_sq, horizon, "lo"),
        ScenarioControl.constant(gp.sigma_hi_sq, horizon, "hi"),
        ScenarioControl.switch(gp.sigma_lo_sq, gp.sigma_hi_sq, horizon / 2, horizon, "switch"),
    ]


@dataclass
class PathEnsemble:
    times: np.ndarray
    states: np.ndarray  # (n_paths, n_steps + 1)
    db: np.ndarray  # increments of B, (n_paths, n_steps)
    dqv: np.ndarray  # increments of <B>, (n_steps,)
    control: ScenarioControl
    seed: int

    @property
    def n_paths(self) -> int:
        return self.states.shape[0]

    @property
    def n_steps(self) -> int:
        return self.states.shape[1] - 1


def simulate_gsde(spec: ProblemSpec, control: ScenarioControl, x0: float, n_steps: int,
                  n_paths: int, seed: int, t_end: float | None = None,
                  stream: int = 0) -> PathEnsemble:
    """Euler scheme under the scenario, d<B> = v dt and dB ~ N(0, v dt)."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    control.check_band(spec.g_params)
    t_end = spec.T if t_end is None else t_end
    dt = t_end / n_steps
    times = np.linspace(0.0, t_end, n_steps + 1)
    # Variance over [t_j, t_j + dt), exact for controls whose breakpoints lie on the lattice.
    dqv = np.array([control.integrated_variance(times[j], times[j + 1]) for j in range(n_steps)])
    xi = path_normals(seed, stream, n_paths, n_steps)
    db = xi * np.sqrt(dqv)
    states = np.empty((n_paths, n_steps + 1))
    states[:, 0] = x0
    x = states[:, 0]
    for j in range(n_steps):
        t = times[j]
        x = x + spec.b(t, x) * dt + spec.h(t, x) * dqv[j] + spec.sigma(t, x) * db[:, j]
        states[:, j + 1] = x
    return PathEnsemble(times, states, db, dqv, control, seed)


@dataclass
class MomentRow:
    x0: float
    delta: float
    moment: float
    stderr: float
    ratio: float
    worst_control: str


@dataclass
class MomentTable:
    rows: list
    slopes: dict = field(default_factory=dict)  # x0 -> log-log slope
    ratio_spread: float = float("nan")  # max/min of moment/(1+|x0|^2) over x0 at the largest delta


def moment_diagnostics(spec: ProblemSpec, x0s: Sequence[float], deltas: Sequence[float],
                       n_paths: int = 4000, seed: int = 0, n_steps: int = 64,
                       controls: Sequence[ScenarioControl] | None = None) -> MomentTable:
    """Worst-scenario estimates of E[sup_{s<=delta} |X_s - x0|^2].

    Each delta is simulated with ``n_steps`` Euler steps; the control family
    defaults to ``extreme_controls`` rescaled to the horizon delta. Common
    random numbers are used across deltas so the slope is not noise-dominated.
    """
    deltas = [float(d) for d in deltas]
    if any(d <= 0 for d in deltas) or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be positive and decreasing")
    rows = []
    for x0 in x0s:
        for d in deltas:
            family = (list(controls) if controls is not None
                      else extreme_controls(spec.g_params, d))
            best = None
            for idx, c in enumerate(family):
                c = c.restricted(d) if controls is not None else c
                ens = simulate_gsde(spec, c, x0, n_steps, n_paths, seed, t_end=d, stream=idx)
                sup2 = np.max((ens.states - x0) ** 2, axis=1)
                est = (float(sup2.mean()), float(sup2.std(ddof=1) / math.sqrt(n_paths)), c.label)
                if best is None or est[0] > best[0]:
                    best = est
            rows.append(MomentRow(x0, d, best[0], best[1], best[0] / (1 + x0 * x0), best[2]))
    table = MomentTable(rows)
    for x0 in x0s:
        sub = [r for r in rows if r.x0 == x0 and r.moment > 0]
        if len(sub) >= 2:
            slope = np.polyfit(np.log([r.delta for r in sub]), np.log([r.moment for r in sub]), 1)[0]
            table.slopes[x0] = float(slope)
    dmax = deltas[0]
    ratios = [r.ratio for r in rows if r.delta == dmax]
    if ratios and min(ratios) > 0:
        table.ratio_spread = max(ratios) / min(ratios)
    return table


@dataclass
class StabilityCheck:
    max_ratio: float  # max over paths of sup_s |X_s - X'_s| / |x0 - x0'|
    bound: float  # exp(3 L T)

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.bound


def coupled_stability(spec: ProblemSpec, control: ScenarioControl, x0: float, x0p: float,
                      n_steps: int, n_paths: int, seed: int) -> StabilityCheck:
    """Pathwise initial-condition sensitivity on shared noise.

    The discrete Gronwall bound exp(3 L T) holds on every path when sigma does
    not depend on x and the scenario variance is at most 2; with state-dependent
    sigma the ratio is a random product and only its moments are controlled.
    """
    if x0 == x0p:
        raise ValueError("initial points must differ")
    a = simulate_gsde(spec, control, x0, n_steps, n_paths, seed)
    b = simulate_gsde(spec, control, x0p, n_steps, n_paths, seed)
    dist = np.max(np.abs(a.states - b.states), axis=1)
    return StabilityCheck(float(np.max(dist) / abs(x0 - x0p)), math.exp(3 * spec.L * spec.T))
