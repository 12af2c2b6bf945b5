"""Local fixed-point iteration of the frozen-coupling solution map, stitched
backward over time slabs.

On a slab the map U -> Y^U solves every component as a one-dimensional
penalized problem whose off-diagonal y inputs are frozen at U. The sup-norm
contraction factor of successive iterates is measured; if it exceeds the target
the slab width is halved and the whole partition restarted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Grid, ProblemSpec, ValueField
from .obstacle import _check_grid, _check_penalty, _Stepper, terminal_slice

_FACTOR_FLOOR = 1e-13


@dataclass(frozen=True)
class PicardConfig:
    h: float
    rho: float = 0.5
    max_iter: int = 60
    inner_tol: float = 1e-8
    halving_limit: int = 6
    penalty_m: int = 256
    initial: str = "terminal"  # or "zeros"

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.h <= 0:
            raise ValueError("slab width must be positive")
        if self.max_iter < 1 or self.inner_tol <= 0 or self.halving_limit < 0:
            raise ValueError("invalid iteration limits")
        if self.initial not in ("terminal", "zeros"):
            raise ValueError("initial guess must be 'terminal' or 'zeros'")


class SlabTooWide(RuntimeError):
    def __init__(self, factor: float, log: "PicardLog"):
        self.factor = factor
        self.log = log
        super().__init__(f"measured contraction factor {factor:.3g} exceeds target")


@dataclass
class PicardLog:
    deltas: list = field(default_factory=list)
    factors: list = field(default_factory=list)
    converged: bool = False
    too_wide: bool = False

    @property
    def iterations(self) -> int:
        return len(self.deltas)

    @property
    def certificate(self) -> float:
        return max(self.factors) if self.factors else 0.0


def picard_local_step(spec: ProblemSpec, zeta: np.ndarray, n_start: int, n_end: int,
                      grid: Grid, cfg: PicardConfig, initial: np.ndarray | None = None,
                      terminal_slack: float = 1e-3, raise_too_wide: bool = False):
    """Fixed point of the frozen map on levels ``n_start..n_end``.

    ``zeta`` (shape (k, nx)) is the value at level ``n_end``. Returns the slab
    field (k, levels, nx) and the iteration log. When the measured factor
    exceeds ``cfg.rho`` after three iterations the log is flagged ``too_wide``
    (or ``SlabTooWide`` is raised).
    """
    _check_penalty(grid, [cfg.penalty_m])
    zeta = np.asarray(zeta, dtype=float)
    st = _Stepper(spec, grid)
    obst = st.obstacle(n_end * grid.dt)
    gap = float(np.max(obst - zeta))
    if gap > terminal_slack:
        raise ValueError(f"slab terminal lies {gap:.3g} below the obstacle")
    levels = n_end - n_start + 1
    m = np.array([cfg.penalty_m])
    log = PicardLog()
    if spec.is_decoupled():
        # Frozen inputs are never read, so one evaluation is the fixed point.
        y = st.march(zeta, n_start, n_end, m)[0]
        log.deltas.append(0.0)
        log.converged = True
        return y, log
    if initial is None:
        u = np.repeat(zeta[:, None, :], levels, axis=1)
    else:
        u = np.asarray(initial, dtype=float)
    prev = None
    for it in range(1, cfg.max_iter + 1):
        y = st.march(zeta, n_start, n_end, m, frozen=u)[0]
        delta = float(np.max(np.abs(y - u)))
        log.deltas.append(delta)
        if prev is not None and prev > _FACTOR_FLOOR:
            log.factors.append(delta / prev)
        prev = delta
        u = y
        if delta < cfg.inner_tol:
            log.converged = True
        if (it >= 3 or log.converged) and log.certificate > cfg.rho:
            log.too_wide = True
            if raise_too_wide:
                raise SlabTooWide(log.certificate, log)
            break
        if log.converged:
            break
    return u, log


@dataclass
class SlabReport:
    index: int
    t_start: float
    t_end: float
    h: float
    iterations: int
    factor: float
    sup_delta: float


@dataclass
class PicardResult:
    u: ValueField
    slabs: list
    converged: bool
    h_final: float
    halvings: int
    last_factor: float


def _partition(nt: int, n_h: int) -> list:
    bounds = list(range(nt, 0, -n_h)) + [0]
    return [(lo, hi) for hi, lo in zip(bounds, bounds[1:])]


def picard_global_solve(spec: ProblemSpec, grid: Grid, cfg: PicardConfig) -> PicardResult:
    """Backward slab-by-slab Picard solve, halving the slab width on demand."""
    _check_grid(spec, grid)
    _check_penalty(grid, [cfg.penalty_m])
    h = min(cfg.h, spec.T)
    last_factor = 0.0
    for halvings in range(cfg.halving_limit + 1):
        n_slabs = max(1, int(np.ceil(spec.T / h - 1e-9)))
        n_h = max(1, int(np.ceil(grid.nt / n_slabs)))
        values = np.zeros((spec.k, grid.nt + 1, grid.nx))
        zeta = terminal_slice(spec, grid)
        values[:, -1] = zeta
        slabs = []
        failed = False
        for idx, (lo, hi) in enumerate(_partition(grid.nt, n_h)):
            init = None
            if cfg.initial == "zeros":
                init = np.zeros((spec.k, hi - lo + 1, grid.nx))
            y, log = picard_local_step(spec, zeta, lo, hi, grid, cfg, initial=init,
                                       terminal_slack=np.inf)
            last_factor = log.certificate
            if log.too_wide:
                failed = True
                break
            values[:, lo:hi + 1] = y
            zeta = y[:, 0]
            slabs.append(SlabReport(idx, lo * grid.dt, hi * grid.dt, (hi - lo) * grid.dt,
                                    log.iterations, log.certificate, log.deltas[-1]))
            if not log.converged:
                return PicardResult(ValueField(values, grid), slabs, False, h, halvings,
                                    last_factor)
        if not failed:
            return PicardResult(ValueField(values, grid), slabs, True, h, halvings, last_factor)
        h = h / 2
    return PicardResult(ValueField(values, grid), slabs, False, h * 2, cfg.halving_limit,
                        last_factor)
