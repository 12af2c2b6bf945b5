"""Domain types shared by every solver: the G-function, coefficient catalogs,
problem specifications, space-time grids and value fields.

All types are frozen dataclasses; arrays handed out by them are never mutated
in place by the library.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

VALIDATION_EPS = 1e-9

# Maximum of d/dy arctan(y**2) = 2y / (1 + y**4), attained at y = 3**(-1/4).
_ARCTAN_SQ_SLOPE = 2.0 * 3.0 ** -0.25 / (1.0 + 3.0 ** -1.0)


class ProblemError(ValueError):
    """Structural defect in a problem specification (names the offending field)."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GParams:
    """Variance band [sigma_lo_sq, sigma_hi_sq] of the G-Brownian motion."""

    sigma_lo_sq: float
    sigma_hi_sq: float

    def __post_init__(self):
        lo, hi = self.sigma_lo_sq, self.sigma_hi_sq
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("variance bounds must be finite")
        if not 0.0 < lo <= hi:
            raise ValueError(f"need 0 < sigma_lo_sq <= sigma_hi_sq, got {lo}, {hi}")

    @property
    def sigma_lo(self) -> float:
        return math.sqrt(self.sigma_lo_sq)

    @property
    def sigma_hi(self) -> float:
        return math.sqrt(self.sigma_hi_sq)

    @property
    def is_linear(self) -> bool:
        return self.sigma_lo_sq == self.sigma_hi_sq


def g_apply(gp: GParams, a):
    """G(a) = (sigma_hi^2 a^+ - sigma_lo^2 a^-) / 2, elementwise for arrays."""
    if np.ndim(a) == 0:
        a = float(a)
        if a >= 0.0:
            return 0.5 * gp.sigma_hi_sq * a
        return 0.5 * gp.sigma_lo_sq * a
    a = np.asarray(a, dtype=float)
    return 0.5 * np.where(a >= 0.0, gp.sigma_hi_sq * a, gp.sigma_lo_sq * a)


# ---------------------------------------------------------------------------
# Coefficient catalogs
# ---------------------------------------------------------------------------

COEFFICIENT_KINDS = (
    "constant",
    "affine",
    "geometric-linear",
    "polynomial",
    "put-payoff",
    "call-payoff",
)


@dataclass(frozen=True)
class CoefficientFn:
    """Catalog function of (t, x).

    Parameter layouts:

    * ``constant``: ``(c,)``
    * ``affine``: ``(a, b)`` for ``a + b x``
    * ``geometric-linear``: ``(s,)`` for ``s x``
    * ``polynomial``: ``(c0, c1, ...)`` for ``sum c_j x**j``
    * ``put-payoff``: ``(K[, scale[, shift]])`` for ``scale (K - x)^+ + shift``
    * ``call-payoff``: ``(K[, scale[, shift]])`` for ``scale (x - K)^+ + shift``
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in COEFFICIENT_KINDS:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        need = {"constant": (1, 1), "affine": (2, 2), "geometric-linear": (1, 1),
                "polynomial": (1, 64), "put-payoff": (1, 3), "call-payoff": (1, 3)}
        lo, hi = need[self.kind]
        if not lo <= len(self.params) <= hi:
            raise ValueError(f"{self.kind} takes {lo}..{hi} params, got {len(self.params)}")

    @classmethod
    def constant(cls, c: float) -> "CoefficientFn":
        return cls("constant", (c,))

    @classmethod
    def affine(cls, a: float, b: float) -> "CoefficientFn":
        return cls("affine", (a, b))

    @classmethod
    def geometric(cls, s: float) -> "CoefficientFn":
        return cls("geometric-linear", (s,))

    @classmethod
    def put(cls, strike: float, scale: float = 1.0) -> "CoefficientFn":
        return cls("put-payoff", (strike, scale))

    @classmethod
    def call(cls, strike: float, scale: float = 1.0) -> "CoefficientFn":
        return cls("call-payoff", (strike, scale))

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        k = self.kind
        if k == "constant":
            return np.full_like(x, p[0])
        if k == "affine":
            return p[0] + p[1] * x
        if k == "geometric-linear":
            return p[0] * x
        if k == "polynomial":
            return np.polynomial.polynomial.polyval(x, p)
        scale = p[1] if len(p) > 1 else 1.0
        shift = p[2] if len(p) > 2 else 0.0
        if k == "put-payoff":
            return scale * np.maximum(p[0] - x, 0.0) + shift
        return scale * np.maximum(x - p[0], 0.0) + shift

    def shifted(self, c: float) -> "CoefficientFn":
        """Same function plus the constant ``c``."""
        if self.kind == "constant":
            return CoefficientFn.constant(self.params[0] + c)
        if self.kind == "affine":
            return CoefficientFn.affine(self.params[0] + c, self.params[1])
        if self.kind == "geometric-linear":
            return CoefficientFn.affine(c, self.params[0])
        if self.kind == "polynomial":
            return CoefficientFn("polynomial", (self.params[0] + c,) + self.params[1:])
        p = self.params
        return CoefficientFn(self.kind, (p[0], p[1] if len(p) > 1 else 1.0,
                                         (p[2] if len(p) > 2 else 0.0) + c))

    @property
    def strike(self) -> float | None:
        if self.kind in ("put-payoff", "call-payoff"):
            return self.params[0]
        return None

    def lipschitz(self, x_min: float, x_max: float) -> float:
        """Lipschitz constant in x on [x_min, x_max]."""
        p = self.params
        if self.kind == "constant":
            return 0.0
        if self.kind == "affine":
            return abs(p[1])
        if self.kind == "geometric-linear":
            return abs(p[0])
        if self.kind == "polynomial":
            dp = np.polynomial.polynomial.polyder(p)
            if len(dp) == 0:
                return 0.0
            xs = np.linspace(x_min, x_max, 4097)
            crit = [r.real for r in np.polynomial.polynomial.polyroots(
                np.polynomial.polynomial.polyder(dp)) if len(dp) > 1
                and abs(r.imag) < 1e-12 and x_min <= r.real <= x_max]
            xs = np.concatenate([xs, crit])
            return float(np.max(np.abs(np.polynomial.polynomial.polyval(xs, dp))))
        return abs(p[1]) if len(p) > 1 else 1.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


GENERATOR_KINDS = ("zero", "constant", "linear", "arctan")


@dataclass(frozen=True)
class GeneratorFn:
    """Catalog generator f(t, x, y, z) with y in R^k and z the own-component scalar.

    Parameter layouts (component indices are 0-based here):

    * ``zero``: ``()``
    * ``constant``: ``(c,)``
    * ``linear``: ``(c, cx, cz, a_0, ..., a_{k-1})`` for
      ``c + cx x + cz z + sum_j a_j y_j``
    * ``arctan``: ``(j, power, scale, c)`` for ``scale * arctan(y_j**power) + c``
      with power 1 or 2

    Only the scalar z of the owning component is ever passed in, so the
    diagonal structure holds by construction.
    """

    kind: str = "zero"
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        n = len(self.params)
        if self.kind == "zero" and n != 0:
            raise ValueError("zero generator takes no params")
        if self.kind == "constant" and n != 1:
            raise ValueError("constant generator takes (c,)")
        if self.kind == "linear" and n < 3:
            raise ValueError("linear generator takes (c, cx, cz, a_0, ...)")
        if self.kind == "arctan":
            if n != 4:
                raise ValueError("arctan generator takes (j, power, scale, c)")
            if self.params[1] not in (1.0, 2.0) or self.params[0] < 0:
                raise ValueError("arctan generator needs power in {1, 2} and j >= 0")

    @classmethod
    def zero(cls) -> "GeneratorFn":
        return cls("zero", ())

    @classmethod
    def constant(cls, c: float) -> "GeneratorFn":
        return cls("constant", (c,))

    @classmethod
    def linear(cls, y: Sequence[float] = (), z: float = 0.0, x: float = 0.0,
               c: float = 0.0) -> "GeneratorFn":
        return cls("linear", (c, x, z, *y))

    @classmethod
    def arctan(cls, j: int, power: int = 1, scale: float = 1.0,
               c: float = 0.0) -> "GeneratorFn":
        return cls("arctan", (j, power, scale, c))

    def __call__(self, t, x, y, z):
        """Evaluate with ``y`` of shape (k, ...) broadcasting against x and z."""
        p = self.params
        if self.kind == "zero":
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(z)).shape)
        if self.kind == "constant":
            return np.full(np.broadcast(np.asarray(x), np.asarray(z)).shape, p[0])
        if self.kind == "linear":
            out = p[0] + p[1] * np.asarray(x) + p[2] * np.asarray(z)
            for j, a in enumerate(p[3:]):
                if a != 0.0:
                    out = out + a * y[j]
            return np.broadcast_to(out, np.broadcast(np.asarray(x), np.asarray(z)).shape) * 1.0
        j, power, scale, c = int(p[0]), p[1], p[2], p[3]
        yj = np.asarray(y[j])
        base = yj * yj if power == 2.0 else yj
        out = scale * np.arctan(base) + c
        return np.broadcast_to(out, np.broadcast(out, np.asarray(x), np.asarray(z)).shape) * 1.0

    def y_dependence(self) -> set[int]:
        """Indices of y components the generator actually reads."""
        if self.kind == "linear":
            return {j for j, a in enumerate(self.params[3:]) if a != 0.0}
        if self.kind == "arctan" and self.params[2] != 0.0:
            return {int(self.params[0])}
        return set()

    def max_index(self) -> int:
        if self.kind == "linear":
            return len(self.params) - 4
        if self.kind == "arctan":
            return int(self.params[0])
        return -1

    def lipschitz(self) -> float:
        """Constant L with |f1 - f2| <= L (|dx| + |dy|_2 + |dz|)."""
        p = self.params
        if self.kind in ("zero", "constant"):
            return 0.0
        if self.kind == "linear":
            return max(abs(p[1]), abs(p[2]), float(np.linalg.norm(p[3:])))
        slope = 1.0 if p[1] == 1.0 else _ARCTAN_SQ_SLOPE
        return abs(p[2]) * slope

    def shifted(self, c: float) -> "GeneratorFn":
        if self.kind == "zero":
            return GeneratorFn.constant(c)
        if self.kind == "constant":
            return GeneratorFn.constant(self.params[0] + c)
        if self.kind == "linear":
            return GeneratorFn("linear", (self.params[0] + c,) + self.params[1:])
        return GeneratorFn("arctan", self.params[:3] + (self.params[3] + c,))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


@dataclass(frozen=True)
class ProblemSpec:
    """k-dimensional Markovian reflected problem with a scalar forward state."""

    k: int
    g_params: GParams
    b: CoefficientFn
    h: CoefficientFn
    sigma: CoefficientFn
    f: tuple
    g: tuple
    l: tuple
    l_tilde: tuple
    phi: tuple
    T: float
    L: float
    name: str = ""

    def __post_init__(self):
        for name in ("f", "g", "l", "l_tilde", "phi"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        check_structure(self)

    def replace(self, **changes) -> "ProblemSpec":
        from dataclasses import replace

        return replace(self, **changes)

    def is_decoupled(self) -> bool:
        """True when every generator only reads its own y component."""
        for i in range(self.k):
            for gen in (self.f[i], self.g[i]):
                if gen.y_dependence() - {i}:
                    return False
        return True

    def strikes(self) -> list[float]:
        out = []
        for fn in (*self.phi, *self.l):
            if fn.strike is not None:
                out.append(fn.strike)
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "k": self.k,
            "T": self.T,
            "L": self.L,
            "g_params": {"sigma_lo_sq": self.g_params.sigma_lo_sq,
                         "sigma_hi_sq": self.g_params.sigma_hi_sq},
            "b": self.b.to_dict(),
            "h": self.h.to_dict(),
            "sigma": self.sigma.to_dict(),
            "components": [
                {"f": self.f[i].to_dict(), "g": self.g[i].to_dict(),
                 "l": self.l[i].to_dict(), "l_tilde": self.l_tilde[i].to_dict(),
                 "phi": self.phi[i].to_dict()}
                for i in range(self.k)
            ],
        }


def check_structure(spec: ProblemSpec) -> None:
    """Raise ProblemError naming the first structurally inconsistent field."""
    if not isinstance(spec.k, int) or spec.k < 1:
        raise ProblemError("k", f"must be an integer >= 1, got {spec.k!r}")
    if not (spec.T > 0 and math.isfinite(spec.T)):
        raise ProblemError("T", f"must be positive and finite, got {spec.T}")
    if not (spec.L > 0 and math.isfinite(spec.L)):
        raise ProblemError("L", f"must be positive and finite, got {spec.L}")
    for name in ("b", "h", "sigma"):
        if not isinstance(getattr(spec, name), CoefficientFn):
            raise ProblemError(name, "must be a CoefficientFn")
    for name, typ in (("f", GeneratorFn), ("g", GeneratorFn), ("l", CoefficientFn),
                      ("l_tilde", CoefficientFn), ("phi", CoefficientFn)):
        seq = getattr(spec, name)
        if len(seq) != spec.k:
            raise ProblemError(name, f"has {len(seq)} entries but k = {spec.k}")
        for item in seq:
            if not isinstance(item, typ):
                raise ProblemError(name, f"entries must be {typ.__name__}")
    for name in ("f", "g"):
        for i, gen in enumerate(getattr(spec, name)):
            if gen.max_index() >= spec.k:
                raise ProblemError(f"{name}[{i + 1}]",
                                   f"reads y component {gen.max_index() + 1} > k = {spec.k}")
            if gen.kind == "linear" and len(gen.params) - 3 not in (0, spec.k):
                raise ProblemError(f"{name}[{i + 1}]",
                                   f"linear y-coefficients must have length k = {spec.k}")


# ---------------------------------------------------------------------------
# Grid and value fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Uniform space-time lattice; the explicit CFL bound is enforced on creation.

    ``sigma_hi_sq`` is the largest variance the grid must resolve,
    ``dt * sigma_hi_sq / dx**2 <= 1/2``.
    """

    x_min: float
    x_max: float
    nx: int
    nt: int
    T: float
    sigma_hi_sq: float

    def __post_init__(self):
        if self.nx < 3:
            raise GridError(f"nx must be >= 3, got {self.nx}")
        if self.nt < 1:
            raise GridError(f"nt must be >= 1, got {self.nt}")
        if not self.x_max > self.x_min:
            raise GridError("x_max must exceed x_min")
        if not self.T > 0:
            raise GridError("T must be positive")
        if self.cfl_number > 0.5 + 1e-12:
            raise GridError(
                f"explicit scheme unstable: dt*sigma_hi_sq/dx^2 = {self.cfl_number:.4g} > 1/2; "
                f"use nt >= {min_time_steps(self.T, self.dx, self.sigma_hi_sq)}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dt(self) -> float:
        return self.T / self.nt

    @property
    def cfl_number(self) -> float:
        return self.dt * self.sigma_hi_sq / self.dx ** 2

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.nt + 1)

    def level(self, t: float) -> int:
        """Time index of ``t``; raises if ``t`` is off the lattice or outside [0, T]."""
        if t < -1e-12 or t > self.T * (1 + 1e-12):
            raise GridError(f"time {t} outside grid horizon [0, {self.T}]")
        n = t / self.dt
        idx = int(round(n))
        if abs(n - idx) > 1e-6:
            raise GridError(f"time {t} is not a grid level (dt = {self.dt})")
        return idx

    def node(self, x: float) -> int:
        j = (x - self.x_min) / self.dx
        idx = int(round(j))
        if abs(j - idx) > 1e-6 or not 0 <= idx < self.nx:
            raise GridError(f"x = {x} is not a grid node")
        return idx

    def refined(self, levels: int = 1) -> "Grid":
        """Halve dx ``levels`` times keeping dt/dx^2 fixed."""
        f = 2 ** levels
        return Grid(self.x_min, self.x_max, (self.nx - 1) * f + 1, self.nt * f * f,
                    self.T, self.sigma_hi_sq)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "nx": self.nx, "nt": self.nt,
                "T": self.T, "dx": self.dx, "dt": self.dt, "sigma_hi_sq": self.sigma_hi_sq}


def min_time_steps(T: float, dx: float, diffusion: float, m_max: float = 0.0) -> int:
    """Smallest nt with dt*diffusion/dx^2 <= 1/2 and dt*m_max <= 1."""
    nt = math.ceil(2.0 * T * diffusion / dx ** 2 * (1 - 1e-12))
    if m_max > 0:
        nt = max(nt, math.ceil(T * m_max * (1 - 1e-12)))
    return max(nt, 1)


def default_bounds(x0: float, sigma_hi: float, T: float,
                   strikes: Sequence[float] = ()) -> tuple[float, float]:
    """x0 -/+ 6 sigma_hi max(1, |x0|) sqrt(T), widened so every strike sits inside."""
    half = 6.0 * sigma_hi * max(1.0, abs(x0)) * math.sqrt(T)
    lo, hi = x0 - half, x0 + half
    margin = 0.25 * half
    for K in strikes:
        lo = min(lo, K - margin)
        hi = max(hi, K + margin)
    return lo, hi


def diffusion_bound(spec: ProblemSpec, x: np.ndarray) -> float:
    """Largest effective diffusion sigma_hi^2 * sigma(x)^2 on the nodes (for the CFL check)."""
    s = spec.sigma(0.0, x)
    return float(spec.g_params.sigma_hi_sq * np.max(s * s))


def problem_grid(spec: ProblemSpec, x_min: float, x_max: float, nx: int,
                 nt: int | None = None, m_max: float = 0.0) -> Grid:
    """Grid for the PDE solvers; picks the smallest stable nt when ``nt`` is None."""
    xs = np.linspace(x_min, x_max, nx)
    dx = (x_max - x_min) / (nx - 1)
    diff = max(diffusion_bound(spec, xs), spec.g_params.sigma_hi_sq)
    if nt is None:
        nt = min_time_steps(spec.T, dx, diff, m_max)
    return Grid(x_min, x_max, nx, nt, spec.T, diff)


@dataclass(frozen=True)
class ValueField:
    """k-component field ``values[i, n, j]`` = u^i(t_n, x_j)."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or v.shape[1:] != (self.grid.nt + 1, self.grid.nx):
            raise ValueError(f"field shape {v.shape} does not match grid "
                             f"({self.grid.nt + 1}, {self.grid.nx})")
        if not np.all(np.isfinite(v)):
            raise ValueError("value field has non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> int:
        return self.values.shape[0]

    def at(self, i: int, t: float, x) -> np.ndarray:
        """Linear interpolation in x of component i at grid time t."""
        return np.interp(x, self.grid.x, self.values[i, self.grid.level(t)])

    def initial(self, i: int = 0) -> np.ndarray:
        return self.values[i, 0]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class AssumptionCheck:
    name: str
    passed: bool | None
    detail: str
    value: float | None = None


@dataclass
class ValidationReport:
    problem: str
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if c.passed is False]

    def get(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "ok": self.ok,
            "checks": [
                {"name": c.name,
                 "status": "n/a" if c.passed is None else ("pass" if c.passed else "fail"),
                 "detail": c.detail, "value": c.value}
                for c in self.checks
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


def _pair_quotient(xs: np.ndarray, vals: np.ndarray) -> float:
    dx = np.abs(xs[:, None] - xs[None, :])
    dv = np.abs(vals[:, None] - vals[None, :])
    mask = dx > 0
    return float(np.max(dv[mask] / dx[mask])) if mask.any() else 0.0


def _generator_quotient(gen: GeneratorFn, k: int, x_lo: float, x_hi: float,
                        y_scale: float, rng: np.random.Generator, n: int) -> float:
    x1 = rng.uniform(x_lo, x_hi, n)
    y1 = rng.uniform(-y_scale, y_scale, (k, n))
    z1 = rng.uniform(-y_scale, y_scale, n)
    best = 0.0
    for step in (1e-3, 1e-1, 1.0, 10.0):
        dxs = rng.normal(0, step, n)
        dys = rng.normal(0, step, (k, n))
        dzs = rng.normal(0, step, n)
        x2, y2, z2 = x1 + dxs, y1 + dys, z1 + dzs
        df = np.abs(gen(0.0, x1, y1, z1) - gen(0.0, x2, y2, z2))
        denom = np.abs(dxs) + np.linalg.norm(dys, axis=0) + np.abs(dzs)
        best = max(best, float(np.max(df / denom)))
    return best


def validate_problem(spec: ProblemSpec, grid: Grid, n_samples: int = 200,
                     seed: int = 0) -> ValidationReport:
    """Check the standing assumptions by sampling ``n_samples`` grid points."""
    check_structure(spec)
    rep = ValidationReport(spec.name or "problem")
    idx = np.unique(np.linspace(0, grid.nx - 1, min(n_samples, grid.nx)).round().astype(int))
    xs = grid.x[idx]
    ts = np.unique(np.concatenate([np.linspace(0.0, spec.T, 11), [spec.T]]))
    L = spec.L
    tol_L = L * (1 + VALIDATION_EPS)

    worst = -np.inf
    for i in range(spec.k):
        for t in ts:
            gap = spec.l[i](t, xs) - spec.l_tilde[i](t, xs)
            worst = max(worst, float(np.max(gap)))
    rep.checks.append(AssumptionCheck(
        "obstacle_dominated", worst <= VALIDATION_EPS,
        "l^i(t,x) <= l_tilde^i(t,x) on sampled (t,x)", worst))

    worst = -np.inf
    for i in range(spec.k):
        worst = max(worst, float(np.max(spec.l[i](spec.T, xs) - spec.phi[i](spec.T, xs))))
    rep.checks.append(AssumptionCheck(
        "terminal_dominates_obstacle", worst <= VALIDATION_EPS,
        "l^i(T,x) <= phi^i(x) on sampled x", worst))

    for name in ("b", "h", "sigma"):
        q = _pair_quotient(xs, getattr(spec, name)(0.0, xs))
        rep.checks.append(AssumptionCheck(
            f"lipschitz_{name}", q <= tol_L, f"max sampled quotient of {name} <= L = {L}", q))
    for name in ("phi", "l"):
        q = max(_pair_quotient(xs, fn(spec.T, xs)) for fn in getattr(spec, name))
        rep.checks.append(AssumptionCheck(
            f"lipschitz_{name}", q <= tol_L, f"max sampled quotient of {name} <= L = {L}", q))

    rng = np.random.default_rng(seed)
    y_scale = 1.0 + max(float(np.max(np.abs(fn(spec.T, xs)))) for fn in spec.phi)
    for name in ("f", "g"):
        q = max(_generator_quotient(gen, spec.k, grid.x_min, grid.x_max, y_scale, rng, n_samples)
                for gen in getattr(spec, name))
        rep.checks.append(AssumptionCheck(
            f"lipschitz_{name}", q <= tol_L,
            f"max sampled quotient of {name} in (x, y, z) <= L = {L}", q))

    rep.checks.append(AssumptionCheck(
        "diagonal_z", True, "generators receive only their own z component (catalog)"))
    rep.checks.append(AssumptionCheck(
        "integrability_orders", None, "not applicable (bounded domain)"))
    return rep
