"""TOML problem files.

A problem file is declarative: every coefficient is a table naming a catalog
kind and its params, and nothing in the file is executed. See
``docs/formats.md`` for the full schema. Component indices inside generator
tables (``component = 2``) are 1-based, matching the usual y^1, ..., y^k
labels; they are converted to 0-based on load.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import CoefficientFn, GeneratorFn, GParams, ProblemError, ProblemSpec
from .gexp import CylinderFunctional
from .obstacle import PenaltySchedule
from .picard import PicardConfig
from .sde import ScenarioControl, extreme_controls


class ConfigError(ValueError):
    pass


def _coefficient(raw, where: str) -> CoefficientFn:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return CoefficientFn.constant(float(raw))
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(f"{where}: expected a number or a table with 'kind'")
    try:
        return CoefficientFn(raw["kind"], tuple(raw.get("params", ())))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _generator(raw, k: int, where: str) -> GeneratorFn:
    if raw is None:
        return GeneratorFn.zero()
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return GeneratorFn.constant(float(raw)) if raw else GeneratorFn.zero()
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(f"{where}: expected a number or a table with 'kind'")
    kind = raw["kind"]
    try:
        if kind == "zero":
            return GeneratorFn.zero()
        if kind == "constant":
            return GeneratorFn.constant(raw.get("c", 0.0))
        if kind == "linear":
            y = list(raw.get("y", []))
            if len(y) > k:
                raise ValueError(f"y has {len(y)} coefficients for k = {k}")
            return GeneratorFn.linear(y=y, z=raw.get("z", 0.0), x=raw.get("x", 0.0),
                                      c=raw.get("c", 0.0))
        if kind == "arctan":
            comp = int(raw.get("component", 1))
            if not 1 <= comp <= k:
                raise ValueError(f"component {comp} outside 1..{k}")
            return GeneratorFn.arctan(comp - 1, int(raw.get("power", 1)),
                                      raw.get("scale", 1.0), raw.get("c", 0.0))
        raise ValueError(f"unknown generator kind {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _control(raw, gp: GParams, horizon: float, where: str) -> ScenarioControl:
    if isinstance(raw, str):
        named = {c.label: c for c in extreme_controls(gp, horizon)}
        if raw not in named:
            raise ConfigError(f"{where}: named controls are {sorted(named)}")
        return named[raw]
    try:
        return ScenarioControl(tuple(raw["breakpoints"]), tuple(raw["variances"]),
                               raw.get("label", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass
class ProblemFile:
    """Parsed problem file. Sections other than the problem itself are optional."""

    path: str
    raw: dict
    spec: ProblemSpec | None
    g_params: GParams
    grid: dict = field(default_factory=dict)
    schedule: PenaltySchedule = field(default_factory=PenaltySchedule)
    picard: PicardConfig | None = None
    cylinder: CylinderFunctional | None = None
    gexp: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)

    def controls(self, horizon: float, section: dict | None = None) -> list:
        section = self.gexp if section is None else section
        raws = section.get("controls")
        if raws is None:
            return extreme_controls(self.g_params, horizon)
        return [_control(r, self.g_params, horizon, f"controls[{j}]")
                for j, r in enumerate(raws)]


def parse_problem(raw: dict, path: str = "<memory>") -> ProblemFile:
    try:
        gsec = raw["g"]
        gp = GParams(float(gsec["sigma_lo_sq"]), float(gsec["sigma_hi_sq"]))
    except KeyError as exc:
        raise ConfigError(f"missing [g] key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[g]: {exc}") from exc

    spec = None
    comps = raw.get("component")
    if comps is not None:
        if not isinstance(comps, list) or not comps:
            raise ConfigError("[[component]] must be a non-empty array of tables")
        k = len(comps)
        fwd = raw.get("forward", {})
        try:
            T = float(raw["T"])
        except KeyError as exc:
            raise ConfigError("missing top-level key 'T'") from exc
        fs, gs, ls, lts, phis = [], [], [], [], []
        for i, c in enumerate(comps, start=1):
            where = f"component {i}"
            if "phi" not in c:
                raise ConfigError(f"{where}: missing 'phi'")
            phis.append(_coefficient(c["phi"], f"{where}.phi"))
            ls.append(_coefficient(c.get("l", -1e6), f"{where}.l"))
            lts.append(_coefficient(c.get("l_tilde", c.get("l", -1e6)), f"{where}.l_tilde"))
            fs.append(_generator(c.get("f"), k, f"{where}.f"))
            gs.append(_generator(c.get("g"), k, f"{where}.g"))
        try:
            spec = ProblemSpec(
                k=k, g_params=gp,
                b=_coefficient(fwd.get("b", 0.0), "forward.b"),
                h=_coefficient(fwd.get("h", 0.0), "forward.h"),
                sigma=_coefficient(fwd.get("sigma", 1.0), "forward.sigma"),
                f=fs, g=gs, l=ls, l_tilde=lts, phi=phis, T=T,
                L=float(raw.get("L", 1.0)), name=str(raw.get("name", Path(path).stem)),
            )
        except ProblemError as exc:
            raise ConfigError(str(exc)) from exc

    sched = raw.get("schedule", {})
    try:
        if "m_values" in sched:
            schedule = PenaltySchedule(tuple(sched["m_values"]), sched.get("stop_tol"))
        else:
            schedule = PenaltySchedule.doubling(int(sched.get("j_max", 8)), sched.get("stop_tol"))
    except ValueError as exc:
        raise ConfigError(f"[schedule]: {exc}") from exc

    picard = None
    if "picard" in raw:
        p = dict(raw["picard"])
        p.setdefault("h", spec.T if spec is not None else 1.0)
        p.setdefault("penalty_m", schedule.m_values[-1])
        try:
            picard = PicardConfig(**p)
        except TypeError as exc:
            raise ConfigError(f"[picard]: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"[picard]: {exc}") from exc

    cylinder = None
    gexp = dict(raw.get("gexp", {}))
    if "payoff" in gexp:
        pay = gexp["payoff"]
        try:
            cylinder = CylinderFunctional(tuple(gexp.get("times", (1.0,))), pay["kind"],
                                          tuple(pay.get("params", ())))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"[gexp].payoff: {exc}") from exc
    return ProblemFile(path, raw, spec, gp, dict(raw.get("grid", {})), schedule, picard,
                       cylinder, gexp, dict(raw.get("simulate", {})))


def load_problem(path) -> ProblemFile:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_problem(raw, str(path))
