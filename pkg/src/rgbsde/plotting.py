"""Figures rendered from the CSV artifacts written by the CLI.

Plotting is kept out of the CLI itself; these helpers read the CSV contract
and are driven by ``docs/examples/plot_run.py``.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .output import read_csv  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_field(field_csv, out_png, component: int = 1, n_curves: int = 5) -> Path:
    """u and l against x at a few time levels of one component."""
    header, data = read_csv(field_csv)
    col = {h: j for j, h in enumerate(header)}
    data = data[data[:, col["i"]] == component] if "i" in col else data
    times = np.unique(data[:, col["t"]])
    picks = times[np.linspace(0, len(times) - 1, min(n_curves, len(times))).round().astype(int)]
    fig, ax = plt.subplots(figsize=(6, 4))
    for t in picks:
        rows = data[data[:, col["t"]] == t]
        ax.plot(rows[:, col["x"]], rows[:, col["u"]], label=f"t = {t:.3g}")
    if "l" in col:
        rows = data[data[:, col["t"]] == picks[0]]
        ax.plot(rows[:, col["x"]], rows[:, col["l"]], "k--", lw=1, label="obstacle")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(fontsize=8)
    return _save(fig, out_png)


def plot_trace(trace_csv, out_png) -> Path:
    """Penalty trace: sup-delta and obstacle violation against m (log-log)."""
    header, data = read_csv(trace_csv)
    col = {h: j for j, h in enumerate(header)}
    m = data[:, col["m"]]
    fig, ax = plt.subplots(figsize=(5, 4))
    for name in ("sup_delta", "sup_neg_part"):
        y = data[:, col[name]]
        ok = np.isfinite(y) & (y > 0)
        ax.loglog(m[ok], y[ok], "o-", label=name)
    ax.set_xlabel("m")
    ax.legend()
    return _save(fig, out_png)


def plot_study(study_csv, out_png) -> Path:
    """Residual sup-norm against dx for a refinement study."""
    header, data = read_csv(study_csv)
    col = {h: j for j, h in enumerate(header)}
    dx, res = data[:, col["dx"]], data[:, col["residual_sup"]]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(dx, res, "o-", label="residual")
    ax.loglog(dx, res[0] * (dx / dx[0]) ** 2, "k:", label="slope 2")
    ax.set_xlabel("dx")
    ax.set_ylabel("sup |residual|")
    ax.legend()
    return _save(fig, out_png)


def plot_scenarios(scenarios_csv, out_png, pde_value: float | None = None) -> Path:
    """Per-control means with 3-stderr bars, optionally against the PDE value."""
    with Path(scenarios_csv).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    labels = [r["control_id"] for r in rows]
    means = np.array([float(r["mean"]) for r in rows])
    errs = np.array([3 * float(r["stderr"]) for r in rows])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(range(len(rows)), means, yerr=errs, fmt="o", capsize=4)
    if pde_value is not None:
        ax.axhline(pde_value, color="k", ls="--", lw=1, label="PDE value")
        ax.legend()
    ax.set_xticks(range(len(rows)), labels)
    ax.set_ylabel("mean")
    return _save(fig, out_png)


def plot_run(run_dir, fig_dir=None) -> list:
    """Render every figure whose CSV exists in ``run_dir``."""
    run_dir = Path(run_dir)
    fig_dir = Path(fig_dir) if fig_dir else run_dir
    fig_dir.mkdir(parents=True, exist_ok=True)
    out = []
    if (run_dir / "field.csv").exists():
        out.append(plot_field(run_dir / "field.csv", fig_dir / "field.png"))
    if (run_dir / "trace.csv").exists():
        out.append(plot_trace(run_dir / "trace.csv", fig_dir / "trace.png"))
    if (run_dir / "study.csv").exists():
        out.append(plot_study(run_dir / "study.csv", fig_dir / "study.png"))
    if (run_dir / "scenarios.csv").exists():
        out.append(plot_scenarios(run_dir / "scenarios.csv", fig_dir / "scenarios.png"))
    return out
