"""CSV and JSON artifacts.

Floats are written with ``repr``, the shortest decimal string that round-trips
to the same double, so equal arrays always give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
import platform
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list, np.ndarray]:
    """Header and a float array (all columns must be numeric)."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def versions() -> dict:
    import scipy

    from . import __version__

    return {"rgbsde": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def field_rows(values: np.ndarray, obstacle: np.ndarray, residual: np.ndarray,
               t: np.ndarray, x: np.ndarray, t_stride: int = 1):
    """Rows (i, t, x, u, l, residual) for component-major, time-major order."""
    k, n_levels, _ = values.shape
    levels = list(range(0, n_levels, t_stride))
    if levels[-1] != n_levels - 1:
        levels.append(n_levels - 1)
    for i in range(k):
        for n in levels:
            tn = t[n]
            for j, xj in enumerate(x):
                yield (i + 1, tn, xj, values[i, n, j], obstacle[i, n, j], residual[i, n, j])
