"""Finite-difference stencils on the last axis of an array of node values."""

import numpy as np


def second_diff(u: np.ndarray, dx: float) -> np.ndarray:
    """Central second difference; zero at the two edge nodes."""
    d2 = np.zeros_like(u)
    d2[..., 1:-1] = (u[..., 2:] - 2.0 * u[..., 1:-1] + u[..., :-2]) / (dx * dx)
    return d2


def first_diff(u: np.ndarray, dx: float) -> np.ndarray:
    """Central first difference, one-sided at the edges."""
    d1 = np.empty_like(u)
    d1[..., 1:-1] = (u[..., 2:] - u[..., :-2]) / (2.0 * dx)
    d1[..., 0] = (u[..., 1] - u[..., 0]) / dx
    d1[..., -1] = (u[..., -1] - u[..., -2]) / dx
    return d1
