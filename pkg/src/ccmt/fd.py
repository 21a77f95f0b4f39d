"""Fourth-order central differences on a uniform periodic grid."""

import numpy as np
import scipy.sparse as sp

OFFSETS = (-2, -1, 0, 1, 2)
D1_WEIGHTS = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
D2_WEIGHTS = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def _apply(f, weights, axis):
    f = np.asarray(f, dtype=float)
    out = np.zeros_like(f)
    for o, w in zip(OFFSETS, weights):
        if w:
            out += w * np.roll(f, -o, axis=axis)  # roll(-o)[j] = f[j + o]
    return out


def periodic_d1(f, dx: float, axis: int = -1) -> np.ndarray:
    """``(-f[j+2] + 8 f[j+1] - 8 f[j-1] + f[j-2]) / (12 dx)``."""
    return _apply(f, D1_WEIGHTS, axis) / dx


def periodic_d2(f, dx: float, axis: int = -1) -> np.ndarray:
    """``(-f[j+2] + 16 f[j+1] - 30 f[j] + 16 f[j-1] - f[j-2]) / (12 dx^2)``."""
    return _apply(f, D2_WEIGHTS, axis) / (dx * dx)


def periodic_matrix(nx: int, weights, scale: float) -> sp.csr_matrix:
    """Circulant sparse matrix of a 5-point stencil (duplicates summed for tiny nx)."""
    j = np.repeat(np.arange(nx), len(OFFSETS))
    cols = (j + np.tile(OFFSETS, nx)) % nx
    vals = np.tile(np.asarray(weights, dtype=float) * scale, nx)
    return sp.csr_matrix((vals, (j, cols)), shape=(nx, nx))
