"""Independent direct solver on a boundary-fitted grid.

The strip is mapped to the rectangle ``[0, L) x [0, 1]`` by
``sigma = (z + h(x)) / H(x)``. With ``u(x, sigma) = Phi(x, z)`` the Laplacian
becomes::

    u_xx + 2 s_x u_xs + (s_x^2 + 1/H^2) u_ss + s_xx u_s

where ``s_x = (h_x - sigma H_x) / H`` and
``s_xx = (h_xx - sigma H_xx - 2 s_x H_x) / H``. The no-flux bottom turns
into ``u_s = -H h_x u_x / (1 + h_x^2)`` at ``sigma = 0``. Everything is
discretised by second-order differences, which is deliberately different
from the coupled-mode machinery so the two can cross-check each other.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dtn import DtnTrace
from .geometry import StripGeometry

logger = logging.getLogger(__name__)


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class SigmaGridSolution:
    """Field ``u[i, j]`` at ``x_i`` and ``sigma_j``; the last column is the surface."""

    x: np.ndarray
    sigma: np.ndarray
    u: np.ndarray
    dtn: DtnTrace
    laplace_residual: float
    stats: dict = field(default_factory=dict, compare=False)

    def z(self, geometry: StripGeometry) -> np.ndarray:
        """Physical ``z`` of every node, same shape as ``u``."""
        eta = geometry.eta(self.x)[0]
        h = geometry.h(self.x)[0]
        return -h[:, None] + self.sigma[None, :] * (eta + h)[:, None]


def _central_x(f, dx):
    return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)


def sigma_fd_solve(geometry: StripGeometry, psi, nx: int, nz: int) -> SigmaGridSolution:
    """Solve the Dirichlet-Neumann problem with surface data ``psi``.

    ``psi`` is a callable of ``x`` or an array on the ``nx``-point periodic
    grid. The DtN trace uses a one-sided second-order ``sigma`` derivative
    and a centred ``x`` derivative of ``psi``.
    """
    if nz < 16:
        raise OracleError("need at least 16 points across the strip")
    if nx < 8:
        raise OracleError("need at least 8 points along the strip")
    t0 = time.perf_counter()
    x = geometry.grid(nx)
    dx = geometry.L / nx
    sig = np.linspace(0.0, 1.0, nz)
    ds = sig[1] - sig[0]
    eta, eta_x, eta_xx = geometry.eta(x)
    h, h_x, h_xx = geometry.h(x)
    H, H_x, H_xx = eta + h, eta_x + h_x, eta_xx + h_xx
    if H.min() <= 0:
        raise OracleError("degenerate mapping: H <= 0")
    psi_v = psi(x) if callable(psi) else np.asarray(psi, dtype=float)
    if psi_v.shape != x.shape:
        raise OracleError("psi must be sampled on the oracle grid")

    idx = np.arange(nx * nz).reshape(nx, nz)
    ip, im = np.roll(np.arange(nx), -1), np.roll(np.arange(nx), 1)
    rows, cols, vals = [], [], []

    def put(r, c, v):
        r, c, v = np.broadcast_arrays(r, c, v)
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(v.ravel())

    # interior nodes j = 1 .. nz-2
    J = np.arange(1, nz - 1)[None, :]
    S = sig[None, 1:-1]
    sx = (h_x[:, None] - S * H_x[:, None]) / H[:, None]
    sxx = (h_xx[:, None] - S * H_xx[:, None] - 2.0 * sx * H_x[:, None]) / H[:, None]
    css = sx**2 + 1.0 / H[:, None] ** 2
    I = np.arange(nx)[:, None]
    r = idx[I, J]
    put(r, idx[I, J], -2.0 / dx**2 - 2.0 * css / ds**2)
    put(r, idx[ip[:, None], J], 1.0 / dx**2)
    put(r, idx[im[:, None], J], 1.0 / dx**2)
    put(r, idx[I, J + 1], css / ds**2 + sxx / (2.0 * ds))
    put(r, idx[I, J - 1], css / ds**2 - sxx / (2.0 * ds))
    cross = 2.0 * sx / (4.0 * dx * ds)
    put(r, idx[ip[:, None], J + 1], cross)
    put(r, idx[im[:, None], J - 1], cross)
    put(r, idx[ip[:, None], J - 1], -cross)
    put(r, idx[im[:, None], J + 1], -cross)

    # bottom: (-3u0 + 4u1 - u2)/(2 ds) + c (u0[i+1] - u0[i-1])/(2 dx) = 0
    i = np.arange(nx)
    c = H * h_x / (1.0 + h_x**2)
    rb = idx[i, 0]
    put(rb, idx[i, 0], -3.0 / (2.0 * ds))
    put(rb, idx[i, 1], 4.0 / (2.0 * ds))
    put(rb, idx[i, 2], -1.0 / (2.0 * ds))
    put(rb, idx[ip, 0], c / (2.0 * dx))
    put(rb, idx[im, 0], -c / (2.0 * dx))

    # surface: Dirichlet
    put(idx[i, nz - 1], idx[i, nz - 1], 1.0)

    n = nx * nz
    mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsc()
    rhs = np.zeros(n)
    rhs[idx[:, nz - 1]] = psi_v
    try:
        sol = spla.spsolve(mat, rhs)
    except RuntimeError as exc:
        raise OracleError(f"factorisation failed: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise OracleError("oracle solution is not finite")
    resid = mat @ sol - rhs
    u = sol.reshape(nx, nz)

    u_s = (3.0 * u[:, -1] - 4.0 * u[:, -2] + u[:, -3]) / (2.0 * ds)
    g = -eta_x * _central_x(psi_v, dx) + (1.0 + eta_x**2) * u_s / H
    interior = resid.reshape(nx, nz)[:, 1:-1]
    stats = {
        "nx": nx,
        "nz": nz,
        "unknowns": n,
        "nnz": int(mat.nnz),
        "wall_ms": round(1e3 * (time.perf_counter() - t0), 3),
    }
    logger.info("oracle solve %s", json.dumps(stats, sort_keys=True))
    return SigmaGridSolution(x, sig, u, DtnTrace(x.copy(), g), float(np.abs(interior).max()), stats)


def write_discrepancy_csv(path, ccms_trace: DtnTrace, oracle_trace: DtnTrace) -> None:
    """Columns ``x, G_ccms, G_oracle, discrepancy`` on a shared grid."""
    if ccms_trace.x.shape != oracle_trace.x.shape:
        raise ValueError("traces live on different grids")
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "G_ccms", "G_oracle", "discrepancy"])
        for xj, a, b in zip(ccms_trace.x, ccms_trace.values, oracle_trace.values):
            w.writerow([f"{xj:.16e}", f"{a:.16e}", f"{b:.16e}", f"{a - b:.16e}"])
