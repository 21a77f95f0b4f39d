"""Consistent coupled-mode system for the periodic Laplace problem.

For the harmonic field with surface value ``psi`` and no flux through the
bottom, the amplitudes ``phi_n(x)``, ``n = -2..M``, satisfy

    sum_n A_mn phi_n'' + B_mn phi_n' + C_mn phi_n = 0      (Galerkin rows m)
    sum_n phi_n = psi                                      (surface trace)

The system is truncated by keeping ``N_tot - 1`` Galerkin rows plus the
trace constraint, discretised with fourth-order periodic differences and
solved by sparse LU. Unknowns are ordered station-major, so the matrix is a
block-pentadiagonal circulant with ``N_tot x N_tot`` blocks.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import basis_table
from .eigensystem import ReferenceParams, Station, make_station
from .expansion import ModalField, default_n_quad, gauss_nodes
from .fd import D1_WEIGHTS, D2_WEIGHTS, OFFSETS
from .geometry import StripGeometry

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10


class CcmsError(RuntimeError):
    """Assembly or factorisation failure."""


@dataclass(frozen=True)
class CcmsCoefficients:
    """``A``, ``B``, ``C`` at one station; entry ``[m + 2, n + 2]``."""

    x: float
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def M(self) -> int:
        return self.A.shape[0] - 3


def _coefficients(st: Station, n_quad: int):
    z, w = gauss_nodes(-st.h, st.eta, n_quad)
    T = basis_table(st, z)
    bot = basis_table(st, [-st.h])
    zb = bot.value[:, 0]
    Vw = T.value * w
    A = Vw @ T.value.T
    B = 2.0 * (Vw @ T.dx.T) + st.h_x * np.outer(zb, zb)
    # -N_h . [(Z_n,x, Z_n,z) Z_m] with N_h = (-h_x, -1)
    C = Vw @ (T.dx2 + T.dz2).T + np.outer(zb, st.h_x * bot.dx[:, 0] + bot.dz[:, 0])
    return A, B, C


def assemble_coefficients(
    geometry: StripGeometry,
    params: ReferenceParams,
    M: int,
    x: float,
    n_quad: Optional[int] = None,
    check_quadrature: bool = False,
) -> CcmsCoefficients:
    """Coupling matrices at ``x`` by Gauss-Legendre quadrature over ``[-h, eta]``.

    With ``check_quadrature`` the integrals are repeated with twice the nodes
    and :class:`CcmsError` is raised if any entry moves by more than 1e-9
    relative to the largest entry of its matrix.
    """
    n_quad = n_quad or default_n_quad(M)
    st = make_station(geometry, params, x, M)
    A, B, C = _coefficients(st, n_quad)
    if check_quadrature:
        for name, lo, hi in zip("ABC", (A, B, C), _coefficients(st, 2 * n_quad)):
            scale = max(np.abs(hi).max(), 1e-300)
            if np.abs(hi - lo).max() > 1e-9 * scale:
                raise CcmsError(f"quadrature unresolved for {name} at x={x:.6g} with {n_quad} nodes")
    return CcmsCoefficients(float(x), A, B, C)


def assemble_coefficients_grid(geometry, params, M, grid, n_quad=None, check_quadrature=False):
    """Coefficient arrays of shape ``(Nx, N_tot, N_tot)`` over a grid."""
    coeffs = [assemble_coefficients(geometry, params, M, x, n_quad, check_quadrature) for x in grid]
    return (
        np.stack([c.A for c in coeffs]),
        np.stack([c.B for c in coeffs]),
        np.stack([c.C for c in coeffs]),
    )


@dataclass
class TruncatedSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    grid: np.ndarray
    L: float
    M: int
    kept_rows: np.ndarray
    stats: dict = field(default_factory=dict)

    @property
    def n_tot(self) -> int:
        return self.M + 3

    @property
    def shape(self):
        return self.matrix.shape


def assemble_linear_system(A, B, C, psi, grid, M: int, L: float, dropped_row: Optional[int] = None) -> TruncatedSystem:
    """Discretise the truncated coupled-mode system on a periodic grid.

    ``dropped_row`` is the Galerkin test index ``m`` whose equation is replaced
    by the trace constraint; the default drops the last mode, ``m = M``.
    """
    grid = np.asarray(grid, dtype=float)
    psi = np.asarray(psi, dtype=float)
    nx = grid.size
    N = M + 3
    if nx < 5:
        raise CcmsError("need at least 5 stations for the fourth-order stencil")
    if A.shape != (nx, N, N) or B.shape != A.shape or C.shape != A.shape:
        raise CcmsError(f"coefficient arrays must have shape {(nx, N, N)}")
    if psi.shape != (nx,):
        raise CcmsError("psi must be sampled on the grid")
    dropped = M if dropped_row is None else dropped_row
    if not -2 <= dropped <= M:
        raise CcmsError(f"dropped row {dropped} outside [-2, {M}]")
    kept = np.array([m for m in range(-2, M + 1) if m != dropped])
    ki = kept + 2
    dx = L / nx

    rows, cols, vals = [], [], []
    j = np.arange(nx)[:, None, None]
    r = np.arange(N - 1)[None, :, None]
    n = np.arange(N)[None, None, :]
    row_idx = np.broadcast_to(j * N + r, (nx, N - 1, N))
    Ak, Bk, Ck = A[:, ki, :], B[:, ki, :], C[:, ki, :]
    for o, w1, w2 in zip(OFFSETS, D1_WEIGHTS, D2_WEIGHTS):
        block = Ak * (w2 / dx**2) + Bk * (w1 / dx)
        if o == 0:
            block = block + Ck
        col_idx = np.broadcast_to(((j + o) % nx) * N + n, (nx, N - 1, N))
        rows.append(row_idx.ravel())
        cols.append(col_idx.ravel())
        vals.append(block.ravel())
    # trace constraint closes each station block
    jc = np.repeat(np.arange(nx), N)
    rows.append(jc * N + N - 1)
    cols.append(jc * N + np.tile(np.arange(N), nx))
    vals.append(np.ones(nx * N))

    size = nx * N
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).tocsr()
    rhs = np.zeros(size)
    rhs[N - 1 :: N] = psi
    stats = {"unknowns": size, "equations": size, "nnz": int(mat.nnz), "nx": nx, "n_tot": N}
    return TruncatedSystem(mat, rhs, grid, float(L), M, kept, stats)


def _cond_estimate(mat, lu) -> float:
    """1-norm condition estimate ``||A||_1 ||A^-1||_1``."""
    n = mat.shape[0]
    inv = spla.LinearOperator((n, n), matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="T"))
    return float(spla.norm(mat, 1) * spla.onenormest(inv))


def solve_ccms(system: TruncatedSystem, residual_tol: float = RESIDUAL_TOL) -> ModalField:
    """Sparse LU solve; raises :class:`CcmsError` if the relative residual exceeds the tolerance."""
    t0 = time.perf_counter()
    mat = system.matrix.tocsc()
    try:
        lu = spla.splu(mat)
    except RuntimeError as exc:  # singular factor
        raise CcmsError(f"factorisation failed: {exc}") from exc
    sol = lu.solve(system.rhs)
    # one step of iterative refinement; the Gram blocks are ill-conditioned for large M
    sol = sol + lu.solve(system.rhs - system.matrix @ sol)
    if not np.all(np.isfinite(sol)):
        raise CcmsError(f"solution contains non-finite values (cond1 ~ {_cond_estimate(mat, lu):.1e})")
    scale = max(np.abs(system.rhs).max(), 1e-300)
    residual = float(np.abs(system.matrix @ sol - system.rhs).max() / scale)
    stats = dict(system.stats)
    stats.update(
        fill=int(lu.L.nnz + lu.U.nnz),
        residual=residual,
        wall_ms=round(1e3 * (time.perf_counter() - t0), 3),
    )
    logger.info("ccms solve %s", json.dumps(stats, sort_keys=True))
    if residual > residual_tol:
        raise CcmsError(
            f"relative residual {residual:.2e} exceeds {residual_tol:.0e} (cond1 ~ {_cond_estimate(mat, lu):.1e})"
        )
    N = system.n_tot
    amps = sol.reshape(system.grid.size, N).T
    return ModalField(system.grid, amps, system.L, stats)


def solve_bvp(
    geometry: StripGeometry,
    params: ReferenceParams,
    psi,
    M: int,
    nx: int = 256,
    n_quad: Optional[int] = None,
    dropped_row: Optional[int] = None,
) -> ModalField:
    """Assemble and solve for surface data ``psi`` (callable of x or array on the grid)."""
    t0 = time.perf_counter()
    grid = geometry.grid(nx)
    psi_vals = psi(grid) if callable(psi) else np.asarray(psi, dtype=float)
    A, B, C = assemble_coefficients_grid(geometry, params, M, grid, n_quad)
    system = assemble_linear_system(A, B, C, psi_vals, grid, M, geometry.L, dropped_row)
    system.stats["assembly_ms"] = round(1e3 * (time.perf_counter() - t0), 3)
    return solve_ccms(system)
