"""Enhanced modal expansion of a field: analysis, synthesis and decay fits."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .basis import basis_table
from .eigensystem import ReferenceParams, Station, l2_norm_and_gamma, make_station
from .fd import periodic_d1, periodic_d2
from .geometry import StripGeometry


class QuadratureWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Field:
    """A field given by callables ``value(x, z)`` and ``dz(x, z)``."""

    value: Callable
    dz: Callable


@dataclass(frozen=True)
class ModalField:
    """Modal amplitudes on a uniform periodic grid.

    ``amplitudes[n + 2, j]`` is ``phi_n(x_j)`` for ``n = -2 .. M``.
    """

    grid: np.ndarray
    amplitudes: np.ndarray
    L: float
    stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=float)
        if a.ndim != 2 or a.shape[1] != self.grid.size:
            raise ValueError("amplitudes must have shape (M + 3, Nx)")
        if a.shape[0] < 3:
            raise ValueError("need at least the modes -2, -1, 0")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes contain non-finite values")
        g = np.asarray(self.grid, dtype=float)
        step = self.L / g.size
        if abs(g[0]) > 1e-12 * self.L or np.abs(np.diff(g) - step).max(initial=0.0) > 1e-9 * step:
            raise ValueError("grid must be uniform on [0, L)")
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    @property
    def M(self) -> int:
        return self.amplitudes.shape[0] - 3

    @property
    def n_tot(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def nx(self) -> int:
        return self.grid.size

    @property
    def dx(self) -> float:
        return self.L / self.nx

    def mode(self, n: int) -> np.ndarray:
        return self.amplitudes[n + 2]

    def surface_trace(self) -> np.ndarray:
        """``sum_n phi_n``, the surface value since every ``Z_n(eta) = 1``."""
        return self.amplitudes.sum(axis=0)


def default_n_quad(M: int) -> int:
    return max(64, 4 * M)


def gauss_nodes(a: float, b: float, n: int):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w


def boundary_amplitudes(fld: Field, geometry: StripGeometry, params: ReferenceParams, x):
    """``phi_-2 = h0 (dz - mu0) Phi |_eta`` and ``phi_-1 = h0 dz Phi |_-h``."""
    x = np.asarray(x, dtype=float)
    eta = geometry.eta(x)[0]
    h = geometry.h(x)[0]
    h0 = params.h0
    phi_m2 = h0 * (fld.dz(x, eta) - params.mu0 * fld.value(x, eta))
    phi_m1 = h0 * fld.dz(x, -h)
    return phi_m2, phi_m1


def _project(fld: Field, st: Station, n_quad: int) -> np.ndarray:
    z, w = gauss_nodes(-st.h, st.eta, n_quad)
    xs = np.full_like(z, st.x)
    T = basis_table(st, z)
    phi = np.empty(st.M + 3)
    phi[0] = st.params.h0 * (fld.dz(st.x, st.eta) - st.params.mu0 * fld.value(st.x, st.eta))
    phi[1] = st.params.h0 * fld.dz(st.x, -st.h)
    star = fld.value(xs, z) - phi[0] * T.value[0] - phi[1] * T.value[1]
    norm_sq, _ = l2_norm_and_gamma(np.arange(st.M + 1), st)
    phi[2:] = (T.value[2:] * w) @ star / norm_sq
    return phi


def modal_amplitudes(
    fld: Field,
    geometry: StripGeometry,
    params: ReferenceParams,
    M: int,
    x: float,
    n_quad: Optional[int] = None,
) -> np.ndarray:
    """``phi_0 .. phi_M`` at ``x`` by projecting ``Phi*`` on the eigenfunctions."""
    return analyze_station(fld, geometry, params, M, x, n_quad)[2:]


def analyze_station(fld, geometry, params, M, x, n_quad=None) -> np.ndarray:
    """``phi_-2 .. phi_M`` at one station."""
    n_quad = n_quad or default_n_quad(M)
    st = make_station(geometry, params, x, M)
    phi = _project(fld, st, n_quad)
    check = _project(fld, st, 2 * n_quad)
    if abs(check[2] - phi[2]) > 1e-10:
        warnings.warn(
            f"quadrature unresolved at x={x:.6g}: phi_0 moved by {abs(check[2] - phi[2]):.2e}",
            QuadratureWarning,
            stacklevel=2,
        )
    return phi


def analyze(fld, geometry, params, M, nx: int, n_quad=None) -> ModalField:
    """Modal amplitudes of ``fld`` on the uniform ``nx``-point grid."""
    grid = geometry.grid(nx)
    amps = np.column_stack([analyze_station(fld, geometry, params, M, x, n_quad) for x in grid])
    return ModalField(grid, amps, geometry.L)


def reconstruct(mf: ModalField, geometry: StripGeometry, params: ReferenceParams, x, z) -> np.ndarray:
    """``sum_n phi_n(x) Z_n(z; x)`` at the grid station nearest to ``x``."""
    j = int(np.round(np.mod(x, mf.L) / mf.dx)) % mf.nx
    st = make_station(geometry, params, mf.grid[j], mf.M)
    z = st.check_z(np.atleast_1d(z))
    T = basis_table(st, z)
    return mf.amplitudes[:, j] @ T.value


# ---------------------------------------------------------------------------
# decay diagnostics
# ---------------------------------------------------------------------------


def loglog_slope(n, values, window: Optional[Sequence[float]] = None) -> float:
    """Least-squares slope of ``log(values)`` against ``log(n)`` on ``window``."""
    n = np.asarray(n, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = (n > 0) & (v > 0) & np.isfinite(v)
    if window is not None:
        lo, hi = window
        mask &= (n >= lo) & (n <= hi)
    if mask.sum() < 2:
        raise ValueError(f"degenerate fit window {window}: {int(mask.sum())} usable points")
    slope, _ = np.polyfit(np.log(n[mask]), np.log(v[mask]), 1)
    return float(slope)


@dataclass(frozen=True)
class DecayReport:
    n: np.ndarray
    sup: np.ndarray
    sup_dx: np.ndarray
    sup_dxx: np.ndarray
    c2: np.ndarray
    window: tuple
    slope: float

    def write_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "sup_phi", "sup_dx_phi", "sup_dxx_phi", "c2_norm"])
            for row in zip(self.n, self.sup, self.sup_dx, self.sup_dxx, self.c2):
                w.writerow([int(row[0])] + [f"{v:.16e}" for v in row[1:]])


def decay_diagnostics(mf: ModalField, geometry: StripGeometry, window=(10, 60)) -> DecayReport:
    """Sup norms of ``phi_n`` and its x-derivatives and the C^2 norm
    ``||phi||_inf + h0 ||phi_x||_inf + h0^2 ||phi_xx||_inf`` per mode, with the
    log-log slope of the C^2 norm over ``window`` (modes ``n >= 1`` only)."""
    if mf.nx < 5:
        raise ValueError("need at least 5 stations for the difference stencil")
    a = mf.amplitudes
    h0 = geometry.h0
    sup = np.abs(a).max(axis=1)
    sup_dx = np.abs(periodic_d1(a, mf.dx, axis=1)).max(axis=1)
    sup_dxx = np.abs(periodic_d2(a, mf.dx, axis=1)).max(axis=1)
    c2 = sup + h0 * sup_dx + h0 * h0 * sup_dxx
    n = np.arange(-2, mf.M + 1)
    slope = loglog_slope(n, c2, window)
    return DecayReport(n, sup, sup_dx, sup_dxx, c2, tuple(window), slope)
