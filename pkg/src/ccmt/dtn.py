"""Dirichlet-to-Neumann operator from a modal solution, and its benchmark value.

The DtN operator maps surface data ``psi`` to ``N_eta . grad(Phi)`` at
``z = eta`` with ``N_eta = (-eta_x, 1)``. Because every mode but ``Z_-2``
obeys the surface Robin condition with unit trace, the normal derivative
collapses to a single amplitude::

    G = -eta_x psi_x + (1 + eta_x^2) (phi_-2 / h0 + mu0 psi)
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .basis import surface_gradient_traces
from .eigensystem import ReferenceParams
from .expansion import ModalField
from .fd import periodic_d1
from .geometry import GeometryError, StripGeometry


@dataclass(frozen=True)
class DtnTrace:
    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.x.shape != self.values.shape:
            raise ValueError("x and values must have the same shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("DtN trace contains non-finite values")

    def relative_l2_error(self, reference: "DtnTrace") -> float:
        """``||G - G_ref|| / ||G_ref||`` with the periodic trapezoid rule (uniform weights cancel)."""
        if reference.x.shape != self.x.shape or not np.allclose(reference.x, self.x, rtol=0, atol=1e-12):
            raise ValueError("traces live on different grids")
        return float(np.linalg.norm(self.values - reference.values) / np.linalg.norm(reference.values))

    def mean(self) -> float:
        return float(np.mean(self.values))


def _psi_on_grid(psi, grid):
    vals = psi(grid) if callable(psi) else np.asarray(psi, dtype=float)
    if vals.shape != grid.shape:
        raise ValueError("psi must be sampled on the solution grid")
    return vals


def dtn_from_solution(
    mf: ModalField,
    geometry: StripGeometry,
    params: ReferenceParams,
    psi,
    psi_x=None,
) -> DtnTrace:
    """DtN trace from ``phi_-2`` alone.

    ``psi_x`` defaults to the fourth-order periodic difference of ``psi``,
    the same stencil used by the solver. Pass a callable or array to use an
    analytic derivative instead.
    """
    x = mf.grid
    psi_vals = _psi_on_grid(psi, x)
    if psi_x is None:
        dpsi = periodic_d1(psi_vals, mf.dx)
    else:
        dpsi = _psi_on_grid(psi_x, x)
    _, eta_x, _ = geometry.eta(x)
    g = -eta_x * dpsi + (1.0 + eta_x**2) * (mf.mode(-2) / params.h0 + params.mu0 * psi_vals)
    return DtnTrace(x.copy(), g)


def dtn_direct_trace(mf: ModalField, geometry: StripGeometry, params: ReferenceParams) -> DtnTrace:
    """``N_eta . grad(sum phi_n Z_n)`` at the surface, summed term by term.

    ``d/dx(phi_n Z_n) = phi_n' Z_n + phi_n dZ_n/dx`` with ``Z_n(eta) = 1`` and
    the closed-form surface gradients of every mode. Agrees with
    :func:`dtn_from_solution` up to the difference between ``sum phi_n'`` and
    the differenced surface trace, which vanishes once the constraint holds.
    """
    x = mf.grid
    _, eta_x, _ = geometry.eta(x)
    n = np.arange(-2, mf.M + 1)[:, None]
    dxz, dzz = surface_gradient_traces(n, geometry, params, x[None, :])
    a = mf.amplitudes
    dphi = periodic_d1(a, mf.dx, axis=1)
    dx_total = (dphi + a * dxz).sum(axis=0)
    dz_total = (a * dzz).sum(axis=0)
    return DtnTrace(x.copy(), -eta_x * dx_total + dz_total)


def dtn_exact_benchmark(geometry: StripGeometry, kappa: float, h0: Optional[float] = None, x=None) -> DtnTrace:
    """DtN of ``cosh(kappa (z + h0)) cos(kappa x)`` on a flat-bottom strip."""
    h0 = geometry.h0 if h0 is None else h0
    if not geometry.flat_bottom or abs(geometry.h(0.0)[0] - h0) > 1e-12:
        raise GeometryError("the benchmark field needs a flat bottom at depth h0")
    x = geometry.grid(256) if x is None else np.asarray(x, dtype=float)
    eta, eta_x, _ = geometry.eta(x)
    d = kappa * (eta + h0)
    g = eta_x * kappa * np.cosh(d) * np.sin(kappa * x) + kappa * np.sinh(d) * np.cos(kappa * x)
    return DtnTrace(x.copy(), g)


def write_dtn_csv(path, numeric: DtnTrace, exact: Optional[DtnTrace] = None, labels=("G_numeric", "G_exact")) -> None:
    """Columns ``x, G_numeric, G_exact, error``; reference columns are empty without ``exact``."""
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", labels[0], labels[1], "error"])
        for j, (xj, gj) in enumerate(zip(numeric.x, numeric.values)):
            if exact is None:
                w.writerow([f"{xj:.16e}", f"{gj:.16e}", "", ""])
            else:
                ge = exact.values[j]
                w.writerow([f"{xj:.16e}", f"{gj:.16e}", f"{ge:.16e}", f"{gj - ge:.16e}"])
