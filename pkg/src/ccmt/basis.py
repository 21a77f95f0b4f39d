"""The enhanced vertical basis ``{Z_-2, Z_-1, Z_0, Z_1, ...}``.

``Z_-2`` and ``Z_-1`` are the least-degree polynomials in ``z`` with
``Z(eta) = 1`` that carry a unit (times 1/h0) Robin residual at the surface
and a unit Neumann residual at the bottom respectively. Rows of a
:class:`BasisTable` are ordered by mode index ``n = -2 .. M``, so row ``i``
holds mode ``i - 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .eigensystem import (
    ReferenceParams,
    Station,
    eigenfunction_table,
    eigenfunction_x_derivatives,
    make_station,
)
from .geometry import StripGeometry


@dataclass(frozen=True)
class BasisEval:
    n: int
    value: np.ndarray
    dz: np.ndarray
    dz2: np.ndarray
    dx: np.ndarray
    dx2: np.ndarray
    w_value: Optional[np.ndarray] = None


@dataclass(frozen=True)
class BasisTable:
    """All modes ``-2..M`` on a set of ``z`` points; arrays are ``(M + 3, len(z))``."""

    z: np.ndarray
    value: np.ndarray
    dz: np.ndarray
    dz2: np.ndarray
    dx: np.ndarray
    dx2: np.ndarray

    def row(self, n: int) -> BasisEval:
        i = n + 2
        return BasisEval(n, self.value[i], self.dz[i], self.dz2[i], self.dx[i], self.dx2[i])


def _boundary_coefficients(params: ReferenceParams):
    mu, h0 = params.mu0, params.h0
    alpha = (mu * h0 + 1.0) / (2.0 * h0)
    beta = (mu * h0 - 1.0) / (2.0 * h0)
    return alpha, beta


def _boundary_modes(st: Station, z):
    """Values and derivatives of ``Z_-2`` and ``Z_-1``, each of shape ``(2, len(z))``.

    With ``s = z + h`` and ``H = eta + h``::

        Z_-2 = alpha (s^2 / H - H) + 1
        Z_-1 = beta s^2 / H + s / h0 - alpha H + 1

    x-derivatives follow from ``s_x = h_x`` at fixed ``z``.
    """
    alpha, beta = _boundary_coefficients(st.params)
    h0 = st.params.h0
    s = np.asarray(z, dtype=float) + st.h
    H, Hx, Hxx = st.H, st.H_x, st.H_xx
    sx, sxx = st.h_x, st.h_xx
    q = s * s / H
    q_x = 2.0 * s * sx / H - s * s * Hx / H**2
    q_xx = (
        2.0 * sx * sx / H
        + 2.0 * s * sxx / H
        - 4.0 * s * sx * Hx / H**2
        - s * s * Hxx / H**2
        + 2.0 * s * s * Hx * Hx / H**3
    )
    ones = np.ones_like(s)
    value = np.stack([alpha * (q - H) + 1.0, beta * q + s / h0 - alpha * H + 1.0])
    dz = np.stack([2.0 * alpha * s / H, 2.0 * beta * s / H + 1.0 / h0])
    dz2 = np.stack([2.0 * alpha / H * ones, 2.0 * beta / H * ones])
    dx = np.stack([alpha * (q_x - Hx), beta * q_x + sx / h0 - alpha * Hx])
    dx2 = np.stack([alpha * (q_xx - Hxx), beta * q_xx + sxx / h0 - alpha * Hxx])
    return value, dz, dz2, dx, dx2


def eval_boundary_mode(idx: int, z, geometry: StripGeometry, params: ReferenceParams, x: float) -> BasisEval:
    """``Z_-2`` or ``Z_-1`` and their z- and x-derivatives at ``(x, z)``."""
    if idx not in (-2, -1):
        raise ValueError(f"boundary mode index must be -2 or -1, got {idx}")
    st = make_station(geometry, params, x, 0)
    z = st.check_z(z)
    value, dz, dz2, dx, dx2 = _boundary_modes(st, np.atleast_1d(z))
    i = idx + 2
    return BasisEval(idx, value[i], dz[i], dz2[i], dx[i], dx2[i])


def basis_table(st: Station, z, n_max: Optional[int] = None) -> BasisTable:
    """Evaluate modes ``-2..n_max`` (default ``st.M``) at the points ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    M = st.M if n_max is None else n_max
    if M > st.M:
        raise ValueError(f"station resolved only up to mode {st.M}")
    modes = np.arange(M + 1)
    bv, bdz, bdz2, bdx, bdx2 = _boundary_modes(st, z)
    Z, W = eigenfunction_table(st, z, modes)
    k = st.eig.k[modes][:, None]
    sign = np.where(modes == 0, 1.0, -1.0)[:, None]
    dxZ, dx2Z, _ = eigenfunction_x_derivatives(st, z, Z, W, modes)
    return BasisTable(
        z=z,
        value=np.vstack([bv, Z]),
        dz=np.vstack([bdz, sign * k * W]),
        dz2=np.vstack([bdz2, sign * k * k * Z]),
        dx=np.vstack([bdx, dxZ]),
        dx2=np.vstack([bdx2, dx2Z]),
    )


def eval_basis(n: int, z, st: Station) -> BasisEval:
    """Single mode ``n`` in ``[-2, M]``; trig and hyperbolic modes also carry ``W_n``."""
    if not -2 <= n <= st.M:
        raise ValueError(f"mode index {n} outside [-2, {st.M}]")
    z = st.check_z(np.atleast_1d(z))
    if n < 0:
        value, dz, dz2, dx, dx2 = _boundary_modes(st, z)
        i = n + 2
        return BasisEval(n, value[i], dz[i], dz2[i], dx[i], dx2[i])
    Z, W = eigenfunction_table(st, z, [n])
    k = st.eig.k[n]
    dxZ, dx2Z, _ = eigenfunction_x_derivatives(st, z, Z, W, [n])
    sign = 1.0 if n == 0 else -1.0
    return BasisEval(n, Z[0], sign * k * W[0], sign * k * k * Z[0], dxZ[0], dx2Z[0], W[0])


def surface_gradient_traces(n, geometry: StripGeometry, params: ReferenceParams, x):
    """Closed-form ``(dZ_n/dx, dZ_n/dz)`` at ``z = eta(x)``.

    Every mode except ``Z_-2`` satisfies the surface Robin condition with unit
    trace, giving ``(-mu0 eta_x, mu0)``; ``Z_-2`` has ``mu0 + 1/h0`` instead.
    ``n`` and ``x`` broadcast.
    """
    n = np.asarray(n)
    _, eta_x, _ = geometry.eta(x)
    slope = np.where(n == -2, params.mu0 + 1.0 / params.h0, params.mu0)
    slope = slope * np.ones_like(eta_x)
    return -slope * eta_x, slope


def boundary_operators(table: BasisTable, st: Station):
    """``(B^eta Z_n, B_h Z_n)`` from a table whose first/last z are ``-h`` and ``eta``."""
    mu = st.params.mu0
    top = table.dz[:, -1] - mu * table.value[:, -1]
    bottom = table.dz[:, 0]
    return top, bottom
