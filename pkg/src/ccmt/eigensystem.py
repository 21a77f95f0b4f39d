"""Local vertical eigensystem of the water-wave reference waveguide.

At each station the eigenfunctions solve ``Z'' + k^2 Z = 0`` on
``[-h, eta]`` with ``Z' = mu0 Z`` at the surface and ``Z' = 0`` at the
bottom, normalised to ``Z(eta) = 1``. Index 0 is the propagating (cosh)
mode, indices ``n >= 1`` are evanescent (cos) modes.

Everything here is expressed in terms of ``theta = k H`` internally, and the
x-derivatives of the eigenfunctions are linear combinations of ``Z`` and
``W = sin(k(z+h)) / cos(kH)`` with coefficients rational in ``k``; the
dispersion relation replaces every ``tan(kH)`` by ``-mu0 / k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import StripGeometry

MAX_ITER = 100
_EPS = np.finfo(float).eps


class RootFindingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReferenceParams:
    """Surface Robin coefficient ``mu0`` and reference depth ``h0``.

    Only ``Q = 0`` is supported.
    """

    mu0: float
    h0: float

    def __post_init__(self):
        if not self.mu0 > 0:
            # mu0 = 0 collapses k0 to zero and Z0 to a constant.
            raise ValueError(f"mu0 must be positive, got {self.mu0}")
        if not self.h0 > 0:
            raise ValueError(f"h0 must be positive, got {self.h0}")

    @classmethod
    def from_wavenumber(cls, kappa: float, h0: float) -> "ReferenceParams":
        """``mu0 = kappa tanh(kappa h0)``, so that ``k0 = kappa`` where ``H = h0``."""
        return cls(kappa * math.tanh(kappa * h0), h0)


@dataclass(frozen=True)
class LocalEigenvalues:
    x: float
    H: float
    k: np.ndarray  # k[0] = k0, k[n] = k_n

    @property
    def k0(self) -> float:
        return float(self.k[0])

    @property
    def kn(self) -> np.ndarray:
        return self.k[1:]

    @property
    def M(self) -> int:
        return self.k.size - 1


@dataclass(frozen=True)
class EigenDerivatives:
    """H- and x-derivatives of ``k_n`` (index 0 = propagating root).

    ``kH_H`` and ``kH_HH`` are ``H dk/dH + k`` and ``H d2k/dH2 + 2 dk/dH``,
    i.e. the H-derivatives of ``k H``. They are evaluated in closed forms
    that do not cancel for large n.
    """

    dH_k: np.ndarray
    d2H_k: np.ndarray
    kH_H: np.ndarray
    kH_HH: np.ndarray
    dx_k: np.ndarray = field(default=None)
    dx2_k: np.ndarray = field(default=None)
    dx_kH: np.ndarray = field(default=None)
    dx2_kH: np.ndarray = field(default=None)


# ---------------------------------------------------------------------------
# dispersion roots
# ---------------------------------------------------------------------------


def _bracketed_newton(func, lo, hi, guess, what):
    """Vectorised Newton iteration, falling back to bisection outside [lo, hi].

    ``func(x)`` returns ``(f, df)``; ``f(lo)`` and ``f(hi)`` must differ in sign.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    x = np.array(guess, dtype=float)
    lo, hi, x = np.broadcast_arrays(lo, hi, x)
    lo, hi, x = lo.copy(), hi.copy(), x.copy()
    f_lo = func(lo)[0]
    for _ in range(MAX_ITER):
        f, df = func(x)
        root = f == 0.0
        same = np.sign(f) == np.sign(f_lo)
        lo = np.where(same, x, lo)
        f_lo = np.where(same, f, f_lo)
        hi = np.where(same | root, hi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / df
        # a sub-ulp Newton step lands on the bracket end; accept it before bisecting
        converged = root | (np.abs(step) <= 4 * _EPS * np.abs(x))
        x_new = x - step
        a, b = np.minimum(lo, hi), np.maximum(lo, hi)
        outside = ~np.isfinite(x_new) | (x_new <= a) | (x_new >= b)
        x_new = np.where(outside, 0.5 * (lo + hi), x_new)
        x_new = np.where(converged, x, x_new)
        done = converged | (np.abs(x_new - x) <= 4 * _EPS * np.abs(x)) | (b - a <= 4 * _EPS * b)
        x = x_new
        if np.all(done):
            return x
    raise RootFindingError(f"{what}: no convergence after {MAX_ITER} iterations")


def _propagating_theta(c):
    """Root of ``theta tanh(theta) = c`` for ``c = mu0 H > 0``."""
    c = np.asarray(c, dtype=float)
    # theta tanh(theta) < min(theta, theta^2) puts the root above max(c, sqrt c)
    lo = np.maximum(c, np.sqrt(c))
    hi = lo + 1.0

    def func(t):
        th = np.tanh(t)
        return t * th - c, th + t * (1.0 - th * th)

    return _bracketed_newton(func, lo, hi, lo, "propagating root")


def _evanescent_theta(c, n):
    """Roots of ``c cos(theta) + theta sin(theta) = 0`` in ``((n - 1/2) pi, n pi)``.

    This is ``mu0 + k tan(kH) = 0`` multiplied through by ``H cos(kH)``, which
    removes the poles of tan from the bracket.
    """
    c = np.asarray(c, dtype=float)
    n = np.asarray(n, dtype=float)
    lo = (n - 0.5) * np.pi
    hi = n * np.pi
    guess = hi - np.arctan(c / hi)

    def func(t):
        ct, st = np.cos(t), np.sin(t)
        return c * ct + t * st, (1.0 - c) * st + t * ct

    return _bracketed_newton(func, lo, hi, guess, "evanescent root")


def solve_dispersion(params: ReferenceParams, H: float, M: int, x: float = float("nan")) -> LocalEigenvalues:
    """Local wavenumbers ``k_0 .. k_M`` at depth ``H``.

    ``k0`` solves ``mu0 = k tanh(kH)``; ``k_n`` solves ``mu0 + k tan(kH) = 0``
    with ``k_n H`` in ``((n - 1/2) pi, n pi)``.
    """
    if not H > 0:
        raise ValueError(f"depth must be positive, got {H}")
    if M < 0:
        raise ValueError("M must be >= 0")
    c = params.mu0 * H
    theta = np.empty(M + 1)
    theta[0] = _propagating_theta(c)
    if M:
        theta[1:] = _evanescent_theta(c, np.arange(1, M + 1))
    return LocalEigenvalues(float(x), float(H), theta / H)


def dispersion_residuals(params: ReferenceParams, eig: LocalEigenvalues) -> np.ndarray:
    """``mu0 - k0 tanh(k0 H)`` followed by ``mu0 + k_n tan(k_n H)``."""
    k, H, mu = eig.k, eig.H, params.mu0
    res = np.empty_like(k)
    res[0] = mu - k[0] * math.tanh(k[0] * H)
    res[1:] = mu + k[1:] * np.tan(k[1:] * H)
    return res


# ---------------------------------------------------------------------------
# derivatives of the eigenvalues
# ---------------------------------------------------------------------------


def eigenvalue_H_derivatives(params: ReferenceParams, H: float, k, branch: str) -> EigenDerivatives:
    """First and second derivatives of ``k(H)`` by implicit differentiation.

    The denominators ``-mu0 + H (k^2 + mu0^2)`` (evanescent) and
    ``mu0 + H (k^2 - mu0^2)`` (propagating) are strictly positive: the first
    because ``kH > pi/2 > 1/2`` makes the quadratic in mu0 definite, the
    second because ``k0 > mu0``.
    """
    mu = params.mu0
    k = np.asarray(k, dtype=float)
    if branch == "evanescent":
        q = k * k + mu * mu
        den = -mu + H * q
        dH = -k * q / den
        kH_H = -mu * k / den
    elif branch == "propagating":
        q = k * k - mu * mu
        den = mu + H * q
        dH = -k * q / den
        kH_H = mu * k / den
    else:
        raise ValueError(f"unknown branch {branch!r}")
    r = dH / k
    # the same expression serves both branches (k -> i k maps one onto the other)
    d2H = -2.0 * dH * (mu + r * (H * mu - 1.0) * (2.0 + H * r))
    kH_HH = -2.0 * dH * (H * mu - 1.0) * (kH_H / k) ** 2
    return EigenDerivatives(dH, d2H, kH_H, kH_HH)


def eigenvalue_x_derivatives(
    geometry: StripGeometry, params: ReferenceParams, x: float, eig: LocalEigenvalues
) -> EigenDerivatives:
    """Chain rule through ``H(x)``: ``k_x = k_H H_x``, ``k_xx = k_HH H_x^2 + k_H H_xx``."""
    H, Hx, Hxx = (float(v) for v in geometry.depth(x))
    prop = eigenvalue_H_derivatives(params, H, eig.k[:1], "propagating")
    evan = eigenvalue_H_derivatives(params, H, eig.k[1:], "evanescent")
    dH = np.concatenate([prop.dH_k, evan.dH_k])
    d2H = np.concatenate([prop.d2H_k, evan.d2H_k])
    kH_H = np.concatenate([prop.kH_H, evan.kH_H])
    kH_HH = np.concatenate([prop.kH_HH, evan.kH_HH])
    return EigenDerivatives(
        dH_k=dH,
        d2H_k=d2H,
        kH_H=kH_H,
        kH_HH=kH_HH,
        dx_k=dH * Hx,
        dx2_k=d2H * Hx * Hx + dH * Hxx,
        dx_kH=Hx * kH_H,
        dx2_kH=Hx * Hx * kH_HH + Hxx * kH_H,
    )


# ---------------------------------------------------------------------------
# stations and eigenfunctions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Station:
    """Everything the vertical basis needs at one abscissa."""

    x: float
    eta: float
    eta_x: float
    eta_xx: float
    h: float
    h_x: float
    h_xx: float
    params: ReferenceParams
    eig: LocalEigenvalues
    deriv: EigenDerivatives

    @property
    def H(self) -> float:
        return self.eta + self.h

    @property
    def H_x(self) -> float:
        return self.eta_x + self.h_x

    @property
    def H_xx(self) -> float:
        return self.eta_xx + self.h_xx

    @property
    def M(self) -> int:
        return self.eig.M

    def check_z(self, z, tol: float = 1e-12) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        pad = tol * max(1.0, self.H)
        if np.any(z < -self.h - pad) or np.any(z > self.eta + pad):
            raise ValueError(f"z outside [-h, eta] = [{-self.h:.6g}, {self.eta:.6g}] at x={self.x:.6g}")
        return z


def make_station(geometry: StripGeometry, params: ReferenceParams, x: float, M: int) -> Station:
    e, ex, exx = (float(v) for v in geometry.eta(x))
    h, hx, hxx = (float(v) for v in geometry.h(x))
    eig = solve_dispersion(params, e + h, M, x)
    deriv = eigenvalue_x_derivatives(geometry, params, x, eig)
    return Station(float(x), e, ex, exx, h, hx, hxx, params, eig, deriv)


def eigenfunction_table(st: Station, z, modes=None):
    """``Z_n(z)``, ``W_n(z)`` for all requested modes, shape ``(len(modes), len(z))``.

    ``W_0 = sinh(k0 (z+h)) / cosh(k0 H)`` plays the role of ``W_n`` on the
    hyperbolic branch, with ``dZ_0/dz = k0 W_0``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if modes is None:
        modes = np.arange(st.M + 1)
    modes = np.atleast_1d(np.asarray(modes))
    k = st.eig.k[modes][:, None]
    s = (z + st.h)[None, :]
    H = st.H
    Z = np.empty((modes.size, z.size))
    W = np.empty_like(Z)
    hyp = modes == 0
    if hyp.any():
        k0 = k[hyp]
        den = 1.0 + np.exp(-2.0 * k0 * H)
        e1 = np.exp(k0 * (s - H))
        e2 = np.exp(-k0 * (s + H))
        Z[hyp] = (e1 + e2) / den
        W[hyp] = (e1 - e2) / den
    trig = ~hyp
    if trig.any():
        kt = k[trig]
        sec = 1.0 / np.cos(kt * H)
        Z[trig] = np.cos(kt * s) * sec
        W[trig] = np.sin(kt * s) * sec
    return Z, W


def eval_eigenfunction(n: int, z, st: Station):
    """``(Z_n, W_n, dZ_n/dz)`` at the points ``z``."""
    if not 0 <= n <= st.M:
        raise ValueError(f"mode {n} outside 0..{st.M}")
    z = st.check_z(z)
    Z, W = eigenfunction_table(st, z, [n])
    k = st.eig.k[n]
    dz = k * W[0] if n == 0 else -k * W[0]
    return Z[0], W[0], dz


def eigenfunction_x_derivatives(st: Station, z, Z, W, modes=None):
    """``(dZ/dx, d2Z/dx2, dW/dx)`` from precomputed ``Z``, ``W`` tables."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if modes is None:
        modes = np.arange(st.M + 1)
    modes = np.atleast_1d(np.asarray(modes))
    d = st.deriv
    mu = st.params.mu0
    k = st.eig.k[modes][:, None]
    kx = d.dx_k[modes][:, None]
    kxx = d.dx2_k[modes][:, None]
    p = d.dx_kH[modes][:, None]  # (kH)_x
    pp = d.dx2_kH[modes][:, None]  # (kH)_xx
    s = (z + st.h)[None, :]
    a = kx * s + k * st.h_x
    a_x = kxx * s + 2.0 * kx * st.h_x + k * st.h_xx
    b = mu * p / k
    sign = np.where(modes == 0, 1.0, -1.0)[:, None]  # +1 hyperbolic, -1 trig
    # trig:  Z_x = -a W - b Z,  W_x = a Z - b W
    # hyp:   Z_x = +a W - b Z,  W_x = a Z - b W
    dxZ = sign * a * W - b * Z
    dxW = a * Z - b * W
    coef_Z = sign * (a * a - p * p) + 2.0 * (mu * p / k) ** 2 - mu * pp / k
    coef_W = sign * (a_x - 2.0 * a * b)
    dx2Z = coef_Z * Z + coef_W * W
    return dxZ, dx2Z, dxW


def eval_eigenfunction_x_derivatives(n: int, z, st: Station):
    """``(dZ_n/dx, d2Z_n/dx2, dW_n/dx)`` at fixed ``z``."""
    if not 0 <= n <= st.M:
        raise ValueError(f"mode {n} outside 0..{st.M}")
    z = st.check_z(z)
    Z, W = eigenfunction_table(st, z, [n])
    dxZ, dx2Z, dxW = eigenfunction_x_derivatives(st, z, Z, W, [n])
    return dxZ[0], dx2Z[0], dxW[0]


def l2_norm_and_gamma(n, st: Station):
    """Closed-form ``||Z_n||^2`` and ``gamma_n = 1 / ||Z_n||^2``."""
    n = np.asarray(n)
    k = st.eig.k[n]
    mu, H = st.params.mu0, st.H
    norm_sq = np.where(
        n == 0,
        (H * (k * k - mu * mu) + mu) / (2.0 * k * k),
        (H * (k * k + mu * mu) - mu) / (2.0 * k * k),
    )
    return norm_sq, 1.0 / norm_sq
