"""Strip domains bounded by a free surface z = eta(x) and a bottom z = -h(x).

Each boundary is a :class:`Profile`: a periodic map returning the value and
its first two x-derivatives. The solver modules never differentiate a profile
numerically; they consume the three arrays returned by ``profile(x)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * math.pi

ProfileValues = Tuple[np.ndarray, np.ndarray, np.ndarray]


class GeometryError(ValueError):
    """Raised for inadmissible strip geometries."""


class Profile:
    """Periodic boundary profile. Subclasses implement :meth:`evaluate`."""

    def evaluate(self, x: np.ndarray) -> ProfileValues:
        raise NotImplementedError

    def __call__(self, x) -> ProfileValues:
        x = np.asarray(x, dtype=float)
        return self.evaluate(x)


@dataclass(frozen=True)
class ConstantProfile(Profile):
    value: float

    def evaluate(self, x):
        f = np.full_like(x, self.value, dtype=float)
        zero = np.zeros_like(x, dtype=float)
        return f, zero, zero.copy()


@dataclass(frozen=True)
class CosineProfile(Profile):
    """``offset + amplitude * cos(wavenumber * (x + phase))``."""

    amplitude: float
    wavenumber: float
    phase: float = 0.0
    offset: float = 0.0

    def evaluate(self, x):
        arg = self.wavenumber * (x + self.phase)
        c, s = np.cos(arg), np.sin(arg)
        a, k = self.amplitude, self.wavenumber
        return self.offset + a * c, -a * k * s, -a * k * k * c


# f_r(x) = A x^4 (2 pi - x)^4 + B with zero mean over [0, 2 pi] and f_r(pi) = 1.
# int_0^{2 pi} x^4 (2 pi - x)^4 dx = (2 pi)^9 / 630.
ROUGH_A = 315.0 / (187.0 * math.pi**8)
ROUGH_B = -ROUGH_A * 128.0 * math.pi**8 / 315.0


@dataclass(frozen=True)
class RoughProfile(Profile):
    """``amplitude * f_r(x)``, extended 2 pi-periodically (C^4 at the seam)."""

    amplitude: float

    def evaluate(self, x):
        t = np.mod(x, TWO_PI)
        u = TWO_PI - t
        p = t * u  # x (2 pi - x)
        dp = TWO_PI - 2.0 * t
        f = ROUGH_A * p**4 + ROUGH_B
        fx = ROUGH_A * 4.0 * p**3 * dp
        fxx = ROUGH_A * (12.0 * p**2 * dp**2 - 8.0 * p**3)
        e = self.amplitude
        return e * f, e * fx, e * fxx


class SplineProfile(Profile):
    """Periodic cubic-spline interpolant of samples on ``[0, period)``."""

    def __init__(self, x, values, period: float):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or x.size < 4:
            raise GeometryError("spline profile needs >= 4 matching 1-D samples")
        if np.any(np.diff(x) <= 0):
            raise GeometryError("sample abscissae must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise GeometryError("profile samples must be finite")
        if x[0] < 0 or x[-1] > period:
            raise GeometryError("samples must lie in [0, period]")
        if math.isclose(x[-1] - x[0], period, rel_tol=0.0, abs_tol=1e-12 * period):
            if not math.isclose(values[0], values[-1], rel_tol=1e-9, abs_tol=1e-12):
                raise GeometryError("samples are not periodic: f(0) != f(L)")
            xs, vs = x, values
        else:
            xs = np.append(x, x[0] + period)
            vs = np.append(values, values[0])
        self.period = float(period)
        self._x0 = float(xs[0])
        self._spline = CubicSpline(xs, vs, bc_type="periodic")

    def evaluate(self, x):
        t = self._x0 + np.mod(x - self._x0, self.period)
        s = self._spline
        return s(t), s(t, 1), s(t, 2)


@dataclass(frozen=True)
class StripGeometry:
    """Periodic strip ``-h(x) <= z <= eta(x)`` of period ``L``.

    ``h0`` is the reference depth; it fixes the scale of the boundary modes
    and is not required to equal ``h``.
    """

    h0: float
    eta: Profile
    h: Profile
    L: float = TWO_PI

    def __post_init__(self):
        if not (self.h0 > 0 and math.isfinite(self.h0)):
            raise GeometryError(f"reference depth must be positive, got {self.h0}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise GeometryError(f"period must be positive, got {self.L}")
        self.validate()

    def validate(self, n_sweep: int = 10_000) -> None:
        """Check H > 0, finiteness and periodicity on a dense sweep."""
        x = np.linspace(0.0, self.L, n_sweep, endpoint=False)
        eta = self.eta(x)
        h = self.h(x)
        for arr in (*eta, *h):
            if not np.all(np.isfinite(arr)):
                raise GeometryError("profile values or derivatives are not finite")
        H = eta[0] + h[0]
        if H.min() <= 0:
            i = int(np.argmin(H))
            raise GeometryError(f"non-positive depth H={H[i]:.3g} at x={x[i]:.6g}")
        ends = np.array([0.0, self.L])
        for name, prof in (("eta", self.eta), ("h", self.h)):
            f0, f1, _ = prof(ends)
            scale = 1.0 + np.abs(f0).max()
            if abs(f0[0] - f0[1]) > 1e-9 * scale or abs(f1[0] - f1[1]) > 1e-7 * scale:
                raise GeometryError(f"{name} profile is not {self.L:g}-periodic")

    def depth(self, x) -> ProfileValues:
        """``H = eta + h`` and its first two derivatives."""
        e, ex, exx = self.eta(x)
        h, hx, hxx = self.h(x)
        return e + h, ex + hx, exx + hxx

    def grid(self, nx: int) -> np.ndarray:
        """Uniform periodic grid of ``nx`` stations on ``[0, L)``."""
        return np.arange(nx) * (self.L / nx)

    @property
    def flat_bottom(self) -> bool:
        x = np.linspace(0.0, self.L, 257)
        h, hx, hxx = self.h(x)
        return bool(
            np.allclose(h, self.h0, rtol=0, atol=1e-14 * self.h0)
            and not np.any(hx)
            and not np.any(hxx)
        )


def build_flat(h0: float = 1.0, L: float = TWO_PI) -> StripGeometry:
    return StripGeometry(h0, ConstantProfile(0.0), ConstantProfile(h0), L)


def build_smooth_profile(
    epsilon: float, kappa: int = 1, gamma: float = 0.0, h0: float = 1.0
) -> StripGeometry:
    """Flat bottom at depth ``h0`` under ``eta = epsilon cos(kappa (x + gamma))``."""
    if epsilon < 0:
        raise GeometryError("epsilon must be non-negative")
    if h0 <= 0:
        raise GeometryError("h0 must be positive")
    if int(kappa) != kappa or kappa <= 0:
        raise GeometryError("kappa must be a positive integer for 2 pi periodicity")
    if epsilon >= h0:
        raise GeometryError(f"epsilon={epsilon} >= h0={h0} empties the strip")
    eta = CosineProfile(epsilon, float(kappa), gamma)
    return StripGeometry(h0, eta, ConstantProfile(h0), TWO_PI)


def build_rough_profile(epsilon: float, h0: float = 1.0) -> StripGeometry:
    """Flat bottom at depth ``h0`` under ``eta = epsilon f_r(x)``."""
    if not 0 <= epsilon < h0:
        raise GeometryError(f"need 0 <= epsilon < h0, got epsilon={epsilon}, h0={h0}")
    # min f_r = B, so H >= h0 + epsilon B > 0 already for epsilon < h0.
    return StripGeometry(h0, RoughProfile(epsilon), ConstantProfile(h0), TWO_PI)


def build_custom_profile(eta, h, h0: float, L: float = TWO_PI) -> StripGeometry:
    """Geometry from arbitrary profiles.

    ``eta`` and ``h`` may each be a :class:`Profile`, a constant, or a pair
    ``(x_samples, values)`` that is interpolated by a periodic cubic spline.
    """
    return StripGeometry(h0, _as_profile(eta, L), _as_profile(h, L), L)


def _as_profile(spec, L: float) -> Profile:
    if isinstance(spec, Profile):
        return spec
    if np.isscalar(spec):
        return ConstantProfile(float(spec))
    xs, vs = spec
    vs = np.asarray(vs, dtype=float)
    if np.ptp(vs) == 0.0:
        return ConstantProfile(float(vs[0]))
    return SplineProfile(xs, vs, L)


def load_profile_csv(path, h0: float, L: float = TWO_PI) -> StripGeometry:
    """Read ``x, eta, h`` rows (header optional) into a spline geometry."""
    rows = []
    with open(Path(path), newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in rec[:3]])
            except ValueError:
                if rows:
                    raise GeometryError(f"malformed row in {path}: {rec}")
                continue  # header
    if len(rows) < 4:
        raise GeometryError(f"{path}: need at least 4 (x, eta, h) rows")
    data = np.array(rows)
    return build_custom_profile((data[:, 0], data[:, 1]), (data[:, 0], data[:, 2]), h0, L)
