"""Benchmark field, its closed-form modal amplitudes, error metrics and sweeps.

The benchmark is the harmonic field ``Phi_k = cosh(k (z + h0)) cos(k x)``
over a flat bottom at depth ``h0``; it has no normal flux through the bottom,
so solving the coupled-mode system with ``psi = Phi_k(x, eta(x))`` must
reproduce it. With ``mu0 = k tanh(k h0)`` the reference eigenfunctions are
those of the undisturbed strip.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .basis import basis_table
from .ccms import CcmsError, _coefficients, assemble_linear_system, solve_ccms
from .dtn import DtnTrace, dtn_exact_benchmark, dtn_from_solution
from .eigensystem import ReferenceParams, Station, l2_norm_and_gamma, make_station
from .expansion import Field, ModalField, default_n_quad, gauss_nodes, loglog_slope
from .geometry import GeometryError, StripGeometry, build_rough_profile, build_smooth_profile

logger = logging.getLogger(__name__)

PLATEAU_THRESHOLD = 0.05
FIELD_WINDOW = (5, 25)
DECAY_WINDOW = (10, 60)


@dataclass(frozen=True)
class PhiKappa:
    """``cosh(kappa (z + h0)) cos(kappa x)``."""

    kappa: float = 1.0
    h0: float = 1.0

    def value(self, x, z):
        return np.cosh(self.kappa * (np.asarray(z) + self.h0)) * np.cos(self.kappa * np.asarray(x))

    def dz(self, x, z):
        k = self.kappa
        return k * np.sinh(k * (np.asarray(z) + self.h0)) * np.cos(k * np.asarray(x))

    def as_field(self) -> Field:
        return Field(self.value, self.dz)

    def surface_data(self, geometry: StripGeometry, x) -> np.ndarray:
        return self.value(x, geometry.eta(x)[0])

    def surface_data_x(self, geometry: StripGeometry, x) -> np.ndarray:
        k = self.kappa
        eta, eta_x, _ = geometry.eta(x)
        d = k * (eta + self.h0)
        return k * eta_x * np.sinh(d) * np.cos(k * x) - k * np.cosh(d) * np.sin(k * x)


def _sinhc(t):
    """``sinh(t) / t`` with the series near zero."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 1e-3
    safe = np.where(small, 1.0, t)
    t2 = t * t
    return np.where(small, 1.0 + t2 / 6.0 + t2 * t2 / 120.0, np.sinh(safe) / safe)


def _exact_at_station(st: Station, kappa: float) -> np.ndarray:
    mu, h0, H = st.params.mu0, st.params.h0, st.H
    k = st.eig.k
    M = st.M
    c = math.cos(kappa * st.x)
    out = np.zeros(M + 3)
    phi_m2 = h0 * (kappa * math.sinh(kappa * H) - mu * math.cosh(kappa * H)) * c
    out[0] = phi_m2
    norm_sq, _ = l2_norm_and_gamma(np.arange(M + 1), st)

    # n = 0: the projection of cosh(kappa s) on cosh(k0 s) is written through
    # sinh(d H)/d, which stays finite where kappa = k0 and phi_-2 vanishes.
    k0 = k[0]
    alpha = (mu * h0 + 1.0) / (2.0 * h0)
    i0 = 0.5 * H * (
        math.sinh((kappa + k0) * H) / ((kappa + k0) * H) + float(_sinhc((kappa - k0) * H))
    ) / math.cosh(k0 * H)
    j0 = 2.0 * alpha * mu / (k0**4 * H) + (mu - 2.0 * alpha) / k0**2
    out[2] = (i0 * c - phi_m2 * j0) / norm_sq[0]

    kn = k[1:]
    bracket = -(kappa**2) / (h0 * (kappa**2 + kn**2) * kn**2) - mu * (mu * h0 + 1.0) / (h0 * H * kn**4)
    out[3:] = phi_m2 * bracket / norm_sq[1:]
    return out


def exact_modal_amplitudes_phikappa(
    geometry: StripGeometry, params: ReferenceParams, kappa: float, M: int, x
) -> np.ndarray:
    """Closed-form amplitudes of the benchmark field, shape ``(M + 3, len(x))``.

    Row ``i`` is mode ``i - 2``; ``phi_-1`` is identically zero because the
    field has no normal derivative at the flat bottom.
    """
    if not geometry.flat_bottom:
        raise GeometryError("closed-form amplitudes need a flat bottom")
    if abs(geometry.h0 - params.h0) > 1e-14:
        raise GeometryError("geometry and reference depths differ")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    return np.column_stack([_exact_at_station(make_station(geometry, params, xj, M), kappa) for xj in xs])


# ---------------------------------------------------------------------------
# error metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorMetrics:
    er_field: float
    e_phi: np.ndarray  # absolute L2(X) error per mode -2..M
    er_dtn: float

    def e(self, n: int) -> float:
        return float(self.e_phi[n + 2])


def _line_norm(f, dx):
    return math.sqrt(dx * float(np.sum(np.square(f), axis=-1)))


def _field_error(numeric: ModalField, reference, stations, tables, weights, nodes):
    num = den = 0.0
    N = numeric.n_tot
    for j, st in enumerate(stations):
        approx = numeric.amplitudes[:, j] @ tables[j][:N]
        if isinstance(reference, ModalField):
            exact = reference.amplitudes[:, j] @ tables[j][: reference.n_tot]
        else:
            exact = reference.value(st.x, nodes[j])
        num += weights[j] @ (approx - exact) ** 2
        den += weights[j] @ exact**2
    return math.sqrt(num / den)  # uniform trapezoid weights in x cancel


def _station_tables(geometry, params, grid, M, n_quad):
    stations, tables, weights, nodes = [], [], [], []
    for xj in grid:
        st = make_station(geometry, params, xj, M)
        z, w = gauss_nodes(-st.h, st.eta, n_quad)
        stations.append(st)
        tables.append(basis_table(st, z).value)
        weights.append(w)
        nodes.append(z)
    return stations, tables, weights, nodes


def error_metrics(
    numeric: ModalField,
    exact,
    geometry: StripGeometry,
    params: ReferenceParams,
    n_quad: Optional[int] = None,
    _cache=None,
) -> ErrorMetrics:
    """Errors of a solved modal field against the benchmark or another solution.

    ``exact`` is a :class:`PhiKappa` or a :class:`ModalField` on the same
    grid. Domain norms use the periodic trapezoid rule in ``x`` times
    Gauss-Legendre in ``z``; amplitude and DtN norms use the trapezoid rule.
    """
    grid = numeric.grid
    if isinstance(exact, ModalField):
        if exact.grid.shape != grid.shape or not np.allclose(exact.grid, grid, rtol=0, atol=1e-12):
            raise ValueError("numeric and reference fields live on different grids")
        ref_amps = exact.amplitudes
        M_ref = exact.M
        psi = exact.surface_trace()
        g_ref = dtn_from_solution(exact, geometry, params, psi)
    elif isinstance(exact, PhiKappa):
        M_ref = numeric.M
        ref_amps = exact_modal_amplitudes_phikappa(geometry, params, exact.kappa, M_ref, grid)
        psi = exact.surface_data(geometry, grid)
        g_ref = dtn_exact_benchmark(geometry, exact.kappa, exact.h0, grid)
    else:
        raise TypeError("exact must be a PhiKappa or a ModalField")

    M_all = max(numeric.M, M_ref)
    if _cache is None:
        _cache = _station_tables(geometry, params, grid, M_all, n_quad or default_n_quad(M_all))
    er_field = _field_error(numeric, exact, *_cache)

    n_common = min(numeric.n_tot, ref_amps.shape[0])
    diff = numeric.amplitudes[:n_common] - ref_amps[:n_common]
    e_phi = np.sqrt(numeric.dx * np.sum(diff**2, axis=1))
    g_num = dtn_from_solution(numeric, geometry, params, psi)
    return ErrorMetrics(er_field, e_phi, g_num.relative_l2_error(g_ref))


# ---------------------------------------------------------------------------
# convergence sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkCase:
    family: str
    epsilon: float
    kappa: int = 1
    gamma: float = 0.0
    h0: float = 1.0
    nx: int = 256
    n_tot: Sequence[int] = tuple(range(3, 71))

    def __post_init__(self):
        if self.family not in ("smooth", "rough"):
            raise ValueError(f"unknown benchmark family {self.family!r}")
        if not self.n_tot or min(self.n_tot) < 3:
            raise ValueError("N_tot values must be at least 3")
        object.__setattr__(self, "n_tot", tuple(sorted(set(int(n) for n in self.n_tot))))

    def geometry(self) -> StripGeometry:
        if self.family == "smooth":
            return build_smooth_profile(self.epsilon, self.kappa, self.gamma, self.h0)
        return build_rough_profile(self.epsilon, self.h0)

    def params(self) -> ReferenceParams:
        return ReferenceParams.from_wavenumber(self.kappa, self.h0)

    def field(self) -> PhiKappa:
        return PhiKappa(float(self.kappa), self.h0)


@dataclass
class ConvergenceRow:
    n_tot: int
    er_field: float
    er_dtn: float
    e_phi: np.ndarray
    wall_ms: float
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ConvergenceReport:
    case: BenchmarkCase
    rows: List[ConvergenceRow]
    plateau_threshold: float = PLATEAU_THRESHOLD
    window: tuple = FIELD_WINDOW
    slopes: Dict[str, float] = field(default_factory=dict)
    plateau_n_tot: Optional[int] = None

    def series(self, name: str):
        """``(N_tot, values)`` of successful rows for ``er_field``, ``er_dtn`` or ``e_phi_<n>``."""
        rows = [r for r in self.rows if r.ok]
        n = np.array([r.n_tot for r in rows], dtype=float)
        if name in ("er_field", "er_dtn"):
            return n, np.array([getattr(r, name) for r in rows])
        if name == "e_phi_last":
            return n, np.array([r.e_phi[-1] for r in rows])
        mode = int(name.rsplit("_", 1)[1].replace("m", "-"))
        keep = [i for i, r in enumerate(rows) if mode + 2 < r.e_phi.size]
        return n[keep], np.array([rows[i].e_phi[mode + 2] for i in keep])

    def write_csv(self, path, timings: bool = False) -> None:
        """``convergence.csv``; ``wall_ms`` is left blank unless ``timings`` so reruns are byte-identical."""
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N_tot", "ER_field", "ER_dtn", "E_phi_minus2", "E_phi_0", "E_phi_last", "wall_ms"])
            for r in self.rows:
                if not r.ok:
                    w.writerow([r.n_tot, "nan", "nan", "nan", "nan", "nan", ""])
                    continue
                vals = [r.er_field, r.er_dtn, r.e_phi[0], r.e_phi[2], r.e_phi[-1]]
                w.writerow([r.n_tot] + [f"{v:.16e}" for v in vals] + [f"{r.wall_ms:.3f}" if timings else ""])


def detect_plateau(n_tot, errors, threshold: float = PLATEAU_THRESHOLD) -> Optional[int]:
    """First ``N_tot`` whose error improves on the previous one by less than ``threshold``."""
    for i in range(1, len(errors)):
        if errors[i] > (1.0 - threshold) * errors[i - 1]:
            return int(n_tot[i])
    return None


def _fit(n, v, lo, hi) -> float:
    try:
        return loglog_slope(n, v, (lo, hi))
    except ValueError:
        return float("nan")


def convergence_study(
    case: BenchmarkCase,
    plateau_threshold: float = PLATEAU_THRESHOLD,
    window: Sequence[int] = FIELD_WINDOW,
    threads: int = 1,
    n_quad: Optional[int] = None,
) -> ConvergenceReport:
    """Solve the benchmark for every ``N_tot`` of ``case`` and measure errors.

    The basis does not depend on the truncation order, so coefficients and
    basis tables are built once at the largest ``N_tot`` and sliced. Failures
    at one ``N_tot`` are recorded in the row and do not abort the sweep.

    Slopes: ``er_field`` over ``window``; ``er_dtn`` and ``e_phi_m2`` over
    ``window`` clipped at the DtN plateau.
    """
    geometry, params, fld = case.geometry(), case.params(), case.field()
    M_max = max(case.n_tot) - 3
    nq = n_quad or default_n_quad(M_max)
    grid = geometry.grid(case.nx)
    t0 = time.perf_counter()
    cache = _station_tables(geometry, params, grid, M_max, nq)
    stations = cache[0]
    A, B, C = _coefficients_from_stations(stations, nq)
    exact = exact_modal_amplitudes_phikappa(geometry, params, fld.kappa, M_max, grid)
    psi = fld.surface_data(geometry, grid)
    g_exact = dtn_exact_benchmark(geometry, fld.kappa, fld.h0, grid)
    setup = {"family": case.family, "epsilon": case.epsilon, "M_max": M_max,
             "setup_ms": round(1e3 * (time.perf_counter() - t0), 1)}
    logger.info("benchmark setup %s", json.dumps(setup))

    def run(nt: int) -> ConvergenceRow:
        t = time.perf_counter()
        N = nt
        M = nt - 3
        try:
            system = assemble_linear_system(A[:, :N, :N], B[:, :N, :N], C[:, :N, :N], psi, grid, M, geometry.L)
            mf = solve_ccms(system)
        except CcmsError as exc:
            logger.warning("N_tot=%d failed: %s", nt, exc)
            return ConvergenceRow(nt, float("nan"), float("nan"), np.full(N, np.nan), 0.0, str(exc))
        wall = 1e3 * (time.perf_counter() - t)
        er_field = _field_error(mf, fld, *cache)
        e_phi = np.sqrt(mf.dx * np.sum((mf.amplitudes - exact[:N]) ** 2, axis=1))
        er_dtn = dtn_from_solution(mf, geometry, params, psi).relative_l2_error(g_exact)
        return ConvergenceRow(nt, er_field, er_dtn, e_phi, wall)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, case.n_tot))
    else:
        rows = [run(nt) for nt in case.n_tot]

    report = ConvergenceReport(case, rows, plateau_threshold, tuple(window))
    n, er_dtn = report.series("er_dtn")
    report.plateau_n_tot = detect_plateau(n, er_dtn, plateau_threshold)
    lo, hi = window
    hi_sc = hi if report.plateau_n_tot is None else min(hi, report.plateau_n_tot - 1)
    report.slopes["er_field"] = _fit(*report.series("er_field"), lo, hi)
    report.slopes["er_dtn"] = _fit(n, er_dtn, lo, hi_sc)
    report.slopes["e_phi_m2"] = _fit(*report.series("e_phi_m2"), lo, hi_sc)
    logger.info("benchmark slopes %s", json.dumps(report.slopes, sort_keys=True))
    return report


def _coefficients_from_stations(stations, n_quad):
    mats = [_coefficients(st, n_quad) for st in stations]
    return tuple(np.stack([m[i] for m in mats]) for i in range(3))
