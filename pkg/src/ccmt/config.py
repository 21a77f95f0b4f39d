"""Run configuration: an INI-style file read with :mod:`configparser`.

Every key is documented in ``docs/config.md``. Values missing from the file
fall back to the defaults below, so an empty file describes the smooth
``epsilon = 0.5`` benchmark on 256 stations.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .eigensystem import ReferenceParams
from .geometry import (
    CosineProfile,
    GeometryError,
    StripGeometry,
    build_custom_profile,
    build_flat,
    build_rough_profile,
    build_smooth_profile,
    load_profile_csv,
)

COMMANDS = ("solve", "convergence", "decay", "dtn", "oracle-check")
FAMILIES = ("flat", "smooth", "rough", "custom")


class ConfigError(ValueError):
    """Unparsable or inadmissible configuration (a usage error)."""


@dataclass(frozen=True)
class GeometrySpec:
    family: str = "smooth"
    epsilon: float = 0.5
    kappa: int = 1
    gamma: float = 0.0
    h0: float = 1.0
    file: Optional[Path] = None
    eta_amplitude: float = 0.0
    eta_wavenumber: float = 1.0
    eta_phase: float = 0.0
    bottom_amplitude: float = 0.0
    bottom_wavenumber: float = 2.0

    def build(self) -> StripGeometry:
        if self.family == "flat":
            return build_flat(self.h0)
        if self.family == "smooth":
            return build_smooth_profile(self.epsilon, self.kappa, self.gamma, self.h0)
        if self.family == "rough":
            return build_rough_profile(self.epsilon, self.h0)
        if self.file is not None:
            return load_profile_csv(self.file, self.h0)
        eta = CosineProfile(self.eta_amplitude, self.eta_wavenumber, self.eta_phase)
        bottom = CosineProfile(self.bottom_amplitude, self.bottom_wavenumber, 0.0, self.h0)
        return build_custom_profile(eta, bottom, self.h0)


@dataclass(frozen=True)
class RunConfig:
    command: str = "solve"
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    mu0: Optional[float] = None  # None means kappa tanh(kappa h0)
    kappa: float = 1.0
    psi: str = "benchmark"
    nx: int = 256
    n_tot: int = 7
    n_tot_list: Tuple[int, ...] = tuple(range(3, 31))
    n_quad: Optional[int] = None
    dropped_row: Optional[int] = None
    plateau_threshold: float = 0.05
    field_window: Tuple[float, float] = (5.0, 25.0)
    decay_window: Tuple[float, float] = (10.0, 60.0)
    oracle_nz: int = 257
    out: Path = Path("ccmt-out")
    timings: bool = False
    plots: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        if self.geometry.family not in FAMILIES:
            raise ConfigError(f"unknown geometry family {self.geometry.family!r}")
        if self.nx < 5:
            raise ConfigError("nx must be at least 5")
        if self.n_tot < 3 or min(self.n_tot_list) < 3:
            raise ConfigError("N_tot values must be at least 3")
        if self.psi not in ("benchmark", "cosine"):
            raise ConfigError(f"unknown surface data {self.psi!r}")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.oracle_nz < 16:
            raise ConfigError("oracle nz must be at least 16")
        if self.mu0 is not None and not self.mu0 > 0:
            raise ConfigError("mu0 must be positive")

    @property
    def M(self) -> int:
        return self.n_tot - 3

    def params(self) -> ReferenceParams:
        h0 = self.geometry.h0
        mu0 = self.kappa * math.tanh(self.kappa * h0) if self.mu0 is None else self.mu0
        return ReferenceParams(mu0, h0)

    def build_geometry(self) -> StripGeometry:
        try:
            return self.geometry.build()
        except (GeometryError, OSError) as exc:
            raise ConfigError(f"invalid geometry: {exc}") from exc

    def surface_data(self, geometry: StripGeometry):
        """``psi(x)``: the benchmark trace ``cosh(kappa (eta + h0)) cos(kappa x)`` or ``cos(kappa x)``."""
        k, h0 = self.kappa, geometry.h0
        if self.psi == "benchmark":
            return lambda x: np.cosh(k * (geometry.eta(x)[0] + h0)) * np.cos(k * x)
        return lambda x: np.cos(k * x)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _int_list(text: str) -> Tuple[int, ...]:
    """``"3-30"``, ``"4, 6, 8"`` or a mix such as ``"3-10, 15, 20"``."""
    out = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(p) for p in part.split("-", 1))
            if hi < lo:
                raise ConfigError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise ConfigError("empty N_tot list")
    return tuple(sorted(set(out)))


def _pair(text: str) -> Tuple[float, float]:
    vals = [float(v) for v in text.replace(";", ",").split(",")]
    if len(vals) != 2 or vals[0] >= vals[1]:
        raise ConfigError(f"expected 'lo, hi' with lo < hi, got {text!r}")
    return vals[0], vals[1]


def _auto(text: str, conv):
    return None if text.strip().lower() in ("auto", "") else conv(text)


def load_config(path) -> RunConfig:
    """Parse a configuration file; relative CSV paths resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    known = {"run", "geometry", "reference", "discretization", "analysis", "oracle", "output"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")

    try:
        return _from_parser(cp, path.parent)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value in {path}: {exc}") from exc


def _from_parser(cp: configparser.ConfigParser, base: Path) -> RunConfig:
    d = RunConfig()
    g = GeometrySpec()
    geo = cp["geometry"] if cp.has_section("geometry") else {}
    file = geo.get("file")
    if file:
        file = Path(file)
        file = file if file.is_absolute() else base / file
        if not file.is_file():
            raise ConfigError(f"profile file not found: {file}")
    gspec = GeometrySpec(
        family=geo.get("family", g.family).strip(),
        epsilon=float(geo.get("epsilon", g.epsilon)),
        kappa=int(geo.get("kappa", g.kappa)),
        gamma=float(geo.get("gamma", g.gamma)),
        h0=float(geo.get("h0", g.h0)),
        file=file or None,
        eta_amplitude=float(geo.get("eta_amplitude", g.eta_amplitude)),
        eta_wavenumber=float(geo.get("eta_wavenumber", g.eta_wavenumber)),
        eta_phase=float(geo.get("eta_phase", g.eta_phase)),
        bottom_amplitude=float(geo.get("bottom_amplitude", g.bottom_amplitude)),
        bottom_wavenumber=float(geo.get("bottom_wavenumber", g.bottom_wavenumber)),
    )
    sec = lambda name: cp[name] if cp.has_section(name) else {}  # noqa: E731
    run, ref, disc = sec("run"), sec("reference"), sec("discretization")
    ana, orc, outp = sec("analysis"), sec("oracle"), sec("output")
    dropped = disc.get("dropped_row", "last").strip().lower()
    return RunConfig(
        command=run.get("command", d.command).strip(),
        geometry=gspec,
        mu0=_auto(ref.get("mu0", "auto"), float),
        kappa=float(ref.get("kappa", d.kappa)),
        psi=ref.get("psi", d.psi).strip(),
        nx=int(disc.get("nx", d.nx)),
        n_tot=int(disc.get("n_tot", d.n_tot)),
        n_tot_list=_int_list(disc["n_tot_list"]) if "n_tot_list" in disc else d.n_tot_list,
        n_quad=_auto(disc.get("n_quad", "auto"), int),
        dropped_row=None if dropped == "last" else int(dropped),
        plateau_threshold=float(ana.get("plateau_threshold", d.plateau_threshold)),
        field_window=_pair(ana["field_window"]) if "field_window" in ana else d.field_window,
        decay_window=_pair(ana["decay_window"]) if "decay_window" in ana else d.decay_window,
        oracle_nz=int(orc.get("nz", d.oracle_nz)),
        out=Path(run.get("out", str(d.out))),
        timings=_bool(outp.get("timings", "no")),
        plots=_bool(outp.get("plots", "no")),
    )


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")
