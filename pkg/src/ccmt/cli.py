"""Command-line front end.

    ccmt <command> [--config FILE] [--out DIR] [--plots] [--threads N]

Commands: solve, convergence, decay, dtn, oracle-check. Exit status is 0 on
success, 1 for usage or configuration errors and 2 for numerical failures.
Set ``CCMT_LOG`` (DEBUG, INFO, WARNING, ...) for log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .benchmarks import BenchmarkCase, PhiKappa, convergence_study, error_metrics
from .ccms import CcmsError, solve_bvp
from .config import COMMANDS, ConfigError, RunConfig, load_config
from .dtn import dtn_exact_benchmark, dtn_from_solution, write_dtn_csv
from .eigensystem import RootFindingError
from .expansion import ModalField, decay_diagnostics
from .geometry import GeometryError
from .oracle import OracleError, sigma_fd_solve, write_discrepancy_csv
from .plots import loglog_svg

logger = logging.getLogger("ccmt")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_amplitudes(path: Path, mf: ModalField) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x"] + [f"phi_{n}" for n in range(-2, mf.M + 1)])
        for j, x in enumerate(mf.grid):
            w.writerow([f"{x:.16e}"] + [f"{v:.16e}" for v in mf.amplitudes[:, j]])


def _solve(cfg: RunConfig):
    geometry = cfg.build_geometry()
    params = cfg.params()
    psi = cfg.surface_data(geometry)
    mf = solve_bvp(geometry, params, psi, cfg.M, cfg.nx, cfg.n_quad, cfg.dropped_row)
    return geometry, params, psi, mf


def _benchmark_reference(cfg: RunConfig, geometry):
    """``PhiKappa`` when the run is the benchmark problem, otherwise ``None``."""
    if cfg.psi != "benchmark" or not geometry.flat_bottom or cfg.mu0 is not None:
        return None
    return PhiKappa(cfg.kappa, geometry.h0)


def cmd_solve(cfg: RunConfig) -> dict:
    geometry, params, psi, mf = _solve(cfg)
    _write_amplitudes(cfg.out / "amplitudes.csv", mf)
    summary = {
        "command": "solve",
        "n_tot": mf.n_tot,
        "nx": mf.nx,
        "constraint_error": float(np.abs(mf.surface_trace() - psi(mf.grid)).max()),
    }
    ref = _benchmark_reference(cfg, geometry)
    if ref is not None:
        m = error_metrics(mf, ref, geometry, params, cfg.n_quad)
        summary.update(ER_field=m.er_field, ER_dtn=m.er_dtn, E_phi_minus2=m.e(-2))
    return summary


def cmd_dtn(cfg: RunConfig) -> dict:
    geometry, params, psi, mf = _solve(cfg)
    g = dtn_from_solution(mf, geometry, params, psi)
    ref = _benchmark_reference(cfg, geometry)
    exact = dtn_exact_benchmark(geometry, ref.kappa, ref.h0, mf.grid) if ref is not None else None
    write_dtn_csv(cfg.out / "dtn.csv", g, exact)
    summary = {"command": "dtn", "n_tot": mf.n_tot, "nx": mf.nx, "mean_G": g.mean()}
    if exact is not None:
        summary["ER_dtn"] = g.relative_l2_error(exact)
    return summary


def cmd_decay(cfg: RunConfig) -> dict:
    lo, hi = cfg.decay_window
    if cfg.M < lo + 1:
        raise ConfigError(f"decay window {lo:g}..{hi:g} needs n_tot > {lo + 3:g}, got {cfg.n_tot}")
    geometry, params, psi, mf = _solve(cfg)
    rep = decay_diagnostics(mf, geometry, cfg.decay_window)
    rep.write_csv(cfg.out / "decay.csv")
    if cfg.plots:
        pos = rep.n >= 1
        loglog_svg(
            cfg.out / "decay.svg",
            {"C2 norm": (rep.n[pos], rep.c2[pos]), "sup": (rep.n[pos], rep.sup[pos])},
            f"modal decay, N_tot = {mf.n_tot}",
            "n",
            "norm of phi_n",
        )
    return {"command": "decay", "n_tot": mf.n_tot, "window": list(rep.window), "slope": rep.slope}


def cmd_convergence(cfg: RunConfig) -> dict:
    fam = cfg.geometry.family
    if fam not in ("smooth", "rough"):
        raise ConfigError("convergence runs need the smooth or rough benchmark family")
    if cfg.psi != "benchmark" or cfg.mu0 is not None:
        raise ConfigError("convergence runs need psi = benchmark and mu0 = auto")
    g = cfg.geometry
    case = BenchmarkCase(fam, g.epsilon, g.kappa, g.gamma, g.h0, cfg.nx, cfg.n_tot_list)
    rep = convergence_study(case, cfg.plateau_threshold, cfg.field_window, cfg.threads, cfg.n_quad)
    rep.write_csv(cfg.out / "convergence.csv", timings=cfg.timings)
    if cfg.plots:
        series = {name: rep.series(key) for name, key in
                  (("ER field", "er_field"), ("ER DtN", "er_dtn"), ("E phi_-2", "e_phi_m2"))}
        loglog_svg(cfg.out / "convergence.svg", series, f"{fam}, epsilon = {g.epsilon}", "N_tot", "error")
    failed = [r.n_tot for r in rep.rows if not r.ok]
    return {
        "command": "convergence",
        "family": fam,
        "epsilon": g.epsilon,
        "plateau_n_tot": rep.plateau_n_tot,
        "slopes": rep.slopes,
        "failed_n_tot": failed,
    }


def cmd_oracle_check(cfg: RunConfig) -> dict:
    geometry, params, psi, mf = _solve(cfg)
    g = dtn_from_solution(mf, geometry, params, psi)
    sol = sigma_fd_solve(geometry, psi, cfg.nx, cfg.oracle_nz)
    write_discrepancy_csv(cfg.out / "oracle_dtn.csv", g, sol.dtn)
    summary = {
        "command": "oracle-check",
        "n_tot": mf.n_tot,
        "nx": cfg.nx,
        "nz": cfg.oracle_nz,
        "discrepancy": g.relative_l2_error(sol.dtn),
    }
    if cfg.timings:
        summary["ccms_ms"] = mf.stats.get("assembly_ms")
        summary["oracle_ms"] = sol.stats["wall_ms"]
    return summary


HANDLERS = {
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "decay": cmd_decay,
    "dtn": cmd_dtn,
    "oracle-check": cmd_oracle_check,
}


def run_command(cfg: RunConfig) -> int:
    """Execute ``cfg`` and write ``summary.json`` next to the artifacts."""
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        summary = HANDLERS[cfg.command](cfg)
    except (ConfigError, GeometryError) as exc:
        logger.error("usage error: %s", exc)
        return EXIT_USAGE
    except (CcmsError, OracleError, RootFindingError, np.linalg.LinAlgError) as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    _write_json(cfg.out / "summary.json", summary)
    logger.info("summary %s", json.dumps(summary, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ccmt", description="Coupled-mode solver for periodic strips.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="INI-style run configuration (see docs/config.md)")
    p.add_argument("--out", type=Path, help="output directory (overrides [run] out)")
    p.add_argument("--plots", action="store_true", help="also write SVG log-log plots")
    p.add_argument("--threads", type=int, help="parallel N_tot solves in convergence sweeps")
    return p


def _setup_logging():
    level = os.environ.get("CCMT_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = cfg.with_overrides(command=args.command, out=args.out, threads=args.threads)
        if args.plots:
            cfg = cfg.with_overrides(plots=True)
    except ConfigError as exc:
        logger.error("usage error: %s", exc)
        return EXIT_USAGE
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
