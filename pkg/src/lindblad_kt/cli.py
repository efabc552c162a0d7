"""Command line entry point: ``lindblad-kt run CONFIG [--override k=v] [--output-dir D]``.

Exit status 0 on success, 2 for configuration errors, 3 when the
integration aborts. Artifacts written before an abort are kept.
"""

from __future__ import annotations

import argparse
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import diagnostics as diag
from .artifacts import SeriesWriter, snapshot_name, write_manifest, write_snapshot
from .config import ConfigError, RunConfig, load_config
from .integrator import IntegrationAborted, IntegrationStats
from .solver import Problem

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3

SERIES_FILE = "series.csv"
MANIFEST_FILE = "manifest.json"

log = logging.getLogger("lindblad_kt")


def run(cfg: RunConfig, output_dir: Path | None = None) -> int:
    """Execute one configured run, writing artifacts into ``output_dir``."""
    out = Path(output_dir) if output_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    checks = cfg.constraint_checks()
    for name in ("dekker", "harmonic"):
        if checks[name] == "fail":
            log.warning("%s condition violated; running anyway", name)

    problem = Problem(cfg.grid, cfg.coefficients, cfg.potential(), cfg.boundary, cfg.backend)
    s0 = problem.initial_state(cfg.initial_density())
    trace0 = diag.trace(s0)
    snap_times = set(cfg.snapshot_times) | {cfg.integrator.t_final}
    samples = cfg.sample_times()
    integ = cfg.integrator
    integ.sample_times = samples

    snapshots = []
    stats = IntegrationStats()
    manifest = {
        "version": __version__,
        "config": cfg.values,
        "constraints": checks,
        "backend": problem.rhs_fn.backend,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "initial_trace": trace0,
        "snapshots": snapshots,
        "series": SERIES_FILE,
    }

    def observe(s):
        series.write(s.time, diag.norm_deviation(s, trace0), diag.imag_violation(s))
        if s.time in snap_times:
            name = snapshot_name(len(snapshots), s.time)
            write_snapshot(s, out / name, cfg.boundary)
            snapshots.append({"time": s.time, "file": name})

    status = EXIT_OK
    start = time.perf_counter()
    final = None
    with SeriesWriter(out / SERIES_FILE) as series:
        try:
            final = problem.evolve(s0, integ, observe, stats)
            manifest["status"] = "completed"
        except IntegrationAborted as exc:
            status = EXIT_ABORT
            manifest["status"] = "aborted"
            manifest["abort"] = {"time": exc.t, "steps": exc.steps, "message": str(exc)}
            log.error("integration aborted at t=%.6g fm/c: %s", exc.t, exc)
    manifest["wall_clock_s"] = time.perf_counter() - start
    manifest["stats"] = {
        "accepted": stats.accepted, "rejected": stats.rejected, "rhs_evals": stats.rhs_evals,
        "dt_min": stats.dt_history_min if stats.accepted else None,
        "dt_max": stats.dt_history_max if stats.accepted else None,
    }
    if final is not None and cfg.coefficients.gamma > 0:
        x, anti = diag.anti_diagonal(final)
        try:
            manifest["fitted_temperature_mev"] = diag.fit_temperature(x, anti, cfg.coefficients.mass)
        except ValueError as exc:
            manifest["fitted_temperature_mev"] = None
            log.warning("temperature fit skipped: %s", exc)
    write_manifest(out / MANIFEST_FILE, manifest)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lindblad-kt",
                                     description="Lindblad density-matrix evolution with a KT scheme")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a configured simulation")
    p_run.add_argument("config", help="path to a key = value config file")
    p_run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry (repeatable), e.g. grid.n_cells=100")
    p_run.add_argument("--output-dir", default=None, help="overrides output.directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.override)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, Path(args.output_dir) if args.output_dir else None)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
