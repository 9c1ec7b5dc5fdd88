"""Command-line front end: ``subgauss-ortho <command> [--config FILE] ...``.

Every command writes one or more CSV files into the output directory. Each
file starts with ``#`` comment lines echoing the resolved configuration, so
any output can be reproduced from its own header.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BoundReport, calibrate, evaluate
from .config import RunConfig, load_config
from .errors import (
    Infeasible,
    NonConvergent,
    ParseError,
    SubgaussOrthoError,
    TailNotNegligible,
    TailTooHeavy,
    ValidationError,
)
from .expansion import CoefficientTable, build_table
from .montecarlo import SimConfig, estimate_reliability
from .verification import run_basis_checks

log = logging.getLogger("subgauss_ortho")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_INFEASIBLE = 3


# --------------------------------------------------------------------------
# CSV output


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


class CsvReport:
    def __init__(self, command: str, cfg: RunConfig, timestamp: bool):
        self.lines = [f"# subgauss-ortho {__version__} {command}"]
        if timestamp:
            now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0)
            self.lines.append(f"# generated = {now.isoformat()}")
        self.lines += [f"# config.{k} = {v}" for k, v in cfg.items()]

    def result(self, key: str, value) -> None:
        self.lines.append(f"# result.{key} = {fmt(value)}")

    def header(self, *columns: str) -> None:
        self.lines.append(",".join(columns))

    def row(self, *values) -> None:
        self.lines.append(",".join(fmt(v) for v in values))

    def write(self, path: Path) -> Path:
        """Write atomically: temp file in the same directory, then rename."""
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(self.lines))
                fh.write("\n")
            os.chmod(tmp, 0o666 & ~_umask())
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        log.info("wrote %s", path)
        return path


# --------------------------------------------------------------------------
# commands


def _table(cfg: RunConfig, n_max: int | None = None) -> CoefficientTable:
    return build_table(cfg.kernel_spec(), cfg.basis_id(), cfg.n_max if n_max is None else n_max,
                       cfg.time_grid(), cfg.quad_spec(), cfg.approx())


def _bound_rows(rep: CsvReport, report: BoundReport) -> None:
    rep.header("N", "c_N", "threshold_reliability", "threshold_accuracy", "pass", "flags")
    for r in report.per_N:
        rep.row(r.N, r.c_n, r.threshold_reliability, r.threshold_accuracy, r.passed, ";".join(r.flags))


def cmd_verify_basis(cfg: RunConfig, out: Path, timestamp: bool = True) -> int:
    rep = CsvReport("verify-basis", cfg, timestamp)
    results = run_basis_checks(cfg.quad_spec())
    ok = all(r.passed for r in results)
    rep.result("all_pass", ok)
    rep.header("check", "max_deviation", "tolerance", "pass")
    for r in results:
        rep.row(r.name, r.max_deviation, r.tolerance, r.passed)
    rep.write(out / "basis_report.csv")
    for r in results:
        if not r.passed:
            print(f"check {r.name} failed: deviation {r.max_deviation:.3e} > {r.tolerance:.3e}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_coeffs(cfg: RunConfig, out: Path, timestamp: bool = True) -> int:
    table = _table(cfg)
    rep = CsvReport("coeffs", cfg, timestamp)
    rep.header("k", "t", "a", "a_hat", "delta")
    for row in table.rows():
        rep.row(*row)
    rep.write(out / "coefficients.csv")
    return EXIT_OK


def cmd_bound(cfg: RunConfig, out: Path, timestamp: bool = True) -> int:
    table = _table(cfg)
    report = evaluate(cfg.bound_method(), table, cfg.kernel_spec(), cfg.phi_params(), cfg.accuracy(),
                      range(cfg.n_min, cfg.search_limit() + 1), cfg.quad_spec())
    rep = CsvReport("bound", cfg, timestamp)
    for key, value in sorted(report.info.items()):
        rep.result(key, value)
    _bound_rows(rep, report)
    rep.write(out / "bounds.csv")
    return EXIT_OK


def _calibrate(cfg: RunConfig, table: CoefficientTable) -> BoundReport:
    return calibrate(cfg.bound_method(), table, cfg.kernel_spec(), cfg.phi_params(), cfg.accuracy(),
                     cfg.n_min, cfg.search_limit(), cfg.quad_spec())


def _minimal_text(report: BoundReport) -> str:
    return "none" if report.minimal_N is None else str(report.minimal_N)


def cmd_calibrate(cfg: RunConfig, out: Path, timestamp: bool = True) -> int:
    report = _calibrate(cfg, _table(cfg))
    rep = CsvReport("calibrate", cfg, timestamp)
    rep.result("minimal_N", _minimal_text(report))
    rep.result("flags", ";".join(report.diagnostics) or "none")
    for key, value in sorted(report.info.items()):
        rep.result(key, value)
    _bound_rows(rep, report)
    rep.write(out / "calibration.csv")
    if report.minimal_N is None:
        raise Infeasible(f"no N in [{cfg.n_min}, {cfg.search_limit()}] meets both thresholds")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Path, timestamp: bool = True) -> int:
    """Calibrate, then test the calibrated order by simulation."""
    table = _table(cfg)
    report = _calibrate(cfg, table)
    if report.minimal_N is None:
        raise Infeasible(f"no N in [{cfg.n_min}, {cfg.search_limit()}] meets both thresholds")
    sim = SimConfig(cfg.seed, cfg.paths, report.minimal_N, cfg.n_ref, cfg.distribution)
    if sim.n_ref > table.n_max:
        log.info("extending the coefficient table to n_ref=%d", sim.n_ref)
        table = _table(cfg, n_max=sim.n_ref)
    est = estimate_reliability(table, sim, cfg.accuracy(), keep_paths=True)

    rep = CsvReport("simulate", cfg, timestamp)
    rep.result("n_model", sim.n_model)
    rep.result("n_ref", sim.n_ref)
    rep.result("neglected_tail_lp", est.neglected_tail)
    rep.header("M", "exceed_fraction", "std_error", "alpha", "verdict")
    rep.row(est.paths, est.exceed_fraction, est.std_error, est.alpha_target, est.verdict)
    rep.write(out / "simulation.csv")

    paths = CsvReport("simulate", cfg, timestamp)
    paths.header("path", "error_lp")
    for i, e in enumerate(est.per_path_errors):
        paths.row(i, e)
    paths.write(out / "simulation_paths.csv")
    return EXIT_OK


COMMANDS = {
    "verify-basis": cmd_verify_basis,
    "coeffs": cmd_coeffs,
    "bound": cmd_bound,
    "calibrate": cmd_calibrate,
    "simulate": cmd_simulate,
}


# --------------------------------------------------------------------------
# entry point


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subgauss-ortho", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="key = value config file (defaults if omitted)")
        p.add_argument("--output-dir", type=Path, help="overrides the config output_dir")
        p.add_argument("--no-timestamp", action="store_true", help="omit the generation time line")
        p.add_argument("--seed", type=_u64, help="overrides the config seed")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ParseError, ValidationError, FileNotFoundError)):
        return EXIT_VALIDATION
    if isinstance(exc, Infeasible):
        return EXIT_INFEASIBLE
    if isinstance(exc, (NonConvergent, TailTooHeavy, TailNotNegligible)):
        return EXIT_NUMERICAL
    return EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.output_dir is not None:
        overrides["output_dir"] = str(args.output_dir)
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](cfg, Path(cfg.output_dir), timestamp=not args.no_timestamp)
    except (SubgaussOrthoError, ValueError, FileNotFoundError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)


def run_config(command: str, cfg: RunConfig, timestamp: bool = False) -> int:
    """Run one command on an already-built config (library use)."""
    return COMMANDS[command](cfg, Path(cfg.output_dir), timestamp=timestamp)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


__all__ = ["main", "build_parser", "COMMANDS", "CsvReport", "Infeasible", "run_config"]
