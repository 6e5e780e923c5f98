"""
Command-line front end for the blow-up laboratory.
Parses arguments, dispatches the subcommands and maps their outcome to exit codes.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from rich.console import Console
from rich.markup import escape
from rich.table import Table

from blowup_lab import __version__
from blowup_lab.core.selfsim import DISSIPATION, VAR
from blowup_lab.handlers.experiment_handler import (
    EnergyResult,
    ExperimentHandler,
    ReportData,
    RunResult,
    SweepResult,
)
from blowup_lab.handlers.file_handler import CONFIG_NAME, OUT_ENV, resolve_output_dir
from blowup_lab.handlers.selftest_handler import OracleResult, run_selftest
from blowup_lab.ui.colors import COLORS, get_color
from blowup_lab.utils.config import Config
from blowup_lab.utils.errors import BlowupLabError, ConfigError, InvalidProblemError
from blowup_lab.utils.logging import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

SUBCOMMANDS = ("run", "sweep", "energy", "report", "selftest")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per subcommand."""
    parser = argparse.ArgumentParser(
        prog="blowup-lab",
        description="Numerical blow-up experiments for u_t = Laplace(u) + V(x) u^p.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment file (INI sections)")
    common.add_argument("--out", help=f"output directory; overrides ${OUT_ENV} and output.dir")
    common.add_argument("--verbose", "-v", action="store_true", help="log at DEBUG level")

    subparsers = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    subparsers.required = True

    run = subparsers.add_parser("run", parents=[common], help="single trajectory and its blow-up record")
    run.add_argument("--M", type=float, help="amplitude; overrides problem.M")

    sweep = subparsers.add_parser("sweep", parents=[common], help="amplitude sweep with the asymptotic checks")
    sweep.add_argument("--workers", type=int, help="worker processes; 0 uses the physical core count")

    subparsers.add_parser("energy", parents=[common], help="self-similar energies from a prior run")

    report = subparsers.add_parser("report", parents=[common], help="summary tables and plotting CSVs")
    report.add_argument("--tui", action="store_true", help="open the interactive report viewer")

    subparsers.add_parser("selftest", parents=[common], help="run the oracle suite")
    return parser


def load_config(args: argparse.Namespace) -> Config:
    """
    The configuration of a subcommand.

    ``energy`` and ``report`` fall back to the ``config.ini`` stored in the
    output directory when ``--config`` is not given.

    Raises:
        ConfigError: When no configuration can be found or it is malformed.
    """
    if args.config is not None:
        return Config.load(args.config)
    if args.command in ("energy", "report") and args.out:
        stored = Path(args.out) / CONFIG_NAME
        if stored.exists():
            return Config.load(stored)
    raise ConfigError(f"'{args.command}' needs --config")


def dispatch(argv: Optional[Sequence[str]] = None, console: Optional[Console] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name; ``sys.argv[1:]`` when None.
        console: Console for the summary tables.

    Returns:
        0 on success, 1 when a check fails or the computation raises,
        2 on usage and configuration errors.
    """
    console = console or Console()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging(logging.DEBUG if args.verbose else logging.INFO)

    if args.command == "selftest":
        return _selftest(console)

    try:
        config = load_config(args)
        output_dir = resolve_output_dir(config, args.out)
        handler = ExperimentHandler(config, output_dir, workers=getattr(args, "workers", None))
        handler.validate()
    except BlowupLabError as e:
        _print_error(console, e)
        return EXIT_USAGE

    try:
        if args.command == "run":
            _print_run(console, handler.run(args.M))
            return EXIT_OK
        if args.command == "sweep":
            result = handler.sweep()
            _print_sweep(console, result)
            return EXIT_OK if result.passed else EXIT_CHECK_FAILED
        if args.command == "energy":
            _print_energy(console, handler.energy())
            return EXIT_OK
        data = handler.report()
        _print_report(console, data)
        if args.tui:
            from blowup_lab.ui.app import ReportViewer

            ReportViewer(data).run()
        return EXIT_OK
    except (ConfigError, InvalidProblemError) as e:
        _print_error(console, e)
        return EXIT_USAGE
    except BlowupLabError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        _print_error(console, e)
        return EXIT_CHECK_FAILED


def _print_error(console: Console, error: BlowupLabError) -> None:
    console.print(f"[{COLORS['error']}]error[/] {escape(str(error))}")


def _verdict(passed: bool) -> str:
    return f"[{get_color('check.pass')}]pass[/]" if passed else f"[{get_color('check.fail')}]FAIL[/]"


def proxy_extent(proxy: Sequence[float]) -> str:
    """Extent [first, last] of the blow-up set proxy; a lone node prints as itself."""
    if not proxy:
        return "-"
    if len(proxy) == 1:
        return f"{{{proxy[0]:.4g}}}"
    return f"[{proxy[0]:.4g}, {proxy[-1]:.4g}]"


def _checks_table(title: str, checks: Dict[str, bool]) -> Table:
    table = Table(title=title)
    table.add_column("check")
    table.add_column("verdict")
    for name, passed in checks.items():
        table.add_row(name, _verdict(passed))
    return table


def _print_run(console: Console, result: RunResult) -> None:
    record = result.record
    table = Table(title=f"blow-up record (M = {record.M:g})")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("T_est", f"{record.T_est:.10g} +- {record.T_ci:.2g}")
    table.add_row("a", f"{record.a:.6g}")
    table.add_row("rate exponent", f"{record.rate_exponent:.6g}")
    table.add_row("sup (T-t)^beta u_max", f"{record.typeI_sup:.6g}")
    table.add_row("plateau ratio", f"{record.plateau:.4g}")
    table.add_row("blow-up set proxy", proxy_extent(record.blowup_set_proxy))
    table.add_row("stop reason", result.trajectory.stop_reason)
    console.print(table)


def _print_sweep(console: Console, result: SweepResult) -> None:
    summary = result.summary
    table = Table(title=f"sweep (A = {summary['A']:.6g}, target A/(p-1) = {summary['target']:.6g})")
    for column in ("M", "T_est", "T M^(p-1)", "margin2", "a", "margin3"):
        table.add_column(column, justify="right")
    margins3 = summary["margins3"] or [None] * len(result.report.rows)
    for row, margin2, margin3 in zip(result.report.rows, summary["margins2"], margins3):
        table.add_row(
            f"{row.M:g}",
            f"{row.T_est:.8g}",
            f"{row.TMp1:.6g}",
            f"{margin2:+.4g}",
            f"{row.a:.5g}",
            "-" if margin3 is None else f"{margin3:+.4g}",
        )
    console.print(table)
    if result.report.absent:
        console.print(f"absent amplitudes: {', '.join(f'{M:g}' for M, _ in result.report.absent)}")
    console.print(_checks_table("checks", summary["checks"]))


def _print_energy(console: Console, result: EnergyResult) -> None:
    report = result.report
    table = Table(title=f"self-similar energies ({len(report.rows)} frames)")
    for column in ("s", "E", "tilde E2", "dev_core", "res_var", "res_dissipation"):
        table.add_column(column, justify="right")
    for row in report.rows:
        table.add_row(
            f"{row.s:.4f}",
            f"{row.E:.6g}",
            f"{row.tildeE2:.6g}",
            f"{row.dev_core:.3g}",
            f"{row.residuals.get(VAR, math.nan):.2g}",
            f"{row.residuals.get(DISSIPATION, math.nan):.2g}",
        )
    console.print(table)
    console.print(_checks_table("energy checks (informational)", result.checks))


def _print_report(console: Console, data: ReportData) -> None:
    console.print(f"results in {data.directory}")
    if data.run is not None:
        table = Table(title="run")
        table.add_column("key")
        table.add_column("value", justify="right")
        for key in ("M", "T_est", "T_ci", "a", "rate_exponent", "typeI_sup", "plateau_ratio", "stop_reason"):
            if key in data.run:
                table.add_row(key, str(data.run[key]))
        console.print(table)
    if data.sweep_summary is not None:
        console.print(_checks_table("sweep checks", data.sweep_summary["checks"]))
    if data.energy_rows is not None:
        console.print(f"energy frames: {len(data.energy_rows)}")
    for path in data.written:
        console.print(f"wrote {path}")


def _print_selftest(console: Console, results: List[OracleResult]) -> None:
    table = Table(title="oracle suite")
    for column in ("oracle", "error", "tolerance", "seconds", "verdict"):
        table.add_column(column, justify="right")
    for result in results:
        table.add_row(
            result.name,
            f"{result.error:.3g}",
            f"{result.tolerance:.0e}",
            f"{result.seconds:.2f}",
            _verdict(result.passed),
        )
    console.print(table)


def _selftest(console: Console) -> int:
    try:
        results = run_selftest()
    except BlowupLabError as e:
        _print_error(console, e)
        return EXIT_CHECK_FAILED
    _print_selftest(console, results)
    return EXIT_OK if all(result.passed for result in results) else EXIT_CHECK_FAILED


def main() -> None:
    """Console-script entry point."""
    sys.exit(dispatch())
