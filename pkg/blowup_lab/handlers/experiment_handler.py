"""
Experiment handler for the blow-up laboratory.
Provides the run, energy, sweep and report pipelines behind the command-line subcommands.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from blowup_lab.core.blowup import (
    BlowupRecord,
    analyze_trajectory,
    ball_concentration_diagnostic,
)
from blowup_lab.core.integrator import SolverParams, Trajectory, run_to_blowup
from blowup_lab.core.mesh import Grid
from blowup_lab.core.model import (
    FunctionSpec,
    ProblemSpec,
    ValidationReport,
    compute_A,
    concentration_ratio,
    ode_reference_time,
    validate_spec,
)
from blowup_lab.core.selfsim import (
    ENERGY_COLUMNS,
    CutoffSpec,
    EnergyReport,
    build_energy_report,
    build_y_grid,
    capture_times_for,
    deviation_trend_ok,
    frame_schedule,
    monotonicity_defect,
    to_selfsimilar_frame,
)
from blowup_lab.core.sweep import CSV_COLUMNS, SweepReport, run_sweep, sweep_summary
from blowup_lab.handlers.file_handler import CONFIG_NAME, OutputHandler
from blowup_lab.utils.config import Config
from blowup_lab.utils.errors import InsufficientDataError, InvalidArgumentError

logger = logging.getLogger(__name__)

DEFAULT_M = 50.0
MONOTONICITY_TOLERANCE = 1e-3

BLOWUP_FILE = "blowup.json"
RUN_FILE = "run.json"
ENERGY_FILE = "energy.csv"
ENERGY_SUMMARY_FILE = "energy_summary.json"
SWEEP_FILE = "sweep.csv"
SWEEP_ROWS_FILE = "sweep_rows.csv"
SWEEP_SUMMARY_FILE = "sweep_summary.json"
TYPEI_FILE = "typeI.csv"
TMP1_FILE = "tmp1.csv"


def build_problem(config: Config) -> Tuple[ProblemSpec, Grid, SolverParams]:
    """
    Problem, solver grid and solver parameters of a configuration.

    Args:
        config: A parsed configuration.

    Returns:
        (spec, grid, params).
    """
    spec = ProblemSpec(
        N=config.get("problem.N"),
        p=config.get("problem.p"),
        domain_kind=config.get("problem.domain_kind"),
        extent=config.get("problem.extent"),
        potential=FunctionSpec.from_params(config.function_params("V")),
        profile=FunctionSpec.from_params(config.function_params("phi")),
        potential_floor=config.get("problem.potential_floor", 1e-6),
    )
    grid = spec.build_grid(config.get("solver.m"))
    params = SolverParams.from_config(config.section("solver"))
    return spec, grid, params


@dataclass
class RunResult:
    record: BlowupRecord
    trajectory: Trajectory
    validation: ValidationReport
    extras: Dict[str, Any] = field(default_factory=dict)


@dataclass
class EnergyResult:
    report: EnergyReport
    checks: Dict[str, bool]


@dataclass
class SweepResult:
    report: SweepReport
    summary: Dict[str, Any]

    @property
    def passed(self) -> bool:
        return all(self.summary["checks"].values())


@dataclass
class ReportData:
    """Everything ``report`` found in an output directory."""

    directory: Path
    run: Optional[Dict[str, Any]] = None
    sweep_rows: Optional[pd.DataFrame] = None
    sweep_summary: Optional[Dict[str, Any]] = None
    energy_rows: Optional[pd.DataFrame] = None
    written: List[Path] = field(default_factory=list)


class ExperimentHandler:
    """
    Handles the experiment pipelines of one configuration and output directory.
    """

    def __init__(self, config: Config, output_dir: Path, workers: Optional[int] = None):
        """
        Initialize the experiment handler.

        Args:
            config: The experiment configuration.
            output_dir: Directory receiving every result file.
            workers: Sweep worker override; ``sweep.workers`` when None.
        """
        self.config = config
        self.output = OutputHandler(output_dir, config.get("output.formats", ["csv", "json"]))
        self.workers = workers if workers is not None else config.get("sweep.workers", 1)
        self.spec, self.grid, self.params = build_problem(config)

    def validate(self) -> ValidationReport:
        return validate_spec(self.spec, self.grid)

    def run(self, M: Optional[float] = None) -> RunResult:
        """
        Single trajectory at amplitude M and its blow-up record.

        Writes ``blowup.json`` (documented keys), ``run.json`` (context),
        ``trajectory.csv``, the snapshots and the configuration.
        """
        validation = self.validate()
        M = float(M if M is not None else self.config.get("problem.M", DEFAULT_M))
        traj = run_to_blowup(self.spec, M, self.grid, self.params)
        record = analyze_trajectory(traj)

        A, xbar = compute_A(self.spec, self.grid)
        extras = {
            "M": M,
            "stop_reason": traj.stop_reason,
            "steps": traj.steps,
            "t_final": traj.t_final,
            "u_max_final": float(traj.u_max[-1]),
            "A": A,
            "xbar": xbar,
            "ode_reference_time": ode_reference_time(self.spec, M, A),
            "plateau_ratio": record.plateau,
            "ambiguous_location": record.ambiguous_location,
            "blowup_set_proxy": list(record.blowup_set_proxy),
            "concentration_ratio": concentration_ratio(self.spec, record.a, A),
            "validation": validation.as_dict(),
        }
        center, delta = self._diagnostic_ball(xbar)
        if delta > 0:
            final = ball_concentration_diagnostic(traj, center, delta)[-1]
            extras["ball_diagnostic_final"] = final._asdict()

        self.output.write_config(self.config)
        self.output.write_json(BLOWUP_FILE, record.to_dict())
        self.output.write_json(RUN_FILE, extras)
        self.output.write_trajectory(traj)
        logger.info("run: T_est=%.10g +- %.2g, a=%.6g", record.T_est, record.T_ci, record.a)
        return RunResult(record, traj, validation, extras)

    def _diagnostic_ball(self, xbar: float) -> Tuple[float, float]:
        if self.grid.is_radial:
            return 0.0, 0.5 * self.spec.extent
        return xbar, 0.5 * (self.spec.extent - abs(xbar))

    def energy(self) -> EnergyResult:
        """
        Self-similar frames and energy report of a prior ``run``.

        The run is replayed with steps clipped to land on frames equally
        spaced in s between -log T and the resolution limit.
        """
        self.validate()
        stored = BlowupRecord.from_dict(self.output.read_json(BLOWUP_FILE))
        run_info = self.output.read_json(RUN_FILE) if self.output.exists(RUN_FILE) else {}
        M = float(run_info.get("M", self.config.get("problem.M", DEFAULT_M)))
        if self.output.exists(CONFIG_NAME):
            stored_config = Config.load(self.output.current_directory / CONFIG_NAME)
            if stored_config.get("problem") != self.config.get("problem"):
                logger.warning("energy: [problem] differs from the one stored with the run")

        frame_count = self.config.get("selfsim.frame_count")
        T, a = stored.T_est, stored.a
        if self.grid.is_radial and a != 0.0:
            logger.warning("energy: radial frames are centred at 0, not at the recorded a=%.6g", a)
            a = 0.0
        s_values = frame_schedule(T, self.grid.h, frame_count + 2, self.config.get("selfsim.resolve_cells"))
        traj = run_to_blowup(
            self.spec, M, self.grid, self.params, capture_times=capture_times_for(T, s_values)
        )
        if len(traj.captures) < len(s_values):
            raise InsufficientDataError(
                f"replay captured {len(traj.captures)} of {len(s_values)} frames before stopping"
            )

        y_grid = build_y_grid(self.spec, self.config.get("selfsim.y_max"), self.config.get("selfsim.m_y"))
        frames = [to_selfsimilar_frame(snap, a, T, self.spec.beta, y_grid) for snap in traj.captures]
        cutoff = CutoffSpec(0.0, self.config.get("selfsim.cutoff_R"))
        report = build_energy_report(frames, self.spec, self.config.get("selfsim.k_list"), cutoff)

        series = [(row.s, row.dev_core) for row in report.rows]
        E0 = report.rows[0].E
        checks = {"deviation_trend": deviation_trend_ok(series)}
        if self.spec.potential.is_constant:
            defect = monotonicity_defect(report.energies)
            checks["energy_monotone"] = defect <= MONOTONICITY_TOLERANCE * abs(E0)
            checks["energy_bounded"] = all(-10.0 * abs(E0) <= E <= E0 + MONOTONICITY_TOLERANCE * abs(E0) for E in report.energies)

        self.output.write_csv(ENERGY_FILE, report.table(), ENERGY_COLUMNS)
        self.output.write_json(ENERGY_SUMMARY_FILE, {**report.summary(), "checks": checks, "T": T, "a": a})
        logger.info("energy: %d frames from s=%.4g to s=%.4g", len(report.rows), report.rows[0].s, report.rows[-1].s)
        return EnergyResult(report, checks)

    def sweep(self) -> SweepResult:
        """M-sweep with both asymptotic checks; writes ``sweep.csv`` and ``sweep_summary.json``."""
        self.validate()
        report = run_sweep(self.spec, self.grid, self.params, self.config.get("sweep.Ms"), self.workers)
        summary = sweep_summary(report, self.config.get("sweep.theorem2_tolerance"))

        self.output.write_config(self.config)
        self.output.write_csv(SWEEP_FILE, [row.as_dict() for row in report.rows], CSV_COLUMNS)
        extended = [row.extended() for row in report.rows]
        self.output.write_csv(SWEEP_ROWS_FILE, extended, list(extended[0].keys()))
        self.output.write_json(SWEEP_SUMMARY_FILE, summary)
        if report.absent:
            logger.warning("sweep: %d amplitude(s) absent: %s", len(report.absent), report.absent)
        return SweepResult(report, summary)

    def report(self) -> ReportData:
        """
        Collect the results of the output directory and write the plotting tables.

        Raises:
            InvalidArgumentError: When the directory holds no run or sweep results.
        """
        data = ReportData(directory=self.output.current_directory)

        if self.output.exists(BLOWUP_FILE) and self.output.exists("trajectory.csv"):
            record = self.output.read_json(BLOWUP_FILE)
            extras = self.output.read_json(RUN_FILE) if self.output.exists(RUN_FILE) else {}
            data.run = {**record, **extras}
            series = self.output.read_csv("trajectory.csv")
            T = float(record["T_est"])
            before = series[series["t"] < T]
            stat = (T - before["t"].to_numpy()) ** self.spec.beta * before["u_max"].to_numpy()
            path = self.output.write_csv(TYPEI_FILE, pd.DataFrame({"t": before["t"], "stat": stat}), ["t", "stat"])
            if path:
                data.written.append(path)

        if self.output.exists(SWEEP_FILE) and self.output.exists(SWEEP_SUMMARY_FILE):
            data.sweep_rows = self.output.read_csv(SWEEP_FILE)
            data.sweep_summary = self.output.read_json(SWEEP_SUMMARY_FILE)
            target = float(data.sweep_summary["target"])
            table = pd.DataFrame(
                {"M": data.sweep_rows["M"], "TMp1": data.sweep_rows["TMp1"], "target": np.full(len(data.sweep_rows), target)}
            )
            path = self.output.write_csv(TMP1_FILE, table, ["M", "TMp1", "target"])
            if path:
                data.written.append(path)

        if self.output.exists(ENERGY_FILE):
            data.energy_rows = self.output.read_csv(ENERGY_FILE)

        if data.run is None and data.sweep_rows is None:
            raise InvalidArgumentError(f"no run or sweep results in {self.output.current_directory}")
        return data

