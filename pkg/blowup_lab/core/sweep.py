"""
Amplitude sweeps for the blow-up laboratory.
Runs the solver across amplitudes M and checks the large-M asymptotics of the blow-up time and point.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import psutil
from scipy.stats import linregress

from blowup_lab.core.blowup import BlowupRecord, analyze_trajectory, ball_subsolution_time
from blowup_lab.core.integrator import SolverParams, run_to_blowup
from blowup_lab.core.mesh import RADIAL, Grid
from blowup_lab.core.model import ProblemSpec, compute_A
from blowup_lab.utils.errors import (
    BlowupLabError,
    EmptySweepError,
    InvalidArgumentError,
    Theorem3InapplicableError,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["M", "T_est", "T_ci", "TMp1", "a", "phiV_at_a", "rate_exponent"]
LOCATION_CELLS = 5.0
BALL_FRACTION = 0.1


@dataclass(frozen=True)
class SweepRow:
    M: float
    T_est: float
    T_ci: float
    TMp1: float
    a: float
    phiV_at_a: float
    rate_exponent: float
    distance_to_maximizer: float = math.nan
    MTbeta_margin: float = math.nan
    ball_bound: float = math.nan
    ambiguous_location: bool = False

    def as_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in CSV_COLUMNS}

    def extended(self) -> Dict[str, Any]:
        """Every field, with the comparison bound verdict."""
        data = {name: getattr(self, name) for name in self.__dataclass_fields__}
        data["below_ball_bound"] = self.T_est <= self.ball_bound
        return data


@dataclass
class SweepReport:
    """
    Rows of one sweep, sorted by M, with the scan constant A = 1 / max(phi^{p-1} V).
    """

    spec: ProblemSpec
    rows: List[SweepRow]
    A: float
    xbar: float
    h: float
    absent: List[Tuple[float, str]] = field(default_factory=list)

    @property
    def target(self) -> float:
        return self.A / (self.spec.p - 1.0)


def default_workers() -> int:
    """Physical core count, 1 when it cannot be determined."""
    return psutil.cpu_count(logical=False) or 1


def _ball(spec: ProblemSpec, xbar: float) -> Tuple[float, float]:
    """Ball around the maximizer used for the comparison bound; radial balls sit at 0."""
    if spec.grid_kind == RADIAL:
        return 0.0, BALL_FRACTION * spec.extent
    return xbar, min(BALL_FRACTION * spec.extent, spec.extent - abs(xbar))


def _run_one(spec: ProblemSpec, m: int, params: SolverParams, M: float) -> Tuple[float, Optional[BlowupRecord], str]:
    """Worker task: one run and its record, or the reason it produced none."""
    grid = spec.build_grid(m)
    try:
        traj = run_to_blowup(spec, M, grid, params)
        return M, analyze_trajectory(traj), ""
    except BlowupLabError as e:
        return M, None, f"{e.code}: {e.message}"


def make_row(spec: ProblemSpec, record: BlowupRecord, M: float, A: float, xbar: float) -> SweepRow:
    """Derived row quantities of one blow-up record."""
    p = spec.p
    beta = spec.beta
    a = record.a
    lower = 1.0 / (float(spec.phi(xbar)) * ((p - 1.0) * float(spec.V(xbar))) ** beta)
    center, delta = _ball(spec, xbar)
    bound = ball_subsolution_time(spec, M, center, delta) if delta > 0 else math.inf
    return SweepRow(
        M=M,
        T_est=record.T_est,
        T_ci=record.T_ci,
        TMp1=record.T_est * M ** (p - 1.0),
        a=a,
        phiV_at_a=float(spec.phi_V(a)),
        rate_exponent=record.rate_exponent,
        distance_to_maximizer=abs(a - xbar),
        MTbeta_margin=M * record.T_est ** beta - lower,
        ball_bound=bound,
        ambiguous_location=record.ambiguous_location,
    )


def run_sweep(
    spec: ProblemSpec,
    grid: Grid,
    params: SolverParams,
    Ms: Sequence[float],
    workers: int = 1,
) -> SweepReport:
    """
    Run the solver for every amplitude and collect the blow-up rows.

    Args:
        spec: A validated problem.
        grid: The solver grid.
        params: Solver parameters.
        Ms: Positive amplitudes.
        workers: Parallel processes; 0 uses the physical core count.

    Returns:
        The report, rows sorted by M.

    Raises:
        EmptySweepError: When no amplitude blows up.
    """
    Ms = sorted(float(M) for M in Ms)
    if not Ms or Ms[0] <= 0:
        raise InvalidArgumentError("amplitudes must be positive")
    if workers == 0:
        workers = default_workers()

    A, xbar = compute_A(spec, grid)
    logger.info("sweep: %d amplitudes, A=%.6g at x=%.6g, %d worker(s)", len(Ms), A, xbar, workers)

    if workers <= 1 or len(Ms) == 1:
        results = [_run_one(spec, grid.m, params, M) for M in Ms]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(Ms))) as pool:
            results = list(pool.map(_run_one, [spec] * len(Ms), [grid.m] * len(Ms), [params] * len(Ms), Ms))

    rows: List[SweepRow] = []
    absent: List[Tuple[float, str]] = []
    for M, record, note in sorted(results, key=lambda item: item[0]):
        if record is None:
            logger.warning("sweep: M=%g recorded as absent (%s)", M, note)
            absent.append((M, note))
            continue
        rows.append(make_row(spec, record, M, A, xbar))

    if not rows:
        raise EmptySweepError(f"no amplitude in {Ms} blew up", details={"absent": absent})
    return SweepReport(spec=spec, rows=rows, A=A, xbar=xbar, h=grid.h, absent=absent)


class CheckResult(NamedTuple):
    margins: List[float]
    checks: Dict[str, bool]
    fitted_decay_exponent: float = math.nan

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def _require_rows(report: SweepReport, count: int = 3) -> None:
    if len(report.rows) < count:
        raise InvalidArgumentError(f"the check needs at least {count} rows, got {len(report.rows)}")


def check_theorem2(report: SweepReport, tolerance: float = 0.1) -> CheckResult:
    """
    Upper asymptotics of the blow-up time: T M^{p-1} approaches A/(p-1).

    Checks that |margin| at the largest M is within tolerance * target and
    that |margin| does not grow over the last three rows beyond the fit noise
    T_ci M^{p-1}.
    """
    _require_rows(report)
    p = report.spec.p
    target = report.target
    margins = [row.TMp1 - target for row in report.rows]
    noise = [row.T_ci * row.M ** (p - 1.0) for row in report.rows]

    tail = list(zip(margins[-3:], noise[-3:]))
    decreasing = all(
        abs(later) <= abs(earlier) + e_noise + l_noise
        for (earlier, e_noise), (later, l_noise) in zip(tail, tail[1:])
    )
    checks = {
        "final_within_tolerance": abs(margins[-1]) <= tolerance * target,
        "margin_non_increasing": decreasing,
    }
    return CheckResult(margins, checks)


def fit_decay_exponent(Ms: Sequence[float], margins: Sequence[float]) -> float:
    """Exponent q of margin ~ C M^{-q} from a log-log fit of the positive margins."""
    pairs = [(M, m) for M, m in zip(Ms, margins) if m > 0]
    if len(pairs) < 2:
        return math.nan
    Ms_pos, margins_pos = zip(*pairs)
    return float(-linregress(np.log(Ms_pos), np.log(margins_pos)).slope)


def check_theorem3(report: SweepReport) -> CheckResult:
    """
    Concentration at the maximizer: phi^{p-1}(a) V(a) approaches 1/A.

    Raises:
        Theorem3InapplicableError: For a supercritical exponent.
    """
    spec = report.spec
    if not spec.subcritical:
        raise Theorem3InapplicableError(f"p={spec.p} is supercritical for N={spec.N}")
    _require_rows(report)

    peak = 1.0 / report.A
    slack = 1e-6 * peak
    margins = [peak - row.phiV_at_a for row in report.rows]
    Ms = [row.M for row in report.rows]
    checks = {
        "margin_nonnegative": all(m >= -slack for m in margins),
        "margin_shrinks": margins[-1] <= margins[0] + slack,
        "near_maximizer": report.rows[-1].distance_to_maximizer <= LOCATION_CELLS * report.h,
        "time_positive": all(row.T_est > 0 for row in report.rows),
    }
    return CheckResult(margins, checks, fit_decay_exponent(Ms, margins))


def sweep_summary(report: SweepReport, tolerance: float = 0.1) -> Dict[str, Any]:
    """JSON summary: A, target, both margin series, the fitted exponent and every check."""
    theorem2 = check_theorem2(report, tolerance) if len(report.rows) >= 3 else None
    summary: Dict[str, Any] = {
        "A": report.A,
        "target": report.target,
        "margins2": theorem2.margins if theorem2 else [row.TMp1 - report.target for row in report.rows],
        "margins3": None,
        "fitted_decay_exponent": None,
        "checks": {},
    }
    if theorem2:
        summary["checks"].update({f"theorem2.{k}": v for k, v in theorem2.checks.items()})
    if report.spec.subcritical and len(report.rows) >= 3:
        theorem3 = check_theorem3(report)
        summary["margins3"] = theorem3.margins
        exponent = theorem3.fitted_decay_exponent
        summary["fitted_decay_exponent"] = None if math.isnan(exponent) else exponent
        summary["checks"].update({f"theorem3.{k}": v for k, v in theorem3.checks.items()})
    return summary
