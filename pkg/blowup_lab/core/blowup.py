"""
Blow-up post-processing for the blow-up laboratory.
Turns a trajectory into the blow-up time, point, rate, type-I statistic and ball diagnostics.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.stats import linregress

from blowup_lab.core.integrator import THRESHOLD, Trajectory
from blowup_lab.core.mesh import INTERVAL, RADIAL, gradient, unit_sphere_area
from blowup_lab.core.model import ProblemSpec
from blowup_lab.utils.errors import (
    AmbiguousLocationError,
    InsufficientDataError,
    InvalidArgumentError,
    NotBlowingUpError,
)

logger = logging.getLogger(__name__)

MIN_TAIL_POINTS = 30
PLATEAU_LIMIT = 1.2
DRIFT_WARN_CELLS = 2.0
DRIFT_FAIL_CELLS = 10.0


@dataclass(frozen=True)
class BlowupRecord:
    """
    Blow-up quantities of one trajectory.

    Only the documented keys are serialized by ``to_dict``; the remaining
    fields are carried for reports.
    """

    T_est: float
    T_ci: float
    a: float
    rate_exponent: float
    typeI_sup: float
    blowup_set_proxy: Tuple[float, ...]
    fit_window: Tuple[float, float]
    M: float = math.nan
    plateau: float = math.nan
    ambiguous_location: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "T_est": self.T_est,
            "T_ci": self.T_ci,
            "a": self.a,
            "rate_exponent": self.rate_exponent,
            "typeI_sup": self.typeI_sup,
            "fit_window": list(self.fit_window),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BlowupRecord":
        return cls(
            T_est=float(data["T_est"]),
            T_ci=float(data["T_ci"]),
            a=float(data["a"]),
            rate_exponent=float(data["rate_exponent"]),
            typeI_sup=float(data["typeI_sup"]),
            blowup_set_proxy=tuple(data.get("blowup_set_proxy", ())),
            fit_window=tuple(data["fit_window"]),
        )


class BlowupTimeFit(NamedTuple):
    T_est: float
    T_ci: float
    window: Tuple[float, float]


def final_decade(traj: Trajectory) -> np.ndarray:
    """
    Indices of the series tail over which u_max grew by the last factor of 10.

    The tail starts after the last entry below u_max(final) / 10.
    """
    below = np.nonzero(traj.u_max < traj.u_max[-1] / 10.0)[0]
    start = int(below[-1]) + 1 if below.size else 0
    return np.arange(start, len(traj.t))


def fit_blowup_time(traj: Trajectory) -> BlowupTimeFit:
    """
    Fit a line to u_max^{1-p} against t over the final decade.

    Args:
        traj: A threshold-terminated trajectory.

    Returns:
        Root of the line, half-width max|residual| / |slope| and the time window.

    Raises:
        InsufficientDataError: With fewer than 30 tail entries.
        NotBlowingUpError: When the fitted slope is not negative.
    """
    if traj.stop_reason != THRESHOLD:
        logger.warning("estimating T on a run that stopped with '%s'", traj.stop_reason)

    tail = final_decade(traj)
    if tail.size < MIN_TAIL_POINTS:
        raise InsufficientDataError(
            f"{tail.size} series entries in the final decade, need {MIN_TAIL_POINTS}"
        )

    p = traj.spec.p
    t = traj.t[tail]
    y = traj.u_max[tail] ** (1.0 - p)
    fit = linregress(t, y)
    if not fit.slope < 0:
        raise NotBlowingUpError(f"u_max^(1-p) does not decrease (slope {fit.slope:.3g})")

    # Root through the centroid, so shifting t shifts T by the same amount
    T = float(np.mean(t) - np.mean(y) / fit.slope)
    residuals = y - (fit.intercept + fit.slope * t)
    T_ci = float(np.max(np.abs(residuals)) / abs(fit.slope))

    t_last = float(t[-1])
    if T <= t_last:
        T = t_last + float(y[-1]) / abs(fit.slope)
        logger.warning("fitted root precedes the last sample; extrapolating from the last entry")

    return BlowupTimeFit(T, T_ci, (float(t[0]), t_last))


def estimate_T(traj: Trajectory) -> Tuple[float, float]:
    """Estimated blow-up time and its half-width."""
    fit = fit_blowup_time(traj)
    return fit.T_est, fit.T_ci


def _check_T(traj: Trajectory, T: float) -> None:
    if not T > traj.t_final:
        raise InvalidArgumentError(f"T={T} does not exceed the last series time {traj.t_final}")


def fit_rate_exponent(traj: Trajectory, T: float) -> float:
    """
    Slope of log u_max against -log(T - t) for u_max in [u_stop/1e3, u_stop/10].

    Args:
        traj: The trajectory.
        T: Blow-up time beyond the last series time.

    Returns:
        The fitted exponent, close to 1/(p-1) for type-I blow-up.

    Raises:
        InsufficientDataError: When fewer than 3 entries fall into the window.
    """
    _check_T(traj, T)
    window = (traj.u_max >= traj.u_stop / 1e3) & (traj.u_max <= traj.u_stop / 10.0)
    if np.count_nonzero(window) < 3:
        raise InsufficientDataError("rate fit window holds fewer than 3 entries")
    fit = linregress(-np.log(T - traj.t[window]), np.log(traj.u_max[window]))
    return float(fit.slope)


def typeI_series(traj: Trajectory, T: float) -> Tuple[np.ndarray, np.ndarray]:
    """Times and values of (T - t)^beta u_max over the series."""
    _check_T(traj, T)
    return traj.t, (T - traj.t) ** traj.spec.beta * traj.u_max


def typeI_statistic(traj: Trajectory, T: float) -> float:
    """Supremum of (T - t)^beta u_max over the series."""
    return float(np.max(typeI_series(traj, T)[1]))


def plateau_ratio(traj: Trajectory, T: float) -> float:
    """
    Max over min of the type-I statistic on the final decade.

    Values at most 1.2 mean the rescaled maximum has settled.
    """
    _, stat = typeI_series(traj, T)
    tail = stat[final_decade(traj)]
    return float(np.max(tail) / np.min(tail))


def locate_blowup_point(traj: Trajectory) -> float:
    """
    Blow-up location from the final snapshot.

    Args:
        traj: A blow-up trajectory.

    Returns:
        The argmax of the final snapshot (radius on radial grids).

    Raises:
        AmbiguousLocationError: When the argmax moved more than 10 cells over
            the final decade.
    """
    a = traj.final.argmax
    drift = float(np.max(np.abs(traj.argmax[final_decade(traj)] - a)))
    h = traj.grid.h
    if drift > DRIFT_FAIL_CELLS * h:
        raise AmbiguousLocationError(
            f"argmax drifted by {drift / h:.1f} cells over the final decade",
            details={"a": a, "drift": drift},
        )
    if drift > DRIFT_WARN_CELLS * h:
        logger.warning("argmax still drifting (%.1f cells) over the final decade", drift / h)
    return a


def blowup_set_proxy(traj: Trajectory, T: float, threshold: float = 0.5) -> List[float]:
    """
    Interior nodes where the rescaled final profile reaches a fraction of its maximum.

    The reference level is the peak of (T - t_final)^beta |u| at the final
    time, which is the type-I statistic evaluated on the last entry rather
    than its supremum over the series. With it threshold 1 selects exactly
    the argmax node(s) and the set is never empty.

    Args:
        traj: The trajectory.
        T: Blow-up time.
        threshold: Fraction in (0, 1]; 1 keeps only the argmax node(s).

    Returns:
        Node coordinates in ascending order.
    """
    if not 0 < threshold <= 1:
        raise InvalidArgumentError(f"threshold must lie in (0, 1], got {threshold}")
    _check_T(traj, T)
    final = traj.final
    rescaled = (T - final.time) ** traj.spec.beta * np.abs(final.values)
    interior = ~traj.grid.boundary_mask
    peak = float(np.max(rescaled[interior]))
    selected = interior & (rescaled >= threshold * peak)
    return [float(x) for x in traj.grid.nodes[selected]]


class BallDiagnostic(NamedTuple):
    t: float
    Phi: float
    I: float
    dPhi: float
    defect: float


def _ball_mask(traj: Trajectory, center: float, delta: float) -> Tuple[np.ndarray, float]:
    grid = traj.grid
    if not delta > 0:
        raise InvalidArgumentError(f"ball radius must be positive, got {delta}")
    tol = 1e-12 * grid.h
    if grid.is_radial:
        if center != 0.0:
            raise InvalidArgumentError("balls on radial grids must be centred at the origin")
        if delta > grid.extent + tol:
            raise InvalidArgumentError("ball is not contained in the domain")
        volume = unit_sphere_area(grid.N) * delta ** grid.N / grid.N
        return grid.nodes <= delta + tol, volume
    if center - delta < grid.nodes[0] - tol or center + delta > grid.nodes[-1] + tol:
        raise InvalidArgumentError("ball is not contained in the domain")
    return np.abs(grid.nodes - center) <= delta + tol, 2.0 * delta


def ball_concentration_diagnostic(
    traj: Trajectory, center: float, delta: float, V_floor: Optional[float] = None
) -> List[BallDiagnostic]:
    """
    Track the ball energies of the concentration argument across snapshots.

    Phi = 1/2 int_B u^2, I = 1/2 int_B |grad u|^2 - V_floor/(p+1) int_B |u|^{p+1},
    Phi' = int_B u (Lap u + V |u|^{p-1} u), and the defect
    Phi' - V_floor |B|^{(1-p)/2} 2^{(1-p)/2} Phi^{(1+p)/2}.

    Args:
        traj: The trajectory.
        center: Ball centre (0 on radial grids).
        delta: Ball radius.
        V_floor: Lower bound of V on the ball; defaults to its minimum.

    Returns:
        One entry per snapshot.
    """
    mask, volume = _ball_mask(traj, center, delta)
    grid = traj.grid
    spec = traj.spec
    p = spec.p
    V = spec.V(grid.nodes)
    v_min = float(np.min(V[mask]))
    if V_floor is None:
        V_floor = v_min
    elif V_floor > v_min * (1.0 + 1e-12):
        raise InvalidArgumentError(f"V_floor={V_floor} exceeds min V={v_min} on the ball")

    constant = V_floor * volume ** ((1.0 - p) / 2.0) * 2.0 ** ((1.0 - p) / 2.0)
    L = grid.laplacian_matrix

    out: List[BallDiagnostic] = []
    for snap in traj.snapshots:
        u = snap.values
        power = np.abs(u) ** (p + 1.0)
        Phi = 0.5 * grid.integrate(u ** 2, mask)
        I = 0.5 * grid.integrate(gradient(snap) ** 2, mask) - V_floor / (p + 1.0) * grid.integrate(power, mask)
        dPhi = grid.integrate(u * (L @ u) + V * power, mask)
        defect = dPhi - constant * Phi ** ((1.0 + p) / 2.0)
        out.append(BallDiagnostic(snap.time, Phi, I, dPhi, defect))
    return out


def ball_subsolution_time(spec: ProblemSpec, M: float, center: float, delta: float, points: int = 2001) -> float:
    """
    Blow-up time of the diffusionless problem with V and phi frozen at their
    minima over the ball, 1 / ((p-1) V_min (M phi_min)^{p-1}).

    For large M the blow-up time stays below this bound.
    """
    xs = np.linspace(center - delta, center + delta, points)
    if spec.grid_kind == RADIAL:
        xs = np.abs(xs)
    lo = -spec.extent if spec.grid_kind == INTERVAL else 0.0
    if xs.min() < lo - 1e-12 or xs.max() > spec.extent + 1e-12:
        raise InvalidArgumentError("ball is not contained in the domain")
    v_min = float(np.min(spec.V(xs)))
    phi_min = float(np.min(spec.phi(xs)))
    if phi_min <= 0 or v_min <= 0:
        return math.inf
    return 1.0 / ((spec.p - 1.0) * v_min * (M * phi_min) ** (spec.p - 1.0))


def analyze_trajectory(traj: Trajectory, threshold: float = 0.5) -> BlowupRecord:
    """
    Assemble the blow-up record of a trajectory.

    An ambiguous location is kept, flagged, from the final argmax.
    """
    fit = fit_blowup_time(traj)
    ambiguous = False
    try:
        a = locate_blowup_point(traj)
    except AmbiguousLocationError as e:
        logger.warning("M=%g: %s", traj.M, e.message)
        a = traj.final.argmax
        ambiguous = True

    return BlowupRecord(
        T_est=fit.T_est,
        T_ci=fit.T_ci,
        a=a,
        rate_exponent=fit_rate_exponent(traj, fit.T_est),
        typeI_sup=typeI_statistic(traj, fit.T_est),
        blowup_set_proxy=tuple(blowup_set_proxy(traj, fit.T_est, threshold)),
        fit_window=fit.window,
        M=traj.M,
        plateau=plateau_ratio(traj, fit.T_est),
        ambiguous_location=ambiguous,
    )
