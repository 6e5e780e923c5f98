"""
Method-of-lines time integration for the blow-up laboratory.
Explicit midpoint stepping of u_t = Lap u + V |u|^{p-1} u with blow-up-aware step control.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from blowup_lab.core.mesh import Field, Grid
from blowup_lab.core.model import ProblemSpec
from blowup_lab.utils.errors import InvalidArgumentError, LikelyGlobalSolutionError, NanStateError

logger = logging.getLogger(__name__)

THRESHOLD = "threshold"
MAX_STEPS = "max_steps"
NAN = "nan"

# Steps per decade of u_max growth near u_stop are at least 40
_END_GROWTH_CAP = math.log(10.0) / 40.0


@dataclass(frozen=True)
class SolverParams:
    """
    Step-size and stopping controls.

    Attributes:
        cfl_safety: Fraction of the explicit diffusion limit h^2 / (2 N_eff).
        reaction_safety: Maximal relative growth per step from the reaction term.
        u_stop: The run stops once ||u||_inf reaches this value.
        max_steps: Hard cap on the number of steps.
        series_resolution: Relative change of u_max that triggers a series entry.
        decay_ratio: The run is declared global once u_max falls below this
            fraction of its initial value.
    """

    cfl_safety: float = 0.4
    reaction_safety: float = 0.05
    u_stop: float = 1e8
    max_steps: int = 50_000_000
    series_resolution: float = 1e-3
    decay_ratio: float = 1e-3

    def __post_init__(self):
        if not 0 < self.cfl_safety <= 1:
            raise InvalidArgumentError("cfl_safety must lie in (0, 1]")
        if not 0 < self.reaction_safety <= 1:
            raise InvalidArgumentError("reaction_safety must lie in (0, 1]")
        if not self.u_stop >= 1e4:
            raise InvalidArgumentError("u_stop must be at least 1e4")
        if not self.max_steps > 0:
            raise InvalidArgumentError("max_steps must be positive")
        if not 0 <= self.series_resolution < 1:
            raise InvalidArgumentError("series_resolution must lie in [0, 1)")
        if not 0 < self.decay_ratio < 1:
            raise InvalidArgumentError("decay_ratio must lie in (0, 1)")

    @classmethod
    def from_config(cls, section: Dict[str, Any]) -> "SolverParams":
        """Build parameters from a ``[solver]`` section; ``m`` belongs to the grid and is ignored."""
        names = cls.__dataclass_fields__.keys()
        return cls(**{key: value for key, value in section.items() if key in names})


class SeriesEntry(NamedTuple):
    t: float
    u_max: float
    argmax: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Result of one run: sparse snapshots plus a dense (t, u_max, argmax) series.

    ``snapshots`` are stored each time u_max doubles and at the final step;
    ``captures`` hold the states at requested capture times.
    """

    spec: ProblemSpec
    M: float
    grid: Grid
    t: np.ndarray
    u_max: np.ndarray
    argmax: np.ndarray
    snapshots: Tuple[Field, ...]
    stop_reason: str
    u_stop: float
    captures: Tuple[Field, ...] = ()
    steps: int = 0

    def __post_init__(self):
        for name in ("t", "u_max", "argmax"):
            values = np.array(getattr(self, name), dtype=float)
            values.setflags(write=False)
            object.__setattr__(self, name, values)
        if not (len(self.t) == len(self.u_max) == len(self.argmax)):
            raise InvalidArgumentError("series columns differ in length")
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise InvalidArgumentError("series times must be strictly increasing")
        if not np.all(np.isfinite(self.u_max)):
            raise InvalidArgumentError("series u_max must be finite")

    @property
    def series(self) -> List[SeriesEntry]:
        return [SeriesEntry(*row) for row in zip(self.t, self.u_max, self.argmax)]

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    @property
    def t_final(self) -> float:
        return float(self.t[-1])


class ReactionDiffusion:
    """
    Right-hand side Lap u + V |u|^{p-1} u on a fixed grid.

    The potential is sampled once; ``diffusion`` and ``reaction`` switch the
    two terms off for the oracle harness.
    """

    def __init__(self, spec: ProblemSpec, grid: Grid, diffusion: bool = True, reaction: bool = True):
        if grid.kind != spec.grid_kind:
            raise InvalidArgumentError("grid does not match the problem domain")
        self.spec = spec
        self.grid = grid
        self.diffusion = diffusion
        self.reaction = reaction
        self.p = spec.p
        self.V = np.asarray(spec.V(grid.nodes), dtype=float)
        self.V_max = float(np.max(self.V))
        self._boundary = grid.boundary_mask
        self._L = grid.laplacian_matrix

    def rhs(self, u: np.ndarray) -> np.ndarray:
        out = self._L @ u if self.diffusion else np.zeros_like(u)
        if self.reaction:
            out = out + self.V * np.abs(u) ** (self.p - 1.0) * u
        return out

    def diffusion_dt(self, params: SolverParams) -> float:
        if not self.diffusion:
            return math.inf
        return params.cfl_safety * self.grid.h ** 2 / (2.0 * self.grid.stencil_factor)

    def reaction_rate(self, u: np.ndarray) -> float:
        """p * max(V |u|^{p-1}), the inverse time scale of the reaction term."""
        if not self.reaction:
            return 0.0
        return self.p * float(np.max(self.V * np.abs(u) ** (self.p - 1.0)))

    def stable_dt(self, u: np.ndarray, params: SolverParams, growth_cap: Optional[float] = None) -> float:
        """
        Step bound min(cfl h^2 / (2 N_eff), reaction_safety / (p max V u^{p-1})).

        Args:
            u: Current nodal values.
            params: Solver parameters.
            growth_cap: Optional tighter cap on the relative growth per step.

        Returns:
            The admissible step.
        """
        u_max = float(np.max(np.abs(u)))
        if not math.isfinite(u_max):
            raise NanStateError("non-finite state while choosing the step")

        safety = params.reaction_safety if growth_cap is None else min(params.reaction_safety, growth_cap)
        rate = self.reaction_rate(u)
        dt_reaction = safety / rate if rate > 0 else math.inf
        dt = min(self.diffusion_dt(params), dt_reaction)
        if not (math.isfinite(dt) and dt > 0):
            raise InvalidArgumentError("no finite step bound: both terms are inactive")
        return dt

    def step(self, u: np.ndarray, dt: float) -> np.ndarray:
        """One explicit midpoint (RK2) step with the Dirichlet rows reset to 0."""
        half = u + 0.5 * dt * self.rhs(u)
        half[self._boundary] = 0.0
        new = u + dt * self.rhs(half)
        new[self._boundary] = 0.0
        if not np.all(np.isfinite(new)):
            raise NanStateError(f"non-finite values after a step of size {dt:.3e}")
        return new


def choose_dt(u: Field, spec: ProblemSpec, params: SolverParams, diffusion: bool = True, reaction: bool = True) -> float:
    """
    Admissible explicit step for the current state.

    Args:
        u: Current field.
        spec: The problem.
        params: Solver parameters.
        diffusion: Whether the diffusion limit applies.
        reaction: Whether the reaction limit applies.

    Returns:
        dt = min(cfl_safety h^2 / (2 N_eff), reaction_safety / (p max V u^{p-1})).
    """
    return ReactionDiffusion(spec, u.grid, diffusion, reaction).stable_dt(u.values, params)


def step_once(u: Field, dt: float, spec: ProblemSpec, diffusion: bool = True, reaction: bool = True) -> Field:
    """
    Advance a field by one midpoint step.

    Args:
        u: Current field.
        dt: Step size.
        spec: The problem.
        diffusion: Include the Laplacian.
        reaction: Include the reaction term.

    Returns:
        The field at time u.time + dt.

    Raises:
        NanStateError: When the step produces NaN or infinity.
    """
    if not dt > 0:
        raise InvalidArgumentError(f"step must be positive, got {dt}")
    new = ReactionDiffusion(spec, u.grid, diffusion, reaction).step(np.array(u.values), dt)
    return Field(u.grid, new, u.time + dt)


class _SeriesRecorder:
    """Collects series entries whenever u_max moved by the configured relative amount."""

    def __init__(self, nodes: np.ndarray, resolution: float):
        self.nodes = nodes
        self.resolution = resolution
        self.t: List[float] = []
        self.u_max: List[float] = []
        self.argmax: List[float] = []
        self._last = math.nan

    def record(self, t: float, u: np.ndarray, u_max: float, force: bool = False) -> None:
        if self.t and t <= self.t[-1]:
            return
        if not force and self.t and abs(u_max - self._last) < self.resolution * self._last:
            return
        self.t.append(t)
        self.u_max.append(u_max)
        self.argmax.append(float(self.nodes[int(np.argmax(np.abs(u)))]))
        self._last = u_max


def run_to_blowup(
    spec: ProblemSpec,
    M: float,
    grid: Grid,
    params: SolverParams,
    *,
    initial: Optional[np.ndarray] = None,
    capture_times: Optional[Sequence[float]] = None,
    diffusion: bool = True,
    reaction: bool = True,
) -> Trajectory:
    """
    Integrate from u0 = M phi until u_stop, max_steps or a non-finite state.

    Args:
        spec: A validated problem.
        M: Amplitude of the initial data.
        grid: The solver grid.
        params: Solver parameters.
        initial: Optional initial values replacing M phi.
        capture_times: Times at which the state is stored exactly; steps are
            clipped to land on them.
        diffusion: Include the Laplacian.
        reaction: Include the reaction term.

    Returns:
        The trajectory.

    Raises:
        LikelyGlobalSolutionError: When the solution decays below
            ``decay_ratio`` of its initial maximum, or when max_steps is hit
            with u_max below 10 times its initial maximum.
    """
    if not M > 0:
        raise InvalidArgumentError(f"amplitude must be positive, got {M}")

    op = ReactionDiffusion(spec, grid, diffusion, reaction)
    u = np.array(spec.initial_values(grid, M) if initial is None else initial, dtype=float)
    if u.shape != grid.nodes.shape:
        raise InvalidArgumentError("initial values do not match the grid")
    u[grid.boundary_mask] = 0.0

    u_max0 = float(np.max(np.abs(u)))
    if u_max0 <= 0:
        raise LikelyGlobalSolutionError("zero initial data is a global solution")

    pending = sorted(float(t) for t in (capture_times or ()))
    captures: List[Field] = []
    snapshots: List[Field] = [Field(grid, u, 0.0)]
    recorder = _SeriesRecorder(grid.nodes, params.series_resolution)
    recorder.record(0.0, u, u_max0, force=True)

    t = 0.0
    u_max = u_max0
    next_snapshot = 2.0 * u_max0
    next_decade = 10.0 * u_max0
    stop_reason = MAX_STEPS
    steps = 0
    warned_negative = False

    logger.info("run: M=%g, m=%d, p=%g, u_stop=%.3g", M, grid.m, spec.p, params.u_stop)

    while steps < params.max_steps:
        while pending and pending[0] <= t:
            captures.append(Field(grid, u, t))
            pending.pop(0)

        if u_max >= params.u_stop:
            stop_reason = THRESHOLD
            break

        cap = _END_GROWTH_CAP if u_max >= 0.1 * params.u_stop else None
        dt = op.stable_dt(u, params, growth_cap=cap)
        hit_capture = bool(pending) and t + dt >= pending[0]
        if hit_capture:
            dt = pending[0] - t

        try:
            u = op.step(u, dt)
        except NanStateError:
            logger.warning("run: non-finite state at t=%.6g after %d steps", t, steps)
            stop_reason = NAN
            break

        steps += 1
        t = pending[0] if hit_capture else t + dt
        u_max = float(np.max(np.abs(u)))

        if not warned_negative and float(np.min(u)) < -1e-12 * u_max:
            logger.warning("run: negative values appeared at t=%.6g (min %.3g)", t, float(np.min(u)))
            warned_negative = True

        snapshot_due = u_max >= next_snapshot
        recorder.record(t, u, u_max, force=hit_capture or snapshot_due)
        if hit_capture:
            captures.append(Field(grid, u, t))
            pending.pop(0)
        if snapshot_due:
            snapshots.append(Field(grid, u, t))
            next_snapshot = 2.0 * u_max
        if u_max >= next_decade:
            logger.debug("run: u_max=%.3e at t=%.10g (%d steps)", u_max, t, steps)
            next_decade = 10.0 * u_max

        if u_max < params.decay_ratio * u_max0:
            raise LikelyGlobalSolutionError(
                f"u_max decayed to {u_max:.3g} (initial {u_max0:.3g}) by t={t:.6g}",
                details={"t": t, "u_max": u_max, "M": M},
            )

    if stop_reason == MAX_STEPS and u_max < 10.0 * u_max0:
        raise LikelyGlobalSolutionError(
            f"max_steps reached with u_max={u_max:.3g} below 10x the initial maximum",
            details={"t": t, "u_max": u_max, "M": M},
        )

    recorder.record(t, u, u_max, force=True)
    if snapshots[-1].time < t:
        snapshots.append(Field(grid, u, t))

    logger.info("run: stopped (%s) at t=%.10g, u_max=%.3e, %d steps", stop_reason, t, u_max, steps)
    return Trajectory(
        spec=spec,
        M=M,
        grid=grid,
        t=np.asarray(recorder.t),
        u_max=np.asarray(recorder.u_max),
        argmax=np.asarray(recorder.argmax),
        snapshots=tuple(snapshots),
        stop_reason=stop_reason,
        u_stop=params.u_stop,
        captures=tuple(captures),
        steps=steps,
    )
