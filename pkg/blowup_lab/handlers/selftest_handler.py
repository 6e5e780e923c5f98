"""
Self-test handler for the blow-up laboratory.
Provides the oracle suite: quadrature, diffusionless blow-up, power-law estimators and linear heat decay.
"""

import logging
import math
import time
from typing import List, NamedTuple, Sequence

import numpy as np

from blowup_lab.core.blowup import estimate_T, fit_rate_exponent
from blowup_lab.core.integrator import (
    THRESHOLD,
    ReactionDiffusion,
    SolverParams,
    Trajectory,
    run_to_blowup,
)
from blowup_lab.core.mesh import INTERVAL, RADIAL, Field, build_grid, gaussian_weight
from blowup_lab.core.model import DOMAIN_INTERVAL, FunctionSpec, ProblemSpec, gaussian_mass

logger = logging.getLogger(__name__)

QUADRATURE_TOL = 1e-6
ODE_TOL = 1e-6
ESTIMATOR_TOL = 1e-10
RATE_TOL = 1e-8
HEAT_TOL = 1e-4


class OracleResult(NamedTuple):
    name: str
    passed: bool
    error: float
    tolerance: float
    seconds: float


def constant_problem(p: float, V: float, extent: float = 1.0) -> ProblemSpec:
    """Interval problem with constant potential and a cosine-cap profile."""
    return ProblemSpec(
        N=1,
        p=p,
        domain_kind=DOMAIN_INTERVAL,
        extent=extent,
        potential=FunctionSpec.constant(V),
        profile=FunctionSpec.cosine_cap(),
    )


def power_law_trajectory(
    spec: ProblemSpec,
    T: float,
    kappa: float,
    decades: float = 8.0,
    points: int = 400,
    u_stop: float = 1e8,
    min_gap: float = 1e-6,
) -> Trajectory:
    """
    Series following u_max = kappa (T - t)^{-beta} exactly.

    The times are chosen so that T - t runs geometrically over ``decades``
    decades of u_max. The series ends at ``u_stop`` or earlier, where
    T - t reaches ``min_gap * T``, so consecutive times stay distinct in
    double precision; the trajectory's threshold is that final value.
    """
    beta = spec.beta
    u_top = min(u_stop, kappa * (min_gap * T) ** (-beta))
    u = np.geomspace(u_top / 10.0 ** decades, u_top, points)
    t = T - (u / kappa) ** (-1.0 / beta)
    grid = spec.build_grid(8)
    final = Field(grid, np.full(len(grid.nodes), u[-1]) * spec.phi(grid.nodes), float(t[-1]))
    return Trajectory(
        spec=spec,
        M=1.0,
        grid=grid,
        t=t,
        u_max=u,
        argmax=np.zeros(points),
        snapshots=(final,),
        stop_reason=THRESHOLD,
        u_stop=u_top,
    )


def quadrature_oracle() -> float:
    """Largest relative error of the Gaussian mass on an interval (N=1) and radial (N=3) grid."""
    errors = []
    for kind, N in ((INTERVAL, 1), (RADIAL, 3)):
        grid = build_grid(kind, N, 16.0, 1024)
        value = grid.integrate(gaussian_weight(grid.nodes))
        errors.append(abs(value / gaussian_mass(N) - 1.0))
    return max(errors)


def ode_oracle() -> float:
    """
    Diffusionless runs from constant data against u0^{1-p} / ((p-1) V).

    Returns:
        The largest relative error over p in {2, 3}.
    """
    params = SolverParams(reaction_safety=1e-3, u_stop=1e4)
    errors = []
    for p, V, u0 in ((2.0, 1.0, 1.0), (3.0, 2.0, 0.5)):
        spec = constant_problem(p, V)
        grid = spec.build_grid(8)
        traj = run_to_blowup(spec, 1.0, grid, params, initial=np.full(len(grid.nodes), u0), diffusion=False)
        T_est, _ = estimate_T(traj)
        exact = u0 ** (1.0 - p) / ((p - 1.0) * V)
        errors.append(abs(T_est / exact - 1.0))
    return max(errors)


_POWER_LAWS = ((2.0, 1.0, 1.0), (3.0, 0.5, 2.0))


def estimator_oracle() -> float:
    """Blow-up time fit on exact power laws for p = 2 and p = 3."""
    errors = []
    for p, T, kappa in _POWER_LAWS:
        T_est, _ = estimate_T(power_law_trajectory(constant_problem(p, 1.0), T, kappa))
        errors.append(abs(T_est - T))
    return max(errors)


def rate_oracle() -> float:
    """Rate exponent fit on the same power laws against 1/(p-1)."""
    errors = []
    for p, T, kappa in _POWER_LAWS:
        traj = power_law_trajectory(constant_problem(p, 1.0), T, kappa)
        errors.append(abs(fit_rate_exponent(traj, T) - 1.0 / (p - 1.0)))
    return max(errors)


def heat_oracle(m: int = 128, t_end: float = 0.1) -> float:
    """
    Linear heat equation on [-1/2, 1/2] from cos(pi x): the peak decays as e^{-pi^2 t}.

    Returns:
        Relative error of the peak at t_end.
    """
    spec = constant_problem(2.0, 1.0, extent=0.5)
    grid = spec.build_grid(m)
    op = ReactionDiffusion(spec, grid, diffusion=True, reaction=False)
    params = SolverParams()
    u = spec.initial_values(grid, 1.0)
    t = 0.0
    while t < t_end:
        dt = min(op.stable_dt(u, params), t_end - t)
        u = op.step(u, dt)
        t += dt
    return abs(float(np.max(u)) / math.exp(-math.pi ** 2 * t_end) - 1.0)


ORACLES: Sequence[tuple] = (
    ("quadrature", quadrature_oracle, QUADRATURE_TOL),
    ("ode_limit", ode_oracle, ODE_TOL),
    ("power_law_time", estimator_oracle, ESTIMATOR_TOL),
    ("power_law_rate", rate_oracle, RATE_TOL),
    ("linear_heat", heat_oracle, HEAT_TOL),
)


def run_selftest(oracles: Sequence[tuple] = ORACLES) -> List[OracleResult]:
    """Run every oracle and report its error against its tolerance."""
    results = []
    for name, oracle, tolerance in oracles:
        start = time.perf_counter()
        error = oracle()
        elapsed = time.perf_counter() - start
        passed = bool(error <= tolerance)
        logger.info("selftest %s: error %.3g (tol %.1g) in %.2fs", name, error, tolerance, elapsed)
        results.append(OracleResult(name, passed, error, tolerance, elapsed))
    return results
