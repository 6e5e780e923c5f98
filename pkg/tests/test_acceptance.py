"""
Solver-backed end-to-end checks of the blow-up asymptotics.

These take minutes; run them with ``pytest --run-slow``.
"""

import pytest

from blowup_lab.core.blowup import estimate_T, fit_rate_exponent, plateau_ratio
from blowup_lab.core.integrator import SolverParams, run_to_blowup
from blowup_lab.core.model import DOMAIN_BALL, FunctionSpec, dense_maximizer
from blowup_lab.core.selfsim import (
    VAR,
    RescaledPotential,
    build_y_grid,
    capture_times_for,
    identity_residual,
    to_selfsimilar_frame,
)
from blowup_lab.core.sweep import check_theorem2, check_theorem3, run_sweep
from blowup_lab.handlers.experiment_handler import ExperimentHandler
from blowup_lab.utils.config import parse_config
from tests.conftest import make_spec

pytestmark = pytest.mark.slow

BALL_CONFIG = """\
[problem]
N = 3
p = {p}
domain_kind = ball
extent = 1.0
V.kind = constant
V.value = 1.0
phi.kind = cosine_cap
M = 50

[solver]
m = 2048
u_stop = 1e8
"""

SWEEP_MS = [8.0, 16.0, 32.0, 64.0]


def ball_spec(p=2.0):
    return make_spec(p=p, domain=DOMAIN_BALL, N=3)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_rate_and_plateau(p):
    spec = ball_spec(p)
    traj = run_to_blowup(spec, 50.0, spec.build_grid(2048), SolverParams(u_stop=1e8))
    T, _ = estimate_T(traj)
    assert fit_rate_exponent(traj, T) == pytest.approx(1.0 / (p - 1.0), rel=0.05)
    assert plateau_ratio(traj, T) <= 1.2


def test_blowup_time_asymptotics():
    spec = ball_spec()
    grid = spec.build_grid(2048)
    report = run_sweep(spec, grid, SolverParams(u_stop=1e8), SWEEP_MS, workers=4)
    assert [row.M for row in report.rows] == SWEEP_MS
    assert check_theorem2(report, tolerance=0.1).passed


def test_concentration_at_off_centre_maximizer():
    spec = make_spec(potential=FunctionSpec.gaussian_bump(1.0, 1.0, 0.5, 0.02))
    grid = spec.build_grid(512)
    report = run_sweep(spec, grid, SolverParams(u_stop=1e8), SWEEP_MS, workers=4)
    result = check_theorem3(report)
    assert result.checks["margin_nonnegative"]
    assert result.margins[-1] < result.margins[0]
    xbar = dense_maximizer(spec).xbar
    assert abs(report.rows[-1].a - xbar) <= 5.0 * grid.h


@pytest.fixture(scope="module")
def energy_run(tmp_path_factory):
    handler = ExperimentHandler(parse_config(BALL_CONFIG.format(p=2)), tmp_path_factory.mktemp("ball"))
    handler.run()
    return handler.energy()


def test_energy_monotone_for_constant_potential(energy_run):
    assert energy_run.checks["energy_monotone"]
    assert energy_run.checks["energy_bounded"]


def test_profile_approaches_constant(energy_run):
    report = energy_run.report
    assert report.rows[-1].dev_core <= 0.1 * report.k_a
    assert energy_run.checks["deviation_trend"]


def _variance_residuals(m, ds, s_centre):
    spec = ball_spec()
    grid = spec.build_grid(m)
    params = SolverParams(u_stop=1e8)
    T, _ = estimate_T(run_to_blowup(spec, 50.0, grid, params))
    s_values = [s_centre - ds, s_centre, s_centre + ds]
    traj = run_to_blowup(spec, 50.0, grid, params, capture_times=capture_times_for(T, s_values))
    y_grid = build_y_grid(spec)
    frames = [to_selfsimilar_frame(snap, 0.0, T, spec.beta, y_grid) for snap in traj.captures]
    potentials = [RescaledPotential.sample(spec, frame) for frame in frames]
    return {identity: identity_residual(frames, potentials, identity) for identity in (VAR, "wvar_1")}


def test_identity_residuals_converge():
    coarse = _variance_residuals(1024, 0.5, 5.5)
    fine = _variance_residuals(2048, 0.25, 5.5)
    for identity in (VAR, "wvar_1"):
        assert fine[identity] <= 0.5 * coarse[identity], identity
