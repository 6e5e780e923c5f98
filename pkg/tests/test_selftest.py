import numpy as np
import pytest

from blowup_lab.handlers.selftest_handler import (
    ESTIMATOR_TOL,
    HEAT_TOL,
    ODE_TOL,
    ORACLES,
    QUADRATURE_TOL,
    RATE_TOL,
    estimator_oracle,
    heat_oracle,
    ode_oracle,
    power_law_trajectory,
    quadrature_oracle,
    rate_oracle,
    run_selftest,
)
from tests.conftest import make_spec


def test_quadrature_oracle():
    assert quadrature_oracle() <= QUADRATURE_TOL


def test_ode_oracle():
    assert ode_oracle() <= ODE_TOL


def test_power_law_oracles():
    assert estimator_oracle() <= ESTIMATOR_TOL
    assert rate_oracle() <= RATE_TOL


@pytest.mark.parametrize("p, T, kappa", [(2.0, 1.0, 1.0), (3.0, 0.5, 2.0)])
def test_power_law_series_stays_representable(p, T, kappa):
    traj = power_law_trajectory(make_spec(p=p), T=T, kappa=kappa)
    gaps = T - traj.t
    assert np.all(np.diff(traj.t) > 0)
    assert gaps[-1] == pytest.approx(1e-6 * T, rel=1e-6)
    assert traj.u_stop == pytest.approx(traj.u_max[-1], rel=1e-12)


def test_heat_oracle():
    assert heat_oracle() <= HEAT_TOL


def test_run_selftest_reports_every_oracle():
    results = run_selftest()
    assert [result.name for result in results] == [name for name, _, _ in ORACLES]
    assert all(result.passed for result in results)
    assert all(result.seconds >= 0 for result in results)


def test_failing_oracle_is_reported():
    results = run_selftest([("always_off", lambda: 1.0, 1e-3)])
    assert not results[0].passed
    assert results[0].error == pytest.approx(1.0)
