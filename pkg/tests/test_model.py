import math

import numpy as np
import pytest

from blowup_lab.core.model import (
    DOMAIN_BALL,
    THEOREM3_INAPPLICABLE,
    FunctionSpec,
    compute_A,
    concentration_ratio,
    dense_maximizer,
    frozen_constant_energy,
    gaussian_mass,
    limit_constant_k,
    ode_reference_time,
    validate_spec,
)
from blowup_lab.utils.errors import InvalidArgumentError, InvalidProblemError
from tests.conftest import make_spec


class TestFunctionSpec:
    def test_cosine_cap_vanishes_on_boundary(self):
        cap = FunctionSpec.cosine_cap()
        assert cap.evaluate(0.0, 1.0) == pytest.approx(1.0)
        np.testing.assert_allclose(cap.evaluate([-1.0, 1.0], 1.0), 0.0)

    def test_gaussian_bump(self):
        bump = FunctionSpec.gaussian_bump(base=1.0, amp=1.0, center=0.3, width=0.01)
        assert bump.evaluate(0.3, 1.0) == pytest.approx(2.0)
        assert bump.derivative(0.3, 1.0) == pytest.approx(0.0)

    def test_table_interpolates(self):
        table = FunctionSpec.table([0.0, 1.0], [1.0, 3.0])
        assert table.evaluate(0.5, 1.0) == pytest.approx(2.0)
        assert table.derivative(0.25, 1.0) == pytest.approx(2.0)
        assert table.covers(0.0, 1.0)
        assert not table.covers(-1.0, 1.0)

    def test_derivative_matches_finite_difference(self):
        cap = FunctionSpec.cosine_cap(amp=2.0)
        x, eps = 0.37, 1e-6
        numeric = (cap.evaluate(x + eps, 1.0) - cap.evaluate(x - eps, 1.0)) / (2 * eps)
        assert cap.derivative(x, 1.0) == pytest.approx(numeric, rel=1e-6)

    @pytest.mark.parametrize(
        "params",
        [
            {"kind": "spline"},
            {"kind": "constant"},
            {"kind": "constant", "value": 1.0, "amp": 2.0},
            {"kind": "gaussian_bump", "base": 1.0, "amp": 1.0, "center": 0.0, "width": 0.0},
            {"kind": "table", "nodes": [0.0, 0.0], "values": [1.0, 1.0]},
        ],
    )
    def test_rejects_bad_params(self, params):
        with pytest.raises(InvalidProblemError):
            FunctionSpec.from_params(params)

    def test_round_trips_through_params(self):
        bump = FunctionSpec.gaussian_bump(1.0, 0.5, 0.2, 0.04)
        assert FunctionSpec.from_params(bump.to_params()) == bump


class TestValidateSpec:
    def test_constant_potential_passes(self, ball_spec):
        report = validate_spec(ball_spec, ball_spec.build_grid(64))
        assert report.passed
        assert report.theorem3_applicable
        assert report.warnings == []

    def test_supercritical_warns(self):
        spec = make_spec(p=6.0, domain=DOMAIN_BALL, N=3)
        report = validate_spec(spec, spec.build_grid(64))
        assert report.passed
        assert THEOREM3_INAPPLICABLE in report.warnings
        assert not spec.subcritical

    def test_potential_touching_zero_is_invalid(self):
        spec = make_spec(potential=FunctionSpec.table([-1.0, 0.0, 1.0], [1.0, 0.0, 1.0]))
        with pytest.raises(InvalidProblemError) as excinfo:
            validate_spec(spec, spec.build_grid(64))
        assert excinfo.value.code == "invalid-problem"

    def test_p_at_most_one_is_invalid(self):
        spec = make_spec(p=1.0)
        with pytest.raises(InvalidProblemError):
            validate_spec(spec, spec.build_grid(64))

    def test_profile_not_vanishing_is_invalid(self):
        spec = make_spec(profile=FunctionSpec.constant(1.0))
        with pytest.raises(InvalidProblemError):
            validate_spec(spec, spec.build_grid(64))

    def test_mismatched_grid(self, interval_spec, ball_spec):
        with pytest.raises(InvalidArgumentError):
            validate_spec(interval_spec, ball_spec.build_grid(64))


class TestComputeA:
    def test_unit_potential(self, interval_spec):
        A, xbar = compute_A(interval_spec, interval_spec.build_grid(64))
        assert A == pytest.approx(1.0)
        assert xbar == pytest.approx(0.0, abs=1e-12)

    def test_p3_potential_two(self):
        spec = make_spec(p=3.0, V=2.0)
        assert compute_A(spec, spec.build_grid(64)).A == pytest.approx(0.5)

    def test_matches_dense_scan(self):
        spec = make_spec(
            domain=DOMAIN_BALL,
            N=3,
            potential=FunctionSpec.gaussian_bump(1.0, 1.0, 0.3, 0.01),
        )
        A, xbar = compute_A(spec, spec.build_grid(256))
        A_dense, xbar_dense = dense_maximizer(spec)
        assert A == pytest.approx(A_dense, rel=1e-4)
        assert xbar == pytest.approx(xbar_dense, abs=2.0 / 256)

    def test_refinement_invariance(self):
        spec = make_spec(potential=FunctionSpec.gaussian_bump(1.0, 1.0, 0.3, 0.05))
        grid = spec.build_grid(128)
        assert compute_A(spec, grid, refine=16).A == pytest.approx(compute_A(spec, grid).A, rel=1e-4)

    def test_refine_too_small(self, interval_spec):
        with pytest.raises(InvalidArgumentError):
            compute_A(interval_spec, interval_spec.build_grid(64), refine=4)


class TestReferenceQuantities:
    def test_ode_reference_time(self, interval_spec):
        assert ode_reference_time(interval_spec, 2.0, A=1.0) == pytest.approx(0.5)
        spec3 = make_spec(p=3.0)
        assert ode_reference_time(spec3, 10.0, A=0.5) == pytest.approx(0.0025)
        assert ode_reference_time(spec3, 5.0, A=0.5) == pytest.approx(4 * ode_reference_time(spec3, 10.0, A=0.5))

    def test_ode_reference_time_rejects_nonpositive_M(self, interval_spec):
        with pytest.raises(InvalidArgumentError):
            ode_reference_time(interval_spec, 0.0)

    @pytest.mark.parametrize("p, V, k", [(2.0, 1.0, 1.0), (3.0, 2.0, 0.5), (3.0, 0.5, 1.0)])
    def test_limit_constant_k(self, p, V, k):
        assert limit_constant_k(make_spec(p=p, V=V), 0.0) == pytest.approx(k)

    def test_gaussian_mass(self):
        assert gaussian_mass(1) == pytest.approx(2.0 * math.sqrt(math.pi))
        assert gaussian_mass(3) == pytest.approx(44.546623, rel=1e-6)

    def test_frozen_energy_maximal_at_k(self):
        spec = make_spec(p=3.0, V=2.0)
        k = limit_constant_k(spec, 0.0)
        peak = frozen_constant_energy(spec, 0.0, k)
        assert peak > frozen_constant_energy(spec, 0.0, 0.9 * k)
        assert peak > frozen_constant_energy(spec, 0.0, 1.1 * k)

    def test_concentration_ratio_is_one_at_maximizer(self, interval_spec):
        A, xbar = dense_maximizer(interval_spec)
        assert concentration_ratio(interval_spec, xbar, A) == pytest.approx(1.0)
        assert 0.0 < concentration_ratio(interval_spec, 0.5, A) < 1.0
