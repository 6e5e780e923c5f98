import math

import numpy as np
import pytest

from blowup_lab.core.mesh import (
    INTERVAL,
    RADIAL,
    Field,
    build_grid,
    gradient,
    gradient_sq,
    interpolate,
    interpolate_many,
    laplacian,
    unit_sphere_area,
    weighted_moment_integral,
)
from blowup_lab.utils.errors import (
    InvalidArgumentError,
    NanStateError,
    OutOfDomainError,
    UnsupportedMomentError,
)


class TestBuildGrid:
    def test_radial_nodes(self):
        grid = build_grid(RADIAL, 3, 1.0, 8)
        np.testing.assert_allclose(grid.nodes, np.arange(9) / 8.0)
        assert grid.h == pytest.approx(0.125)
        assert grid.boundary_mask.tolist() == [False] * 8 + [True]

    def test_interval_nodes_symmetric(self):
        grid = build_grid(INTERVAL, 1, 1.0, 8)
        np.testing.assert_allclose(grid.nodes, np.linspace(-1.0, 1.0, 9), atol=1e-15)
        assert grid.nodes[4] == 0.0
        np.testing.assert_array_equal(grid.nodes, -grid.nodes[::-1])
        assert grid.boundary_mask[0] and grid.boundary_mask[-1]

    def test_uniform_spacing(self):
        grid = build_grid(RADIAL, 3, 1.0, 14)
        assert grid.h == pytest.approx(1.0 / 14)
        assert grid.nodes[6] == pytest.approx(6.0 / 14)
        assert grid.m == 14

    @pytest.mark.parametrize(
        "kind, N, extent, m",
        [
            (INTERVAL, 1, 1.0, 4),
            (INTERVAL, 1, 0.0, 16),
            (INTERVAL, 1, -1.0, 16),
            (INTERVAL, 3, 1.0, 16),
            ("square", 2, 1.0, 16),
        ],
    )
    def test_rejects_bad_arguments(self, kind, N, extent, m):
        with pytest.raises(InvalidArgumentError):
            build_grid(kind, N, extent, m)


class TestLaplacian:
    def test_quadratic_exact_on_interval(self):
        grid = build_grid(INTERVAL, 1, 1.0, 16)
        lap = laplacian(grid.field(grid.nodes ** 2))
        np.testing.assert_allclose(lap.values[1:-1], 2.0, rtol=1e-10)
        assert lap.values[0] == 0.0 and lap.values[-1] == 0.0

    def test_quadratic_exact_on_ball(self):
        grid = build_grid(RADIAL, 3, 1.0, 16)
        lap = laplacian(grid.field(grid.nodes ** 2))
        np.testing.assert_allclose(lap.values[:-1], 6.0, rtol=1e-10)

    def test_sine_second_derivative(self):
        grid = build_grid(INTERVAL, 1, 1.0, 1024)
        x = grid.nodes
        lap = laplacian(grid.field(np.sin(math.pi * x)))
        error = np.abs(lap.values[1:-1] + math.pi ** 2 * np.sin(math.pi * x[1:-1]))
        assert error.max() <= 1e-4


class TestWeightedMoments:
    def test_interval_gaussian_mass(self):
        grid = build_grid(INTERVAL, 1, 16.0, 4096)
        assert weighted_moment_integral(grid.field(1.0), 0) == pytest.approx(2.0 * math.sqrt(math.pi), abs=1e-8)

    def test_ball_gaussian_mass(self):
        grid = build_grid(RADIAL, 3, 16.0, 4096)
        assert weighted_moment_integral(grid.field(1.0), 0) == pytest.approx((4.0 * math.pi) ** 1.5, abs=1e-6)

    def test_second_moment(self):
        # int y^2 e^{-y^2/4} dy = 4 sqrt(pi)
        grid = build_grid(INTERVAL, 1, 16.0, 4096)
        assert weighted_moment_integral(grid.field(1.0), 1) == pytest.approx(4.0 * math.sqrt(math.pi), rel=1e-8)

    @pytest.mark.parametrize("k", [0, 3, 6])
    def test_zero_field(self, k):
        grid = build_grid(INTERVAL, 1, 16.0, 64)
        assert weighted_moment_integral(grid.zeros(), k) == 0.0

    @pytest.mark.parametrize("k", [-1, 7])
    def test_unsupported_order(self, k):
        grid = build_grid(INTERVAL, 1, 16.0, 64)
        with pytest.raises(UnsupportedMomentError):
            weighted_moment_integral(grid.field(1.0), k)


def test_unit_sphere_area():
    assert unit_sphere_area(1) == pytest.approx(2.0)
    assert unit_sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert unit_sphere_area(3) == pytest.approx(4.0 * math.pi)


class TestGradientSq:
    def test_linear_field(self):
        grid = build_grid(INTERVAL, 1, 1.0, 16)
        np.testing.assert_allclose(gradient_sq(grid.field(grid.nodes)).values[1:-1], 1.0)

    def test_constant_field(self):
        grid = build_grid(RADIAL, 3, 1.0, 16)
        np.testing.assert_array_equal(gradient_sq(grid.field(3.0)).values, 0.0)

    def test_sine(self):
        grid = build_grid(INTERVAL, 1, 1.0, 512)
        x = grid.nodes
        sq = gradient_sq(grid.field(np.sin(math.pi * x))).values
        expected = math.pi ** 2 * np.cos(math.pi * x) ** 2
        assert np.abs(sq - expected)[1:-1].max() <= 1e-3


class TestInterpolate:
    def test_node_values_are_exact(self):
        grid = build_grid(INTERVAL, 1, 1.0, 16)
        f = grid.field(np.cos(grid.nodes))
        for i in (0, 5, 16):
            assert interpolate(f, grid.nodes[i]) == f.values[i]

    def test_linear_field_is_exact(self):
        grid = build_grid(INTERVAL, 1, 1.0, 16)
        f = grid.field(2.0 * grid.nodes)
        mid = 0.5 * (grid.nodes[3] + grid.nodes[4])
        assert interpolate(f, mid) == pytest.approx(2.0 * mid, abs=1e-15)

    def test_quadratic_midpoint_error(self):
        grid = build_grid(INTERVAL, 1, 1.0, 1024)
        f = grid.field(grid.nodes ** 2)
        mids = 0.5 * (grid.nodes[:-1] + grid.nodes[1:])
        error = np.abs(interpolate_many(f, mids) - mids ** 2)
        assert error.max() <= grid.h ** 2 / 4.0 * (1.0 + 1e-9)

    def test_out_of_domain(self):
        grid = build_grid(RADIAL, 3, 1.0, 16)
        with pytest.raises(OutOfDomainError):
            interpolate(grid.zeros(), 1.5)
        with pytest.raises(OutOfDomainError):
            interpolate(grid.zeros(), -0.1)


class TestField:
    def test_rejects_non_finite(self):
        grid = build_grid(INTERVAL, 1, 1.0, 8)
        values = np.zeros(9)
        values[3] = np.nan
        with pytest.raises(NanStateError):
            Field(grid, values)

    def test_rejects_wrong_length(self):
        grid = build_grid(INTERVAL, 1, 1.0, 8)
        with pytest.raises(InvalidArgumentError):
            Field(grid, np.zeros(5))

    def test_argmax_first_on_ties(self):
        grid = build_grid(INTERVAL, 1, 1.0, 8)
        values = np.zeros(9)
        values[[2, 6]] = 1.0
        f = Field(grid, values)
        assert f.u_max == 1.0
        assert f.argmax == grid.nodes[2]

    def test_values_read_only(self):
        grid = build_grid(INTERVAL, 1, 1.0, 8)
        f = grid.field(1.0)
        with pytest.raises(ValueError):
            f.values[0] = 2.0

    def test_integrate_with_mask(self):
        grid = build_grid(INTERVAL, 1, 1.0, 8)
        assert grid.integrate(np.ones(9)) == pytest.approx(2.0)
        assert grid.integrate(np.ones(9), grid.nodes >= 0) == pytest.approx(1.0 + 0.125)


class TestSummationByParts:
    @staticmethod
    def defect(kind, N, m):
        grid = build_grid(kind, N, 1.0, m)
        x = grid.nodes
        f = grid.field(np.cos(0.5 * math.pi * x))
        g = grid.field(1.0 - x ** 2)
        lap_term = grid.integrate(laplacian(f).values * g.values)
        grad_term = grid.integrate(gradient(f) * gradient(g))
        return abs(lap_term + grad_term), grid.h

    @pytest.mark.parametrize("kind, N", [(INTERVAL, 1), (RADIAL, 3)])
    def test_defect_is_order_h(self, kind, N):
        defects = [self.defect(kind, N, m) for m in (64, 128, 256)]
        for value, h in defects:
            assert value <= h
        for (coarse, _), (fine, _) in zip(defects, defects[1:]):
            assert fine <= 0.6 * coarse + 1e-12


class TestInterpolateMonotone:
    def test_stays_between_adjacent_nodes(self):
        grid = build_grid(INTERVAL, 1, 1.0, 32)
        rng = np.random.default_rng(7)
        f = grid.field(rng.normal(size=len(grid.nodes)))
        for i in range(grid.m):
            lo, hi = sorted((f.values[i], f.values[i + 1]))
            xs = np.linspace(grid.nodes[i], grid.nodes[i + 1], 9)
            inside = interpolate_many(f, xs)
            assert np.all(inside >= lo - 1e-14) and np.all(inside <= hi + 1e-14)
            steps = np.diff(inside)
            assert np.all(steps >= -1e-14) or np.all(steps <= 1e-14)
