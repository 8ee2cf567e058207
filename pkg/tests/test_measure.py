import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glslab import CapacityError, GaussianMeasureSpec, IntegrationError, build_grid, integrate
from glslab.measure import gauss_hermite_1d, integrate_with_error


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


class TestOneDimensionalRule:
    def test_matches_physicists_rule_after_rescaling(self):
        # reference: numpy's Gauss-Hermite rule for weight exp(-x^2)
        for order in (2, 5, 16, 64):
            x_ref, w_ref = np.polynomial.hermite.hermgauss(order)
            nodes, weights = gauss_hermite_1d(order)
            np.testing.assert_allclose(nodes, np.sqrt(2.0) * x_ref, atol=1e-13)
            np.testing.assert_allclose(weights, w_ref / np.sqrt(np.pi), atol=1e-14)

    def test_even_gaussian_moments(self):
        nodes, weights = gauss_hermite_1d(24)
        for k in range(0, 23, 2):
            moment = float(weights @ nodes**k)
            assert moment == pytest.approx(double_factorial(k - 1), rel=1e-12)

    def test_odd_moments_vanish(self):
        nodes, weights = gauss_hermite_1d(33)
        for k in (1, 3, 7, 15):
            # compare the cancellation against the absolute-value scale
            scale = float(weights @ np.abs(nodes) ** k)
            assert abs(weights @ nodes**k) < 1e-14 * max(1.0, scale)

    def test_symmetry_and_normalization(self):
        nodes, weights = gauss_hermite_1d(17)
        np.testing.assert_allclose(nodes, -nodes[::-1], atol=0)
        np.testing.assert_allclose(weights, weights[::-1], atol=0)
        assert weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert (weights > 0).all()

    def test_order_one(self):
        nodes, weights = gauss_hermite_1d(1)
        np.testing.assert_array_equal(nodes, [0.0])
        np.testing.assert_array_equal(weights, [1.0])


class TestGrids:
    def test_tensor_point_count(self):
        for d in (1, 2, 3):
            grid = build_grid(GaussianMeasureSpec(d=d), 8)
            assert grid.n_points == 8**d
            assert grid.nodes.shape == (8**d, d)

    def test_cross_moments_d2(self, grid2):
        x = grid2.nodes
        assert float(grid2.weights @ (x[:, 0] ** 2 * x[:, 1] ** 2)) == pytest.approx(1.0, rel=1e-12)
        assert abs(grid2.weights @ (x[:, 0] * x[:, 1])) < 1e-14

    def test_dimension_capacity(self):
        with pytest.raises(CapacityError):
            GaussianMeasureSpec(d=0)
        with pytest.raises(CapacityError):
            GaussianMeasureSpec(d=4)

    def test_order_capacity(self):
        spec = GaussianMeasureSpec(d=1)
        with pytest.raises(CapacityError):
            build_grid(spec, 0)
        with pytest.raises(CapacityError):
            build_grid(spec, 257)

    def test_coarse_partner_is_embedded_lower_order(self, grid1):
        coarse = grid1.coarse
        assert coarse.order < grid1.order
        assert coarse.d == grid1.d
        assert abs(coarse.weights.sum() - 1.0) < 1e-14


class TestIntegration:
    def test_error_estimate_small_for_analytic_integrand(self, grid1):
        value, err = integrate_with_error(grid1, lambda x: np.exp(-x[:, 0]))
        assert value == pytest.approx(np.exp(0.5), rel=1e-12)
        assert err < 1e-12

    def test_error_estimate_flags_rough_integrand(self, grid1):
        # |x| has a kink at the origin; the embedded estimate must notice
        _, err = integrate_with_error(grid1, lambda x: np.abs(x[:, 0]))
        assert err > 1e-8

    def test_nonfinite_values_are_rejected(self, grid1):
        def bad(x):
            out = x[:, 0].copy()
            out[3] = np.nan
            return out

        with pytest.raises(IntegrationError):
            integrate(grid1, bad)

    def test_shape_mismatch_is_rejected(self, grid1):
        with pytest.raises(IntegrationError):
            integrate(grid1, lambda x: x[:5, 0])


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(-10, 10, allow_nan=False),
    b=st.floats(-10, 10, allow_nan=False),
    c=st.floats(-10, 10, allow_nan=False),
)
def test_quadratic_polynomials_integrate_exactly(a, b, c):
    grid = build_grid(GaussianMeasureSpec(d=1), 12)
    value = integrate(grid, lambda x: a * x[:, 0] ** 2 + b * x[:, 0] + c)
    assert value == pytest.approx(a + c, abs=1e-10 * (1 + abs(a) + abs(c)))
