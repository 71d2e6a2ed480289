import math

import numpy as np
import pytest

from lattice_embed.charts import ParametricChart, monge_chart, sphere_chart, torus_chart
from lattice_embed.errors import (
    ClosestPointError,
    CurvatureNotSupportedError,
    DimensionMismatchError,
    ImmersionError,
    InvertedBoundsError,
)
from lattice_embed.manifold import Torus


@pytest.fixture
def chart_torus():
    return torus_chart([0.0, 0.0, 0.0], 2.0, 0.5)


class TestParametricChart:
    def test_torus_closest_point_matches_implicit(self, chart_torus):
        """Multi-start descent finds the same footpoint as the level-set torus"""
        implicit = Torus([0, 0, 0], 2.0, 0.5)
        rng = np.random.default_rng(43)
        for q in rng.uniform(-2.5, 2.5, size=(20, 3)):
            if math.hypot(q[0], q[1]) < 0.8:
                continue
            np.testing.assert_allclose(chart_torus.closest_point(q), implicit.closest_point(q), atol=1e-6)

    def test_examples(self, chart_torus):
        np.testing.assert_allclose(chart_torus.closest_point([3, 0, 0]), [2.5, 0, 0], atol=1e-8)

    def test_periodic_wrap(self, chart_torus):
        """Queries near theta = 0 reach footpoints on both sides of the seam"""
        p = chart_torus.closest_point([2.6, -0.05, 0.0])
        assert p[1] < 0
        assert chart_torus.contains(p)

    def test_split_tangent_normal(self, chart_torus):
        p = chart_torus.map([0.3, 1.1])
        v = np.array([0.2, -0.4, 0.9])
        split = chart_torus.split_tangent_normal(p, v)
        np.testing.assert_allclose(split.tangential + split.normal, v, atol=1e-12)
        jac = chart_torus.jacobian([0.3, 1.1])
        np.testing.assert_allclose(jac.T @ split.normal, 0.0, atol=1e-10)

    def test_gaussian_curvature_matches_closed_form(self, chart_torus):
        for phi in (0.0, 0.7, math.pi / 2, 2.5):
            p = chart_torus.map([1.0, phi])
            expected = math.cos(phi) / (0.5 * (2.0 + 0.5 * math.cos(phi)))
            assert chart_torus.gaussian_curvature(p) == pytest.approx(expected, abs=1e-4)

    def test_sectional_curvature_is_gaussian(self, chart_torus):
        u = np.array([2.0, 0.4])
        p = chart_torus.map(u)
        jac = chart_torus.jacobian(u)
        value = chart_torus.sectional_curvature(p, jac[:, 0], jac[:, 0] + jac[:, 1])
        assert value == pytest.approx(chart_torus.gaussian_curvature(p), abs=1e-6)

    def test_sphere_chart_finite_difference_curvature(self):
        for radius in (0.5, 1.0, 2.0):
            chart = sphere_chart([0, 0, 0], radius)
            p = chart.map([1.0, 2.0])
            assert chart.gaussian_curvature(p) == pytest.approx(1 / radius ** 2, abs=1e-3)

    def test_sphere_chart_projection(self):
        chart = sphere_chart([0, 0, 0], 1.0)
        np.testing.assert_allclose(chart.closest_point([0, 3, 0.5]), np.array([0, 3, 0.5]) / math.sqrt(9.25), atol=1e-7)

    def test_monge_chart(self):
        """z = x^2 - y^2 has curvature -4 at the origin"""
        saddle = monge_chart([(1.0, (2, 0)), (-1.0, (0, 2))], [-1, -1], [1, 1])
        np.testing.assert_allclose(saddle.closest_point([0, 0, 0.0]), [0, 0, 0], atol=1e-7)
        assert saddle.gaussian_curvature([0, 0, 0]) == pytest.approx(-4.0, abs=1e-3)

    def test_monge_flat(self):
        flat = monge_chart([(0.5, (0, 0))], [-2, -2], [2, 2])
        np.testing.assert_allclose(flat.closest_point([0.3, -0.4, 3.0]), [0.3, -0.4, 0.5], atol=1e-8)
        assert flat.gaussian_curvature([0.3, -0.4, 0.5]) == pytest.approx(0.0, abs=1e-6)

    def test_seed_parameters(self, chart_torus):
        seeds = chart_torus.seed_parameters([2.5, 0, 0])
        assert len(seeds) == 8
        nearest = chart_torus.map(seeds[0])
        assert np.linalg.norm(nearest - [2.5, 0, 0]) < 1.0


class TestChartErrors:
    def test_inverted_bounds(self):
        with pytest.raises(InvertedBoundsError):
            ParametricChart(lambda u: np.array([u[0], u[1], 0.0]), [1, 0], [0, 1])

    def test_bounds_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            ParametricChart(lambda u: np.array([u[0], u[1], 0.0]), [0, 0], [1, 1, 1])

    def test_not_an_immersion(self):
        # the second parameter is ignored, so the Jacobian has rank 1
        degenerate = ParametricChart(lambda u: np.array([u[0], 0.0, 0.0]), [0, 0], [1, 1])
        with pytest.raises(ImmersionError):
            degenerate.split_tangent_normal([0.5, 0, 0], [1, 0, 0])

    def test_neighborhood_radius(self):
        chart = torus_chart([0, 0, 0], 2.0, 0.5, neighborhood_radius=0.1)
        with pytest.raises(ClosestPointError):
            chart.closest_point([4.0, 0, 0])

    def test_curve_has_no_curvature(self):
        circle = ParametricChart(
            lambda u: np.array([math.cos(u[0]), math.sin(u[0]), 0.0]),
            [0.0], [2 * math.pi], periodic=[True],
        )
        np.testing.assert_allclose(circle.closest_point([2, 0, 1]), [1, 0, 0], atol=1e-7)
        with pytest.raises(CurvatureNotSupportedError):
            circle.gaussian_curvature([1, 0, 0])


class TestParameterBoxEdges:
    def test_sphere_chart_pole_projects_onto_edge_circle(self):
        """The poles lie outside the parameter box; their footpoints sit on its edge"""
        chart = sphere_chart([0, 0, 0], 1.0)
        for sign in (1.0, -1.0):
            p = chart.closest_point([0, 0, sign])
            assert np.linalg.norm(p) == pytest.approx(1.0, abs=1e-12)
            assert p[2] == pytest.approx(sign * math.cos(1e-3), abs=1e-12)
            assert chart.distance([0, 0, sign]) == pytest.approx(2 * math.sin(5e-4), rel=1e-6)

    def test_sphere_chart_edge_parameter(self):
        chart = sphere_chart([0, 0, 0], 2.0)
        u = chart.parameter_of([1e-6, 0, 3.0])
        assert u[0] == pytest.approx(1e-3, abs=1e-12)
        assert math.sin(u[1]) == pytest.approx(0.0, abs=1e-6)
        assert math.cos(u[1]) > 0

    def test_monge_query_outside_box(self):
        flat = monge_chart([(0.0, (0, 0))], [-1, -1], [1, 1])
        np.testing.assert_allclose(flat.closest_point([2, 0.3, 0.5]), [1, 0.3, 0], atol=1e-8)
        np.testing.assert_allclose(flat.closest_point([-1.5, 0.2, -0.5]), [-1, 0.2, 0], atol=1e-8)

    def test_monge_query_beyond_corner(self):
        flat = monge_chart([(0.0, (0, 0))], [-1, -1], [1, 1])
        np.testing.assert_allclose(flat.closest_point([3, -4, 1]), [1, -1, 0], atol=1e-12)

    def test_curved_monge_edge(self):
        """On z = x^2 the edge footpoint still minimizes along the free axis"""
        bowl = monge_chart([(1.0, (2, 0))], [-1, -1], [1, 1])
        p = bowl.closest_point([0.5, 1.8, 0.25])
        np.testing.assert_allclose(p, [0.5, 1.0, 0.25], atol=1e-8)
