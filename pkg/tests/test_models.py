import pytest
import yaml

from lattice_embed.charts import ParametricChart
from lattice_embed.errors import ConfigValidationError
from lattice_embed.lattice import LatticePoint
from lattice_embed.manifold import Hyperplane, PolynomialHypersurface, Torus
from lattice_embed.models import (
    BoxLatticeConfig,
    ChartGridConfig,
    Diagnostic,
    ObjectiveConfig,
    PointsLatticeConfig,
    RunConfig,
    config_from_dict,
    load_config_from_yaml,
    load_config_text,
    validate_config,
)


class TestLoadConfig:
    def test_load_valid_config(self, plane_config_yaml, write_config):
        """Test loading a complete run config from YAML"""
        config = load_config_from_yaml(write_config(plane_config_yaml))

        assert isinstance(config, RunConfig)
        assert config.lattice.kind == "box"
        assert config.manifold.kind == "plane"
        assert config.fields.activation.epsilon == 0.25
        assert config.optimizer.max_iters == 500
        assert config.output.prefix == "plane"
        assert config.output.formats == ["yaml", "markdown"]

    def test_defaults(self):
        config = load_config_text("""
lattice: {kind: points, points: [[1, 0]]}
manifold: {kind: sphere, center: [0, 0], radius: 1.0}
""")
        assert config.objective.to_params().gamma == 1.0
        assert config.objective.lam == 0.0
        assert config.optimizer.grad_tol == 1e-6
        assert config.optimizer.max_iters == 10_000
        assert config.output.formats == ["yaml"]
        assert config.fields.reinforcement.regions == []

    def test_lambda_alias(self, plane_config_yaml):
        config = load_config_text(plane_config_yaml.replace("lambda: 0.0", "lambda: 0.5"))
        assert config.objective.lam == 0.5
        assert config.objective.to_params().lam == 0.5
        assert config.model_dump(mode="json", by_alias=True)["objective"]["lambda"] == 0.5

    def test_config_from_dict(self, plane_config_yaml):
        raw = yaml.safe_load(plane_config_yaml)
        assert config_from_dict(raw) == load_config_text(plane_config_yaml)

    def test_load_missing_file(self, temp_directory):
        with pytest.raises(OSError):
            load_config_from_yaml(f"{temp_directory}/missing.yaml")
        with pytest.raises(OSError):
            validate_config(f"{temp_directory}/missing.yaml")


class TestBuilders:
    def test_run_config_builders(self, plane_config_yaml):
        config = load_config_text(plane_config_yaml)
        lattice = config.build_lattice()
        manifold = config.build_manifold()
        fields = config.build_fields(manifold)

        assert len(lattice) == 25
        assert lattice.dimension == 3
        assert isinstance(manifold, Hyperplane)
        assert fields.activation.epsilon == 0.25
        assert fields.reinforcement.regions == ()
        assert config.stop_criteria().max_iters == 500
        assert config.step_control().initial_step == 0.1

    def test_box_lattice_exclude(self):
        lattice = BoxLatticeConfig(kind="box", lower=[-1, -1], upper=[1, 1], exclude=[[0, 0]]).build()
        assert len(lattice) == 8
        assert LatticePoint.of(0, 0) not in lattice

    def test_points_lattice(self):
        config = PointsLatticeConfig(kind="points", points=[[2, 1], [0, 0], [2, 1]])
        assert config.dimension == 2
        assert len(config.build()) == 2

    def test_points_lattice_mixed_dimensions(self):
        with pytest.raises(ValueError):
            PointsLatticeConfig(kind="points", points=[[1, 2], [1, 2, 3]])

    def test_torus_and_polynomial(self):
        config = load_config_text("""
lattice: {kind: points, points: [[3, 0, 0]]}
manifold: {kind: torus, major_radius: 2.0, minor_radius: 0.5}
""")
        assert isinstance(config.build_manifold(), Torus)

        config = load_config_text("""
lattice: {kind: points, points: [[2, 0]]}
manifold:
  kind: implicit-polynomial
  terms:
    - {coefficient: 1.0, exponents: [2, 0]}
    - {coefficient: 1.0, exponents: [0, 2]}
    - {coefficient: -1.0, exponents: [0, 0]}
""")
        circle = config.build_manifold()
        assert isinstance(circle, PolynomialHypersurface)
        assert circle.ambient_dimension == 2

    def test_chart_grid(self):
        config = ChartGridConfig(kind="chart-grid", surface={"kind": "sphere", "radius": 1.5}, seeds=4)
        chart = config.build()
        assert isinstance(chart, ParametricChart)
        assert config.ambient_dimension == 3

    def test_regions(self):
        config = load_config_text("""
lattice: {kind: box, lower: [0, 0, 0], upper: [1, 1, 1]}
manifold: {kind: cylinder, radius: 1.0}
fields:
  reinforcement:
    regions:
      - {kind: ball, center: [0, 0, 0], radius: 0.5}
      - {kind: box, lower: [0, 0, 0], upper: [1, 1, 1]}
""")
        fields = config.build_fields(config.build_manifold())
        assert len(fields.reinforcement.regions) == 2


class TestObjectiveConfig:
    def test_zero_alignment_weights(self):
        with pytest.raises(ValueError):
            ObjectiveConfig(alpha=0.0, beta=0.0)

    def test_to_params(self):
        params = ObjectiveConfig(alpha=2.0, beta=1.0, lam=0.3, gamma=0.0, kappa_w=0.1).to_params()
        assert (params.alpha, params.beta, params.lam, params.gamma, params.kappa_w) == (2.0, 1.0, 0.3, 0.0, 0.1)


class TestDiagnostics:
    def test_valid_config_has_none(self, plane_config_yaml, write_config):
        assert validate_config(write_config(plane_config_yaml)) == []

    def test_negative_weight(self, plane_config_yaml, write_config):
        path = write_config(plane_config_yaml.replace("alpha: 1.0", "alpha: -1"))
        diagnostics = validate_config(path)

        assert len(diagnostics) == 1
        assert diagnostics[0].location == "objective.alpha"
        assert diagnostics[0].line == 14
        assert "greater than or equal to 0" in diagnostics[0].message

    def test_unknown_key(self, plane_config_yaml, write_config):
        path = write_config(plane_config_yaml.replace("alpha: 1.0", "alphaa: 1.0"))
        diagnostics = validate_config(path)

        assert [d.location for d in diagnostics] == ["objective.alphaa"]
        assert diagnostics[0].message == "unknown key 'alphaa'"
        assert str(diagnostics[0]) == "line 14: objective.alphaa: unknown key 'alphaa'"

    def test_dimension_mismatch(self, plane_config_yaml, write_config):
        text = plane_config_yaml.replace("[0, 0, 1]", "[0, 0]").replace("[4, 4, 1]", "[4, 4]")
        diagnostics = validate_config(write_config(text))

        assert len(diagnostics) == 1
        assert diagnostics[0].location == "manifold"
        assert diagnostics[0].line == 6
        assert "2" in diagnostics[0].message and "3" in diagnostics[0].message

    def test_discriminator_tag_not_in_location(self, plane_config_yaml):
        text = plane_config_yaml.replace("upper: [4, 4, 1]", "upper: [4, -1, 1]")
        with pytest.raises(ConfigValidationError) as exc:
            load_config_text(text)
        [diagnostic] = exc.value.diagnostics
        assert diagnostic.location == "lattice"
        assert "inverted bounds" in diagnostic.message

    def test_torus_radii(self):
        with pytest.raises(ConfigValidationError) as exc:
            load_config_text("""
lattice: {kind: points, points: [[3, 0, 0]]}
manifold: {kind: torus, major_radius: 1.0, minor_radius: 2.0}
""")
        assert "minor_radius must be smaller" in str(exc.value)

    def test_non_finite_radius(self):
        with pytest.raises(ConfigValidationError) as exc:
            load_config_text("""
lattice: {kind: points, points: [[1, 0]]}
manifold: {kind: sphere, center: [0, 0], radius: .inf}
""")
        assert exc.value.diagnostics[0].location == "manifold.radius"

    def test_cross_field_checks(self):
        with pytest.raises(ConfigValidationError) as exc:
            load_config_text("""
lattice: {kind: points, points: [[1, 0, 0]]}
manifold: {kind: plane, normal: [0, 0, 0]}
fields:
  reinforcement:
    regions:
      - {kind: ball, center: [0, 0], radius: 1.0}
""")
        locations = [d.location for d in exc.value.diagnostics]
        assert locations == ["fields.reinforcement.regions.0", "manifold.normal"]

    def test_malformed_yaml(self, write_config):
        diagnostics = validate_config(write_config("lattice: [1, 2\nmanifold: {}\n"))
        assert len(diagnostics) == 1
        assert "malformed YAML" in diagnostics[0].message
        assert diagnostics[0].line is not None

    def test_not_a_mapping(self):
        with pytest.raises(ConfigValidationError) as exc:
            load_config_text("- 1\n- 2\n")
        assert "mapping" in str(exc.value)

    def test_diagnostic_without_line(self):
        assert str(Diagnostic("objective", "bad")) == "objective: bad"
        assert str(Diagnostic("", "bad", 3)) == "line 3: <root>: bad"
