import math
import yaml

from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    model_validator,
)

from lattice_embed.charts import ParametricChart, monge_chart, sphere_chart, torus_chart
from lattice_embed.errors import ConfigValidationError
from lattice_embed.fields import ActivationField, Ball, Box, FieldSet, ReinforcementField
from lattice_embed.lattice import Lattice, LatticePoint, generate_box_lattice
from lattice_embed.manifold import (
    Cylinder,
    Hyperplane,
    Manifold,
    PolynomialHypersurface,
    Sphere,
    Torus,
)
from lattice_embed.objective import ObjectiveParams
from lattice_embed.optimizer import StepControl, StopCriteria


class StrictModel(BaseModel):
    """Rejects unknown keys and non-finite floats"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True, allow_inf_nan=False)


# Lattice block

class BoxLatticeConfig(StrictModel):
    kind: Literal["box"]
    lower: List[int] = Field(min_length=1)
    upper: List[int] = Field(min_length=1)
    exclude: List[List[int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_bounds(self):
        if len(self.lower) != len(self.upper):
            raise ValueError(f"lower has dimension {len(self.lower)} but upper has dimension {len(self.upper)}")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f"inverted bounds: lower={self.lower} upper={self.upper}")
        return self

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def build(self) -> Lattice:
        box = generate_box_lattice(LatticePoint(tuple(self.lower)), LatticePoint(tuple(self.upper)))
        return box.without(self.exclude) if self.exclude else box


class PointsLatticeConfig(StrictModel):
    kind: Literal["points"]
    points: List[List[int]] = Field(min_length=1)

    @model_validator(mode="after")
    def check_dimensions(self):
        dims = {len(p) for p in self.points}
        if len(dims) != 1 or 0 in dims:
            raise ValueError(f"all points need the same positive dimension, got dimensions {sorted(dims)}")
        return self

    @property
    def dimension(self) -> int:
        return len(self.points[0])

    def build(self) -> Lattice:
        return Lattice.from_points(self.points)


LatticeConfig = Annotated[Union[BoxLatticeConfig, PointsLatticeConfig], Field(discriminator="kind")]


# Manifold block

class _ManifoldBase(StrictModel):
    # unbounded unless a tubular neighborhood radius is given
    neighborhood: PositiveFloat = math.inf


class PlaneConfig(_ManifoldBase):
    kind: Literal["plane"]
    normal: List[float] = Field(min_length=2)
    offset: float = 0.0

    @property
    def ambient_dimension(self) -> int:
        return len(self.normal)

    def build(self) -> Manifold:
        return Hyperplane(self.normal, self.offset, neighborhood_radius=self.neighborhood)


class SphereConfig(_ManifoldBase):
    kind: Literal["sphere"]
    center: List[float] = Field(min_length=2)
    radius: PositiveFloat

    @property
    def ambient_dimension(self) -> int:
        return len(self.center)

    def build(self) -> Manifold:
        return Sphere(self.center, self.radius, neighborhood_radius=self.neighborhood)


class CylinderConfig(_ManifoldBase):
    kind: Literal["cylinder"]
    center: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], min_length=3, max_length=3)
    axis: List[float] = Field(default_factory=lambda: [0.0, 0.0, 1.0], min_length=3, max_length=3)
    radius: PositiveFloat

    @property
    def ambient_dimension(self) -> int:
        return 3

    def build(self) -> Manifold:
        return Cylinder(self.center, self.axis, self.radius, neighborhood_radius=self.neighborhood)


class TorusConfig(_ManifoldBase):
    kind: Literal["torus"]
    center: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], min_length=3, max_length=3)
    major_radius: PositiveFloat
    minor_radius: PositiveFloat

    @model_validator(mode="after")
    def check_radii(self):
        if self.minor_radius >= self.major_radius:
            raise ValueError("minor_radius must be smaller than major_radius")
        return self

    @property
    def ambient_dimension(self) -> int:
        return 3

    def build(self) -> Manifold:
        return Torus(self.center, self.major_radius, self.minor_radius, neighborhood_radius=self.neighborhood)


class PolynomialTermConfig(StrictModel):
    coefficient: float
    exponents: List[NonNegativeInt] = Field(min_length=1)


class ImplicitPolynomialConfig(_ManifoldBase):
    kind: Literal["implicit-polynomial"]
    terms: List[PolynomialTermConfig] = Field(min_length=1)

    @model_validator(mode="after")
    def check_exponents(self):
        dims = {len(t.exponents) for t in self.terms}
        if len(dims) != 1:
            raise ValueError(f"all exponent tuples need the same length, got {sorted(dims)}")
        if dims.pop() < 2:
            raise ValueError("an implicit hypersurface needs at least two variables")
        return self

    @property
    def ambient_dimension(self) -> int:
        return len(self.terms[0].exponents)

    def build(self) -> Manifold:
        return PolynomialHypersurface(
            [(t.coefficient, t.exponents) for t in self.terms], neighborhood_radius=self.neighborhood
        )


class TorusSurfaceConfig(StrictModel):
    kind: Literal["torus"]
    center: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], min_length=3, max_length=3)
    major_radius: PositiveFloat
    minor_radius: PositiveFloat

    @model_validator(mode="after")
    def check_radii(self):
        if self.minor_radius >= self.major_radius:
            raise ValueError("minor_radius must be smaller than major_radius")
        return self


class SphereSurfaceConfig(StrictModel):
    kind: Literal["sphere"]
    center: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], min_length=3, max_length=3)
    radius: PositiveFloat


class MongeSurfaceConfig(StrictModel):
    kind: Literal["monge"]
    terms: List[PolynomialTermConfig] = Field(min_length=1)
    lower: List[float] = Field(min_length=2, max_length=2)
    upper: List[float] = Field(min_length=2, max_length=2)

    @model_validator(mode="after")
    def check_terms(self):
        if any(len(t.exponents) != 2 for t in self.terms):
            raise ValueError("height terms need exponent pairs")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f"inverted parameter box: lower={self.lower} upper={self.upper}")
        return self


SurfaceConfig = Annotated[
    Union[TorusSurfaceConfig, SphereSurfaceConfig, MongeSurfaceConfig], Field(discriminator="kind")
]


class ChartGridConfig(_ManifoldBase):
    kind: Literal["chart-grid"]
    surface: SurfaceConfig
    seeds: PositiveInt = 8
    grid_per_axis: PositiveInt = 16

    @property
    def ambient_dimension(self) -> int:
        return 3

    def build(self) -> ParametricChart:
        options = dict(n_seeds=self.seeds, grid_per_axis=self.grid_per_axis, neighborhood_radius=self.neighborhood)
        surface = self.surface
        if isinstance(surface, TorusSurfaceConfig):
            return torus_chart(surface.center, surface.major_radius, surface.minor_radius, **options)
        if isinstance(surface, SphereSurfaceConfig):
            return sphere_chart(surface.center, surface.radius, **options)
        return monge_chart([(t.coefficient, t.exponents) for t in surface.terms],
                           surface.lower, surface.upper, **options)


ManifoldConfig = Annotated[
    Union[PlaneConfig, SphereConfig, CylinderConfig, TorusConfig, ImplicitPolynomialConfig, ChartGridConfig],
    Field(discriminator="kind"),
]


# Fields block

class BallRegionConfig(StrictModel):
    kind: Literal["ball"]
    center: List[float] = Field(min_length=1)
    radius: NonNegativeFloat

    @property
    def dimension(self) -> int:
        return len(self.center)

    def build(self) -> Ball:
        return Ball(tuple(self.center), self.radius)


class BoxRegionConfig(StrictModel):
    kind: Literal["box"]
    lower: List[float] = Field(min_length=1)
    upper: List[float] = Field(min_length=1)

    @model_validator(mode="after")
    def check_bounds(self):
        if len(self.lower) != len(self.upper):
            raise ValueError(f"lower has dimension {len(self.lower)} but upper has dimension {len(self.upper)}")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f"inverted bounds: lower={self.lower} upper={self.upper}")
        return self

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def build(self) -> Box:
        return Box(tuple(self.lower), tuple(self.upper))


RegionConfig = Annotated[Union[BallRegionConfig, BoxRegionConfig], Field(discriminator="kind")]


class ActivationConfig(StrictModel):
    epsilon: PositiveFloat = 0.25


class ReinforcementConfig(StrictModel):
    regions: List[RegionConfig] = Field(default_factory=list)


class FieldsConfig(StrictModel):
    activation: ActivationConfig = Field(default_factory=ActivationConfig)
    reinforcement: ReinforcementConfig = Field(default_factory=ReinforcementConfig)


# Objective, optimizer, output blocks

class ObjectiveConfig(StrictModel):
    alpha: NonNegativeFloat = 1.0
    beta: NonNegativeFloat = 1.0
    lam: NonNegativeFloat = Field(0.0, alias="lambda")
    gamma: NonNegativeFloat = 1.0
    kappa_w: NonNegativeFloat = 0.0

    @model_validator(mode="after")
    def check_alignment_weights(self):
        if self.alpha + self.beta <= 0:
            raise ValueError("alpha + beta must be positive")
        return self

    def to_params(self) -> ObjectiveParams:
        return ObjectiveParams(alpha=self.alpha, beta=self.beta, lam=self.lam,
                               gamma=self.gamma, kappa_w=self.kappa_w)


class OptimizerConfig(StrictModel):
    grad_tol: PositiveFloat = 1e-6
    max_iters: NonNegativeInt = 10_000
    initial_step: PositiveFloat = 0.1
    seed: int = 0
    init_jitter: NonNegativeFloat = 0.0


class OutputConfig(StrictModel):
    directory: str = "results"
    prefix: str = "embedding"
    formats: List[Literal["yaml", "markdown"]] = Field(default_factory=lambda: ["yaml"], min_length=1)


class RunConfig(StrictModel):
    """A complete embedding run"""
    lattice: LatticeConfig
    manifold: ManifoldConfig
    fields: FieldsConfig = Field(default_factory=FieldsConfig)
    objective: ObjectiveConfig = Field(default_factory=ObjectiveConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    def build_lattice(self) -> Lattice:
        return self.lattice.build()

    def build_manifold(self) -> Manifold:
        return self.manifold.build()

    def build_fields(self, manifold: Manifold) -> FieldSet:
        regions = tuple(r.build() for r in self.fields.reinforcement.regions)
        return FieldSet(
            activation=ActivationField(manifold, self.fields.activation.epsilon),
            reinforcement=ReinforcementField(regions),
        )

    def stop_criteria(self) -> StopCriteria:
        return StopCriteria(grad_tol=self.optimizer.grad_tol, max_iters=self.optimizer.max_iters)

    def step_control(self) -> StepControl:
        return StepControl(initial_step=self.optimizer.initial_step)


# Diagnostics

@dataclass(frozen=True)
class Diagnostic:
    """One validation problem, located in the config file"""
    location: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.location or '<root>'}: {self.message}"


def _scalar_key(node) -> Any:
    return node.value if isinstance(node, yaml.ScalarNode) else None


def _locate(root, loc: Sequence[Any]) -> Tuple[str, Optional[int]]:
    """Dotted location and 1-based YAML line for a pydantic error path"""
    node = root
    line = node.start_mark.line + 1 if node is not None else None
    kept: List[str] = []
    for part in loc:
        if isinstance(node, yaml.MappingNode):
            entries = {_scalar_key(k): (k, v) for k, v in node.value}
            if part in entries:
                key, node = entries[part]
                line = key.start_mark.line + 1
                kept.append(str(part))
                continue
            kind = entries.get("kind")
            if kind is not None and _scalar_key(kind[1]) == part:
                # discriminator tag inserted by pydantic
                continue
            kept.append(str(part))
            node = None
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
            line = node.start_mark.line + 1
            kept.append(str(part))
        else:
            kept.append(str(part))
            node = None
    return ".".join(kept), line


def _schema_diagnostics(error: ValidationError, root) -> List[Diagnostic]:
    diagnostics = []
    for item in error.errors():
        location, line = _locate(root, item["loc"])
        if item["type"] == "extra_forbidden":
            key = item["loc"][-1]
            message = f"unknown key '{key}'"
        else:
            message = item["msg"]
            if message.startswith("Value error, "):
                message = message[len("Value error, "):]
        diagnostics.append(Diagnostic(location, message, line))
    return diagnostics


def _key_line(root, *path: str) -> Optional[int]:
    return _locate(root, path)[1]


def cross_field_diagnostics(config: RunConfig, root=None) -> List[Diagnostic]:
    diagnostics = []
    lattice_dim = config.lattice.dimension
    manifold_dim = config.manifold.ambient_dimension
    if lattice_dim != manifold_dim:
        diagnostics.append(Diagnostic(
            "manifold",
            f"lattice dimension {lattice_dim} does not match manifold ambient dimension {manifold_dim}",
            _key_line(root, "manifold"),
        ))
    for i, region in enumerate(config.fields.reinforcement.regions):
        if region.dimension != manifold_dim:
            diagnostics.append(Diagnostic(
                f"fields.reinforcement.regions.{i}",
                f"region dimension {region.dimension} does not match manifold ambient dimension {manifold_dim}",
                _locate(root, ("fields", "reinforcement", "regions", i))[1],
            ))
    if isinstance(config.manifold, PlaneConfig) and not any(config.manifold.normal):
        diagnostics.append(Diagnostic("manifold.normal", "plane normal must be non-zero",
                                      _key_line(root, "manifold", "normal")))
    if isinstance(config.manifold, CylinderConfig) and not any(config.manifold.axis):
        diagnostics.append(Diagnostic("manifold.axis", "cylinder axis must be non-zero",
                                      _key_line(root, "manifold", "axis")))
    return diagnostics


def _parse(text: str) -> Tuple[Optional[RunConfig], List[Diagnostic]]:
    try:
        root = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        return None, [Diagnostic("", f"malformed YAML: {getattr(e, 'problem', None) or e}", line)]
    if not isinstance(raw, dict):
        return None, [Diagnostic("", "config must be a mapping of blocks", 1)]
    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        return None, _schema_diagnostics(e, root)
    return config, cross_field_diagnostics(config, root)


def validate_config(config_path: Path) -> List[Diagnostic]:
    """Schema and cross-field diagnostics; empty means valid. Raises OSError if unreadable."""
    text = Path(config_path).read_text(encoding="utf-8")
    return _parse(text)[1]


def load_config_from_yaml(config_path: Path) -> RunConfig:
    text = Path(config_path).read_text(encoding="utf-8")
    config, diagnostics = _parse(text)
    if diagnostics or config is None:
        raise ConfigValidationError(diagnostics)
    return config


def config_from_dict(raw: dict) -> RunConfig:
    """Validate an in-memory config (used for the built-in demos)"""
    return load_config_text(yaml.safe_dump(raw, sort_keys=False))


def load_config_text(text: str) -> RunConfig:
    config, diagnostics = _parse(text)
    if diagnostics or config is None:
        raise ConfigValidationError(diagnostics)
    return config
