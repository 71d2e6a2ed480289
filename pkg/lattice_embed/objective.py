import logging
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields as dataclass_fields
from typing import Callable, List, Sequence, TypeVar

import numpy as np

from lattice_embed.errors import MissingEmbeddingError
from lattice_embed.fields import (
    FieldSet,
    activation,
    activation_gradient,
    reinforcement,
)
from lattice_embed.finite_difference import central_gradient
from lattice_embed.lattice import Lattice
from lattice_embed.manifold import Manifold

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class ObjectiveParams:
    """Weights of the embedding functional; ``lam`` is the reinforcement weight"""
    alpha: float = 1.0
    beta: float = 1.0
    lam: float = 0.0
    gamma: float = 1.0
    kappa_w: float = 0.0

    def __post_init__(self):
        for f in dataclass_fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"Objective weight {f.name} must be finite and non-negative, got {value}")
        if self.alpha + self.beta <= 0:
            raise ValueError("At least one of alpha and beta must be positive")


@dataclass(frozen=True)
class ObjectiveBreakdown:
    alignment: float = 0.0
    reinforcement: float = 0.0
    activation_penalty: float = 0.0
    curvature_penalty: float = 0.0
    total: float = 0.0

    @classmethod
    def from_parts(cls, alignment: float, reinforcement: float,
                   activation_penalty: float, curvature_penalty: float) -> "ObjectiveBreakdown":
        return cls(
            alignment=alignment,
            reinforcement=reinforcement,
            activation_penalty=activation_penalty,
            curvature_penalty=curvature_penalty,
            total=alignment + reinforcement + activation_penalty + curvature_penalty,
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclass_fields(self)}


BREAKDOWN_COLUMNS = tuple(f.name for f in dataclass_fields(ObjectiveBreakdown))


def pairwise_sum(values: Sequence[float]) -> float:
    """Sum over a fixed halving tree, independent of how values were produced"""
    n = len(values)
    if n == 0:
        return 0.0
    if n == 1:
        return float(values[0])
    if n == 2:
        return float(values[0]) + float(values[1])
    mid = n // 2
    return pairwise_sum(values[:mid]) + pairwise_sum(values[mid:])


def sum_breakdowns(parts: Sequence[ObjectiveBreakdown]) -> ObjectiveBreakdown:
    return ObjectiveBreakdown(**{
        name: pairwise_sum([getattr(b, name) for b in parts]) for name in BREAKDOWN_COLUMNS
    })


def map_points(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """Evaluate fn on every item, in order, optionally on a thread pool"""
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def gradient_is_exact(params: ObjectiveParams) -> bool:
    """Footpoint-fixed differentiation is exact only when alpha == beta"""
    return params.alpha == params.beta


def alignment_metric(m: Manifold, p, q, params: ObjectiveParams) -> float:
    """alpha |(q - p)_T|^2 + beta |(q - p)_N|^2, split at p"""
    p = m._vector(p)
    split = m.split_tangent_normal(p, m._vector(q) - p)
    return float(
        params.alpha * (split.tangential @ split.tangential)
        + params.beta * (split.normal @ split.normal)
    )


def _curvature_squared(m: Manifold, x: np.ndarray) -> float:
    return m.gaussian_curvature(m.closest_point(x)) ** 2


def point_objective(m: Manifold, fields: FieldSet, q_lattice, zeta_q,
                    params: ObjectiveParams) -> ObjectiveBreakdown:
    """Contribution of one lattice point at embedded position zeta_q"""
    x = m._vector(zeta_q)
    p = m.closest_point(x)
    alignment = alignment_metric(m, p, x, params)
    reinforcement_term = params.lam * reinforcement(fields.reinforcement, x)
    shared = p if fields.activation.manifold is m else None
    penalty = params.gamma * (1.0 - activation(fields.activation, x, footpoint=shared)) ** 2

    curvature_term = 0.0
    if params.kappa_w > 0:
        if m.supports_curvature:
            curvature_term = params.kappa_w * m.gaussian_curvature(p) ** 2
        else:
            logger.debug("curvature penalty skipped: no curvature for this manifold")

    return ObjectiveBreakdown.from_parts(alignment, reinforcement_term, penalty, curvature_term)


def positions_for(lattice: Lattice, zeta) -> List[np.ndarray]:
    """Embedded position of every lattice point, in lattice order"""
    positions = []
    for point in lattice:
        try:
            positions.append(np.asarray(zeta[point], dtype=float))
        except KeyError:
            raise MissingEmbeddingError(point) from None
    return positions


def point_breakdowns(lattice: Lattice, zeta, m: Manifold, fields: FieldSet,
                     params: ObjectiveParams, workers: int = 1) -> List[ObjectiveBreakdown]:
    pairs = list(zip(lattice.points, positions_for(lattice, zeta)))
    return map_points(lambda pair: point_objective(m, fields, pair[0], pair[1], params), pairs, workers)


def total_objective(lattice: Lattice, zeta, m: Manifold, fields: FieldSet,
                    params: ObjectiveParams, workers: int = 1) -> ObjectiveBreakdown:
    return sum_breakdowns(point_breakdowns(lattice, zeta, m, fields, params, workers))


def point_gradient(m: Manifold, fields: FieldSet, zeta_q, params: ObjectiveParams) -> np.ndarray:
    """Gradient of one point's contribution, holding the footpoint fixed in the alignment term"""
    x = m._vector(zeta_q)
    p = m.closest_point(x)
    split = m.split_tangent_normal(p, x - p)
    grad = 2.0 * (params.alpha * split.tangential + params.beta * split.normal)

    if params.gamma > 0:
        shared = p if fields.activation.manifold is m else None
        value = activation(fields.activation, x, footpoint=shared)
        grad = grad - 2.0 * params.gamma * (1.0 - value) * activation_gradient(
            fields.activation, x, check_medial_axis=False, footpoint=shared
        )

    if params.kappa_w > 0 and m.supports_curvature:
        grad = grad + params.kappa_w * central_gradient(lambda y: _curvature_squared(m, y), x)
    # the reinforcement term is piecewise constant and contributes nothing
    return grad


def objective_gradient(lattice: Lattice, zeta, m: Manifold, fields: FieldSet,
                       params: ObjectiveParams, workers: int = 1) -> np.ndarray:
    """Per-point gradients as an (len(lattice), n) array in lattice order"""
    positions = positions_for(lattice, zeta)
    if not positions:
        return np.zeros((0, lattice.dimension))
    rows = map_points(lambda x: point_gradient(m, fields, x, params), positions, workers)
    return np.vstack(rows)

