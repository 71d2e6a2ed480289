import logging
import math

from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

from lattice_embed.errors import DimensionMismatchError, InvertedBoundsError
from lattice_embed.manifold import Manifold

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.25


@dataclass(frozen=True)
class ActivationField:
    """Smoothed indicator of M: exp(-d(x, M)^2 / epsilon^2)"""
    manifold: Manifold
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"Activation width must be positive and finite, got {self.epsilon}")


@dataclass(frozen=True)
class Ball:
    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius < 0:
            raise ValueError(f"Ball radius must be non-negative, got {self.radius}")

    @property
    def dimension(self) -> int:
        return len(self.center)

    def contains(self, q: np.ndarray) -> bool:
        return float(np.linalg.norm(q - np.asarray(self.center))) <= self.radius


@dataclass(frozen=True)
class Box:
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(c) for c in self.lower))
        object.__setattr__(self, "upper", tuple(float(c) for c in self.upper))
        if len(self.lower) != len(self.upper):
            raise DimensionMismatchError(len(self.lower), len(self.upper), "box bounds")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise InvertedBoundsError(self.lower, self.upper)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def contains(self, q: np.ndarray) -> bool:
        return bool(np.all(q >= np.asarray(self.lower)) and np.all(q <= np.asarray(self.upper)))


Region = Union[Ball, Box]


@dataclass(frozen=True)
class ReinforcementField:
    """Binary field: 1 inside any marked region (closed), else 0"""
    regions: Tuple[Region, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))


@dataclass(frozen=True)
class FieldSet:
    activation: ActivationField
    reinforcement: ReinforcementField = field(default_factory=ReinforcementField)


def _footpoint_offset(act: ActivationField, x, footpoint=None) -> Tuple[np.ndarray, float]:
    x = act.manifold._vector(x)
    p = act.manifold.closest_point(x) if footpoint is None else np.asarray(footpoint, dtype=float)
    offset = x - p
    return offset, float(np.linalg.norm(offset))


def activation(act: ActivationField, x, footpoint=None) -> float:
    """exp(-d^2 / eps^2); pass a known footpoint to skip the projection"""
    _, d = _footpoint_offset(act, x, footpoint)
    return math.exp(-(d * d) / act.epsilon ** 2)


def activation_gradient(act: ActivationField, x, check_medial_axis: bool = True, footpoint=None) -> np.ndarray:
    """-(2 / eps^2) A(x) (x - p), zero on M"""
    if check_medial_axis and act.manifold.has_ambiguous_footpoint(x):
        logger.warning("%s is on the medial axis of M; gradient uses the solver's footpoint", tuple(np.asarray(x)))
    offset, d = _footpoint_offset(act, x, footpoint)
    if d == 0.0:
        return np.zeros_like(offset)
    value = math.exp(-(d * d) / act.epsilon ** 2)
    return -(2.0 / act.epsilon ** 2) * value * offset


def reinforcement(rf: ReinforcementField, q) -> int:
    q = np.asarray(q, dtype=float).reshape(-1)
    for region in rf.regions:
        if region.dimension != q.size:
            raise DimensionMismatchError(region.dimension, q.size, "reinforcement region and point")
        if region.contains(q):
            return 1
    return 0
