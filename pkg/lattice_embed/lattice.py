import itertools
import math
import operator

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from lattice_embed.errors import (
    DimensionMismatchError,
    InvertedBoundsError,
    NonFiniteCoordinateError,
)


def _integer(c) -> int:
    try:
        return operator.index(c)
    except TypeError:
        # integral floats are accepted
        if isinstance(c, (float, np.floating)) and math.isfinite(c) and c == int(c):
            return int(c)
        raise ValueError(f"Lattice coordinates must be integers, got {c!r}") from None


@dataclass(frozen=True, order=True)
class LatticePoint:
    """A point of Z^n; ordering is lexicographic on the coordinates"""
    coords: Tuple[int, ...]

    def __post_init__(self):
        coords = tuple(_integer(c) for c in self.coords)
        if len(coords) < 1:
            raise ValueError("Lattice points need at least one coordinate")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *coords: int) -> "LatticePoint":
        return cls(tuple(coords))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, index: int) -> int:
        return self.coords[index]

    def __str__(self) -> str:
        return str(self.coords)


@dataclass(frozen=True)
class ContinuousPoint:
    """A point of R^n with finite coordinates"""
    coords: Tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not all(math.isfinite(c) for c in coords):
            raise NonFiniteCoordinateError(f"Non-finite coordinate in {coords}")
        object.__setattr__(self, "coords", coords)

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[float]:
        return iter(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, index: int) -> float:
        return self.coords[index]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype or float)


def _check_same_dimension(a, b) -> None:
    if len(a) != len(b):
        raise DimensionMismatchError(len(a), len(b), "lattice points")


def meet(a: LatticePoint, b: LatticePoint) -> LatticePoint:
    """Component-wise minimum"""
    _check_same_dimension(a, b)
    return LatticePoint(tuple(min(x, y) for x, y in zip(a, b)))


def join(a: LatticePoint, b: LatticePoint) -> LatticePoint:
    """Component-wise maximum"""
    _check_same_dimension(a, b)
    return LatticePoint(tuple(max(x, y) for x, y in zip(a, b)))


def precedes(a: LatticePoint, b: LatticePoint) -> bool:
    """Component-wise partial order a <= b, the order induced by meet and join"""
    _check_same_dimension(a, b)
    return all(x <= y for x, y in zip(a, b))


def grid_distance(a: LatticePoint, b: LatticePoint) -> float:
    _check_same_dimension(a, b)
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def is_adjacent(a: LatticePoint, b: LatticePoint) -> bool:
    """True iff exactly one component differs, and by exactly 1"""
    _check_same_dimension(a, b)
    diffs = [abs(x - y) for x, y in zip(a, b) if x != y]
    return diffs == [1]


def embed(a: LatticePoint) -> ContinuousPoint:
    """The identity embedding of Z^n into R^n"""
    return ContinuousPoint(tuple(float(c) for c in a))


def continuous_meet(x: ContinuousPoint, y: ContinuousPoint) -> ContinuousPoint:
    _check_same_dimension(x, y)
    return ContinuousPoint(tuple(min(u, v) for u, v in zip(x, y)))


def continuous_join(x: ContinuousPoint, y: ContinuousPoint) -> ContinuousPoint:
    _check_same_dimension(x, y)
    return ContinuousPoint(tuple(max(u, v) for u, v in zip(x, y)))


class Lattice:
    """A finite, duplicate-free set of lattice points in lexicographic order"""

    def __init__(self, points: Iterable[LatticePoint], dimension: Optional[int] = None):
        unique = sorted(set(points))
        dims = {p.dimension for p in unique}
        if len(dims) > 1:
            d = sorted(dims)
            raise DimensionMismatchError(d[0], d[-1], "points of one lattice")
        if dims:
            found = dims.pop()
            if dimension is not None and dimension != found:
                raise DimensionMismatchError(dimension, found, "declared and actual lattice")
            dimension = found
        if dimension is None or dimension < 1:
            raise ValueError("An empty lattice needs an explicit positive dimension")

        self._points: Tuple[LatticePoint, ...] = tuple(unique)
        self._index: Dict[LatticePoint, int] = {p: i for i, p in enumerate(self._points)}
        self.dimension = dimension

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]], dimension: Optional[int] = None) -> "Lattice":
        return cls(
            (p if isinstance(p, LatticePoint) else LatticePoint(tuple(p)) for p in points),
            dimension=dimension,
        )

    @property
    def points(self) -> Tuple[LatticePoint, ...]:
        return self._points

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[LatticePoint]:
        return iter(self._points)

    def __contains__(self, point: object) -> bool:
        return point in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lattice):
            return NotImplemented
        return self.dimension == other.dimension and self._points == other._points

    def __repr__(self) -> str:
        return f"Lattice(dimension={self.dimension}, size={len(self)})"

    def index_of(self, point: LatticePoint) -> int:
        return self._index[point]

    def without(self, points: Iterable[Sequence[int]]) -> "Lattice":
        drop = {p if isinstance(p, LatticePoint) else LatticePoint(tuple(p)) for p in points}
        return Lattice((p for p in self._points if p not in drop), dimension=self.dimension)

    def adjacent_pairs(self) -> List[Tuple[int, int]]:
        """Index pairs (i, j), i < j, of adjacent points"""
        pairs = []
        for i, point in enumerate(self._points):
            for axis in range(self.dimension):
                coords = list(point.coords)
                coords[axis] += 1
                j = self._index.get(LatticePoint(tuple(coords)))
                if j is not None:
                    pairs.append((i, j))
        return sorted(pairs)

    def embedded(self) -> np.ndarray:
        """Positions of the identity embedding as an (m, n) array"""
        if not self._points:
            return np.zeros((0, self.dimension))
        return np.array([p.coords for p in self._points], dtype=float)


def generate_box_lattice(lower: LatticePoint, upper: LatticePoint) -> Lattice:
    """All integer tuples in the closed box [lower, upper]"""
    _check_same_dimension(lower, upper)
    if any(lo > hi for lo, hi in zip(lower, upper)):
        raise InvertedBoundsError(lower, upper)
    ranges = [range(lo, hi + 1) for lo, hi in zip(lower, upper)]
    # product over ascending ranges already yields lexicographic order
    return Lattice((LatticePoint(c) for c in itertools.product(*ranges)), dimension=len(lower))


def is_sublattice(lattice: Lattice) -> bool:
    """Whether the finite point set is closed under meet and join"""
    points = lattice.points
    for a, b in itertools.combinations(points, 2):
        if meet(a, b) not in lattice or join(a, b) not in lattice:
            return False
    return True


def grid_is_uniform(lattice: Lattice) -> bool:
    points = lattice.points
    return all(grid_distance(points[i], points[j]) == 1.0 for i, j in lattice.adjacent_pairs())


def is_discrete_image(lattice: Lattice) -> bool:
    """Distinct embedded points lie at least one grid unit apart"""
    positions = lattice.embedded()
    for i in range(len(positions)):
        gaps = np.linalg.norm(positions[i + 1:] - positions[i], axis=1)
        if gaps.size and gaps.min() < 1.0:
            return False
    return True
