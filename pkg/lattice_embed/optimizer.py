import logging
import math

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from lattice_embed.errors import (
    ClosestPointError,
    DimensionMismatchError,
    ImmersionError,
    MissingEmbeddingError,
    NonFiniteCoordinateError,
    SingularityError,
)
from lattice_embed.fields import FieldSet
from lattice_embed.lattice import Lattice, LatticePoint
from lattice_embed.manifold import Manifold
from lattice_embed.objective import (
    BREAKDOWN_COLUMNS,
    ObjectiveBreakdown,
    ObjectiveParams,
    gradient_is_exact,
    map_points,
    objective_gradient,
    pairwise_sum,
    point_gradient,
    point_objective,
    sum_breakdowns,
)

logger = logging.getLogger(__name__)

MEDIAL_NUDGE = 1e-6

# raised by closest-point and chart solvers for a single query
GEOMETRY_ERRORS = (ClosestPointError, SingularityError, ImmersionError)


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max-iters"
    LINE_SEARCH_FAILURE = "line-search-failure"
    GEOMETRY_FAILURE = "geometry-failure"


@dataclass(frozen=True)
class StepControl:
    """Armijo backtracking parameters"""
    initial_step: float = 0.1
    shrink: float = 0.5
    armijo_c: float = 1e-4
    max_halvings: int = 40


@dataclass(frozen=True)
class StopCriteria:
    grad_tol: float = 1e-6
    max_iters: int = 10_000


class EmbeddingState:
    """The map zeta from lattice points to positions in R^n, read-only"""

    def __init__(self, lattice: Lattice, positions: np.ndarray, iteration: int = 0):
        positions = np.array(positions, dtype=float, copy=True).reshape(len(lattice), lattice.dimension)
        if not np.all(np.isfinite(positions)):
            raise NonFiniteCoordinateError("Embedding state has non-finite positions")
        positions.setflags(write=False)
        self.lattice = lattice
        self.positions = positions
        self.iteration = iteration

    def __getitem__(self, point: LatticePoint) -> np.ndarray:
        if point not in self.lattice:
            raise MissingEmbeddingError(point)
        return self.positions[self.lattice.index_of(point)]

    def __contains__(self, point: object) -> bool:
        return point in self.lattice

    def __len__(self) -> int:
        return len(self.lattice)

    def __iter__(self) -> Iterator[LatticePoint]:
        return iter(self.lattice)

    def items(self) -> Iterator[Tuple[LatticePoint, np.ndarray]]:
        return zip(self.lattice.points, self.positions)

    def with_positions(self, positions: np.ndarray, iteration: Optional[int] = None) -> "EmbeddingState":
        return EmbeddingState(self.lattice, positions, self.iteration if iteration is None else iteration)


@dataclass
class StepResult:
    state: EmbeddingState
    accepted: np.ndarray
    point_values: List[float]
    objective_before: float
    objective_after: float
    failed: bool


@dataclass
class OptimizationReport:
    """Outcome of an optimize() run"""
    termination: Termination
    iterations: int
    gradient_sup_norm: float
    objective_trace: List[float] = field(default_factory=list)
    breakdowns: List[ObjectiveBreakdown] = field(default_factory=list)
    total: ObjectiveBreakdown = field(default_factory=ObjectiveBreakdown)
    flagged_points: List[LatticePoint] = field(default_factory=list)
    failed_points: List[LatticePoint] = field(default_factory=list)
    min_pairwise_distance: float = math.inf
    gradient_exact: bool = True
    initial_positions: Optional[np.ndarray] = None

    @property
    def converged(self) -> bool:
        return self.termination == Termination.CONVERGED


def initialize(lattice: Lattice) -> EmbeddingState:
    """zeta = identity embedding of the lattice"""
    return EmbeddingState(lattice, lattice.embedded(), iteration=0)


def resolve_medial_axis(state: EmbeddingState, m: Manifold) -> Tuple[EmbeddingState, List[LatticePoint]]:
    """Nudge points with ambiguous footpoints along the first coordinate axis"""
    if state.lattice.dimension != m.ambient_dimension:
        raise DimensionMismatchError(state.lattice.dimension, m.ambient_dimension, "lattice and manifold")
    positions = np.array(state.positions)
    flagged = []
    for i, (point, x) in enumerate(state.items()):
        if m.has_ambiguous_footpoint(x):
            positions[i, 0] += MEDIAL_NUDGE
            flagged.append(point)
            logger.warning("Lattice point %s starts on the medial axis; nudged by %g along axis 0", point, MEDIAL_NUDGE)
    if not flagged:
        return state, flagged
    return state.with_positions(positions), flagged


def _point_value(m, fields, point, x, params) -> float:
    return point_objective(m, fields, point, x, params).total


def _search_point(m: Manifold, fields: FieldSet, params: ObjectiveParams, control: StepControl,
                  point: LatticePoint, x: np.ndarray, value: float,
                  grad: np.ndarray) -> Tuple[np.ndarray, float, bool]:
    slope = float(grad @ grad)
    if slope == 0.0:
        return x, value, False
    t = control.initial_step
    for _ in range(control.max_halvings + 1):
        trial = x - t * grad
        try:
            trial_value = _point_value(m, fields, point, trial, params)
        except GEOMETRY_ERRORS:
            trial_value = math.inf
        if trial_value < value and trial_value <= value - control.armijo_c * t * slope:
            return trial, trial_value, True
        t *= control.shrink
    return x, value, False


def line_search_step(state: EmbeddingState, m: Manifold, fields: FieldSet, params: ObjectiveParams,
                     control: StepControl = StepControl(), workers: int = 1,
                     gradient: Optional[np.ndarray] = None,
                     point_values: Optional[Sequence[float]] = None) -> StepResult:
    """
    One gradient-descent update with an Armijo backtracking search per point.

    The functional decouples across lattice points, so every point runs its
    own search. The step fails only if no point with a non-zero gradient
    can decrease its contribution; the state is then returned unchanged.
    """
    lattice = state.lattice
    if gradient is None:
        gradient = objective_gradient(lattice, state, m, fields, params, workers)
    if point_values is None:
        point_values = [_point_value(m, fields, p, x, params) for p, x in state.items()]
    before = pairwise_sum(point_values)

    jobs = list(zip(lattice.points, state.positions, point_values, gradient))
    results = map_points(
        lambda job: _search_point(m, fields, params, control, *job), jobs, workers
    )

    accepted = np.array([ok for _, _, ok in results], dtype=bool)
    moving = bool(np.any(np.abs(gradient) > 0)) if len(gradient) else False
    if moving and not accepted.any():
        return StepResult(state, accepted, list(point_values), before, before, failed=True)

    values = [v for _, v, _ in results]
    positions = np.array([x for x, _, _ in results]) if results else state.positions
    new_state = state.with_positions(positions, iteration=state.iteration + 1)
    return StepResult(new_state, accepted, values, before, pairwise_sum(values), failed=False)


def step(state: EmbeddingState, m: Manifold, fields: FieldSet, params: ObjectiveParams,
         control: StepControl = StepControl(), workers: int = 1) -> EmbeddingState:
    return line_search_step(state, m, fields, params, control, workers).state


def min_pairwise_distance(positions: np.ndarray) -> float:
    best = math.inf
    for i in range(len(positions) - 1):
        gaps = np.linalg.norm(positions[i + 1:] - positions[i], axis=1)
        best = min(best, float(gaps.min()))
    return best


def _sup_norm(gradient: np.ndarray) -> float:
    return float(np.max(np.abs(gradient), initial=0.0))


def _guarded_evaluation(state: EmbeddingState, m: Manifold, fields: FieldSet, params: ObjectiveParams,
                        workers: int = 1) -> Tuple[List[float], np.ndarray, List[LatticePoint]]:
    """Per-point values and gradients; points whose geometry fails are returned separately"""
    def evaluate(item):
        point, x = item
        try:
            return _point_value(m, fields, point, x, params), point_gradient(m, fields, x, params)
        except GEOMETRY_ERRORS as e:
            logger.warning("Objective is undefined at lattice point %s: %s", point, e)
            return None

    results = map_points(evaluate, list(state.items()), workers)
    failed = [point for point, r in zip(state.lattice.points, results) if r is None]
    values = [math.nan if r is None else r[0] for r in results]
    rows = [np.zeros(state.lattice.dimension) if r is None else r[1] for r in results]
    gradient = np.vstack(rows) if rows else np.zeros((0, state.lattice.dimension))
    return values, gradient, failed


def _guarded_breakdowns(state: EmbeddingState, m: Manifold, fields: FieldSet, params: ObjectiveParams,
                        workers: int = 1) -> Tuple[List[ObjectiveBreakdown], List[LatticePoint]]:
    undefined = ObjectiveBreakdown(*([math.nan] * len(BREAKDOWN_COLUMNS)))

    def evaluate(item):
        point, x = item
        try:
            return point_objective(m, fields, point, x, params)
        except GEOMETRY_ERRORS:
            return None

    results = map_points(evaluate, list(state.items()), workers)
    failed = [point for point, b in zip(state.lattice.points, results) if b is None]
    return [undefined if b is None else b for b in results], failed


def optimize(lattice: Lattice, m: Manifold, fields: FieldSet, params: ObjectiveParams,
             stop: StopCriteria = StopCriteria(), control: StepControl = StepControl(),
             workers: int = 1, init_jitter: float = 0.0,
             seed: int = 0) -> Tuple[EmbeddingState, OptimizationReport]:
    """
    Minimize the total functional by per-point gradient descent.

    Nothing here raises on geometry: a lattice point whose footpoint or
    curvature cannot be computed ends the run with a geometry-failure
    termination and is listed in the report's failed points.
    """
    state = initialize(lattice)
    if init_jitter > 0:
        rng = np.random.default_rng(seed)
        state = state.with_positions(state.positions + rng.uniform(-init_jitter, init_jitter, state.positions.shape))
    state, flagged = resolve_medial_axis(state, m)
    initial_positions = np.array(state.positions)

    values, gradient, failed = _guarded_evaluation(state, m, fields, params, workers)
    trace = [pairwise_sum(values)]
    sup = _sup_norm(gradient)
    exact = gradient_is_exact(params)
    if not exact:
        logger.info("alpha != beta: footpoint-fixed gradient is approximate")

    iterations = 0
    while True:
        if failed:
            termination = Termination.GEOMETRY_FAILURE
            logger.warning("Stopped at iteration %d: geometry failed at %d lattice point(s)", iterations, len(failed))
            break
        if sup <= stop.grad_tol:
            termination = Termination.CONVERGED
            break
        if iterations >= stop.max_iters:
            termination = Termination.MAX_ITERS
            logger.warning("Stopped after %d iterations with gradient sup-norm %.3e", iterations, sup)
            break
        result = line_search_step(state, m, fields, params, control, workers, gradient, values)
        if result.failed:
            termination = Termination.LINE_SEARCH_FAILURE
            logger.warning("Line search failed at iteration %d (gradient sup-norm %.3e)", iterations, sup)
            break
        state = result.state
        iterations += 1
        trace.append(result.objective_after)
        values, gradient, failed = _guarded_evaluation(state, m, fields, params, workers)
        sup = _sup_norm(gradient)
        logger.debug("iteration %d: objective %.12g, gradient sup-norm %.3e", iterations, trace[-1], sup)

    breakdowns, broken = _guarded_breakdowns(state, m, fields, params, workers)
    failing = set(failed) | set(broken)
    failed = [p for p in lattice.points if p in failing]
    if failed:
        termination = Termination.GEOMETRY_FAILURE
    report = OptimizationReport(
        termination=termination,
        iterations=iterations,
        gradient_sup_norm=sup,
        objective_trace=trace,
        breakdowns=breakdowns,
        total=sum_breakdowns(breakdowns),
        flagged_points=flagged,
        failed_points=failed,
        min_pairwise_distance=min_pairwise_distance(state.positions),
        gradient_exact=exact,
        initial_positions=initial_positions,
    )
    return state, report
