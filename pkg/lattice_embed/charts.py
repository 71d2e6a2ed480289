import logging
import math

from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from lattice_embed.errors import (
    ClosestPointError,
    DimensionMismatchError,
    ImmersionError,
    InvertedBoundsError,
)
from lattice_embed.finite_difference import central_jacobian
from lattice_embed.manifold import (
    ON_MANIFOLD_TOL,
    Manifold,
    TangentNormalSplit,
)

logger = logging.getLogger(__name__)

DEFAULT_SEEDS = 8
DEFAULT_GRID_PER_AXIS = 16
MAX_DESCENT_ITERS = 200
MAX_HALVINGS = 40
ARMIJO_C = 1e-4
TANGENTIAL_TOL = 1e-11
ACCEPT_TANGENTIAL_TOL = 1e-8
RANK_TOL = 1e-10
BOUND_TOL = 1e-12


class ParametricChart(Manifold):
    """
    A k-dimensional manifold given by a parametrization psi: box in R^k -> R^n.

    Footpoints are found by projected Gauss-Newton descent in parameter
    space, started from the ``n_seeds`` grid samples nearest to the query.
    Periodic parameter axes wrap around instead of being clipped. On the
    other axes the footpoint may sit on the edge of the parameter box; it
    is accepted there once the residual only pulls out of the box.
    """

    def __init__(self,
                 mapping: Callable[[np.ndarray], np.ndarray],
                 lower: Sequence[float],
                 upper: Sequence[float],
                 jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 second_derivatives: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 periodic: Optional[Sequence[bool]] = None,
                 n_seeds: int = DEFAULT_SEEDS,
                 grid_per_axis: int = DEFAULT_GRID_PER_AXIS,
                 neighborhood_radius: float = math.inf):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape:
            raise DimensionMismatchError(self.lower.size, self.upper.size, "parameter bounds")
        if np.any(self.lower >= self.upper):
            raise InvertedBoundsError(self.lower, self.upper)
        self.periodic = np.zeros(self.lower.size, dtype=bool) if periodic is None else np.asarray(periodic, dtype=bool)
        if self.periodic.size != self.lower.size:
            raise DimensionMismatchError(self.periodic.size, self.lower.size, "periodic flags and parameters")

        self._mapping = mapping
        self._jacobian = jacobian
        self._second = second_derivatives
        self.n_seeds = n_seeds
        self.grid_per_axis = grid_per_axis
        self.neighborhood_radius = neighborhood_radius

        self.intrinsic_dimension = self.lower.size
        self.ambient_dimension = np.asarray(mapping(0.5 * (self.lower + self.upper))).size
        if self.intrinsic_dimension >= self.ambient_dimension:
            raise ValueError("A chart must map R^k into R^n with k < n")
        self._grid_params, self._grid_points = self._sample_grid()

    def _sample_grid(self) -> Tuple[np.ndarray, np.ndarray]:
        axes = []
        for lo, hi, wraps in zip(self.lower, self.upper, self.periodic):
            axes.append(np.linspace(lo, hi, self.grid_per_axis, endpoint=not wraps))
        mesh = np.meshgrid(*axes, indexing="ij")
        params = np.stack([m.reshape(-1) for m in mesh], axis=1)
        points = np.array([self.map(u) for u in params])
        return params, points

    def map(self, u) -> np.ndarray:
        return np.asarray(self._mapping(np.asarray(u, dtype=float)), dtype=float)

    def jacobian(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self._jacobian is not None:
            return np.asarray(self._jacobian(u), dtype=float)
        return central_jacobian(self.map, u)

    def second_derivatives(self, u) -> np.ndarray:
        """Tensor d^2 psi / du_i du_j of shape (n, k, k)"""
        u = np.asarray(u, dtype=float)
        if self._second is not None:
            return np.asarray(self._second(u), dtype=float)
        tensor = central_jacobian(self.jacobian, u)
        return 0.5 * (tensor + np.swapaxes(tensor, 1, 2))

    def _wrap(self, u: np.ndarray) -> np.ndarray:
        span = self.upper - self.lower
        wrapped = self.lower + np.mod(u - self.lower, span)
        return np.where(self.periodic, wrapped, np.clip(u, self.lower, self.upper))

    def _at_bounds(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        slack = BOUND_TOL * (self.upper - self.lower)
        clipped = ~self.periodic
        return clipped & (u <= self.lower + slack), clipped & (u >= self.upper - slack)

    def _search_direction(self, u: np.ndarray, jac: np.ndarray,
                          residual: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
        """Gauss-Newton direction over the free axes and the KKT residual of the box problem"""
        grad = jac.T @ residual
        at_lower, at_upper = self._at_bounds(u)
        # a bound is active when descent would leave the box through it
        free = ~((at_lower & (grad > 0)) | (at_upper & (grad < 0)))
        if not free.any():
            return np.zeros_like(u), grad, 0.0

        jac_free = jac[:, free]
        tangential = float(np.linalg.norm(jac_free @ np.linalg.lstsq(jac_free, residual, rcond=None)[0]))
        direction = np.zeros_like(u)
        try:
            direction[free] = -np.linalg.solve(jac_free.T @ jac_free, grad[free])
        except np.linalg.LinAlgError:
            direction[free] = -grad[free]
        if np.any((at_lower & (direction < 0)) | (at_upper & (direction > 0))):
            # fall back to the projected gradient, which never points out of the box
            direction = np.where(free, -grad, 0.0)
        return direction, grad, tangential

    def _descend(self, q: np.ndarray, seed: np.ndarray) -> Tuple[np.ndarray, float, bool]:
        u = self._wrap(seed)
        residual = self.map(u) - q
        value = 0.5 * float(residual @ residual)
        tangential = math.inf
        for _ in range(MAX_DESCENT_ITERS):
            direction, grad, tangential = self._search_direction(u, self.jacobian(u), residual)
            if tangential <= TANGENTIAL_TOL:
                return u, tangential, True

            slope = float(grad @ direction)
            t = 1.0
            for _ in range(MAX_HALVINGS):
                u_trial = self._wrap(u + t * direction)
                r_trial = self.map(u_trial) - q
                v_trial = 0.5 * float(r_trial @ r_trial)
                if v_trial <= value + ARMIJO_C * t * slope:
                    break
                t *= 0.5
            else:
                break
            if np.linalg.norm(u_trial - u) <= 1e-15 * max(1.0, float(np.linalg.norm(u))):
                break
            u, residual, value = u_trial, r_trial, v_trial
            tangential = math.inf
        if not math.isfinite(tangential):
            tangential = self._search_direction(u, self.jacobian(u), residual)[2]
        return u, tangential, tangential <= ACCEPT_TANGENTIAL_TOL

    def seed_parameters(self, q) -> List[np.ndarray]:
        """Grid parameters nearest to q, used to start the projection"""
        q = self._vector(q)
        gaps = np.linalg.norm(self._grid_points - q, axis=1)
        return [self._grid_params[i] for i in np.argsort(gaps, kind="stable")[: self.n_seeds]]

    def parameter_of(self, q) -> np.ndarray:
        """Parameter u* of the footpoint of q"""
        q = self._vector(q)
        seeds = self.seed_parameters(q)

        best: Optional[Tuple[float, np.ndarray]] = None
        last: Tuple[np.ndarray, float] = (seeds[0], math.inf)
        for seed in seeds:
            u, tangential, converged = self._descend(q, seed)
            last = (u, tangential)
            if not converged:
                logger.debug("seed %s for %s stalled with tangential residual %.3e", seed, q, tangential)
                continue
            distance = float(np.linalg.norm(self.map(u) - q))
            if best is None or distance < best[0]:
                best = (distance, u)
        if best is None:
            raise ClosestPointError(
                f"Chart projection of {q} did not converge from {len(seeds)} seeds",
                last_iterate=self.map(last[0]),
                residual=last[1],
            )
        return best[1]

    def closest_point(self, q) -> np.ndarray:
        q = self._vector(q)
        return self._check_neighborhood(q, self.map(self.parameter_of(q)))

    def contains(self, x, tol: float = ON_MANIFOLD_TOL) -> bool:
        return self.distance(x) <= tol

    def _checked_jacobian(self, u: np.ndarray) -> np.ndarray:
        jac = self.jacobian(u)
        singular = np.linalg.svd(jac, compute_uv=False)
        if singular[-1] <= RANK_TOL * max(singular[0], 1.0):
            raise ImmersionError(f"Chart Jacobian is rank deficient at u={u} (singular values {singular})")
        return jac

    def split_tangent_normal(self, p, v) -> TangentNormalSplit:
        p = self._vector(p)
        v = self._vector(v)
        jac = self._checked_jacobian(self.parameter_of(p))
        coeffs = np.linalg.lstsq(jac, v, rcond=None)[0]
        tangential = jac @ coeffs
        return TangentNormalSplit(tangential=tangential, normal=v - tangential)

    def _fundamental_forms(self, p) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        self._require_surface_in_r3()
        u = self.parameter_of(self._vector(p))
        jac = self._checked_jacobian(u)
        normal = np.cross(jac[:, 0], jac[:, 1])
        normal /= np.linalg.norm(normal)
        first = jac.T @ jac
        second = np.einsum("n,nij->ij", normal, self.second_derivatives(u))
        return jac, first, second

    def second_fundamental_form(self, p) -> np.ndarray:
        jac, _, second = self._fundamental_forms(p)
        pinv = np.linalg.pinv(jac)
        return pinv.T @ second @ pinv

    def gaussian_curvature(self, p) -> float:
        """det(II) / det(I)"""
        _, first, second = self._fundamental_forms(p)
        det_first = float(np.linalg.det(first))
        if det_first <= RANK_TOL:
            raise ImmersionError(f"Singular first fundamental form at {p}")
        return float(np.linalg.det(second) / det_first)


def torus_chart(center: Sequence[float], major_radius: float, minor_radius: float, **kwargs) -> ParametricChart:
    """(theta, phi) -> ((R + r cos phi) cos theta, (R + r cos phi) sin theta, r sin phi)"""
    c = np.asarray(center, dtype=float)
    R, r = float(major_radius), float(minor_radius)
    if not 0 < r < R:
        raise ValueError(f"Torus radii must satisfy 0 < r < R, got R={R}, r={r}")

    def mapping(u):
        theta, phi = u
        ring = R + r * math.cos(phi)
        return c + np.array([ring * math.cos(theta), ring * math.sin(theta), r * math.sin(phi)])

    def jacobian(u):
        theta, phi = u
        ring = R + r * math.cos(phi)
        return np.array([
            [-ring * math.sin(theta), -r * math.sin(phi) * math.cos(theta)],
            [ring * math.cos(theta), -r * math.sin(phi) * math.sin(theta)],
            [0.0, r * math.cos(phi)],
        ])

    return ParametricChart(
        mapping, lower=[0.0, 0.0], upper=[2 * math.pi, 2 * math.pi],
        jacobian=jacobian, periodic=[True, True], **kwargs
    )


def sphere_chart(center: Sequence[float], radius: float, **kwargs) -> ParametricChart:
    """Spherical angles (polar, azimuth); the poles are outside the immersion domain,
    so queries near them project onto the circles at polar angle 1e-3 and pi - 1e-3"""
    c = np.asarray(center, dtype=float)
    r = float(radius)
    if r <= 0:
        raise ValueError(f"Sphere radius must be positive, got {r}")

    def mapping(u):
        polar, azimuth = u
        return c + r * np.array([
            math.sin(polar) * math.cos(azimuth),
            math.sin(polar) * math.sin(azimuth),
            math.cos(polar),
        ])

    return ParametricChart(
        mapping, lower=[1e-3, 0.0], upper=[math.pi - 1e-3, 2 * math.pi],
        periodic=[False, True], **kwargs
    )


def monge_chart(terms: Sequence[Tuple[float, Sequence[int]]],
                lower: Sequence[float], upper: Sequence[float], **kwargs) -> ParametricChart:
    """Graph (x, y) -> (x, y, h(x, y)) of a polynomial height h"""
    coefficients = np.array([float(c) for c, _ in terms])
    exponents = np.array([list(e) for _, e in terms], dtype=int)
    if exponents.ndim != 2 or exponents.shape[1] != 2:
        raise ValueError("Monge height terms need exponent pairs (i, j)")

    def height(u):
        return float(coefficients @ np.prod(np.power(np.asarray(u, dtype=float), exponents), axis=1))

    def mapping(u):
        return np.array([u[0], u[1], height(u)])

    return ParametricChart(mapping, lower=lower, upper=upper, **kwargs)

