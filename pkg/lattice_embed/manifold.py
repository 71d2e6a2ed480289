import logging
import math

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from lattice_embed.errors import (
    ClosestPointError,
    CurvatureNotSupportedError,
    DegenerateTangentPairError,
    DimensionMismatchError,
    NonTangentError,
    SingularityError,
)
from lattice_embed.finite_difference import (
    central_gradient,
    central_hessian,
    central_jacobian,
)

logger = logging.getLogger(__name__)

ON_MANIFOLD_TOL = 1e-8
SINGULAR_GRADIENT = 1e-12
TANGENT_TOL = 1e-8
GRAM_TOL = 1e-12

# closest-point solver
LEVEL_TOL = 1e-12
STATIONARY_TOL = 1e-12
ACCEPT_LEVEL_TOL = 1e-10
ACCEPT_STATIONARY_TOL = 1e-9
MAX_NEWTON_ITERS = 100
MAX_DAMPING_HALVINGS = 30

# medial-axis probe
PROBE_STEP = 1e-6
JUMP_TOL = 1e-3


@dataclass(frozen=True)
class TangentNormalSplit:
    tangential: np.ndarray
    normal: np.ndarray


class Manifold(ABC):
    """A smooth manifold M embedded in R^n"""

    ambient_dimension: int
    intrinsic_dimension: int
    neighborhood_radius: float = math.inf

    @abstractmethod
    def closest_point(self, q) -> np.ndarray:
        """Footpoint of q on M"""

    @abstractmethod
    def split_tangent_normal(self, p, v) -> TangentNormalSplit:
        """Decompose v into T_pM and N_pM components"""

    @abstractmethod
    def gaussian_curvature(self, p) -> float:
        pass

    @abstractmethod
    def second_fundamental_form(self, p) -> np.ndarray:
        """Symmetric n x n matrix S with II(v, w) = v^T S w for tangent v, w"""

    @abstractmethod
    def contains(self, x, tol: float = ON_MANIFOLD_TOL) -> bool:
        pass

    @property
    def supports_curvature(self) -> bool:
        return self.ambient_dimension == 3 and self.intrinsic_dimension == 2

    def _vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.ambient_dimension:
            raise DimensionMismatchError(x.size, self.ambient_dimension, "point and manifold ambient space")
        return x

    def _require_surface_in_r3(self) -> None:
        if not self.supports_curvature:
            raise CurvatureNotSupportedError(
                f"Curvature is only implemented for 2-surfaces in R^3, got a "
                f"{self.intrinsic_dimension}-manifold in R^{self.ambient_dimension}"
            )

    def _check_neighborhood(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        d = float(np.linalg.norm(q - p))
        if d > self.neighborhood_radius:
            raise ClosestPointError(
                f"Query lies {d:.6g} from M, outside the working neighborhood "
                f"of radius {self.neighborhood_radius:.6g}",
                last_iterate=p,
                residual=d,
            )
        return p

    def distance(self, x) -> float:
        x = self._vector(x)
        return float(np.linalg.norm(x - self.closest_point(x)))

    def sectional_curvature(self, p, v, w) -> float:
        self._require_surface_in_r3()
        p = self._vector(p)
        v = self._vector(v)
        w = self._vector(w)
        for name, vec in (("v", v), ("w", w)):
            normal = self.split_tangent_normal(p, vec).normal
            if np.linalg.norm(normal) > TANGENT_TOL * max(np.linalg.norm(vec), 1.0):
                raise NonTangentError(f"{name}={vec} is not tangent to M at {p}")
        gram = (v @ v) * (w @ w) - (v @ w) ** 2
        if gram <= GRAM_TOL:
            raise DegenerateTangentPairError(
                f"Tangent vectors v={v}, w={w} are linearly dependent (Gram determinant {gram:.3e})"
            )
        shape = self.second_fundamental_form(p)
        return float(((v @ shape @ v) * (w @ shape @ w) - (v @ shape @ w) ** 2) / gram)

    def has_ambiguous_footpoint(self, x) -> bool:
        """Whether x sits on (or numerically at) the medial axis of M"""
        x = self._vector(x)
        try:
            self.closest_point(x)
            for axis in range(self.ambient_dimension):
                offset = np.zeros(self.ambient_dimension)
                offset[axis] = PROBE_STEP
                jump = self.closest_point(x + offset) - self.closest_point(x - offset)
                if np.linalg.norm(jump) > JUMP_TOL:
                    return True
        except (SingularityError, ClosestPointError):
            return True
        return False


def _adjugate3(m: np.ndarray) -> np.ndarray:
    a, b, c = m
    return np.column_stack([np.cross(b, c), np.cross(c, a), np.cross(a, b)])


class ImplicitHypersurface(Manifold):
    """
    The regular level set M = {x : F(x) = 0} in R^n.

    Missing gradient or Hessian callables are replaced by central
    differences.
    """

    def __init__(self,
                 level: Callable[[np.ndarray], float],
                 dimension: int,
                 gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 neighborhood_radius: float = math.inf):
        if dimension < 2:
            raise ValueError("A hypersurface needs an ambient dimension of at least 2")
        self._level = level
        self._gradient = gradient
        self._hessian = hessian
        self.ambient_dimension = dimension
        self.intrinsic_dimension = dimension - 1
        self.neighborhood_radius = neighborhood_radius

    def level(self, x: np.ndarray) -> float:
        return float(self._level(x))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        if self._gradient is not None:
            return np.asarray(self._gradient(x), dtype=float)
        return central_gradient(self.level, x)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        if self._hessian is not None:
            return np.asarray(self._hessian(x), dtype=float)
        if self._gradient is not None:
            jac = central_jacobian(self.gradient, x)
            return 0.5 * (jac + jac.T)
        return central_hessian(self.level, x)

    def contains(self, x, tol: float = ON_MANIFOLD_TOL) -> bool:
        return abs(self.level(self._vector(x))) <= tol

    def _unit_normal(self, p: np.ndarray) -> Tuple[np.ndarray, float]:
        grad = self.gradient(p)
        norm = float(np.linalg.norm(grad))
        if norm < SINGULAR_GRADIENT:
            raise SingularityError(f"Level-set gradient vanishes at {p} (|grad F| = {norm:.3e})")
        return grad / norm, norm

    def _lagrange_residual(self, q, p, lam) -> Tuple[np.ndarray, float]:
        return p - q + lam * self.gradient(p), self.level(p)

    def closest_point(self, q) -> np.ndarray:
        """Damped Newton on the Lagrange system p - q + lam grad F(p) = 0, F(p) = 0"""
        q = self._vector(q)
        n = self.ambient_dimension

        grad_q = self.gradient(q)
        g2 = float(grad_q @ grad_q)
        if g2 < SINGULAR_GRADIENT ** 2:
            raise SingularityError(f"Cannot seed closest-point solve at {q}: gradient vanishes")
        p = q - self.level(q) * grad_q / g2

        grad_p = self.gradient(p)
        gp2 = float(grad_p @ grad_p)
        if gp2 < SINGULAR_GRADIENT ** 2:
            raise SingularityError(f"Level-set gradient vanishes at seed {p}")
        lam = float((q - p) @ grad_p) / gp2

        stationary, level = self._lagrange_residual(q, p, lam)
        scale = max(1.0, float(np.linalg.norm(q)))
        for _ in range(MAX_NEWTON_ITERS):
            if abs(level) <= LEVEL_TOL and np.linalg.norm(stationary) <= STATIONARY_TOL * scale:
                return self._check_neighborhood(q, p)

            grad = self.gradient(p)
            if np.linalg.norm(grad) < SINGULAR_GRADIENT:
                raise SingularityError(f"Level-set gradient vanishes at iterate {p}")
            system = np.zeros((n + 1, n + 1))
            system[:n, :n] = np.eye(n) + lam * self.hessian(p)
            system[:n, n] = grad
            system[n, :n] = grad
            rhs = -np.concatenate([stationary, [level]])
            try:
                delta = np.linalg.solve(system, rhs)
            except np.linalg.LinAlgError as e:
                raise SingularityError(f"Singular Newton system at iterate {p}: {e}")

            merit = math.hypot(float(np.linalg.norm(stationary)), level)
            t = 1.0
            for _ in range(MAX_DAMPING_HALVINGS):
                p_trial = p + t * delta[:n]
                lam_trial = lam + t * delta[n]
                s_trial, l_trial = self._lagrange_residual(q, p_trial, lam_trial)
                if math.hypot(float(np.linalg.norm(s_trial)), l_trial) < merit:
                    break
                t *= 0.5
            else:
                # no decrease left at double precision
                break
            p, lam, stationary, level = p_trial, lam_trial, s_trial, l_trial

        residual = math.hypot(float(np.linalg.norm(stationary)), level)
        if abs(level) <= ACCEPT_LEVEL_TOL and np.linalg.norm(stationary) <= ACCEPT_STATIONARY_TOL * scale:
            return self._check_neighborhood(q, p)
        logger.warning("closest-point solve from %s stalled at %s (residual %.3e)", q, p, residual)
        raise ClosestPointError(
            f"Closest-point solve from {q} did not converge", last_iterate=p, residual=residual
        )

    def split_tangent_normal(self, p, v) -> TangentNormalSplit:
        p = self._vector(p)
        v = self._vector(v)
        unit, _ = self._unit_normal(p)
        normal = (v @ unit) * unit
        return TangentNormalSplit(tangential=v - normal, normal=normal)

    def second_fundamental_form(self, p) -> np.ndarray:
        p = self._vector(p)
        _, norm = self._unit_normal(p)
        return -self.hessian(p) / norm

    def gaussian_curvature(self, p) -> float:
        """K = grad F^T adj(H F) grad F / |grad F|^4"""
        self._require_surface_in_r3()
        p = self._vector(p)
        grad = self.gradient(p)
        norm = float(np.linalg.norm(grad))
        if norm < SINGULAR_GRADIENT:
            raise SingularityError(f"Level-set gradient vanishes at {p}; curvature undefined")
        return float(grad @ _adjugate3(self.hessian(p)) @ grad / norm ** 4)


class Hyperplane(ImplicitHypersurface):
    """{x : <n, x> = offset} with n normalized"""

    def __init__(self, normal: Sequence[float], offset: float = 0.0, neighborhood_radius: float = math.inf):
        normal = np.asarray(normal, dtype=float)
        norm = float(np.linalg.norm(normal))
        if norm < SINGULAR_GRADIENT:
            raise ValueError("Hyperplane normal must be non-zero")
        self.normal = normal / norm
        self.offset = float(offset) / norm
        super().__init__(self.level, normal.size, neighborhood_radius=neighborhood_radius)

    def level(self, x):
        return float(self.normal @ x - self.offset)

    def gradient(self, x):
        return self.normal.copy()

    def hessian(self, x):
        return np.zeros((self.ambient_dimension, self.ambient_dimension))

    def closest_point(self, q) -> np.ndarray:
        q = self._vector(q)
        return self._check_neighborhood(q, q - self.level(q) * self.normal)


class Sphere(ImplicitHypersurface):
    """{x : |x - c|^2 = r^2}"""

    def __init__(self, center: Sequence[float], radius: float, neighborhood_radius: float = math.inf):
        if radius <= 0:
            raise ValueError(f"Sphere radius must be positive, got {radius}")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        super().__init__(self.level, self.center.size, neighborhood_radius=neighborhood_radius)

    def level(self, x):
        y = x - self.center
        return float(y @ y - self.radius ** 2)

    def gradient(self, x):
        return 2.0 * (x - self.center)

    def hessian(self, x):
        return 2.0 * np.eye(self.ambient_dimension)

    def closest_point(self, q) -> np.ndarray:
        q = self._vector(q)
        y = q - self.center
        norm = float(np.linalg.norm(y))
        if norm < SINGULAR_GRADIENT:
            raise SingularityError(f"{q} is the sphere center; every point of M is closest")
        return self._check_neighborhood(q, self.center + self.radius * y / norm)


class Cylinder(ImplicitHypersurface):
    """Points of R^3 at distance r from the line c + t a"""

    def __init__(self, center: Sequence[float], axis: Sequence[float], radius: float,
                 neighborhood_radius: float = math.inf):
        if radius <= 0:
            raise ValueError(f"Cylinder radius must be positive, got {radius}")
        self.center = np.asarray(center, dtype=float)
        axis = np.asarray(axis, dtype=float)
        if self.center.size != 3 or axis.size != 3:
            raise DimensionMismatchError(self.center.size, 3, "cylinder and R^3")
        self.axis = axis / np.linalg.norm(axis)
        self.radius = float(radius)
        self._projector = np.eye(3) - np.outer(self.axis, self.axis)
        super().__init__(self.level, 3, neighborhood_radius=neighborhood_radius)

    def level(self, x):
        y = self._projector @ (x - self.center)
        return float(y @ y - self.radius ** 2)

    def gradient(self, x):
        return 2.0 * self._projector @ (x - self.center)

    def hessian(self, x):
        return 2.0 * self._projector

    def closest_point(self, q) -> np.ndarray:
        q = self._vector(q)
        y = q - self.center
        radial = self._projector @ y
        norm = float(np.linalg.norm(radial))
        if norm < SINGULAR_GRADIENT:
            raise SingularityError(f"{q} lies on the cylinder axis")
        return self._check_neighborhood(q, q - radial + self.radius * radial / norm)


class Torus(ImplicitHypersurface):
    """
    Torus around the z axis through ``center``, as the quartic level set
    (|y|^2 + R^2 - r^2)^2 - 4 R^2 (y_1^2 + y_2^2) with y = x - center.
    """

    def __init__(self, center: Sequence[float], major_radius: float, minor_radius: float,
                 neighborhood_radius: float = math.inf):
        if not 0 < minor_radius < major_radius:
            raise ValueError(
                f"Torus radii must satisfy 0 < r < R, got R={major_radius}, r={minor_radius}"
            )
        self.center = np.asarray(center, dtype=float)
        if self.center.size != 3:
            raise DimensionMismatchError(self.center.size, 3, "torus and R^3")
        self.major_radius = float(major_radius)
        self.minor_radius = float(minor_radius)
        self._planar = np.diag([1.0, 1.0, 0.0])
        super().__init__(self.level, 3, neighborhood_radius=neighborhood_radius)

    def _s(self, y):
        return float(y @ y) + self.major_radius ** 2 - self.minor_radius ** 2

    def level(self, x):
        y = x - self.center
        return self._s(y) ** 2 - 4.0 * self.major_radius ** 2 * float(y[0] ** 2 + y[1] ** 2)

    def gradient(self, x):
        y = x - self.center
        return 4.0 * self._s(y) * y - 8.0 * self.major_radius ** 2 * (self._planar @ y)

    def hessian(self, x):
        y = x - self.center
        return (
            8.0 * np.outer(y, y)
            + 4.0 * self._s(y) * np.eye(3)
            - 8.0 * self.major_radius ** 2 * self._planar
        )

    def closest_point(self, q) -> np.ndarray:
        """Nearest point of the core circle, then out along the tube"""
        q = self._vector(q)
        y = q - self.center
        planar = self._planar @ y
        rho = float(np.linalg.norm(planar))
        if rho < SINGULAR_GRADIENT:
            raise SingularityError(f"{q} lies on the torus symmetry axis")
        core = self.major_radius * planar / rho
        tube = y - core
        depth = float(np.linalg.norm(tube))
        if depth < SINGULAR_GRADIENT:
            raise SingularityError(f"{q} lies on the core circle of the torus")
        return self._check_neighborhood(q, self.center + core + self.minor_radius * tube / depth)


class PolynomialHypersurface(ImplicitHypersurface):
    """Zero set of sum_k c_k prod_i x_i^e_ki, with exact derivatives"""

    def __init__(self, terms: Sequence[Tuple[float, Sequence[int]]], neighborhood_radius: float = math.inf):
        if not terms:
            raise ValueError("A polynomial level set needs at least one term")
        self.coefficients = np.array([float(c) for c, _ in terms])
        self.exponents = np.array([list(e) for _, e in terms], dtype=int)
        if self.exponents.ndim != 2 or np.any(self.exponents < 0):
            raise ValueError("Exponent tuples must share a length and be non-negative")
        super().__init__(self.level, self.exponents.shape[1], neighborhood_radius=neighborhood_radius)

    def _derivative(self, x: np.ndarray, orders: Sequence[int]) -> float:
        exps = self.exponents.copy()
        factor = self.coefficients.copy()
        for axis in orders:
            factor = factor * exps[:, axis]
            exps[:, axis] = np.maximum(exps[:, axis] - 1, 0)
        return float(factor @ np.prod(np.power(x, exps), axis=1))

    def level(self, x):
        return self._derivative(np.asarray(x, dtype=float), ())

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([self._derivative(x, (j,)) for j in range(self.ambient_dimension)])

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        n = self.ambient_dimension
        hess = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                hess[i, j] = hess[j, i] = self._derivative(x, (i, j))
        return hess
