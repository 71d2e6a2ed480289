from typing import Any, List, Sequence


class LatticeEmbedError(Exception):
    """Base class for all errors raised by lattice_embed"""


class DimensionMismatchError(LatticeEmbedError, ValueError):
    """Two objects that must share a dimension do not"""

    def __init__(self, left: int, right: int, what: str = "operands"):
        self.left = left
        self.right = right
        super().__init__(
            f"Dimension mismatch between {what}: {left} vs {right}"
        )


class InvertedBoundsError(LatticeEmbedError, ValueError):
    """A box has a lower bound above its upper bound"""

    def __init__(self, lower: Sequence, upper: Sequence):
        self.lower = tuple(lower)
        self.upper = tuple(upper)
        super().__init__(f"Inverted box bounds: lower={self.lower} upper={self.upper}")


class NonFiniteCoordinateError(LatticeEmbedError, ValueError):
    """A continuous point has a NaN or infinite coordinate"""


class ClosestPointError(LatticeEmbedError):
    """The closest-point solver did not converge"""

    def __init__(self, message: str, last_iterate: Any = None, residual: float = float("nan")):
        self.last_iterate = last_iterate
        self.residual = residual
        super().__init__(f"{message} (residual={residual:.3e})")


class SingularityError(LatticeEmbedError):
    """The level-set gradient vanishes where a normal is needed"""


class ImmersionError(LatticeEmbedError):
    """A chart Jacobian lost full column rank"""


class CurvatureNotSupportedError(LatticeEmbedError, NotImplementedError):
    """Curvature requested for a manifold other than a 2-surface in R^3"""


class NonTangentError(LatticeEmbedError, ValueError):
    """A vector expected in the tangent space has a normal component"""


class DegenerateTangentPairError(LatticeEmbedError, ValueError):
    """Two tangent vectors do not span a plane"""


class MissingEmbeddingError(LatticeEmbedError, KeyError):
    """An embedding state has no position for a lattice point"""

    def __init__(self, point: Any):
        self.point = point
        super().__init__(f"No embedded position for lattice point {point}")

    def __str__(self) -> str:
        return self.args[0]


class ConfigValidationError(LatticeEmbedError, ValueError):
    """A run configuration failed schema or cross-field validation"""

    def __init__(self, diagnostics: List[Any]):
        self.diagnostics = list(diagnostics)
        lines = "\n".join(str(d) for d in self.diagnostics)
        super().__init__(f"Invalid configuration:\n{lines}")
