import pytest
import tempfile
import shutil
from pathlib import Path

from lattice_embed.fields import ActivationField, FieldSet, ReinforcementField
from lattice_embed.manifold import Cylinder, Hyperplane, Sphere, Torus
from lattice_embed.objective import ObjectiveParams


@pytest.fixture
def temp_directory():
    """Create a temporary directory for testing"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def plane():
    """The plane z = 0 in R^3"""
    return Hyperplane([0.0, 0.0, 1.0], 0.0)


@pytest.fixture
def unit_sphere():
    return Sphere([0.0, 0.0, 0.0], 1.0)


@pytest.fixture
def cylinder():
    return Cylinder([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], 1.0)


@pytest.fixture
def torus():
    return Torus([0.0, 0.0, 0.0], 2.0, 0.5)


@pytest.fixture
def default_params():
    return ObjectiveParams()


@pytest.fixture
def make_fields():
    """Build a FieldSet for a manifold"""
    def _make(manifold, epsilon=0.25, regions=()):
        return FieldSet(ActivationField(manifold, epsilon), ReinforcementField(tuple(regions)))
    return _make


@pytest.fixture
def plane_config_yaml():
    """A valid run config: 5x5 lattice at z = 1 over the plane z = 0"""
    return """
lattice:
  kind: box
  lower: [0, 0, 1]
  upper: [4, 4, 1]
manifold:
  kind: plane
  normal: [0.0, 0.0, 1.0]
  offset: 0.0
fields:
  activation:
    epsilon: 0.25
objective:
  alpha: 1.0
  beta: 1.0
  lambda: 0.0
  gamma: 1.0
optimizer:
  grad_tol: 1.0e-6
  max_iters: 500
output:
  prefix: plane
  formats: [yaml, markdown]
"""


@pytest.fixture
def write_config(temp_directory):
    """Write config text to a file in the temp directory and return its path"""
    def _write(text, name="config.yaml"):
        path = Path(temp_directory) / name
        path.write_text(text)
        return path
    return _write


# Markers for different test types
pytestmark = [
    pytest.mark.unit,
]
