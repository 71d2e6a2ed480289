"""Lattice Embed - fit integer lattices onto smooth manifolds."""

from lattice_embed.lattice import Lattice, LatticePoint, generate_box_lattice
from lattice_embed.main import LatticeEmbedder, main
from lattice_embed.objective import ObjectiveParams, total_objective
from lattice_embed.optimizer import EmbeddingState, OptimizationReport, optimize

__version__ = "0.1.0"

__all__ = [
    "EmbeddingState",
    "Lattice",
    "LatticeEmbedder",
    "LatticePoint",
    "ObjectiveParams",
    "OptimizationReport",
    "generate_box_lattice",
    "main",
    "optimize",
    "total_objective",
]
