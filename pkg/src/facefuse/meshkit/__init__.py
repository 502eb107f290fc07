from .mesh import TriangleMesh
from .io import load_mesh, save_mesh, load_obj, save_obj, load_ply, save_ply
from .operators import (
    SparseLinearSystem,
    assemble_laplace,
    cotangent_weights,
    divergence,
    hat_gradients,
)
from .geodesics import geodesic_distances
from . import primitives

__all__ = [
    "TriangleMesh",
    "SparseLinearSystem",
    "load_mesh", "save_mesh", "load_obj", "save_obj", "load_ply", "save_ply",
    "assemble_laplace", "cotangent_weights", "divergence", "hat_gradients",
    "geodesic_distances",
    "primitives",
]
