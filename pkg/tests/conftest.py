import numpy as np
import pytest

from facefuse.meshkit import TriangleMesh, primitives


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def icosahedron():
    return primitives.icosahedron()


@pytest.fixture
def small_jittered_mesh(rng):
    """Icosphere with jittered vertices: irregular angles, no symmetric ties."""
    m = primitives.icosphere(2)
    v = m.vertices + 0.02 * rng.standard_normal(m.vertices.shape)
    return TriangleMesh(v, m.faces)


def equilateral_pair():
    """Two equilateral unit triangles sharing the edge (0, 1)."""
    h = np.sqrt(3.0) / 2.0
    verts = [(0, 0, 0), (1, 0, 0), (0.5, h, 0), (0.5, -h, 0)]
    faces = [(0, 1, 2), (0, 3, 1)]
    return TriangleMesh(verts, faces)


def single_equilateral():
    h = np.sqrt(3.0) / 2.0
    return TriangleMesh([(0, 0, 0), (1, 0, 0), (0.5, h, 0)], [(0, 1, 2)])
