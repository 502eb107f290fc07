"""Procedural test meshes: icospheres, grids, strips."""

import numpy as np

from .mesh import TriangleMesh


def icosahedron(radius=1.0, center=(0.0, 0.0, 0.0)):
    """Regular icosahedron inscribed in a sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts[0])
    faces = np.array(
        [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ],
        dtype=np.int64,
    )
    return TriangleMesh(verts * radius + np.asarray(center), faces)


def icosphere(subdivisions=2, radius=1.0, center=(0.0, 0.0, 0.0)):
    """Icosahedron subdivided ``subdivisions`` times, vertices on the sphere.

    Vertex counts: 12, 42, 162, 642, 2562, 10242 for 0..5 subdivisions.
    """
    base = icosahedron()
    verts = [tuple(v) for v in base.vertices]
    faces = [tuple(f) for f in base.faces]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = np.asarray(verts[a]) + np.asarray(verts[b])
                m /= np.linalg.norm(m)
                cache[key] = len(verts)
                verts.append(tuple(m))
            return cache[key]

        new_faces = []
        for (a, b, c) in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    v = np.asarray(verts) * radius + np.asarray(center, dtype=np.float64)
    return TriangleMesh(v, np.asarray(faces, dtype=np.int64))


def grid_mesh(nx, ny, spacing=1.0):
    """Flat triangulated grid in the z=0 plane with nx*ny vertices."""
    xs, ys = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    verts = np.stack([xs.ravel() * spacing, ys.ravel() * spacing,
                      np.zeros(nx * ny)], axis=1)
    faces = []
    for r in range(ny - 1):
        for c in range(nx - 1):
            a = r * nx + c
            b = a + 1
            d = a + nx
            e = d + 1
            faces.append((a, b, e))
            faces.append((a, e, d))
    return TriangleMesh(verts, np.asarray(faces, dtype=np.int64))


def line_strip(n, spacing=1.0):
    """Collinear vertices chained by (zero-area) faces; edge-graph distances
    along it equal the arithmetic spacing."""
    verts = np.stack([np.arange(n) * spacing, np.zeros(n), np.zeros(n)], axis=1)
    faces = [(i, i + 1, i + 2) for i in range(n - 2)] if n >= 3 else []
    return TriangleMesh(verts, np.asarray(faces, dtype=np.int64).reshape(-1, 3))
