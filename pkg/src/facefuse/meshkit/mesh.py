"""Indexed triangle mesh with named per-vertex attributes."""

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ..errors import MeshStructureError, ShapeError, ValidationError

# Attribute channels understood by the PLY/OBJ writers.  "color" is an
# (N, 3) float array in [0, 1], "normal" an (N, 3) unit-vector array,
# "scalar:<name>" an (N,) float array and "vector:<name>" an (N, 3) array.
KNOWN_PREFIXES = ("scalar:", "vector:")


class TriangleMesh:
    """Triangle mesh given by vertex positions and CCW-oriented faces.

    Parameters
    ----------
    vertices : array_like
        (N, 3) float positions, arbitrary world scale.
    faces : array_like
        (F, 3) int vertex indices, counter-clockwise orientation.
        May be empty.
    attributes : dict, optional
        Per-vertex channels keyed by name; values are (N,) or (N, 3)
        float arrays.  See module docstring for recognised names.
    validate : bool
        Run structural checks (index range, distinct indices per face,
        edge-manifoldness, unit normals) on construction.
    """

    def __init__(self, vertices, faces, attributes=None, validate=True):
        self.vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        self.attributes = {}
        if attributes:
            for name, arr in attributes.items():
                self.set_attribute(name, arr, validate=False)
        if validate:
            self.validate()

    # -- structure ---------------------------------------------------------

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    def validate(self):
        """Check structural invariants; raise MeshStructureError on failure."""
        if self.n_faces:
            lo, hi = self.faces.min(), self.faces.max()
            if lo < 0 or hi >= self.n_vertices:
                raise MeshStructureError(
                    f"face index {hi if hi >= self.n_vertices else lo} outside "
                    f"[0, {self.n_vertices})"
                )
            f = self.faces
            degen = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
            if degen.any():
                raise MeshStructureError(
                    f"face {int(np.nonzero(degen)[0][0])} repeats a vertex index"
                )
            edges, counts = self._edge_counts()
            worst = counts.argmax()
            if counts[worst] > 2:
                i, j = edges[worst]
                raise MeshStructureError(
                    f"edge ({int(i)}, {int(j)}) shared by {int(counts[worst])} faces; "
                    "mesh is not edge-manifold"
                )
        for name, arr in self.attributes.items():
            if arr.shape[0] != self.n_vertices:
                raise ShapeError(
                    f"attribute {name!r} has {arr.shape[0]} rows, expected {self.n_vertices}"
                )
            if name == "normal":
                norms = np.linalg.norm(arr, axis=1)
                if norms.size and np.abs(norms - 1.0).max() > 1e-6:
                    raise ValidationError("normal attribute is not unit length (tol 1e-6)")

    def _edge_counts(self):
        e = np.sort(
            np.concatenate(
                [self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]
            ),
            axis=1,
        )
        edges, counts = np.unique(e, axis=0, return_counts=True)
        return edges, counts

    def edges(self):
        """Unique undirected edges as an (E, 2) array with e[:,0] < e[:,1]."""
        if not self.n_faces:
            return np.zeros((0, 2), dtype=np.int64)
        return self._edge_counts()[0]

    def boundary_edges(self):
        """Edges bordered by exactly one face."""
        edges, counts = self._edge_counts()
        return edges[counts == 1]

    def vertex_adjacency(self):
        """Symmetric sparse adjacency matrix with Euclidean edge lengths."""
        e = self.edges()
        if not len(e):
            return sparse.csr_matrix((self.n_vertices, self.n_vertices))
        lengths = np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)
        i = np.concatenate([e[:, 0], e[:, 1]])
        j = np.concatenate([e[:, 1], e[:, 0]])
        w = np.concatenate([lengths, lengths])
        return sparse.csr_matrix((w, (i, j)), shape=(self.n_vertices, self.n_vertices))

    def connected_components(self):
        """(count, per-vertex label) on the vertex-edge graph."""
        return csgraph.connected_components(self.vertex_adjacency(), directed=False)

    # -- geometry ----------------------------------------------------------

    def face_corners(self):
        """(F, 3, 3) positions of each face's three corners."""
        return self.vertices[self.faces]

    def face_normals(self, normalized=True):
        """Per-face normals from the CCW winding; optionally unit length."""
        p = self.face_corners()
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        if normalized:
            lens = np.linalg.norm(n, axis=1, keepdims=True)
            lens[lens == 0] = 1.0
            n = n / lens
        return n

    def face_areas(self):
        p = self.face_corners()
        return 0.5 * np.linalg.norm(
            np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1
        )

    def vertex_normals(self):
        """Area-weighted average of incident face normals, unit length."""
        fn = self.face_normals(normalized=False)  # magnitude 2*area weights
        vn = np.zeros_like(self.vertices)
        for k in range(3):
            np.add.at(vn, self.faces[:, k], fn)
        lens = np.linalg.norm(vn, axis=1, keepdims=True)
        lens[lens == 0] = 1.0
        return vn / lens

    def face_centroids(self):
        return self.face_corners().mean(axis=1)

    def bbox_diagonal(self):
        if not self.n_vertices:
            return 0.0
        return float(np.linalg.norm(self.vertices.max(0) - self.vertices.min(0)))

    # -- attributes / copies ------------------------------------------------

    def set_attribute(self, name, values, validate=True):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim == 1:
            pass
        elif arr.ndim == 2 and arr.shape[1] == 3:
            pass
        else:
            raise ShapeError(f"attribute {name!r} must be (N,) or (N, 3)")
        self.attributes[name] = arr
        if validate and arr.shape[0] != self.n_vertices:
            raise ShapeError(
                f"attribute {name!r} has {arr.shape[0]} rows, expected {self.n_vertices}"
            )

    def with_vertices(self, vertices):
        """Same connectivity and attributes, new positions."""
        return TriangleMesh(vertices, self.faces.copy(),
                            {k: v.copy() for k, v in self.attributes.items()},
                            validate=False)

    def copy(self):
        return self.with_vertices(self.vertices.copy())
