"""Discrete differential operators on triangle meshes.

The Laplace matrix is assembled intrinsically from per-face hat-function
gradients, ``a_ij = sum_l |T_l| grad(B_i)^T grad(B_j)``, which is symmetric
positive semi-definite with constants in its null space.  The matching
divergence ``div V(i) = sum_l |T_l| grad(B_i)^T v_l`` makes the pair exact
on conservative fields: ``divergence(grad(phi)) == A @ phi`` up to rounding.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import DegenerateGeometryError, ShapeError


@dataclass
class SparseLinearSystem:
    """Coordinate-format sparse matrix plus an optional right-hand side.

    Duplicate (row, col) entries are coalesced at construction.  ``rhs``
    is (dimension,) for scalar problems or (dimension, 3) for vector ones.
    """

    dimension: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    rhs: np.ndarray = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.rows.size and (self.rows.max() >= self.dimension
                               or self.cols.max() >= self.dimension):
            raise ShapeError("matrix entry index outside dimension")
        coo = self.to_csr().tocoo()
        self.rows, self.cols, self.values = coo.row, coo.col, coo.data

    def to_csr(self):
        m = sparse.coo_matrix(
            (self.values, (self.rows, self.cols)),
            shape=(self.dimension, self.dimension),
        ).tocsr()
        m.sum_duplicates()
        return m

    def max_asymmetry(self):
        m = self.to_csr()
        d = m - m.T
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())


def _face_geometry(mesh):
    """Face corner positions, unit normals and areas; rejects degenerate faces."""
    p = mesh.face_corners()
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    double_area = np.linalg.norm(cross, axis=1)
    scale = mesh.bbox_diagonal()
    floor = 1e-12 * scale * scale if scale > 0 else 1e-300
    if (double_area <= floor).any():
        bad = int(np.nonzero(double_area <= floor)[0][0])
        raise DegenerateGeometryError(f"face {bad} has zero area")
    normals = cross / double_area[:, None]
    return p, normals, 0.5 * double_area


def hat_gradients(mesh):
    """Gradients of the linear hat basis functions, per face.

    Returns
    -------
    grads : (F, 3, 3) array
        ``grads[l, k]`` is the in-plane gradient of the hat function of
        vertex ``faces[l, k]`` within face ``l``.  The three vectors of a
        face sum to zero.
    areas : (F,) array
        Triangle areas.
    """
    p, normals, areas = _face_geometry(mesh)
    grads = np.empty_like(p)
    # grad B_i = n x (p_k - p_j) / (2A) for CCW corner order (i, j, k)
    for k in range(3):
        opposite = p[:, (k + 2) % 3] - p[:, (k + 1) % 3]
        grads[:, k] = np.cross(normals, opposite) / (2.0 * areas)[:, None]
    return grads, areas


def cotangent_weights(mesh):
    """Per-edge cotangent weights ``w_ij = cot(alpha_ij) + cot(beta_ij)``.

    Boundary edges carry the single available opposite angle.  Returns a
    dict keyed by ``(i, j)`` with ``i < j``.
    """
    p, _, areas = _face_geometry(mesh)
    del areas
    weights = {}
    f = mesh.faces
    for k in range(3):
        i = f[:, (k + 1) % 3]
        j = f[:, (k + 2) % 3]
        apex = p[:, k]
        u = p[:, (k + 1) % 3] - apex
        v = p[:, (k + 2) % 3] - apex
        cos = np.einsum("ij,ij->i", u, v)
        sin = np.linalg.norm(np.cross(u, v), axis=1)
        cot = cos / sin
        for e0, e1, w in zip(i, j, cot):
            key = (int(e0), int(e1)) if e0 < e1 else (int(e1), int(e0))
            weights[key] = weights.get(key, 0.0) + float(w)
    return weights


def assemble_laplace(mesh):
    """Intrinsic stiffness matrix as a SparseLinearSystem (rhs unset).

    Equals half the cotangent-weight graph Laplacian; symmetric PSD with
    zero row sums.
    """
    grads, areas = hat_gradients(mesh)
    f = mesh.faces
    rows, cols, vals = [], [], []
    for a in range(3):
        for b in range(3):
            rows.append(f[:, a])
            cols.append(f[:, b])
            vals.append(areas * np.einsum("ij,ij->i", grads[:, a], grads[:, b]))
    return SparseLinearSystem(
        dimension=mesh.n_vertices,
        rows=np.concatenate(rows),
        cols=np.concatenate(cols),
        values=np.concatenate(vals),
    )


def divergence(mesh, field):
    """Discrete divergence of a per-face vector field, at vertices.

    ``field`` is (F, 3); components normal to each face are projected out
    first, so non-tangential guidance fields stay well-defined.
    """
    field = np.asarray(field, dtype=np.float64)
    if field.shape != (mesh.n_faces, 3):
        raise ShapeError(
            f"field shape {field.shape} does not match ({mesh.n_faces}, 3)"
        )
    grads, areas = hat_gradients(mesh)
    normals = mesh.face_normals()
    tangential = field - normals * np.einsum("ij,ij->i", field, normals)[:, None]
    div = np.zeros(mesh.n_vertices)
    for k in range(3):
        contrib = areas * np.einsum("ij,ij->i", grads[:, k], tangential)
        np.add.at(div, mesh.faces[:, k], contrib)
    return div
