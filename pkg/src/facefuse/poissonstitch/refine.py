"""Normal-guided mesh refinement.

Cotangent Laplacian coordinates are parallel to the surface normal, so
"match these unit target normals" linearizes as a zero cross product:
[n_i]_x sum_j w_ij (v_i - v_j) = 0, three equations per constrained
vertex.  Solving all of them jointly with a low-weight screening term
toward the base vertices transfers normal-map detail onto the mesh while
pinning scale and position.  Weights stay frozen at base-mesh geometry,
keeping the system linear.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..errors import NumericalError
from ..meshkit import assemble_laplace
from .guidance import grown_membership
from .selection import select_patch_views
from .solve import relative_residual

RANK_PIVOT_LIMIT = 1e-12


def cot_laplacian(mesh, laplace=None):
    """Full cotangent Laplacian: diag(sum_j w_ij) - W (twice the stiffness)."""
    if laplace is None:
        laplace = assemble_laplace(mesh)
    return (2.0 * laplace.to_csr()).tocsr()


def select_vertex_targets(seg, observations, selection=None, channel="normal"):
    """Per-vertex target normals by least viewing angle over covering patches.

    Every vertex belongs to its own patch's grown set and possibly to
    neighbors' overlaps; each covering patch proposes its first ranked
    view observing the vertex, and the smallest per-vertex angle wins.
    Returns (targets (N, 3), has_target (N,), view_of_vertex (N,)).
    """
    if selection is None:
        selection = select_patch_views(seg, observations)
    n = len(seg.patch_of)
    member = grown_membership(seg, n)
    targets = np.zeros((n, 3))
    view_of = np.full(n, -1, dtype=np.int64)
    best_angle = np.full(n, np.inf)
    for m in range(seg.n_patches):
        inside = np.nonzero(member[m])[0]
        remaining = np.ones(len(inside), dtype=bool)
        for v in selection.ranking[m]:
            obs = observations[v]
            cand = remaining & obs.vertex_observed[inside]
            idx = inside[cand]
            better = obs.vertex_angle[idx] < best_angle[idx]
            upd = idx[better]
            targets[upd] = obs.samples[channel][upd]
            view_of[upd] = obs.view_id if np.isscalar(obs.view_id) else v
            best_angle[upd] = obs.vertex_angle[upd]
            remaining &= ~cand
            if not remaining.any():
                break
    has = view_of >= 0
    lens = np.linalg.norm(targets[has], axis=1, keepdims=True)
    lens[lens == 0] = 1.0
    targets[has] /= lens
    return targets, has, view_of


def laplacian_normals(mesh, laplace=None, orient_to=None):
    """Unit directions of the cotangent Laplacian coordinates.

    This is the normal notion the refinement objective controls (the
    Laplacian coordinate is parallel to the surface normal up to scale).
    ``orient_to`` (N, 3) flips each direction into the reference's
    hemisphere, removing the sign ambiguity.
    """
    lap = cot_laplacian(mesh, laplace)
    d = lap @ mesh.vertices
    lens = np.linalg.norm(d, axis=1, keepdims=True)
    lens[lens == 0] = 1.0
    d = d / lens
    if orient_to is not None:
        flip = np.einsum("nc,nc->n", d, orient_to) < 0
        d[flip] *= -1.0
    return d


def cross_rows(laplacian, targets, has_target):
    """Sparse (3N, 3N) stack of [n_i]_x L_i. blocks for constrained vertices."""
    coo = laplacian.tocoo()
    keep = has_target[coo.row]
    i, j, w = coo.row[keep], coo.col[keep], coo.data[keep]
    n1, n2, n3 = targets[i, 0], targets[i, 1], targets[i, 2]
    rows = np.concatenate([3 * i, 3 * i, 3 * i + 1, 3 * i + 1, 3 * i + 2, 3 * i + 2])
    cols = np.concatenate([3 * j + 1, 3 * j + 2, 3 * j, 3 * j + 2, 3 * j, 3 * j + 1])
    vals = np.concatenate([-n3 * w, n2 * w, n3 * w, -n1 * w, -n2 * w, n1 * w])
    size = 3 * laplacian.shape[0]
    return sparse.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()


def cross_objective(laplacian, targets, has_target, vertices):
    """sum_i || [n_i]_x (L v)_i ||^2 over constrained vertices."""
    delta = laplacian @ vertices
    c = np.cross(targets[has_target], delta[has_target])
    return float(np.einsum("pc,pc->", c, c))


def default_screen_weight(laplacian):
    """1e-4 times the mean Laplacian row norm: 'very low' detail-preserving."""
    sq = laplacian.multiply(laplacian).sum(axis=1)
    return 1e-4 * float(np.sqrt(np.asarray(sq).ravel()).mean())


@dataclass
class RefineResult:
    mesh: object
    residual: float
    objective_before: float
    objective_after: float
    constrained: int
    lambda_screen: float


def refine_mesh(mesh, seg, observations, lambda_screen=None, channel="normal",
                selection=None, laplace=None):
    """Move vertices so cotangent Laplacians align with selected normals.

    Solves (M^T M + lambda I) x = lambda x_base where M stacks the
    per-vertex cross-product rows; vertices without targets contribute
    screening rows only.  Connectivity is untouched.
    """
    lap = cot_laplacian(mesh, laplace)
    targets, has, _ = select_vertex_targets(seg, observations, selection, channel)
    if lambda_screen is None:
        lambda_screen = default_screen_weight(lap)
    m_rows = cross_rows(lap, targets, has)
    n3 = 3 * mesh.n_vertices
    lhs = (m_rows.T @ m_rows + lambda_screen * sparse.eye(n3)).tocsc()
    x_base = mesh.vertices.reshape(-1)
    rhs = lambda_screen * x_base
    try:
        lu = splu(lhs)
    except RuntimeError as exc:
        raise NumericalError(f"refinement factorization failed: {exc}") from None
    piv = np.abs(lu.U.diagonal())
    if piv.min() < RANK_PIVOT_LIMIT * piv.max():
        raise NumericalError(
            f"refinement normal equations rank deficient "
            f"(relative pivot {piv.min() / piv.max():.2e})"
        )
    x = lu.solve(rhs)
    x += lu.solve(rhs - lhs @ x)
    res = relative_residual(lhs, x, rhs)
    if res > 1e-8:
        raise NumericalError(f"refinement solve residual {res:.3e} too large")
    verts = x.reshape(-1, 3)
    return RefineResult(
        mesh.with_vertices(verts),
        float(res),
        cross_objective(lap, targets, has, mesh.vertices),
        cross_objective(lap, targets, has, verts),
        int(has.sum()),
        float(lambda_screen),
    )
