"""Geodesic distances on the vertex-edge graph.

Distances are shortest edge-path lengths (Dijkstra with Euclidean edge
weights), an approximation of true polyhedral geodesics that preserves
the relative orderings the downstream segmentation needs.
"""

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ..errors import ValidationError


def _edge_graph(mesh, keep=None):
    """Adjacency with Euclidean weights, optionally restricted to a vertex set."""
    e = mesh.edges()
    if keep is not None and len(e):
        inside = keep[e[:, 0]] & keep[e[:, 1]]
        e = e[inside]
    if not len(e):
        return sparse.csr_matrix((mesh.n_vertices, mesh.n_vertices))
    lengths = np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)
    i = np.concatenate([e[:, 0], e[:, 1]])
    j = np.concatenate([e[:, 1], e[:, 0]])
    w = np.concatenate([lengths, lengths])
    return sparse.csr_matrix((w, (i, j)), shape=(mesh.n_vertices, mesh.n_vertices))


def geodesic_distances(mesh, sources, restriction=None):
    """Shortest edge-graph distance from any source to every vertex.

    Parameters
    ----------
    mesh : TriangleMesh
    sources : iterable of vertex indices (nonempty)
    restriction : iterable of vertex indices, optional
        If given, paths may only traverse vertices in this set and
        ``sources`` must be a subset of it.  Vertices outside the
        restriction (or unreachable) come back as ``inf``.

    Returns
    -------
    (N,) float array of distances; 0 at the sources.
    """
    sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    if sources.size == 0:
        raise ValidationError("geodesic_distances: empty source set")
    if sources.min() < 0 or sources.max() >= mesh.n_vertices:
        raise ValidationError("geodesic_distances: source index out of range")
    keep = None
    if restriction is not None:
        keep = np.zeros(mesh.n_vertices, dtype=bool)
        keep[np.asarray(list(restriction), dtype=np.int64)] = True
        if not keep[sources].all():
            raise ValidationError("geodesic_distances: sources not inside restriction")
    graph = _edge_graph(mesh, keep)
    dist = csgraph.dijkstra(graph, directed=False, indices=sources, min_only=True)
    if keep is not None:
        dist[~keep] = np.inf
    dist[sources] = 0.0
    return dist
