"""Per-face guidance fields for texture stitching."""

from dataclasses import dataclass

import numpy as np

from ..meshkit import hat_gradients


@dataclass
class GuidanceField:
    """Per-face texture gradients plus the screening guide.

    ``face_vectors`` is (F, 3, C); ``face_view`` the source view per face
    (-1 for zero-filled unobserved faces); ``screening_guide`` the
    per-vertex mean of observed views with ``guide_weight`` 0 where no
    view observed a vertex (those rows drop out of the regularization).
    """

    face_vectors: np.ndarray
    face_view: np.ndarray
    fill: np.ndarray
    screening_guide: np.ndarray
    guide_weight: np.ndarray


def grown_membership(seg, n_vertices):
    """(M, N) bool: vertex in grown patch Q_m."""
    m_count = seg.n_patches
    member = np.zeros((m_count, n_vertices), dtype=bool)
    for m in range(m_count):
        member[m, seg.grown_patch(m)] = True
    return member


def face_source_views(mesh, seg, observations, selection):
    """Source view per face: patch-primary inside a single grown patch,
    per-face least angle where grown patches overlap.

    Faces fully inside exactly one Q_m take that patch's ranked chain;
    faces covered by several grown patches compare those patches' chains
    by per-face viewing angle.  A patch's chain contributes its first
    view that observes the whole face.  Returns (F,) view labels, -1
    where no view observes the face.
    """
    member = grown_membership(seg, mesh.n_vertices)
    face_in_q = member[:, mesh.faces].all(axis=2)   # (M, F)
    labels = np.full(mesh.n_faces, -1, dtype=np.int64)
    for l in range(mesh.n_faces):
        covering = np.nonzero(face_in_q[:, l])[0]
        if covering.size == 0:
            covering = np.unique(seg.patch_of[mesh.faces[l]])
        best = None
        for m in covering:
            for v in selection.ranking[m]:
                obs = observations[v]
                if obs.face_observed[l]:
                    cand = (obs.face_angle[l], int(v))
                    if best is None or cand < best:
                        best = cand
                    break
        if best is not None:
            labels[l] = best[1]
    return labels


def build_texture_guidance(mesh, seg, observations, selection, channel):
    """Gradient guidance for one sampled channel, plus the screening guide.

    Per-face gradients come from the face's source view's vertex samples
    through the hat-function gradients; unobserved faces get zero
    gradients (fill), and the screening guide averages every observing
    view per vertex.
    """
    labels = face_source_views(mesh, seg, observations, selection)
    grads, _ = hat_gradients(mesh)
    channels = observations[0].samples[channel].shape[1]
    vectors = np.zeros((mesh.n_faces, 3, channels))
    for v in np.unique(labels):
        if v < 0:
            continue
        sel = labels == v
        phi = observations[v].samples[channel][mesh.faces[sel]]   # (f, 3, C)
        vectors[sel] = np.einsum("fkj,fkc->fjc", grads[sel], phi)
    fill = labels < 0

    guide = np.zeros((mesh.n_vertices, channels))
    weight = np.zeros(mesh.n_vertices)
    for obs in observations:
        o = obs.vertex_observed
        guide[o] += obs.samples[channel][o]
        weight[o] += 1.0
    has = weight > 0
    guide[has] /= weight[has][:, None]
    return GuidanceField(vectors, labels, fill, guide, has.astype(np.float64))
