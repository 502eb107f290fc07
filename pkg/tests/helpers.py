"""Shared fixtures-by-function for stitching and acceptance tests."""

import numpy as np

from facefuse.poissonstitch import ViewObservation, sample_views
from facefuse.synthstage import render_ground_truth


def full_observation(mesh, view_id=0, **channels):
    """Observation seeing every vertex head-on with the given samples."""
    n = mesh.n_vertices
    return ViewObservation(
        view_id,
        np.ones(n, dtype=bool),
        np.zeros(n),
        np.zeros(mesh.n_faces),
        {k: np.asarray(v, dtype=np.float64) for k, v in channels.items()},
    )


def head_albedo_observations(head, corrupt_view=None, offset=0.0):
    """Sample ground-truth albedo renders of the photometric views onto the
    base mesh, optionally corrupting one view by a constant offset
    (scalar or per-channel vector)."""
    cams = head.photometric_cameras()
    images = []
    for i, cam in enumerate(cams):
        _, _, albedo = render_ground_truth(head.scene, cam)
        if corrupt_view is not None and i == corrupt_view:
            albedo.data[albedo.mask] += np.asarray(offset, dtype=np.float64)
        images.append({"diffuse_albedo": albedo})
    return sample_views(head.base_mesh, cams, images)


def observed_anywhere(observations):
    out = np.zeros_like(observations[0].vertex_observed)
    for obs in observations:
        out |= obs.vertex_observed
    return out


def true_albedo_at(head, vertices):
    return head.material.diffuse_at(vertices)
