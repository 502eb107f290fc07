"""Per-patch source-view ranking and the Fresnel-gain safety check."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError

FRESNEL_THRESHOLD_DEG = 60.0


@dataclass
class ViewSelection:
    """Views ranked per patch by mean viewing angle (ascending).

    ``ranking[m]`` is the fallback chain for patch m; its first entry is
    the primary view.  ``mean_angles[m, v]`` is the patch-mean viewing
    angle of view v (radians; unobserved vertices count as pi/2).
    """

    ranking: np.ndarray       # (M, V) int
    mean_angles: np.ndarray   # (M, V) float
    unobserved_patches: list = field(default_factory=list)

    def primary(self, m):
        return int(self.ranking[m, 0])

    @property
    def n_views(self):
        return self.mean_angles.shape[1]


def select_patch_views(seg, observations):
    """Rank views per patch by mean per-vertex viewing angle."""
    if not observations:
        raise ValidationError("select_patch_views: no views given")
    m_count = seg.n_patches
    v_count = len(observations)
    mean_angles = np.full((m_count, v_count), np.pi / 2)
    for m in range(m_count):
        verts = seg.patch_vertices(m)
        for v, obs in enumerate(observations):
            mean_angles[m, v] = obs.vertex_angle[verts].mean()
    ranking = np.argsort(mean_angles, axis=1, kind="stable").astype(np.int64)
    unobserved = []
    for m in range(m_count):
        verts = seg.patch_vertices(m)
        if not any(obs.vertex_observed[verts].any() for obs in observations):
            unobserved.append(m)
    return ViewSelection(ranking, mean_angles, unobserved)


@dataclass
class FresnelReport:
    """Per-patch selected view and mean angle, with grazing-angle flags."""

    patch_view: np.ndarray        # (M,) selected primary view
    patch_angle_deg: np.ndarray   # (M,) its mean viewing angle
    flagged: np.ndarray           # (M,) bool, True = Fresnel-unsafe
    threshold_deg: float = FRESNEL_THRESHOLD_DEG

    @property
    def unsafe_count(self):
        return int(self.flagged.sum())


def fresnel_safe_check(seg, selection, observations, threshold_deg=FRESNEL_THRESHOLD_DEG):
    """Flag patches whose selected view still sees them at grazing angles.

    Least-angle selection avoids Fresnel gain only if some view observes
    each patch well; this reports the patches where that failed.
    """
    m_count = seg.n_patches
    patch_view = np.array([selection.primary(m) for m in range(m_count)])
    angles = np.degrees(selection.mean_angles[np.arange(m_count), patch_view])
    flagged = angles > threshold_deg
    return FresnelReport(patch_view, angles, flagged, threshold_deg)
