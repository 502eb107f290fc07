"""Back-projection of per-view images onto base-mesh vertices."""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import ValidationError
from ..photometrics import ImageGrid, rasterize


@dataclass
class ViewObservation:
    """What one view contributes: per-vertex samples, visibility, angles.

    Unobserved vertices (occluded, out of frame, or masked out) carry a
    viewing angle of exactly pi/2; ``samples`` maps channel names to
    (N, C) arrays, valid only where ``vertex_observed``.
    """

    view_id: int
    vertex_observed: np.ndarray          # (N,) bool
    vertex_angle: np.ndarray             # (N,) float, pi/2 if unobserved
    face_angle: np.ndarray               # (F,) float, pi/2 if unobserved
    samples: dict = field(default_factory=dict)
    face_observed: np.ndarray = None     # (F,) bool; derived if omitted

    def __post_init__(self):
        if self.face_observed is None:
            self.face_observed = self.face_angle < np.pi / 2


def pad_valid_region(grid, radius):
    """Extend an image ``radius`` px past its mask with nearest-valid values.

    The base mesh overhangs the photographed silhouette wherever it is
    noisy; a small nearest-neighbor pad keeps those boundary vertices
    sampled instead of dropping them.
    """
    if radius <= 0 or grid.mask.all() or not grid.mask.any():
        return grid
    dist, (iy, ix) = ndimage.distance_transform_edt(~grid.mask, return_indices=True)
    grow = (~grid.mask) & (dist <= radius)
    data = grid.data.copy()
    data[grow] = grid.data[iy[grow], ix[grow]]
    return ImageGrid(data, grid.mask | grow)


def _bilinear(grid, u, v, min_weight=0.25):
    """Mask-weighted bilinear sampling at continuous pixel coords.

    Invalid pixels are excluded from the interpolation (weights
    renormalized over valid neighbors), so mesh-boundary vertices sitting
    on the rendered silhouette still sample correctly.  Returns
    (values, valid) with valid requiring ``min_weight`` of valid support.
    """
    h, w = grid.height, grid.width
    x = np.clip(u, 0.0, w - 1.0)
    y = np.clip(v, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    d = grid.data
    m = grid.mask.astype(np.float64)
    vals = np.zeros((len(x),) + d.shape[2:])
    wsum = np.zeros(len(x))
    for yy, xx, wgt in (
        (y0, x0, (1 - fx) * (1 - fy)),
        (y0, x1, fx * (1 - fy)),
        (y1, x0, (1 - fx) * fy),
        (y1, x1, fx * fy),
    ):
        wm = wgt * m[yy, xx]
        vals += wm[:, None] * d[yy, xx]
        wsum += wm
    ok = wsum > min_weight
    vals[ok] /= wsum[ok][:, None]
    inside = (u >= 0) & (u <= w - 1) & (v >= 0) & (v <= h - 1)
    return vals, inside & ok


def sample_view(mesh, cam, images, view_id=0, depth_tolerance=1e-3, mask_pad=3):
    """Observation of one view: z-buffer visibility, bilinear samples, angles.

    ``images`` maps channel names to ImageGrids sharing the camera's
    dimensions.  Channels whose name contains 'normal' are renormalized
    after interpolation; image masks are padded by ``mask_pad`` px to
    tolerate base-mesh silhouette overhang.
    """
    images = {name: pad_valid_region(grid, mask_pad) for name, grid in images.items()}
    raster = rasterize(mesh, cam)
    u, v, depth = cam.project(mesh.vertices)

    in_front = depth > 0
    # compare against the farthest z-buffer value among the 2x2 neighboring
    # pixels: grazing triangles change depth by whole tolerance widths per
    # pixel, and the vertex itself sits between pixel centers
    x0 = np.clip(np.floor(u), 0, cam.width - 1).astype(np.int64)
    y0 = np.clip(np.floor(v), 0, cam.height - 1).astype(np.int64)
    x1 = np.minimum(x0 + 1, cam.width - 1)
    y1 = np.minimum(y0 + 1, cam.height - 1)
    # a vertex whose own incident face wins a neighboring pixel is visible
    # outright; otherwise fall back to a tolerant depth comparison
    # (background pixels hide nothing)
    neighborhood = [(y0, x0), (y0, x1), (y1, x0), (y1, x1)]
    vid = np.arange(mesh.n_vertices)
    own_face = np.zeros(u.shape, dtype=bool)
    zbuf = np.full(u.shape, -np.inf)
    covered = np.zeros(u.shape, dtype=bool)
    for yy, xx in neighborhood:
        hit = raster.mask[yy, xx]
        f = raster.face[yy, xx]
        own_face |= hit & (mesh.faces[f] == vid[:, None]).any(axis=1)
        zbuf = np.where(hit, np.maximum(zbuf, raster.depth[yy, xx]), zbuf)
        covered |= hit
    tol = depth_tolerance * mesh.bbox_diagonal() + 1e-4 * np.abs(depth)
    visible = in_front & (own_face | (covered & (depth <= zbuf + tol)))
    visible &= (u >= 0) & (u <= cam.width - 1) & (v >= 0) & (v <= cam.height - 1)

    observed = visible.copy()
    samples = {}
    for name, grid in images.items():
        vals, ok = _bilinear(grid, u, v)
        observed &= ok
        samples[name] = vals
    for name in samples:
        samples[name][~observed] = 0.0
        if "normal" in name:
            lens = np.linalg.norm(samples[name][observed], axis=1, keepdims=True)
            lens[lens == 0] = 1.0
            samples[name][observed] /= lens

    to_cam = cam.position() - mesh.vertices
    to_cam /= np.maximum(np.linalg.norm(to_cam, axis=1, keepdims=True), 1e-300)
    vn = mesh.attributes.get("normal")
    if vn is None:
        vn = mesh.vertex_normals()
    cos = np.clip(np.einsum("nc,nc->n", vn, to_cam), 0.0, 1.0)
    vertex_angle = np.where(observed, np.arccos(cos), np.pi / 2)

    face_observed = observed[mesh.faces].all(axis=1)
    fc = mesh.face_centroids()
    fdir = cam.position() - fc
    fdir /= np.maximum(np.linalg.norm(fdir, axis=1, keepdims=True), 1e-300)
    fcos = np.clip(np.einsum("fc,fc->f", mesh.face_normals(), fdir), 0.0, 1.0)
    face_angle = np.where(face_observed, np.arccos(fcos), np.pi / 2)

    return ViewObservation(view_id, observed, vertex_angle, face_angle, samples,
                           face_observed)


def sample_views(mesh, cams, images_per_view, view_ids=None):
    """Observations for several views; ``images_per_view`` pairs with ``cams``."""
    if len(cams) != len(images_per_view):
        raise ValidationError(
            f"{len(cams)} cameras but {len(images_per_view)} image sets"
        )
    if view_ids is None:
        view_ids = list(range(len(cams)))
    return [sample_view(mesh, cam, imgs, vid)
            for cam, imgs, vid in zip(cams, images_per_view, view_ids)]
