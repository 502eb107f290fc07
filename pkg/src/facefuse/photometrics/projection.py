"""Z-buffer rasterization of meshes into camera views."""

import warnings
from dataclasses import dataclass

import numpy as np

from .grids import ImageGrid


@dataclass
class RasterResult:
    """Per-pixel hit data from rasterizing one mesh into one camera."""

    face: np.ndarray        # (H, W) int32, -1 where no hit
    bary: np.ndarray        # (H, W, 3) perspective-correct barycentrics
    depth: np.ndarray       # (H, W) float, inf where no hit
    mask: np.ndarray        # (H, W) bool

    def interpolate(self, mesh, values):
        """Barycentric interpolation of per-vertex ``values`` ((N,) or (N, C))."""
        vals = np.asarray(values, dtype=np.float64)
        flat = vals[:, None] if vals.ndim == 1 else vals
        out = np.zeros(self.face.shape + (flat.shape[1],))
        m = self.mask
        corners = mesh.faces[self.face[m]]           # (P, 3)
        w = self.bary[m]                             # (P, 3)
        out[m] = np.einsum("pk,pkc->pc", w, flat[corners])
        return out if vals.ndim > 1 else out[:, :, 0]


def rasterize(mesh, cam, near=1e-9):
    """Render face ids, barycentrics and depth for ``mesh`` seen by ``cam``."""
    h, w = cam.height, cam.width
    face_id = np.full((h, w), -1, dtype=np.int32)
    bary = np.zeros((h, w, 3))
    depth = np.full((h, w), np.inf)

    pts = cam.world_to_camera(mesh.vertices)
    u, v, d = cam.project_camera(pts)
    tri_u, tri_v, tri_d = u[mesh.faces], v[mesh.faces], d[mesh.faces]

    in_front = (tri_d > near).all(axis=1)
    for l in np.nonzero(in_front)[0]:
        us, vs, ds = tri_u[l], tri_v[l], tri_d[l]
        x0 = max(int(np.floor(us.min())), 0)
        x1 = min(int(np.ceil(us.max())), w - 1)
        y0 = max(int(np.floor(vs.min())), 0)
        y1 = min(int(np.ceil(vs.max())), h - 1)
        if x1 < x0 or y1 < y0:
            continue
        denom = (us[1] - us[0]) * (vs[2] - vs[0]) - (us[2] - us[0]) * (vs[1] - vs[0])
        if abs(denom) < 1e-12:
            continue
        gy, gx = np.mgrid[y0:y1 + 1, x0:x1 + 1]
        px = gx - us[0]
        py = gy - vs[0]
        w1 = (px * (vs[2] - vs[0]) - py * (us[2] - us[0])) / denom
        w2 = (py * (us[1] - us[0]) - px * (vs[1] - vs[0])) / denom
        w0 = 1.0 - w1 - w2
        inside = (w0 >= -1e-9) & (w1 >= -1e-9) & (w2 >= -1e-9)
        if not inside.any():
            continue
        # perspective-correct: weight screen barycentrics by 1/depth
        inv = w0 / ds[0] + w1 / ds[1] + w2 / ds[2]
        z = 1.0 / inv
        closer = inside & (z < depth[y0:y1 + 1, x0:x1 + 1])
        if not closer.any():
            continue
        yy, xx = np.nonzero(closer)
        rows, cols = yy + y0, xx + x0
        depth[rows, cols] = z[yy, xx]
        face_id[rows, cols] = l
        zz = z[yy, xx]
        bary[rows, cols, 0] = w0[yy, xx] / ds[0] * zz
        bary[rows, cols, 1] = w1[yy, xx] / ds[1] * zz
        bary[rows, cols, 2] = w2[yy, xx] / ds[2] * zz

    return RasterResult(face_id, bary, depth, face_id >= 0)


def project_depth_normals(mesh, cam):
    """Depth map and camera-space geometric normals of the visible surface.

    Returns (normals ImageGrid, depth ImageGrid, mask).  Normals are
    per-face (flat) normals rotated into camera space and oriented toward
    the camera; an empty mask only warns.
    """
    raster = rasterize(mesh, cam)
    if not raster.mask.any():
        warnings.warn("project_depth_normals: mesh not visible from camera")
    n_cam_faces = mesh.face_normals() @ cam.R.T
    normals = np.zeros(raster.face.shape + (3,))
    m = raster.mask
    normals[m] = n_cam_faces[raster.face[m]]
    # orient toward the camera: hit point direction is -p_cam
    pts_world = _hit_points(mesh, raster)
    p_cam = np.zeros_like(normals)
    p_cam[m] = cam.world_to_camera(pts_world[m])
    flip = m & (np.einsum("hwc,hwc->hw", normals, -p_cam) < 0)
    normals[flip] *= -1.0
    depth = np.where(m, raster.depth, 0.0)
    return ImageGrid(normals, m.copy()), ImageGrid(depth, m.copy()), m.copy()


def _hit_points(mesh, raster):
    out = np.zeros(raster.face.shape + (3,))
    m = raster.mask
    corners = mesh.vertices[mesh.faces[raster.face[m]]]
    out[m] = np.einsum("pk,pkc->pc", raster.bary[m], corners)
    return out


def to_world_normals(normals, cam):
    """Rotate a camera-space normal map into world space."""
    grid = normals if isinstance(normals, ImageGrid) else ImageGrid(normals)
    data = grid.data @ cam.R  # == (R^T n)^T per pixel
    return ImageGrid(data, grid.mask.copy())
