"""Forward renders: gradient-condition image sets and ground-truth buffers.

Geometry (hit points, normals, depth) is resolved once per camera, then
each illumination condition is a cheap shading pass over the buffers.
The Lambertian term uses the closed-form gradient integral in continuous
mode, making the ratio-based normal estimators exact on noiseless
renders; the specular term samples the lobe around the ideal mirror
direction of the distant-viewer view vector (0, 0, 1).
"""

from dataclasses import dataclass

import numpy as np

from ..photometrics import GradientSet, ImageGrid, rasterize
from ..photometrics.gradients import CONDITIONS, VIEW_VECTOR, reflect
from .scene import MeshSurface

# -- geometry buffers ----------------------------------------------------------


@dataclass
class GeometryBuffers:
    mask: np.ndarray          # (H, W) bool
    points: np.ndarray        # (H, W, 3) world-space hit points
    normals_world: np.ndarray # (H, W, 3) unit normals
    depth: np.ndarray         # (H, W) distance along the view axis


def camera_rays(cam):
    """World-space origin and per-pixel unit ray directions."""
    ys, xs = np.mgrid[0:cam.height, 0:cam.width].astype(np.float64)
    d_cam = np.stack(
        [(xs - cam.cx) / cam.fx, -(ys - cam.cy) / cam.fy, -np.ones_like(xs)],
        axis=2,
    )
    d_cam /= np.linalg.norm(d_cam, axis=2, keepdims=True)
    d_world = d_cam @ cam.R  # R^T applied per pixel
    return cam.position(), d_world


def resolve_geometry(scene, cam):
    """Hit points, normals and depth of the scene surface from one camera."""
    surface = scene.surface
    if isinstance(surface, MeshSurface):
        raster = rasterize(surface.mesh, cam)
        mask = raster.mask
        points = np.zeros(mask.shape + (3,))
        normals = np.zeros(mask.shape + (3,))
        if mask.any():
            points = raster.interpolate(surface.mesh, surface.mesh.vertices)
            normals = raster.interpolate(surface.mesh, surface._vnormals)
            lens = np.linalg.norm(normals[mask], axis=1, keepdims=True)
            lens[lens == 0] = 1.0
            normals[mask] /= lens
        depth = np.where(mask, raster.depth, 0.0)
        return GeometryBuffers(mask.copy(), points, normals, depth)

    origin, dirs = camera_rays(cam)
    t, hit = surface.raycast(origin, dirs)
    points = np.zeros(dirs.shape)
    normals = np.zeros(dirs.shape)
    points[hit] = origin + t[hit, None] * dirs[hit]
    normals[hit] = surface.normals(points[hit])
    # depth is distance along the optical axis, matching the rasterizer
    axis = -cam.R[2]  # view direction in world space
    depth = np.zeros(t.shape)
    depth[hit] = (points[hit] - origin) @ axis
    return GeometryBuffers(hit, points, normals, depth)


# -- renders -------------------------------------------------------------------


def render_gradient_set(scene, cam, rig, reflectance="both"):
    """Render the 7-condition sequence in both polarization states.

    Returns (cross, parallel): cross holds Lambertian radiance only,
    parallel adds the specular lobe.  ``reflectance`` selects which
    components are non-zero ('lambertian', 'specular' or 'both').
    """
    if reflectance not in ("lambertian", "specular", "both"):
        raise ValueError(f"unknown reflectance {reflectance!r}")
    geo = resolve_geometry(scene, cam)
    m = geo.mask
    n_view = geo.normals_world @ cam.R.T
    albedo = np.zeros(m.shape + (3,))
    if m.any():
        albedo[m] = scene.material.diffuse_at(geo.points[m])
    want_lam = reflectance in ("lambertian", "both")
    want_spec = reflectance in ("specular", "both")
    spec_albedo = scene.material.specular_albedo if want_spec else 0.0
    refl = reflect(VIEW_VECTOR, n_view[m]) if m.any() else np.zeros((0, 3))

    cross_imgs, parallel_imgs = {}, {}
    for cond in CONDITIONS:
        lam = np.zeros(m.shape + (3,))
        if want_lam and m.any():
            gain = rig.lambertian_gain(cond, n_view[m])
            lam[m] = albedo[m] * gain[:, None]
        spec = np.zeros(m.shape + (3,))
        if want_spec and spec_albedo > 0 and m.any():
            sgain = rig.specular_gain(cond, refl, scene.material.roughness)
            spec[m] = spec_albedo * sgain[:, None]
        cross_imgs[cond] = ImageGrid(lam, m.copy())
        parallel_imgs[cond] = ImageGrid(lam + spec, m.copy())
    cross = GradientSet(cross_imgs, "cross", view_id=0)
    parallel = GradientSet(parallel_imgs, "parallel", view_id=0)
    return cross, parallel


def render_ground_truth(scene, cam):
    """(depth, view-space normals, diffuse albedo) buffers for one camera."""
    geo = resolve_geometry(scene, cam)
    m = geo.mask
    n_view = geo.normals_world @ cam.R.T
    albedo = np.zeros(m.shape + (3,))
    if m.any():
        albedo[m] = scene.material.diffuse_at(geo.points[m])
    return (
        ImageGrid(geo.depth, m.copy()),
        ImageGrid(np.where(m[:, :, None], n_view, 0.0), m.copy()),
        ImageGrid(albedo, m.copy()),
    )
