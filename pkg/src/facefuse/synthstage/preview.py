"""Cook-Torrance preview rendering with hybrid normals.

The diffuse term is shaded with diffuse-derived normals and the specular
term with specular-derived normals; the microfacet distribution is a
single-slope Beckmann, Fresnel is Schlick's approximation from the scene
refraction index.
"""

from dataclasses import dataclass, field

import numpy as np

from ..photometrics import ImageGrid, rasterize


@dataclass
class PointLight:
    position: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 10.0]))
    intensity: float = 1.0
    color: np.ndarray = field(default_factory=lambda: np.ones(3))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.color = np.asarray(self.color, dtype=np.float64)


def beckmann(cos_nh, roughness):
    m2 = max(roughness, 1e-4) ** 2
    c = np.clip(cos_nh, 1e-6, 1.0)
    c2 = c * c
    tan2 = (1.0 - c2) / c2
    return np.exp(-tan2 / m2) / (np.pi * m2 * c2 * c2)


def schlick_fresnel(cos_vh, ior):
    f0 = ((ior - 1.0) / (ior + 1.0)) ** 2
    return f0 + (1.0 - f0) * (1.0 - np.clip(cos_vh, 0.0, 1.0)) ** 5


def render_preview(mesh, cam, light, diffuse_normals=None, specular_normals=None,
                   roughness=0.3, ior=1.45):
    """Shade a mesh carrying stitched attributes from one camera.

    ``diffuse_normals`` / ``specular_normals`` are (N, 3) per-vertex
    arrays; they default to the 'vector:diffuse_normal' / 'normal'
    attributes, then to geometric vertex normals.  Colors come from the
    'color' attribute, specular albedo from 'scalar:spec' (default 0).
    """
    if diffuse_normals is None:
        diffuse_normals = mesh.attributes.get("vector:diffuse_normal")
    if diffuse_normals is None:
        diffuse_normals = mesh.attributes.get("normal")
    if diffuse_normals is None:
        diffuse_normals = mesh.vertex_normals()
    if specular_normals is None:
        specular_normals = mesh.attributes.get("normal")
    if specular_normals is None:
        specular_normals = diffuse_normals
    color = mesh.attributes.get("color")
    if color is None:
        color = np.full((mesh.n_vertices, 3), 0.5)
    spec_albedo = mesh.attributes.get("scalar:spec")
    if spec_albedo is None:
        spec_albedo = np.zeros(mesh.n_vertices)

    raster = rasterize(mesh, cam)
    m = raster.mask
    out = np.zeros(m.shape + (3,))
    if not m.any():
        return ImageGrid(out, m)

    pts = raster.interpolate(mesh, mesh.vertices)[m]
    alb = np.clip(raster.interpolate(mesh, color)[m], 0.0, None)
    spec = np.clip(raster.interpolate(mesh, np.asarray(spec_albedo))[m], 0.0, None)
    nd = _unit(raster.interpolate(mesh, np.asarray(diffuse_normals))[m])
    ns = _unit(raster.interpolate(mesh, np.asarray(specular_normals))[m])

    l = _unit(light.position - pts)
    v = _unit(cam.position() - pts)
    radiance = light.intensity * light.color

    ndl = np.clip(np.einsum("pc,pc->p", nd, l), 0.0, None)
    shade = alb / np.pi * ndl[:, None] * radiance

    h = _unit(l + v)
    nsl = np.clip(np.einsum("pc,pc->p", ns, l), 0.0, None)
    nsv = np.clip(np.einsum("pc,pc->p", ns, v), 0.0, None)
    nsh = np.clip(np.einsum("pc,pc->p", ns, h), 0.0, None)
    vh = np.clip(np.einsum("pc,pc->p", v, h), 1e-6, None)
    d = beckmann(nsh, roughness)
    f = schlick_fresnel(vh, ior)
    g = np.minimum(1.0, np.minimum(2.0 * nsh * nsv / vh, 2.0 * nsh * nsl / vh))
    lit = (nsl > 0) & (nsv > 0)
    ct = np.zeros(len(pts))
    ct[lit] = (d * f * g)[lit] / (4.0 * nsv[lit])
    shade = shade + (spec * ct)[:, None] * radiance

    out[m] = np.maximum(shade, 0.0)
    return ImageGrid(out, m)


def _unit(vecs):
    lens = np.linalg.norm(vecs, axis=-1, keepdims=True)
    lens[lens == 0] = 1.0
    return vecs / lens
