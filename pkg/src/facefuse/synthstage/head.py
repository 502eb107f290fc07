"""Synthetic multi-pose capture target: a bumpy face-like sheet.

The "head" is a spherical sheet (limited azimuth and elevation) with a
sinusoidal radial bump field and a smooth procedural albedo, captured by
three photometric poses (frontal and two profiles) with seven auxiliary
cameras each, mirroring a frontal/left/right protocol with 8 simultaneous
views per pose, 24 effective views.  A coarsened, jittered sampling of
the same surface stands in for the multiview-stereo base mesh.
"""

from dataclasses import dataclass

import numpy as np

from ..meshkit import TriangleMesh
from ..photometrics import Camera
from .scene import Material, MeshSurface, Scene, bump_field, smooth_albedo

HEAD_RADIUS = 1.0
PHI_EXTENT = np.radians(85.0)   # azimuth half-range (ear to ear)
PSI_EXTENT = np.radians(40.0)   # elevation half-range
BUMP_AMPLITUDE = 0.012
BUMP_FREQUENCY = 9.0
POSE_AZIMUTHS_DEG = (0.0, 58.0, -58.0)
CAMERA_DISTANCE = 8.0
VIEWS_PER_POSE = 8


def face_sheet_mesh(n_phi, n_psi, amplitude=BUMP_AMPLITUDE, frequency=BUMP_FREQUENCY,
                    jitter=0.0, seed=0):
    """Spherical sheet sampled on a (psi, phi) grid with radial bumps."""
    phis = np.linspace(-PHI_EXTENT, PHI_EXTENT, n_phi)
    psis = np.linspace(-PSI_EXTENT, PSI_EXTENT, n_psi)
    psi, phi = np.meshgrid(psis, phis, indexing="ij")
    dirs = np.stack(
        [np.cos(psi) * np.sin(phi), np.sin(psi), np.cos(psi) * np.cos(phi)],
        axis=-1,
    ).reshape(-1, 3)
    r = HEAD_RADIUS * (1.0 + amplitude * bump_field(dirs, frequency))
    verts = dirs * r[:, None]

    faces = []
    for i in range(n_psi - 1):
        for j in range(n_phi - 1):
            a = i * n_phi + j
            b = a + 1
            c = a + n_phi
            d = c + 1
            faces.append((a, b, d))
            faces.append((a, d, c))
    mesh = TriangleMesh(verts, np.asarray(faces, dtype=np.int64))
    # orient outward (away from the sphere center)
    vn = mesh.vertex_normals()
    if np.einsum("nc,nc->n", vn, dirs).mean() < 0:
        mesh = TriangleMesh(verts, mesh.faces[:, ::-1].copy())
    if jitter > 0:
        rng = np.random.default_rng(seed)
        scale = jitter * mesh.bbox_diagonal()
        mesh = TriangleMesh(mesh.vertices + scale * rng.standard_normal(mesh.vertices.shape),
                            mesh.faces)
    return mesh


@dataclass
class TestHead:
    scene: Scene
    cameras: list
    photometric_ids: list
    pose_of_view: list
    base_mesh: TriangleMesh
    gt_mesh: TriangleMesh
    material: Material = None

    def photometric_cameras(self):
        return [self.cameras[i] for i in self.photometric_ids]


def make_test_head(resolution=384, gt_grid=(97, 129), base_grid=(25, 33),
                   base_jitter=0.005, seed=7):
    """Scene plus 3-pose camera rigs for the synthetic capture protocol.

    ``gt_grid`` / ``base_grid`` are (n_psi, n_phi) sheet resolutions; the
    base mesh is the coarse jittered stand-in for multiview stereo.
    """
    gt_mesh = face_sheet_mesh(gt_grid[1], gt_grid[0])
    base_mesh = face_sheet_mesh(base_grid[1], base_grid[0], jitter=base_jitter, seed=seed)
    material = Material(diffuse=smooth_albedo(), specular_albedo=0.35,
                        roughness=0.3, ior=1.45)

    rng = np.random.default_rng(seed + 1)
    cameras = []
    photometric_ids = []
    pose_of_view = []
    fov = 17.0
    for pose, az_deg in enumerate(POSE_AZIMUTHS_DEG):
        az = np.radians(az_deg)
        offsets = [(0.0, 0.0)]  # the photometric camera sits exactly on the pose axis
        while len(offsets) < VIEWS_PER_POSE:
            offsets.append((float(rng.uniform(-18, 18)), float(rng.uniform(-10, 10))))
        for k, (d_az_deg, d_el_deg) in enumerate(offsets):
            a = az + np.radians(d_az_deg)
            e = np.radians(d_el_deg)
            pos = CAMERA_DISTANCE * np.array(
                [np.cos(e) * np.sin(a), np.sin(e), np.cos(e) * np.cos(a)]
            )
            cam = Camera.look_at(pos, (0.0, 0.0, 0.0), fov_deg=fov,
                                 width=resolution, height=resolution)
            if k == 0:
                photometric_ids.append(len(cameras))
            pose_of_view.append(pose)
            cameras.append(cam)

    scene = Scene(MeshSurface(gt_mesh), material, cameras)
    return TestHead(scene, cameras, photometric_ids, pose_of_view,
                    base_mesh, gt_mesh, material)
