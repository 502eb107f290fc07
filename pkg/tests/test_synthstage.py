import numpy as np
import pytest

from facefuse.meshkit import TriangleMesh
from facefuse.photometrics import Camera, angular_error_deg, lambertian_normals
from facefuse.synthstage import (
    BumpySphere,
    LightRig,
    Material,
    PointLight,
    Scene,
    Sphere,
    condition_gain,
    led_dome_directions,
    make_test_head,
    render_gradient_set,
    render_ground_truth,
    render_preview,
)


@pytest.fixture(scope="module")
def frontal_cam():
    return Camera.look_at((0, 0, 6), (0, 0, 0), fov_deg=22, width=160, height=160)


@pytest.fixture(scope="module")
def sphere_scene():
    return Scene(Sphere(radius=1.0),
                 Material(diffuse=np.array([0.7, 0.5, 0.4]), specular_albedo=0.4))


class TestRig:
    def test_condition_gains(self, rng):
        dirs = rng.standard_normal((50, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        for k, idx in (("X", 0), ("Y", 1), ("Z", 2)):
            g = condition_gain(k, dirs)
            assert np.allclose(g, (dirs[:, idx] + 1) / 2)
            assert np.allclose(condition_gain(k + "B", dirs), 1.0 - g)
        assert np.allclose(condition_gain("C", dirs), 1.0)

    def test_led_layout(self):
        dirs = led_dome_directions(41)
        assert dirs.shape == (41, 3)
        assert np.abs(np.linalg.norm(dirs, axis=1) - 1).max() < 1e-12
        assert np.array_equal(dirs, led_dome_directions(41))  # deterministic
        # dome opening: the dropped vertex was the bottom-most one
        assert dirs[:, 1].min() > -1.0 + 1e-6


class TestGradientRenders:
    def test_constant_condition_uniform_on_lambertian_sphere(self, frontal_cam):
        scene = Scene(Sphere(radius=1.0), Material(diffuse=np.ones(3), specular_albedo=0.0))
        cross, _ = render_gradient_set(scene, frontal_cam, LightRig.continuous(), "lambertian")
        c = cross["C"]
        vals = c.data[c.mask]
        assert np.abs(vals - 1.0).max() < 1e-6

    def test_complement_law_exact_both_modes(self, sphere_scene, frontal_cam):
        for rig in (LightRig.continuous(), LightRig.led41()):
            cross, parallel = render_gradient_set(sphere_scene, frontal_cam, rig)
            assert cross.complement_residual() < 1e-9
            assert parallel.complement_residual() < 1e-9

    def test_polarization_difference_is_pure_specular(self, sphere_scene, frontal_cam):
        rig = LightRig.continuous()
        cross, parallel = render_gradient_set(sphere_scene, frontal_cam, rig, "both")
        _, spec_only = render_gradient_set(sphere_scene, frontal_cam, rig, "specular")
        for k in ("X", "C", "ZB"):
            diff = parallel[k].data - cross[k].data
            assert np.abs(diff - spec_only[k].data).max() < 1e-9

    def test_ratio_inversion_exact(self, frontal_cam):
        scene = Scene(Sphere(radius=1.0), Material(diffuse=np.array([0.8, 0.6, 0.5]),
                                                   specular_albedo=0.0))
        cross, _ = render_gradient_set(scene, frontal_cam, LightRig.continuous(), "lambertian")
        n, _ = lambertian_normals(cross)
        gt = render_ground_truth(scene, frontal_cam)[1]
        err = angular_error_deg(n.data, gt.data, n.mask & gt.mask)
        assert err.max() < 1e-4

    def test_discrete_bias_present_and_pose_dependent(self):
        surf = BumpySphere(radius=1.0, amplitude=0.02, frequency=8.0)
        scene = Scene(surf, Material(diffuse=np.array([0.7, 0.5, 0.4]), specular_albedo=0.0))
        led = LightRig.led41()
        cams = [Camera.look_at((0, 0, 6), (0, 0, 0), fov_deg=22, width=128, height=128),
                Camera.look_at((6 * np.sin(0.5), 0, 6 * np.cos(0.5)), (0, 0, 0),
                               fov_deg=22, width=128, height=128)]
        biases = []
        for cam in cams:
            cross, _ = render_gradient_set(scene, cam, led, "lambertian")
            n, _ = lambertian_normals(cross)
            gt = render_ground_truth(scene, cam)[1]
            m = n.mask & gt.mask
            bias = np.where(m, angular_error_deg(n.data, gt.data), 0.0)
            biases.append((bias, m))
            assert bias[m].mean() > 0.1  # discretisation bias exists
        both = biases[0][1] & biases[1][1]
        diff = np.abs(biases[0][0] - biases[1][0])[both]
        assert diff.mean() > 0.05  # the bias field moved with the pose


class TestGroundTruth:
    def test_center_pixel_depth_and_normal(self):
        cam = Camera.look_at((0, 0, 6), (0, 0, 0), fov_deg=22, width=161, height=161)
        depth, normals, _ = render_ground_truth(Scene(Sphere(radius=1.0), Material()), cam)
        assert depth.data[80, 80, 0] == pytest.approx(5.0, abs=1e-9)
        assert np.allclose(normals.data[80, 80], (0, 0, 1), atol=1e-9)

    def test_checker_albedo_matches_procedural(self, frontal_cam):
        from facefuse.synthstage import checker_albedo, resolve_geometry
        fn = checker_albedo(scale=3.0)
        scene = Scene(Sphere(radius=1.0), Material(diffuse=fn))
        _, _, albedo = render_ground_truth(scene, frontal_cam)
        geo = resolve_geometry(scene, frontal_cam)
        m = albedo.mask
        assert np.abs(albedo.data[m] - fn(geo.points[m])).max() == 0.0


class TestPreview:
    def test_lambertian_limit(self):
        tri = TriangleMesh([(-4, -4, 0), (4, -4, 0), (0, 5, 0)], [(0, 1, 2)])
        tri.set_attribute("color", np.full((3, 3), 0.6))
        tri.set_attribute("normal", np.tile([0.0, 0.0, 1.0], (3, 1)))
        cam = Camera.look_at((0, 0, 4), (0, 0, 0), fov_deg=50, width=64, height=64)
        # light along the (diffuse) normal
        light = PointLight(position=(0, 0, 50.0), intensity=2.0)
        img = render_preview(tri, cam, light)
        m = img.mask
        expected = 0.6 * 2.0 / np.pi * 1.0  # albedo * intensity / pi, n.l ~ 1
        assert np.abs(img.data[m] - expected).max() < 2e-3

    def test_specular_peak_at_reflection(self):
        tri = TriangleMesh([(-6, -6, 0), (6, -6, 0), (0, 8, 0)], [(0, 1, 2)])
        tri.set_attribute("color", np.zeros((3, 3)))
        tri.set_attribute("normal", np.tile([0.0, 0.0, 1.0], (3, 1)))
        tri.set_attribute("scalar:spec", np.ones(3))
        light = PointLight(position=(np.sin(0.6) * 50, 0, np.cos(0.6) * 50))
        vals = []
        sweep = np.linspace(-1.2, 1.2, 25)
        for a in sweep:
            cam = Camera.look_at((np.sin(a) * 4, 0, np.cos(a) * 4), (0, 0, 0),
                                 fov_deg=30, width=33, height=33)
            img = render_preview(tri, cam, light, roughness=0.2)
            vals.append(img.data[16, 16].max())
        # mirror direction of a light at +0.6 is -0.6
        peak = sweep[int(np.argmax(vals))]
        assert abs(peak - (-0.6)) < 0.15

    def test_highlight_area_grows_with_roughness(self):
        mesh = make_sphere_mesh()
        cam = Camera.look_at((0, 0, 5), (0, 0, 0), fov_deg=26, width=128, height=128)
        light = PointLight(position=(2.0, 1.0, 30.0))
        areas = []
        for rough in (0.1, 0.2, 0.35, 0.5):
            img = render_preview(mesh, cam, light, roughness=rough)
            lum = img.data.sum(axis=2)
            area = int((lum > 0.5 * lum.max()).sum())
            areas.append(area)
        assert all(b > a for a, b in zip(areas, areas[1:]))

    def test_energy_non_negative(self):
        mesh = make_sphere_mesh()
        cam = Camera.look_at((0, 0, 5), (0, 0, 0), fov_deg=26, width=64, height=64)
        img = render_preview(mesh, cam, PointLight(position=(5, 5, 5)))
        assert img.data.min() >= 0.0


def make_sphere_mesh():
    from facefuse.meshkit import primitives
    mesh = primitives.icosphere(3)
    radial = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
    mesh.set_attribute("normal", radial)
    mesh.set_attribute("color", np.zeros((mesh.n_vertices, 3)))
    mesh.set_attribute("scalar:spec", np.ones(mesh.n_vertices))
    return mesh


class TestMakeTestHead:
    def test_view_counts(self):
        head = make_test_head(resolution=128)
        assert len(head.cameras) == 24
        assert len(head.photometric_ids) == 3
        assert len(set(head.pose_of_view)) == 3
        assert [head.pose_of_view[i] for i in head.photometric_ids] == [0, 1, 2]

    def test_base_mesh_decimation_contract(self):
        head = make_test_head(resolution=128)
        assert head.base_mesh.n_vertices < 0.1 * head.gt_mesh.n_vertices

    def test_every_point_well_seen_somewhere(self):
        head = make_test_head(resolution=128)
        vn = head.gt_mesh.vertex_normals()
        best = np.full(head.gt_mesh.n_vertices, np.inf)
        for vid in head.photometric_ids:
            cam = head.cameras[vid]
            to_cam = cam.position() - head.gt_mesh.vertices
            to_cam /= np.linalg.norm(to_cam, axis=1, keepdims=True)
            ang = np.degrees(np.arccos(np.clip(np.einsum("nc,nc->n", vn, to_cam), -1, 1)))
            best = np.minimum(best, ang)
        assert best.max() < 60.0


def test_camera_missing_surface_gives_empty_masks():
    cam = Camera.look_at((0, 0, 6), (10.0, 0, 0), up=(0, 1, 0), fov_deg=10,
                         width=32, height=32)
    scene = Scene(Sphere(radius=0.2), Material())
    cross, parallel = render_gradient_set(scene, cam, LightRig.continuous())
    assert not cross.mask.any()
    assert not parallel.mask.any()
