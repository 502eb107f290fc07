"""Pipeline stages over an on-disk dataset, and the end-to-end run.

Dataset layout (written by the synth stage, consumed by the rest):

    <dir>/scene.json              material, rig mode, resolution
    <dir>/gt_mesh.ply             ground-truth surface
    <dir>/base_mesh.ply           coarse noisy base mesh (pipeline input)
    <dir>/cameras/view00.cam ...  all views
    <dir>/photometric_views.txt   "view_id pose_id" per photometric view
    <dir>/views/view00/           photometric views only:
        cross_X.pfm ... parallel_ZB.pfm   14 condition images
        view_mask.pfm                      render coverage
        gt_depth.pfm gt_normal.pfm gt_albedo.pfm

Stage outputs mirror the views/ layout so each stage reads the previous
stage's directory plus the dataset directory.
"""

import hashlib
import json
import os
import time

import numpy as np

from . import meshkit, patchwork, poissonstitch
from .errors import ValidationError
from .photometrics import (
    Camera,
    GradientSet,
    ImageGrid,
    align_sequence,
    bias_correct,
    complement_normals,
    lambertian_normals,
    load_camera,
    load_pfm,
    project_depth_normals,
    save_camera,
    save_pfm,
    save_png16,
    specular_normals,
    to_world_normals,
)
from .photometrics.gradients import CONDITIONS
from .synthstage import (
    BumpySphere,
    LightRig,
    Material,
    PointLight,
    Scene,
    Sphere,
    make_test_head,
    render_gradient_set,
    render_ground_truth,
    render_preview,
    soft_checker_albedo,
)

PHOTOMETRIC_LIST = "photometric_views.txt"


# -- dataset helpers -----------------------------------------------------------


def _view_dir(root, view_id):
    return os.path.join(root, "views", f"view{view_id:02d}")


def _write_mask(mask, path):
    save_pfm(ImageGrid(mask.astype(np.float64)), path)


def _read_mask(path):
    return load_pfm(path).data[:, :, 0] > 0.5


def write_gradient_sets(dirpath, cross, parallel):
    os.makedirs(dirpath, exist_ok=True)
    for pol, gset in (("cross", cross), ("parallel", parallel)):
        for cond in CONDITIONS:
            save_pfm(gset[cond], os.path.join(dirpath, f"{pol}_{cond}.pfm"))
        _write_mask(gset.mask, os.path.join(dirpath, f"{pol}_mask.pfm"))


def read_gradient_sets(dirpath, view_id=0):
    sets = []
    for pol in ("cross", "parallel"):
        mask = _read_mask(os.path.join(dirpath, f"{pol}_mask.pfm"))
        imgs = {}
        for cond in CONDITIONS:
            grid = load_pfm(os.path.join(dirpath, f"{pol}_{cond}.pfm"))
            imgs[cond] = ImageGrid(grid.data, mask.copy())
        sets.append(GradientSet(imgs, pol, view_id))
    return sets[0], sets[1]


def _copy_view_list(src_dir, dst_dir):
    os.makedirs(dst_dir, exist_ok=True)
    with open(os.path.join(src_dir, PHOTOMETRIC_LIST), "r", encoding="utf-8") as f_in:
        content = f_in.read()
    with open(os.path.join(dst_dir, PHOTOMETRIC_LIST), "w", encoding="utf-8") as f_out:
        f_out.write(content)


def read_photometric_views(data_dir):
    entries = []
    with open(os.path.join(data_dir, PHOTOMETRIC_LIST), "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                vid, pose = line.split()
                entries.append((int(vid), int(pose)))
    return entries


def load_view_camera(data_dir, view_id):
    return load_camera(os.path.join(data_dir, "cameras", f"view{view_id:02d}.cam"))


# -- synth stage ---------------------------------------------------------------


def build_scene(kind, resolution, rig_mode):
    if kind == "head":
        head = make_test_head(resolution=resolution)
        return head
    if kind == "sphere":
        surface = Sphere(radius=1.0)
    elif kind == "bumpy":
        surface = BumpySphere(radius=1.0, amplitude=0.02, frequency=8.0)
    else:
        raise ValidationError(f"unknown scene {kind!r} (use sphere|bumpy|head)")
    material = Material(diffuse=soft_checker_albedo(), specular_albedo=0.35,
                        roughness=0.3, ior=1.45)
    cam = Camera.look_at((0, 0, 6), (0, 0, 0), fov_deg=22,
                         width=resolution, height=resolution)
    scene = Scene(surface, material, [cam])
    return scene


def run_synth(out_dir, scene="head", mode="continuous", resolution=384):
    """Generate the synthetic dataset: images, cameras, meshes, ground truth."""
    os.makedirs(os.path.join(out_dir, "cameras"), exist_ok=True)
    rig = LightRig.continuous() if mode == "continuous" else LightRig.led41()
    built = build_scene(scene, resolution, mode)

    if scene == "head":
        head = built
        sc = head.scene
        cameras = head.cameras
        photometric = list(zip(head.photometric_ids,
                               [head.pose_of_view[i] for i in head.photometric_ids]))
        meshkit.save_mesh(head.gt_mesh, os.path.join(out_dir, "gt_mesh.ply"))
        meshkit.save_mesh(head.base_mesh, os.path.join(out_dir, "base_mesh.ply"))
    else:
        sc = built
        cameras = sc.cameras
        photometric = [(0, 0)]
        gt_mesh, base_mesh = _sphere_meshes(sc)
        meshkit.save_mesh(gt_mesh, os.path.join(out_dir, "gt_mesh.ply"))
        meshkit.save_mesh(base_mesh, os.path.join(out_dir, "base_mesh.ply"))

    for i, cam in enumerate(cameras):
        save_camera(cam, os.path.join(out_dir, "cameras", f"view{i:02d}.cam"))
    with open(os.path.join(out_dir, PHOTOMETRIC_LIST), "w", encoding="utf-8") as fh:
        for vid, pose in photometric:
            fh.write(f"{vid} {pose}\n")

    for vid, _pose in photometric:
        cam = cameras[vid]
        cross, parallel = render_gradient_set(sc, cam, rig, "both")
        vdir = _view_dir(out_dir, vid)
        write_gradient_sets(vdir, cross, parallel)
        depth, normals, albedo = render_ground_truth(sc, cam)
        save_pfm(depth, os.path.join(vdir, "gt_depth.pfm"))
        save_pfm(normals, os.path.join(vdir, "gt_normal.pfm"))
        save_pfm(albedo, os.path.join(vdir, "gt_albedo.pfm"))
        _write_mask(depth.mask, os.path.join(vdir, "view_mask.pfm"))

    meta = {
        "scene": scene,
        "mode": mode,
        "resolution": resolution,
        "material": {
            "specular_albedo": sc.material.specular_albedo,
            "roughness": sc.material.roughness,
            "ior": sc.material.ior,
        },
        "views": len(cameras),
        "photometric_views": [vid for vid, _ in photometric],
    }
    with open(os.path.join(out_dir, "scene.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return meta


def _sphere_meshes(scene):
    gt = meshkit.primitives.icosphere(4)
    base = meshkit.primitives.icosphere(2)
    if isinstance(scene.surface, BumpySphere):
        for mesh in (gt,):
            dirs = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
            mesh.vertices[:] = dirs * scene.surface.target_radius(dirs)[:, None]
    rng = np.random.default_rng(7)
    base.vertices[:] += 0.005 * base.bbox_diagonal() * rng.standard_normal(base.vertices.shape)
    return gt, base


# -- per-view stages -----------------------------------------------------------


def run_align(data_dir, out_dir, iterations=1):
    """Align every photometric view's sequences into their C frame."""
    _copy_view_list(data_dir, out_dir)
    report = {}
    for vid, _pose in read_photometric_views(data_dir):
        cross, parallel = read_gradient_sets(_view_dir(data_dir, vid), vid)
        vdir = _view_dir(out_dir, vid)
        stats = {}
        aligned = []
        for gset in (cross, parallel):
            res = align_sequence(gset, iterations=iterations)
            aligned.append(res.aligned)
            stats[gset.polarization] = {
                "mean_displacement_px": res.mean_displacement,
                "per_condition": res.stats["per_condition"],
                "complement_residual": res.aligned.complement_residual(),
            }
        write_gradient_sets(vdir, aligned[0], aligned[1])
        for name in ("gt_depth.pfm", "gt_normal.pfm", "gt_albedo.pfm", "view_mask.pfm"):
            src = os.path.join(_view_dir(data_dir, vid), name)
            if os.path.exists(src):
                with open(src, "rb") as f_in, open(os.path.join(vdir, name), "wb") as f_out:
                    f_out.write(f_in.read())
        report[f"view{vid:02d}"] = stats
    _dump(report, out_dir, "align_report.json")
    return report


def run_normals(data_dir, out_dir):
    """Estimate per-view normal maps and albedos from aligned sequences."""
    _copy_view_list(data_dir, out_dir)
    report = {}
    for vid, _pose in read_photometric_views(data_dir):
        cross, parallel = read_gradient_sets(_view_dir(data_dir, vid), vid)
        vdir = _view_dir(out_dir, vid)
        os.makedirs(vdir, exist_ok=True)
        lam_n, diff_alb = lambertian_normals(cross)
        comp_n = complement_normals(cross)
        spec_n, spec_alb, clamped = specular_normals(cross, parallel)
        save_pfm(lam_n, os.path.join(vdir, "lambert_normal.pfm"))
        save_pfm(comp_n, os.path.join(vdir, "diffuse_normal.pfm"))
        save_pfm(spec_n, os.path.join(vdir, "specular_normal.pfm"))
        save_pfm(diff_alb, os.path.join(vdir, "diffuse_albedo.pfm"))
        save_pfm(spec_alb, os.path.join(vdir, "specular_albedo.pfm"))
        _write_mask(comp_n.mask, os.path.join(vdir, "diffuse_mask.pfm"))
        _write_mask(spec_n.mask, os.path.join(vdir, "specular_mask.pfm"))
        report[f"view{vid:02d}"] = {
            "clamped_specular_pixels": clamped,
            "diffuse_masked_in": int(comp_n.mask.sum()),
            "specular_masked_in": int(spec_n.mask.sum()),
        }
    _dump(report, out_dir, "normals_report.json")
    return report


def run_biascorrect(data_dir, normals_dir, out_dir, sigma_low=None):
    """Remove low-frequency bias per view and rotate normals to world space."""
    _copy_view_list(data_dir, out_dir)
    base = meshkit.load_mesh(os.path.join(data_dir, "base_mesh.ply"))
    report = {}
    for vid, _pose in read_photometric_views(data_dir):
        cam = load_view_camera(data_dir, vid)
        geo_n, _depth, _m = project_depth_normals(base, cam)
        vdir = _view_dir(out_dir, vid)
        os.makedirs(vdir, exist_ok=True)
        stats = {}
        for kind in ("diffuse", "specular"):
            photo = load_pfm(os.path.join(_view_dir(normals_dir, vid), f"{kind}_normal.pfm"))
            mask = _read_mask(os.path.join(_view_dir(normals_dir, vid), f"{kind}_mask.pfm"))
            photo = ImageGrid(photo.data, mask)
            corrected = bias_correct(photo, geo_n, sigma_low=sigma_low)
            world = to_world_normals(corrected, cam)
            save_pfm(world, os.path.join(vdir, f"world_{kind}_normal.pfm"))
            _write_mask(world.mask, os.path.join(vdir, f"{kind}_mask.pfm"))
            stats[kind] = {"masked_in": int(world.mask.sum())}
        for name in ("diffuse_albedo.pfm", "specular_albedo.pfm"):
            src = os.path.join(_view_dir(normals_dir, vid), name)
            with open(src, "rb") as f_in, open(os.path.join(vdir, name), "wb") as f_out:
                f_out.write(f_in.read())
        report[f"view{vid:02d}"] = stats
    _dump(report, out_dir, "biascorrect_report.json")
    return report


def run_segment(data_dir, out_path, patches=100, overlap=0.3, seed_vertex=0):
    base = meshkit.load_mesh(os.path.join(data_dir, "base_mesh.ply"))
    seg = patchwork.segment_mesh(base, count=patches, sigma=overlap, seed=seed_vertex)
    patchwork.save_segmentation(seg, out_path)
    return seg


def _load_observations(data_dir, maps_dir):
    """Sample per-view products (albedos + world normals) onto the base mesh."""
    base = meshkit.load_mesh(os.path.join(data_dir, "base_mesh.ply"))
    cams, image_sets, ids = [], [], []
    for vid, _pose in read_photometric_views(data_dir):
        cams.append(load_view_camera(data_dir, vid))
        vdir = _view_dir(maps_dir, vid)
        dmask = _read_mask(os.path.join(vdir, "diffuse_mask.pfm"))
        smask = _read_mask(os.path.join(vdir, "specular_mask.pfm"))
        diff_alb = load_pfm(os.path.join(vdir, "diffuse_albedo.pfm"))
        spec_alb = load_pfm(os.path.join(vdir, "specular_albedo.pfm"))
        wd = load_pfm(os.path.join(vdir, "world_diffuse_normal.pfm"))
        ws = load_pfm(os.path.join(vdir, "world_specular_normal.pfm"))
        image_sets.append({
            "diffuse_albedo": ImageGrid(diff_alb.data, dmask),
            "specular_albedo": ImageGrid(spec_alb.data.mean(axis=2, keepdims=True), smask),
            "diffuse_normal": ImageGrid(wd.data, dmask),
            "specular_normal": ImageGrid(ws.data, smask),
        })
        ids.append(vid)
    base.set_attribute("normal", base.vertex_normals())
    obs = poissonstitch.sample_views(base, cams, image_sets, view_ids=list(range(len(ids))))
    return base, obs


def run_stitch(data_dir, maps_dir, seg_path, out_path, lam=1e-6):
    """Stitch albedos and select per-vertex normals onto the base mesh."""
    base, obs = _load_observations(data_dir, maps_dir)
    seg = patchwork.load_segmentation(seg_path, base)
    selection = poissonstitch.select_patch_views(seg, obs)
    laplace = meshkit.assemble_laplace(base)
    diff = poissonstitch.stitch_texture(base, seg, obs, lam=lam,
                                        channel="diffuse_albedo",
                                        selection=selection, laplace=laplace)
    spec = poissonstitch.stitch_texture(base, seg, obs, lam=lam,
                                        channel="specular_albedo",
                                        selection=selection, laplace=laplace)
    d_targets, d_has, _ = poissonstitch.select_vertex_targets(
        seg, obs, selection, channel="diffuse_normal")
    s_targets, s_has, _ = poissonstitch.select_vertex_targets(
        seg, obs, selection, channel="specular_normal")
    fallback = base.vertex_normals()
    d_targets[~d_has] = fallback[~d_has]
    s_targets[~s_has] = fallback[~s_has]

    out = base.copy()
    out.set_attribute("color", diff.values)
    out.set_attribute("scalar:spec", spec.values[:, 0])
    out.set_attribute("normal", s_targets)
    out.set_attribute("vector:diffuse_normal", d_targets)
    meshkit.save_mesh(out, out_path)

    fresnel = poissonstitch.fresnel_safe_check(seg, selection, obs)
    report = {
        "diffuse_residual": diff.residual,
        "specular_residual": spec.residual,
        "zero_filled_faces": diff.fill_count,
        "fresnel_unsafe_patches": fresnel.unsafe_count,
        "fresnel_max_angle_deg": float(fresnel.patch_angle_deg.max()),
        "unconstrained_vertices": int((~d_has).sum()),
    }
    _dump(report, os.path.dirname(out_path) or ".", "stitch_report.json")
    return report


def run_refine(data_dir, maps_dir, seg_path, out_path, lambda_screen=None,
               normal_source="specular", attrs_from=None):
    """Solve the normal-guided refinement and write the refined mesh."""
    base, obs = _load_observations(data_dir, maps_dir)
    seg = patchwork.load_segmentation(seg_path, base)
    res = poissonstitch.refine_mesh(
        base, seg, obs, lambda_screen=lambda_screen,
        channel=f"{normal_source}_normal",
    )
    refined = res.mesh
    if attrs_from:
        donor = meshkit.load_mesh(attrs_from)
        for name, values in donor.attributes.items():
            refined.set_attribute(name, values)
    meshkit.save_mesh(refined, out_path)
    report = {
        "residual": res.residual,
        "objective_before": res.objective_before,
        "objective_after": res.objective_after,
        "constrained_vertices": res.constrained,
        "lambda_screen": res.lambda_screen,
        "normal_source": normal_source,
        "max_displacement": float(np.linalg.norm(
            refined.vertices - base.vertices, axis=1).max()),
    }
    _dump(report, os.path.dirname(out_path) or ".", "refine_report.json")
    return report


def run_render(data_dir, mesh_path, out_path, view=None, light=(2.0, 2.0, 10.0),
               intensity=3.0):
    mesh = meshkit.load_mesh(mesh_path)
    with open(os.path.join(data_dir, "scene.json"), "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    vid = meta["photometric_views"][0] if view is None else view
    cam = load_view_camera(data_dir, vid)
    img = render_preview(
        mesh, cam, PointLight(position=np.asarray(light, dtype=np.float64) * 1.0,
                              intensity=intensity),
        roughness=meta["material"]["roughness"], ior=meta["material"]["ior"],
    )
    save_pfm(img, out_path)
    png = os.path.splitext(out_path)[0] + ".png"
    save_png16(ImageGrid(np.clip(img.data, 0.0, 1.0), img.mask), png)
    return {"out": out_path, "png": png, "view": vid}


# -- end-to-end -----------------------------------------------------------------


def run_pipeline(config):
    """Execute align -> normals -> biascorrect -> segment -> stitch -> refine
    (-> preview) over a synth dataset; returns the machine-readable report."""
    config.validate()
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    report = {"config": vars(config).copy(), "stages": {}}
    timings = {}

    def stage(name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            result = fn(*args, **kwargs)
        except Exception as exc:
            # keep partial artifacts on disk; record where the run halted
            report["failed_stage"] = name
            report["error"] = str(exc)
            report["input_digest"] = _input_digest(config)
            report["timings_s"] = timings
            _dump(report, out, "report.json")
            try:
                wrapped = type(exc)(
                    f"stage {name!r} (inputs {report['input_digest'][:12]}): {exc}")
            except Exception:
                raise exc
            raise wrapped from exc
        timings[name] = round(time.perf_counter() - t0, 3)
        report["stages"][name] = _jsonable(result)
        return result

    aligned_dir = os.path.join(out, "aligned")
    normals_dir = os.path.join(out, "normals")
    world_dir = os.path.join(out, "world")
    seg_path = os.path.join(out, "segmentation.txt")
    stitched_path = os.path.join(out, "stitched.ply")
    refined_path = os.path.join(out, "refined.ply")

    def segment_stage(*args):
        seg = run_segment(*args)
        return {"patches": seg.n_patches, "sigma": seg.sigma,
                "overlap_pairs": len(seg.overlaps)}

    stage("align", run_align, config.data_dir, aligned_dir, config.iterations)
    stage("normals", run_normals, aligned_dir, normals_dir)
    stage("biascorrect", run_biascorrect, config.data_dir, normals_dir,
          world_dir, config.sigma_low)
    stage("segment", segment_stage, config.data_dir, seg_path, config.patches,
          config.overlap, config.seed_vertex)
    stage("stitch", run_stitch, config.data_dir, world_dir, seg_path,
          stitched_path, config.lam)
    stage("refine", run_refine, config.data_dir, world_dir, seg_path,
          refined_path, config.lambda_screen, config.normal_source,
          stitched_path)
    if config.preview:
        stage("render", run_render, config.data_dir, refined_path,
              os.path.join(out, "preview.pfm"))

    report["timings_s"] = timings
    report["threads"] = config.threads
    report["fresnel_unsafe_patches"] = report["stages"]["stitch"]["fresnel_unsafe_patches"]
    _dump(report, out, "report.json")
    return report


def _input_digest(config):
    h = hashlib.sha256()
    h.update(json.dumps(_jsonable(vars(config)), sort_keys=True).encode())
    scene = os.path.join(config.data_dir, "scene.json")
    if os.path.exists(scene):
        with open(scene, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def artifact_hashes(out_dir):
    """SHA-256 of every artifact (excluding the timing report)."""
    hashes = {}
    for root, _dirs, files in os.walk(out_dir):
        for name in sorted(files):
            if name == "report.json":
                continue
            p = os.path.join(root, name)
            rel = os.path.relpath(p, out_dir)
            h = hashlib.sha256()
            with open(p, "rb") as fh:
                h.update(fh.read())
            hashes[rel] = h.hexdigest()
    return hashes


def _jsonable(obj):
    if obj is None or isinstance(obj, (str, int, float, bool)):
        return obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return str(obj)


def _dump(report, dirpath, name):
    os.makedirs(dirpath, exist_ok=True)
    with open(os.path.join(dirpath, name), "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
