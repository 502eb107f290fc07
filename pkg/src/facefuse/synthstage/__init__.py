from .rig import LightRig, condition_gain, led_dome_directions
from .scene import (
    BumpySphere,
    Material,
    MeshSurface,
    Scene,
    Sphere,
    bump_field,
    checker_albedo,
    smooth_albedo,
    soft_checker_albedo,
)
from .render import (
    GeometryBuffers,
    camera_rays,
    render_gradient_set,
    render_ground_truth,
    resolve_geometry,
)
from .preview import PointLight, render_preview
from .head import TestHead, face_sheet_mesh, make_test_head

__all__ = [
    "LightRig", "condition_gain", "led_dome_directions",
    "Sphere", "BumpySphere", "MeshSurface", "Material", "Scene",
    "bump_field", "checker_albedo", "smooth_albedo", "soft_checker_albedo",
    "GeometryBuffers", "camera_rays", "resolve_geometry",
    "render_gradient_set", "render_ground_truth",
    "PointLight", "render_preview",
    "TestHead", "face_sheet_mesh", "make_test_head",
]
