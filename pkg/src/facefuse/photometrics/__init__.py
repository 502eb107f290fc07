from .grids import ImageGrid, angular_error_deg, normalize_grid
from .camera import Camera, load_camera, save_camera
from .imgio import load_pfm, save_pfm, load_png16, save_png16
from .gradients import (
    CONDITIONS,
    GradientSet,
    VIEW_VECTOR,
    complement_normals,
    lambertian_normals,
    reflect,
    specular_normals,
)
from .alignment import (
    AlignmentResult,
    align_sequence,
    dense_flow,
    illumination_invariant,
    warp_image,
)
from .projection import RasterResult, project_depth_normals, rasterize, to_world_normals
from .bias import bias_correct, default_sigma_low, smooth_normals

__all__ = [
    "ImageGrid", "Camera", "GradientSet", "RasterResult", "AlignmentResult",
    "CONDITIONS", "VIEW_VECTOR",
    "angular_error_deg", "normalize_grid",
    "load_camera", "save_camera",
    "load_pfm", "save_pfm", "load_png16", "save_png16",
    "lambertian_normals", "complement_normals", "specular_normals", "reflect",
    "illumination_invariant", "align_sequence", "dense_flow", "warp_image",
    "project_depth_normals", "rasterize", "to_world_normals",
    "bias_correct", "smooth_normals", "default_sigma_low",
]
