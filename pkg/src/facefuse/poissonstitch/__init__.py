from .observations import ViewObservation, sample_view, sample_views
from .selection import (
    FRESNEL_THRESHOLD_DEG,
    FresnelReport,
    ViewSelection,
    fresnel_safe_check,
    select_patch_views,
)
from .guidance import GuidanceField, build_texture_guidance, face_source_views, grown_membership
from .solve import SolveResult, solve_screened_poisson
from .texture import (
    DEFAULT_LAMBDA,
    StitchResult,
    edge_jump_stats,
    naive_patch_texture,
    stitch_texture,
)
from .refine import (
    RefineResult,
    cot_laplacian,
    laplacian_normals,
    cross_objective,
    cross_rows,
    default_screen_weight,
    refine_mesh,
    select_vertex_targets,
)

__all__ = [
    "ViewObservation", "ViewSelection", "FresnelReport", "GuidanceField",
    "SolveResult", "StitchResult", "RefineResult",
    "FRESNEL_THRESHOLD_DEG", "DEFAULT_LAMBDA",
    "sample_view", "sample_views",
    "select_patch_views", "fresnel_safe_check",
    "build_texture_guidance", "face_source_views", "grown_membership",
    "solve_screened_poisson",
    "stitch_texture", "naive_patch_texture", "edge_jump_stats",
    "refine_mesh", "select_vertex_targets", "cot_laplacian", "laplacian_normals",
    "cross_objective", "cross_rows", "default_screen_weight",
]
