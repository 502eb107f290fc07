"""facefuse: photometric face-capture stitching toolkit.

Subpackages:
    meshkit       triangle meshes, IO, discrete differential operators, geodesics
    photometrics  gradient-illumination normal/albedo estimation and alignment
    patchwork     farthest-point sampling and overlapping geodesic Voronoi patches
    poissonstitch view selection, screened-Poisson texture stitching, mesh refinement
    synthstage    synthetic lightstage renders and ground truth
    cli           pipeline orchestration
"""

__version__ = "0.1.0"
