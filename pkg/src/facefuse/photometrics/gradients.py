"""Normal and albedo estimation from spherical-gradient image sequences.

A full sequence holds seven conditions: the three axis-aligned linear
gradients X, Y, Z, the constant image C, and the reversed-gradient
complements XB, YB, ZB with X + XB = Y + YB = Z + ZB = C.  Cross-polarized
sequences contain only diffuse radiance; parallel sequences add the
specular lobe on top, so their per-condition difference isolates it.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ShapeError, ValidationError
from .grids import ImageGrid, normalize_grid

CONDITIONS = ("X", "Y", "Z", "C", "XB", "YB", "ZB")
COMPLEMENT_PAIRS = (("X", "XB"), ("Y", "YB"), ("Z", "ZB"))

# view vector toward the camera, in camera space
VIEW_VECTOR = np.array([0.0, 0.0, 1.0])


@dataclass
class GradientSet:
    """Seven condition images for one view and one polarization state."""

    images: dict
    polarization: str = "cross"
    view_id: Union[int, str] = 0

    def __post_init__(self):
        missing = set(CONDITIONS) - set(self.images)
        if missing:
            raise ValidationError(f"gradient set missing conditions {sorted(missing)}")
        if self.polarization not in ("cross", "parallel"):
            raise ValidationError(f"unknown polarization {self.polarization!r}")
        ref = self.images["C"]
        for k in CONDITIONS:
            if not self.images[k].same_shape(ref):
                raise ShapeError(f"condition {k} dimensions differ from C")
            if self.images[k].channels != ref.channels:
                raise ShapeError(f"condition {k} channel count differs from C")

    def __getitem__(self, key):
        return self.images[key]

    @property
    def mask(self):
        m = np.ones_like(self.images["C"].mask)
        for k in CONDITIONS:
            m &= self.images[k].mask
        return m

    def complement_residual(self):
        """max over valid pixels of |K + KB - C| / C, the aligned-set identity."""
        c = self.images["C"].scalar()
        valid = self.mask & (c > 0)
        worst = 0.0
        for k, kb in COMPLEMENT_PAIRS:
            s = self.images[k].scalar() + self.images[kb].scalar()
            r = np.abs(s - c)[valid] / c[valid]
            if r.size:
                worst = max(worst, float(r.max()))
        return worst

    def map_images(self, fn):
        return GradientSet({k: fn(k, img) for k, img in self.images.items()},
                           self.polarization, self.view_id)


def intensity_floor_mask(c_scalar, mask, fraction=0.01):
    """Valid pixels whose constant-image level clears the noise floor.

    The floor is ``fraction`` of the 99th-percentile level over currently
    valid pixels, guarding the divisions by C.
    """
    vals = c_scalar[mask]
    if vals.size == 0:
        return mask.copy()
    floor = fraction * np.percentile(vals, 99.0)
    return mask & (c_scalar > floor)


def lambertian_normals(grad_set):
    """Diffuse normals and albedo from a cross-polarized gradient set.

    The per-pixel normal is the unit vector along
    (X/C - 1/2, Y/C - 1/2, Z/C - 1/2); the albedo is the constant image.
    """
    if grad_set.polarization != "cross":
        raise ValidationError("lambertian_normals expects the cross-polarized set")
    c = grad_set["C"].scalar()
    ok = intensity_floor_mask(c, grad_set.mask)
    comps = []
    for k in ("X", "Y", "Z"):
        r = np.zeros_like(c)
        r[ok] = grad_set[k].scalar()[ok] / c[ok] - 0.5
        comps.append(r)
    normals = normalize_grid(np.stack(comps, axis=2), ok, floor=1e-12)
    albedo = ImageGrid(grad_set["C"].data.copy(), normals.mask.copy())
    return normals, albedo


def complement_normals(grad_set):
    """Normals from gradient/complement differences (no division by C).

    n = normalize(X - XB, Y - YB, Z - ZB); invariant to any positive
    per-pixel rescaling of all six gradient inputs.
    """
    c = grad_set["C"].scalar()
    ok = intensity_floor_mask(c, grad_set.mask)
    diffs = np.stack(
        [grad_set[k].scalar() - grad_set[kb].scalar() for k, kb in COMPLEMENT_PAIRS],
        axis=2,
    )
    mags = np.linalg.norm(diffs, axis=2)
    vals = mags[ok]
    floor = 0.01 * np.percentile(vals, 99.0) if vals.size else 0.0
    return normalize_grid(diffs, ok, floor=floor)


def specular_radiances(cross, parallel):
    """Per-condition specular images (parallel - cross), clamped at zero.

    Returns (dict of condition -> scalar array, clamped-pixel count).
    """
    if not cross["C"].same_shape(parallel["C"]):
        raise ShapeError("cross and parallel sets have different dimensions")
    clamped = 0
    out = {}
    for k in CONDITIONS:
        d = parallel[k].scalar() - cross[k].scalar()
        neg = d < 0
        clamped += int(neg.sum())
        d[neg] = 0.0
        out[k] = d
    return out, clamped


def specular_normals(cross, parallel):
    """Specular reflection analysis on the polarization difference.

    The lobe center u is the unit vector along (Xs - Cs/2, Ys - Cs/2,
    Zs - Cs/2); the normal is the half vector between u and the view
    direction.  Returns (normals, specular albedo, clamped count).
    """
    spec, clamped = specular_radiances(cross, parallel)
    cs = spec["C"]
    ok = intensity_floor_mask(cs, cross.mask & parallel.mask)
    u = np.stack([spec[k] - 0.5 * cs for k in ("X", "Y", "Z")], axis=2)
    u_grid = normalize_grid(u, ok, floor=1e-12)
    half = u_grid.data + VIEW_VECTOR * u_grid.mask[:, :, None]
    normals = normalize_grid(half, u_grid.mask, floor=1e-12)
    albedo = ImageGrid(cs[:, :, None].copy(), normals.mask.copy())
    return normals, albedo, clamped


def reflect(v, n):
    """Mirror reflection of direction(s) v about unit normal(s) n."""
    v = np.asarray(v, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    return 2.0 * np.sum(v * n, axis=-1, keepdims=True) * n - v
