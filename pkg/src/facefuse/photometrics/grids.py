"""Raster containers for radiance images, normal maps and depth maps."""

import numpy as np

from ..errors import ShapeError, ValidationError


class ImageGrid:
    """2D raster of scalar or 3-vector samples with a validity mask.

    ``data`` is stored as (height, width, channels) float64 with channels
    1 or 3; ``mask`` is (height, width) bool.  Radiance grids hold linear
    values in [0, inf); normal maps hold unit vectors on masked-in pixels.
    """

    def __init__(self, data, mask=None):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ShapeError(f"image data must be (H, W) or (H, W, 1|3), got {data.shape}")
        self.data = data
        if mask is None:
            mask = np.ones(data.shape[:2], dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != data.shape[:2]:
            raise ShapeError(f"mask shape {mask.shape} != image shape {data.shape[:2]}")
        self.mask = mask

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    def scalar(self):
        """Single-channel view: channel 0 for 1-channel, mean for color."""
        if self.channels == 1:
            return self.data[:, :, 0]
        return self.data.mean(axis=2)

    def same_shape(self, other):
        return (self.height, self.width) == (other.height, other.width)

    def copy(self):
        return ImageGrid(self.data.copy(), self.mask.copy())

    def check_radiance(self):
        if self.data[self.mask].size and self.data[self.mask].min() < 0:
            raise ValidationError("radiance grid has negative samples")

    def check_unit_normals(self, tol=1e-6):
        if self.channels != 3:
            raise ShapeError("normal map must have 3 channels")
        n = np.linalg.norm(self.data[self.mask], axis=-1)
        if n.size and np.abs(n - 1.0).max() > tol:
            raise ValidationError("normal map is not unit length on masked-in pixels")


def normalize_grid(vectors, mask=None, floor=0.0):
    """Normalize an (H, W, 3) field; pixels with norm <= floor are masked out."""
    vectors = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=2)
    ok = norms > floor
    if mask is not None:
        ok &= mask
    out = np.zeros_like(vectors)
    out[ok] = vectors[ok] / norms[ok][:, None]
    return ImageGrid(out, ok)


def angular_error_deg(a, b, mask=None):
    """Per-pixel angle in degrees between two (H, W, 3) unit fields."""
    an = np.asarray(a, dtype=np.float64)
    bn = np.asarray(b, dtype=np.float64)
    dots = np.clip(np.einsum("hwc,hwc->hw", an, bn), -1.0, 1.0)
    ang = np.degrees(np.arccos(dots))
    if mask is not None:
        return ang[mask]
    return ang
