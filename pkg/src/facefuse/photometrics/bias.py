"""Low-frequency normal bias removal against base-mesh depth normals.

Photometric normals carry smooth, view-dependent bias (light source
discretisation, attenuation, occlusion).  Both normal fields are smoothed
with a wide Gaussian; the per-pixel minimal rotation taking the smoothed
photometric field onto the smoothed geometric field is applied to the
full-resolution photometric normals, replacing their low frequencies
while keeping the fine detail.
"""

import numpy as np
from scipy import ndimage

from ..errors import ShapeError
from .grids import ImageGrid


def default_sigma_low(width):
    """15 px at 1024-wide images, scaled proportionally."""
    return 15.0 * width / 1024.0


def smooth_normals(grid, sigma):
    """Mask-aware Gaussian smoothing of a normal map, renormalized."""
    m = grid.mask.astype(np.float64)
    acc = np.zeros_like(grid.data)
    for c in range(3):
        acc[:, :, c] = ndimage.gaussian_filter(grid.data[:, :, c] * m, sigma)
    wsum = ndimage.gaussian_filter(m, sigma)
    ok = grid.mask & (wsum > 1e-6)
    acc[ok] /= wsum[ok][:, None]
    norms = np.linalg.norm(acc, axis=2)
    ok &= norms > 1e-12
    out = np.zeros_like(acc)
    out[ok] = acc[ok] / norms[ok][:, None]
    return ImageGrid(out, ok)


def _rotate_between(frm, to, vec):
    """Apply to ``vec`` the minimal rotation taking unit ``frm`` to unit ``to``.

    All arguments are (P, 3).  Uses the Rodrigues form with axis frm x to.
    """
    axis = np.cross(frm, to)
    sin = np.linalg.norm(axis, axis=1)
    cos = np.einsum("pc,pc->p", frm, to)
    out = vec.copy()
    active = sin > 1e-12
    k = np.zeros_like(axis)
    k[active] = axis[active] / sin[active][:, None]
    v = vec[active]
    ka = k[active]
    c = cos[active][:, None]
    s = sin[active][:, None]
    out[active] = (
        v * c
        + np.cross(ka, v) * s
        + ka * np.einsum("pc,pc->p", ka, v)[:, None] * (1.0 - c)
    )
    return out


def bias_correct(photo, geo, sigma_low=None):
    """Replace the low-frequency component of ``photo`` with ``geo``'s.

    Pixels where the smoothed fields are anti-parallel (dot < -0.999)
    are masked out.  Output normals are unit length.
    """
    if not photo.same_shape(geo):
        raise ShapeError("bias_correct: normal maps have different dimensions")
    if sigma_low is None:
        sigma_low = default_sigma_low(photo.width)
    sp = smooth_normals(photo, sigma_low)
    sg = smooth_normals(geo, sigma_low)
    valid = photo.mask & geo.mask & sp.mask & sg.mask
    dots = np.einsum("hwc,hwc->hw", sp.data, sg.data)
    valid &= dots >= -0.999
    out = np.zeros_like(photo.data)
    out[valid] = _rotate_between(sp.data[valid], sg.data[valid], photo.data[valid])
    norms = np.linalg.norm(out[valid], axis=1)
    ok2 = norms > 1e-12
    idx = np.nonzero(valid)
    out[idx[0][ok2], idx[1][ok2]] /= norms[ok2][:, None]
    valid[idx[0][~ok2], idx[1][~ok2]] = False
    return ImageGrid(out, valid)
