"""Photometric sequence alignment.

Illumination changes between gradient conditions break plain brightness
constancy, so alignment runs on illumination-independent color images
(hue mixed with normalized RGB) first, then refines each
gradient/complement pair against the constant image: the sum of an
aligned pair must reproduce C, which gives a valid flow target even
though the individual frames differ photometrically.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import AlignmentError, ValidationError
from .grids import ImageGrid
from .gradients import COMPLEMENT_PAIRS, GradientSet

HUE_SENTINEL = 0.0  # hue assigned to achromatic pixels (saturation < 1e-4)


def hue(rgb):
    """HSV hue of an (H, W, 3) array, normalized to [0, 1)."""
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    mx = rgb.max(axis=2)
    mn = rgb.min(axis=2)
    delta = mx - mn
    sat = np.where(mx > 0, delta / np.maximum(mx, 1e-300), 0.0)
    achromatic = sat < 1e-4
    safe = np.where(delta > 0, delta, 1.0)
    h = np.select(
        [mx == r, mx == g],
        [np.mod((g - b) / safe, 6.0), (b - r) / safe + 2.0],
        default=(r - g) / safe + 4.0,
    )
    h = h / 6.0
    h[achromatic] = HUE_SENTINEL
    return h


def illumination_invariant(image):
    """Intensity-free color image: (hue + RGB/|RGB|) / 2 per pixel.

    Exactly invariant to positive per-pixel rescaling of (R, G, B); black
    pixels map to zero.  Output channels lie in [0, 1].
    """
    grid = image if isinstance(image, ImageGrid) else ImageGrid(image)
    if grid.channels != 3:
        raise ValidationError("illumination_invariant needs a color image")
    rgb = grid.data
    norm = np.linalg.norm(rgb, axis=2)
    ok = norm > 0
    unit = np.zeros_like(rgb)
    unit[ok] = rgb[ok] / norm[ok][:, None]
    h = hue(rgb)
    h[~ok] = 0.0
    out = 0.5 * (h[:, :, None] + unit)
    out[~ok] = 0.0
    return ImageGrid(out, grid.mask.copy())


# -- dense optical flow -------------------------------------------------------


def _downsample(img):
    return ndimage.gaussian_filter(img, sigma=(1.0, 1.0) + (0.0,) * (img.ndim - 2))[::2, ::2]


def _upsample_flow(flow, shape):
    out = np.zeros(shape + (2,))
    for k in range(2):
        out[:, :, k] = 2.0 * ndimage.zoom(
            flow[:, :, k],
            (shape[0] / flow.shape[0], shape[1] / flow.shape[1]),
            order=1, grid_mode=True, mode="nearest",
        )
    return out


def warp_image(img, flow):
    """Sample ``img`` at (x + du, y + dv); bilinear, edge-clamped."""
    h, w = img.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    coords = [ys + flow[:, :, 1], xs + flow[:, :, 0]]
    if img.ndim == 2:
        return ndimage.map_coordinates(img, coords, order=1, mode="nearest")
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        out[:, :, c] = ndimage.map_coordinates(img[:, :, c], coords, order=1, mode="nearest")
    return out


def dense_flow(src, dst, levels=3, window=7, iterations=3):
    """Coarse-to-fine local least-squares flow from ``src`` to ``dst``.

    Returns (H, W, 2) displacements (du, dv) such that warping ``src`` by
    the flow approximates ``dst``.  Multi-channel inputs contribute
    jointly to the local structure tensor.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape:
        raise ValidationError("dense_flow: image shapes differ")
    pyr_src, pyr_dst = [src], [dst]
    for _ in range(levels - 1):
        if min(pyr_src[-1].shape[:2]) < 2 * window:
            break
        pyr_src.append(_downsample(pyr_src[-1]))
        pyr_dst.append(_downsample(pyr_dst[-1]))

    flow = np.zeros(pyr_src[-1].shape[:2] + (2,))
    for s, d in zip(reversed(pyr_src), reversed(pyr_dst)):
        if flow.shape[:2] != s.shape[:2]:
            flow = _upsample_flow(flow, s.shape[:2])
        s3 = s[:, :, None] if s.ndim == 2 else s
        d3 = d[:, :, None] if d.ndim == 2 else d
        for _ in range(iterations):
            warped = warp_image(s3, flow)
            gy, gx = np.zeros_like(warped), np.zeros_like(warped)
            for c in range(warped.shape[2]):
                gy[:, :, c], gx[:, :, c] = np.gradient(warped[:, :, c])
            it = warped - d3
            sums = {}
            for name, prod in (
                ("xx", gx * gx), ("xy", gx * gy), ("yy", gy * gy),
                ("xt", gx * it), ("yt", gy * it),
            ):
                sums[name] = ndimage.uniform_filter(prod.sum(axis=2), size=window)
            det = sums["xx"] * sums["yy"] - sums["xy"] ** 2
            trace = sums["xx"] + sums["yy"]
            det = det + 1e-6 * np.maximum(trace, 1e-12) + 1e-12
            du = (-sums["yy"] * sums["xt"] + sums["xy"] * sums["yt"]) / det
            dv = (sums["xy"] * sums["xt"] - sums["xx"] * sums["yt"]) / det
            step = np.stack([du, dv], axis=2)
            np.clip(step, -window, window, out=step)
            flow = flow + step
    return flow


# -- sequence alignment -------------------------------------------------------


@dataclass
class AlignmentResult:
    aligned: GradientSet
    flows: dict
    mean_displacement: float = 0.0
    stats: dict = field(default_factory=dict)


def _flow_feature(grid):
    if grid.channels == 3:
        return illumination_invariant(grid).data
    return grid.scalar()


def align_sequence(grad_set, iterations=1):
    """Warp all condition images of one sequence into C's frame.

    Initialization flows each condition's illumination-invariant image to
    C's; then ``iterations`` refinement rounds per complement pair flow
    the raw radiance images against the complement-sum targets
    (K -> C - warped(KB), then KB -> C - warped(K)).
    """
    ref = _flow_feature(grad_set["C"])
    width = grad_set["C"].width
    flows = {}
    warped = {"C": grad_set["C"].copy()}
    for k in CONDITION_ORDER:
        if k == "C":
            continue
        f = dense_flow(_flow_feature(grad_set[k]), ref)
        flows[k] = f
        warped[k] = _apply_flow(grad_set[k], f)

    c_data = grad_set["C"].data
    for _ in range(int(iterations)):
        for k, kb in COMPLEMENT_PAIRS:
            target = np.clip(c_data - warped[kb].data, 0.0, None)
            f = dense_flow(grad_set[k].data, target)
            flows[k] = f
            warped[k] = _apply_flow(grad_set[k], f)
            target = np.clip(c_data - warped[k].data, 0.0, None)
            f = dense_flow(grad_set[kb].data, target)
            flows[kb] = f
            warped[kb] = _apply_flow(grad_set[kb], f)

    disp = [np.linalg.norm(f, axis=2).mean() for f in flows.values()]
    mean_disp = float(np.mean(disp)) if disp else 0.0
    if mean_disp > 0.1 * width:
        raise AlignmentError(
            f"alignment diverged: mean displacement {mean_disp:.1f}px "
            f"exceeds 10% of image width ({width}px)"
        )
    aligned = GradientSet(warped, grad_set.polarization, grad_set.view_id)
    per_condition = {k: float(np.linalg.norm(f, axis=2).mean()) for k, f in flows.items()}
    return AlignmentResult(aligned, flows, mean_disp, {"per_condition": per_condition})


CONDITION_ORDER = ("X", "XB", "Y", "YB", "Z", "ZB", "C")


def _apply_flow(grid, flow):
    data = warp_image(grid.data, flow)
    mask = warp_image(grid.mask.astype(np.float64), flow) > 0.999
    return ImageGrid(data, mask & grid.mask)
