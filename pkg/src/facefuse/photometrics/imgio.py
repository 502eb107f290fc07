"""Image file IO: 32-bit float PFM and 16-bit PNG.

PFM files follow the usual convention: 'PF' (color) or 'Pf' (grayscale)
header, width/height, a negative scale marking little-endian floats, and
scanlines stored bottom-to-top.  PNG values are sRGB-decoded to linear on
load unless ``assume_linear`` is set.
"""

import re

import cv2
import numpy as np

from ..errors import ImageFormatError
from .grids import ImageGrid


def save_pfm(grid_or_array, path):
    data = grid_or_array.data if isinstance(grid_or_array, ImageGrid) else np.asarray(grid_or_array)
    if data.ndim == 2:
        data = data[:, :, None]
    if data.shape[2] == 1:
        header = b"Pf"
        flat = data[:, :, 0]
    elif data.shape[2] == 3:
        header = b"PF"
        flat = data
    else:
        raise ImageFormatError(f"PFM supports 1 or 3 channels, got {data.shape[2]}")
    with open(path, "wb") as fh:
        fh.write(header + b"\n")
        fh.write(f"{data.shape[1]} {data.shape[0]}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(np.flipud(flat).astype("<f4").tobytes())


def load_pfm(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    m = re.match(rb"(P[Ff])\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s", blob)
    if not m:
        raise ImageFormatError(f"{path}: not a PFM file")
    color = m.group(1) == b"PF"
    width, height = int(m.group(2)), int(m.group(3))
    scale = float(m.group(4))
    channels = 3 if color else 1
    count = width * height * channels
    dtype = "<f4" if scale < 0 else ">f4"
    body = blob[m.end():]
    if len(body) < count * 4:
        raise ImageFormatError(f"{path}: pixel data truncated")
    data = np.frombuffer(body[: count * 4], dtype=dtype).reshape(height, width, channels)
    return ImageGrid(np.flipud(data).astype(np.float64))


def _srgb_to_linear(x):
    a = 0.055
    return np.where(x <= 0.04045, x / 12.92, ((x + a) / (1 + a)) ** 2.4)


def _linear_to_srgb(x):
    a = 0.055
    x = np.clip(x, 0.0, 1.0)
    return np.where(x <= 0.0031308, x * 12.92, (1 + a) * x ** (1 / 2.4) - a)


def load_png16(path, assume_linear=False):
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageFormatError(f"{path}: cannot read PNG")
    if raw.dtype == np.uint16:
        x = raw.astype(np.float64) / 65535.0
    elif raw.dtype == np.uint8:
        x = raw.astype(np.float64) / 255.0
    else:
        raise ImageFormatError(f"{path}: unsupported PNG depth {raw.dtype}")
    if x.ndim == 3:
        x = x[:, :, :3][:, :, ::-1]  # BGR(A) -> RGB
    if not assume_linear:
        x = _srgb_to_linear(x)
    return ImageGrid(np.ascontiguousarray(x))


def save_png16(grid_or_array, path, encode_srgb=True):
    data = grid_or_array.data if isinstance(grid_or_array, ImageGrid) else np.asarray(grid_or_array)
    if data.ndim == 3 and data.shape[2] == 1:
        data = data[:, :, 0]
    x = _linear_to_srgb(data) if encode_srgb else np.clip(data, 0.0, 1.0)
    q = np.round(x * 65535.0).astype(np.uint16)
    if q.ndim == 3:
        q = q[:, :, ::-1]  # RGB -> BGR
    if not cv2.imwrite(str(path), q):
        raise ImageFormatError(f"{path}: cannot write PNG")
