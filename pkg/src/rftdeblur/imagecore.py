"""Image containers and basic raster operations.

Images are plain float64 numpy arrays: 2D (H, W) for grayscale, 3D
(H, W, 3) in RGB order for color, intensities nominally in [0, 1].
Gradients use forward differences with circular wrap so the gradient
operator is exactly diagonalized by the 2D DFT the solver relies on.
"""

from __future__ import annotations

import math
from typing import List, NamedTuple, Tuple

import numpy as np

from .errors import ConfigError, DimensionError, NumericError

__all__ = [
    "as_image", "as_color_image", "to_grayscale", "gradients", "resample",
    "pad_replicate", "crop", "ScaleLevel", "build_scale_schedule",
]

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # ITU-R BT.601 luma


def as_image(img) -> np.ndarray:
    """Validate and return a 2D float64 image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"expected 2D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError("image contains non-finite values")
    return arr


def as_color_image(img) -> np.ndarray:
    """Validate and return an (H, W, 3) float64 image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionError(f"expected (H, W, 3) image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError("image contains non-finite values")
    return arr


def to_grayscale(img) -> np.ndarray:
    """BT.601 luma: 0.299 R + 0.587 G + 0.114 B, clamped to [0, 1]."""
    arr = as_color_image(img)
    r, g, b = GRAY_WEIGHTS
    out = r * arr[:, :, 0] + g * arr[:, :, 1] + b * arr[:, :, 2]
    return np.clip(out, 0.0, 1.0)


def gradients(img) -> Tuple[np.ndarray, np.ndarray]:
    """Forward differences with circular wrap.

    gx[r, c] = I[r, c+1 mod W] - I[r, c]   (horizontal)
    gy[r, c] = I[r+1 mod H, c] - I[r, c]   (vertical)
    """
    arr = as_image(img)
    gx = np.roll(arr, -1, axis=1) - arr
    gy = np.roll(arr, -1, axis=0) - arr
    return gx, gy


def resample(img, target_h: int, target_w: int) -> np.ndarray:
    """Bilinear resampling with edge-clamped sampling.

    Sample positions follow the half-pixel convention:
    src = (dst + 0.5) * (src_size / dst_size) - 0.5, clamped to the
    source extent, so identical target dims return the input exactly.
    """
    arr = as_image(img)
    if target_h < 1 or target_w < 1:
        raise DimensionError(f"target dims must be >= 1, got {target_h}x{target_w}")
    h, w = arr.shape
    if (target_h, target_w) == (h, w):
        return arr.copy()
    ys = (np.arange(target_h) + 0.5) * (h / target_h) - 0.5
    xs = (np.arange(target_w) + 0.5) * (w / target_w) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = arr[np.ix_(y0, x0)] * (1 - fx) + arr[np.ix_(y0, x1)] * fx
    bot = arr[np.ix_(y1, x0)] * (1 - fx) + arr[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy


def pad_replicate(img, top: int, bottom: int, left: int, right: int) -> np.ndarray:
    """Edge-replicated padding; crop() of the center recovers the input."""
    arr = as_image(img)
    if min(top, bottom, left, right) < 0:
        raise DimensionError("pad amounts must be >= 0")
    if top == bottom == left == right == 0:
        return arr.copy()
    return np.pad(arr, ((top, bottom), (left, right)), mode="edge")


def crop(img, top: int, bottom: int, left: int, right: int) -> np.ndarray:
    """Inverse of pad_replicate: strip the given margins."""
    arr = np.asarray(img)
    h, w = arr.shape[:2]
    if top + bottom >= h or left + right >= w:
        raise DimensionError("crop margins exceed image size")
    return arr[top:h - bottom if bottom else h, left:w - right if right else w].copy()


class ScaleLevel(NamedTuple):
    image_scale: float   # <= 1, relative to full resolution
    kernel_size: int     # odd, >= 3


def _odd_ceil(x: float) -> int:
    n = int(math.ceil(x))
    return n if n % 2 == 1 else n + 1


def build_scale_schedule(kernel_size: int, min_kernel: int, ratio: float) -> List[ScaleLevel]:
    """Coarse-to-fine schedule, coarsest level first.

    Level count n = max(1, ceil(log(min_kernel / kernel_size) / log(ratio)) + 1);
    level i gets the smallest odd kernel >= kernel_size * ratio^(n-1-i)
    (never below 3) and image_scale = kernel_size_i / kernel_size.
    Consecutive levels whose rounded kernel sizes collide are merged so the
    image scales stay strictly increasing.
    """
    for name, v in (("kernel_size", kernel_size), ("min_kernel", min_kernel)):
        if v < 3 or v % 2 == 0:
            raise ConfigError(f"{name}: must be odd and >= 3, got {v}")
    if min_kernel > kernel_size:
        raise ConfigError(f"min_kernel {min_kernel} exceeds kernel_size {kernel_size}")
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"scale ratio must lie in (0,1), got {ratio}")

    n = max(1, math.ceil(math.log(min_kernel / kernel_size) / math.log(ratio)) + 1)
    sizes = []
    for i in range(n):
        k = _odd_ceil(kernel_size * ratio ** (n - 1 - i))
        k = max(k, 3)
        if not sizes or k > sizes[-1]:
            sizes.append(k)
    if sizes[-1] != kernel_size:   # guard; the i = n-1 term is kernel_size itself
        sizes.append(kernel_size)
    return [ScaleLevel(k / kernel_size, k) for k in sizes]
