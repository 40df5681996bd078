"""Blur-kernel estimation in the gradient domain, plus post-processing.

Estimation solves a ridge-regularized least squares over the circulant
system relating latent and blurry gradients, entirely in the frequency
domain. Post-processing keeps the estimate on the kernel simplex:
negatives clipped and mass renormalized, isolated specks removed,
centroid re-centered, and bilinear upscaling between pyramid levels.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np
import scipy.fft
import scipy.ndimage

from .errors import (ConfigError, DegenerateInputError, DegenerateKernelError,
                     DimensionError, NumericError)
from .imagecore import resample
from .spectral import fft2, ifft2, validate_kernel

__all__ = ["estimate_kernel", "project_kernel", "remove_isolated_noise",
           "center_kernel", "upsample_kernel"]

GRADIENT_ENERGY_FLOOR = 1e-12


def _kernel_raster(gIx, gIy, gBx, gBy, alpha: float) -> np.ndarray:
    """Full-size ridge solution of min_k ||gI * k - gB||^2 + alpha ||k||^2.

    Returned in wrapped layout (kernel mass around index (0,0)); bins
    where the regularized denominator vanishes are set to zero.
    """
    ax_ = fft2(gIx)
    ay_ = fft2(gIy)
    bx_ = fft2(gBx)
    by_ = fft2(gBy)
    num = np.conj(ax_) * bx_ + np.conj(ay_) * by_
    den = np.abs(ax_) ** 2 + np.abs(ay_) ** 2 + alpha
    quot = np.zeros_like(num)
    nz = den > 0
    np.divide(num, den, out=quot, where=nz)
    return ifft2(quot, hermitian=True)


def estimate_kernel(gIx, gIy, gBx, gBy, alpha: float, ksize: int) -> np.ndarray:
    """Estimate an odd square kernel from gradient maps.

    The spectral ridge solution is inverted, the centered ksize window is
    cropped (energy outside is discarded), and the crop is projected to
    the simplex.
    """
    maps = [np.asarray(a, dtype=np.float64) for a in (gIx, gIy, gBx, gBy)]
    shape = maps[0].shape
    if any(m.shape != shape for m in maps) or maps[0].ndim != 2:
        raise DimensionError("gradient maps must share one 2D shape")
    if ksize < 1 or ksize % 2 == 0 or ksize > min(shape):
        raise DimensionError(
            f"ksize must be odd and fit the {shape[0]}x{shape[1]} maps, got {ksize}")
    if alpha < 0:
        raise ConfigError(f"alpha must be >= 0, got {alpha}")
    energy = float(np.sum(maps[0] ** 2 + maps[1] ** 2))
    if energy <= GRADIENT_ENERGY_FLOOR:
        raise DegenerateInputError(
            f"gradient energy {energy:.3e} too small for kernel estimation")

    raster = _kernel_raster(*maps, alpha)
    shifted = scipy.fft.fftshift(raster)
    cy, cx = shape[0] // 2, shape[1] // 2
    r = ksize // 2
    window = shifted[cy - r:cy + r + 1, cx - r:cx + r + 1]
    return project_kernel(window)


def project_kernel(k) -> np.ndarray:
    """Clip negatives to zero and normalize the remaining mass to 1."""
    arr = np.asarray(k, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"kernel raster must be 2D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError("kernel raster contains non-finite values")
    out = np.maximum(arr, 0.0)
    s = out.sum()
    if s <= 0.0:
        raise DegenerateKernelError("kernel has no positive mass")
    return out / s


def remove_isolated_noise(k, cc_threshold: float) -> np.ndarray:
    """Drop weak 8-connected components, then renormalize.

    Components of the >0 support whose mass is below cc_threshold times
    the largest component's mass are zeroed. The largest component always
    survives (cc_threshold < 1), so the result is never degenerate.
    """
    if not 0.0 <= cc_threshold < 1.0:
        raise ConfigError(f"cc_threshold must lie in [0,1), got {cc_threshold}")
    arr = np.asarray(k, dtype=np.float64)
    labels, count = scipy.ndimage.label(arr > 0, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        raise DegenerateKernelError("kernel has no positive mass")
    if count > 1:
        masses = scipy.ndimage.sum_labels(arr, labels, index=np.arange(1, count + 1))
        keep = masses >= cc_threshold * masses.max()
        arr = np.where(np.isin(labels, np.flatnonzero(keep) + 1), arr, 0.0)
    return project_kernel(arr)


def _centroid_shift(arr: np.ndarray) -> Tuple[int, int]:
    """Integer circular shift moving the mass centroid to the raster center.

    Residual offset after the shift lies in (-0.5, 0.5] per axis; a
    half-integer centroid therefore rounds toward the negative side.
    """
    s = arr.sum()
    hgt, wid = arr.shape
    rows = np.arange(hgt, dtype=np.float64)
    cols = np.arange(wid, dtype=np.float64)
    cy = float((arr.sum(axis=1) * rows).sum() / s)
    cx = float((arr.sum(axis=0) * cols).sum() / s)
    dy = math.ceil(((hgt - 1) / 2 - cy) - 0.5)
    dx = math.ceil(((wid - 1) / 2 - cx) - 0.5)
    return dy, dx


def center_kernel(k) -> np.ndarray:
    """Circularly shift a normalized kernel so its centroid is centered.

    Idempotent: the residual centroid offset is at most half a pixel,
    which maps to a zero shift on the second call.
    """
    arr = validate_kernel(k)
    dy, dx = _centroid_shift(arr)
    if dy == 0 and dx == 0:
        return arr.copy()
    return np.roll(arr, (dy, dx), axis=(0, 1))


def upsample_kernel(k, new_size: int) -> np.ndarray:
    """Bilinear resample to new_size (odd, >= current), then project."""
    arr = np.asarray(k, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"kernel must be square, got shape {arr.shape}")
    if new_size % 2 == 0 or new_size < arr.shape[0]:
        raise ConfigError(
            f"target size must be odd and >= {arr.shape[0]}, got {new_size}")
    return project_kernel(resample(arr, new_size, new_size))
