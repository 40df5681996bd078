"""Quality metrics: PSNR, SSIM, error ratio, kernel similarity.

Deconvolution results carry an inherent translation ambiguity (any
shift of the kernel shifts the latent the opposite way), so every
comparison aligns first over integer circular shifts.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np
import scipy.signal

from .errors import DegenerateInputError, DimensionError
from .imagecore import resample
from .kernel import _centroid_shift
from .spectral import validate_kernel

__all__ = ["find_alignment_shift", "align_for_metric", "psnr", "ssim",
           "error_ratio", "kernel_similarity"]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_pair(a, b) -> Tuple[np.ndarray, np.ndarray]:
    aa = np.asarray(a, dtype=np.float64)
    bb = np.asarray(b, dtype=np.float64)
    if aa.shape != bb.shape or aa.ndim != 2:
        raise DimensionError(f"images must share a 2D shape: {aa.shape} vs {bb.shape}")
    return aa, bb


def find_alignment_shift(result, reference, max_shift: int) -> Tuple[int, int]:
    """Integer circular shift of ``result`` minimizing MSE vs ``reference``.

    Exhaustive search over [-max_shift, max_shift]^2; ties broken by
    smallest |dy|+|dx|, then by row-major enumeration order.
    """
    res, ref = _check_pair(result, reference)
    if max_shift < 0:
        raise ValueError(f"max_shift must be >= 0, got {max_shift}")
    best_key = None
    best = (0, 0)
    for dy in range(-max_shift, max_shift + 1):
        rolled_y = np.roll(res, dy, axis=0)
        for dx in range(-max_shift, max_shift + 1):
            diff = np.roll(rolled_y, dx, axis=1) - ref
            mse = float(np.mean(diff * diff))
            key = (mse, abs(dy) + abs(dx))
            if best_key is None or key < best_key:
                best_key = key
                best = (dy, dx)
    return best


def align_for_metric(result, reference, max_shift: int) -> np.ndarray:
    """Return the circular translate of ``result`` best matching ``reference``."""
    dy, dx = find_alignment_shift(result, reference, max_shift)
    return np.roll(np.asarray(result, dtype=np.float64), (dy, dx), axis=(0, 1))


def psnr(a, b) -> float:
    """10 log10(1 / MSE) for unit dynamic range; +inf when identical."""
    aa, bb = _check_pair(a, b)
    mse = float(np.mean((aa - bb) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2
    g = np.exp(-(x * x) / (2 * sigma * sigma))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(a, b) -> float:
    """Mean local SSIM, 11x11 Gaussian window sigma 1.5, L = 1.

    Local statistics come from 'valid' windowed convolution, so only
    fully supported windows contribute to the mean.
    """
    aa, bb = _check_pair(a, b)
    if min(aa.shape) < SSIM_WINDOW:
        raise DimensionError(
            f"image sides must be >= {SSIM_WINDOW} for SSIM, got {aa.shape}")
    w = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2

    def local_mean(x):
        return scipy.signal.convolve2d(x, w, mode="valid")

    mu_a = local_mean(aa)
    mu_b = local_mean(bb)
    var_a = local_mean(aa * aa) - mu_a * mu_a
    var_b = local_mean(bb * bb) - mu_b * mu_b
    cov = local_mean(aa * bb) - mu_a * mu_b
    score = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / \
            ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2))
    return float(np.mean(score))


def error_ratio(deblur_est, deblur_gt, sharp, max_shift: int = 15) -> float:
    """SSD(est, sharp) / SSD(gt-kernel deconvolution, sharp), both aligned.

    The denominator reference is the non-blind result obtained with the
    ground-truth kernel; if it matches the sharp image exactly there is
    nothing to normalize by and the input is degenerate.
    """
    est, sh = _check_pair(deblur_est, sharp)
    gt, _ = _check_pair(deblur_gt, sharp)
    a_est = align_for_metric(est, sh, max_shift)
    a_gt = align_for_metric(gt, sh, max_shift)
    num = float(np.sum((a_est - sh) ** 2))
    den = float(np.sum((a_gt - sh) ** 2))
    if den == 0.0:
        raise DegenerateInputError("reference deconvolution equals sharp image")
    return num / den


def _embed_centered(arr: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros((size, size), dtype=np.float64)
    off = (size - arr.shape[0]) // 2
    out[off:off + arr.shape[0], off:off + arr.shape[1]] = arr
    return out


def kernel_similarity(k_est, k_gt) -> float:
    """SSIM between kernels after size matching and centroid alignment.

    Both kernels are resampled to the larger side, normalized to peak 1,
    embedded in a canvas wide enough for the SSIM window, and circularly
    shifted so their mass centroids coincide with the canvas center.
    """
    ka = validate_kernel(k_est)
    kb = validate_kernel(k_gt)
    common = max(ka.shape[0], kb.shape[0])
    canvas = max(common, SSIM_WINDOW)
    if canvas % 2 == 0:
        canvas += 1

    def prepare(k):
        if k.shape[0] != common:
            k = resample(k, common, common)
            k = np.maximum(k, 0.0)
        k = k / k.max()
        k = _embed_centered(k, canvas)
        dy, dx = _centroid_shift(k)
        return np.roll(k, (dy, dx), axis=(0, 1))

    return ssim(prepare(ka), prepare(kb))
