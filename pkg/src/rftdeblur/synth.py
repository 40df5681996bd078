"""Synthetic data: random motion kernels, blurring, additive noise.

Everything here is deterministic for a fixed seed, which is what makes
the benchmark manifests and the end-to-end test suites reproducible.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .imagecore import as_color_image, as_image, crop, pad_replicate
from .kernel import center_kernel, project_kernel
from .spectral import convolve, validate_kernel

__all__ = ["random_motion_kernel", "add_gaussian_noise", "blur_image"]


def _splat(canvas: np.ndarray, y: float, x: float, mass: float) -> None:
    """Deposit mass at a continuous position via bilinear weights."""
    size = canvas.shape[0]
    y0, x0 = int(np.floor(y)), int(np.floor(x))
    fy, fx = y - y0, x - x0
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            r, c = y0 + dy, x0 + dx
            if 0 <= r < size and 0 <= c < size and wy * wx > 0:
                canvas[r, c] += mass * wy * wx


def random_motion_kernel(size: int, seed: int) -> np.ndarray:
    """Rasterize a seeded random-walk camera trajectory into a kernel.

    A point mass wanders with inertia inside the kernel square,
    reflecting off the borders; each step splats bilinearly. The result
    is projected to the simplex and centered, so it satisfies every
    kernel invariant and is safe to feed straight into blur_image.
    """
    if size < 3 or size % 2 == 0:
        raise ConfigError(f"kernel size must be odd and >= 3, got {size}")
    rng = np.random.default_rng(seed)
    canvas = np.zeros((size, size), dtype=np.float64)
    span = float(size - 1)
    pos = np.full(2, span / 2.0)
    ang = rng.uniform(0.0, 2.0 * np.pi)
    vel = np.array([np.sin(ang), np.cos(ang)]) * 0.3
    # high inertia and a short walk keep the trace a thin curve, the way
    # real shake trajectories look; dense scribbles defeat every
    # coarse-to-fine estimator because they lose identity when downscaled
    steps = 4 * size
    _splat(canvas, pos[0], pos[1], 1.0)
    for _ in range(steps):
        vel = 0.96 * vel + rng.normal(0.0, 0.08, size=2)
        speed = float(np.hypot(vel[0], vel[1]))
        if speed > 0.45:
            vel *= 0.45 / speed
        pos = pos + vel
        for axis in range(2):
            if pos[axis] < 0.0:
                pos[axis] = -pos[axis]
                vel[axis] = -vel[axis]
            if pos[axis] > span:
                pos[axis] = 2.0 * span - pos[axis]
                vel[axis] = -vel[axis]
        _splat(canvas, pos[0], pos[1], 1.0)
    return center_kernel(project_kernel(canvas))


def add_gaussian_noise(img: np.ndarray, sigma: float, seed: int = 0) -> np.ndarray:
    """i.i.d. zero-mean Gaussian noise, clipped back to [0, 1]."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    arr = np.asarray(img, dtype=np.float64)
    if sigma == 0:
        return np.clip(arr, 0.0, 1.0)
    rng = np.random.default_rng(seed)
    return np.clip(arr + rng.normal(0.0, sigma, size=arr.shape), 0.0, 1.0)


def blur_image(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Blur with replicate padding so borders see no wrap-around.

    Accepts grayscale or color; color channels are blurred independently.
    """
    karr = validate_kernel(k)
    rad = karr.shape[0] // 2
    arr = np.asarray(img, dtype=np.float64)

    def one(ch: np.ndarray) -> np.ndarray:
        p = pad_replicate(as_image(ch), rad, rad, rad, rad)
        return crop(convolve(p, karr), rad, rad, rad, rad)

    if arr.ndim == 2:
        return one(arr)
    arr = as_color_image(arr)
    return np.stack([one(arr[:, :, i]) for i in range(3)], axis=2)
