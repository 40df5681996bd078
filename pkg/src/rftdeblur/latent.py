"""Latent-image estimation by half-quadratic splitting.

The objective couples a circular-convolution data term with L0 penalties
on the image gradients and on the FFT-ReLU response. Auxiliary variables
g (gradients) and h (rectified response) make both L0 terms separable:
g and h get closed-form hard thresholds, and the image update is a
single pointwise spectral division. The quadratic penalties gamma (for
g) and beta (for h) double every round until both clear penalty_max.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .config import SolverConfig
from .errors import DimensionError, NumericError
from .imagecore import as_image, gradients
from .rft import RftSurrogate, rft, zero_surrogate
from .spectral import fft2, gradient_otfs, ifft2, psf_to_otf, validate_kernel

__all__ = ["update_h", "update_g", "update_I", "solve_latent", "HqsState"]

DENOM_STABILIZER = 1e-8


@dataclass
class HqsState:
    """One inner round of the splitting, as used (for instrumentation)."""
    I: np.ndarray
    gx: Optional[np.ndarray]
    gy: Optional[np.ndarray]
    h: Optional[np.ndarray]
    gamma: float
    beta: float


def update_h(rft_img, lam: float, beta: float) -> np.ndarray:
    """Hard threshold: keep entries with value^2 >= lam/beta, else 0."""
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    arr = np.asarray(rft_img, dtype=np.float64)
    return np.where(arr * arr >= lam / beta, arr, 0.0)


def update_g(gx, gy, mu: float, gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Joint hard threshold on the gradient pair.

    A pixel keeps (gx, gy) when gx^2 + gy^2 >= mu/gamma, otherwise both
    are zeroed; thresholding the magnitude avoids axis-aligned artifacts.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    ax = np.asarray(gx, dtype=np.float64)
    ay = np.asarray(gy, dtype=np.float64)
    if ax.shape != ay.shape:
        raise DimensionError(f"gradient shapes differ: {ax.shape} vs {ay.shape}")
    keep = ax * ax + ay * ay >= mu / gamma
    return np.where(keep, ax, 0.0), np.where(keep, ay, 0.0)


def _spectral_I_update(fB, kf, dxf, dyf, fm, fgx, fgy, fh,
                       gamma: float, beta: float) -> np.ndarray:
    """Closed-form minimizer of the quadratic surrogate, in the spectrum."""
    num = np.conj(kf) * fB
    den = np.abs(kf) ** 2 + DENOM_STABILIZER
    if gamma > 0:
        num = num + gamma * (np.conj(dxf) * fgx + np.conj(dyf) * fgy)
        den = den + gamma * (np.abs(dxf) ** 2 + np.abs(dyf) ** 2)
    if beta > 0:
        num = num + beta * np.conj(fm) * fh
        den = den + beta * np.abs(fm) ** 2
    if np.any(den == 0.0):
        raise NumericError("all-zero denominator bin in latent update")
    return ifft2(num / den, hermitian=True)


def update_I(B, k, gx, gy, h, F: RftSurrogate, gamma: float, beta: float) -> np.ndarray:
    """Exact minimizer of ||I*k - B||^2 + gamma||grad I - g||^2 + beta||F I - h||^2.

    Solved in the frequency domain with stabilizer 1e-8 on the
    denominator; all operators are circulant so the division is exact.
    """
    arr = as_image(B)
    hgt, wid = arr.shape
    kf = psf_to_otf(k, hgt, wid)
    dxf, dyf = gradient_otfs(hgt, wid)
    fm = F.multiplier
    if fm.shape != arr.shape:
        raise DimensionError(f"surrogate dims {fm.shape} != image dims {arr.shape}")
    gxa = np.asarray(gx, dtype=np.float64)
    gya = np.asarray(gy, dtype=np.float64)
    ha = np.asarray(h, dtype=np.float64)
    for name, a in (("gx", gxa), ("gy", gya), ("h", ha)):
        if a.shape != arr.shape:
            raise DimensionError(f"{name} shape {a.shape} != image shape {arr.shape}")
    return _spectral_I_update(fft2(arr), kf, dxf, dyf, fm,
                              fft2(gxa), fft2(gya), fft2(ha), gamma, beta)


def solve_latent(B, k, F: Optional[RftSurrogate], cfg: SolverConfig,
                 init=None, trace: Optional[List[HqsState]] = None) -> np.ndarray:
    """Alternate the three updates under a growing penalty schedule.

    Starts from I = B (or ``init`` when warm-starting across outer
    iterations), gamma = gamma_init (default 2*mu), beta = beta_init
    (default 2*lam). Each round thresholds the gradients and the exact
    nonlinear FFT-ReLU response of the current I, then solves for I with
    the *linear* surrogate F standing in for the operator; the
    linear/nonlinear mismatch is inherent to the method. Penalties
    multiply by cfg.penalty_growth per round until both exceed
    cfg.penalty_max (values used in updates are capped at the max).
    A weight of zero disables its branch entirely.

    Returns the final I clamped to [0, 1]. Deterministic.
    """
    arr = as_image(B)
    hgt, wid = arr.shape
    validate_kernel(k)
    if F is None:
        F = zero_surrogate(hgt, wid)
    fm = F.multiplier
    if fm.shape != arr.shape:
        raise DimensionError(f"surrogate dims {fm.shape} != image dims {arr.shape}")

    use_g = cfg.mu > 0
    use_h = cfg.lam > 0 and bool(np.any(fm != 0))
    gamma = cfg.resolved_gamma_init() if use_g else 0.0
    beta = cfg.resolved_beta_init() if use_h else 0.0
    if use_g and gamma <= 0:
        raise ValueError("gamma_init must be > 0 when mu > 0")
    if use_h and beta <= 0:
        raise ValueError("beta_init must be > 0 when lambda > 0")
    pmax = cfg.penalty_max
    growth = cfg.penalty_growth

    I = arr.copy() if init is None else as_image(init)
    if I.shape != arr.shape:
        raise DimensionError(f"init shape {I.shape} != image shape {arr.shape}")

    fB = fft2(arr)
    kf = psf_to_otf(k, hgt, wid)
    dxf, dyf = gradient_otfs(hgt, wid)
    zero_spec = np.zeros((hgt, wid), dtype=np.complex128)

    while True:
        ge = gamma if use_g else 0.0
        be = beta if use_h else 0.0
        if use_g:
            gx, gy = gradients(I)
            tgx, tgy = update_g(gx, gy, cfg.mu, ge)
            fgx, fgy = fft2(tgx), fft2(tgy)
        else:
            tgx = tgy = None
            fgx = fgy = zero_spec
        if use_h:
            th = update_h(rft(I), cfg.lam, be)
            fh = fft2(th)
        else:
            th = None
            fh = zero_spec
        I = _spectral_I_update(fB, kf, dxf, dyf, fm, fgx, fgy, fh, ge, be)
        if trace is not None:
            trace.append(HqsState(I=I.copy(), gx=tgx, gy=tgy, h=th,
                                  gamma=ge, beta=be))
        gamma *= growth
        beta *= growth
        if ((not use_g or gamma > pmax) and (not use_h or beta > pmax)):
            break

    return np.clip(I, 0.0, 1.0)
