"""The FFT-ReLU operator and its fitted linear surrogate.

rft(I) transforms the image, rectifies the real and imaginary parts of
every frequency bin independently, inverts, and subtracts half the
input. Sharp images produce sparser responses than blurred ones, which
is the prior the blind solver exploits.

The closed-form latent update needs a *linear* stand-in F with
F I = rft(I); fit_surrogate finds a per-frequency complex multiplier
(i.e. a convolution operator) by Adam on the least-squares objective.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .config import SolverConfig
from .errors import DimensionError, NumericError
from .spectral import fft2, ifft2

__all__ = ["rft", "l0_count", "SparsityStats", "RftSurrogate",
           "fit_surrogate", "apply_surrogate", "zero_surrogate"]

# early stop when the objective improves by less than this fraction
REL_IMPROVEMENT_STOP = 1e-4
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class SparsityStats:
    l0_count: int
    total_pixels: int
    epsilon: float


@dataclass(frozen=True)
class RftSurrogate:
    """Immutable fitted surrogate: one complex multiplier per frequency bin.

    residual_history[t] is the relative residual ||F I - rft(I)|| / ||rft(I)||
    after t accepted Adam steps (entry 0 is the zero-initialized start).
    """
    multiplier: np.ndarray
    residual_history: Tuple[float, ...] = (0.0,)

    @property
    def height(self) -> int:
        return self.multiplier.shape[0]

    @property
    def width(self) -> int:
        return self.multiplier.shape[1]


def rft(img) -> np.ndarray:
    """ifft2(relu(fft2(I))) - I/2 with ReLU on Re and Im independently."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"expected 2D image, got shape {arr.shape}")
    spec = fft2(arr)
    rect = np.maximum(spec.real, 0.0) + 1j * np.maximum(spec.imag, 0.0)
    # the rectified spectrum is no longer Hermitian; its inverse splits into
    # a real part (kept) and a structured imaginary part (discarded)
    out = ifft2(rect, hermitian=False) - 0.5 * arr
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite values in FFT-ReLU response")
    return out


def l0_count(img, eps: float) -> SparsityStats:
    """Count entries with |value| > eps."""
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    arr = np.asarray(img, dtype=np.float64)
    return SparsityStats(int(np.count_nonzero(np.abs(arr) > eps)),
                         int(arr.size), float(eps))


def zero_surrogate(h: int, w: int) -> RftSurrogate:
    """All-zero multiplier: F I = 0 for every image (inert prior branch)."""
    return RftSurrogate(np.zeros((h, w), dtype=np.complex128), (0.0,))


def apply_surrogate(surr: RftSurrogate, img) -> np.ndarray:
    """real(ifft2(multiplier * fft2(img)))."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.shape != surr.multiplier.shape:
        raise DimensionError(
            f"surrogate dims {surr.multiplier.shape} != image dims {arr.shape}")
    return ifft2(surr.multiplier * fft2(arr), hermitian=True)


def _hermitian_symmetrize(m: np.ndarray) -> np.ndarray:
    # average with the conjugate at negated frequencies: (-u) % H, (-v) % W
    neg = np.roll(m[::-1, ::-1], (1, 1), axis=(0, 1))
    return 0.5 * (m + np.conj(neg))


def fit_surrogate(img, cfg: SolverConfig) -> RftSurrogate:
    """Fit the per-frequency multiplier to minimize ||F I - rft(I)||^2.

    Plain Adam (lr cfg.adam_lr, beta 0.9/0.999, eps 1e-8) on the real and
    imaginary parts, zero-initialized, Hermitian-symmetrized after every
    step so the surrogate maps real images to real images. Stops after
    cfg.adam_steps steps or once a step improves the objective by less
    than a 1e-4 fraction of its current value, i.e. at genuine stall.
    Deterministic throughout.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"expected 2D image, got shape {arr.shape}")
    h, w = arr.shape
    target = rft(arr)
    tnorm = float(np.sqrt(np.sum(target * target)))
    if tnorm == 0.0:
        return RftSurrogate(np.zeros((h, w), dtype=np.complex128), (0.0,))

    x = fft2(arr)
    n = float(h * w)
    mult = np.zeros((h, w), dtype=np.complex128)
    m1 = np.zeros((2, h, w))
    m2 = np.zeros((2, h, w))
    lr, b1, b2 = cfg.adam_lr, ADAM_BETA1, ADAM_BETA2

    def objective(mm):
        resid = ifft2(mm * x, hermitian=True) - target
        return float(np.sum(resid * resid)), resid

    obj, resid = objective(mult)
    if not np.isfinite(obj):
        raise NumericError("non-finite surrogate objective")
    best = obj
    history = [np.sqrt(obj) / tnorm]

    for t in range(1, cfg.adam_steps + 1):
        # least-squares gradient wrt the multiplier: (2/N) conj(X) fft2(resid)
        grad = (2.0 / n) * np.conj(x) * fft2(resid)
        g = np.stack([grad.real, grad.imag])
        m1 = b1 * m1 + (1 - b1) * g
        m2 = b2 * m2 + (1 - b2) * g * g
        mhat = m1 / (1 - b1 ** t)
        vhat = m2 / (1 - b2 ** t)
        step = lr * mhat / (np.sqrt(vhat) + ADAM_EPS)
        mult = _hermitian_symmetrize(mult - (step[0] + 1j * step[1]))
        new_obj, resid = objective(mult)
        if not np.isfinite(new_obj):
            raise NumericError("non-finite surrogate objective")
        history.append(np.sqrt(new_obj) / tnorm)
        # momentum causes transient objective bumps; only a step that
        # improves on the best yet by a negligible fraction of it means
        # stall (normalizing by the current value, not the starting one,
        # keeps the rule meaningful after large early progress)
        if new_obj <= best and best - new_obj < REL_IMPROVEMENT_STOP * best:
            break
        best = min(best, new_obj)

    return RftSurrogate(mult, tuple(history))
