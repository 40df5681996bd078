"""FFT transforms, PSF/OTF conversion, and spectral convolution.

Conventions: forward transform is the unnormalized 2D DFT (DC bin equals
the pixel sum); the inverse carries the full 1/(H*W) factor. The solver
works on the full complex spectrum; Hermitian symmetry of real-image
spectra is an invariant callers may rely on.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

from .errors import DimensionError, NumericError

__all__ = [
    "fft2", "ifft2", "psf_to_otf", "convolve",
    "validate_kernel", "gradient_otfs",
]

# imaginary residue allowed when inverting a spectrum declared Hermitian
HERMITIAN_TOL = 1e-6


def fft2(img) -> np.ndarray:
    """Unnormalized forward 2D DFT of a real image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"expected 2D image, got shape {arr.shape}")
    return scipy.fft.fft2(arr)


def ifft2(spec, hermitian: bool = False) -> np.ndarray:
    """Inverse DFT scaled by 1/(H*W), returning the real part.

    With hermitian=True the input is declared conjugate-symmetric and the
    imaginary residue is checked against HERMITIAN_TOL before being
    discarded; a larger residue means an upstream bug, not roundoff.
    """
    arr = np.asarray(spec)
    if arr.ndim != 2:
        raise DimensionError(f"expected 2D spectrum, got shape {arr.shape}")
    out = scipy.fft.ifft2(arr)
    if hermitian:
        resid = np.max(np.abs(out.imag)) if out.size else 0.0
        if not resid <= HERMITIAN_TOL:
            raise NumericError(
                f"imaginary residue {resid:.3e} exceeds {HERMITIAN_TOL:.1e} "
                "for a spectrum declared Hermitian")
    return np.ascontiguousarray(out.real)


def validate_kernel(k, normalized: bool = True) -> np.ndarray:
    """Check kernel invariants: square, odd side, nonnegative, sum 1."""
    arr = np.asarray(k, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"kernel must be square, got shape {arr.shape}")
    if arr.shape[0] % 2 == 0:
        raise DimensionError(f"kernel side must be odd, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise NumericError("kernel contains non-finite values")
    if normalized:
        if np.any(arr < 0):
            raise NumericError("kernel has negative entries")
        s = arr.sum()
        if abs(s - 1.0) > 1e-9:
            raise NumericError(f"kernel sum {s!r} deviates from 1 by more than 1e-9")
    return arr


def psf_to_otf(k, h: int, w: int) -> np.ndarray:
    """Zero-embed a centered PSF into h x w and transform.

    The kernel center is circularly shifted to index (0, 0) so that
    pointwise spectral multiplication equals circular convolution with
    the kernel centered on each output pixel.
    """
    arr = validate_kernel(k, normalized=False)
    s = arr.shape[0]
    if s > min(h, w):
        raise DimensionError(f"kernel side {s} exceeds image dims {h}x{w}")
    big = np.zeros((h, w), dtype=np.float64)
    big[:s, :s] = arr
    r = s // 2
    big = np.roll(big, (-r, -r), axis=(0, 1))
    return scipy.fft.fft2(big)


def convolve(img, k) -> np.ndarray:
    """Circular convolution via the convolution theorem."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"expected 2D image, got shape {arr.shape}")
    otf = psf_to_otf(k, arr.shape[0], arr.shape[1])
    return ifft2(fft2(arr) * otf, hermitian=True)


def gradient_otfs(h: int, w: int):
    """Spectra of the circular forward-difference operators.

    Returns (Dx, Dy) such that fft2(gx) = Dx * fft2(I) and likewise for
    gy, for the gradients() convention in imagecore.
    """
    px = np.zeros((h, w), dtype=np.float64)
    px[0, 0] = -1.0
    px[0, w - 1] = 1.0
    py = np.zeros((h, w), dtype=np.float64)
    py[0, 0] = -1.0
    py[h - 1, 0] = 1.0
    return scipy.fft.fft2(px), scipy.fft.fft2(py)
