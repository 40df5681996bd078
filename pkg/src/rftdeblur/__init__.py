"""Blind image deblurring with a rectified-spectrum sparsity prior."""

from .bench import BenchRow, RunReport, run_bench, run_pair
from .config import DEFAULT_CONFIG, SolverConfig, parse_config
from .errors import (ConfigError, DeblurError, DegenerateInputError,
                     DegenerateKernelError, DimensionError, InputError,
                     NumericError)
from .fileio import (read_image, read_kernel, read_manifest, write_image,
                     write_kernel, write_kernel_png, write_manifest)
from .imagecore import build_scale_schedule, gradients, resample, to_grayscale
from .kernel import (center_kernel, estimate_kernel, project_kernel,
                     remove_isolated_noise, upsample_kernel)
from .latent import solve_latent, update_g, update_h, update_I
from .metrics import (align_for_metric, error_ratio, kernel_similarity, psnr,
                      ssim)
from .pipeline import (DeblurResult, bilateral_filter, blind_deconvolve,
                       kernel_init, laplacian_prior_deconv,
                       nonblind_deconvolve, suppress_ringing)
from .rft import RftSurrogate, apply_surrogate, fit_surrogate, l0_count, rft
from .spectral import convolve, fft2, ifft2, psf_to_otf, validate_kernel
from .synth import add_gaussian_noise, blur_image, random_motion_kernel

__version__ = "0.1.0"

__all__ = [
    "BenchRow", "ConfigError", "DeblurError", "DeblurResult",
    "DEFAULT_CONFIG", "DegenerateInputError", "DegenerateKernelError",
    "DimensionError", "InputError", "NumericError", "RftSurrogate",
    "RunReport", "SolverConfig", "add_gaussian_noise", "align_for_metric",
    "apply_surrogate", "bilateral_filter", "blind_deconvolve", "blur_image",
    "build_scale_schedule", "center_kernel", "convolve", "error_ratio",
    "estimate_kernel", "fft2", "fit_surrogate", "gradients", "ifft2",
    "kernel_init", "kernel_similarity", "l0_count", "laplacian_prior_deconv",
    "nonblind_deconvolve", "parse_config", "project_kernel", "psf_to_otf",
    "psnr", "random_motion_kernel", "read_image", "read_kernel",
    "read_manifest", "remove_isolated_noise", "resample", "rft", "run_bench",
    "run_pair", "solve_latent", "ssim", "suppress_ringing", "to_grayscale",
    "update_I", "update_g", "update_h", "upsample_kernel", "validate_kernel",
    "write_image", "write_kernel", "write_kernel_png", "write_manifest",
]
