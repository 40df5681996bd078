"""Dataset benchmarking: run the blind solver over a manifest of
(blurry, sharp, kernel) triples and collect quality metrics per pair.

The heavy lifting per image is independent, so pairs fan out across a
process pool by default; sequential mode runs them one at a time in this
process for honest wall-clock numbers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import SolverConfig
from .errors import DeblurError, InputError
from .fileio import read_image, read_kernel, read_manifest, resolve_manifest_path
from .imagecore import to_grayscale
from .kernel import project_kernel
from .metrics import align_for_metric, error_ratio, kernel_similarity, psnr, ssim
from .pipeline import blind_deconvolve, nonblind_deconvolve

__all__ = ["BenchRow", "RunReport", "run_pair", "run_bench"]

ALIGN_SHIFT = 15  # exhaustive alignment radius for full-image metrics

METRIC_COLUMNS = ("psnr_db", "ssim", "error_ratio", "kernel_sim", "seconds")


@dataclass
class BenchRow:
    image: str
    kernel: str
    psnr_db: float
    ssim: float
    error_ratio: float
    kernel_sim: float
    seconds: float


@dataclass
class RunReport:
    rows: List[BenchRow]
    aggregates: Dict[str, float]
    failures: List[Dict[str, str]]
    config: Dict[str, float]
    timestamp: str
    mode: str

    def recompute_aggregates(self) -> Dict[str, float]:
        out = {}
        for col in METRIC_COLUMNS:
            out[col] = float(np.mean([getattr(r, col) for r in self.rows]))
        return out


def _gray(img: np.ndarray) -> np.ndarray:
    return to_grayscale(img) if img.ndim == 3 else img


def run_pair(blurry_path: str, sharp_path: str, kernel_path: str,
             cfg: SolverConfig, image_id: str, kernel_id: str
             ) -> Tuple[BenchRow, np.ndarray]:
    """Deblur one pair and score it against the references.

    Returns the metrics row and the estimated kernel (for the report
    figures). The seconds column is solver time only; image loading and
    the reference deconvolution used by error_ratio are excluded.
    """
    blurry = read_image(blurry_path)
    sharp = read_image(sharp_path)
    k_gt = project_kernel(read_kernel(kernel_path))
    if k_gt.shape[0] != k_gt.shape[1] or k_gt.shape[0] % 2 == 0:
        raise InputError(f"ground-truth kernel must be square and odd, "
                         f"got {k_gt.shape}")

    result = blind_deconvolve(blurry, cfg)

    est = _gray(result.latent)
    ref = _gray(sharp)
    gt_deconv = _gray(nonblind_deconvolve(blurry, k_gt, cfg))
    aligned = align_for_metric(est, ref, ALIGN_SHIFT)
    row = BenchRow(
        image=image_id,
        kernel=kernel_id,
        psnr_db=psnr(aligned, ref),
        ssim=ssim(aligned, ref),
        error_ratio=error_ratio(est, gt_deconv, ref, ALIGN_SHIFT),
        kernel_sim=kernel_similarity(result.kernel, k_gt),
        seconds=result.timing["total"],
    )
    return row, result.kernel


def _job(args):
    idx, bp, sp, kp, cfg, iid, kid = args
    try:
        row, k_est = run_pair(bp, sp, kp, cfg, iid, kid)
        return idx, row, k_est, None
    except (DeblurError, OSError) as exc:
        return idx, None, None, f"{type(exc).__name__}: {exc}"


def run_bench(dataset_dir: str, cfg: SolverConfig, sequential: bool = False,
              max_workers: Optional[int] = None
              ) -> Tuple[RunReport, List[np.ndarray]]:
    """Run every manifest pair; per-pair failures land in the report
    instead of aborting the run. Raises if the manifest is missing or
    empty, or if not a single pair succeeds."""
    manifest_path = os.path.join(dataset_dir, "manifest.csv")
    entries = read_manifest(manifest_path)
    if not entries:
        raise InputError(f"{manifest_path}: manifest lists no image pairs")

    jobs = []
    for idx, (brel, srel, krel) in enumerate(entries):
        jobs.append((idx,
                     resolve_manifest_path(manifest_path, brel),
                     resolve_manifest_path(manifest_path, srel),
                     resolve_manifest_path(manifest_path, krel),
                     cfg, brel, krel))

    if sequential or len(jobs) == 1:
        results = [_job(j) for j in jobs]
        mode = "sequential"
    else:
        workers = max_workers or min(len(jobs), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs))
        mode = "parallel"

    rows: List[BenchRow] = []
    kernels: List[np.ndarray] = []
    failures: List[Dict[str, str]] = []
    for idx, row, k_est, err in sorted(results, key=lambda r: r[0]):
        if row is not None:
            rows.append(row)
            kernels.append(k_est)
        else:
            failures.append({"image": entries[idx][0],
                             "kernel": entries[idx][2],
                             "error": err})
    if not rows:
        detail = failures[0]["error"] if failures else "no pairs"
        raise DeblurError(f"benchmark produced no successful pairs ({detail})")

    report = RunReport(
        rows=rows,
        aggregates={},
        failures=failures,
        config=cfg.as_dict(),
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        mode=mode,
    )
    report.aggregates = report.recompute_aggregates()
    return report, kernels


def report_rows_as_dicts(report: RunReport) -> List[dict]:
    return [asdict(r) for r in report.rows]
