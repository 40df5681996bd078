"""Benchmark report emission: CSV rows, JSON metadata, and figures.

The CSV carries one row per pair plus a trailing `mean` row; the JSON
sidecar records everything needed to reproduce the run (config snapshot,
host info, timestamp, execution mode, failures). Two PNG figures are
rendered next to the CSV: a per-image PSNR bar chart and a grid of the
estimated kernels.
"""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import sys
from typing import List, Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .bench import METRIC_COLUMNS, RunReport, report_rows_as_dicts

__all__ = ["write_csv", "write_json", "write_figures", "write_report"]


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_csv(report: RunReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image", "kernel", *METRIC_COLUMNS])
        for row in report.rows:
            writer.writerow([row.image, row.kernel,
                             *(_fmt(getattr(row, c)) for c in METRIC_COLUMNS)])
        writer.writerow(["mean", "",
                         *(_fmt(report.aggregates[c]) for c in METRIC_COLUMNS)])


def write_json(report: RunReport, path: str) -> None:
    payload = {
        "timestamp": report.timestamp,
        "mode": report.mode,
        "config": report.config,
        "host": {
            "platform": platform.platform(),
            "python": sys.version.split()[0],
            "cpu_count": os.cpu_count(),
        },
        "aggregates": report.aggregates,
        "rows": report_rows_as_dicts(report),
        "failures": report.failures,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _psnr_figure(report: RunReport) -> Figure:
    n = len(report.rows)
    fig = Figure(figsize=(max(6.0, 0.45 * n + 2.0), 4.0))
    ax = fig.subplots()
    vals = [r.psnr_db for r in report.rows]
    ax.bar(range(n), vals, color="#4878a8")
    ax.axhline(report.aggregates["psnr_db"], color="#b04030",
               linestyle="--", linewidth=1.2,
               label=f"mean {report.aggregates['psnr_db']:.2f} dB")
    ax.set_xticks(range(n))
    ax.set_xticklabels([r.image for r in report.rows],
                       rotation=90, fontsize=7)
    ax.set_ylabel("PSNR (dB)")
    ax.set_title("Restoration quality per image")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    return fig


def _kernel_figure(report: RunReport, kernels: Sequence[np.ndarray]) -> Figure:
    n = max(len(kernels), 1)
    cols = int(math.ceil(math.sqrt(n)))
    krows = int(math.ceil(n / cols))
    fig = Figure(figsize=(1.6 * cols, 1.8 * krows))
    axes = fig.subplots(krows, cols, squeeze=False)
    for i in range(krows * cols):
        ax = axes[i // cols][i % cols]
        ax.set_axis_off()
        if i < len(kernels):
            k = kernels[i]
            peak = float(k.max())
            ax.imshow(k / peak if peak > 0 else k, cmap="gray",
                      interpolation="nearest")
            ax.set_title(report.rows[i].kernel, fontsize=6)
    fig.suptitle("Estimated kernels", fontsize=10)
    fig.tight_layout()
    return fig


def write_figures(report: RunReport, kernels: Sequence[np.ndarray],
                  csv_path: str) -> List[str]:
    stem, _ = os.path.splitext(csv_path)
    paths = []
    for fig, suffix in ((_psnr_figure(report), "_psnr.png"),
                        (_kernel_figure(report, kernels), "_kernels.png")):
        out = stem + suffix
        FigureCanvasAgg(fig).print_png(out)
        paths.append(out)
    return paths


def write_report(report: RunReport, kernels: Sequence[np.ndarray],
                 csv_path: str) -> List[str]:
    """Write CSV + JSON + figures; returns every path written."""
    write_csv(report, csv_path)
    json_path = os.path.splitext(csv_path)[0] + ".json"
    write_json(report, json_path)
    figure_paths = write_figures(report, kernels, csv_path)
    return [csv_path, json_path, *figure_paths]
