"""Image, kernel, and manifest serialization.

Images move through the solver as float64 in [0, 1]; files are PNG
(8/16-bit, gray or RGB) or binary PGM/PPM. Kernels use a small text
format that round-trips float64 bit-exactly:

    ksize <h> <w>
    <w space-separated values>   (h lines, >= 9 significant digits)

Manifests are CSV files with the header `blurry,sharp,kernel` holding
paths relative to the manifest's directory.
"""

from __future__ import annotations

import csv
import os
from typing import List, Sequence, Tuple

import cv2
import numpy as np

from .errors import DimensionError, InputError, NumericError

__all__ = ["read_image", "write_image", "read_kernel", "write_kernel",
           "write_kernel_png", "read_manifest", "write_manifest",
           "resolve_manifest_path"]

_MAX = {8: 255.0, 16: 65535.0}


def read_image(path: str) -> np.ndarray:
    """Load an image as float64 in [0, 1]; grayscale 2D, color (H, W, 3) RGB."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise InputError(f"cannot read image: {path}")
    if raw.dtype == np.uint8:
        scale = _MAX[8]
    elif raw.dtype == np.uint16:
        scale = _MAX[16]
    else:
        raise InputError(f"unsupported sample type {raw.dtype} in {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = cv2.cvtColor(raw, cv2.COLOR_BGRA2BGR)
        if raw.shape[2] != 3:
            raise InputError(f"unsupported channel count {raw.shape[2]} in {path}")
        raw = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    elif raw.ndim != 2:
        raise InputError(f"unsupported image layout {raw.shape} in {path}")
    return raw.astype(np.float64) / scale


def write_image(path: str, img: np.ndarray, depth: int = 8) -> None:
    """Quantize to 8- or 16-bit and write; color arrays are RGB in memory."""
    if depth not in _MAX:
        raise ValueError(f"depth must be 8 or 16, got {depth}")
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise DimensionError(f"expected 2D or (H, W, 3) image, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError("image contains non-finite values")
    q = np.rint(np.clip(arr, 0.0, 1.0) * _MAX[depth])
    q = q.astype(np.uint8 if depth == 8 else np.uint16)
    if q.ndim == 3:
        q = cv2.cvtColor(q, cv2.COLOR_RGB2BGR)
    if not cv2.imwrite(str(path), q):
        raise InputError(f"cannot write image: {path}")


def read_kernel(path: str) -> np.ndarray:
    """Parse the kernel text format. Values are taken verbatim (no
    renormalization) so write/read round trips are bit-exact."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read kernel: {path}: {exc}") from exc
    if not lines:
        raise InputError(f"empty kernel file: {path}")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "ksize":
        raise InputError(f"{path}: expected header 'ksize <h> <w>', got {lines[0]!r}")
    try:
        hgt, wid = int(head[1]), int(head[2])
    except ValueError as exc:
        raise InputError(f"{path}: bad kernel dimensions in header") from exc
    if hgt <= 0 or wid <= 0 or len(lines) != 1 + hgt:
        raise InputError(f"{path}: expected {hgt} value rows")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != wid:
            raise InputError(f"{path}: line {i}: expected {wid} values, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise InputError(f"{path}: line {i}: malformed value") from exc
    arr = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{path}: kernel contains non-finite values")
    return arr


def write_kernel(path: str, k: np.ndarray) -> None:
    arr = np.asarray(k, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"kernel must be 2D, got shape {arr.shape}")
    hgt, wid = arr.shape
    # 17 significant digits round-trip any float64 exactly
    body = "\n".join(" ".join(f"{v:.17g}" for v in row) for row in arr)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"ksize {hgt} {wid}\n{body}\n")


def write_kernel_png(path: str, k: np.ndarray) -> None:
    """Visualization: kernel scaled so its peak maps to full white."""
    arr = np.asarray(k, dtype=np.float64)
    peak = float(arr.max())
    vis = arr / peak if peak > 0 else arr
    write_image(path, vis)


def read_manifest(path: str) -> List[Tuple[str, str, str]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = [row for row in reader if row]
    except OSError as exc:
        raise InputError(f"cannot read manifest: {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["blurry", "sharp", "kernel"]:
        raise InputError(f"{path}: manifest must start with header 'blurry,sharp,kernel'")
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise InputError(f"{path}: line {i}: expected 3 columns, got {len(row)}")
        out.append((row[0].strip(), row[1].strip(), row[2].strip()))
    return out


def write_manifest(path: str, rows: Sequence[Tuple[str, str, str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["blurry", "sharp", "kernel"])
        for blurry, sharp, kernel in rows:
            writer.writerow([blurry, sharp, kernel])


def resolve_manifest_path(manifest_path: str, rel: str) -> str:
    return os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(manifest_path)), rel))
