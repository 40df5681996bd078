"""Solver configuration: defaults, flat-file parsing, validation.

Config files are flat ``key = value`` lines; ``#`` starts a comment.
Unknown keys are hard errors so a typo in a benchmark run cannot silently
fall back to a default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Optional

from .errors import ConfigError

__all__ = ["SolverConfig", "parse_config", "DEFAULT_CONFIG"]


@dataclass(frozen=True)
class SolverConfig:
    """All tunables for the blind and non-blind solvers.

    ``gamma_init`` and ``beta_init`` default to None, which resolves to
    2*mu and 2*lam at solve time so that overriding the L0 weights keeps
    the penalty schedule consistent.
    """

    lam: float = 3e-4            # L0 weight on the FFT-ReLU response
    mu: float = 0.004            # L0 weight on image gradients
    alpha: float = 2.0           # ridge weight in kernel estimation
    max_iter: int = 5            # alternations per pyramid level
    kernel_size: int = 31
    min_kernel: int = 3
    scale_ratio: float = 0.7071
    gamma_init: Optional[float] = None
    beta_init: Optional[float] = None
    penalty_growth: float = 2.0
    penalty_max: float = 1e5
    adam_lr: float = 0.1
    adam_steps: int = 100
    l0_eps: float = 1e-3
    cc_threshold: float = 0.1
    bilateral_sigma_s: float = 5.0
    bilateral_sigma_r: float = 0.1
    nb_weight: float = 2e-3
    nb_exponent: float = 0.6667

    def resolved_gamma_init(self) -> float:
        return 2.0 * self.mu if self.gamma_init is None else self.gamma_init

    def resolved_beta_init(self) -> float:
        return 2.0 * self.lam if self.beta_init is None else self.beta_init

    def validate(self) -> "SolverConfig":
        """Check invariants; raises ConfigError naming the offending key."""
        for key in ("lam", "mu", "alpha", "nb_weight", "cc_threshold"):
            v = getattr(self, key)
            if not math.isfinite(v) or v < 0:
                raise ConfigError(f"{_FILE_KEY.get(key, key)}: must be >= 0, got {v}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter: must be >= 1, got {self.max_iter}")
        if self.adam_steps < 1:
            raise ConfigError(f"adam_steps: must be >= 1, got {self.adam_steps}")
        for key in ("kernel_size", "min_kernel"):
            v = getattr(self, key)
            if v < 3 or v % 2 == 0:
                raise ConfigError(f"{key}: must be odd and >= 3, got {v}")
        if self.min_kernel > self.kernel_size:
            raise ConfigError(
                f"min_kernel: must not exceed kernel_size "
                f"({self.min_kernel} > {self.kernel_size})")
        if not 0.0 < self.scale_ratio < 1.0:
            raise ConfigError(f"scale_ratio: must lie in (0,1), got {self.scale_ratio}")
        if self.penalty_growth <= 1.0:
            raise ConfigError(
                f"penalty_growth: must exceed 1, got {self.penalty_growth}")
        if self.penalty_max <= 0:
            raise ConfigError(f"penalty_max: must be > 0, got {self.penalty_max}")
        for key in ("adam_lr", "l0_eps", "bilateral_sigma_s", "bilateral_sigma_r"):
            v = getattr(self, key)
            if not math.isfinite(v) or v <= 0:
                raise ConfigError(f"{key}: must be > 0, got {v}")
        if self.cc_threshold >= 1.0:
            raise ConfigError(
                f"cc_threshold: must be < 1, got {self.cc_threshold}")
        if not 0.0 < self.nb_exponent <= 1.0:
            raise ConfigError(
                f"nb_exponent: must lie in (0,1], got {self.nb_exponent}")
        for key in ("gamma_init", "beta_init"):
            v = getattr(self, key)
            if v is not None and (not math.isfinite(v) or v <= 0):
                raise ConfigError(f"{key}: must be > 0 when given, got {v}")
        return self

    def as_dict(self) -> dict:
        """Snapshot with file-format keys, suitable for report metadata."""
        out = {}
        for f in fields(self):
            out[_FILE_KEY.get(f.name, f.name)] = getattr(self, f.name)
        return out


DEFAULT_CONFIG = SolverConfig()

# config-file key -> dataclass field ("lambda" is reserved in Python)
_FIELD_FOR_KEY = {f.name: f.name for f in fields(SolverConfig)}
_FIELD_FOR_KEY["lambda"] = "lam"
del _FIELD_FOR_KEY["lam"]
_FILE_KEY = {"lam": "lambda"}

_INT_FIELDS = {"max_iter", "kernel_size", "min_kernel", "adam_steps"}


def _parse_value(key: str, field_name: str, raw: str):
    raw = raw.strip()
    try:
        if field_name in _INT_FIELDS:
            # accept "5" or "5.0" but not "5.5"
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: malformed value {raw!r}") from None


def parse_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> SolverConfig:
    """Build a SolverConfig from an optional file plus optional overrides.

    ``overrides`` maps dataclass field names to values (CLI flags land
    here) and wins over file values. Unknown file keys raise ConfigError.
    """
    values = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        for lineno, line in enumerate(lines, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, raw = line.split("=", 1)
            key = key.strip()
            if key not in _FIELD_FOR_KEY:
                raise ConfigError(f"unknown config key {key!r} (line {lineno})")
            name = _FIELD_FOR_KEY[key]
            values[name] = _parse_value(key, name, raw)
    if overrides:
        for name, v in overrides.items():
            if v is None:
                continue
            if name not in {f.name for f in fields(SolverConfig)}:
                raise ConfigError(f"unknown config field {name!r}")
            values[name] = v
    cfg = replace(DEFAULT_CONFIG, **values)
    return cfg.validate()
