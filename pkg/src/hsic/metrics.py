"""Distortion and rate measures plus the rate-distortion record type.

MSE is averaged over every sample of the cube (pixels and bands), which gives
one PSNR per cube. PSNR defaults to a peak of 1, the normalized scale the
network is trained on; pass the raw dynamic range (e.g. 255 for u8 data) for
comparisons against other codecs on raw samples.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

import numpy as np

from .cube_io import HyperCube
from .errors import ValidationError

__all__ = [
    "RdPoint",
    "mse",
    "psnr",
    "cube_psnr",
    "bpppb",
    "bpppb_exact",
    "file_bpppb",
    "write_rd_csv",
    "read_rd_csv",
]

INF = math.inf


def _values(x) -> np.ndarray:
    return x.samples if isinstance(x, HyperCube) else np.asarray(x, dtype=np.float64)


def mse(a, b) -> float:
    """Mean squared difference over all samples; accepts cubes or arrays."""
    a, b = _values(a), _values(b)
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch: {a.shape} vs {b.shape}")
    d = a.astype(np.float64) - b.astype(np.float64)
    return float(np.mean(d * d))


def psnr(mse_value: float, peak: float = 1.0) -> float:
    """``10 log10(peak**2 / mse)`` in dB, ``math.inf`` for a perfect match."""
    if mse_value < 0 or math.isnan(mse_value):
        raise ValidationError(f"mse must be non-negative, got {mse_value}")
    if peak <= 0:
        raise ValidationError(f"peak must be positive, got {peak}")
    if mse_value == 0:
        return INF
    return 10.0 * math.log10(peak * peak / mse_value)


def cube_psnr(reference, reconstruction, peak: float = 1.0) -> float:
    return psnr(mse(reference, reconstruction), peak)


def bpppb_exact(param_count: int, bits_per_param: int, height: int, width: int, bands: int) -> Fraction:
    for name, v in (("param_count", param_count), ("bits_per_param", bits_per_param),
                    ("height", height), ("width", width), ("bands", bands)):
        if v <= 0:
            raise ValidationError(f"{name} must be positive, got {v}")
    return Fraction(param_count * bits_per_param, height * width * bands)


def bpppb(param_count: int, bits_per_param: int, height: int, width: int, bands: int) -> float:
    """Parameter-only rate in bits per pixel per band."""
    return float(bpppb_exact(param_count, bits_per_param, height, width, bands))


def file_bpppb(total_bits: int, height: int, width: int, bands: int) -> float:
    """Header-inclusive rate: the whole bitstream divided over every sample."""
    return float(bpppb_exact(total_bits, 1, height, width, bands))


@dataclass(frozen=True)
class RdPoint:
    bpppb: float
    mse: float
    psnr: float
    iteration: int
    wall_seconds: float

    def __post_init__(self):
        if not self.bpppb > 0:
            raise ValidationError("bpppb must be positive")
        if self.mse < 0:
            raise ValidationError("mse must be non-negative")
        if (self.psnr == INF) != (self.mse == 0):
            raise ValidationError("psnr is infinite exactly when mse is zero")


RD_COLUMNS = [f.name for f in fields(RdPoint)]


def format_value(v) -> str:
    if isinstance(v, float):
        if v == INF:
            return "inf"
        return repr(v)
    return str(v)


def write_rd_csv(points, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(RD_COLUMNS)
        for p in points:
            w.writerow([format_value(v) for v in asdict(p).values()])


def read_rd_csv(path) -> list[RdPoint]:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return [
        RdPoint(
            bpppb=float(r["bpppb"]),
            mse=float(r["mse"]),
            psnr=float(r["psnr"]),
            iteration=int(r["iteration"]),
            wall_seconds=float(r["wall_seconds"]),
        )
        for r in rows
    ]
