"""Reconstruction from a compressed model, whole frame or any coordinate set."""

from __future__ import annotations

import numpy as np

from ..cube_io import CubeHeader, HyperCube, SampleFormat
from ..siren import SirenModel, evaluate
from .bitstream import CompressedModel, dequantize
from .grid import make_grid, pixel_coords

__all__ = ["reconstruct_spectra", "decompress", "decode_partial", "decode_region"]


def reconstruct_spectra(model: SirenModel, coords) -> np.ndarray:
    """Network output clamped to [0, 1] as float64, one row per coordinate."""
    return np.clip(evaluate(model, coords).astype(np.float64), 0.0, 1.0)


def _denorm(values: np.ndarray, cm: CompressedModel) -> np.ndarray:
    norm = cm.norm
    return norm.lo + values * norm.span


def decode_partial(cm: CompressedModel, coords, normalized: bool = False) -> np.ndarray:
    """Spectra at arbitrary ``(x, y)`` coordinates, shape ``(len(coords), bands)``.

    Grid-point coordinates reproduce the matching pixels of :func:`decompress`
    exactly; off-grid points sample the continuous representation.
    """
    v = reconstruct_spectra(dequantize(cm), coords)
    return v if normalized else _denorm(v, cm)


def decode_region(cm: CompressedModel, rows, cols, normalized: bool = False) -> HyperCube:
    """Decode the sub-grid ``rows x cols`` of the full-resolution frame."""
    rows, cols = np.asarray(rows), np.asarray(cols)
    coords = pixel_coords(rows, cols, cm.height, cm.width)
    header = CubeHeader(rows.size, cols.size, cm.bands, cm.cube_header.interleave, SampleFormat.F32LE)
    v = reconstruct_spectra(dequantize(cm), coords)
    if normalized:
        return HyperCube.from_spectra(v, header, cm.norm)
    return HyperCube.from_spectra(_denorm(v, cm), header)


def decompress(cm: CompressedModel, normalized: bool = False) -> HyperCube:
    """Evaluate the network on every pixel center and undo normalization.

    With ``normalized=True`` the clamped [0, 1] reconstruction is returned
    with the stored :class:`NormParams` attached instead.
    """
    grid = make_grid(cm.height, cm.width)
    v = reconstruct_spectra(dequantize(cm), grid.coords)
    if normalized:
        return HyperCube.from_spectra(v, cm.cube_header, cm.norm)
    return HyperCube.from_spectra(_denorm(v, cm), cm.cube_header)
