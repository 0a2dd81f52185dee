"""Deterministic smooth synthetic cubes standing in for real scenes.

Band ``c`` at pixel ``(m, n)`` is::

    0.5 + 0.5 * sum_k a_k sin(2 pi (fx_k n / N + fy_k m / M) + phi_k)

with ``sum_k |a_k| <= 1``, so every sample lies in [0, 1]. By default the
bands draw on a shared pool of spatial sinusoids through a sliding window:
band ``c`` uses pool entries ``c .. c+K-1``, so neighbouring bands share all
but one component and are strongly correlated, as real spectra are.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube_io import CubeHeader, HyperCube
from .errors import ValidationError

__all__ = ["SyntheticSpec", "gen_smooth_cube", "DEFAULT_SPEC"]


@dataclass(frozen=True)
class SyntheticSpec:
    height: int = 32
    width: int = 32
    bands: int = 8
    components: int = 3
    max_cycles: float = 3.0
    seed: int = 0
    # explicit per-band (fx, fy) lists; amplitudes and phases still come from the seed
    band_freqs: tuple[tuple[tuple[float, float], ...], ...] | None = None

    def __post_init__(self):
        if min(self.height, self.width, self.bands) < 1:
            raise ValidationError("synthetic cube dimensions must be positive")
        if self.components < 0 or self.max_cycles < 0:
            raise ValidationError("components and max_cycles must be non-negative")
        if self.band_freqs is not None:
            if len(self.band_freqs) != self.bands:
                raise ValidationError("band_freqs needs one entry per band")
            for fs in self.band_freqs:
                if any(abs(f) > self.max_cycles for pair in fs for f in pair):
                    raise ValidationError(f"frequencies must not exceed {self.max_cycles} cycles")

    @property
    def header(self) -> CubeHeader:
        return CubeHeader(self.height, self.width, self.bands)


DEFAULT_SPEC = SyntheticSpec()


def _band_terms(spec: SyntheticSpec, rng: np.random.Generator):
    """Per band: arrays of (fx, fy), phases and amplitudes."""
    if spec.band_freqs is not None:
        terms = []
        for fs in spec.band_freqs:
            freqs = np.asarray(fs, dtype=np.float64).reshape(-1, 2)
            phases = rng.uniform(0.0, 2 * np.pi, len(freqs))
            amps = rng.uniform(0.6, 1.0, len(freqs))
            terms.append((freqs, phases, amps))
        return terms

    k = spec.components
    pool = spec.bands + max(k - 1, 0)
    lo = min(0.5, spec.max_cycles)
    freqs = rng.uniform(lo, spec.max_cycles, size=(pool, 2)) * rng.choice([-1.0, 1.0], size=(pool, 2))
    phases = rng.uniform(0.0, 2 * np.pi, pool)
    base = rng.uniform(0.6, 1.0, pool)
    jitter = rng.uniform(0.8, 1.0, size=(spec.bands, max(k, 1)))
    terms = []
    for c in range(spec.bands):
        idx = np.arange(c, c + k)
        terms.append((freqs[idx], phases[idx], base[idx] * jitter[c, :k]))
    return terms


def gen_smooth_cube(spec: SyntheticSpec = DEFAULT_SPEC) -> HyperCube:
    rng = np.random.default_rng(spec.seed)
    m = np.arange(spec.height, dtype=np.float64)[:, None]
    n = np.arange(spec.width, dtype=np.float64)[None, :]
    samples = np.empty((spec.bands, spec.height, spec.width))
    for c, (freqs, phases, amps) in enumerate(_band_terms(spec, rng)):
        total = np.abs(amps).sum()
        if total > 0:
            amps = amps * (0.95 / total)
        band = np.zeros((spec.height, spec.width))
        for (fx, fy), phi, a in zip(freqs, phases, amps):
            band += a * np.sin(2 * np.pi * (fx * n / spec.width + fy * m / spec.height) + phi)
        samples[c] = np.clip(0.5 + 0.5 * band, 0.0, 1.0)
    return HyperCube(spec.header, samples)
