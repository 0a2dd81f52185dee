"""Overfitting a SIREN to one cube, keeping the best snapshot seen."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .. import metrics
from ..cube_io import HyperCube
from ..errors import ValidationError
from ..siren import (SirenConfig, SirenModel, adam_init, adam_step, init_siren,
                     loss_and_grad, param_count)
from .decoder import reconstruct_spectra
from .grid import make_grid

__all__ = ["TrainSettings", "overfit", "snapshot_mse"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainSettings:
    iterations: int = 50_000
    lr: float = 2e-4
    batch: int | None = None  # None trains on the full grid every step
    seed: int = 0
    eval_every: int = 100
    precision: str = "fp32"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError("iterations must be >= 1")
        if not self.lr > 0:
            raise ValidationError("lr must be positive")
        if self.batch is not None and self.batch < 1:
            raise ValidationError("batch must be >= 1 or None")
        if self.eval_every < 1:
            raise ValidationError("eval_every must be >= 1")


def snapshot_mse(model: SirenModel, coords: np.ndarray, cube: HyperCube) -> float:
    """MSE of the clamped reconstruction on the normalized scale.

    Computed exactly as ``metrics.mse(cube, decompress(..., normalized=True))``
    would be, so a lossless round trip reports the identical value.
    """
    v = reconstruct_spectra(model, coords)
    recon = np.ascontiguousarray(v.T).reshape(cube.shape)
    return metrics.mse(cube.samples, recon)


def _check_cube(cube: HyperCube, config: SirenConfig) -> None:
    if cube.norm is None:
        raise ValidationError("overfit needs a normalized cube (call normalize first)")
    s = cube.samples
    if s.min() < 0.0 or s.max() > 1.0:
        raise ValidationError("normalized cube has samples outside [0, 1]")
    if config.out_dim != cube.header.bands:
        raise ValidationError(f"config.out_dim={config.out_dim} but cube has {cube.header.bands} bands")


def overfit(cube: HyperCube, config: SirenConfig, settings: TrainSettings = TrainSettings(),
            init: SirenModel | None = None) -> tuple[SirenModel, list[metrics.RdPoint]]:
    """Fit a SIREN to ``cube`` with Adam on the pixel-wise MSE.

    PSNR is measured on the full grid before the first step, every
    ``settings.eval_every`` steps and after the last one. The returned model
    is the snapshot with the highest PSNR among those evaluations.
    """
    _check_cube(cube, config)
    model = init if init is not None else init_siren(config, settings.seed, settings.precision)
    if model.config != config:
        raise ValidationError("init model architecture differs from config")
    model = model.astype(settings.precision)

    h, w, c = cube.header.height, cube.header.width, cube.header.bands
    coords = make_grid(h, w).coords
    train_coords = coords.astype(model.dtype)
    targets = cube.spectra().astype(model.dtype)
    stored_bits = 32 if settings.precision == "fp32" else 64
    rate = metrics.bpppb(param_count(config), stored_bits, h, w, c)

    state = adam_init(model, settings.lr, settings.beta1, settings.beta2, settings.eps)
    rng = np.random.default_rng(settings.seed)
    n = coords.shape[0]
    minibatch = settings.batch is not None and settings.batch < n

    best, best_psnr = model, -np.inf
    trace: list[metrics.RdPoint] = []
    start = time.perf_counter()

    def record(it: int) -> None:
        nonlocal best, best_psnr
        err = snapshot_mse(model, coords, cube)
        p = metrics.psnr(err)
        trace.append(metrics.RdPoint(rate, err, p, it, time.perf_counter() - start))
        if p > best_psnr:
            best, best_psnr = model, p
        log.debug("iter %d mse %.3e psnr %.2f", it, err, p)

    record(0)
    for it in range(1, settings.iterations + 1):
        if minibatch:
            idx = rng.choice(n, size=settings.batch, replace=False)
            _, grads = loss_and_grad(model, train_coords[idx], targets[idx])
        else:
            _, grads = loss_and_grad(model, train_coords, targets)
        model, state = adam_step(model, grads, state)
        if it % settings.eval_every == 0 or it == settings.iterations:
            record(it)
    return best, trace
