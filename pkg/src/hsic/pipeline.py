"""End-to-end compress and rate-distortion sweep, shared by the CLI and tests."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path

from . import metrics
from .codec import (CompressedModel, TrainSettings, decompress, overfit, quantize,
                    write_bitstream)
from .cube_io import HyperCube
from .errors import ValidationError
from .search import Budget, SearchRow, SearchSpace, search, select_best
from .siren import SirenConfig, param_count

__all__ = ["CompressResult", "compress", "SweepRow", "rd_sweep", "write_sweep_csv", "read_sweep_csv"]

log = logging.getLogger(__name__)


@dataclass
class CompressResult:
    compressed: CompressedModel
    config: SirenConfig
    lr: float
    trace: list[metrics.RdPoint]
    report: list[SearchRow] | None
    final: metrics.RdPoint  # measured on the decoded bitstream
    train_psnr: float       # best snapshot PSNR before quantization

    @property
    def param_bpppb(self) -> float:
        cm = self.compressed
        return metrics.bpppb(cm.param_count, cm.bits, cm.height, cm.width, cm.bands)


def compress(cube: HyperCube, bits: int = 16, config: SirenConfig | None = None,
             budget_bpppb: float | None = None, settings: TrainSettings = TrainSettings(),
             space: SearchSpace = SearchSpace(), workers: int = 1) -> CompressResult:
    """Search (when given a budget), overfit, quantize and measure ``cube``.

    ``cube`` must already be normalized. Exactly one of ``config`` and
    ``budget_bpppb`` is required.
    """
    if (config is None) == (budget_bpppb is None):
        raise ValidationError("pass exactly one of config or budget_bpppb")
    hdr = cube.header
    start = time.perf_counter()
    report = None
    if config is None:
        budget = Budget(budget_bpppb, bits, hdr.height, hdr.width, hdr.bands)
        config, report = search(cube, budget, space, settings.seed, settings=settings, workers=workers)
        settings = replace(settings, lr=select_best(report).lr)
        log.info("search picked d=%d w=%d", config.hidden_layers, config.hidden_width)
    model, trace = overfit(cube, config, settings)
    cm = quantize(model, bits, hdr, cube.norm)
    recon = decompress(cm, normalized=True)
    err = metrics.mse(cube, recon)
    best = max(trace, key=lambda p: p.psnr)
    final = metrics.RdPoint(
        metrics.file_bpppb(cm.total_bits, hdr.height, hdr.width, hdr.bands),
        err, metrics.psnr(err), best.iteration, time.perf_counter() - start,
    )
    return CompressResult(cm, config, settings.lr, trace, report, final, best.psnr)


SWEEP_COLUMNS = [
    "bits", "target_bpppb", "hidden_layers", "hidden_width", "lr", "param_count",
    "bpppb", "file_bpppb", "mse", "psnr", "iteration", "wall_seconds", "status",
]


@dataclass
class SweepRow:
    bits: int
    target_bpppb: float
    hidden_layers: int | None = None
    hidden_width: int | None = None
    lr: float | None = None
    param_count: int | None = None
    bpppb: float | None = None
    file_bpppb: float | None = None
    mse: float | None = None
    psnr: float | None = None
    iteration: int | None = None
    wall_seconds: float | None = None
    status: str = "ok"


def rd_sweep(cube: HyperCube, targets, bits_list=(16,), settings: TrainSettings = TrainSettings(),
             space: SearchSpace = SearchSpace(), save_dir: str | Path | None = None,
             workers: int = 1) -> list[SweepRow]:
    """One search + full training + quantization per ``(bits, target)``.

    Rows come back ordered by bits then target. A row that fails records the
    error in ``status`` and the sweep carries on.
    """
    rows = []
    for bits in sorted(set(bits_list)):
        for target in sorted(set(targets)):
            row = SweepRow(bits, float(target))
            try:
                res = compress(cube, bits, budget_bpppb=target, settings=settings,
                               space=space, workers=workers)
            except Exception as e:  # isolate the row, keep sweeping
                log.warning("row bits=%d target=%g failed: %s", bits, target, e)
                row.status = f"failed: {type(e).__name__}: {e}"
                rows.append(row)
                continue
            cfg = res.config
            row.hidden_layers, row.hidden_width = cfg.hidden_layers, cfg.hidden_width
            row.lr = res.lr
            row.param_count = param_count(cfg)
            row.bpppb = res.param_bpppb
            row.file_bpppb = res.final.bpppb
            row.mse, row.psnr = res.final.mse, res.final.psnr
            row.iteration, row.wall_seconds = res.final.iteration, res.final.wall_seconds
            if save_dir is not None:
                out = Path(save_dir)
                out.mkdir(parents=True, exist_ok=True)
                write_bitstream(res.compressed, out / f"b{bits}_t{target:g}.hsic")
            rows.append(row)
    return rows


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow(["" if getattr(r, c) is None else metrics.format_value(getattr(r, c))
                        for c in SWEEP_COLUMNS])


_SWEEP_TYPES = {
    "bits": int, "target_bpppb": float, "hidden_layers": int, "hidden_width": int, "lr": float,
    "param_count": int, "bpppb": float, "file_bpppb": float, "mse": float, "psnr": float,
    "iteration": int, "wall_seconds": float, "status": str,
}


def read_sweep_csv(path) -> list[SweepRow]:
    with open(path, newline="") as f:
        return [
            SweepRow(**{k: (None if v == "" else _SWEEP_TYPES[k](v)) for k, v in r.items()})
            for r in csv.DictReader(f)
        ]

