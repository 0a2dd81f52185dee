"""Architecture search under a bits-per-pixel-per-band budget.

For each candidate depth the widest network that fits the budget is taken;
every (candidate, learning rate) pair is then probe-trained briefly and the
best probe PSNR wins. Ties go to fewer parameters, then fewer layers, then
the smaller learning rate.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

from . import metrics
from .codec.train import TrainSettings, overfit
from .cube_io import HyperCube
from .errors import ValidationError
from .siren import SirenConfig, param_count

__all__ = [
    "Budget",
    "SearchSpace",
    "SearchRow",
    "EmptySearchError",
    "enumerate_candidates",
    "search",
    "select_best",
    "write_report_csv",
]


class EmptySearchError(ValidationError):
    """No architecture in the search space fits the budget."""


@dataclass(frozen=True)
class Budget:
    target_bpppb: float
    bits_per_param: int
    height: int
    width: int
    bands: int

    def __post_init__(self):
        if not self.target_bpppb > 0:
            raise ValidationError("target_bpppb must be positive")
        if self.bits_per_param not in (32, 16, 8):
            raise ValidationError("bits_per_param must be 32, 16 or 8")
        if min(self.height, self.width, self.bands) < 1:
            raise ValidationError("cube dimensions must be positive")
        smallest = param_count(SirenConfig(1, 1, self.bands))
        if self.max_params < smallest:
            raise EmptySearchError(
                f"budget allows {self.max_params} parameters, smallest network needs {smallest}"
            )

    @property
    def samples(self) -> int:
        return self.height * self.width * self.bands

    @property
    def max_params(self) -> int:
        # exact rational arithmetic on the binary value of target_bpppb
        return math.floor(Fraction(self.target_bpppb) * self.samples / self.bits_per_param)

    def rate(self, config: SirenConfig) -> float:
        return metrics.bpppb(param_count(config), self.bits_per_param,
                             self.height, self.width, self.bands)

    def fits(self, config: SirenConfig) -> bool:
        exact = metrics.bpppb_exact(param_count(config), self.bits_per_param,
                                    self.height, self.width, self.bands)
        return exact <= Fraction(self.target_bpppb)


@dataclass(frozen=True)
class SearchSpace:
    depths: tuple[int, ...] = (2, 3, 4, 5)
    widths: tuple[int, int] = (8, 1024)  # inclusive range
    lrs: tuple[float, ...] = (2e-4,)
    probe_iterations: int = 1000
    omega0: float = 30.0

    def __post_init__(self):
        if not self.depths or not self.lrs:
            raise ValidationError("depths and lrs must be non-empty")
        if min(self.depths) < 1 or self.widths[0] < 1 or self.widths[0] > self.widths[1]:
            raise ValidationError("invalid depth or width range")
        if self.probe_iterations < 1:
            raise ValidationError("probe_iterations must be >= 1")


def _widest(depth: int, bands: int, lo: int, hi: int, max_params: int, omega0: float) -> int | None:
    def count(w):
        return param_count(SirenConfig(depth, w, bands, omega0))

    if count(lo) > max_params:
        return None
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if count(mid) <= max_params:
            lo = mid
        else:
            hi = mid - 1
    return lo


def enumerate_candidates(budget: Budget, space: SearchSpace = SearchSpace()) -> list[SirenConfig]:
    """Widest fitting config per depth, largest parameter count first."""
    cap = budget.max_params
    out = []
    for d in sorted(set(space.depths)):
        w = _widest(d, budget.bands, space.widths[0], space.widths[1], cap, space.omega0)
        if w is None:
            continue
        cfg = SirenConfig(d, w, budget.bands, space.omega0)
        if param_count(cfg) < 0.5 * cap:
            continue
        out.append(cfg)
    if not out:
        raise EmptySearchError(f"no architecture with depth in {sorted(space.depths)} fits "
                               f"{cap} parameters")
    out.sort(key=lambda c: (-param_count(c), c.hidden_layers))
    return out


@dataclass(frozen=True)
class SearchRow:
    config: SirenConfig
    lr: float
    param_count: int
    bpppb: float
    psnr: float


def select_best(report: list[SearchRow]) -> SearchRow:
    """Highest PSNR; earlier rows win exact ties after the explicit tie-breaks."""
    if not report:
        raise EmptySearchError("empty search report")
    return max(report, key=lambda r: (r.psnr, -r.param_count, -r.config.hidden_layers, -r.lr))


def search(cube: HyperCube, budget: Budget, space: SearchSpace = SearchSpace(), seed: int = 0,
           candidates: list[SirenConfig] | None = None, settings: TrainSettings | None = None,
           workers: int = 1) -> tuple[SirenConfig, list[SearchRow]]:
    """Probe-train every (candidate, lr) pair on ``cube`` and pick the best.

    ``settings`` supplies everything except iterations, lr and seed, which
    come from ``space`` and ``seed``. The report is in candidate order, then
    ascending lr, regardless of ``workers``.
    """
    if (budget.height, budget.width, budget.bands) != (cube.header.height, cube.header.width,
                                                       cube.header.bands):
        raise ValidationError("budget dimensions do not match the cube")
    if candidates is None:
        candidates = enumerate_candidates(budget, space)
    if not candidates:
        raise EmptySearchError("no candidates to search")
    base = settings or TrainSettings()
    jobs = [(cfg, lr) for cfg in candidates for lr in sorted(space.lrs)]

    def probe(job):
        cfg, lr = job
        s = replace(base, iterations=space.probe_iterations, lr=lr, seed=seed,
                    eval_every=min(base.eval_every, space.probe_iterations))
        _, trace = overfit(cube, cfg, s)
        best = max(p.psnr for p in trace)
        return SearchRow(cfg, lr, param_count(cfg), budget.rate(cfg), best)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            report = list(pool.map(probe, jobs))
    else:
        report = [probe(j) for j in jobs]
    return select_best(report).config, report


REPORT_COLUMNS = ["hidden_layers", "hidden_width", "omega0", "lr", "param_count", "bpppb", "probe_psnr"]


def write_report_csv(report: list[SearchRow], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(REPORT_COLUMNS)
        for r in report:
            w.writerow([r.config.hidden_layers, r.config.hidden_width, repr(r.config.omega0),
                        repr(r.lr), r.param_count, repr(r.bpppb), metrics.format_value(r.psnr)])
