"""Command-line front end: ``hsic compress|decompress|eval|search|rd-sweep|fixtures|replay``.

Every command writes ``<output>.manifest.json`` recording its argv and
resolved settings; ``hsic replay`` re-runs one, optionally redirecting the
output. Exit codes: 0 ok, 1 other package error, 2 usage, 3 I/O, 4 malformed
file, 5 invalid input.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
from dataclasses import asdict
from importlib import metadata
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import metrics
from .codec import (TrainSettings, decode_region, decompress, read_bitstream, write_bitstream)
from .cube_io import (CubeHeader, HyperCube, Interleave, NormParams, SampleFormat, denormalize, normalize,
                      read_cube, read_header, write_cube, write_header)
from .errors import FormatError, HsicError, ValidationError
from .fixtures import SyntheticSpec, gen_smooth_cube
from .pipeline import compress, rd_sweep, write_sweep_csv
from .search import Budget, SearchSpace, search, select_best, write_report_csv
from .siren import SirenConfig

log = logging.getLogger("hsic")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_VALIDATION = 5


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def default_header_path(cube_path) -> Path:
    return Path(str(cube_path) + ".json")


def _load(cube_path, header_path) -> HyperCube:
    header = read_header(header_path or default_header_path(cube_path))
    return read_cube(cube_path, header)


def _settings(args) -> TrainSettings:
    return TrainSettings(iterations=args.iterations, lr=args.lr, batch=args.batch, seed=args.seed,
                         eval_every=args.eval_every, precision=args.precision)


def _space(args) -> SearchSpace:
    return SearchSpace(depths=tuple(args.depths), widths=(args.min_width, args.max_width),
                       lrs=tuple(args.lrs or [args.lr]), probe_iterations=args.probe_iters,
                       omega0=args.omega0)


def _manifest(args, argv, outputs, settings: dict, started: str) -> None:
    m = {
        "command": args.command,
        "argv": list(argv),
        "inputs": [str(p) for p in (getattr(args, "inputs", None) or [])],
        "header": str(getattr(args, "header", None) or ""),
        "outputs": [str(p) for p in outputs],
        "settings": settings,
        "tool_version": _version(),
        "started": started,
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    Path(str(outputs[0]) + ".manifest.json").write_text(json.dumps(m, indent=2, default=str) + "\n")


def _print_point(p: metrics.RdPoint) -> None:
    print(" ".join(f"{k}={metrics.format_value(v)}" for k, v in asdict(p).items()))


def cmd_compress(args, argv, started):
    raw = _load(args.cube, args.header)
    cube = normalize(raw)
    settings = _settings(args)
    space = _space(args)
    if args.target_bpppb is not None:
        res = compress(cube, args.bits, budget_bpppb=args.target_bpppb, settings=settings,
                       space=space, workers=args.workers)
    else:
        cfg = SirenConfig(args.depth, args.width, cube.header.bands, args.omega0)
        res = compress(cube, args.bits, config=cfg, settings=settings)
    out = Path(args.out)
    write_bitstream(res.compressed, out)
    metrics.write_rd_csv(res.trace, str(out) + ".trace.csv")
    outputs = [out, str(out) + ".trace.csv"]
    if res.report is not None:
        write_report_csv(res.report, str(out) + ".search.csv")
        outputs.append(str(out) + ".search.csv")
    _manifest(args, argv, outputs, {
        "config": asdict(res.config), "lr": res.lr, "bits": args.bits,
        "train": asdict(settings), "search": asdict(space) if res.report else None,
        "target_bpppb": args.target_bpppb, "train_psnr": res.train_psnr,
    }, started)
    _print_point(res.final)


def _parse_crop(vals, cm):
    r0, c0, h, w = vals
    if h < 1 or w < 1 or r0 < 0 or c0 < 0 or r0 + h > cm.height or c0 + w > cm.width:
        raise ValidationError(f"crop window {vals} outside {cm.height}x{cm.width}")
    return np.arange(r0, r0 + h), np.arange(c0, c0 + w)


def cmd_decompress(args, argv, started):
    cm = read_bitstream(args.bitstream)
    if args.scale is not None and args.crop is not None:
        raise ValidationError("--scale and --crop are mutually exclusive")
    if args.scale is not None:
        if args.scale < 1:
            raise ValidationError("--scale must be >= 1")
        cube = decode_region(cm, np.arange(0, cm.height, args.scale), np.arange(0, cm.width, args.scale))
    elif args.crop is not None:
        cube = decode_region(cm, *_parse_crop(args.crop, cm))
    else:
        cube = decompress(cm)
    h = cube.header
    header = CubeHeader(h.height, h.width, h.bands, args.interleave or h.interleave, args.format)
    write_cube(cube, args.out, header)
    write_header(header, default_header_path(args.out))
    _manifest(args, argv, [args.out, default_header_path(args.out)],
              {"scale": args.scale, "crop": args.crop, "header": header.to_dict()}, started)
    print(f"wrote {h.height}x{h.width}x{h.bands} cube to {args.out}")


def cmd_eval(args, argv, started):
    ref = _load(args.reference, args.header)
    rec = _load(args.reconstruction, args.recon_header)
    if ref.shape != rec.shape:
        raise ValidationError(f"shape mismatch: {ref.shape} vs {rec.shape}")
    err = metrics.mse(ref, rec)
    if args.peak is not None:
        peak = args.peak
    else:
        norm = normalize(ref).norm
        peak = norm.span if norm.span > 0 else 1.0
    print(f"mse={metrics.format_value(err)} psnr={metrics.format_value(metrics.psnr(err, peak))} "
          f"peak={metrics.format_value(float(peak))}")


def cmd_search(args, argv, started):
    cube = normalize(_load(args.cube, args.header))
    h = cube.header
    budget = Budget(args.target_bpppb, args.bits, h.height, h.width, h.bands)
    space = _space(args)
    best, report = search(cube, budget, space, args.seed, settings=_settings(args), workers=args.workers)
    write_report_csv(report, args.out)
    _manifest(args, argv, [args.out], {"budget": asdict(budget), "search": asdict(space),
                                       "train": asdict(_settings(args))}, started)
    win = select_best(report)
    print(f"best d={best.hidden_layers} w={best.hidden_width} lr={win.lr!r} "
          f"psnr={metrics.format_value(win.psnr)}")


def cmd_rd_sweep(args, argv, started):
    cube = normalize(_load(args.cube, args.header))
    rows = rd_sweep(cube, args.targets, args.bits, _settings(args), _space(args),
                    save_dir=args.save_dir, workers=args.workers)
    write_sweep_csv(rows, args.out)
    _manifest(args, argv, [args.out], {"targets": args.targets, "bits": args.bits,
                                       "train": asdict(_settings(args)),
                                       "search": asdict(_space(args))}, started)
    for r in rows:
        print(f"bits={r.bits} target={r.target_bpppb:g} psnr={metrics.format_value(r.psnr)} "
              f"status={r.status}")


def cmd_fixtures(args, argv, started):
    spec = SyntheticSpec(args.height, args.width, args.bands, seed=args.seed)
    cube = gen_smooth_cube(spec)
    header = CubeHeader(spec.height, spec.width, spec.bands, args.interleave or Interleave.BSQ,
                        args.format)
    if header.sample_format.is_integer:
        # integer formats get the full code range rather than [0, 1]
        peak = np.iinfo(header.sample_format.dtype).max
        cube = denormalize(cube, NormParams(0.0, float(peak)))
    write_cube(cube, args.out, header)
    write_header(header, default_header_path(args.out))
    _manifest(args, argv, [args.out, default_header_path(args.out)],
              {"spec": asdict(spec), "header": header.to_dict()}, started)
    print(f"wrote {spec.height}x{spec.width}x{spec.bands} fixture to {args.out}")


def _replace_out(argv: list[str], out: str) -> list[str]:
    argv = list(argv)
    for flag in ("--out", "-o"):
        if flag in argv:
            argv[argv.index(flag) + 1] = out
            return argv
    return argv + ["--out", out]


def cmd_replay(args, argv, started):
    m = json.loads(Path(args.manifest).read_text())
    replay_argv = m["argv"] if args.out is None else _replace_out(m["argv"], args.out)
    code = main(replay_argv)
    if code:
        raise SystemExit(code)


def _train_flags(p):
    p.add_argument("--iterations", type=int, default=50_000)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--batch", type=int, default=None, help="mini-batch size (default: full grid)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-every", type=int, default=100)
    p.add_argument("--precision", choices=["fp32", "fp64"], default="fp32")
    p.add_argument("--omega0", type=float, default=30.0)


def _search_flags(p):
    p.add_argument("--depths", type=int, nargs="+", default=[2, 3, 4, 5])
    p.add_argument("--min-width", type=int, default=8)
    p.add_argument("--max-width", type=int, default=1024)
    p.add_argument("--lrs", type=float, nargs="+", default=None, help="probe learning rates (default: --lr)")
    p.add_argument("--probe-iters", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1, help="parallel probe runs")


def _format(s):
    try:
        return SampleFormat(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown sample format {s!r}") from None


def _interleave(s):
    try:
        return Interleave[s.upper()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown interleave {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsic", description="Hyperspectral cube codec built on overfitted sine-activated MLPs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="overfit a SIREN to a cube and write a .hsic bitstream")
    p.add_argument("cube")
    p.add_argument("--header", help="JSON sidecar (default: <cube>.json)")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--bits", type=int, choices=[32, 16, 8], default=16)
    arch = p.add_mutually_exclusive_group(required=True)
    arch.add_argument("--depth", type=int, help="hidden layers (with --width)")
    arch.add_argument("--target-bpppb", type=float, help="search the architecture under this budget")
    p.add_argument("--width", type=int)
    _train_flags(p)
    _search_flags(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="decode a .hsic bitstream to a raw cube")
    p.add_argument("bitstream")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--scale", type=int, help="decode every k-th row and column")
    p.add_argument("--crop", type=int, nargs=4, metavar=("ROW", "COL", "HEIGHT", "WIDTH"))
    p.add_argument("--format", type=_format, default=SampleFormat.F32LE)
    p.add_argument("--interleave", type=_interleave, default=None)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("eval", help="MSE and PSNR between two cube files")
    p.add_argument("reference")
    p.add_argument("reconstruction")
    p.add_argument("--header")
    p.add_argument("--recon-header")
    p.add_argument("--peak", type=float, help="PSNR peak R (default: reference max - min)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("search", help="architecture search under a bpppb budget")
    p.add_argument("cube")
    p.add_argument("--header")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--target-bpppb", type=float, required=True)
    p.add_argument("--bits", type=int, choices=[32, 16, 8], default=16)
    _train_flags(p)
    _search_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("rd-sweep", help="rate-distortion sweep over budgets and bit widths")
    p.add_argument("cube")
    p.add_argument("--header")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--targets", type=float, nargs="+", required=True)
    p.add_argument("--bits", type=int, nargs="+", choices=[32, 16, 8], default=[16])
    p.add_argument("--save-dir", help="also keep each row's .hsic here")
    _train_flags(p)
    _search_flags(p)
    p.set_defaults(func=cmd_rd_sweep)

    p = sub.add_parser("fixtures", help="synthetic test cubes")
    fsub = p.add_subparsers(dest="fixtures_command", required=True)
    g = fsub.add_parser("gen", help="write a smooth synthetic cube and its sidecar header")
    g.add_argument("--out", "-o", required=True)
    g.add_argument("--height", type=int, default=32)
    g.add_argument("--width", type=int, default=32)
    g.add_argument("--bands", type=int, default=8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", type=_format, default=SampleFormat.F32LE)
    g.add_argument("--interleave", type=_interleave, default=None)
    g.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", "-o", help="redirect the primary output")
    p.set_defaults(func=cmd_replay)
    return parser


def _thread_cap() -> int | None:
    v = os.environ.get("HSIC_THREADS")
    if not v:
        return None
    try:
        n = int(v)
    except ValueError:
        raise ValidationError(f"HSIC_THREADS must be an integer, got {v!r}") from None
    if n < 1:
        raise ValidationError("HSIC_THREADS must be >= 1")
    return n


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "compress" and args.depth is not None and args.width is None:
        parser.print_usage(sys.stderr)
        print("hsic: error: --depth requires --width", file=sys.stderr)
        return EXIT_USAGE
    args.inputs = [getattr(args, k) for k in ("cube", "bitstream", "reference", "reconstruction")
                   if getattr(args, k, None)]
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    try:
        with threadpool_limits(limits=_thread_cap()):
            args.func(args, argv, started)
    except FormatError as e:
        print(f"hsic: format error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except ValidationError as e:
        print(f"hsic: invalid input: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"hsic: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except HsicError as e:
        print(f"hsic: {e}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as e:
        return int(e.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
