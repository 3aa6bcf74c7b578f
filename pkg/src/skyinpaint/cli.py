"""Command line: ingest -> inpaint -> render, plus stats and synthetic data.

Exit codes: 0 success (including a solve that hit the iteration cap, which is
flagged in the report), 1 data or format errors, 2 usage errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .archive import ArchiveFormatError, FieldArchive, read_archive, write_archive
from .config import RunConfig
from .grid import AngularGrid, SignalField
from .ingest import Accumulator, RecordFormatError, RecordParseError, overlap_stats, parse_batch, write_records
from .laplacian import LaplacianStencil
from .render import to_greyscale, write_pgm, write_png
from .solver import SingularSystemError, effective_workers, residual_image, solve_reduced
from .synthetic import synthetic_year


def _err(msg: str) -> None:
    print(f"skyinpaint: {msg}", file=sys.stderr)


def cmd_ingest(inputs: list[str], cfg: RunConfig, output: str) -> int:
    grid = AngularGrid(cfg.width, cfg.height)
    acc = Accumulator(grid)
    unreadable = []
    for path in inputs:
        try:
            with open(path, "rb") as fh:
                batch = parse_batch(fh, source=path)
        except RecordParseError as exc:
            for e in exc.errors:
                _err(f"{path}: {e}")
            batch = exc.batch
        except (OSError, UnicodeDecodeError, RecordFormatError) as exc:
            _err(f"{path}: unreadable: {exc}")
            unreadable.append(path)
            continue
        acc.add(batch)
    if unreadable:
        _err(f"{len(unreadable)} input file(s) unreadable; no archive written")
        return 1
    field, mask, count = acc.result()
    write_archive(FieldArchive(field, mask, solved=False), output)
    summary = {
        "records": acc.records_seen,
        "known_pixels": mask.count_known,
        "samples_per_known_pixel": overlap_stats(count),
        "archive": output,
    }
    print(json.dumps(summary, indent=2))
    return 0


def cmd_inpaint(archive_path: str, cfg: RunConfig, output: str) -> int:
    archive = read_archive(archive_path)
    st = LaplacianStencil.for_grid(archive.grid)
    scfg = cfg.solver_config()
    t0 = time.perf_counter()
    try:
        u, report = solve_reduced(st, archive.mask, archive.field, scfg)
    except SingularSystemError as exc:
        _err(str(exc))
        return 1
    wall = time.perf_counter() - t0
    write_archive(FieldArchive(u, archive.mask, solved=True), output)
    if cfg.history_path and report.residual_history is not None:
        Path(cfg.history_path).write_text("".join(f"{v!r}\n" for v in report.residual_history))
    out = report.to_dict()
    out.update(wall_time_s=wall, workers=effective_workers(scfg.workers),
               requested_workers=scfg.workers, epsilon=scfg.epsilon,
               deterministic_reductions=scfg.deterministic_reductions, archive=output)
    print(json.dumps(out, indent=2))
    if not report.converged:
        _err(f"not converged after {report.iterations} iterations; field written anyway")
    return 0


def cmd_render(archive_path: str, cfg: RunConfig, pgm: str | None, png: str | None) -> int:
    archive = read_archive(archive_path)
    show_mask = cfg.show_mask or not archive.solved
    if show_mask and not cfg.show_mask:
        _err("archive is not solved; rendering known pixels only")
    image = to_greyscale(archive.field, archive.mask if show_mask else None, cfg.greyscale_params())
    written = []
    for path, writer in ((pgm, write_pgm), (png, write_png)):
        if path:
            try:
                with open(path, "wb") as fh:
                    writer(image, fh)
            except OSError as exc:
                raise OSError(f"{path}: {exc}") from exc
            written.append(path)
    print(json.dumps({"height": image.shape[0], "width": image.shape[1], "files": written}))
    return 0


def archive_stats(archive: FieldArchive) -> dict:
    grid = archive.grid
    known = archive.mask.known
    stats = {
        "width": grid.width,
        "height": grid.height,
        "solved": archive.solved,
        "known_pixels": int(known.sum()),
        "known_fraction": float(known.mean()),
        "dbm": None,
        "max_abs_laplacian_unknown": None,
    }
    if known.any():
        v = archive.field.values[known]
        stats["dbm"] = {"min": float(v.min()), "mean": math.fsum(v.tolist()) / v.size,
                        "max": float(v.max())}
    if archive.solved and not known.all():
        res = residual_image(LaplacianStencil.for_grid(grid), archive.mask, archive.field.values)
        stats["max_abs_laplacian_unknown"] = float(np.abs(res).max())
    return stats


def cmd_stats(archive_path: str, as_json: bool) -> int:
    stats = archive_stats(read_archive(archive_path))
    if as_json:
        print(json.dumps(stats, indent=2))
        return 0
    print(f"grid            {stats['width']} x {stats['height']}"
          f" ({'solved' if stats['solved'] else 'raw'})")
    print(f"known pixels    {stats['known_pixels']} ({stats['known_fraction']:.6f})")
    if stats["dbm"]:
        d = stats["dbm"]
        print(f"dBm (known)     min {d['min']:.3f}  mean {d['mean']:.3f}  max {d['max']:.3f}")
    if stats["max_abs_laplacian_unknown"] is not None:
        print(f"max |A u| (unknown)  {stats['max_abs_laplacian_unknown']:.6g}")
    return 0


def cmd_synth(output: str, days: int, step: float) -> int:
    batch = synthetic_year(days, step)
    with open(output, "w") as fh:
        write_records(batch, fh)
    print(json.dumps({"records": len(batch), "file": output}))
    return 0


def _pclip(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI") from None
    return lo, hi


def _onoff(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="load a RunConfig JSON file; flags override it")
    common.add_argument("--save-config", metavar="FILE", help="write the effective config as JSON")

    parser = argparse.ArgumentParser(prog="skyinpaint", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="rasterize contact files into an archive")
    p.add_argument("inputs", nargs="*")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)

    p = sub.add_parser("inpaint", parents=[common], help="solve the inpainting system")
    p.add_argument("archive")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-iter", dest="max_iterations", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--deterministic-reductions", type=_onoff, metavar="{on,off}")
    p.add_argument("--history", dest="history_path", metavar="FILE",
                   help="write the per-iteration residual norms, one per line")

    p = sub.add_parser("render", parents=[common], help="write greyscale PGM and/or PNG images")
    p.add_argument("archive")
    p.add_argument("--pgm")
    p.add_argument("--png")
    p.add_argument("--greyscale", choices=("minmax", "percentile"))
    p.add_argument("--pclip", type=_pclip, metavar="LO,HI")
    p.add_argument("--show-mask", action="store_true", default=None)

    p = sub.add_parser("stats", help="summarize an archive")
    p.add_argument("archive")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("synth", help="write a synthetic year of daily contacts as CSV")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--step", type=float, default=10.0, help="sampling interval in seconds")
    return parser


_OVERRIDES = ("width", "height", "epsilon", "max_iterations", "workers", "deterministic_reductions",
              "history_path", "greyscale", "pclip", "show_mask")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    for name in _OVERRIDES:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if cfg.history_path:
        cfg.emit_residual_history = True
    if cfg.pclip:
        cfg.pclip = tuple(cfg.pclip)
    if getattr(args, "inputs", None):
        cfg.inputs = list(args.inputs)
    elif getattr(args, "archive", None):
        cfg.inputs = [args.archive]
    cfg.outputs = [p for p in (getattr(args, "output", None), getattr(args, "pgm", None),
                               getattr(args, "png", None)) if p]
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "synth":
        return cmd_synth(args.output, args.days, args.step)
    if args.command == "stats":
        try:
            return cmd_stats(args.archive, args.json)
        except (OSError, ArchiveFormatError) as exc:
            _err(str(exc))
            return 1
    try:
        cfg = resolve_config(args)
        cfg.greyscale_params()
        cfg.solver_config()
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    if args.save_config:
        cfg.save(args.save_config)
    try:
        if args.command == "ingest":
            if not args.inputs:
                parser.error("ingest needs at least one input file")
            return cmd_ingest(args.inputs, cfg, args.output)
        if args.command == "inpaint":
            return cmd_inpaint(args.archive, cfg, args.output)
        if args.command == "render":
            if not (args.pgm or args.png):
                parser.error("render needs --pgm and/or --png")
            return cmd_render(args.archive, cfg, args.pgm, args.png)
    except (OSError, ArchiveFormatError) as exc:
        _err(str(exc))
        return 1
    raise AssertionError(args.command)
