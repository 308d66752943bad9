"""Command-line front end.

Subcommands: ``estimate``, ``evaluate``, ``bench``, ``dataset``.
Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
import time
from pathlib import Path

from . import imgio, metrics
from .core import ConfigError, DisparityRange, PipelineConfig
from .pipeline import Workspace, estimate

log = logging.getLogger("rtsgm")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

REPORT_FIELDS = (
    "d1_all_est", "d1_all_all", "bad_0_5", "bad_1", "bad_2", "bad_4", "density",
    "mde_per_s", "fps", "fps_per_w", "time_total_s", "time_cost_s", "time_aggregate_s",
    "time_post_s",
)

_CONSISTENCY = {"off": "off", "approx": "approximate", "exact": "exact"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_pipeline_flags(p, pair=True):
    if pair:
        p.add_argument("--left", required=True, type=Path, help="left image (PGM or PNG)")
        p.add_argument("--right", required=True, type=Path, help="right image (PGM or PNG)")
    p.add_argument("--min-disp", type=int, default=0, help="smallest disparity (default 0)")
    p.add_argument("--max-disp", type=int, default=127, help="largest disparity (default 127)")
    p.add_argument("--cost", choices=("census5x5", "census9x7", "ncc5x5", "ncc9x9"),
                   default="census9x7")
    p.add_argument("--paths", type=int, choices=(4, 8), default=8, help="aggregation directions")
    p.add_argument("--p1", type=int, help="small-jump penalty (default per cost)")
    p.add_argument("--p2", type=int, help="large-jump penalty (default per cost)")
    p.add_argument("--no-subpixel", action="store_true", help="keep integer disparities")
    p.add_argument("--consistency", choices=tuple(_CONSISTENCY), default="approx",
                   help="left-right check (default approx)")
    p.add_argument("--lr-threshold", type=float, default=1.0, help="left-right tolerance in pixels")
    p.add_argument("--no-median", action="store_true", help="skip the 3x3 median")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads")


def _add_report_flag(p):
    p.add_argument("--report", choices=("text", "json", "json-like"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rtsgm", description="Semi-global matching stereo estimation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate the disparity map of one pair")
    _add_pipeline_flags(p)
    p.add_argument("--out", required=True, type=Path, help="output disparity file")
    p.add_argument("--out-format", choices=("pgm16", "pfm"), help="default: from the suffix")
    p.add_argument("--gt", type=Path, help="ground truth to score against")
    _add_report_flag(p)

    p = sub.add_parser("evaluate", help="score an estimate against ground truth")
    p.add_argument("--est", required=True, type=Path, help="estimated disparity map")
    p.add_argument("--gt", required=True, type=Path, help="ground truth disparity map")
    p.add_argument("--scale", type=int, default=1, help="upscale the estimate to ground-truth size")
    _add_report_flag(p)

    p = sub.add_parser("bench", help="time repeated estimation of one pair")
    _add_pipeline_flags(p)
    p.add_argument("--repeat", type=int, default=5, help="timed runs; the median is reported")
    p.add_argument("--watts", type=float, help="power draw for FPS/W")
    _add_report_flag(p)

    p = sub.add_parser("dataset", help="estimate and evaluate every pair of a dataset")
    p.add_argument("--root", required=True, type=Path, help="dataset directory")
    p.add_argument("--layout", choices=("pairs", "kitti_like"), default="pairs")
    _add_pipeline_flags(p, pair=False)
    p.add_argument("--scale", type=int, default=1, help="upscale the estimate to ground-truth size")
    p.add_argument("--watts", type=float, help="power draw for FPS/W")
    _add_report_flag(p)
    return parser


def config_from_args(args) -> PipelineConfig:
    return PipelineConfig(
        cost_function=args.cost,
        range=DisparityRange(args.min_disp, args.max_disp),
        p1=args.p1,
        p2=args.p2,
        paths=args.paths,
        subpixel=not args.no_subpixel,
        consistency=_CONSISTENCY[args.consistency],
        consistency_threshold=args.lr_threshold,
        median=not args.no_median,
        workers=args.threads,
    )


def format_report(fields: dict, style: str) -> str:
    if style == "text":
        return "\n".join(f"{k}={_fmt(v)}" for k, v in fields.items())
    return json.dumps(fields, indent=2)


def _fmt(value):
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _report_fields(report=None, stats=None, watts=None) -> dict:
    """Documented report fields in fixed order, plus pixel counts when available."""
    fields = dict.fromkeys(REPORT_FIELDS)
    if report is not None:
        fields.update({k: v for k, v in report.fields().items() if k in fields})
    if stats is not None:
        fields["mde_per_s"] = stats.mde_per_s
        fields["fps"] = stats.fps
        fields["time_total_s"] = stats.time_total_s
        fields["time_cost_s"] = stats.time_cost_s
        fields["time_aggregate_s"] = stats.time_aggregate_s
        fields["time_post_s"] = stats.time_post_s
        if watts is not None:
            fields["fps_per_w"] = metrics.fps_per_watt(stats.fps, watts)
    if report is not None:
        for key in ("gt_pixels", "evaluated_pixels", "d1_est_errors", "d1_all_errors"):
            fields[key] = report.fields()[key]
    return fields


def _load_pair(args):
    return imgio.read_gray(args.left), imgio.read_gray(args.right)


def cmd_estimate(args) -> int:
    cfg = config_from_args(args)
    left, right = _load_pair(args)
    disp, stats = estimate(left, right, cfg)
    fmt = args.out_format or ("pfm" if args.out.suffix.lower() == ".pfm" else "pgm16")
    imgio.write_disparity(disp, args.out, imgio.FLOAT if fmt == "pfm" else imgio.FIXED256)
    report = None
    if args.gt is not None:
        report = metrics.evaluate(disp, imgio.read_disparity(args.gt))
    text = format_report(_report_fields(report, stats), args.report)
    stats_path = args.out.with_name(args.out.name + ".stats")
    stats_path.write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    est = imgio.read_disparity(args.est)
    gt = imgio.read_disparity(args.gt)
    if args.scale < 1:
        raise UsageError("--scale must be >= 1")
    est = metrics.rescale_disparity(est, args.scale)
    if est.values.shape != gt.values.shape:
        raise ValueError(
            f"estimate {est.width}x{est.height} (after --scale {args.scale}) does not match "
            f"ground truth {gt.width}x{gt.height}"
        )
    print(format_report(_report_fields(metrics.evaluate(est, gt)), args.report))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.repeat < 1:
        raise UsageError("--repeat must be >= 1")
    if args.watts is not None and args.watts <= 0:
        raise UsageError("--watts must be > 0")
    cfg = config_from_args(args)
    left, right = _load_pair(args)
    times = []
    with Workspace(cfg.workers) as ws:
        for _ in range(args.repeat):
            _, stats = estimate(left, right, cfg, workspace=ws)
            times.append(stats.time_total_s)
    median_time = statistics.median(times)
    width, height, ndisp = left.width, left.height, cfg.range.count
    mde = metrics.throughput_mde_s(width, height, ndisp, median_time)
    fps = metrics.expected_fps(mde, width, height, ndisp)
    fields = {
        "width": width, "height": height, "disparities": ndisp, "repeat": args.repeat,
        "runs_s": times, "time_total_s": median_time, "mde_per_s": mde, "fps": fps,
        "fps_per_w": metrics.fps_per_watt(fps, args.watts) if args.watts else None,
    }
    if args.report == "text":
        lines = [f"run_{i}_s={t!r}" for i, t in enumerate(times)]
        lines += [f"{k}={_fmt(v)}" for k, v in fields.items() if k != "runs_s"]
        print("\n".join(lines))
    else:
        print(json.dumps(fields, indent=2))
    return EXIT_OK


def cmd_dataset(args) -> int:
    cfg = config_from_args(args)
    entries = imgio.scan_dataset(args.root, args.layout)
    if not entries:
        print(f"no pairs found under {args.root}", file=sys.stderr)
        return EXIT_FAILURE
    rows, failures = [], 0
    pixels_total, time_total = 0, 0.0
    with Workspace(cfg.workers) as ws:
        for entry in entries:
            try:
                left, right = imgio.read_gray(entry.left), imgio.read_gray(entry.right)
                disp, stats = estimate(left, right, cfg, workspace=ws)
            except Exception as exc:  # keep going, report at the end
                failures += 1
                log.error("%s: %s", entry.name, exc)
                rows.append({"name": entry.name, "error": str(exc)})
                continue
            pixels_total += stats.width * stats.height * stats.disparities
            time_total += stats.time_total_s
            row = {"name": entry.name, **_report_fields(None, stats, args.watts)}
            row["density"] = metrics.density(disp)
            if entry.gt is not None:
                try:
                    gt = imgio.read_disparity(entry.gt)
                    est = metrics.rescale_disparity(disp, args.scale)
                    row.update({k: v for k, v in _report_fields(metrics.evaluate(est, gt)).items()
                                if v is not None})
                except Exception as exc:
                    failures += 1
                    log.error("%s: evaluation failed: %s", entry.name, exc)
                    row["error"] = str(exc)
            rows.append(row)

    mean = {"name": "mean"}
    for key in REPORT_FIELDS:
        vals = [r[key] for r in rows if r.get(key) is not None]
        mean[key] = sum(vals) / len(vals) if vals else None
    if time_total > 0:
        mean["aggregate_mde_per_s"] = pixels_total / time_total / 1e6
    _print_table(rows + [mean], args.report)
    return EXIT_FAILURE if failures else EXIT_OK


def _print_table(rows, style):
    if style != "text":
        print(json.dumps(rows, indent=2))
        return
    cols = ("name", "d1_all_est", "d1_all_all", "bad_0_5", "bad_1", "bad_2", "bad_4",
            "density", "time_total_s", "mde_per_s")
    print("\t".join(cols))
    for r in rows:
        cells = []
        for c in cols:
            v = r.get(c)
            if c == "name":
                cells.append(str(v))
            elif v is None:
                cells.append("error" if "error" in r and c != "name" else "n/a")
            else:
                cells.append(f"{v:.6g}")
        print("\t".join(cells))
    if "aggregate_mde_per_s" in rows[-1]:
        print(f"aggregate_mde_per_s={rows[-1]['aggregate_mde_per_s']!r}")


COMMANDS = {
    "estimate": cmd_estimate,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
    "dataset": cmd_dataset,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    started = time.perf_counter()
    try:
        code = COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"rtsgm {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"rtsgm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    log.info("%s finished in %.3f s", args.command, time.perf_counter() - started)
    return code


if __name__ == "__main__":
    sys.exit(main())
