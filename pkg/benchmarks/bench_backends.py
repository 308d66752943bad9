"""Compare the compiled and numpy kernel backends stage by stage.

    python3 benchmarks/bench_backends.py --sizes 160x120x32 320x240x64 --repeat 3
"""
import argparse
import statistics

import numpy as np

from rtsgm import _backend, pipeline
from rtsgm.core import DisparityRange, GrayImage, PipelineConfig
from rtsgm.metrics import throughput_mde_s

STAGES = ("time_cost_s", "time_aggregate_s", "time_post_s", "time_total_s")


def parse_size(text):
    try:
        w, h, d = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxHxD, got {text!r}")
    return w, h, d


def synthetic_pair(width, height, shift=6, seed=0):
    rng = np.random.default_rng(seed)
    base = rng.integers(0, 256, (height, width + shift), dtype=np.uint8)
    return GrayImage(base[:, shift:]), GrayImage(base[:, :width])


def bench(kernels, width, height, count, cost, repeat):
    left, right = synthetic_pair(width, height)
    cfg = PipelineConfig(cost_function=cost, range=DisparityRange(0, count - 1))
    runs = []
    with pipeline.Workspace(1) as ws:
        for _ in range(repeat):
            _, stats = pipeline.estimate(left, right, cfg, workspace=ws, kernels=kernels)
            runs.append(stats)
    return {s: statistics.median(getattr(r, s) for r in runs) for s in STAGES}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", nargs="+", type=parse_size,
                    default=[(64, 48, 16), (160, 120, 32), (320, 240, 64)])
    ap.add_argument("--cost", default="census9x7",
                    choices=["census5x5", "census9x7", "ncc5x5", "ncc9x9"])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--backends", nargs="+", default=_backend.available())
    args = ap.parse_args(argv)

    header = ["backend", "size"] + [s[5:-2] for s in STAGES] + ["mde_per_s"]
    print("\t".join(header))
    totals = {}
    for w, h, d in args.sizes:
        for name in args.backends:
            t = bench(_backend.load(name), w, h, d, args.cost, args.repeat)
            totals[name, (w, h, d)] = t["time_total_s"]
            row = [name, f"{w}x{h}x{d}"] + [f"{t[s]:.4f}" for s in STAGES]
            row.append(f"{throughput_mde_s(w, h, d, t['time_total_s']):.3f}")
            print("\t".join(row))
    if {"cython", "python"} <= set(args.backends):
        for size in args.sizes:
            ratio = totals["python", size] / totals["cython", size]
            print(f"speedup {size[0]}x{size[1]}x{size[2]}: {ratio:.1f}x")


if __name__ == "__main__":
    main()
