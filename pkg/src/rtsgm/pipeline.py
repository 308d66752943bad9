"""End-to-end disparity estimation with striped multi-worker execution.

Cost computation and the per-pixel post-processing stages are row-local, so
each worker owns a horizontal stripe. Path aggregation needs whole lines, so
it is split by direction instead; workers synchronize before and after it.
The 3x3 median reads one row across stripe borders and runs as a final
striped pass after the other post-processing.

All stages write disjoint regions and reduce in a fixed order, so the output
is bitwise identical for any worker count.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .core import DisparityMap, GrayImage, PipelineConfig, validate_config
from .matching import CENSUS_WINDOWS, NCC_PATCHES
from .metrics import expected_fps, throughput_mde_s
from .postproc import consistent_rows
from .sgm import check_headroom, path_set


def stripe_plan(height: int, workers: int) -> list[tuple[int, int]]:
    """Split ``height`` rows into ``workers`` contiguous ranges whose sizes differ by at most one.

    Earlier stripes take the remainder rows; surplus workers get empty ranges.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    base, extra = divmod(height, workers)
    plan = []
    start = 0
    for i in range(workers):
        size = base + (1 if i < extra else 0)
        plan.append((start, start + size))
        start += size
    return plan


@dataclass
class PipelineStats:
    width: int
    height: int
    disparities: int
    time_cost_s: float = 0.0
    time_aggregate_s: float = 0.0
    time_post_s: float = 0.0
    time_total_s: float = 0.0

    @property
    def mde_per_s(self) -> float:
        return throughput_mde_s(self.width, self.height, self.disparities, self.time_total_s)

    @property
    def fps(self) -> float:
        return expected_fps(self.mde_per_s, self.width, self.height, self.disparities)

    def as_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "disparities": self.disparities,
            "time_total_s": self.time_total_s,
            "time_cost_s": self.time_cost_s,
            "time_aggregate_s": self.time_aggregate_s,
            "time_post_s": self.time_post_s,
            "mde_per_s": self.mde_per_s,
            "fps": self.fps,
        }


@dataclass
class Workspace:
    """Reusable buffers and worker pool; one caller at a time."""

    workers: int = 1
    _buffers: dict = field(default_factory=dict)
    _pool: ThreadPoolExecutor | None = None

    def buffer(self, name, shape, dtype):
        buf = self._buffers.get(name)
        if buf is None or buf.shape != tuple(shape) or buf.dtype != np.dtype(dtype):
            buf = np.empty(shape, dtype=dtype)
            self._buffers[name] = buf
        return buf

    def run(self, fn, items):
        items = list(items)
        if self.workers <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.workers)
        return list(self._pool.map(fn, items))

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _cost_stage(left, right, cfg, ws, k, tag):
    height, width = left.data.shape
    rng = cfg.range
    stripes = [s for s in stripe_plan(height, cfg.workers) if s[0] < s[1]]
    cost = ws.buffer(f"{tag}cost", (height, width, rng.count), np.uint8)
    if cfg.cost_function.startswith("census"):
        ww, wh = CENSUS_WINDOWS[cfg.cost_function[len("census"):]]
        census_l = ws.buffer(f"{tag}census_l", (height, width), np.uint64)
        census_r = ws.buffer(f"{tag}census_r", (height, width), np.uint64)

        def stripe(rows):
            y0, y1 = rows
            k.census(left.data, ww, wh, y0, y1, census_l)
            k.census(right.data, ww, wh, y0, y1, census_r)
            k.hamming(census_l, census_r, rng.min_disparity, cost, y0, y1)
    else:
        ww, wh = NCC_PATCHES[cfg.cost_function[len("ncc"):]]
        sum_l, sq_l = k.box_sums(left.data, ww, wh)
        sum_r, sq_r = k.box_sums(right.data, ww, wh)

        def stripe(rows):
            k.ncc(left.data, right.data, sum_l, sq_l, sum_r, sq_r, ww, wh, rng.min_disparity,
                  cost, rows[0], rows[1])

    ws.run(stripe, stripes)
    return cost


def _aggregate_stage(cost, cfg, ws, k, tag):
    directions = path_set(cfg.paths)
    check_headroom(cost.shape[1], cost.shape[0], len(directions), cfg.p2)
    per_path = [ws.buffer(f"{tag}path{i}", cost.shape, np.uint32) for i in range(len(directions))]

    def one(i):
        d = directions[i]
        k.aggregate_path(cost, d.dx, d.dy, cfg.p1, cfg.p2, cfg.normalize, per_path[i])

    ws.run(one, range(len(directions)))
    total = ws.buffer(f"{tag}agg", cost.shape, np.uint32)
    np.copyto(total, per_path[0])
    for volume in per_path[1:]:
        total += volume
    return total


def _left_wta(agg, ws, k, workers, tag):
    height, width = agg.shape[:2]
    indices = ws.buffer(f"{tag}wta", (height, width), np.int32)
    stripes = [s for s in stripe_plan(height, workers) if s[0] < s[1]]
    ws.run(lambda rows: k.wta(agg, indices, rows[0], rows[1]), stripes)
    return indices


def _right_from(left, right, cfg, ws, k):
    """Right-image integer disparities from the mirrored, swapped pair."""
    mirrored_l = GrayImage(right.data[:, ::-1])
    mirrored_r = GrayImage(left.data[:, ::-1])
    cost = _cost_stage(mirrored_l, mirrored_r, cfg, ws, k, "mirror_")
    agg = _aggregate_stage(cost, cfg, ws, k, "mirror_")
    indices = _left_wta(agg, ws, k, cfg.workers, "mirror_")
    return indices[:, ::-1] + cfg.range.min_disparity


def estimate(left: GrayImage, right: GrayImage, cfg: PipelineConfig | None = None, *,
             workspace: Workspace | None = None, kernels=None):
    """Disparity map of the left image and per-stage timings.

    Returns ``(DisparityMap, PipelineStats)``.
    """
    cfg = cfg or PipelineConfig()
    validate_config(cfg, left, right)
    k = kernels or _backend.kernels
    own_workspace = workspace is None
    ws = workspace or Workspace(cfg.workers)
    ws.workers = cfg.workers
    height, width = left.data.shape
    rng = cfg.range
    stats = PipelineStats(width, height, rng.count)
    stripes = [s for s in stripe_plan(height, cfg.workers) if s[0] < s[1]]

    try:
        t_start = time.perf_counter()
        cost = _cost_stage(left, right, cfg, ws, k, "")
        t_cost = time.perf_counter()
        # barrier: aggregation needs the whole cost volume
        agg = _aggregate_stage(cost, cfg, ws, k, "")
        t_agg = time.perf_counter()
        # barrier: post-processing needs the whole aggregated volume

        values = ws.buffer("values", (height, width), np.float64)
        valid = ws.buffer("valid", (height, width), bool)
        indices = ws.buffer("wta", (height, width), np.int32)
        right_idx = ws.buffer("right_idx", (height, width), np.int32)
        right_ok = ws.buffer("right_ok", (height, width), np.uint8)
        exact_right = _right_from(left, right, cfg, ws, k) if cfg.consistency == "exact" else None

        def post(rows):
            y0, y1 = rows
            k.wta(agg, indices, y0, y1)
            if cfg.subpixel:
                k.subpixel(agg, indices, rng.min_disparity, values, y0, y1)
            else:
                values[y0:y1] = indices[y0:y1] + rng.min_disparity
            valid[y0:y1] = True
            if cfg.consistency == "off":
                return
            if cfg.consistency == "approximate":
                k.right_wta(agg, rng.min_disparity, right_idx, right_ok, y0, y1)
                right_vals = right_idx[y0:y1] + rng.min_disparity
                right_valid = right_ok[y0:y1].astype(bool)
            else:
                right_vals = exact_right[y0:y1]
                right_valid = np.ones(right_vals.shape, dtype=bool)
            valid[y0:y1] &= consistent_rows(values[y0:y1], right_vals, right_valid,
                                            cfg.consistency_threshold)

        ws.run(post, stripes)

        if cfg.median:
            sentinel = ws.buffer("median_in", (height, width), np.float64)
            np.copyto(sentinel, np.where(valid, values, np.inf))
            filtered = ws.buffer("median_out", (height, width), np.float64)
            ws.run(lambda rows: k.median3x3(sentinel, filtered, rows[0], rows[1]), stripes)
            keep = valid & np.isfinite(filtered)
            result = DisparityMap(np.where(keep, filtered, 0.0), keep)
        else:
            result = DisparityMap(values.copy(), valid.copy())
        t_end = time.perf_counter()
    finally:
        if own_workspace:
            ws.close()

    stats.time_cost_s = t_cost - t_start
    stats.time_aggregate_s = t_agg - t_cost
    stats.time_post_s = t_end - t_agg
    stats.time_total_s = t_end - t_start
    return result, stats
