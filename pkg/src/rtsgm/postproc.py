"""Post-processing: subpixel refinement, left-right consistency, 3x3 median.

The pipeline applies them in that order.
"""
from __future__ import annotations

import math

import numpy as np

from . import _backend
from .core import AggregatedCostVolume, DisparityMap, GrayImage, PipelineConfig, validate_config

MEDIAN_STAGES = 5


def subpixel_refine(disp: DisparityMap, aggregated: AggregatedCostVolume, *,
                    kernels=None) -> DisparityMap:
    """Parabola fit through the aggregated costs at d-1, d, d+1.

    The vertex offset ``(c- - c+) / (2 (c- - 2 c0 + c+))`` is clamped to
    [-0.5, 0.5]. Pixels at either end of the range, or whose three costs do
    not open upward, keep their integer disparity.
    """
    k = kernels or _backend.kernels
    rng = aggregated.range
    indices = np.where(disp.valid, disp.values - rng.min_disparity, 0).astype(np.int32)
    out = np.empty(indices.shape, dtype=np.float64)
    k.subpixel(aggregated.costs, indices, rng.min_disparity, out, 0, indices.shape[0])
    return DisparityMap(out, disp.valid)


def approx_right_disparity(aggregated: AggregatedCostVolume, *, kernels=None) -> DisparityMap:
    """Right-image disparities read diagonally out of the left aggregated volume.

    ``D_R(x, y) = argmin_d S(x + d, y, d)`` over the d with ``x + d`` inside
    the image; pixels without any such d are invalid.
    """
    k = kernels or _backend.kernels
    rng = aggregated.range
    height, width = aggregated.height, aggregated.width
    indices = np.empty((height, width), dtype=np.int32)
    valid = np.empty((height, width), dtype=np.uint8)
    k.right_wta(aggregated.costs, rng.min_disparity, indices, valid, 0, height)
    return DisparityMap(indices + rng.min_disparity, valid.astype(bool))


def consistency_check(dl: DisparityMap, dr: DisparityMap, threshold: float = 1.0) -> DisparityMap:
    """Invalidate left disparities that disagree with the right map by more than ``threshold``.

    Subpixel left values are rounded half-up to pick the right-map column.
    """
    if dl.values.shape != dr.values.shape:
        raise ValueError(f"map shapes differ: {dl.values.shape} vs {dr.values.shape}")
    keep = dl.valid & consistent_rows(dl.values, dr.values, dr.valid, threshold)
    return DisparityMap(dl.values, keep)


def consistent_rows(left_values, right_values, right_valid, threshold):
    """Mask of left pixels whose matched right pixel exists, is valid and agrees.

    Works on any block of whole rows, which is what lets the pipeline run it per stripe.
    """
    rows, width = left_values.shape
    xs = np.arange(width)[None, :] - np.floor(left_values + 0.5).astype(np.int64)
    inside = (xs >= 0) & (xs < width)
    cols = np.clip(xs, 0, width - 1)
    r = np.arange(rows)[:, None]
    agree = np.abs(left_values - right_values[r, cols]) <= threshold
    return inside & right_valid[r, cols] & agree


def exact_right_disparity(left: GrayImage, right: GrayImage, cfg: PipelineConfig, *,
                          kernels=None) -> DisparityMap:
    """Right-image disparities from a second full pass on the mirrored, swapped pair."""
    from .matching import cost_volume
    from .sgm import aggregate_all, wta

    validate_config(cfg, left, right)
    cost = cost_volume(right.mirrored(), left.mirrored(), cfg.cost_function, cfg.range,
                       kernels=kernels)
    agg = aggregate_all(cost, cfg.paths, cfg.p1, cfg.p2, cfg.normalize, workers=cfg.workers,
                        kernels=kernels)
    return wta(agg, kernels=kernels).mirrored()


def bubble_stages(values, stages: int = MEDIAN_STAGES):
    """Run the first ``stages`` passes of the bubble-sort network on a copy of ``values``.

    Each pass carries the largest remaining element to the end, so after
    ``stages`` passes the last ``stages`` wires hold the largest values in order.
    """
    wires = list(values)
    n = len(wires)
    for stage in range(stages):
        for j in range(n - 1 - stage):
            if wires[j] > wires[j + 1]:
                wires[j], wires[j + 1] = wires[j + 1], wires[j]
    return wires


def bubble_median9(values):
    if len(values) != 9:
        raise ValueError("the median network takes exactly 9 values")
    return bubble_stages(values)[4]


def median3x3(disp: DisparityMap, *, kernels=None) -> DisparityMap:
    """3x3 median of each valid pixel with invalid/out-of-image neighbors as +inf.

    A pixel whose median lands on the sentinel (five or more missing
    neighbors) becomes invalid; invalid pixels stay invalid.
    """
    k = kernels or _backend.kernels
    values = np.where(disp.valid, disp.values, math.inf)
    out = np.empty(values.shape, dtype=np.float64)
    k.median3x3(values, out, 0, values.shape[0])
    keep = disp.valid & np.isfinite(out)
    return DisparityMap(np.where(keep, out, 0.0), keep)
