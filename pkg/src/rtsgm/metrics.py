"""Benchmark metrics: D1-all, bad-theta, density, throughput.

Error rates average over ground-truth pixels that also carry an estimate
("Est"); the "All" variant first fills holes by background interpolation.
The raw pixel counts are reported alongside every fraction so either
denominator convention can be recomputed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DisparityMap

THETAS = (0.5, 1.0, 2.0, 4.0)
D1_THRESHOLD = 3.0


class UndefinedMetricError(ValueError):
    """No pixel qualifies for the denominator of a metric."""


def _check_shapes(est: DisparityMap, gt: DisparityMap):
    if est.values.shape != gt.values.shape:
        raise ValueError(
            f"estimate {est.width}x{est.height} and ground truth {gt.width}x{gt.height} differ"
        )


def _errors(est: DisparityMap, gt: DisparityMap):
    _check_shapes(est, gt)
    mask = gt.valid & est.valid
    if not mask.any():
        raise UndefinedMetricError("no pixel has both ground truth and an estimate")
    return np.abs(est.values[mask] - gt.values[mask])


def d1_all(est: DisparityMap, gt: DisparityMap, variant: str = "Est") -> float:
    """Fraction of evaluated pixels with ``|d - d_gt| >= 3``."""
    if variant == "All":
        est = background_interpolate(est)
    elif variant != "Est":
        raise ValueError(f"variant must be 'Est' or 'All', got {variant!r}")
    err = _errors(est, gt)
    return float(np.count_nonzero(err >= D1_THRESHOLD)) / err.size


def bad_theta(est: DisparityMap, gt: DisparityMap, theta: float) -> float:
    """Fraction of evaluated pixels with ``|d - d_gt| > theta`` (strict)."""
    err = _errors(est, gt)
    return float(np.count_nonzero(err > theta)) / err.size


def density(est: DisparityMap) -> float:
    return float(np.count_nonzero(est.valid)) / est.valid.size


def _fill_row(values, valid):
    idx = np.flatnonzero(valid)
    out = values.copy()
    width = values.size
    positions = np.arange(width)
    # nearest valid index to the left / right of each pixel
    right_pos = np.searchsorted(idx, positions, side="left")
    left_pos = right_pos - 1
    has_left = left_pos >= 0
    has_right = right_pos < idx.size
    left_val = np.where(has_left, values[idx[np.clip(left_pos, 0, idx.size - 1)]], np.inf)
    right_val = np.where(has_right, values[idx[np.clip(right_pos, 0, idx.size - 1)]], np.inf)
    holes = ~valid
    out[holes] = np.minimum(left_val, right_val)[holes]
    return out


def background_interpolate(est: DisparityMap) -> DisparityMap:
    """Dense copy of ``est`` with holes filled from the background.

    Each invalid run takes the smaller of its nearest valid left and right
    neighbors in the row (one neighbor at row ends). Rows without any valid
    pixel copy the filled row nearest to them, the upper one on ties.
    """
    if not est.valid.any():
        raise UndefinedMetricError("cannot interpolate a map with no valid pixel")
    if est.valid.all():
        return est
    filled = np.empty(est.values.shape)
    has_data = est.valid.any(axis=1)
    for y in np.flatnonzero(has_data):
        filled[y] = _fill_row(est.values[y], est.valid[y])
    data_rows = np.flatnonzero(has_data)
    for y in np.flatnonzero(~has_data):
        nearest = data_rows[np.argmin(np.abs(data_rows - y))]
        filled[y] = filled[nearest]
    return DisparityMap.dense(filled)


def rescale_disparity(est: DisparityMap, scale: int) -> DisparityMap:
    """Nearest-neighbor upsampling by ``scale`` with disparities multiplied to match."""
    if int(scale) != scale or scale < 1:
        raise ValueError(f"scale must be a positive integer, got {scale}")
    scale = int(scale)
    if scale == 1:
        return est
    values = np.repeat(np.repeat(est.values * scale, scale, axis=0), scale, axis=1)
    valid = np.repeat(np.repeat(est.valid, scale, axis=0), scale, axis=1)
    return DisparityMap(values, valid)


def throughput_mde_s(width: int, height: int, disparities: int, runtime: float) -> float:
    """Million disparity estimations per second."""
    if not runtime > 0:
        raise ValueError(f"runtime must be positive, got {runtime}")
    return width * height * disparities / runtime / 1e6


def expected_fps(mde_per_s: float, width: int, height: int, disparities: int) -> float:
    if width <= 0 or height <= 0 or disparities <= 0:
        raise ValueError("dimensions must be positive")
    return mde_per_s * 1e6 / (width * height * disparities)


def fps_per_watt(fps: float, watts: float) -> float:
    if not watts > 0:
        raise ValueError(f"watts must be positive, got {watts}")
    return fps / watts


@dataclass
class EvalReport:
    d1_all_est: float | None
    d1_all_all: float | None
    bad: dict = field(default_factory=dict)  # theta -> fraction
    density: float = 0.0
    gt_pixels: int = 0
    evaluated_pixels: int = 0
    d1_est_errors: int = 0
    d1_all_errors: int = 0

    def fields(self) -> dict:
        """Report fields in their documented, stable order."""
        out = {"d1_all_est": self.d1_all_est, "d1_all_all": self.d1_all_all}
        for theta in THETAS:
            out[bad_key(theta)] = self.bad.get(theta)
        out["density"] = self.density
        out["gt_pixels"] = self.gt_pixels
        out["evaluated_pixels"] = self.evaluated_pixels
        out["d1_est_errors"] = self.d1_est_errors
        out["d1_all_errors"] = self.d1_all_errors
        return out


def bad_key(theta: float) -> str:
    return "bad_" + f"{theta:g}".replace(".", "_")


def evaluate(est: DisparityMap, gt: DisparityMap) -> EvalReport:
    """All figures for one estimate; empty denominators yield ``None`` instead of raising."""
    _check_shapes(est, gt)
    gt_pixels = int(np.count_nonzero(gt.valid))
    evaluated = int(np.count_nonzero(gt.valid & est.valid))
    report = EvalReport(None, None, density=density(est), gt_pixels=gt_pixels,
                        evaluated_pixels=evaluated)
    if evaluated:
        err = _errors(est, gt)
        report.d1_est_errors = int(np.count_nonzero(err >= D1_THRESHOLD))
        report.d1_all_est = report.d1_est_errors / err.size
        report.bad = {theta: float(np.count_nonzero(err > theta)) / err.size for theta in THETAS}
    if gt_pixels and est.valid.any():
        dense = background_interpolate(est)
        err_all = _errors(dense, gt)
        report.d1_all_errors = int(np.count_nonzero(err_all >= D1_THRESHOLD))
        report.d1_all_all = report.d1_all_errors / err_all.size
    return report
