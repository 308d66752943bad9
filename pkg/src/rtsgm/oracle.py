"""Naive reference implementations for the test suite.

Nothing here is meant to be fast, and nothing calls into the optimized
modules: each function is a literal transcription of its definition using
plain Python loops over the core types.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .core import AggregatedCostVolume, CostVolume, DisparityMap, GrayImage

_WINDOWS = {"5x5": (5, 5), "9x7": (9, 7), "9x9": (9, 9)}

_DIRECTIONS = {
    "LR": (1, 0), "RL": (-1, 0), "TB": (0, 1), "BT": (0, -1),
    "TLBR": (1, 1), "TRBL": (-1, 1), "BLTR": (1, -1), "BRTL": (-1, -1),
}
_FOUR = ("LR", "RL", "TB", "BT")
_DIAGONAL = ("TLBR", "TRBL", "BLTR", "BRTL")


def _pixel(img, x, y):
    h, w = img.shape
    return int(img[y][x]) if 0 <= x < w and 0 <= y < h else 0


def naive_census(img: GrayImage, window: str) -> np.ndarray:
    """Census descriptors as a uint64 array (same layout as the optimized version)."""
    ww, wh = _WINDOWS[window]
    rx, ry = ww // 2, wh // 2
    data = img.data.tolist()
    h, w = img.height, img.width
    out = np.zeros((h, w), dtype=np.uint64)
    for y in range(h):
        for x in range(w):
            center = data[y][x]
            desc = 0
            bit = 0
            for yy in range(y - ry, y + ry + 1):
                for xx in range(x - rx, x + rx + 1):
                    if (xx, yy) == (x, y):
                        continue
                    value = data[yy][xx] if 0 <= xx < w and 0 <= yy < h else 0
                    if value < center:
                        desc |= 1 << bit
                    bit += 1
            out[y, x] = desc
    return out


def naive_hamming_costs(desc_l: np.ndarray, desc_r: np.ndarray, dmin: int, dmax: int) -> np.ndarray:
    h, w = desc_l.shape
    out = np.zeros((h, w, dmax - dmin + 1), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            for d in range(dmin, dmax + 1):
                if x - d < 0:
                    out[y, x, d - dmin] = 255
                else:
                    out[y, x, d - dmin] = bin(int(desc_l[y, x]) ^ int(desc_r[y, x - d])).count("1")
    return out


def naive_patch_mean_var(img: GrayImage, patch: str, x: int, y: int):
    """Exact mean and population variance of the zero-margin patch at (x, y)."""
    ww, wh = _WINDOWS[patch]
    samples = [
        _pixel(img.data, xx, yy)
        for yy in range(y - wh // 2, y + wh // 2 + 1)
        for xx in range(x - ww // 2, x + ww // 2 + 1)
    ]
    mean = Fraction(sum(samples), len(samples))
    var = sum((Fraction(s) - mean) ** 2 for s in samples) / len(samples)
    return mean, var


def naive_ncc_phi(left_patch, right_patch) -> float:
    """Zero-mean NCC of two equal-length sample lists; 0 if either is constant."""
    n = len(left_patch)
    ml = Fraction(sum(left_patch), n)
    mr = Fraction(sum(right_patch), n)
    cov = sum((a - ml) * (b - mr) for a, b in zip(left_patch, right_patch))
    vl = sum((a - ml) ** 2 for a in left_patch)
    vr = sum((b - mr) ** 2 for b in right_patch)
    if vl == 0 or vr == 0:
        return 0.0
    return float(cov) / math.sqrt(float(vl * vr))


def naive_ncc_costs(left: GrayImage, right: GrayImage, patch: str, dmin: int, dmax: int) -> np.ndarray:
    """NCC cost cells by direct evaluation of each patch pair.

    Uses the integer form ``(n*sum(LR) - sum(L)sum(R)) / sqrt(varprod)`` so the
    floating-point rounding is that of one division and one square root.
    """
    ww, wh = _WINDOWS[patch]
    rx, ry = ww // 2, wh // 2
    n = ww * wh
    h, w = left.height, left.width
    out = np.zeros((h, w, dmax - dmin + 1), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            lp = [_pixel(left.data, xx, yy)
                  for yy in range(y - ry, y + ry + 1) for xx in range(x - rx, x + rx + 1)]
            for d in range(dmin, dmax + 1):
                if x - d < 0:
                    out[y, x, d - dmin] = 255
                    continue
                rp = [_pixel(right.data, xx - d, yy)
                      for yy in range(y - ry, y + ry + 1) for xx in range(x - rx, x + rx + 1)]
                num = n * sum(a * b for a, b in zip(lp, rp)) - sum(lp) * sum(rp)
                den = (n * sum(a * a for a in lp) - sum(lp) ** 2) * (n * sum(b * b for b in rp) - sum(rp) ** 2)
                phi = num / math.sqrt(den) if den > 0 else 0.0
                s = 1.0 - max(0.0, phi)
                out[y, x, d - dmin] = math.floor(255.0 * s + 0.5)
    return out


def naive_path(cost: CostVolume, direction: str, p1: int, p2: int, normalize: bool = False) -> np.ndarray:
    """One path-cost volume by memoized recursion along ``direction``."""
    dx, dy = _DIRECTIONS[direction]
    s = cost.costs.tolist()
    h, w, n = cost.costs.shape
    memo = {}

    def penalty(d, dp):
        if d == dp:
            return 0
        return p1 if abs(d - dp) == 1 else p2

    def path_cost(x, y):
        if (x, y) in memo:
            return memo[(x, y)]
        px, py = x - dx, y - dy
        if not (0 <= px < w and 0 <= py < h):
            result = list(s[y][x])
        else:
            prev = path_cost(px, py)
            floor_ = min(prev) if normalize else 0
            result = [
                s[y][x][d] + min(prev[dp] + penalty(d, dp) for dp in range(n)) - floor_
                for d in range(n)
            ]
        memo[(x, y)] = result
        return result

    out = np.zeros((h, w, n), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            out[y, x] = path_cost(x, y)
    return out


def naive_sgm(cost: CostVolume, paths: int, p1: int, p2: int,
              normalize: bool = False) -> AggregatedCostVolume:
    names = _FOUR if paths == 4 else _FOUR + _DIAGONAL
    total = sum(naive_path(cost, name, p1, p2, normalize) for name in names)
    return AggregatedCostVolume(total.astype(np.uint32), cost.range)


def naive_wta(volume: np.ndarray, dmin: int) -> np.ndarray:
    h, w, n = volume.shape
    out = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            cells = [int(c) for c in volume[y, x]]
            out[y, x] = dmin + cells.index(min(cells))
    return out


def naive_subpixel(agg: AggregatedCostVolume, disp: DisparityMap) -> DisparityMap:
    """Vertex of the exact parabola through (-1, c-), (0, c0), (1, c+), in rationals."""
    dmin = agg.range.min_disparity
    n = agg.range.count
    h, w = disp.values.shape
    out = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            if not disp.valid[y, x]:
                continue
            k = int(disp.values[y, x]) - dmin
            offset = Fraction(0)
            if 0 < k < n - 1:
                cm, c0, cp = (int(agg.costs[y, x, k + j]) for j in (-1, 0, 1))
                # y = a t^2 + b t + c0
                a = Fraction(cm + cp - 2 * c0, 2)
                b = Fraction(cp - cm, 2)
                if a > 0:
                    offset = min(max(-b / (2 * a), Fraction(-1, 2)), Fraction(1, 2))
            out[y, x] = float(k + dmin) + float(offset)
    return DisparityMap(out, disp.valid)


def naive_right_disparity(agg: AggregatedCostVolume) -> DisparityMap:
    h, w, n = agg.costs.shape
    dmin = agg.range.min_disparity
    values = np.zeros((h, w))
    valid = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            best = None
            for k in range(n):
                d = dmin + k
                if x + d >= w:
                    continue
                c = int(agg.costs[y, x + d, k])
                if best is None or c < best[0]:
                    best = (c, d)
            if best is not None:
                values[y, x] = best[1]
                valid[y, x] = True
    return DisparityMap(values, valid)


def naive_consistency(dl: DisparityMap, dr: DisparityMap, threshold: float) -> DisparityMap:
    h, w = dl.values.shape
    keep = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            if not dl.valid[y, x]:
                continue
            xr = x - math.floor(dl.values[y, x] + 0.5)
            if 0 <= xr < w and dr.valid[y, xr]:
                keep[y, x] = abs(dl.values[y, x] - dr.values[y, xr]) <= threshold
    return DisparityMap(dl.values, keep)


def naive_median9(values) -> float:
    return sorted(values)[4]


def naive_median3x3(disp: DisparityMap) -> DisparityMap:
    h, w = disp.values.shape
    values = np.zeros((h, w))
    valid = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            if not disp.valid[y, x]:
                continue
            window = []
            for yy in range(y - 1, y + 2):
                for xx in range(x - 1, x + 2):
                    inside = 0 <= xx < w and 0 <= yy < h
                    window.append(disp.values[yy, xx] if inside and disp.valid[yy, xx] else math.inf)
            m = naive_median9(window)
            if math.isfinite(m):
                values[y, x] = m
                valid[y, x] = True
    return DisparityMap(values, valid)
