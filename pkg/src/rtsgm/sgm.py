"""Semi-global path aggregation and winner-takes-all disparity extraction.

Each path cost follows the recursion::

    L_r(p, d) = S(p, d) + min(L_r(p-r, d),
                              L_r(p-r, d-1) + P1,
                              L_r(p-r, d+1) + P1,
                              min_d' L_r(p-r, d') + P2)

restarting with ``L_r(p, d) = S(p, d)`` wherever p - r leaves the image. The
d-1 / d+1 terms are absent at the ends of the range. ``normalize`` subtracts
``min_d' L_r(p-r, d')`` at every step; it shifts all disparities of a pixel
by the same amount, so the argmin is unchanged while cells stay bounded.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from enum import Enum

import numpy as np

from . import _backend
from .core import AggregatedCostVolume, CostVolume, DisparityMap


class PathDirection(Enum):
    LR = (1, 0)
    RL = (-1, 0)
    TB = (0, 1)
    BT = (0, -1)
    TLBR = (1, 1)
    TRBL = (-1, 1)
    BLTR = (1, -1)
    BRTL = (-1, -1)

    @property
    def dx(self) -> int:
        return self.value[0]

    @property
    def dy(self) -> int:
        return self.value[1]


FOUR_PATHS = (PathDirection.LR, PathDirection.RL, PathDirection.TB, PathDirection.BT)
EIGHT_PATHS = tuple(PathDirection)


def path_set(paths: int):
    if paths == 4:
        return FOUR_PATHS
    if paths == 8:
        return EIGHT_PATHS
    raise ValueError(f"paths must be 4 or 8, got {paths}")


def _check_penalties(p1, p2):
    if not 0 < p1 < p2:
        raise ValueError(f"penalties must satisfy 0 < p1 < p2, got p1={p1}, p2={p2}")


def check_headroom(width: int, height: int, npaths: int, p2: int, max_cell_cost: int = 255):
    # un-normalized path costs grow by at most max_cell_cost per step plus one P2
    bound = npaths * (max_cell_cost * max(width, height) + p2)
    if bound >= 2**32:
        raise OverflowError(
            f"{npaths} paths over a {width}x{height} image may overflow 32-bit cells"
        )


def aggregate_path(cost: CostVolume, direction: PathDirection, p1: int, p2: int,
                   normalize: bool = True, *, kernels=None) -> np.ndarray:
    """Path costs L_r as a uint32 array shaped like ``cost.costs``."""
    _check_penalties(p1, p2)
    check_headroom(cost.width, cost.height, 1, p2, cost.max_cell_cost)
    k = kernels or _backend.kernels
    out = np.empty(cost.costs.shape, dtype=np.uint32)
    k.aggregate_path(cost.costs, direction.dx, direction.dy, p1, p2, normalize, out)
    return out


def aggregate_all(cost: CostVolume, paths: int, p1: int, p2: int, normalize: bool = True, *,
                  workers: int = 1, kernels=None) -> AggregatedCostVolume:
    """Sum of path costs over the 4- or 8-direction set.

    Directions run concurrently when ``workers > 1``; the sum is taken in the
    fixed direction order afterwards, so the result never depends on scheduling.
    """
    directions = path_set(paths)
    _check_penalties(p1, p2)
    check_headroom(cost.width, cost.height, len(directions), p2, cost.max_cell_cost)

    def one(direction):
        return aggregate_path(cost, direction, p1, p2, normalize, kernels=kernels)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(directions))) as pool:
            volumes = list(pool.map(one, directions))
    else:
        volumes = [one(direction) for direction in directions]
    total = volumes[0].copy()
    for volume in volumes[1:]:
        total += volume
    return AggregatedCostVolume(total, cost.range)


def wta_indices(volume: np.ndarray, *, kernels=None) -> np.ndarray:
    """Per-pixel argmin over the disparity axis as int32 range indices (first minimum wins)."""
    k = kernels or _backend.kernels
    out = np.empty(volume.shape[:2], dtype=np.int32)
    k.wta(np.ascontiguousarray(volume), out, 0, volume.shape[0])
    return out


def wta(volume, *, kernels=None) -> DisparityMap:
    """Winner-takes-all disparity map of a cost or aggregated volume; every pixel valid."""
    indices = wta_indices(volume.costs, kernels=kernels)
    return DisparityMap.dense(indices + volume.range.min_disparity)
