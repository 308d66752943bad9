"""Matching-cost computation: census/Hamming and inverted, truncated NCC.

Both cost functions read pixels outside the image as intensity 0 (zero
margin). A cell whose matching pixel x - d falls left of the image is
saturated to 255 so it never wins a minimum search.

Census descriptor layout: the window is scanned in raster order (top-left to
bottom-right) skipping the center; the k-th visited neighbor sets bit k (bit 0
is the least significant) iff its intensity is strictly below the center's.
5x5 gives 24 bits, 9x7 (9 wide, 7 tall) gives 62 bits.

NCC cells hold ``floor(255 * s + 0.5)`` with ``s = 1 - max(0, ncc)``, where::

    ncc = (n*sum(LR) - sum(L)*sum(R)) / sqrt((n*sum(L^2) - sum(L)^2) * (n*sum(R^2) - sum(R)^2))

over the n window samples. All sums are exact 64-bit integers; a zero variance
on either side defines ncc = 0, i.e. maximal cost.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .core import CostVolume, DisparityRange, GrayImage, SATURATED_COST

CENSUS_WINDOWS = {"5x5": (5, 5), "9x7": (9, 7)}
NCC_PATCHES = {"5x5": (5, 5), "9x9": (9, 9)}


def _window_size(window, table, kind):
    if window not in table:
        raise ValueError(f"unsupported {kind} window {window!r}; choose from {sorted(table)}")
    return table[window]


def _check_fits(img: GrayImage, ww: int, wh: int):
    if img.width < ww or img.height < wh:
        raise ValueError(f"{ww}x{wh} window larger than {img.width}x{img.height} image")


@dataclass(frozen=True)
class CensusImage:
    descriptors: np.ndarray  # uint64, shape (height, width)
    window: str

    @property
    def width(self) -> int:
        return self.descriptors.shape[1]

    @property
    def height(self) -> int:
        return self.descriptors.shape[0]

    @property
    def bits(self) -> int:
        ww, wh = CENSUS_WINDOWS[self.window]
        return ww * wh - 1


@dataclass(frozen=True)
class PatchStatsImage:
    """Per-pixel zero-margin patch sums; mean and population variance derive from them."""

    sums: np.ndarray  # int64 sum of intensities
    squares: np.ndarray  # int64 sum of squared intensities
    center: np.ndarray  # uint8 pixel value
    patch: str

    @property
    def samples(self) -> int:
        ww, wh = NCC_PATCHES[self.patch]
        return ww * wh

    @property
    def mean(self) -> np.ndarray:
        return self.sums / self.samples

    @property
    def variance(self) -> np.ndarray:
        n = self.samples
        return (n * self.squares - self.sums * self.sums) / (n * n)


def census_transform(img: GrayImage, window: str = "9x7", *, kernels=None) -> CensusImage:
    ww, wh = _window_size(window, CENSUS_WINDOWS, "census")
    _check_fits(img, ww, wh)
    k = kernels or _backend.kernels
    out = np.zeros((img.height, img.width), dtype=np.uint64)
    k.census(img.data, ww, wh, 0, img.height, out)
    return CensusImage(out, window)


def hamming_cost_volume(census_l: CensusImage, census_r: CensusImage, rng: DisparityRange, *,
                        kernels=None) -> CostVolume:
    if census_l.window != census_r.window:
        raise ValueError(f"census windows differ: {census_l.window} vs {census_r.window}")
    if census_l.descriptors.shape != census_r.descriptors.shape:
        raise ValueError("census images differ in size")
    k = kernels or _backend.kernels
    out = np.empty((census_l.height, census_l.width, rng.count), dtype=np.uint8)
    k.hamming(census_l.descriptors, census_r.descriptors, rng.min_disparity, out, 0,
              census_l.height)
    return CostVolume(out, rng, SATURATED_COST)


def patch_stats(img: GrayImage, patch: str = "5x5", *, kernels=None) -> PatchStatsImage:
    ww, wh = _window_size(patch, NCC_PATCHES, "NCC")
    _check_fits(img, ww, wh)
    k = kernels or _backend.kernels
    sums, squares = k.box_sums(img.data, ww, wh)
    return PatchStatsImage(sums, squares, img.data, patch)


def ncc_cost_volume(stats_l: PatchStatsImage, stats_r: PatchStatsImage, img_l: GrayImage,
                    img_r: GrayImage, rng: DisparityRange, *, kernels=None) -> CostVolume:
    if stats_l.patch != stats_r.patch:
        raise ValueError(f"patch sizes differ: {stats_l.patch} vs {stats_r.patch}")
    if img_l.data.shape != img_r.data.shape or stats_l.sums.shape != img_l.data.shape:
        raise ValueError("NCC inputs differ in size")
    ww, wh = NCC_PATCHES[stats_l.patch]
    k = kernels or _backend.kernels
    out = np.empty((img_l.height, img_l.width, rng.count), dtype=np.uint8)
    k.ncc(img_l.data, img_r.data, stats_l.sums, stats_l.squares, stats_r.sums,
          stats_r.squares, ww, wh, rng.min_disparity, out, 0, img_l.height)
    return CostVolume(out, rng, SATURATED_COST)


def cost_volume(left: GrayImage, right: GrayImage, cost_function: str, rng: DisparityRange,
                *, kernels=None) -> CostVolume:
    """Full-image cost volume for one of the four named cost functions."""
    if cost_function.startswith("census"):
        window = cost_function[len("census"):]
        cl = census_transform(left, window, kernels=kernels)
        cr = census_transform(right, window, kernels=kernels)
        return hamming_cost_volume(cl, cr, rng, kernels=kernels)
    if cost_function.startswith("ncc"):
        patch = cost_function[len("ncc"):]
        sl = patch_stats(left, patch, kernels=kernels)
        sr = patch_stats(right, patch, kernels=kernels)
        return ncc_cost_volume(sl, sr, left, right, rng, kernels=kernels)
    raise ValueError(f"unknown cost function {cost_function!r}")
