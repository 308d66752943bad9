"""Real-time semi-global matching stereo on the CPU.

The hot loops live in a compiled extension (``rtsgm._ckernels``); a numpy
implementation is used when it is not built or when ``RTSGM_BACKEND=python``.
"""
from ._backend import available as available_backends
from ._backend import kernels as _kernels
from .core import (
    AggregatedCostVolume,
    ConfigError,
    CostVolume,
    DisparityMap,
    DisparityRange,
    GrayImage,
    PipelineConfig,
    cell_index,
    validate_config,
)
from .matching import census_transform, cost_volume, hamming_cost_volume, ncc_cost_volume, patch_stats
from .metrics import EvalReport, bad_theta, d1_all, evaluate
from .pipeline import PipelineStats, Workspace, estimate
from .postproc import approx_right_disparity, consistency_check, median3x3, subpixel_refine
from .sgm import EIGHT_PATHS, FOUR_PATHS, PathDirection, aggregate_all, aggregate_path, wta

__version__ = "0.1.0"
BACKEND = _kernels.NAME

__all__ = [
    "AggregatedCostVolume", "ConfigError", "CostVolume", "DisparityMap", "DisparityRange",
    "EIGHT_PATHS", "EvalReport", "FOUR_PATHS", "GrayImage", "PathDirection", "PipelineConfig",
    "PipelineStats", "Workspace", "aggregate_all", "aggregate_path", "approx_right_disparity",
    "available_backends", "bad_theta", "cell_index", "census_transform", "consistency_check",
    "cost_volume", "d1_all", "estimate", "evaluate", "hamming_cost_volume", "median3x3",
    "ncc_cost_volume", "patch_stats", "subpixel_refine", "validate_config", "wta",
]
