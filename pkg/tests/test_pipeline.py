import numpy as np
import pytest

from rtsgm import matching, postproc, sgm
from rtsgm.core import ConfigError, DisparityRange, GrayImage, PipelineConfig
from rtsgm.metrics import throughput_mde_s
from rtsgm.pipeline import Workspace, estimate, stripe_plan
from conftest import random_pair, shifted_pair


class TestStripePlan:
    def test_single_worker(self):
        assert stripe_plan(10, 1) == [(0, 10)]

    def test_balanced(self):
        plan = stripe_plan(10, 3)
        assert [b - a for a, b in plan] == [4, 3, 3]
        assert plan[0][0] == 0 and plan[-1][1] == 10

    def test_more_workers_than_rows(self):
        plan = stripe_plan(2, 8)
        assert sum(1 for a, b in plan if b > a) == 2
        assert sum(1 for a, b in plan if b == a) == 6

    def test_contiguous_cover(self):
        for height in range(0, 30):
            for workers in range(1, 9):
                plan = stripe_plan(height, workers)
                assert all(plan[i][1] == plan[i + 1][0] for i in range(len(plan) - 1))
                sizes = [b - a for a, b in plan]
                assert sum(sizes) == height and max(sizes) - min(sizes) <= 1

    def test_rejects_zero_workers(self):
        with pytest.raises(ValueError):
            stripe_plan(5, 0)


def test_identical_images_give_zero(kernels):
    image, _ = shifted_pair(48, 32, 0, seed=1)
    cfg = PipelineConfig("census5x5", DisparityRange(0, 15))
    disp, _ = estimate(image, image, cfg, kernels=kernels)
    assert disp.valid.any()
    assert np.all(disp.values[disp.valid] == 0)


def test_shift_by_seven(kernels):
    left, right = shifted_pair(64, 40, 7, seed=5)
    cfg = PipelineConfig(range=DisparityRange(0, 15))
    disp, _ = estimate(left, right, cfg, kernels=kernels)
    inner = disp.values[3:-3, 4 + 7:-4]
    ok = disp.valid[3:-3, 4 + 7:-4]
    assert ok.mean() > 0.99
    assert np.all(np.floor(inner[ok] + 0.5) == 7)


def test_stripe_bands():
    # horizontal bands of texture, each shifted by 7
    rng = np.random.default_rng(9)
    rows = [rng.integers(0, 256, 100) for _ in range(6)]
    base = np.repeat(np.stack(rows), 8, axis=0).astype(np.uint8)
    base = base + rng.integers(0, 3, base.shape).astype(np.uint8)
    left, right = GrayImage(base[:, :80]), GrayImage(base[:, 7:87])
    disp, _ = estimate(left, right, PipelineConfig(range=DisparityRange(0, 15)))
    inner = disp.values[3:-3, 11:-4][disp.valid[3:-3, 11:-4]]
    assert np.mean(np.floor(inner + 0.5) == 7) > 0.95


@pytest.mark.parametrize("cost_function", ["census5x5", "census9x7", "ncc5x5", "ncc9x9"])
@pytest.mark.parametrize("consistency", ["off", "approximate", "exact"])
def test_workers_bitwise_identical(kernels, cost_function, consistency):
    left, right = random_pair(40, 30, seed=3)
    cfg = PipelineConfig(cost_function, DisparityRange(0, 11), consistency=consistency)
    one, _ = estimate(left, right, cfg, kernels=kernels)
    for workers in (2, 3, 8):
        many, _ = estimate(left, right, cfg.with_(workers=workers), kernels=kernels)
        assert one.same_as(many)


def test_backends_agree():
    from rtsgm import _backend

    if "cython" not in _backend.available():
        pytest.skip("compiled kernels not built")
    left, right = shifted_pair(50, 30, 4, seed=8)
    for cost_function in ("census9x7", "ncc9x9"):
        cfg = PipelineConfig(cost_function, DisparityRange(0, 9), consistency="exact")
        a, _ = estimate(left, right, cfg, kernels=_backend.load("cython"))
        b, _ = estimate(left, right, cfg, kernels=_backend.load("python"))
        assert a.same_as(b)


@pytest.mark.parametrize("consistency", ["off", "approximate", "exact"])
@pytest.mark.parametrize("subpixel,median", [(True, True), (False, False), (True, False)])
def test_equals_module_composition(kernels, consistency, subpixel, median):
    left, right = shifted_pair(36, 20, 3, seed=4)
    cfg = PipelineConfig("census5x5", DisparityRange(1, 8), subpixel=subpixel,
                         consistency=consistency, median=median)
    got, _ = estimate(left, right, cfg, kernels=kernels)

    cost = matching.cost_volume(left, right, cfg.cost_function, cfg.range)
    agg = sgm.aggregate_all(cost, cfg.paths, cfg.p1, cfg.p2, cfg.normalize)
    disp = sgm.wta(agg)
    if subpixel:
        disp = postproc.subpixel_refine(disp, agg)
    if consistency == "approximate":
        disp = postproc.consistency_check(disp, postproc.approx_right_disparity(agg))
    elif consistency == "exact":
        disp = postproc.consistency_check(disp, postproc.exact_right_disparity(left, right, cfg))
    if median:
        disp = postproc.median3x3(disp)
    assert got.same_as(disp)


def test_workspace_reuse_gives_same_result():
    left, right = random_pair(32, 24, seed=2)
    cfg = PipelineConfig(range=DisparityRange(0, 7), workers=2)
    first, _ = estimate(left, right, cfg)
    with Workspace(2) as ws:
        for _ in range(3):
            again, _ = estimate(left, right, cfg, workspace=ws)
            assert again.same_as(first)
        # a different shape reallocates cleanly
        small_l, small_r = random_pair(20, 10, seed=3)
        small, _ = estimate(small_l, small_r, cfg, workspace=ws)
        assert small.values.shape == (10, 20)


def test_stats():
    left, right = random_pair(32, 24, seed=2)
    cfg = PipelineConfig(range=DisparityRange(0, 7))
    _, stats = estimate(left, right, cfg)
    parts = stats.time_cost_s + stats.time_aggregate_s + stats.time_post_s
    assert stats.time_total_s == pytest.approx(parts, rel=1e-9)
    assert stats.mde_per_s == throughput_mde_s(32, 24, 8, stats.time_total_s)
    assert stats.fps == pytest.approx(1 / stats.time_total_s, rel=1e-12)
    assert list(stats.as_dict())[:3] == ["width", "height", "disparities"]


def test_invalid_config_raises():
    left, right = random_pair(32, 24, seed=2)
    with pytest.raises(ConfigError):
        estimate(left, right, PipelineConfig(p1=90, p2=86))
    with pytest.raises(ConfigError):
        estimate(left, GrayImage(np.zeros((23, 32))), PipelineConfig())


def test_validity_never_grows_through_stages(kernels):
    left, right = random_pair(40, 24, seed=12)
    base = PipelineConfig(range=DisparityRange(0, 15), median=False, consistency="off")
    dense, _ = estimate(left, right, base, kernels=kernels)
    checked, _ = estimate(left, right, base.with_(consistency="approximate"), kernels=kernels)
    filtered, _ = estimate(left, right, base.with_(consistency="approximate", median=True),
                           kernels=kernels)
    assert dense.valid.all()
    assert not np.any(filtered.valid & ~checked.valid)
