import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtsgm import oracle, sgm
from rtsgm.core import CostVolume, DisparityRange
from rtsgm.sgm import EIGHT_PATHS, FOUR_PATHS, PathDirection


def volume(array, dmin=0):
    array = np.asarray(array, dtype=np.uint8)
    return CostVolume(array, DisparityRange(dmin, dmin + array.shape[2] - 1))


def random_volume(seed, width, height, count, high=256):
    rng = np.random.default_rng(seed)
    return volume(rng.integers(0, high, (height, width, count)))


def test_four_path_set():
    assert {d.name for d in FOUR_PATHS} == {"LR", "RL", "TB", "BT"}
    assert len(EIGHT_PATHS) == 8
    assert all((d.dx, d.dy) != (0, 0) for d in EIGHT_PATHS)
    assert PathDirection.TRBL.dx == -1 and PathDirection.TRBL.dy == 1


class TestAggregatePath:
    def test_single_pixel(self, kernels):
        cost = volume([[[5, 0, 255]]])
        for direction in EIGHT_PATHS:
            out = sgm.aggregate_path(cost, direction, 3, 9, normalize=False, kernels=kernels)
            assert out.tolist() == [[[5, 0, 255]]]

    def test_hand_example(self, kernels):
        cost = volume([[[2, 0], [1, 3]]])
        out = sgm.aggregate_path(cost, PathDirection.LR, 1, 2, normalize=False, kernels=kernels)
        assert out[0, 1].tolist() == [2, 3]
        assert out[0, 0].tolist() == [2, 0]
        want = oracle.naive_path(cost, "LR", 1, 2)
        assert np.array_equal(out, want)

    @pytest.mark.parametrize("direction", list(PathDirection))
    @pytest.mark.parametrize("normalize", [False, True])
    def test_matches_oracle(self, kernels, direction, normalize):
        for seed in range(3):
            cost = random_volume(seed, 7, 5, 6)
            out = sgm.aggregate_path(cost, direction, 7, 30, normalize, kernels=kernels)
            want = oracle.naive_path(cost, direction.name, 7, 30, normalize)
            assert np.array_equal(out, want)

    @pytest.mark.parametrize("count", [1, 2, 3])
    @pytest.mark.parametrize("penalties", [(7, 30), (1, 2), (3, 2**30), (2**30, 2**30 + 5)])
    def test_narrow_ranges_and_large_penalties(self, kernels, count, penalties):
        p1, p2 = penalties
        cost = random_volume(count, 6, 4, count)
        for direction in (PathDirection.LR, PathDirection.BRTL):
            out = sgm.aggregate_path(cost, direction, p1, p2, True, kernels=kernels)
            assert np.array_equal(out, oracle.naive_path(cost, direction.name, p1, p2, True))

    @pytest.mark.parametrize("direction", list(PathDirection))
    def test_path_cost_bounds_cell_cost(self, kernels, direction):
        cost = random_volume(4, 9, 6, 5)
        out = sgm.aggregate_path(cost, direction, 4, 50, normalize=False, kernels=kernels)
        assert np.all(out >= cost.costs)

    def test_constant_shift(self, kernels):
        cost = random_volume(8, 6, 5, 4, high=200)
        shifted = volume(cost.costs.astype(int) + 17)
        for direction in EIGHT_PATHS:
            base = sgm.aggregate_path(cost, direction, 5, 20, True, kernels=kernels).astype(np.int64)
            moved = sgm.aggregate_path(shifted, direction, 5, 20, True, kernels=kernels)
            assert np.array_equal(moved, base + 17)

    def test_constant_shift_unnormalized_grows_along_path(self, kernels):
        cost = random_volume(9, 6, 3, 4, high=200)
        shifted = volume(cost.costs.astype(int) + 5)
        base = sgm.aggregate_path(cost, PathDirection.LR, 5, 20, False, kernels=kernels).astype(np.int64)
        moved = sgm.aggregate_path(shifted, PathDirection.LR, 5, 20, False, kernels=kernels)
        steps = np.arange(1, 7)[None, :, None]
        assert np.array_equal(moved, base + 5 * steps)

    def test_bad_penalties(self):
        with pytest.raises(ValueError):
            sgm.aggregate_path(random_volume(0, 2, 2, 2), PathDirection.LR, 5, 5)

    def test_headroom(self):
        sgm.check_headroom(4096, 2048, 8, 86)
        with pytest.raises(OverflowError):
            sgm.check_headroom(3_000_000, 10, 8, 86)


class TestAggregateAll:
    def test_one_pixel(self, kernels):
        cost = volume([[[3, 8, 1]]])
        for paths in (4, 8):
            agg = sgm.aggregate_all(cost, paths, 2, 9, kernels=kernels)
            assert agg.costs.tolist() == [[[3 * paths, 8 * paths, paths]]]

    def test_zero_volume(self, kernels):
        agg = sgm.aggregate_all(volume(np.zeros((5, 6, 4))), 8, 40, 200, kernels=kernels)
        assert not agg.costs.any()

    @pytest.mark.parametrize("normalize", [False, True])
    def test_random_6x4_against_oracle(self, kernels, normalize):
        cost = random_volume(21, 6, 4, 8)
        agg = sgm.aggregate_all(cost, 8, 11, 39, normalize, kernels=kernels)
        assert np.array_equal(agg.costs, oracle.naive_sgm(cost, 8, 11, 39, normalize).costs)
        want = oracle.naive_wta(agg.costs, 0)
        assert np.array_equal(sgm.wta(agg, kernels=kernels).values, want)

    def test_four_paths_drop_diagonals(self, kernels):
        cost = random_volume(5, 5, 5, 4)
        eight = oracle.naive_sgm(cost, 8, 3, 10).costs.astype(np.int64)
        diagonals = sum(oracle.naive_path(cost, name, 3, 10)
                        for name in ("TLBR", "TRBL", "BLTR", "BRTL"))
        four = sgm.aggregate_all(cost, 4, 3, 10, normalize=False, kernels=kernels)
        assert np.array_equal(four.costs, eight - diagonals)

    def test_workers_do_not_change_result(self, kernels):
        cost = random_volume(6, 12, 9, 7)
        one = sgm.aggregate_all(cost, 8, 9, 33, workers=1, kernels=kernels)
        many = sgm.aggregate_all(cost, 8, 9, 33, workers=8, kernels=kernels)
        assert np.array_equal(one.costs, many.costs)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), w=st.integers(1, 10), h=st.integers(1, 10),
           n=st.integers(1, 10), p1=st.integers(1, 60), gap=st.integers(1, 200))
    def test_normalize_keeps_argmin(self, seed, w, h, n, p1, gap):
        cost = random_volume(seed, w, h, n)
        on = sgm.aggregate_all(cost, 8, p1, p1 + gap, normalize=True)
        off = sgm.aggregate_all(cost, 8, p1, p1 + gap, normalize=False)
        assert np.array_equal(sgm.wta(on).values, sgm.wta(off).values)


class TestWTA:
    def test_unique_minimum(self, kernels):
        assert sgm.wta(volume([[[7, 3, 9]]]), kernels=kernels).values[0, 0] == 1

    def test_tie_takes_smallest(self, kernels):
        assert sgm.wta(volume([[[3, 1, 1]]]), kernels=kernels).values[0, 0] == 1

    def test_offset_range(self, kernels):
        m = sgm.wta(volume([[[4, 4, 0, 9]]], dmin=10), kernels=kernels)
        assert m.values[0, 0] == 12 and m.valid.all()

    def test_uniform_volume(self, kernels):
        m = sgm.wta(volume(np.full((3, 4, 5), 9), dmin=2), kernels=kernels)
        assert np.all(m.values == 2)

    def test_shift_invariance(self, kernels):
        cost = random_volume(12, 8, 6, 5, high=120)
        shifted = volume(cost.costs.astype(int) + 100)
        for normalize in (False, True):
            a = sgm.wta(sgm.aggregate_all(cost, 8, 5, 20, normalize, kernels=kernels))
            b = sgm.wta(sgm.aggregate_all(shifted, 8, 5, 20, normalize, kernels=kernels))
            assert np.array_equal(a.values, b.values)
