import numpy as np
import numpy.testing as nptest
import pytest

from latentlab.errors import ShapeError
from latentlab.panoptic_decode import (
    DecodeSpec,
    PanopticMap,
    assign_instances,
    find_centers,
    majority_semantic,
)


def nearest_center_oracle(sem, offsets, fore_mask, centers, things):
    """Cell-by-cell nearest-center assignment; ties to the earlier center."""
    h, w = sem.shape
    inst = np.zeros_like(sem)
    for m in range(h):
        for n in range(w):
            if fore_mask[m, n] < 0.5 or sem[m, n] not in things:
                continue
            target = (m + offsets[m, n, 0], n + offsets[m, n, 1])
            best, best_d = 0, np.inf
            for k, (ch, cw, _) in enumerate(centers):
                d = (target[0] - ch) ** 2 + (target[1] - cw) ** 2
                if d < best_d:
                    best, best_d = k + 1, d
            inst[m, n] = best
    return inst


class TestFindCenters:
    def test_single_peak(self):
        hm = np.zeros((9, 9))
        hm[4, 4] = 0.9
        assert find_centers(hm) == [(4, 4, 0.9)]

    def test_all_below_threshold(self):
        hm = np.full((5, 5), 0.05)
        assert find_centers(hm, DecodeSpec(center_threshold=0.1)) == []

    def test_close_peaks_lower_suppressed(self):
        # 3 px apart with kernel 5: only the higher peak survives
        hm = np.zeros((11, 11))
        hm[5, 3] = 0.8
        hm[5, 6] = 0.6
        assert find_centers(hm, DecodeSpec(nms_kernel=5)) == [(5, 3, 0.8)]

    def test_distant_peaks_both_kept_sorted(self):
        hm = np.zeros((16, 16))
        hm[2, 2] = 0.5
        hm[12, 12] = 0.9
        assert find_centers(hm, DecodeSpec(nms_kernel=5)) == [
            (12, 12, 0.9), (2, 2, 0.5)]

    def test_top_k_truncation(self):
        hm = np.zeros((40, 8))
        for i, row in enumerate(range(0, 40, 10)):
            hm[row, 4] = 0.9 - 0.1 * i
        got = find_centers(hm, DecodeSpec(top_k=2))
        assert len(got) == 2 and got[0][2] >= got[1][2]

    def test_even_kernel_rejected(self):
        with pytest.raises(ValueError):
            DecodeSpec(nms_kernel=4)


class TestAssignInstances:
    def test_single_cluster(self):
        sem = np.full((4, 4), 2)
        pmap = assign_instances(sem, np.zeros((4, 4, 2)), np.ones((4, 4)),
                                [(1, 1, 0.9)], thing_classes=[2])
        nptest.assert_array_equal(pmap.inst, np.ones((4, 4)))

    def test_no_centers_all_zero(self):
        sem = np.full((4, 4), 2)
        pmap = assign_instances(sem, np.zeros((4, 4, 2)), np.ones((4, 4)),
                                [], thing_classes=[2])
        nptest.assert_array_equal(pmap.inst, np.zeros((4, 4)))

    def test_stuff_and_background_get_zero(self):
        sem = np.array([[2, 3], [2, 2]])
        fore = np.array([[1.0, 1.0], [0.0, 1.0]])
        pmap = assign_instances(sem, np.zeros((2, 2, 2)), fore,
                                [(0, 0, 1.0)], thing_classes=[2])
        nptest.assert_array_equal(pmap.inst, [[1, 0], [0, 1]])

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_oracle_on_random_fixtures(self, seed):
        rng = np.random.default_rng(seed)
        sem = rng.integers(1, 4, size=(8, 8))
        offsets = rng.normal(scale=2.0, size=(8, 8, 2))
        fore = rng.uniform(size=(8, 8))
        centers = [(int(rng.integers(0, 8)), int(rng.integers(0, 8)), 0.9 - 0.1 * k)
                   for k in range(2)]
        things = [1, 2]
        pmap = assign_instances(sem, offsets, fore, centers, things)
        nptest.assert_array_equal(
            pmap.inst, nearest_center_oracle(sem, offsets, fore, centers, things))

    def test_tie_goes_to_higher_scoring_center(self):
        sem = np.full((1, 3), 2)
        centers = [(0, 0, 0.9), (0, 2, 0.5)]  # cell (0,1) is equidistant
        pmap = assign_instances(sem, np.zeros((1, 3, 2)), np.ones((1, 3)),
                                centers, thing_classes=[2])
        assert pmap.inst[0, 1] == 1

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            assign_instances(np.zeros((2, 2)), np.zeros((2, 3, 2)),
                             np.ones((2, 2)), [], thing_classes=[1])


class TestMajoritySemantic:
    def test_majority_relabel(self):
        sem = np.array([5, 5, 5, 5, 5, 7])
        inst = np.ones(6, dtype=int)
        out = majority_semantic(PanopticMap(sem=sem, inst=inst))
        nptest.assert_array_equal(out.sem, np.full(6, 5))

    def test_single_cell_unchanged(self):
        out = majority_semantic(PanopticMap(sem=np.array([[3]]), inst=np.array([[1]])))
        assert out.sem[0, 0] == 3

    def test_tie_breaks_to_smaller_class(self):
        sem = np.array([5, 5, 5, 7, 7, 7])
        inst = np.ones(6, dtype=int)
        out = majority_semantic(PanopticMap(sem=sem, inst=inst))
        nptest.assert_array_equal(out.sem, np.full(6, 5))

    def test_background_cells_untouched(self):
        sem = np.array([1, 2, 9])
        inst = np.array([1, 1, 0])
        out = majority_semantic(PanopticMap(sem=sem, inst=inst))
        assert out.sem[2] == 9
