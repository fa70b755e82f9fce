import os
import struct

import numpy as np
import numpy.testing as nptest
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latentlab import dataset_io
from latentlab.errors import (
    InvalidRatioError,
    LabelMismatchError,
    LabelOverflowError,
    MalformedScanError,
    MissingCalibrationError,
    MissingPseudoError,
)


class TestScanIO:
    def test_single_zero_point(self, tmp_path):
        path = tmp_path / "a.bin"
        path.write_bytes(b"\x00" * 16)
        cloud = dataset_io.read_scan(path)
        nptest.assert_array_equal(cloud.points, np.zeros((1, 4), dtype=np.float32))

    def test_two_points_in_file_order(self, tmp_path):
        vals = [(1.0, 2.0, 3.0, 0.5), (-1.0, 0.0, 4.0, 0.1)]
        blob = b"".join(struct.pack("<4f", *v) for v in vals)
        path = tmp_path / "a.bin"
        path.write_bytes(blob)
        cloud = dataset_io.read_scan(path)
        nptest.assert_array_equal(cloud.points, np.array(vals, dtype=np.float32))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "a.bin"
        path.write_bytes(b"")
        assert len(dataset_io.read_scan(path)) == 0

    def test_bad_length(self, tmp_path):
        path = tmp_path / "a.bin"
        path.write_bytes(b"\x00" * 17)
        with pytest.raises(MalformedScanError):
            dataset_io.read_scan(path)

    def test_round_trip_bytes(self, tmp_path):
        pts = np.array([[1, 2, 3, 0.5], [4, 5, 6, 0.1], [0, 0, 0, 0]], dtype=np.float32)
        path = tmp_path / "a.bin"
        dataset_io.write_scan(path, dataset_io.PointCloud(points=pts))
        assert path.read_bytes() == pts.tobytes()
        nptest.assert_array_equal(dataset_io.read_scan(path).points, pts)

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(0, 500), seed=st.integers(0, 2**32 - 1))
    def test_round_trip_random(self, tmp_path_factory, n, seed):
        rng = np.random.default_rng(seed)
        pts = rng.normal(scale=30.0, size=(n, 4)).astype(np.float32)
        path = tmp_path_factory.mktemp("rt") / "a.bin"
        dataset_io.write_scan(path, dataset_io.PointCloud(points=pts))
        nptest.assert_array_equal(dataset_io.read_scan(path).points, pts)


class TestLabelIO:
    def test_bit_packing(self, tmp_path):
        path = tmp_path / "a.label"
        np.array([0x0001000A, 0], dtype="<u4").tofile(path)
        sem, inst = dataset_io.read_labels(path, 2)
        nptest.assert_array_equal(sem, [10, 0])
        nptest.assert_array_equal(inst, [1, 0])

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "a.label"
        np.zeros(3, dtype="<u4").tofile(path)
        with pytest.raises(LabelMismatchError):
            dataset_io.read_labels(path, 4)

    def test_overflow(self, tmp_path):
        with pytest.raises(LabelOverflowError):
            dataset_io.write_labels(tmp_path / "a.label", [1], [70000])

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        sem = rng.integers(0, 0xFFFF, size=10_000, endpoint=True)
        inst = rng.integers(0, 0xFFFF, size=10_000, endpoint=True)
        path = tmp_path / "a.label"
        dataset_io.write_labels(path, sem, inst)
        sem2, inst2 = dataset_io.read_labels(path, 10_000)
        nptest.assert_array_equal(sem, sem2)
        nptest.assert_array_equal(inst, inst2)


class TestCalibration:
    def test_identity(self, tmp_path):
        path = tmp_path / "calib.txt"
        path.write_text(
            "P2: 1 0 0 0 0 1 0 0 0 0 1 0\n"
            "Tr: 1 0 0 0 0 1 0 0 0 0 1 0\n"
        )
        cam = dataset_io.read_calibration(path, view=2, image_size=(10, 10))
        nptest.assert_array_equal(cam.extrinsic, np.eye(4))
        nptest.assert_array_equal(cam.intrinsic, np.eye(3, 4))

    def test_missing_tr(self, tmp_path):
        path = tmp_path / "calib.txt"
        path.write_text("P2: 1 0 0 0 0 1 0 0 0 0 1 0\n")
        with pytest.raises(MissingCalibrationError):
            dataset_io.read_calibration(path)

    def test_synthetic_values_round_trip(self, tmp_path):
        path = tmp_path / "calib.txt"
        path.write_text(
            "P2: 100 0 50 0 0 100 50 0 0 0 1 0\n"
            "Tr: 1 0 0 0.5 0 1 0 0 0 0 1 -0.1\n"
        )
        cam = dataset_io.read_calibration(path, view=2, image_size=(100, 100))
        assert cam.intrinsic[0, 0] == 100 and cam.intrinsic[0, 2] == 50
        assert cam.extrinsic[0, 3] == 0.5 and cam.extrinsic[2, 3] == -0.1
        nptest.assert_array_equal(cam.extrinsic[3], [0, 0, 0, 1])


class TestSplit:
    def test_ratio_fifth(self):
        split = dataset_io.fixed_interval_split(list(range(10)), 0.2)
        assert split.labeled == [0, 5]
        assert split.unlabeled == [1, 2, 3, 4, 6, 7, 8, 9]

    def test_full_supervision(self):
        split = dataset_io.fixed_interval_split(list(range(7)), 1.0)
        assert split.labeled == list(range(7)) and split.unlabeled == []

    def test_ratio_half(self):
        split = dataset_io.fixed_interval_split(list(range(10)), 0.5)
        assert split.labeled == [0, 2, 4, 6, 8]

    @pytest.mark.parametrize("ratio", [0.0, -0.1, 1.5])
    def test_invalid_ratio(self, ratio):
        with pytest.raises(InvalidRatioError):
            dataset_io.fixed_interval_split([1, 2], ratio)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 200), st.integers(1, 20))
    def test_partition_and_count(self, n, k):
        # ratios of the form 1/k: labeled count within one of ceil(n * ratio)
        ratio = 1.0 / k
        split = dataset_io.fixed_interval_split(list(range(n)), ratio)
        assert sorted(split.labeled + split.unlabeled) == list(range(n))
        assert not set(split.labeled) & set(split.unlabeled)
        assert abs(len(split.labeled) - int(np.ceil(n * ratio))) <= 1
        again = dataset_io.fixed_interval_split(list(range(n)), ratio)
        assert again.labeled == split.labeled


class TestManifest:
    def _mk(self, tmp_path, frames, labeled, pseudo_present):
        gt_dir = tmp_path / "gt"
        pseudo_dir = tmp_path / "pseudo"
        gt_dir.mkdir()
        pseudo_dir.mkdir()
        for f in pseudo_present:
            (pseudo_dir / f"{f}.label").write_bytes(b"")
        split = dataset_io.SplitManifest(
            frames=frames, labeled=labeled,
            unlabeled=[f for f in frames if f not in labeled], ratio=0.5)
        return split, gt_dir, pseudo_dir

    def test_all_labeled(self, tmp_path):
        split, gt, ps = self._mk(tmp_path, ["a", "b"], ["a", "b"], [])
        manifest = dataset_io.self_training_manifest(split, gt, ps)
        assert [kind for _, _, kind in manifest.entries] == ["ground_truth"] * 2

    def test_mixed_kinds_in_frame_order(self, tmp_path):
        frames = ["f0", "f1", "f2", "f3", "f4"]
        split, gt, ps = self._mk(tmp_path, frames, ["f0", "f2"], ["f1", "f3", "f4"])
        manifest = dataset_io.self_training_manifest(split, gt, ps)
        assert [f for f, _, _ in manifest.entries] == frames
        assert [k for _, _, k in manifest.entries] == [
            "ground_truth", "pseudo", "ground_truth", "pseudo", "pseudo"]

    def test_missing_pseudo_names_frame(self, tmp_path):
        split, gt, ps = self._mk(tmp_path, ["f0", "f1"], ["f0"], [])
        with pytest.raises(MissingPseudoError, match="f1"):
            dataset_io.self_training_manifest(split, gt, ps)

    def test_manifest_file_round_trip(self, tmp_path):
        manifest = dataset_io.TrainingManifest(
            entries=[("f0", "gt/f0.label", "ground_truth"),
                     ("f1", "ps/f1.label", "pseudo")])
        path = tmp_path / "manifest.tsv"
        dataset_io.write_manifest(path, manifest)
        assert dataset_io.read_manifest(path).entries == manifest.entries
