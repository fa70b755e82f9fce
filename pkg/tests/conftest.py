import numpy as np
import pytest

from latentlab import dataset_io

# LiDAR (x fwd, y left, z up) -> camera (right, down, forward)
TR_ROWS = "0 -1 0 0 0 0 -1 0 1 0 0 0"
P2_ROWS = "100 0 50 0 0 100 50 0 0 0 1 0"


def build_dataset(root, n_frames=5, n_points=300, seed=0):
    """Synthetic scans/labels/calib tree mimicking the on-disk layout."""
    rng = np.random.default_rng(seed)
    scan_dir = root / "scans"
    label_dir = root / "labels"
    scan_dir.mkdir(parents=True)
    label_dir.mkdir(parents=True)
    (root / "calib.txt").write_text(f"P2: {P2_ROWS}\nTr: {TR_ROWS}\n")
    for k in range(n_frames):
        pts = np.empty((n_points, 4), dtype=np.float32)
        pts[:, 0] = rng.uniform(4.0, 40.0, n_points)  # forward: in front of camera
        pts[:, 1] = rng.uniform(-8.0, 8.0, n_points)
        pts[:, 2] = rng.uniform(-2.0, 1.0, n_points)
        pts[:, 3] = rng.uniform(0.0, 1.0, n_points)
        sem = rng.integers(0, 4, n_points).astype(np.uint32)
        inst = np.where(sem == 1, rng.integers(1, 4, n_points), 0).astype(np.uint32)
        dataset_io.write_scan(scan_dir / f"{k:06d}.bin", dataset_io.PointCloud(points=pts))
        dataset_io.write_labels(label_dir / f"{k:06d}.label", sem, inst)
    return root


@pytest.fixture
def synthetic_dataset(tmp_path):
    return build_dataset(tmp_path / "data")
