#!/usr/bin/env python3
"""Generate a small synthetic LiDAR dataset (scans, labels, calibration).

Produces the on-disk layout the `latentlab pipeline` command expects:

    <out>/scans/NNNNNN.bin     float32 x,y,z,intensity rows
    <out>/labels/NNNNNN.label  packed uint32 semantic/instance labels
    <out>/calib.txt            projection and sensor-to-camera rows
"""

import argparse
import pathlib

import numpy as np

from latentlab import dataset_io

CALIB = (
    "P2: 100 0 50 0 0 100 50 0 0 0 1 0\n"
    "Tr: 0 -1 0 0 0 0 -1 0 1 0 0 0\n"
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True, help="dataset root to create")
    ap.add_argument("--frames", type=int, default=5)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--classes", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    root = pathlib.Path(args.out)
    (root / "scans").mkdir(parents=True, exist_ok=True)
    (root / "labels").mkdir(parents=True, exist_ok=True)
    (root / "calib.txt").write_text(CALIB)

    rng = np.random.default_rng(args.seed)
    for k in range(args.frames):
        pts = np.empty((args.points, 4), dtype=np.float32)
        pts[:, 0] = rng.uniform(4.0, 45.0, args.points)
        pts[:, 1] = rng.uniform(-12.0, 12.0, args.points)
        pts[:, 2] = rng.uniform(-2.5, 1.2, args.points)
        pts[:, 3] = rng.uniform(0.0, 1.0, args.points)
        sem = rng.integers(0, args.classes, args.points).astype(np.uint32)
        inst = np.where(sem == 1, rng.integers(1, 6, args.points), 0).astype(np.uint32)
        dataset_io.write_scan(root / "scans" / f"{k:06d}.bin",
                              dataset_io.PointCloud(points=pts))
        dataset_io.write_labels(root / "labels" / f"{k:06d}.label", sem, inst)
    print(f"wrote {args.frames} frames of {args.points} points to {root}")


if __name__ == "__main__":
    main()
