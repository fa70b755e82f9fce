#!/usr/bin/env python3
"""Report per-class accuracy by normalized distance from the instance center.

Reads a predicted and a ground-truth label file plus the matching scan,
groups ground-truth instance points into interior / middle / boundary shells,
and prints the semantic accuracy of each shell. Useful for checking whether a
model degrades toward object boundaries.
"""

import argparse

import numpy as np

from latentlab import dataset_io
from latentlab.metrics import BoundaryBins, boundary_accuracy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scan", required=True)
    ap.add_argument("--pred", required=True, help="predicted .label file")
    ap.add_argument("--gt", required=True, help="ground-truth .label file")
    ap.add_argument("--edges", type=float, nargs="+", default=[1 / 3, 2 / 3])
    args = ap.parse_args()

    cloud = dataset_io.read_scan(args.scan)
    pred_sem, _ = dataset_io.read_labels(args.pred, len(cloud))
    gt_sem, gt_inst = dataset_io.read_labels(args.gt, len(cloud))

    bins = BoundaryBins(edges=tuple(args.edges))
    acc = boundary_accuracy(pred_sem, gt_sem, gt_inst,
                            cloud.points[:, :3].astype(np.float64), bins)

    shells = [f"<= {e:.2f}" for e in args.edges] + [f"> {args.edges[-1]:.2f}"]
    print("class  " + "  ".join(f"{s:>9}" for s in shells))
    for cls in sorted(acc):
        row = "  ".join("      ---" if np.isnan(v) else f"{v:9.3f}" for v in acc[cls])
        print(f"{cls:5d}  {row}")


if __name__ == "__main__":
    main()
