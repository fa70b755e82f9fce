#!/usr/bin/env python3
"""End-to-end demo: build a synthetic dataset, then run the full pipeline on it.

Shows the intended call order (split -> per-frame voxelize/project/boxes/heatmap
-> pair -> mix) and prints a short summary of what was produced.
"""

import argparse
import pathlib
import subprocess
import sys


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--work-dir", default="pipeline_demo", help="scratch directory")
    ap.add_argument("--frames", type=int, default=5)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--ratio", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    work = pathlib.Path(args.work_dir)
    data = work / "data"
    out = work / "out"
    here = pathlib.Path(__file__).parent

    subprocess.run([sys.executable, str(here / "make_synthetic_dataset.py"),
                    "--out", str(data), "--frames", str(args.frames),
                    "--points", str(args.points), "--seed", str(args.seed)],
                   check=True)
    subprocess.run([sys.executable, "-m", "latentlab.cli", "pipeline",
                    "--data-dir", str(data), "--out-dir", str(out),
                    "--ratio", str(args.ratio), "--seed", str(args.seed),
                    "--image-size", "100,100", "--things", "1",
                    "--jobs", str(args.jobs)],
                   check=True)

    for sub in ("voxel", "mapping", "boxes", "heatmap", "mix"):
        n = sum(1 for _ in (out / sub).iterdir())
        print(f"{sub:>8}: {n} files")
    print(f"outputs under {out}")


if __name__ == "__main__":
    main()
