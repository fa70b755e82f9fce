"""Batch command-line front-end.

Every subcommand is a pure function of (inputs, flags, seed): identical
invocations produce byte-identical outputs. Values from an optional
``key = value`` config file are overridden by explicit flags, and the
effective configuration is echoed on stderr as a log header.
"""

from __future__ import annotations

import argparse
import json
import os
import struct
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import dataset_io, tensorio
from .bev_pool import FeatureGrid, bev_max_pool
from .camera_projection import instance_boxes, project_points, read_boxes, write_boxes
from .cylinder_grid import CylinderGridSpec, in_bounds_mask, voxelize
from .cylinder_mix import MixSpec, cylinder_mix, pair_scans
from .errors import LatentLabError
from .ipsl_heatmap import HeatmapSpec, image_heatmap, mask_heatmap
from .metrics import LossWeights, mean_iou, panoptic_quality, segmentation_loss
from .panoptic_decode import DecodeSpec, assign_instances, find_centers, majority_semantic


def _floats(text):
    return tuple(float(tok) for tok in text.split(","))


def _ints(text):
    return tuple(int(tok) for tok in text.split(","))


def _grid_spec(args) -> CylinderGridSpec:
    gx, gy, gz = args.grid
    rho_min, rho_max, z_min, z_max = args.bounds
    return CylinderGridSpec(rho_min=rho_min, rho_max=rho_max,
                            z_min=z_min, z_max=z_max, grid=(gx, gy, gz))


def _echo_config(args) -> None:
    skip = {"func", "config"}
    pairs = sorted((k, v) for k, v in vars(args).items() if k not in skip)
    header = " ".join(f"{k}={v}" for k, v in pairs)
    print(f"# config: {header}", file=sys.stderr)


def _load_cloud(scan_path, label_path=None) -> dataset_io.PointCloud:
    cloud = dataset_io.read_scan(scan_path)
    if label_path is not None:
        cloud.sem, cloud.inst = dataset_io.read_labels(label_path, len(cloud))
    cloud.frame_id = os.path.splitext(os.path.basename(scan_path))[0]
    return cloud


# ---------------------------------------------------------------- subcommands


def cmd_split(args):
    if "," in args.frames:
        frames = args.frames.split(",")
    else:
        frames = [str(i) for i in range(int(args.frames))]
    split = dataset_io.fixed_interval_split(frames, args.ratio)
    print(",".join(split.labeled))
    if args.out:
        _write_split(args.out, split)
    return 0


def _write_split(path, split):
    labeled = set(split.labeled)
    lines = [f"{f}\t{'labeled' if f in labeled else 'unlabeled'}" for f in split.frames]
    _atomic_text(path, "\n".join(lines) + "\n")


def _read_split(path, ratio):
    frames, labeled, unlabeled = [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            frame, kind = line.split("\t")
            frames.append(frame)
            (labeled if kind == "labeled" else unlabeled).append(frame)
    return dataset_io.SplitManifest(frames=frames, labeled=labeled,
                                    unlabeled=unlabeled, ratio=ratio)


def cmd_manifest(args):
    split = _read_split(args.split, ratio=1.0)
    manifest = dataset_io.self_training_manifest(split, args.gt_dir, args.pseudo_dir)
    dataset_io.write_manifest(args.out, manifest)
    return 0


def cmd_mix(args):
    a = _load_cloud(args.scan_a, args.labels_a)
    b = _load_cloud(args.scan_b, args.labels_b)
    grid = _grid_spec(args)
    mix = MixSpec(region_size=args.regions, p_cylmix=args.p, seed=args.seed)
    out1, out2 = cylinder_mix(a, b, grid, mix)
    os.makedirs(args.out_dir, exist_ok=True)
    for name, cloud in (("mix1", out1), ("mix2", out2)):
        dataset_io.write_scan(os.path.join(args.out_dir, f"{name}.bin"), cloud)
        dataset_io.write_labels(os.path.join(args.out_dir, f"{name}.label"),
                                cloud.sem, cloud.inst)
        prov = "\n".join(f"{f},{i}" for f, i in zip(cloud.prov_frame, cloud.prov_index))
        _atomic_text(os.path.join(args.out_dir, f"{name}.prov"), prov + "\n" if prov else "")
    return 0


def cmd_voxelize(args):
    cloud = _load_cloud(args.scan)
    spec = _grid_spec(args)
    indices = voxelize(cloud, spec)
    if args.drop_out_of_bounds:
        indices = indices[in_bounds_mask(cloud, spec)]
    tensorio.write_tensor(args.out, indices.astype(np.float32))
    return 0


def cmd_bevpool(args):
    features = tensorio.read_tensor(args.features)
    indices = tensorio.read_tensor(args.indices).astype(np.int64)
    grid = bev_max_pool(features, indices, args.grid, fill=args.fill)
    data = grid.flattened() if args.flatten else grid.data
    tensorio.write_tensor(args.out, data.astype(np.float32))
    return 0


def cmd_project(args):
    cloud = _load_cloud(args.scan)
    cam = dataset_io.read_calibration(args.calib, view=args.view,
                                      image_size=args.image_size)
    mapping = project_points(cloud, cam)
    rows = np.stack([
        mapping.point_index.astype(np.float64),
        mapping.rows.astype(np.float64),
        mapping.cols.astype(np.float64),
        mapping.depth,
        np.full(len(mapping), mapping.view_id, dtype=np.float64),
    ], axis=1)
    tensorio.write_tensor(args.out, rows.astype(np.float32))
    return 0


def cmd_boxes(args):
    from .camera_projection import PixelMapping

    rows = tensorio.read_tensor(args.mapping).reshape(-1, 5)
    view = int(rows[0, 4]) if len(rows) else 1
    mapping = PixelMapping(
        point_index=rows[:, 0].astype(np.int64),
        rows=rows[:, 1].astype(np.int64),
        cols=rows[:, 2].astype(np.int64),
        depth=rows[:, 3].astype(np.float64),
        view_id=view,
    )
    raw = np.fromfile(args.labels, dtype="<u4")
    sem, inst = (raw & 0xFFFF).astype(np.int64), (raw >> 16).astype(np.int64)
    boxes = instance_boxes(mapping, sem, inst, args.things, args.min_support)
    write_boxes(args.out, boxes)
    return 0


def cmd_heatmap(args):
    if args.masks:
        masks = tensorio.read_tensor(args.masks)
        heat = mask_heatmap(masks, args.scores)
    else:
        boxes = read_boxes(args.boxes)
        spec = HeatmapSpec(r_corner=args.r_corner, p_center=args.p_center)
        heat = image_heatmap(boxes, spec, args.size)
    tensorio.write_tensor(args.out, heat.astype(np.float32))
    if args.png:
        _write_png_gray(args.png, np.round(heat * 255.0).astype(np.uint8))
    return 0


def cmd_decode(args):
    sem = tensorio.read_tensor(args.sem).astype(np.int64)
    centers_hm = tensorio.read_tensor(args.centers_hm)
    offsets = tensorio.read_tensor(args.offsets)
    fore = tensorio.read_tensor(args.fore_mask)
    spec = DecodeSpec(center_threshold=args.threshold,
                      nms_kernel=args.kernel, top_k=args.top_k)
    centers = find_centers(centers_hm, spec)
    pmap = assign_instances(sem, offsets, fore, centers, args.things, spec)
    if args.majority:
        pmap = majority_semantic(pmap)
    tensorio.write_tensor(args.out, np.stack([pmap.sem, pmap.inst]).astype(np.float32))
    return 0


def cmd_eval(args):
    pred = np.fromfile(args.pred, dtype="<u4")
    gt = np.fromfile(args.gt, dtype="<u4")
    pred_sem, pred_inst = (pred & 0xFFFF).astype(np.int64), (pred >> 16).astype(np.int64)
    gt_sem, gt_inst = (gt & 0xFFFF).astype(np.int64), (gt >> 16).astype(np.int64)
    report = panoptic_quality(pred_sem, pred_inst, gt_sem, gt_inst,
                              args.things, args.stuff, ignore=args.ignore)
    num_classes = max(args.num_classes,
                      int(max(pred_sem.max(initial=0), gt_sem.max(initial=0))) + 1)
    iou, miou = mean_iou(pred_sem, gt_sem, num_classes, ignore=args.ignore)
    doc = {
        "pq": report.pq,
        "pq_things": report.pq_things,
        "pq_stuff": report.pq_stuff,
        "miou": miou,
        "per_class": {
            str(c): {"pq": r.pq, "sq": r.sq, "rq": r.rq,
                     "tp": r.tp, "fp": r.fp, "fn": r.fn}
            for c, r in report.per_class.items()
        },
        "iou": {str(c): float(iou[c]) for c in range(num_classes)
                if not np.isnan(iou[c])},
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_loss(args):
    def load(name):
        return tensorio.read_tensor(os.path.join(args.inputs, f"{name}.llt1"))

    mu_hm, mu_os, mu_fm = args.weights
    total, parts = segmentation_loss(
        load("sem_logits"), load("sem_gt").astype(np.int64),
        load("hm_pred"), load("hm_gt"),
        load("os_pred"), load("os_gt"),
        load("fm_pred"), load("fm_gt"),
        LossWeights(mu_hm=mu_hm, mu_os=mu_os, mu_fm=mu_fm),
    )
    print(json.dumps({"total": total, **parts}, indent=2, sort_keys=True))
    return 0


def cmd_pipeline(args):
    """Chain split -> mix -> voxelize -> project -> boxes -> heatmap over a directory."""
    scan_dir = os.path.join(args.data_dir, "scans")
    label_dir = os.path.join(args.data_dir, "labels")
    calib_path = os.path.join(args.data_dir, "calib.txt")
    frames = sorted(os.path.splitext(f)[0] for f in os.listdir(scan_dir)
                    if f.endswith(".bin"))
    out = args.out_dir
    for sub in ("mix", "voxel", "mapping", "boxes", "heatmap"):
        os.makedirs(os.path.join(out, sub), exist_ok=True)

    split = dataset_io.fixed_interval_split(frames, args.ratio)
    _write_split(os.path.join(out, "split.txt"), split)

    grid = _grid_spec(args)
    cam = dataset_io.read_calibration(calib_path, view=args.view,
                                      image_size=args.image_size)
    hm_spec = HeatmapSpec(r_corner=args.r_corner, p_center=args.p_center)

    def scan_of(frame):
        return _load_cloud(os.path.join(scan_dir, f"{frame}.bin"),
                           os.path.join(label_dir, f"{frame}.label"))

    def per_frame(frame):
        cloud = scan_of(frame)
        indices = voxelize(cloud, grid)
        tensorio.write_tensor(os.path.join(out, "voxel", f"{frame}.llt1"),
                              indices.astype(np.float32))
        mapping = project_points(cloud, cam)
        rows = np.stack([
            mapping.point_index.astype(np.float64),
            mapping.rows.astype(np.float64),
            mapping.cols.astype(np.float64),
            mapping.depth,
            np.full(len(mapping), mapping.view_id, dtype=np.float64),
        ], axis=1)
        tensorio.write_tensor(os.path.join(out, "mapping", f"{frame}.llt1"),
                              rows.astype(np.float32))
        boxes = instance_boxes(mapping, cloud.sem.astype(np.int64),
                               cloud.inst.astype(np.int64),
                               args.things, args.min_support)
        write_boxes(os.path.join(out, "boxes", f"{frame}.tsv"), boxes)
        heat = image_heatmap(boxes, hm_spec, args.image_size)
        tensorio.write_tensor(os.path.join(out, "heatmap", f"{frame}.llt1"),
                              heat.astype(np.float32))

    jobs = args.jobs or int(os.environ.get("LATENTLAB_JOBS", "1"))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(per_frame, split.labeled))
    else:
        for frame in split.labeled:
            per_frame(frame)

    if len(split.labeled) >= 2:
        pairs, _ = pair_scans(split.labeled, args.seed)
        for i, (fa, fb) in enumerate(pairs):
            mix = MixSpec(region_size=args.regions, p_cylmix=args.p, seed=args.seed)
            rng = np.random.default_rng([args.seed, i])
            out1, out2 = cylinder_mix(scan_of(fa), scan_of(fb), grid, mix, rng=rng)
            for name, cloud in ((f"{fa}__{fb}.mix1", out1), (f"{fa}__{fb}.mix2", out2)):
                base = os.path.join(out, "mix", name)
                dataset_io.write_scan(f"{base}.bin", cloud)
                dataset_io.write_labels(f"{base}.label", cloud.sem, cloud.inst)
                prov = "\n".join(f"{f},{j}" for f, j in
                                 zip(cloud.prov_frame, cloud.prov_index))
                _atomic_text(f"{base}.prov", prov + "\n" if prov else "")
    return 0


# ------------------------------------------------------------------- parsing


def _add_grid_flags(p):
    p.add_argument("--grid", type=_ints, default=(480, 360, 32))
    p.add_argument("--bounds", type=_floats, default=(3.0, 50.0, -3.0, 1.5),
                   help="rho_min,rho_max,z_min,z_max")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latentlab")
    parser.add_argument("--config", help="key = value config file; flags override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="fixed-interval labeled/unlabeled split")
    p.add_argument("--frames", required=True, help="frame count or comma list of ids")
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("manifest", help="self-training manifest from a split")
    p.add_argument("--split", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--pseudo-dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_manifest)

    p = sub.add_parser("mix", help="Cylinder-Mix two labeled scans")
    p.add_argument("--scan-a", required=True)
    p.add_argument("--labels-a", required=True)
    p.add_argument("--scan-b", required=True)
    p.add_argument("--labels-b", required=True)
    p.add_argument("--regions", type=_ints, default=(4, 4, 2))
    p.add_argument("--p", type=float, default=0.25)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("voxelize", help="cylinder-voxel indices of a scan")
    p.add_argument("--scan", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--drop-out-of-bounds", action="store_true")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_voxelize)

    p = sub.add_parser("bevpool", help="per-voxel max pooling into a BEV grid")
    p.add_argument("--features", required=True)
    p.add_argument("--indices", required=True)
    p.add_argument("--grid", type=_ints, default=(480, 360, 32))
    p.add_argument("--fill", type=float, default=0.0)
    p.add_argument("--flatten", action="store_true",
                   help="emit (Gx, Gy, Gz*C) instead of (Gx, Gy, Gz, C)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bevpool)

    p = sub.add_parser("project", help="LiDAR-to-camera pixel mapping")
    p.add_argument("--scan", required=True)
    p.add_argument("--calib", required=True)
    p.add_argument("--view", type=int, default=2)
    p.add_argument("--image-size", type=_ints, default=(376, 1241))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("boxes", help="projected instance boxes")
    p.add_argument("--mapping", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--things", type=_ints, required=True)
    p.add_argument("--min-support", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_boxes)

    p = sub.add_parser("heatmap", help="instance heatmap from boxes or masks")
    p.add_argument("--boxes")
    p.add_argument("--masks", help="LLT1 K x H x W mask stack")
    p.add_argument("--scores", type=_floats, default=())
    p.add_argument("--size", type=_ints, default=(376, 1241))
    p.add_argument("--r-corner", type=float, default=5.0)
    p.add_argument("--p-center", type=float, default=0.25)
    p.add_argument("--png", help="also export an 8-bit grayscale PNG")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("decode", help="panoptic map from network head outputs")
    p.add_argument("--sem", required=True)
    p.add_argument("--centers-hm", required=True)
    p.add_argument("--offsets", required=True)
    p.add_argument("--fore-mask", required=True)
    p.add_argument("--things", type=_ints, required=True)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--kernel", type=int, default=5)
    p.add_argument("--top-k", type=int, default=100)
    p.add_argument("--majority", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="PQ and mIoU report")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--things", type=_ints, required=True)
    p.add_argument("--stuff", type=_ints, required=True)
    p.add_argument("--ignore", type=_ints, default=(0,))
    p.add_argument("--num-classes", type=int, default=1)
    p.add_argument("--report", choices=["json"], default="json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("loss", help="composite segmentation loss from an LLT1 bundle")
    p.add_argument("--inputs", required=True,
                   help="directory with sem_logits/sem_gt/hm_*/os_*/fm_* .llt1 files")
    p.add_argument("--weights", type=_floats, default=(100.0, 10.0, 1.0))
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("pipeline",
                       help="split -> mix -> voxelize -> project -> boxes -> heatmap")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--regions", type=_ints, default=(4, 4, 2))
    p.add_argument("--p", type=float, default=0.25)
    p.add_argument("--view", type=int, default=2)
    p.add_argument("--image-size", type=_ints, default=(376, 1241))
    p.add_argument("--r-corner", type=float, default=5.0)
    p.add_argument("--p-center", type=float, default=0.25)
    p.add_argument("--min-support", type=int, default=1)
    p.add_argument("--things", type=_ints, default=(1,))
    p.add_argument("--jobs", type=int, default=0,
                   help="frame concurrency (0 = LATENTLAB_JOBS or 1)")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def _apply_config(parser, argv):
    """Pre-scan argv for --config and install its values as parser defaults."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    for action_parser in _subparsers(parser):
        known = {a.dest: a for a in action_parser._actions}
        defaults = {}
        for key, raw in values.items():
            if key not in known:
                continue
            action = known[key]
            defaults[key] = action.type(raw) if action.type is not None else raw
            action.required = False
        action_parser.set_defaults(**defaults)


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            yield from action.choices.values()


def _atomic_text(path, text) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_png_gray(path, img: np.ndarray) -> None:
    """Minimal deterministic 8-bit grayscale PNG writer."""
    height, width = img.shape

    def chunk(tag, payload):
        body = tag + payload
        return struct.pack(">I", len(payload)) + body + struct.pack(
            ">I", zlib.crc32(body) & 0xFFFFFFFF)

    raw = b"".join(b"\x00" + img[r].tobytes() for r in range(height))
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0)
    blob = (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr)
            + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b""))
    with open(path, "wb") as fh:
        fh.write(blob)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    _echo_config(args)
    try:
        return args.func(args)
    except LatentLabError as exc:
        print(f"latentlab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
