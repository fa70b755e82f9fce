"""Pinhole LiDAR-to-camera projection and projected-instance boxes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset_io import PointCloud
from .errors import InvalidPointError, ShapeError


@dataclass
class CameraModel:
    """3x4 intrinsic projection plus 4x4 LiDAR-to-camera extrinsic."""

    intrinsic: np.ndarray
    extrinsic: np.ndarray
    image_size: tuple  # (H, W)
    view_id: int = 1

    def __post_init__(self):
        self.intrinsic = np.asarray(self.intrinsic, dtype=np.float64)
        self.extrinsic = np.asarray(self.extrinsic, dtype=np.float64)
        if self.intrinsic.shape != (3, 4) or self.extrinsic.shape != (4, 4):
            raise ShapeError("intrinsic must be 3x4 and extrinsic 4x4")
        if not np.array_equal(self.extrinsic[3], [0.0, 0.0, 0.0, 1.0]):
            raise ShapeError("extrinsic bottom row must be (0, 0, 0, 1)")
        h, w = self.image_size
        if h < 1 or w < 1:
            raise ShapeError("image size must be >= 1 on both axes")


@dataclass
class PixelMapping:
    """Matched (point, pixel) pairs with positive depth, one view."""

    point_index: np.ndarray  # (M,) int64
    rows: np.ndarray  # (M,) int64, h
    cols: np.ndarray  # (M,) int64, w
    depth: np.ndarray  # (M,) float64
    view_id: int = 1

    def __len__(self):
        return len(self.point_index)


@dataclass
class InstanceBox:
    """Min/max pixel box of one projected instance in one view."""

    inst_id: int
    view_id: int
    h_min: int
    w_min: int
    h_max: int
    w_max: int
    score: float = 1.0
    support: int = 0


def _round_half_away(x):
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def project_points(cloud, cam: CameraModel) -> PixelMapping:
    """Project points through the pinhole model; keeps in-image, positive-depth hits.

    Pixel coordinates are (h, w) = (round(v), round(u)) with rounding half
    away from zero.
    """
    xyz = cloud.points[:, :3] if isinstance(cloud, PointCloud) else np.asarray(cloud)[:, :3]
    if not np.all(np.isfinite(xyz)):
        raise InvalidPointError("cannot project non-finite points")
    n = len(xyz)
    homo = np.concatenate([xyz, np.ones((n, 1))], axis=1)
    p_cam = homo @ cam.extrinsic.T  # (N, 4)
    front = p_cam[:, 2] > 0

    uvw = p_cam[front] @ cam.intrinsic.T  # (M, 3)
    depth = uvw[:, 2]
    u = uvw[:, 0] / depth
    v = uvw[:, 1] / depth
    h = _round_half_away(v).astype(np.int64)
    w = _round_half_away(u).astype(np.int64)

    img_h, img_w = cam.image_size
    keep = (h >= 0) & (h < img_h) & (w >= 0) & (w < img_w) & (depth > 0)
    idx = np.flatnonzero(front)[keep]
    return PixelMapping(
        point_index=idx,
        rows=h[keep],
        cols=w[keep],
        depth=depth[keep],
        view_id=cam.view_id,
    )


def instance_boxes(mapping: PixelMapping, sem, inst, thing_classes,
                   min_support: int = 1):
    """Enclose each projected thing-class instance in its min/max pixel box.

    Only points whose semantic class is a thing class and whose instance id
    is positive contribute; instances with fewer than ``min_support``
    projected pixels are skipped. Score is 1 (projected ground truth).
    """
    sem = np.asarray(sem)
    inst = np.asarray(inst)
    if sem.shape != inst.shape:
        raise ShapeError("sem and inst lengths differ")
    things = set(int(t) for t in thing_classes)

    pt = mapping.point_index
    mask = (inst[pt] > 0) & np.isin(sem[pt], list(things))
    rows, cols, ids = mapping.rows[mask], mapping.cols[mask], inst[pt][mask]

    boxes = []
    for inst_id in np.unique(ids):
        sel = ids == inst_id
        support = int(sel.sum())
        if support < min_support:
            continue
        boxes.append(InstanceBox(
            inst_id=int(inst_id),
            view_id=mapping.view_id,
            h_min=int(rows[sel].min()),
            w_min=int(cols[sel].min()),
            h_max=int(rows[sel].max()),
            w_max=int(cols[sel].max()),
            score=1.0,
            support=support,
        ))
    return boxes


def write_boxes(path, boxes) -> None:
    """TSV: inst_id, view, h_min, w_min, h_max, w_max, score, support."""
    import os

    lines = [
        f"{b.inst_id}\t{b.view_id}\t{b.h_min}\t{b.w_min}\t{b.h_max}\t{b.w_max}"
        f"\t{b.score:.6f}\t{b.support}"
        for b in boxes
    ]
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))
    os.replace(tmp, path)


def read_boxes(path):
    boxes = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            inst_id, view, h0, w0, h1, w1, score, support = line.split("\t")
            boxes.append(InstanceBox(
                inst_id=int(inst_id), view_id=int(view),
                h_min=int(h0), w_min=int(w0), h_max=int(h1), w_max=int(w1),
                score=float(score), support=int(support),
            ))
    return boxes
