"""SemanticKITTI-style scan/label/calibration I/O, splitting and manifests.

Scans are raw little-endian float32 quadruples (x, y, z, intensity);
labels pack the semantic class into the low 16 bits of a uint32 and the
instance id into the high 16 bits.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CalibrationParseError,
    InvalidRatioError,
    LabelMismatchError,
    LabelOverflowError,
    MalformedScanError,
    MissingCalibrationError,
    MissingPseudoError,
)

POINT_RECORD_BYTES = 16  # 4 x float32


@dataclass
class PointCloud:
    """N points (x, y, z, b) with optional per-point labels and provenance.

    ``sem``/``inst`` and the provenance arrays, when present, carry exactly
    one entry per point (aligned with ``points`` rows).
    """

    points: np.ndarray  # (N, 4) float32
    sem: np.ndarray | None = None  # (N,) uint32
    inst: np.ndarray | None = None  # (N,) uint32
    frame_id: str | None = None
    prov_frame: np.ndarray | None = None  # (N,) source frame ids
    prov_index: np.ndarray | None = None  # (N,) original row index

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float32).reshape(-1, 4)
        n = len(self.points)
        for name in ("sem", "inst", "prov_frame", "prov_index"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr)
                if len(arr) != n:
                    raise LabelMismatchError(
                        f"{name} has {len(arr)} entries for {n} points"
                    )
                setattr(self, name, arr)

    def __len__(self):
        return len(self.points)

    @property
    def has_labels(self) -> bool:
        return self.sem is not None and self.inst is not None

    @property
    def has_provenance(self) -> bool:
        return self.prov_frame is not None and self.prov_index is not None


@dataclass
class SplitManifest:
    """Deterministic labeled/unlabeled partition of an ordered frame list."""

    frames: list
    labeled: list
    unlabeled: list
    ratio: float


@dataclass
class TrainingManifest:
    """Per-frame label source: ground truth for labeled, pseudo otherwise."""

    entries: list = field(default_factory=list)  # (frame_id, label_path, kind)


def read_scan(path) -> PointCloud:
    """Read a raw binary scan; point order is preserved."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) % POINT_RECORD_BYTES != 0:
        raise MalformedScanError(
            f"{path}: {len(blob)} bytes is not a multiple of {POINT_RECORD_BYTES}"
        )
    pts = np.frombuffer(blob, dtype="<f4").reshape(-1, 4).copy()
    return PointCloud(points=pts)


def write_scan(path, cloud: PointCloud) -> None:
    """Write a scan so that ``read_scan`` round-trips it bit-exactly."""
    if not np.all(np.isfinite(cloud.points)):
        raise MalformedScanError("scan contains non-finite values")
    _atomic_write(path, np.ascontiguousarray(cloud.points, dtype="<f4").tobytes())


def read_labels(path, n_points: int):
    """Read packed labels; returns (sem, inst) uint32 arrays of length n_points."""
    raw = np.fromfile(path, dtype="<u4")
    if len(raw) != n_points:
        raise LabelMismatchError(
            f"{path}: {len(raw)} labels for {n_points} points"
        )
    return (raw & 0xFFFF).astype(np.uint32), (raw >> 16).astype(np.uint32)


def write_labels(path, sem, inst) -> None:
    """Pack and write labels; each id must fit in 16 bits."""
    sem = np.asarray(sem, dtype=np.uint64)
    inst = np.asarray(inst, dtype=np.uint64)
    if sem.shape != inst.shape:
        raise LabelMismatchError("sem and inst lengths differ")
    if sem.size and (sem.max() > 0xFFFF or inst.max() > 0xFFFF):
        raise LabelOverflowError("semantic or instance id exceeds 16 bits")
    packed = (sem | (inst << 16)).astype("<u4")
    _atomic_write(path, packed.tobytes())


def read_calibration(path, view: int = 2, image_size=(376, 1241)):
    """Parse a KITTI-style calib file into a CameraModel.

    Expects a ``P<view>:`` 3x4 projection row and a ``Tr:`` 3x4 LiDAR-to-camera
    extrinsic row (padded with [0, 0, 0, 1]).
    """
    from .camera_projection import CameraModel

    rows = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or ":" not in line:
                continue
            key, _, rest = line.partition(":")
            try:
                rows[key.strip()] = [float(tok) for tok in rest.split()]
            except ValueError as exc:
                raise CalibrationParseError(f"{path}: {key}: {exc}") from None

    proj_key = f"P{view}"
    for key in (proj_key, "Tr"):
        if key not in rows:
            raise MissingCalibrationError(f"{path}: missing '{key}:' row")
        if len(rows[key]) != 12:
            raise CalibrationParseError(
                f"{path}: '{key}:' has {len(rows[key])} values, expected 12"
            )

    intrinsic = np.array(rows[proj_key], dtype=np.float64).reshape(3, 4)
    extrinsic = np.eye(4, dtype=np.float64)
    extrinsic[:3, :] = np.array(rows["Tr"], dtype=np.float64).reshape(3, 4)
    return CameraModel(
        intrinsic=intrinsic,
        extrinsic=extrinsic,
        image_size=tuple(image_size),
        view_id=view,
    )


def fixed_interval_split(frames, ratio: float) -> SplitManifest:
    """Mark every k-th frame labeled, k = round(1/ratio), starting at index 0."""
    if not 0.0 < ratio <= 1.0:
        raise InvalidRatioError(f"ratio {ratio} outside (0, 1]")
    frames = list(frames)
    k = max(1, round(1.0 / ratio))
    labeled_idx = set(range(0, len(frames), k))
    labeled = [f for i, f in enumerate(frames) if i in labeled_idx]
    unlabeled = [f for i, f in enumerate(frames) if i not in labeled_idx]
    return SplitManifest(frames=frames, labeled=labeled, unlabeled=unlabeled, ratio=ratio)


def self_training_manifest(split: SplitManifest, gt_dir, pseudo_dir) -> TrainingManifest:
    """Assemble retraining entries: gt labels for labeled frames, pseudo otherwise."""
    labeled = set(split.labeled)
    entries = []
    for frame in split.frames:
        if frame in labeled:
            entries.append((frame, os.path.join(gt_dir, f"{frame}.label"), "ground_truth"))
        else:
            path = os.path.join(pseudo_dir, f"{frame}.label")
            if not os.path.isfile(path):
                raise MissingPseudoError(f"frame {frame}: no pseudo label at {path}")
            entries.append((frame, path, "pseudo"))
    return TrainingManifest(entries=entries)


def write_manifest(path, manifest: TrainingManifest) -> None:
    lines = [f"{frame}\t{label}\t{kind}" for frame, label, kind in manifest.entries]
    _atomic_write(path, ("\n".join(lines) + "\n").encode() if lines else b"")


def read_manifest(path) -> TrainingManifest:
    entries = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            frame, label, kind = line.split("\t")
            entries.append((frame, label, kind))
    return TrainingManifest(entries=entries)


def _atomic_write(path, data: bytes) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
