"""Cylinder-Mix: interleaved checkerboard mixing of two labeled point clouds.

Points are binned into cylinder-voxel regions; a parity rule decides which
of the two output clouds each region's points land in, so that the regions
surrounding any block all come from the other cloud.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cylinder_grid import CylinderGridSpec, voxelize
from .dataset_io import PointCloud
from .errors import NotEnoughFramesError, UnlabeledInputError

DEFAULT_REGIONS = (4, 4, 2)


@dataclass
class MixSpec:
    """Region layout, gate probability and seed for one mixing policy."""

    region_size: tuple = DEFAULT_REGIONS
    p_cylmix: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if any(r < 1 for r in self.region_size):
            raise ValueError("region sizes must be >= 1")
        if not 0.0 <= self.p_cylmix <= 1.0:
            raise ValueError("p_cylmix must be in [0, 1]")
        self.region_size = tuple(int(r) for r in self.region_size)


def region_index(voxel_idx, grid, regions) -> np.ndarray:
    """Region index r_k = floor(v_k * R_k / G_k), in exact integer arithmetic."""
    v = np.asarray(voxel_idx, dtype=np.int64)
    g = np.asarray(grid, dtype=np.int64)
    r = np.asarray(regions, dtype=np.int64)
    return (v * r) // g


def mix_membership(region_idx) -> np.ndarray:
    """Parity rule deciding membership in the first mixed cloud.

    Evaluates not(even(r_x) xor even(r_y)) xor even(r_z), which is true
    exactly when r_x + r_y + r_z is odd.
    """
    r = np.asarray(region_idx, dtype=np.int64)
    return (r.sum(axis=-1) % 2).astype(bool)


def cylinder_mix(a: PointCloud, b: PointCloud,
                 grid: CylinderGridSpec | None = None,
                 mix: MixSpec | None = None,
                 rng: np.random.Generator | None = None):
    """Mix two labeled clouds over checkerboard regions.

    With probability 1 - p_cylmix (drawn once per call) the inputs are
    returned unchanged apart from provenance attachment. Otherwise the first
    output takes the membership-true points of both clouds and the second
    takes the complement; labels ride along per point and each output point
    records (source frame, original index). Output order is all a-sourced
    points first, then b-sourced, each in original order.
    """
    grid = grid or CylinderGridSpec()
    mix = mix or MixSpec()
    if not (a.has_labels and b.has_labels):
        raise UnlabeledInputError("cylinder_mix requires labeled inputs")
    rng = rng if rng is not None else np.random.default_rng(mix.seed)

    a = _with_provenance(a, "P1")
    b = _with_provenance(b, "P2")
    if rng.random() >= mix.p_cylmix:
        return a, b

    mem_a = mix_membership(region_index(voxelize(a, grid), grid.grid, mix.region_size))
    mem_b = mix_membership(region_index(voxelize(b, grid), grid.grid, mix.region_size))
    out1 = _gather(a, mem_a, b, mem_b)
    out2 = _gather(a, ~mem_a, b, ~mem_b)
    return out1, out2


def pair_scans(labeled_frames, seed: int):
    """Seeded shuffle then consecutive pairing of labeled frame ids.

    Returns (pairs, leftover); leftover is the odd frame out or None.
    """
    frames = list(labeled_frames)
    if len(frames) < 2:
        raise NotEnoughFramesError(f"need >= 2 frames to pair, got {len(frames)}")
    order = np.random.default_rng(seed).permutation(len(frames))
    shuffled = [frames[i] for i in order]
    pairs = [(shuffled[i], shuffled[i + 1]) for i in range(0, len(shuffled) - 1, 2)]
    leftover = shuffled[-1] if len(shuffled) % 2 else None
    return pairs, leftover


def _with_provenance(cloud: PointCloud, fallback_frame: str) -> PointCloud:
    if cloud.has_provenance:
        return cloud
    frame = cloud.frame_id if cloud.frame_id is not None else fallback_frame
    n = len(cloud)
    return PointCloud(
        points=cloud.points,
        sem=cloud.sem,
        inst=cloud.inst,
        frame_id=cloud.frame_id,
        prov_frame=np.full(n, frame, dtype=object),
        prov_index=np.arange(n, dtype=np.int64),
    )


def _gather(a: PointCloud, mask_a, b: PointCloud, mask_b) -> PointCloud:
    return PointCloud(
        points=np.concatenate([a.points[mask_a], b.points[mask_b]]),
        sem=np.concatenate([a.sem[mask_a], b.sem[mask_b]]),
        inst=np.concatenate([a.inst[mask_a], b.inst[mask_b]]),
        prov_frame=np.concatenate([a.prov_frame[mask_a], b.prov_frame[mask_b]]),
        prov_index=np.concatenate([a.prov_index[mask_a], b.prov_index[mask_b]]),
    )
