"""Instance decoding: center NMS, offset clustering, majority semantic vote."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ShapeError


@dataclass
class DecodeSpec:
    """Center-extraction hyper-parameters."""

    center_threshold: float = 0.1
    nms_kernel: int = 5
    top_k: int = 100

    def __post_init__(self):
        if self.nms_kernel < 1 or self.nms_kernel % 2 == 0:
            raise ValueError("nms_kernel must be odd and >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass
class PanopticMap:
    """Per-cell (semantic class, instance id); inst 0 means no instance."""

    sem: np.ndarray  # (H, W) int
    inst: np.ndarray  # (H, W) int

    def __post_init__(self):
        self.sem = np.asarray(self.sem, dtype=np.int64)
        self.inst = np.asarray(self.inst, dtype=np.int64)
        if self.sem.shape != self.inst.shape:
            raise ShapeError("sem and inst planes must share shape")


def find_centers(center_hm, spec: DecodeSpec | None = None):
    """Suppressed peak list [(h, w, score), ...], sorted by score descending.

    A cell survives if it is at least the threshold and strictly greater
    than every other cell whose NMS window overlaps its own (Chebyshev
    distance <= nms_kernel - 1).
    """
    spec = spec or DecodeSpec()
    hm = np.asarray(center_hm, dtype=np.float64)
    radius = spec.nms_kernel - 1
    size = 2 * radius + 1
    footprint = np.ones((size, size), dtype=bool)
    footprint[radius, radius] = False
    neighbor_max = ndimage.maximum_filter(
        hm, footprint=footprint, mode="constant", cval=-np.inf
    )
    keep = (hm >= spec.center_threshold) & (hm > neighbor_max)
    hs, ws = np.nonzero(keep)
    order = sorted(range(len(hs)), key=lambda i: (-hm[hs[i], ws[i]], hs[i], ws[i]))
    return [(int(hs[i]), int(ws[i]), float(hm[hs[i], ws[i]])) for i in order[: spec.top_k]]


def assign_instances(sem, offsets, fore_mask, centers, thing_classes,
                     spec: DecodeSpec | None = None) -> PanopticMap:
    """Cluster foreground thing cells to their nearest offset-shifted center.

    Instance ids are 1..K in center score order. Cells that are stuff-class,
    background (mask < 0.5), or have no center to attach to get inst 0.
    """
    sem = np.asarray(sem, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.float64)
    fore = np.asarray(fore_mask, dtype=np.float64) >= 0.5
    if offsets.shape != sem.shape + (2,) or fore.shape != sem.shape:
        raise ShapeError(
            f"shape mismatch: sem {sem.shape}, offsets {offsets.shape}, mask {fore.shape}"
        )
    inst = np.zeros_like(sem)
    if centers:
        is_thing = np.isin(sem, list(thing_classes))
        hs, ws = np.nonzero(fore & is_thing)
        if len(hs):
            targets = np.stack([hs + offsets[hs, ws, 0], ws + offsets[hs, ws, 1]], axis=1)
            ctr = np.asarray([(c[0], c[1]) for c in centers], dtype=np.float64)
            d2 = ((targets[:, None, :] - ctr[None, :, :]) ** 2).sum(axis=2)
            # argmin returns the first minimum: ties go to the higher-scoring center
            inst[hs, ws] = d2.argmin(axis=1) + 1
    return PanopticMap(sem=sem, inst=inst)


def majority_semantic(pmap: PanopticMap) -> PanopticMap:
    """Relabel each instance's cells to its majority class (ties: smaller id)."""
    sem = pmap.sem.copy()
    for inst_id in np.unique(pmap.inst):
        if inst_id == 0:
            continue
        cells = pmap.inst == inst_id
        classes, counts = np.unique(sem[cells], return_counts=True)
        sem[cells] = classes[counts == counts.max()].min()
    return PanopticMap(sem=sem, inst=pmap.inst.copy())
