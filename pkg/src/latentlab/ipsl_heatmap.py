"""Instance position-scale heatmaps and their fusion with image features.

Each anchor (box corner or center) contributes a truncated Gaussian
``exp(-2 d^2 / R^2)`` that is zero beyond radius R; per-box and per-image
heatmaps are pointwise maxima of anchor heatmaps. A mask variant builds the
heatmap as a score-weighted sum of binary masks clamped to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera_projection import InstanceBox
from .errors import InvalidAnchorError, ShapeError


@dataclass
class HeatmapSpec:
    """Anchor radii: fixed corner radius, center radius scaled by box size."""

    r_corner: float = 5.0
    p_center: float = 0.25
    r_center_floor: float = 1.0

    def __post_init__(self):
        if self.r_corner <= 0:
            raise ValueError("r_corner must be > 0")
        if not 0.0 < self.p_center <= 1.0:
            raise ValueError("p_center must be in (0, 1]")


def point_heatmap(anchor, radius: float, dims) -> np.ndarray:
    """Truncated Gaussian around one anchor pixel (h, w)."""
    h, w = float(anchor[0]), float(anchor[1])
    height, width = (int(d) for d in dims)
    if radius <= 0:
        raise ValueError("radius must be > 0")
    if not (0 <= h < height and 0 <= w < width):
        raise InvalidAnchorError(f"anchor ({h}, {w}) outside {height}x{width} image")
    m = np.arange(height, dtype=np.float64)[:, None]
    n = np.arange(width, dtype=np.float64)[None, :]
    d2 = (h - m) ** 2 + (w - n) ** 2
    out = np.exp(-2.0 * d2 / radius ** 2)
    out[d2 > radius ** 2] = 0.0
    return out


def center_radius(box: InstanceBox, spec: HeatmapSpec) -> float:
    """Center anchor radius: p_center times the smaller box extent, floored."""
    extent = min(box.h_max - box.h_min, box.w_max - box.w_min)
    return max(spec.r_center_floor, spec.p_center * extent)


def box_heatmap(box: InstanceBox, spec: HeatmapSpec, dims) -> np.ndarray:
    """Pointwise max of the 4 corner heatmaps and the center heatmap."""
    corners = [
        (box.h_min, box.w_min), (box.h_min, box.w_max),
        (box.h_max, box.w_min), (box.h_max, box.w_max),
    ]
    center = ((box.h_min + box.h_max) / 2.0, (box.w_min + box.w_max) / 2.0)
    out = np.zeros(tuple(int(d) for d in dims))
    for q in corners:
        np.maximum(out, point_heatmap(q, spec.r_corner, dims), out=out)
    np.maximum(out, point_heatmap(center, center_radius(box, spec), dims), out=out)
    return out


def image_heatmap(boxes, spec: HeatmapSpec | None = None, dims=(376, 1241)) -> np.ndarray:
    """Pointwise max over per-box heatmaps; all-zero for an empty box list."""
    spec = spec or HeatmapSpec()
    out = np.zeros(tuple(int(d) for d in dims))
    for box in boxes:
        np.maximum(out, box_heatmap(box, spec, dims), out=out)
    return out


def mask_heatmap(masks, scores) -> np.ndarray:
    """Score-weighted sum of binary masks, clamped to 1."""
    masks = np.asarray(masks, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if masks.ndim != 3 or len(masks) != len(scores):
        raise ShapeError(
            f"need K masks and K scores, got {masks.shape} and {scores.shape}"
        )
    return np.minimum((masks * scores[:, None, None]).sum(axis=0), 1.0)


def fuse_intermediate(image_feat, heat, psi_i_weights, psi_i_bias,
                      psi_h_weights, psi_h_bias) -> np.ndarray:
    """Sum of pointwise linear maps of image features and heatmap.

    Both maps are 1x1 (per-pixel) linear projections to the same channel
    count; output is psi_I(feat) + psi_H(heat).
    """
    feat = np.asarray(image_feat, dtype=np.float64)
    heat = np.asarray(heat, dtype=np.float64)
    wi = np.asarray(psi_i_weights, dtype=np.float64)
    bi = np.asarray(psi_i_bias, dtype=np.float64)
    wh = np.asarray(psi_h_weights, dtype=np.float64)
    bh = np.asarray(psi_h_bias, dtype=np.float64)
    if feat.ndim != 2 + 1 or feat.shape[:2] != heat.shape:
        raise ShapeError(f"feature {feat.shape} vs heatmap {heat.shape}")
    if wi.shape[0] != feat.shape[2] or wh.shape != (1, wi.shape[1]):
        raise ShapeError(f"projection weights {wi.shape}/{wh.shape} do not match inputs")
    return feat @ wi + bi + heat[:, :, None] * wh[0] + bh
