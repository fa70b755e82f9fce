"""BEV aggregation: per-voxel elementwise max pooling and channel-concat fusion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidIndexError, ShapeError


@dataclass
class FeatureGrid:
    """Dense (G_x, G_y, G_z, C) tensor with a fill value for empty voxels."""

    data: np.ndarray
    fill: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 4:
            raise ShapeError(f"FeatureGrid expects 4 dims, got {self.data.ndim}")

    @property
    def dims(self):
        return self.data.shape

    def flattened(self) -> np.ndarray:
        """(G_x, G_y, G_z*C) layout for 2D backbones that fold height into channels."""
        gx, gy, gz, c = self.data.shape
        return self.data.reshape(gx, gy, gz * c)


def bev_max_pool(features, indices, grid_dims, fill: float = 0.0) -> FeatureGrid:
    """Pool N point/pixel feature rows into a dense grid by per-voxel max.

    Empty voxels hold ``fill``; occupied voxels hold the elementwise maximum
    of the features assigned to them (even when that maximum is below fill).
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim == 1:
        feats = feats[:, None]
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 2 or idx.shape[1] != 3:
        raise ShapeError(f"indices must be (N, 3), got {idx.shape}")
    if len(feats) != len(idx):
        raise ShapeError(f"{len(feats)} feature rows vs {len(idx)} indices")
    gx, gy, gz = (int(g) for g in grid_dims)
    if len(idx) and (idx.min() < 0 or np.any(idx >= [gx, gy, gz])):
        raise InvalidIndexError("voxel index outside the grid")

    c = feats.shape[1]
    flat = np.full((gx * gy * gz, c), -np.inf)
    lin = (idx[:, 0] * gy + idx[:, 1]) * gz + idx[:, 2]
    np.maximum.at(flat, lin, feats)
    empty = np.isneginf(flat[:, 0])
    flat[empty] = fill
    return FeatureGrid(data=flat.reshape(gx, gy, gz, c), fill=fill)


def fuse_bev(f_pt: FeatureGrid, f_im: FeatureGrid, weights, bias) -> FeatureGrid:
    """Concatenate the two grids along channels and apply a per-cell linear map."""
    if f_pt.data.shape[:3] != f_im.data.shape[:3]:
        raise ShapeError(
            f"spatial dims differ: {f_pt.data.shape[:3]} vs {f_im.data.shape[:3]}"
        )
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    c_in = f_pt.data.shape[3] + f_im.data.shape[3]
    if weights.shape[0] != c_in or weights.shape[1] != bias.shape[0]:
        raise ShapeError(
            f"weights {weights.shape} / bias {bias.shape} do not match {c_in} input channels"
        )
    stacked = np.concatenate([f_pt.data, f_im.data], axis=3)
    return FeatureGrid(data=stacked @ weights + bias, fill=f_pt.fill)
