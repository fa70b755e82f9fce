"""Cylindrical voxelization: point (x, y, z) -> cylinder-voxel index (v_x, v_y, v_z)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset_io import PointCloud
from .errors import InvalidPointError

DEFAULT_GRID = (480, 360, 32)


@dataclass
class CylinderGridSpec:
    """Cylindrical partition bounds and bin counts.

    Axis order is (rho, phi, z) <-> (v_x, v_y, v_z). Bins are half-open;
    coordinates outside the bounds clamp to the nearest valid bin so every
    point carries an index.
    """

    rho_min: float = 3.0
    rho_max: float = 50.0
    z_min: float = -3.0
    z_max: float = 1.5
    phi_min: float = -math.pi
    phi_max: float = math.pi
    grid: tuple = DEFAULT_GRID

    def __post_init__(self):
        if not (self.rho_min < self.rho_max and self.z_min < self.z_max
                and self.phi_min < self.phi_max):
            raise ValueError("grid bounds must satisfy min < max on every axis")
        if any(g < 1 for g in self.grid):
            raise ValueError("every grid dimension must be >= 1")
        self.grid = tuple(int(g) for g in self.grid)


def _axis_bins(coord, lo, hi, n_bins):
    # floor((c - lo) / (hi - lo) * n) clamped into [0, n)
    raw = np.floor((coord - lo) / (hi - lo) * n_bins).astype(np.int64)
    return np.clip(raw, 0, n_bins - 1)


def voxelize(cloud, spec: CylinderGridSpec | None = None) -> np.ndarray:
    """Map each point to its cylinder-voxel index, aligned with input order.

    Returns an (N, 3) int64 array of (v_x, v_y, v_z). Out-of-range points
    clamp to the boundary bin; use :func:`in_bounds_mask` to reproduce
    strict filtering.
    """
    spec = spec or CylinderGridSpec()
    xyz = cloud.points[:, :3] if isinstance(cloud, PointCloud) else np.asarray(cloud)[:, :3]
    if not np.all(np.isfinite(xyz)):
        raise InvalidPointError("point cloud contains non-finite coordinates")
    x, y, z = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    rho = np.hypot(x, y)
    phi = np.arctan2(y, x)
    gx, gy, gz = spec.grid
    out = np.empty((len(xyz), 3), dtype=np.int64)
    out[:, 0] = _axis_bins(rho, spec.rho_min, spec.rho_max, gx)
    out[:, 1] = _axis_bins(phi, spec.phi_min, spec.phi_max, gy)
    out[:, 2] = _axis_bins(z, spec.z_min, spec.z_max, gz)
    return out


def in_bounds_mask(cloud, spec: CylinderGridSpec | None = None) -> np.ndarray:
    """Boolean mask of points inside the cylindrical bounds (rho and z)."""
    spec = spec or CylinderGridSpec()
    xyz = cloud.points[:, :3] if isinstance(cloud, PointCloud) else np.asarray(cloud)[:, :3]
    rho = np.hypot(xyz[:, 0], xyz[:, 1])
    return (
        (rho >= spec.rho_min) & (rho <= spec.rho_max)
        & (xyz[:, 2] >= spec.z_min) & (xyz[:, 2] <= spec.z_max)
    )
