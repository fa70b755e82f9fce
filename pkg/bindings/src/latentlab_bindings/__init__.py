"""Array-in/array-out bindings for the latentlab hot-path operations.

Each function takes plain numpy arrays plus keyword parameters that mirror
the corresponding latentlab CLI flags, and returns arrays (or plain dicts of
scalars for the metric ops). File handling stays on the caller's side; these
wrappers only adapt array layouts to and from the core library's domain types,
so results are identical to calling the core library directly.

Contract violations raise the core library's typed exceptions (all subclasses
of ``latentlab.errors.LatentLabError``).
"""

import numpy as np

from latentlab import errors  # noqa: F401  (re-exported error taxonomy)
from latentlab.bev_pool import bev_max_pool as _bev_max_pool
from latentlab.camera_projection import InstanceBox
from latentlab.cylinder_grid import CylinderGridSpec
from latentlab.cylinder_grid import voxelize as _voxelize
from latentlab.cylinder_mix import MixSpec
from latentlab.cylinder_mix import cylinder_mix as _cylinder_mix
from latentlab.dataset_io import PointCloud
from latentlab.ipsl_heatmap import HeatmapSpec
from latentlab.ipsl_heatmap import image_heatmap as _image_heatmap
from latentlab.metrics import mean_iou as _mean_iou
from latentlab.metrics import panoptic_quality as _panoptic_quality

__all__ = [
    "cylinder_mix",
    "voxelize",
    "bev_max_pool",
    "image_heatmap",
    "panoptic_quality",
    "mean_iou",
]

__version__ = "0.1.0"


def _grid_spec(grid, bounds):
    rho_min, rho_max, z_min, z_max = (float(v) for v in bounds)
    return CylinderGridSpec(rho_min=rho_min, rho_max=rho_max,
                            z_min=z_min, z_max=z_max,
                            grid=tuple(int(g) for g in grid))


def _unpack(labels):
    packed = np.ascontiguousarray(labels, dtype=np.uint32)
    return (packed & np.uint32(0xFFFF)), (packed >> np.uint32(16))


def _pack(sem, inst):
    return (inst.astype(np.uint32) << np.uint32(16)) | sem.astype(np.uint32)


def _cloud(points, labels, frame):
    sem, inst = _unpack(labels)
    return PointCloud(points=np.ascontiguousarray(points, dtype=np.float32),
                      sem=sem, inst=inst, frame_id=frame)


def cylinder_mix(*, points_a, labels_a, points_b, labels_b, seed,
                 regions=(4, 4, 2), p=0.25,
                 grid=(480, 360, 32), bounds=(3.0, 50.0, -3.0, 1.5)):
    """Checkerboard-mix two labeled scans.

    ``points_*`` are (N, 4) float32 x/y/z/intensity rows and ``labels_*`` are
    packed uint32 labels (semantic class in the low 16 bits, instance id in
    the high 16). Returns a pair of dicts, one per mixed output, each with
    ``points``, ``labels``, ``source`` (0 for the first input, 1 for the
    second) and ``index`` (row in that input).
    """
    a = _cloud(points_a, labels_a, "0")
    b = _cloud(points_b, labels_b, "1")
    out1, out2 = _cylinder_mix(a, b, _grid_spec(grid, bounds),
                               MixSpec(region_size=tuple(int(r) for r in regions),
                                       p_cylmix=float(p), seed=int(seed)))

    def as_arrays(cloud):
        return {
            "points": cloud.points,
            "labels": _pack(cloud.sem, cloud.inst),
            "source": cloud.prov_frame.astype(np.int64),
            "index": cloud.prov_index.astype(np.int64),
        }

    return as_arrays(out1), as_arrays(out2)


def voxelize(*, points, grid=(480, 360, 32), bounds=(3.0, 50.0, -3.0, 1.5)):
    """Cylinder-voxel index of each point as an (N, 3) int64 array."""
    pts = np.ascontiguousarray(points, dtype=np.float32)
    return _voxelize(pts, _grid_spec(grid, bounds))


def bev_max_pool(*, features, indices, grid, fill=0.0):
    """Per-voxel elementwise max of (N, C) features into a (Gx, Gy, Gz, C) grid."""
    idx = np.ascontiguousarray(indices, dtype=np.int64)
    pooled = _bev_max_pool(np.asarray(features), idx,
                           tuple(int(g) for g in grid), fill=float(fill))
    return pooled.data


def image_heatmap(*, boxes, size=(376, 1241), scores=None,
                  r_corner=5.0, p_center=0.25):
    """Gaussian instance heatmap from a (K, 4) h_min/w_min/h_max/w_max box array."""
    rows = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    if scores is None:
        scores = np.ones(len(rows))
    built = [InstanceBox(inst_id=k, view_id=0,
                         h_min=r[0], w_min=r[1], h_max=r[2], w_max=r[3],
                         score=float(s), support=1)
             for k, (r, s) in enumerate(zip(rows, scores))]
    spec = HeatmapSpec(r_corner=float(r_corner), p_center=float(p_center))
    return _image_heatmap(built, spec, tuple(int(d) for d in size))


def panoptic_quality(*, pred, gt, things, stuff, ignore=(0,)):
    """PQ report from packed uint32 label arrays, as a plain dict.

    Returns overall ``pq``/``pq_things``/``pq_stuff`` plus a ``per_class``
    mapping of class id to pq/sq/rq/tp/fp/fn.
    """
    pred_sem, pred_inst = _unpack(pred)
    gt_sem, gt_inst = _unpack(gt)
    report = _panoptic_quality(pred_sem.astype(np.int64), pred_inst.astype(np.int64),
                               gt_sem.astype(np.int64), gt_inst.astype(np.int64),
                               things, stuff, ignore=ignore)
    return {
        "pq": report.pq,
        "pq_things": report.pq_things,
        "pq_stuff": report.pq_stuff,
        "per_class": {
            cls: {"pq": r.pq, "sq": r.sq, "rq": r.rq,
                  "tp": r.tp, "fp": r.fp, "fn": r.fn}
            for cls, r in report.per_class.items()
        },
    }


def mean_iou(*, pred, gt, num_classes, ignore=(0,)):
    """Per-class IoU array (NaN for absent classes) and its mean.

    ``pred`` and ``gt`` are semantic class id arrays of equal shape.
    """
    return _mean_iou(pred, gt, int(num_classes), ignore=ignore)
