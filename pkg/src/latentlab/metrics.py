"""Panoptic quality, mIoU, boundary-distance-binned accuracy, and the
composite segmentation loss."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidClassError, ShapeError

_KEY_OFFSET = np.int64(1) << 32


@dataclass
class ClassPQ:
    pq: float
    sq: float
    rq: float
    tp: int
    fp: int
    fn: int


@dataclass
class PQReport:
    per_class: dict = field(default_factory=dict)  # class id -> ClassPQ
    pq: float = 0.0
    pq_things: float = 0.0
    pq_stuff: float = 0.0


@dataclass
class LossWeights:
    """Coefficients of the heatmap, offset and foreground-mask loss terms."""

    mu_hm: float = 100.0
    mu_os: float = 10.0
    mu_fm: float = 1.0

    def __post_init__(self):
        if min(self.mu_hm, self.mu_os, self.mu_fm) < 0:
            raise ValueError("loss weights must be non-negative")


@dataclass
class BoundaryBins:
    """Ascending r_ds edges splitting points into close/medium/far bins."""

    edges: tuple = (1.0 / 3.0, 2.0 / 3.0)

    def __post_init__(self):
        if list(self.edges) != sorted(self.edges) or len(set(self.edges)) != len(self.edges):
            raise ValueError("bin edges must be strictly ascending")

    @property
    def n_bins(self) -> int:
        return len(self.edges) + 1


def _seg_keys(sem, inst, things, stuff):
    """Per-cell segment key; -1 for cells belonging to no segment."""
    keys = np.full(sem.shape, -1, dtype=np.int64)
    thing_mask = np.isin(sem, things)
    stuff_mask = np.isin(sem, stuff)
    keys[thing_mask] = sem[thing_mask] * _KEY_OFFSET + inst[thing_mask]
    keys[stuff_mask] = sem[stuff_mask] * _KEY_OFFSET  # one segment per stuff class
    return keys


def panoptic_quality(pred_sem, pred_inst, gt_sem, gt_inst,
                     things, stuff, ignore=(0,)) -> PQReport:
    """Panoptic quality with the unique IoU > 0.5 matching rule.

    Cells whose ground-truth class is in ``ignore`` are dropped entirely.
    Per class, PQ = sum(IoU of TPs) / (TP + FP/2 + FN/2) and PQ = SQ * RQ.
    """
    things = sorted(int(t) for t in things)
    stuff = sorted(int(s) for s in stuff)
    if set(things) & set(stuff):
        raise ShapeError("thing and stuff class sets must be disjoint")
    arrays = [np.asarray(a).ravel() for a in (pred_sem, pred_inst, gt_sem, gt_inst)]
    if len({a.shape for a in arrays}) != 1:
        raise ShapeError("pred and gt arrays must be aligned element-wise")
    pred_sem, pred_inst, gt_sem, gt_inst = (a.astype(np.int64) for a in arrays)

    valid = ~np.isin(gt_sem, list(ignore))
    pred_keys = _seg_keys(pred_sem[valid], pred_inst[valid], things, stuff)
    gt_keys = _seg_keys(gt_sem[valid], gt_inst[valid], things, stuff)

    pred_area = _areas(pred_keys)
    gt_area = _areas(gt_keys)
    both = (pred_keys >= 0) & (gt_keys >= 0)
    pairs, counts = np.unique(
        np.stack([pred_keys[both], gt_keys[both]]), axis=1, return_counts=True
    )

    matched_pred, matched_gt = set(), set()
    iou_sum = {}
    tp = {}
    for (pk, gk), inter in zip(pairs.T, counts):
        pk, gk = int(pk), int(gk)
        if pk // _KEY_OFFSET != gk // _KEY_OFFSET:
            continue  # segments of different classes never match
        iou = inter / (pred_area[pk] + gt_area[gk] - inter)
        if iou > 0.5:
            cls = pk // _KEY_OFFSET
            matched_pred.add(pk)
            matched_gt.add(gk)
            iou_sum[cls] = iou_sum.get(cls, 0.0) + iou
            tp[cls] = tp.get(cls, 0) + 1

    fp, fn = {}, {}
    for pk in pred_area:
        if pk not in matched_pred:
            cls = pk // _KEY_OFFSET
            fp[cls] = fp.get(cls, 0) + 1
    for gk in gt_area:
        if gk not in matched_gt:
            cls = gk // _KEY_OFFSET
            fn[cls] = fn.get(cls, 0) + 1

    report = PQReport()
    for cls in sorted(set(tp) | set(fp) | set(fn)):
        t, f_p, f_n = tp.get(cls, 0), fp.get(cls, 0), fn.get(cls, 0)
        denom = t + 0.5 * f_p + 0.5 * f_n
        sq = iou_sum.get(cls, 0.0) / t if t else 0.0
        rq = t / denom if denom else 0.0
        report.per_class[int(cls)] = ClassPQ(pq=sq * rq, sq=sq, rq=rq, tp=t, fp=f_p, fn=f_n)

    def _mean(classes):
        vals = [report.per_class[c].pq for c in classes if c in report.per_class]
        return float(np.mean(vals)) if vals else 0.0

    report.pq = _mean(report.per_class)
    report.pq_things = _mean(things)
    report.pq_stuff = _mean(stuff)
    return report


def _areas(keys):
    vals, counts = np.unique(keys[keys >= 0], return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def mean_iou(pred_sem, gt_sem, num_classes: int, ignore=(0,)):
    """Per-class IoU and its mean over classes present in gt or pred.

    Returns (iou, miou) where iou is a length-num_classes array with NaN
    for absent or ignored classes.
    """
    pred = np.asarray(pred_sem).ravel().astype(np.int64)
    gt = np.asarray(gt_sem).ravel().astype(np.int64)
    if pred.shape != gt.shape:
        raise ShapeError("pred and gt must be aligned")
    for name, arr in (("pred", pred), ("gt", gt)):
        if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
            raise InvalidClassError(f"{name} contains class ids outside [0, {num_classes})")

    valid = ~np.isin(gt, list(ignore))
    conf = np.bincount(
        gt[valid] * num_classes + pred[valid], minlength=num_classes * num_classes
    ).reshape(num_classes, num_classes)

    tp = np.diag(conf).astype(np.float64)
    fp = conf.sum(axis=0) - tp
    fn = conf.sum(axis=1) - tp
    denom = tp + fp + fn
    iou = np.full(num_classes, np.nan)
    present = denom > 0
    for c in ignore:
        if 0 <= c < num_classes:
            present[c] = False
    iou[present] = tp[present] / denom[present]
    miou = float(np.nanmean(iou[present])) if present.any() else float("nan")
    return iou, miou


def boundary_accuracy(pred_sem, gt_sem, gt_inst, coords,
                      bins: BoundaryBins | None = None):
    """Semantic accuracy binned by distance-to-instance-size ratio.

    For each ground-truth instance the center is the centroid of its points
    and the size is the largest point-to-centroid distance; a point's bin is
    chosen from r_ds = d / size (zero-size instances fall into the first
    bin). Returns {class id: [accuracy per bin]} with NaN for empty bins.
    """
    bins = bins or BoundaryBins()
    pred = np.asarray(pred_sem).ravel()
    gt = np.asarray(gt_sem).ravel()
    inst = np.asarray(gt_inst).ravel()
    pts = np.asarray(coords, dtype=np.float64)
    if not (pred.shape == gt.shape == inst.shape) or len(pts) != len(gt):
        raise ShapeError("labels and coordinates must be aligned")

    correct = {}
    total = {}
    for inst_id in np.unique(inst):
        if inst_id == 0:
            continue
        sel = inst == inst_id
        centroid = pts[sel].mean(axis=0)
        dist = np.linalg.norm(pts[sel] - centroid, axis=1)
        size = dist.max()
        r_ds = dist / size if size > 0 else np.zeros_like(dist)
        bin_idx = np.searchsorted(bins.edges, r_ds, side="right")
        for cls, b, ok in zip(gt[sel], bin_idx, pred[sel] == gt[sel]):
            cls = int(cls)
            if cls not in total:
                total[cls] = np.zeros(bins.n_bins, dtype=np.int64)
                correct[cls] = np.zeros(bins.n_bins, dtype=np.int64)
            total[cls][b] += 1
            correct[cls][b] += bool(ok)

    out = {}
    for cls in sorted(total):
        with np.errstate(invalid="ignore"):
            acc = np.where(total[cls] > 0, correct[cls] / total[cls], np.nan)
        out[cls] = acc.tolist()
    return out


def segmentation_loss(sem_logits, sem_gt, hm_pred, hm_gt, os_pred, os_gt,
                      fm_pred, fm_gt, weights: LossWeights | None = None,
                      ignore=None):
    """Composite loss: cross-entropy + weighted MSE/MAE heads.

    total = L_sem + mu_hm * L_hm + mu_os * L_os + mu_fm * L_fm, with the
    heatmap and foreground-mask terms as mean squared error and the offset
    term as mean absolute error over both channels.
    """
    weights = weights or LossWeights()
    logits = np.asarray(sem_logits, dtype=np.float64)
    gt = np.asarray(sem_gt).ravel().astype(np.int64)
    if logits.ndim != 2 or len(logits) != len(gt):
        raise ShapeError(f"logits {logits.shape} do not align with {len(gt)} targets")
    if not np.all(np.isfinite(logits)):
        raise ShapeError("logits must be finite")

    keep = np.ones(len(gt), dtype=bool)
    if ignore is not None:
        keep = ~np.isin(gt, np.atleast_1d(ignore))
    log_softmax = logits - logsumexp(logits, axis=1, keepdims=True)
    l_sem = float(-log_softmax[np.arange(len(gt)), gt][keep].mean()) if keep.any() else 0.0

    l_hm = _mse(hm_pred, hm_gt)
    l_os = _mae(os_pred, os_gt)
    l_fm = _mse(fm_pred, fm_gt)
    total = l_sem + weights.mu_hm * l_hm + weights.mu_os * l_os + weights.mu_fm * l_fm
    return total, {"sem": l_sem, "hm": l_hm, "os": l_os, "fm": l_fm}


def _mse(pred, gt):
    pred, gt = np.asarray(pred, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeError(f"shape mismatch {pred.shape} vs {gt.shape}")
    return float(((pred - gt) ** 2).mean())


def _mae(pred, gt):
    pred, gt = np.asarray(pred, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeError(f"shape mismatch {pred.shape} vs {gt.shape}")
    return float(np.abs(pred - gt).mean())
