"""One-pass evaluation metrics: center error, overlap, precision and success curves."""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 21)
PRECISION_AT = 20


def centers(boxes):
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    return boxes[:, :2] + boxes[:, 2:] / 2.0


def center_error(pred, gt):
    """Euclidean distance between box centers, per frame (``x,y,w,h`` rows)."""
    d = centers(pred) - centers(gt)
    return np.hypot(d[:, 0], d[:, 1])


def iou(a, b):
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    ix = np.minimum(a[:, 0] + a[:, 2], b[:, 0] + b[:, 2]) - np.maximum(a[:, 0], b[:, 0])
    iy = np.minimum(a[:, 1] + a[:, 3], b[:, 1] + b[:, 3]) - np.maximum(a[:, 1], b[:, 1])
    inter = np.clip(ix, 0, None) * np.clip(iy, 0, None)
    union = a[:, 2] * a[:, 3] + b[:, 2] * b[:, 3] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(union > 0, inter / union, 0.0)
    return out


def precision_curve(cle, thresholds=PRECISION_THRESHOLDS):
    cle = np.asarray(cle, dtype=np.float64)
    if cle.size == 0:
        return np.zeros(len(thresholds))
    return (cle[None, :] <= np.asarray(thresholds)[:, None]).mean(axis=1)


def success_curve(overlaps, thresholds=SUCCESS_THRESHOLDS):
    overlaps = np.asarray(overlaps, dtype=np.float64)
    if overlaps.size == 0:
        return np.zeros(len(thresholds))
    return (overlaps[None, :] > np.asarray(thresholds)[:, None]).mean(axis=1)


def success_auc(success, thresholds=SUCCESS_THRESHOLDS):
    span = thresholds[-1] - thresholds[0]
    return float(trapezoid(success, thresholds) / span)


@dataclass
class EvalResult:
    cle: np.ndarray
    iou: np.ndarray
    precision: np.ndarray
    success: np.ndarray
    precision_at_20: float
    auc: float
    valid: int

    def summary(self):
        return {"precision@20": float(self.precision_at_20), "auc": float(self.auc),
                "frames": int(self.valid)}


def evaluate(pred, gt):
    """Score predicted boxes against ground truth; frames with NaN ground truth are skipped.

    A NaN prediction on an annotated frame counts as a miss (infinite error, zero overlap).
    """
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 4)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 4)
    if len(pred) != len(gt):
        raise ValueError(f"{len(pred)} predicted boxes for {len(gt)} groundtruth boxes")
    keep = ~np.any(np.isnan(gt), axis=1)
    p, g = pred[keep], gt[keep]
    lost = np.any(~np.isfinite(p), axis=1)
    cle = np.where(lost, np.inf, center_error(np.nan_to_num(p), g))
    ov = np.where(lost, 0.0, iou(np.nan_to_num(p), g))
    prec = precision_curve(cle)
    succ = success_curve(ov)
    return EvalResult(cle, ov, prec, succ, float(prec[PRECISION_AT]), success_auc(succ), int(keep.sum()))


def mean_result(results):
    """Aggregate by averaging curves and scores over sequences (per-frame arrays are concatenated)."""
    results = list(results)
    if not results:
        raise ValueError("no results to aggregate")
    prec = np.mean([r.precision for r in results], axis=0)
    succ = np.mean([r.success for r in results], axis=0)
    return EvalResult(
        np.concatenate([r.cle for r in results]),
        np.concatenate([r.iou for r in results]),
        prec,
        succ,
        float(np.mean([r.precision_at_20 for r in results])),
        float(np.mean([r.auc for r in results])),
        int(sum(r.valid for r in results)),
    )
