"""One-pass evaluation: center error, overlap, precision and success curves."""

from dataclasses import dataclass
import math
import time

import numpy as np

from .errors import InvalidInputError, TrackingLostError
from .tracker import Tracker

PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
SUCCESS_THRESHOLDS = np.round(np.arange(0, 21) * 0.05, 10)
PRECISION_AT = 20.0
SUCCESS_AT = 0.5

RESULT_HEADER = "frame,x,y,w,h,gt_x,gt_y,gt_w,gt_h,cle,overlap"


def cle(b_t, b_g):
    """Euclidean distance between box centers."""
    (ax, ay), (bx, by) = b_t.center(), b_g.center()
    return math.hypot(ax - bx, ay - by)


def overlap(b_t, b_g):
    """Intersection over union of two boxes using continuous areas."""
    iw = min(b_t.x + b_t.w, b_g.x + b_g.w) - max(b_t.x, b_g.x)
    ih = min(b_t.y + b_t.h, b_g.y + b_g.h) - max(b_t.y, b_g.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = b_t.w * b_t.h + b_g.w * b_g.h - inter
    return inter / union


@dataclass(frozen=True)
class FrameResult:
    frame: int
    box: object
    gt: object
    cle: float
    overlap: float

    @classmethod
    def score(cls, frame, box, gt):
        return cls(frame, box, gt, cle(box, gt), overlap(box, gt))

    def as_row(self):
        """CSV row with boxes in 1-indexed file coordinates."""
        b, g = self.box, self.gt
        return (f"{self.frame},{b.x + 1},{b.y + 1},{b.w},{b.h},"
                f"{g.x + 1},{g.y + 1},{g.w},{g.h},{self.cle:.6f},{self.overlap:.6f}")


def _values(results, attr):
    vals = np.array([getattr(r, attr) if not np.isscalar(r) else r for r in results],
                    dtype=np.float64)
    if vals.size == 0:
        raise InvalidInputError("no results to evaluate")
    return vals


def precision_curve(results, thresholds=PRECISION_THRESHOLDS):
    """Fraction of frames with center error <= each threshold.

    ``results`` holds FrameResult objects or raw center errors.
    """
    errs = _values(results, "cle")
    thresholds = np.asarray(thresholds, dtype=np.float64)
    return (errs[None, :] <= thresholds[:, None]).mean(axis=1)


def success_curve(results, thresholds=SUCCESS_THRESHOLDS):
    """Fraction of frames with overlap >= each threshold, plus its AUC."""
    ious = _values(results, "overlap")
    thresholds = np.asarray(thresholds, dtype=np.float64)
    curve = (ious[None, :] >= thresholds[:, None]).mean(axis=1)
    curve[thresholds <= 0] = 1.0
    return curve, float(np.trapezoid(curve, thresholds))


def success_rate(results, threshold=SUCCESS_AT):
    """Fraction of frames tracked successfully (overlap strictly above threshold)."""
    return float((_values(results, "overlap") > threshold).mean())


def summarize(results, fps=float("nan"), lost_frame=None):
    errs = _values(results, "cle")
    prec = precision_curve(errs, [PRECISION_AT])[0]
    _, auc = success_curve(results)
    return {
        "frames": len(results),
        "mean_cle": float(errs.mean()),
        "success_rate": success_rate(results),
        "precision_20": float(prec),
        "auc": auc,
        "fps": fps,
        "lost_frame": lost_frame,
    }


def run_ope(config, frames, ground_truth):
    """Initialize on the first ground-truth box and track every later frame.

    Returns ``(results, summary)``. After a tracking loss the remaining
    frames are scored with the last known box.
    """
    frames = list(frames)
    if not frames:
        raise InvalidInputError("empty sequence")
    if len(ground_truth) < len(frames):
        raise InvalidInputError(
            f"ground truth has {len(ground_truth)} boxes for {len(frames)} frames")
    tracker = Tracker(config)
    lost_frame = None
    start = time.perf_counter()
    box = tracker.init(frames[0], ground_truth[0])
    boxes = [box]
    for frame in frames[1:]:
        if lost_frame is None:
            try:
                box = tracker.update(frame)
            except TrackingLostError:
                lost_frame = frame.index
        boxes.append(box)
    elapsed = max(time.perf_counter() - start, 1e-9)
    results = [FrameResult.score(f.index, b, g) for f, b, g in zip(frames, boxes, ground_truth)]
    return results, summarize(results, fps=len(frames) / elapsed, lost_frame=lost_frame)
