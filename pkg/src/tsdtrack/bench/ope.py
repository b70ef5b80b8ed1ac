"""One-pass evaluation: initialize on frame 1 ground truth, track to the end, score.

Sequences run independently (optionally in worker processes). A failing
sequence is recorded as an error and does not stop the others; results are
merged in sequence-name order so output never depends on completion order.
"""
import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..box import BoundingBox
from ..tracker import Tracker
from .dataset import Sequence, format_boxes, load_sequence
from .metrics import PRECISION_THRESHOLDS, SUCCESS_THRESHOLDS, evaluate, mean_result


def default_tracker(cfg, sequence):
    return Tracker(cfg)


@dataclass
class SequenceResult:
    name: str
    attributes: tuple = ()
    boxes: np.ndarray = None
    reports: list = field(default_factory=list)
    fps: float = 0.0
    result: object = None
    error: str = None

    @property
    def ok(self):
        return self.error is None


def track_sequence(sequence, cfg, tracker_factory=None, on_report=None):
    """Run one tracker over ``sequence``; returns ``(boxes, reports, seconds)``.

    ``boxes`` holds one ``x,y,w,h`` row per frame, frame 1 being the ground truth.
    """
    factory = tracker_factory or default_tracker
    gt0 = sequence.groundtruth[0]
    if np.any(np.isnan(gt0)):
        raise ValueError(f"{sequence.name}: first frame has no groundtruth to initialize from")
    tracker = factory(cfg, sequence)
    first = sequence.frame(0)
    t0 = time.perf_counter()
    tracker.init(first, BoundingBox.from_xywh(*gt0))
    elapsed = time.perf_counter() - t0
    boxes = [np.asarray(gt0, dtype=np.float64)]
    reports = []
    for i in range(1, len(sequence)):
        frame = sequence.frame(i)
        t0 = time.perf_counter()
        box, report = tracker.track_frame(frame)
        elapsed += time.perf_counter() - t0
        boxes.append(np.asarray(box.to_xywh(), dtype=np.float64))
        rep = report.to_dict() if hasattr(report, "to_dict") else dict(report or {})
        reports.append(rep)
        if on_report is not None:
            on_report(sequence.name, rep)
    return np.array(boxes), reports, elapsed


def _run_one(job):
    source, cfg, factory = job
    name = source.name if isinstance(source, Sequence) else Path(source).name
    try:
        seq = source if isinstance(source, Sequence) else load_sequence(source)
        boxes, reports, elapsed = track_sequence(seq, cfg, factory)
        res = evaluate(boxes, seq.groundtruth)
        fps = len(seq) / elapsed if elapsed > 0 else 0.0
        return SequenceResult(seq.name, tuple(sorted(seq.attributes)), boxes, reports, fps, res)
    except Exception as exc:  # isolate per-sequence failures
        return SequenceResult(name, error=f"{type(exc).__name__}: {exc}")


@dataclass
class OpeResult:
    sequences: list
    aggregate: object = None
    attributes: dict = field(default_factory=dict)

    @property
    def errors(self):
        return [s for s in self.sequences if not s.ok]

    @property
    def succeeded(self):
        return [s for s in self.sequences if s.ok]

    def summary(self, with_fps=True):
        per_seq = []
        for s in self.succeeded:
            row = {"name": s.name, "attributes": list(s.attributes), **s.result.summary()}
            if with_fps:
                row["fps"] = s.fps
            per_seq.append(row)
        out = {
            "sequences": per_seq,
            "errors": [{"name": s.name, "error": s.error} for s in self.errors],
            "aggregate": None,
            "attributes": {},
        }
        if self.aggregate is not None:
            agg = {"precision@20": self.aggregate.precision_at_20, "auc": self.aggregate.auc,
                   "sequences": len(self.succeeded)}
            if with_fps:
                agg["fps"] = float(np.mean([s.fps for s in self.succeeded]))
            out["aggregate"] = agg
        for tag, res in sorted(self.attributes.items()):
            n = sum(tag in s.attributes for s in self.succeeded)
            out["attributes"][tag] = {"precision@20": res.precision_at_20, "auc": res.auc,
                                      "sequences": n}
        return out


def run_ope(cfg, sequences, jobs=1, tracker_factory=None):
    """Evaluate ``cfg`` over sequences (``Sequence`` objects or directories).

    ``tracker_factory(cfg, sequence)`` builds the tracker; it must be picklable
    when ``jobs > 1``.
    """
    work = [(s, cfg, tracker_factory) for s in sequences]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    results.sort(key=lambda r: r.name)
    ok = [r for r in results if r.ok]
    aggregate = mean_result(r.result for r in ok) if ok else None
    tags = sorted({t for r in ok for t in r.attributes})
    by_tag = {t: mean_result(r.result for r in ok if t in r.attributes) for t in tags}
    return OpeResult(results, aggregate, by_tag)


def write_curves(path, result):
    prec = result.precision if result is not None else np.zeros(len(PRECISION_THRESHOLDS))
    succ = result.success if result is not None else np.zeros(len(SUCCESS_THRESHOLDS))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["threshold", "precision", "iou_threshold", "success"])
        for i, thr in enumerate(PRECISION_THRESHOLDS):
            row = [f"{thr:g}", repr(float(prec[i])), "", ""]
            if i < len(SUCCESS_THRESHOLDS):
                row[2:] = [f"{SUCCESS_THRESHOLDS[i]:.2f}", repr(float(succ[i]))]
            w.writerow(row)


def write_results(out_dir, ope):
    """Box files per sequence, ``summary.json`` and ``curves.csv`` (aggregate curves)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for s in ope.succeeded:
        (out / f"{s.name}.txt").write_text(format_boxes(s.boxes))
    (out / "summary.json").write_text(json.dumps(ope.summary(), indent=2, sort_keys=True) + "\n")
    write_curves(out / "curves.csv", ope.aggregate)
    return out
