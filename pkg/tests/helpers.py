import numpy as np

from tsdtrack import BoundingBox, Tracker


def track_rendered(rendered, cfg):
    """Run a tracker over in-memory frames; returns (boxes, reports, center errors)."""
    t = Tracker(cfg)
    t.init(rendered.frames[0], BoundingBox.from_xywh(*rendered.boxes[0]))
    boxes, reports = [rendered.boxes[0]], []
    for frame in rendered.frames[1:]:
        box, rep = t.track_frame(frame)
        boxes.append(box.to_xywh())
        reports.append(rep)
    boxes = np.array(boxes, dtype=float)
    gt = rendered.boxes
    d = (boxes[:, :2] + boxes[:, 2:] / 2) - (gt[:, :2] + gt[:, 2:] / 2)
    return boxes, reports, np.hypot(d[:, 0], d[:, 1])


def final_error(cle, n=10):
    return float(np.mean(cle[-n:]))
