from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in center convention (pixels, continuous coordinates).

    Pixel ``(r, c)`` covers ``[c, c+1) x [r, r+1)``, so a box with top-left
    ``(x, y)`` and size ``(w, h)`` has center ``(x + w/2, y + h/2)``.
    """

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box must have positive size, got w={self.w} h={self.h}")

    @classmethod
    def from_xywh(cls, x, y, w, h):
        return cls(x + w / 2.0, y + h / 2.0, float(w), float(h))

    def to_xywh(self):
        return (self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.w, self.h)

    @property
    def center(self):
        return np.array([self.cx, self.cy])
