"""Correlation-filter tracking with time slot-based training-set distillation."""
from .box import BoundingBox
from .config import TrackerConfig
from .tracker import FrameReport, Tracker

__version__ = "0.1.0"

__all__ = ["BoundingBox", "TrackerConfig", "Tracker", "FrameReport", "__version__"]
