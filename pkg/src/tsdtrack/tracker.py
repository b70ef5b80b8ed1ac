"""Per-frame tracking loop with time-slot training-set distillation.

``mode="tsd"`` keeps a scored training set (discard, fusion, response-map
regularization can be toggled independently); ``mode="baseline"`` keeps a
single linearly interpolated model sample, as BACF does.
"""
from dataclasses import dataclass, field

import numpy as np

from .box import BoundingBox
from .config import TrackerConfig
from .features import FeatureError, extract_features, load_cn_table, sample_window
from .scoring import compute_dpmr, is_keyframe, residual_energy, solve_alpha, temporal_weights
from .solver import FilterState, train_filter
from .spectral import correlate, dft2, gaussian_label, peak_shift
from .training_set import ScoredSample, TrainingSet

MIN_SCALE = 0.2
MAX_SCALE = 5.0

__all__ = ["ResponseMap", "FrameReport", "Tracker", "TrackerConfig", "estimate_scale"]


@dataclass
class ResponseMap:
    values: np.ndarray
    peak_row: int
    peak_col: int
    peak_value: float
    dy: int
    dx: int
    dpmr: float = 0.0

    @classmethod
    def from_values(cls, values, dpmr_params=None):
        row, col, dy, dx, val = peak_shift(values)
        dpmr = compute_dpmr(values, dpmr_params) if dpmr_params is not None else 0.0
        return cls(values, row, col, val, dy, dx, dpmr)


@dataclass
class FrameReport:
    frame: int
    box: tuple
    dpmr: float
    keyframe: bool
    set_size: int
    slot: int
    scores: list = field(default_factory=list)
    sample_frames: list = field(default_factory=list)
    scale_index: int = 0
    peak_value: float = 0.0
    discarded: int = 0

    def to_dict(self):
        return {
            "frame": self.frame,
            "box": [float(v) for v in self.box],
            "dpmr": float(self.dpmr),
            "keyframe": bool(self.keyframe),
            "set_size": self.set_size,
            "slot": self.slot,
            "scores": [float(a) for a in self.scores],
            "sample_frames": list(self.sample_frames),
            "scale_index": self.scale_index,
            "peak_value": float(self.peak_value),
            "discarded": self.discarded,
        }


def estimate_scale(peaks, penalty=1.0):
    """Index of the best scale-normalized peak; ties go to the unity (middle) scale.

    Each peak is weighted by ``penalty ** |k|`` where ``k`` is its offset
    from the middle scale.
    """
    peaks = np.asarray(peaks, dtype=np.float64)
    mid = len(peaks) // 2
    offsets = np.abs(np.arange(len(peaks)) - mid)
    normed = peaks * penalty**offsets
    best = normed.max()
    if normed[mid] == best:
        return mid
    return int(np.argmax(normed))


class Tracker:
    def __init__(self, cfg=None):
        self.cfg = cfg or TrackerConfig()
        self._cn_table = None
        if self.cfg.feature == "cn":
            path = self.cfg.cn_table_path()
            if not path:
                raise FeatureError("cn features need a table: set cn_table or TSD_CN_TABLE")
            self._cn_table = load_cn_table(path)
        k = np.arange(self.cfg.scale_count) - self.cfg.scale_count // 2
        self.scale_factors = self.cfg.scale_step ** k.astype(float)
        self.frame_index = 0

    # geometry -------------------------------------------------------------

    @property
    def model_px(self):
        return self.cfg.model_cells * self.cfg.cell_size

    def _features(self, frame, center, scale):
        side = self.base_side * scale
        patch = sample_window(frame, center, (side, side), (self.model_px, self.model_px))
        return extract_features(patch, self.cfg.feature, self.cfg.cell_size, self._cn_table)

    @property
    def box(self):
        return BoundingBox(self.center[1], self.center[0],
                           self.base_size[1] * self.scale, self.base_size[0] * self.scale)

    # lifecycle -----------------------------------------------------------

    def init(self, frame, box: BoundingBox):
        cfg = self.cfg
        frame = np.asarray(frame)
        H, W = frame.shape[:2]
        if not (box.w > 0 and box.h > 0):
            raise ValueError("zero-area box")
        self.center = np.array([min(max(box.cy, 0.0), H), min(max(box.cx, 0.0), W)])
        self.base_size = np.array([box.h, box.w], dtype=float)
        self.base_side = cfg.padded_scale * np.sqrt(box.w * box.h)
        self.scale = 1.0
        px_per_cell = self.base_side / cfg.model_cells
        self.support = tuple(
            int(min(cfg.model_cells, max(1, np.floor(s / px_per_cell)))) for s in self.base_size
        )
        sigma = np.sqrt(self.support[0] * self.support[1]) * cfg.label_sigma_factor
        mc = cfg.model_cells
        self.y = gaussian_label(mc, mc, sigma)
        self.y_spec = dft2(self.y)

        self.frame_index = 1
        feat = self._features(frame, self.center, self.scale)
        first = ScoredSample.from_features(feat, dpmr=cfg.tr, frame_index=1)
        self.set = TrainingSet(cfg.F_max)
        self.set.push(first)
        self.set.establish_slot(1, cfg.tr)
        self.model = feat
        self.filter = train_filter(self.set.spectra(), self.set.scores, self.y_spec,
                                   self.support, cfg.admm())
        return self

    def detect(self, frame):
        """Correlate the current filter at every search scale without updating.

        Returns ``(scale_index, responses)``.
        """
        responses = []
        for s in self.scale_factors:
            z = dft2(self._features(frame, self.center, self.scale * s))
            responses.append(ResponseMap.from_values(correlate(self.filter.h_spec, z)))
        best = estimate_scale([r.peak_value for r in responses], self.cfg.scale_penalty)
        return best, responses

    def track_frame(self, frame):
        cfg = self.cfg
        frame = np.asarray(frame)
        self.frame_index += 1
        k = self.frame_index

        idx, responses = self.detect(frame)
        resp = responses[idx]
        step = self.scale_factors[idx]
        px_per_cell = self.base_side * self.scale * step / cfg.model_cells
        H, W = frame.shape[:2]
        self.center = self.center + np.array([resp.dy, resp.dx]) * px_per_cell
        self.center = np.clip(self.center, [0.0, 0.0], [H, W])
        self.scale = float(np.clip(self.scale * step, MIN_SCALE, MAX_SCALE))
        resp.dpmr = compute_dpmr(resp.values, cfg.dpmr_params())
        keyframe = is_keyframe(resp.dpmr, cfg.tr)

        feat = self._features(frame, self.center, self.scale)
        if cfg.mode == "baseline":
            self.model = (1.0 - cfg.learning_rate) * self.model + cfg.learning_rate * feat
            self.filter = train_filter(dft2(self.model)[None], [1.0], self.y_spec,
                                       self.support, cfg.admm(), self.filter)
            scores, frames = [1.0], [k]
        else:
            sample = ScoredSample.from_features(feat, dpmr=resp.dpmr, frame_index=k)
            self.set.push(sample, "score" if cfg.discard else "oldest")
            self._refresh()
            scores = self.set.scores.tolist()
            frames = [s.frame_index for s in self.set]
            if keyframe and cfg.fusion:
                self.set.establish_slot(k, resp.dpmr)

        report = FrameReport(
            frame=k,
            box=self.box.to_xywh(),
            dpmr=resp.dpmr,
            keyframe=keyframe,
            set_size=len(self.set) if cfg.mode == "tsd" else 1,
            slot=self.set.slot_index,
            scores=scores,
            sample_frames=frames,
            scale_index=idx,
            peak_value=resp.peak_value,
            discarded=self.set.discarded,
        )
        self.last_response = resp
        return self.box, report

    def _refresh(self):
        """Score the set with the previous filter, then retrain with the new scores."""
        cfg = self.cfg
        for _ in range(cfg.alternations):
            spectra = self.set.spectra()
            betas = residual_energy(self.filter.g_spec, spectra, self.y_spec)
            t = temporal_weights(len(self.set), cfg.f0, cfg.q)
            dpmrs = self.set.dpmrs() if cfg.response_reg else None
            alphas = solve_alpha(betas, t, dpmrs, cfg.gamma, cfg.nu, cfg.dpmr_epsilon)
            self.set.set_scores(alphas)
            self.filter = train_filter(spectra, alphas, self.y_spec, self.support,
                                       cfg.admm(), self.filter)
