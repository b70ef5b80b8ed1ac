"""Capacity-bounded training set with time-slot bookkeeping."""
from dataclasses import dataclass, replace

import numpy as np

from .spectral import dft2

SUM_TOL = 1e-9


@dataclass
class ScoredSample:
    features: np.ndarray
    spectrum: np.ndarray
    score: float = 0.0
    dpmr: float = 0.0
    frame_index: int = 0
    is_key: bool = False

    @classmethod
    def from_features(cls, features, dpmr=0.0, frame_index=0, score=0.0, is_key=False):
        features = np.asarray(features, dtype=np.float64)
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite values")
        return cls(features, dft2(features), score, float(dpmr), int(frame_index), is_key)


class TrainingSet:
    """Ordered (oldest first) sample store of at most ``capacity`` samples.

    Scores always sum to 1 after a public operation. ``slot_index`` counts
    established time slots and ``keyframe_index`` is the frame that opened
    the current one.
    """

    def __init__(self, capacity=50):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.samples = []
        self.slot_index = 0
        self.keyframe_index = 0
        self.discarded = 0

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def scores(self):
        return np.array([s.score for s in self.samples], dtype=np.float64)

    def set_scores(self, alphas):
        alphas = np.asarray(alphas, dtype=np.float64)
        if alphas.shape != (len(self.samples),):
            raise ValueError(f"{alphas.size} scores for {len(self.samples)} samples")
        if np.any(alphas < 0) or abs(alphas.sum() - 1.0) > SUM_TOL:
            raise ValueError("scores must be nonnegative and sum to 1")
        for s, a in zip(self.samples, alphas):
            s.score = float(a)

    def spectra(self):
        return np.stack([s.spectrum for s in self.samples])

    def dpmrs(self):
        return np.array([s.dpmr for s in self.samples], dtype=np.float64)

    def push(self, sample, policy="score"):
        """Append ``sample``; at capacity first drop one sample.

        ``policy="score"`` drops the lowest score (oldest among ties);
        ``policy="oldest"`` drops the first sample. Returns the dropped
        sample or None. The new sample gets ``1/len`` and the others are
        rescaled to fill the remaining mass.
        """
        if self.samples and sample.features.shape != self.samples[0].features.shape:
            raise ValueError(
                f"sample shape {sample.features.shape} != {self.samples[0].features.shape}"
            )
        dropped = None
        if len(self.samples) >= self.capacity:
            if policy == "score":
                idx = int(np.argmin(self.scores))
            elif policy == "oldest":
                idx = 0
            else:
                raise ValueError(f"unknown discard policy {policy!r}")
            dropped = self.samples.pop(idx)
            self.discarded += 1
        n = len(self.samples) + 1
        rest = self.scores
        total = rest.sum()
        if n > 1:
            share = 1.0 - 1.0 / n
            rest = rest * (share / total) if total > 0 else np.full(n - 1, share / (n - 1))
            for s, a in zip(self.samples, rest):
                s.score = float(a)
        sample.score = 1.0 / n
        self.samples.append(sample)
        return dropped

    def fuse_key_sample(self, frame_index=None, dpmr=None):
        """Score-weighted sum of all samples as a new key sample."""
        if not self.samples:
            raise ValueError("cannot fuse an empty training set")
        acc = np.zeros_like(self.samples[0].features)
        for s in self.samples:
            acc += s.score * s.features
        last = self.samples[-1]
        return ScoredSample.from_features(
            acc,
            dpmr=last.dpmr if dpmr is None else dpmr,
            frame_index=self.keyframe_index if frame_index is None else frame_index,
            score=1.0,
            is_key=True,
        )

    def establish_slot(self, keyframe_index, dpmr):
        """Close the current slot: collapse the set into one key sample."""
        key = self.fuse_key_sample(frame_index=keyframe_index, dpmr=dpmr)
        self.samples = [key]
        self.slot_index += 1
        self.keyframe_index = int(keyframe_index)
        return key

    def snapshot(self):
        return {
            "slot": self.slot_index,
            "keyframe": self.keyframe_index,
            "set_size": len(self.samples),
            "scores": [float(s.score) for s in self.samples],
            "frames": [s.frame_index for s in self.samples],
        }

    def copy(self):
        other = TrainingSet(self.capacity)
        other.samples = [replace(s) for s in self.samples]
        other.slot_index = self.slot_index
        other.keyframe_index = self.keyframe_index
        other.discarded = self.discarded
        return other
