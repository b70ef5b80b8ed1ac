"""Seeded synthetic sequences: textured target over textured background.

Ground truth is exact by construction (integer boxes). Occlusions are an
opaque textured distractor that slides across the target while covering it
completely.
"""
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .dataset import Sequence, list_frames, write_sequence_files

TARGET_SIGMA = 2.0


@dataclass(frozen=True)
class SynthSpec:
    frames: int = 100
    frame_size: tuple = (240, 320)
    target_size: tuple = (40, 40)
    start: tuple = None
    velocity: tuple = (0.0, 0.0)
    scale_rate: float = 1.0
    occlusions: tuple = ()
    noise: float = 2.0
    seed: int = 0
    color: bool = True

    def __post_init__(self):
        if self.frames < 2:
            raise ValueError("a synthetic sequence needs at least 2 frames")
        th, tw = self.target_size
        fh, fw = self.frame_size
        if th <= 0 or tw <= 0:
            raise ValueError("target size must be positive")
        if th > fh or tw > fw:
            raise ValueError(f"target {self.target_size} larger than frame {self.frame_size}")
        for a, b in self.occlusions:
            if not 1 <= a <= b:
                raise ValueError(f"bad occlusion interval {a}:{b}")


@dataclass
class Rendered:
    frames: list
    boxes: np.ndarray
    visible: np.ndarray = field(default=None)
    attributes: frozenset = frozenset()


def _texture(rng, shape, sigma, mean, std):
    t = ndimage.gaussian_filter(rng.standard_normal(shape), sigma, mode="wrap")
    t = (t - t.mean()) / (t.std() + 1e-12)
    return mean + std * t


def _layer(rng, shape, sigma, mean, std, color):
    base = _texture(rng, shape, sigma, mean, std)
    if not color:
        return base
    tint = rng.uniform(0.6, 1.3, size=3)
    return base[..., None] * tint[None, None, :]


def _resize(tex, size):
    h, w = size
    zh = (tex.shape[0] - 1) / max(h - 1, 1)
    zw = (tex.shape[1] - 1) / max(w - 1, 1)
    rr, cc = np.meshgrid(np.arange(h) * zh, np.arange(w) * zw, indexing="ij")
    if tex.ndim == 2:
        return ndimage.map_coordinates(tex, [rr, cc], order=1, mode="nearest")
    return np.stack([ndimage.map_coordinates(tex[..., c], [rr, cc], order=1, mode="nearest")
                     for c in range(tex.shape[2])], axis=-1)


def _paste(canvas, patch, y0, x0):
    H, W = canvas.shape[:2]
    h, w = patch.shape[:2]
    ys, xs = max(0, y0), max(0, x0)
    ye, xe = min(H, y0 + h), min(W, x0 + w)
    if ys >= ye or xs >= xe:
        return
    canvas[ys:ye, xs:xe] = patch[ys - y0:ye - y0, xs - x0:xe - x0]


def render(spec: SynthSpec):
    rng = np.random.default_rng(spec.seed)
    fh, fw = spec.frame_size
    th0, tw0 = spec.target_size
    background = _layer(rng, (fh, fw), 4.0, 110.0, 30.0, spec.color)
    grow = max(1.0, spec.scale_rate ** (spec.frames - 1))
    tex_shape = (int(math.ceil(th0 * grow)) + 2, int(math.ceil(tw0 * grow)) + 2)
    target_tex = _layer(rng, tex_shape, TARGET_SIGMA * grow, 140.0, 60.0, spec.color)
    occ_tex = _layer(rng, (fh, fw), 3.0, 90.0, 50.0, spec.color)
    cx0, cy0 = spec.start if spec.start is not None else (fw / 2.0, fh / 2.0)
    vx, vy = spec.velocity

    frames, boxes, visible = [], [], []
    for k in range(1, spec.frames + 1):
        s = spec.scale_rate ** (k - 1)
        th, tw = max(1, int(round(th0 * s))), max(1, int(round(tw0 * s)))
        cx, cy = cx0 + (k - 1) * vx, cy0 + (k - 1) * vy
        x, y = int(round(cx - tw / 2.0)), int(round(cy - th / 2.0))
        canvas = background.copy()
        _paste(canvas, _resize(target_tex, (th, tw)), y, x)
        mask = np.zeros((fh, fw), dtype=bool)
        _paste(mask, np.ones((th, tw), dtype=bool), y, x)
        for a, b in spec.occlusions:
            if a <= k <= b:
                m = int(math.ceil(0.25 * max(th, tw)))
                frac = (k - a) / (b - a) if b > a else 0.5
                dx = -m + 2 * m * frac
                ox0 = int(math.floor(x + dx - m))
                oy0 = y - m
                ow = int(math.ceil(x + tw + dx + m)) - ox0
                oh = th + 2 * m
                _paste(canvas, occ_tex[:oh, :ow] if oh <= fh and ow <= fw else
                       _resize(occ_tex, (oh, ow)), oy0, ox0)
                _paste(mask, np.zeros((oh, ow), dtype=bool), oy0, ox0)
        noise = np.random.default_rng([spec.seed, k]).standard_normal(canvas.shape) * spec.noise
        frames.append(np.clip(np.rint(canvas + noise), 0, 255).astype(np.uint8))
        boxes.append([x, y, tw, th])
        visible.append(mask.sum() / float(th * tw))

    attrs = set()
    if spec.occlusions:
        attrs.add("full_occlusion")
    if spec.scale_rate != 1.0:
        attrs.add("scale_variation")
    return Rendered(frames, np.array(boxes, dtype=np.float64), np.array(visible), frozenset(attrs))


def synth_sequence(spec: SynthSpec, out_dir, name="synth"):
    """Render ``spec`` and write it as ``out_dir/name``; returns the Sequence."""
    r = render(spec)
    path = Path(out_dir) / name
    write_sequence_files(path, r.frames, r.boxes, r.attributes,
                         ext=".ppm" if spec.color else ".pgm")
    return Sequence(name, list_frames(path / "img"), r.boxes, r.attributes)
