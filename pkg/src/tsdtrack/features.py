"""Patch sampling and cell-level feature extraction (grayscale or color names)."""
import os
from functools import lru_cache

import numpy as np

from .box import BoundingBox
from .spectral import hann_window

CN_ROWS = 32768
CN_COLS = 10
LUMA = np.array([0.299, 0.587, 0.114])


class FeatureError(ValueError):
    pass


def sample_window(img, center, size, out_size):
    """Bilinearly resample the region ``size=(h, w)`` centered at ``center=(cy, cx)``.

    Coordinates outside the image replicate the nearest edge pixel. The
    result has shape ``out_size`` (plus the channel axis, if any) and dtype
    float64.
    """
    img = np.asarray(img)
    cy, cx = center
    ph, pw = size
    oh, ow = int(out_size[0]), int(out_size[1])
    H, W = img.shape[:2]
    # output pixel centers mapped back to source pixel-index space
    ys = cy - ph / 2.0 + (np.arange(oh) + 0.5) * (ph / oh) - 0.5
    xs = cx - pw / 2.0 + (np.arange(ow) + 0.5) * (pw / ow) - 0.5
    ys = np.clip(ys, 0, H - 1)
    xs = np.clip(xs, 0, W - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, H - 1)
    x1 = np.minimum(x0 + 1, W - 1)
    fy = ys - y0
    fx = xs - x0
    src = img.astype(np.float64)
    if src.ndim == 3:
        fy = fy[:, None, None]
        fx = fx[None, :, None]
    else:
        fy = fy[:, None]
        fx = fx[None, :]
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    return top * (1 - fy) + bot * fy


def extract_patch(img, box: BoundingBox, padded_scale=1.0, out_size=None):
    """Patch of ``padded_scale`` times the box size around the box center.

    With ``out_size=None`` the patch keeps its natural pixel size.
    """
    if not (box.w > 0 and box.h > 0):
        raise FeatureError("degenerate box")
    size = (box.h * padded_scale, box.w * padded_scale)
    if out_size is None:
        out_size = (max(1, int(round(size[0]))), max(1, int(round(size[1]))))
    return sample_window(img, (box.cy, box.cx), size, out_size)


def load_cn_table(path):
    """Load the 32768x10 color-names table (little-endian float64, row-major)."""
    return _load_cn_table(os.fspath(path))


@lru_cache(maxsize=4)
def _load_cn_table(path):
    raw = np.fromfile(path, dtype="<f8")
    if raw.size != CN_ROWS * CN_COLS:
        raise FeatureError(
            f"color-names table {path} has {raw.size} values, expected {CN_ROWS * CN_COLS}"
        )
    table = raw.reshape(CN_ROWS, CN_COLS)
    if not np.all(np.isfinite(table)):
        raise FeatureError(f"color-names table {path} contains non-finite values")
    table.setflags(write=False)
    return table


def cn_index(rgb):
    """Quantized table row for 8-bit RGB values: r/8*1024 + g/8*32 + b/8."""
    rgb = np.asarray(rgb).astype(np.int64)
    return (rgb[..., 0] // 8) * 1024 + (rgb[..., 1] // 8) * 32 + rgb[..., 2] // 8


def cell_average(x, cell_size):
    h, w = x.shape[:2]
    if h % cell_size or w % cell_size:
        raise FeatureError(f"patch {h}x{w} not divisible by cell size {cell_size}")
    shape = (h // cell_size, cell_size, w // cell_size, cell_size) + x.shape[2:]
    return x.reshape(shape).mean(axis=(1, 3))


def extract_features(patch, kind="gray", cell_size=4, cn_table=None, window=True):
    """Cell-level feature map of shape ``(H/cell, W/cell, D)``.

    ``gray`` gives one channel (cell mean intensity mapped to [-0.5, 0.5]);
    ``cn`` gives ten channels (cell mean of the color-name lookups) and needs
    an RGB patch plus the table. A Hann window is applied per channel.
    """
    patch = np.asarray(patch, dtype=np.float64)
    if kind == "gray":
        if patch.ndim == 3:
            patch = patch @ LUMA
        feat = cell_average(patch / 255.0 - 0.5, cell_size)[:, :, None]
    elif kind == "cn":
        if cn_table is None:
            raise FeatureError("cn features need a color-names table")
        if patch.ndim != 3 or patch.shape[2] != 3:
            raise FeatureError("cn features need an RGB patch")
        rgb = np.clip(np.rint(patch), 0, 255)
        feat = cell_average(cn_table[cn_index(rgb)], cell_size)
    else:
        raise FeatureError(f"unknown feature kind {kind!r}")
    if window:
        feat = feat * hann_window(feat.shape[0], feat.shape[1])[:, :, None]
    return feat
