"""Sequence directories: ``<name>/img/0001.ppm ...``, ``groundtruth.txt``, ``attributes.txt``."""
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imageio import read_image

IMAGE_EXTS = {".ppm", ".pgm", ".pnm", ".jpg", ".jpeg", ".png", ".bmp"}


class DatasetError(ValueError):
    pass


@dataclass
class Sequence:
    name: str
    frames: list
    groundtruth: np.ndarray
    attributes: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if len(self.frames) < 1:
            raise DatasetError(f"{self.name}: sequence has no frames")
        if len(self.frames) != len(self.groundtruth):
            raise DatasetError(
                f"{self.name}: {len(self.frames)} frames but {len(self.groundtruth)} groundtruth lines"
            )

    def __len__(self):
        return len(self.frames)

    def frame(self, i):
        return read_image(self.frames[i])

    def present(self):
        """Mask of frames whose target is annotated (not the NaN absent marker)."""
        return ~np.any(np.isnan(self.groundtruth), axis=1)


def parse_groundtruth(text, origin="groundtruth"):
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = [p for p in re.split(r"[,\s]+", line) if p]
        if len(parts) != 4:
            raise DatasetError(f"{origin}:{lineno}: expected 4 values, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise DatasetError(f"{origin}:{lineno}: non-numeric value in {line!r}") from None
    return np.array(rows, dtype=np.float64).reshape(-1, 4)


def _fmt(v):
    if math.isnan(v):
        return "NaN"
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def format_boxes(boxes):
    """One ``x,y,w,h`` line per box (top-left convention)."""
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in np.asarray(boxes, dtype=float))


def list_frames(img_dir):
    files = [p for p in Path(img_dir).iterdir() if p.suffix.lower() in IMAGE_EXTS]

    def key(p):
        m = re.search(r"(\d+)$", p.stem)
        return (int(m.group(1)) if m else -1, p.name)

    return sorted(files, key=key)


def load_sequence(path):
    path = Path(path)
    if not path.is_dir():
        raise DatasetError(f"{path}: not a directory")
    gt_path = path / "groundtruth.txt"
    if not gt_path.is_file():
        raise DatasetError(f"{path}: missing groundtruth.txt")
    img_dir = path / "img"
    if not img_dir.is_dir():
        raise DatasetError(f"{path}: missing img/ directory")
    frames = list_frames(img_dir)
    gt = parse_groundtruth(gt_path.read_text(), str(gt_path))
    attrs = frozenset()
    attr_path = path / "attributes.txt"
    if attr_path.is_file():
        attrs = frozenset(line.strip() for line in attr_path.read_text().splitlines() if line.strip())
    return Sequence(path.name, frames, gt, attrs)


def list_sequences(dataset_dir):
    """Sequence subdirectories of a dataset (those holding a groundtruth file), by name."""
    root = Path(dataset_dir)
    if not root.is_dir():
        raise DatasetError(f"{root}: not a directory")
    return sorted(p for p in root.iterdir() if p.is_dir() and (p / "groundtruth.txt").exists())


def filter_by_attribute(sequences, tag):
    return [s for s in sequences if tag in s.attributes]


def write_sequence_files(path, frames, boxes, attributes=(), ext=".ppm"):
    """Materialize frames and groundtruth in the standard layout."""
    from .imageio import write_pnm

    path = Path(path)
    img_dir = path / "img"
    img_dir.mkdir(parents=True, exist_ok=True)
    digits = max(4, len(str(len(frames))))
    names = []
    for i, img in enumerate(frames, 1):
        name = img_dir / f"{i:0{digits}d}{ext}"
        if ext in (".ppm", ".pgm"):
            write_pnm(name, img)
        else:
            from PIL import Image

            Image.fromarray(img).save(name)
        names.append(name)
    (path / "groundtruth.txt").write_text(format_boxes(boxes))
    if attributes:
        (path / "attributes.txt").write_text("".join(f"{a}\n" for a in sorted(attributes)))
    return names
