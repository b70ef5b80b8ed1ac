"""Frame decoding: binary PGM/PPM natively, anything else through Pillow."""
import os

import numpy as np


class ImageError(ValueError):
    pass


def _read_token(buf, pos):
    n = len(buf)
    while pos < n:
        ch = buf[pos:pos + 1]
        if ch == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageError("truncated PNM header")
    return buf[start:pos], pos


def read_pnm(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_token(buf, 0)
    if magic not in (b"P5", b"P6"):
        raise ImageError(f"{path}: not a binary PGM/PPM file")
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        fields.append(int(tok))
    width, height, maxval = fields
    if not 0 < maxval < 256:
        raise ImageError(f"{path}: only 8-bit PNM is supported (maxval={maxval})")
    pos += 1  # single whitespace byte before the raster
    channels = 3 if magic == b"P6" else 1
    count = width * height * channels
    if len(buf) - pos < count:
        raise ImageError(f"{path}: truncated raster")
    data = np.frombuffer(buf, dtype=np.uint8, count=count, offset=pos)
    img = data.reshape(height, width, channels) if channels == 3 else data.reshape(height, width)
    return img.copy()


def write_pnm(path, img):
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ImageError("write_pnm expects uint8 data")
    if img.ndim == 2:
        magic = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
    else:
        raise ImageError(f"unsupported image shape {img.shape}")
    header = magic + b"\n%d %d\n255\n" % (img.shape[1], img.shape[0])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(img).tobytes())


def _read_pillow(path):
    from PIL import Image

    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB")
        return np.asarray(im, dtype=np.uint8).copy()


DECODERS = {".pgm": read_pnm, ".ppm": read_pnm, ".pnm": read_pnm}


def read_image(path):
    """Decode a frame to ``uint8`` of shape ``(H, W)`` or ``(H, W, 3)``."""
    ext = os.path.splitext(os.fspath(path))[1].lower()
    decoder = DECODERS.get(ext, _read_pillow)
    try:
        return decoder(path)
    except ImageError:
        raise
    except Exception as exc:
        raise ImageError(f"cannot decode {path}: {exc}") from exc
