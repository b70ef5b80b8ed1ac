"""Frequency-domain primitives shared by the solver, scorer and tracker.

Maps are numpy arrays laid out ``(height, width)`` for a single channel or
``(height, width, channels)`` for multi-channel data. Transforms always run
over the first two axes. The forward DFT is unnormalized and the inverse
carries the ``1/(H*W)`` factor, so for a real map ``x``::

    sum(|dft2(x)|**2) == H * W * sum(x**2)
"""
import numpy as np

__all__ = [
    "dft2",
    "idft2",
    "crop_pad",
    "crop",
    "support_slices",
    "support_mask",
    "gaussian_label",
    "hann_window",
    "correlate",
    "peak_shift",
]


def _check_dims(x):
    if x.ndim not in (2, 3) or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"expected a (H, W) or (H, W, D) map, got shape {x.shape}")


def dft2(x):
    """Unnormalized forward 2-D DFT over the spatial axes."""
    x = np.asarray(x)
    _check_dims(x)
    return np.fft.fft2(x, axes=(0, 1))


def idft2(xf):
    """Inverse of :func:`dft2`; returns the real part."""
    xf = np.asarray(xf)
    _check_dims(xf)
    return np.real(np.fft.ifft2(xf, axes=(0, 1)))


def support_slices(shape, support):
    """Slices selecting the centered ``support`` window inside ``shape``.

    The leading margin on each axis is ``floor((N - M) / 2)``.
    """
    out = []
    for n, m in zip(shape[:2], support[:2]):
        if m > n:
            raise ValueError(f"support {tuple(support[:2])} exceeds map {tuple(shape[:2])}")
        if m < 1:
            raise ValueError("support must be at least 1x1")
        lead = (n - m) // 2
        out.append(slice(lead, lead + m))
    return tuple(out)


def support_mask(shape, support):
    mask = np.zeros(shape[:2], dtype=bool)
    mask[support_slices(shape, support)] = True
    return mask


def crop_pad(w, target):
    """Embed ``w`` centered in a zero map of spatial size ``target``."""
    w = np.asarray(w)
    _check_dims(w)
    out = np.zeros(tuple(target[:2]) + w.shape[2:], dtype=w.dtype)
    out[support_slices(target, w.shape)] = w
    return out


def crop(h, support):
    """Adjoint of :func:`crop_pad`: extract the centered ``support`` window."""
    h = np.asarray(h)
    return h[support_slices(h.shape, support)].copy()


def gaussian_label(height, width, sigma):
    """Gaussian ideal response with its peak (value 1) at the origin, wrapped."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    rows = np.arange(height)
    cols = np.arange(width)
    dr = np.minimum(rows, height - rows).astype(float)
    dc = np.minimum(cols, width - cols).astype(float)
    return np.exp(-0.5 * (dr[:, None] ** 2 + dc[None, :] ** 2) / sigma**2)


def _hann1d(n):
    if n == 1:
        return np.ones(1)
    k = np.arange(n)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * k / (n - 1))


def hann_window(height, width):
    """Separable raised-cosine window; zero on the border rows and columns.

    The maximum is exactly 1 when both sizes are odd (or 1), and slightly
    below 1 for even sizes.
    """
    if height < 1 or width < 1:
        raise ValueError("window dimensions must be >= 1")
    return np.outer(_hann1d(height), _hann1d(width))


def correlate(filter_spec, sample_spec):
    """Cyclic correlation response ``idft2(sum_d conj(h_d) * z_d)``.

    For spatial maps this is ``r[j] = sum_n h[n] * z[n + j]`` (indices
    modulo the map size), so a sample shifted by ``s`` peaks at ``s``.
    """
    filter_spec = np.asarray(filter_spec)
    sample_spec = np.asarray(sample_spec)
    if filter_spec.shape != sample_spec.shape:
        raise ValueError(
            f"filter {filter_spec.shape} and sample {sample_spec.shape} do not match"
        )
    prod = np.conj(filter_spec) * sample_spec
    if prod.ndim == 3:
        prod = prod.sum(axis=2)
    return idft2(prod)


def peak_shift(response):
    """Return ``(row, col, dy, dx, value)`` of the response maximum.

    ``dy``/``dx`` are the signed cyclic shifts in ``(-N/2, N/2]``.
    """
    h, w = response.shape
    row, col = np.unravel_index(int(np.argmax(response)), response.shape)
    dy = row - h if row > h // 2 else row
    dx = col - w if col > w // 2 else col
    return int(row), int(col), int(dy), int(dx), float(response[row, col])
