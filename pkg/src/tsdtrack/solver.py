"""ADMM solver for the score-weighted, support-constrained correlation filter.

The filter ``h`` lives on an N-cell map but is nonzero only on a centered
M-cell support. Training minimizes::

    sum_f alpha_f * ||y - corr(h, x_f)||^2 + lam/2 * ||h||^2

by splitting ``h`` into an unconstrained copy ``g`` (fitted per frequency
bin) and the support-projected ``h``, tied by the multiplier ``zeta``.
All spectra follow :mod:`tsdtrack.spectral` conventions; the response of a
filter spectrum ``hf`` on a sample ``xf`` is ``sum_d conj(hf_d) * xf_d``.
"""
from dataclasses import dataclass, field

import numpy as np

from .spectral import crop, dft2, idft2, support_mask


@dataclass(frozen=True)
class AdmmConfig:
    lam: float = 0.01
    mu0: float = 1.0
    mu_scale: float = 2.0
    mu_max: float = 1000.0
    iters: int = 2
    alternations: int = 1

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if not self.mu0 > 0:
            raise ValueError("mu0 must be > 0")
        if self.mu_scale < 1:
            raise ValueError("mu_scale must be >= 1")
        if self.mu_max < self.mu0:
            raise ValueError("mu_max must be >= mu0")
        if self.iters < 1 or self.alternations < 1:
            raise ValueError("iters and alternations must be >= 1")


@dataclass
class FilterState:
    h_spec: np.ndarray
    g_spec: np.ndarray
    zeta_spec: np.ndarray
    support: tuple
    mu: float = 1.0
    iterations: int = field(default=0)

    @classmethod
    def zeros(cls, shape, support, mu=1.0):
        """Null-matrix initialization for maps of ``shape=(H, W, D)``."""
        z = np.zeros(shape, dtype=np.complex128)
        return cls(z, z.copy(), z.copy(), tuple(support[:2]), mu)

    @property
    def w(self):
        """The learned filter on its support, shape ``(Mh, Mw, D)``."""
        return crop(idft2(self.h_spec), self.support)

    def copy(self):
        return FilterState(
            self.h_spec.copy(), self.g_spec.copy(), self.zeta_spec.copy(),
            self.support, self.mu, self.iterations,
        )


def project_support(spec, support):
    """Zero the spatial map outside the centered support and transform back."""
    h = idft2(spec)
    mask = support_mask(h.shape, support)
    if h.ndim == 3:
        mask = mask[..., None]
    return dft2(h * mask)


def solve_h(g_spec, zeta_spec, mu, lam, support):
    denom = lam + mu
    if denom == 0:
        raise ZeroDivisionError("lam + mu must be nonzero")
    return project_support((2.0 * zeta_spec + mu * g_spec) / denom, support)


def _as_stack(samples_spec):
    xs = np.asarray(samples_spec)
    if xs.ndim == 3:
        xs = xs[..., None]
    return xs


def data_terms(samples_spec, alphas, y_spec):
    """Per-bin normal-equation pieces ``S = sum a x x^H`` and ``b = sum a conj(y) x``.

    Returns ``S`` with shape ``(H, W, D, D)`` and ``b`` with shape ``(H, W, D)``.
    """
    xs = _as_stack(samples_spec)
    alphas = np.asarray(alphas, dtype=np.float64)
    if xs.shape[0] == 0:
        raise ValueError("empty sample list")
    if alphas.shape != (xs.shape[0],):
        raise ValueError(f"{alphas.size} scores for {xs.shape[0]} samples")
    y_spec = np.asarray(y_spec)
    b = np.einsum("f,fhwd->hwd", alphas, xs * np.conj(y_spec)[None, :, :, None])
    if xs.shape[-1] == 1:
        S = np.einsum("f,fhw->hw", alphas, np.abs(xs[..., 0]) ** 2)[..., None, None]
    else:
        S = np.einsum("f,fhwd,fhwe->hwde", alphas, xs, np.conj(xs), optimize=True)
    return S, b


def _solve_g_terms(S, b, h_spec, zeta_spec, mu):
    rhs = b - zeta_spec + 0.5 * mu * h_spec
    D = rhs.shape[-1]
    if D == 1:
        return rhs / (S[..., 0, :] + 0.5 * mu)
    A = S + 0.5 * mu * np.eye(D)
    return np.linalg.solve(A, rhs[..., None])[..., 0]


def solve_g(samples_spec, alphas, y_spec, h_spec, zeta_spec, mu):
    """Closed-form g-update, solved independently at every frequency bin.

    With ``D`` channels each bin is a ``D x D`` Hermitian system
    ``(sum_f a_f x_f x_f^H + mu/2) g = sum_f a_f conj(y) x_f - zeta + mu/2 h``;
    for one channel it is a scalar division.
    """
    S, b = data_terms(samples_spec, alphas, y_spec)
    h_spec = np.asarray(h_spec).reshape(b.shape)
    zeta_spec = np.asarray(zeta_spec).reshape(b.shape)
    return _solve_g_terms(S, b, h_spec, zeta_spec, mu)


def update_zeta(zeta_spec, g_spec, h_spec, mu):
    return zeta_spec + mu * (g_spec - h_spec)


def train_filter(samples_spec, alphas, y_spec, support, cfg=AdmmConfig(), state=None):
    """Run ``cfg.iters`` ADMM sweeps (g, h, zeta, then mu growth).

    ``state`` warm-starts ``h`` and ``zeta``; the penalty restarts at
    ``cfg.mu0`` on every call. Returns a new :class:`FilterState`.
    """
    S, b = data_terms(samples_spec, alphas, y_spec)
    if state is None:
        state = FilterState.zeros(b.shape, support, cfg.mu0)
    h = state.h_spec.reshape(b.shape)
    zeta = state.zeta_spec.reshape(b.shape)
    g = state.g_spec.reshape(b.shape)
    mu = cfg.mu0
    for _ in range(cfg.iters):
        g = _solve_g_terms(S, b, h, zeta, mu)
        h = solve_h(g, zeta, mu, cfg.lam, support)
        zeta = update_zeta(zeta, g, h, mu)
        mu = min(cfg.mu_scale * mu, cfg.mu_max)
    return FilterState(h, g, zeta, tuple(support[:2]), mu, state.iterations + cfg.iters)


def objective(h_spec, samples_spec, alphas, y_spec, lam):
    """Spatial-domain training objective of a filter spectrum (Parseval-scaled)."""
    xs = _as_stack(samples_spec)
    h_spec = np.asarray(h_spec).reshape(xs.shape[1:])
    n = xs.shape[1] * xs.shape[2]
    resp = np.sum(np.conj(h_spec)[None] * xs, axis=-1)
    err = np.sum(np.abs(np.asarray(y_spec)[None] - resp) ** 2, axis=(1, 2)) / n
    reg = 0.5 * lam * np.sum(np.abs(h_spec) ** 2) / n
    return float(np.dot(np.asarray(alphas, dtype=np.float64), err) + reg)
