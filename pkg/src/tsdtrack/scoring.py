"""Sample scoring: temporal weights, response quality (DPMR) and the score QP."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DpmrParams:
    high_area_fraction: float = 0.2
    epsilon: float = 1e-6
    tr: float = 14.0

    def __post_init__(self):
        if not 0 < self.high_area_fraction < 1:
            raise ValueError("high_area_fraction must lie in (0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")


def temporal_weights(F, f0=10, q=0.0408):
    """Recency weights ``t^1..t^F`` (oldest first), summing to 1.

    The newest ``f0`` samples grow geometrically by ``1/(1-q)`` per step;
    older ones share the flat value ``1/a``. When ``F < f0`` the geometric
    branch covers every sample and the result is renormalized.
    """
    if F < 1:
        raise ValueError("F must be >= 1")
    if f0 < 1:
        raise ValueError("f0 must be >= 1")
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    f = np.arange(1, F + 1)
    if F >= f0:
        a = F - f0 + ((1.0 - q) ** (-f0) - 1.0) / q
        t = np.where(f <= F - f0, 1.0, (1.0 - q) ** (F - f0 - f)) / a
    else:
        t = (1.0 - q) ** (F - f0 - f).astype(float)
        t = t / t.sum()
    return t


def high_area_window(shape, peak, fraction):
    """Row/column index arrays of the wrapped window centered on ``peak``."""
    idx = []
    for n, p in zip(shape, peak):
        size = min(n, max(1, int(round(fraction * n))))
        offsets = np.arange(size) - size // 2
        idx.append((p + offsets) % n)
    return idx


def compute_dpmr(response, params=DpmrParams()):
    """Dual-area peak to media ratio of a response map.

    The high area is a window of ``high_area_fraction`` of each dimension
    centered (with wrap-around) on the peak; the low area is everything else.
    ``(max(Rh) - min(Rh)) / max(mean(Rl) - min(Rl), epsilon)``.
    """
    r = np.asarray(response, dtype=np.float64)
    if r.size == 0:
        raise ValueError("empty response")
    peak = np.unravel_index(int(np.argmax(r)), r.shape)
    rows, cols = high_area_window(r.shape, peak, params.high_area_fraction)
    high = np.zeros(r.shape, dtype=bool)
    high[np.ix_(rows, cols)] = True
    rh = r[high]
    rl = r[~high]
    num = rh.max() - rh.min()
    den = rl.mean() - rl.min() if rl.size else 0.0
    return float(num / max(den, params.epsilon))


def is_keyframe(dpmr, tr=14.0):
    return bool(dpmr > tr)


def residual_energy(filter_spec, sample_spec, y_spec):
    """Spatial squared error between the label and the filter's response on a sample.

    Accepts one sample ``(H, W[, D])`` or a stack ``(F, H, W[, D])`` and
    returns a float or an array of F values.
    """
    filter_spec = np.asarray(filter_spec)
    xs = np.asarray(sample_spec)
    single = xs.ndim == filter_spec.ndim
    if single:
        xs = xs[None]
    if filter_spec.ndim == 2:
        filter_spec = filter_spec[..., None]
        xs = xs[..., None]
    resp = np.sum(np.conj(filter_spec)[None] * xs, axis=-1)
    n = xs.shape[1] * xs.shape[2]
    err = np.sum(np.abs(np.asarray(y_spec)[None] - resp) ** 2, axis=(1, 2)) / n
    return float(err[0]) if single else err


def quadratic_coefficients(t, dpmrs, gamma, nu, epsilon=1e-6):
    """``c^f = gamma/(2 t^f) + nu/(2 DPMR^f)``; DPMR is floored at ``epsilon``."""
    t = np.asarray(t, dtype=np.float64)
    c = gamma / (2.0 * t)
    if nu:
        d = np.maximum(np.asarray(dpmrs, dtype=np.float64), epsilon)
        c = c + nu / (2.0 * d)
    return c


def solve_simplex_qp(betas, c):
    """Exact minimizer of ``sum(b*a + c*a^2)`` over the probability simplex.

    KKT gives ``a_f = max(0, (m - b_f) / (2 c_f))`` for a single multiplier
    ``m``; the active set is the k samples with the smallest ``b``, for the
    largest k whose implied ``m`` still exceeds the k-th smallest ``b``.
    """
    betas = np.asarray(betas, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if betas.size == 0:
        raise ValueError("need at least one sample")
    if betas.shape != c.shape:
        raise ValueError("betas and coefficients differ in length")
    if not np.all(c > 0):
        raise ValueError("quadratic coefficients must be positive")
    order = np.argsort(betas, kind="stable")
    inv = 1.0 / (2.0 * c[order])
    cum_inv = np.cumsum(inv)
    cum_b = np.cumsum(betas[order] * inv)
    m_k = (1.0 + cum_b) / cum_inv
    valid = m_k > betas[order]
    k = int(np.nonzero(valid)[0][-1])
    m = m_k[k]
    alphas = np.maximum(0.0, (m - betas) / (2.0 * c))
    return alphas / alphas.sum()


def solve_alpha(betas, t, dpmrs, gamma=3.02, nu=0.201, epsilon=1e-6):
    """Sample scores from residuals, temporal weights and response quality."""
    betas = np.asarray(betas, dtype=np.float64)
    if betas.size == 0:
        raise ValueError("need at least one sample")
    if not np.all(np.isfinite(betas)):
        raise ValueError("residual energies must be finite")
    if dpmrs is None:
        dpmrs = np.ones_like(betas)
        nu = 0.0
    return solve_simplex_qp(betas, quadratic_coefficients(t, dpmrs, gamma, nu, epsilon))


def qp_objective(alphas, betas, c):
    alphas = np.asarray(alphas, dtype=np.float64)
    return float(np.sum(np.asarray(betas) * alphas + np.asarray(c) * alphas**2))
