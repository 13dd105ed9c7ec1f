"""Scalar special functions, quadrature rules, and the RNG contract.

Everything downstream builds on this module: the normal and bivariate
normal distribution functions, log-gamma/digamma for the beta-proportion
prior, Gauss-Hermite rules for the marginal likelihood, and counter-based
random streams that can be split deterministically for parallel work.

The scalar special functions dispatch to the active kernel backend
(compiled C by default, NumPy/SciPy fallback); the bivariate normal CDF
is the Drezner-Wesolowsky/Genz Gauss-Legendre reduction, shared by both
backends.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._kernels import backend as _kb
from .errors import ConfigError, DomainError

__all__ = [
    "RngStream",
    "QuadratureRule",
    "norm_pdf",
    "norm_cdf",
    "log_norm_cdf",
    "norm_quantile",
    "binorm_cdf",
    "lgamma",
    "digamma",
    "gauss_hermite",
    "betap_logpdf",
]


# ---------------------------------------------------------------------------
# random-number contract

def _mix64(a, b):
    """SplitMix64-style finalizer combining two 64-bit integers."""
    x = (a * 0x9E3779B97F4A7C15 + b + 0x632BE59BD9B4E019) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngStream:
    """Identity of a reproducible random stream.

    Identical (seed, stream_id) pairs reproduce the identical draw
    sequence bit-for-bit.  A stream is single-owner: concurrent tasks
    must each obtain their own stream via :meth:`split`.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= v < 2 ** 64:
                raise ConfigError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self):
        """Fresh NumPy generator over the counter-based Philox stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def split(self, k):
        """Deterministic k-th child stream (same seed, derived stream_id)."""
        return RngStream(self.seed, _mix64(int(self.stream_id), int(k)))


# ---------------------------------------------------------------------------
# scalar special functions (backend-dispatched)

def norm_pdf(x):
    """Standard normal density."""
    return _kb.norm_pdf(x)


def norm_cdf(x):
    """Standard normal distribution function Phi(x)."""
    return _kb.norm_cdf(x)


def log_norm_cdf(x):
    """log Phi(x), stable in both tails."""
    return _kb.log_norm_cdf(x)


def norm_quantile(q):
    """Inverse of the standard normal CDF on 0 < q < 1."""
    qa = np.asarray(q, dtype=float)
    if np.any(qa <= 0.0) or np.any(qa >= 1.0):
        raise DomainError(f"norm_quantile requires 0 < q < 1, got {q!r}")
    return _kb.norm_quantile(q)


def lgamma(x):
    """log Gamma(x) for x > 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0.0):
        raise DomainError(f"lgamma requires x > 0, got {x!r}")
    return _kb.lgamma(x)


def digamma(x):
    """Logarithmic derivative of Gamma at x > 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0.0):
        raise DomainError(f"digamma requires x > 0, got {x!r}")
    return _kb.digamma(x)


# ---------------------------------------------------------------------------
# bivariate normal CDF (Drezner-Wesolowsky / Genz)

# 20-point Gauss-Legendre rule on (-1, 1), positive half
_GL20_X = np.array([
    0.07652652113349733, 0.2277858511416451, 0.3737060887154196,
    0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
    0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
    0.9931285991850949,
])
_GL20_W = np.array([
    0.1527533871307259, 0.1491729864726037, 0.1420961093183821,
    0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.08327674157670475, 0.06267204833410906, 0.04060142980038694,
    0.01761400713915212,
])


def _bvn_upper(dh, dk, r):
    """P(X > dh, Y > dk) for standard bivariate normal with correlation r.

    Gauss-Legendre reduction of Drezner & Wesolowsky (1989) as refined by
    Genz; 20-point rule throughout, tail branch for |r| > 0.925.
    """
    h = dh
    k = dk
    hk = h * k
    bvn = 0.0
    if abs(r) < 0.925:
        if abs(r) > 0.0:
            hs = (h * h + k * k) / 2.0
            asr = math.asin(r) / 2.0
            for x, w in zip(_GL20_X, _GL20_W):
                for sn in (math.sin(asr * (1.0 - x)), math.sin(asr * (1.0 + x))):
                    bvn += w * math.exp((sn * hk - hs) / (1.0 - sn * sn))
            bvn = bvn * asr / (2.0 * math.pi)
        bvn += norm_cdf(-h) * norm_cdf(-k)
    else:
        if r < 0.0:
            k = -k
            hk = -hk
        if abs(r) < 1.0:
            a2 = (1.0 - r) * (1.0 + r)
            a = math.sqrt(a2)
            bs = (h - k) ** 2
            c = (4.0 - hk) / 8.0
            d = (12.0 - hk) / 16.0
            asr = -(bs / a2 + hk) / 2.0
            if asr > -100.0:
                bvn = a * math.exp(asr) * (1.0 - c * (bs - a2) * (1.0 - d * bs / 5.0) / 3.0
                                           + c * d * a2 * a2 / 5.0)
            if -hk < 100.0:
                b = math.sqrt(bs)
                sp = math.sqrt(2.0 * math.pi) * norm_cdf(-b / a)
                bvn -= math.exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
            a /= 2.0
            for x, w in zip(_GL20_X, _GL20_W):
                for sgn in (-1.0, 1.0):
                    xs = (a * (sgn * x + 1.0)) ** 2
                    rs = math.sqrt(1.0 - xs)
                    asr1 = -(bs / xs + hk) / 2.0
                    if asr1 > -100.0:
                        sp1 = 1.0 + c * xs * (1.0 + d * xs)
                        ep = math.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
                        bvn += a * w * math.exp(asr1) * (ep - sp1)
            bvn = -bvn / (2.0 * math.pi)
        if r > 0.0:
            bvn += norm_cdf(-max(h, k))
        else:
            bvn = -bvn
            if k > h:
                bvn += norm_cdf(k) - norm_cdf(h)
    return min(max(bvn, 0.0), 1.0)


def binorm_cdf(x, y, rho):
    """P(X <= x, Y <= y) for standard bivariate normal with correlation rho."""
    if not abs(rho) < 1.0:
        raise DomainError(f"binorm_cdf requires |rho| < 1, got {rho!r}")
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        p = 1.0 - norm_cdf(-float(x)) - norm_cdf(-float(y)) \
            + _bvn_upper(float(x), float(y), float(rho))
        return min(max(p, 0.0), 1.0)
    xb, yb = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    out = np.empty(xb.shape)
    flat = out.reshape(-1)
    for i, (xi, yi) in enumerate(zip(xb.reshape(-1), yb.reshape(-1))):
        flat[i] = binorm_cdf(float(xi), float(yi), rho)
    return out


# ---------------------------------------------------------------------------
# Gauss-Hermite quadrature

@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integration against exp(-x^2)."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int


@lru_cache(maxsize=None)
def gauss_hermite(order):
    """Gauss-Hermite rule by the Golub-Welsch eigenvalue method, cached.

    Exact for polynomials of degree <= 2*order - 1 against exp(-x^2);
    nodes symmetric about 0, weights positive and summing to sqrt(pi).
    """
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= 512:
        raise ConfigError(f"gauss_hermite order must be in [1, 512], got {order!r}")
    order = int(order)
    if order == 1:
        nodes = np.zeros(1)
        weights = np.array([math.sqrt(math.pi)])
    else:
        off = np.sqrt(np.arange(1, order) / 2.0)
        nodes = eigh_tridiagonal(np.zeros(order), off, eigvals_only=True)
        # weights from the orthonormal recurrence rather than the LAPACK
        # eigenvectors, whose tiny leading components are only absolutely
        # accurate and can round to zero
        log_w = 0.5 * math.log(math.pi) - _gh_log_sumsq(nodes, off)
        weights = np.exp(log_w)
        # enforce exact symmetry of the rule about 0
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(nodes=nodes, weights=weights, order=order)


def _gh_log_sumsq(nodes, off):
    """log of sum_k q_k(x)^2 with q_k the orthonormal Hermite recurrence.

    The Gauss weight at node x is sqrt(pi) / sum_k q_k(x)^2.  A vectorized
    pass covers all nodes; entries whose sum overflows double range are
    redone with a scalar rescaled loop.
    """
    n = nodes.size
    with np.errstate(over="ignore"):
        q_prev = np.zeros(n)
        q_cur = np.ones(n)
        ssq = np.ones(n)
        for k in range(1, n):
            below = off[k - 2] * q_prev if k >= 2 else 0.0
            q_prev, q_cur = q_cur, (nodes * q_cur - below) / off[k - 1]
            ssq = ssq + q_cur * q_cur
    out = np.log(ssq)
    for i in np.nonzero(~np.isfinite(ssq))[0]:
        q_prev, q_cur, s, log_scale = 0.0, 1.0, 1.0, 0.0
        x = nodes[i]
        for k in range(1, n):
            below = off[k - 2] * q_prev if k >= 2 else 0.0
            q_prev, q_cur = q_cur, (x * q_cur - below) / off[k - 1]
            s += q_cur * q_cur
            if s > 1e280:
                scale = math.sqrt(s)
                q_prev /= scale
                q_cur /= scale
                s = 1.0
                log_scale += 2.0 * math.log(scale)
        out[i] = math.log(s) + log_scale
    return out


# ---------------------------------------------------------------------------
# beta-proportion distribution

def betap_logpdf(x, mu, phi):
    """Log density of the beta-proportion law BetaP(mu, phi) at x.

    BetaP(mu, phi) is Beta(mu*phi, (1-mu)*phi): mean mu, precision phi.
    Boundary x in {0, 1} returns -inf (log-zero sentinel), never raises.
    """
    if not 0.0 < mu < 1.0:
        raise DomainError(f"betap_logpdf requires 0 < mu < 1, got mu={mu!r}")
    if not phi > 0.0:
        raise DomainError(f"betap_logpdf requires phi > 0, got phi={phi!r}")
    alpha = mu * phi
    beta = (1.0 - mu) * phi
    lbeta = lgamma(alpha) + lgamma(beta) - lgamma(alpha + beta)
    xa = np.asarray(x, dtype=float)
    interior = (xa > 0.0) & (xa < 1.0)
    xc = np.where(interior, xa, 0.5)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (alpha - 1.0) * np.log(xc) + (beta - 1.0) * np.log1p(-xc) - lbeta
    out = np.where(interior, val, -np.inf)
    return float(out) if np.ndim(x) == 0 else out
