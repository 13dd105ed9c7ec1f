"""The Vasicek distribution and the single-factor mapping.

A portfolio-wide factor Z ~ N(0,1) drives the conditional default
probability pi(Z) = Phi((Phi^-1(p) - sqrt(rho) Z) / sqrt(1 - rho)); the
law of pi(Z) is the Vasicek distribution Vas(p, rho).  High Z means a
good systemic state (pi decreasing in Z).
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError
from .stats_core import binorm_cdf, norm_cdf, norm_quantile

__all__ = [
    "VasicekParams",
    "pi_conditional",
    "vasicek_logpdf",
    "vasicek_pdf",
    "vasicek_cdf",
    "vasicek_quantile",
    "vasicek_moments",
    "sample_pi",
]


@dataclass(frozen=True)
class VasicekParams:
    """Long-run default probability p and asset correlation rho."""

    p: float
    rho: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0,1), got {self.p!r}")
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (0,1), got {self.rho!r}")


def pi_conditional(z, params):
    """Conditional default probability pi(z), strictly decreasing in z."""
    s = norm_quantile(params.p)
    return norm_cdf((s - math.sqrt(params.rho) * np.asarray(z, float))
                    / math.sqrt(1.0 - params.rho))


def vasicek_logpdf(x, params):
    """Log density of Vas(p, rho) at x; -inf at the boundary {0, 1}.

    Evaluated in log space throughout: near 0 and 1 the density explodes
    at high rho.  Computed as the change-of-variables density
    N(Phi^-1(x); m, v) / phi(Phi^-1(x)) with m = Phi^-1(p)/sqrt(1-rho),
    v = rho/(1-rho), which is algebraically the closed form
    sqrt((1-rho)/rho) * exp(-(1/(2 rho)) (sqrt(1-rho) Phi^-1(x) - Phi^-1(p))^2
                            + (Phi^-1(x))^2 / 2).
    """
    p, rho = params.p, params.rho
    xa = np.asarray(x, dtype=float)
    interior = (xa > 0.0) & (xa < 1.0)
    xc = np.where(interior, xa, 0.5)
    y = norm_quantile(xc)
    s = norm_quantile(p)
    out = (0.5 * math.log((1.0 - rho) / rho)
           - (math.sqrt(1.0 - rho) * y - s) ** 2 / (2.0 * rho)
           + 0.5 * y * y)
    out = np.where(interior, out, -np.inf)
    return float(out) if np.ndim(x) == 0 else out


def vasicek_pdf(x, params):
    """Density of Vas(p, rho); exp of :func:`vasicek_logpdf`."""
    out = np.exp(vasicek_logpdf(x, params))
    return float(out) if np.ndim(x) == 0 else out


def vasicek_cdf(x, params):
    """P(pi <= x) = Phi((sqrt(1-rho) Phi^-1(x) - Phi^-1(p)) / sqrt(rho))."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0.0) or np.any(xa >= 1.0):
        raise DomainError(f"vasicek_cdf requires 0 < x < 1, got {x!r}")
    p, rho = params.p, params.rho
    y = norm_quantile(xa if np.ndim(x) else float(x))
    return norm_cdf((math.sqrt(1.0 - rho) * y - norm_quantile(p)) / math.sqrt(rho))


def vasicek_quantile(q, params):
    """Exact inverse of :func:`vasicek_cdf` on 0 < q < 1."""
    qa = np.asarray(q, dtype=float)
    if np.any(qa <= 0.0) or np.any(qa >= 1.0):
        raise DomainError(f"vasicek_quantile requires 0 < q < 1, got {q!r}")
    p, rho = params.p, params.rho
    w = norm_quantile(qa if np.ndim(q) else float(q))
    return norm_cdf((norm_quantile(p) + math.sqrt(rho) * w) / math.sqrt(1.0 - rho))


def vasicek_moments(params):
    """Mean p and variance Phi2(Phi^-1(p), Phi^-1(p); rho) - p^2 of Vas(p, rho)."""
    s = norm_quantile(params.p)
    var = binorm_cdf(s, s, params.rho) - params.p ** 2
    return params.p, var


def sample_pi(params, rng, size=None):
    """Draw pi = pi_conditional(z) with z standard normal from the stream."""
    g = rng.generator()
    z = g.standard_normal() if size is None else g.standard_normal(size)
    return pi_conditional(z, params)
