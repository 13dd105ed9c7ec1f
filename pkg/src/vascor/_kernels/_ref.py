"""Pure NumPy/SciPy reference kernels.

This is the fallback backend for the hot numerical paths: the quadrature
marginal likelihood and the posterior log-density with its analytic
gradient.  The compiled backend (_core) implements the same surface in C;
both must agree to near machine precision (see tests/test_backends.py).

Scalar special functions delegate to scipy.special here, which exceeds
every accuracy requirement of the contract.
"""

import numpy as np
from scipy import special as _sp

IMPL = "python"

_LOG_SQRT_PI = 0.5 * np.log(np.pi)
_LOG_2PI = np.log(2.0 * np.pi)
_SQRT2 = np.sqrt(2.0)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def norm_cdf(x):
    out = _sp.ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def log_norm_cdf(x):
    out = _sp.log_ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def norm_quantile(q):
    out = _sp.ndtri(np.asarray(q, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def lgamma(x):
    out = _sp.gammaln(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def digamma(x):
    out = _sp.psi(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _log_binom_coeff(n, d):
    return _sp.gammaln(n + 1.0) - _sp.gammaln(d + 1.0) - _sp.gammaln(n - d + 1.0)


def _mode_curvature(d, n, a0, b):
    """Mode and curvature of g(z) = d·logΦ(u) + (n-d)·logΦ(-u) - z²/2.

    u = a0 - b·z.  Both CDF factors are log-concave in z, so g is
    strictly concave (g'' <= -1) and damped Newton from z=0 converges
    globally.  The hazard ratios are formed in log space so the losing
    tail stays finite for any u.
    """
    z = np.zeros_like(d)
    g2 = np.full_like(d, -1.0)
    for _ in range(100):
        u = a0 - b * z
        lphi = -0.5 * u * u - 0.5 * _LOG_2PI
        r1 = np.exp(lphi - _sp.log_ndtr(u))
        r2 = np.exp(lphi - _sp.log_ndtr(-u))
        g1 = -b * (d * r1 - (n - d) * r2) - z
        g2 = -b * b * (d * r1 * (u + r1) + (n - d) * r2 * (r2 - u)) - 1.0
        step = np.clip(g1 / g2, -2.0, 2.0)
        z = z - step
        if np.all(np.abs(step) <= 1e-13 * (1.0 + np.abs(z))):
            break
    return z, g2


def loglik_point(d, n, p, rho, nodes, log_weights):
    """Log of the Gauss-Hermite approximation to the marginal binomial pmf.

    Computes log ∫ C(n,d) π(z)^d (1-π(z))^(n-d) φ(z) dz with the rule
    (nodes, weights) for weight e^{-x²}.  The rule is recentred and
    rescaled per observation at the mode of the integrand
    (z = mode + √2·σ·x with σ the inverse root curvature), which keeps
    the nodes inside the integrand's peak however sharp n makes it.
    Entirely in log space; may return -inf, returns NaN only if the
    quadrature itself degenerates (caller raises).
    """
    return loglik_series(np.array([d], dtype=float), np.array([n], dtype=float),
                         p, rho, nodes, log_weights)


def loglik_series(d, n, p, rho, nodes, log_weights):
    """Sum of loglik_point over the series (d, n)."""
    d = np.asarray(d, dtype=float)
    n = np.asarray(n, dtype=float)
    x = np.asarray(nodes, dtype=float)
    lw = np.asarray(log_weights, dtype=float)
    s = _sp.ndtri(p)
    b = np.sqrt(rho) / np.sqrt(1.0 - rho)
    a0 = s / np.sqrt(1.0 - rho)
    zstar, g2 = _mode_curvature(d, n, a0, b)
    sigma = 1.0 / np.sqrt(-g2)
    # (T, Q) matrix of log integrand values on the per-period grids
    z = zstar[:, None] + _SQRT2 * sigma[:, None] * x[None, :]
    u = a0 - b * z
    terms = (lw[None, :] + x[None, :] ** 2
             + d[:, None] * _sp.log_ndtr(u)
             + (n - d)[:, None] * _sp.log_ndtr(-u)
             - 0.5 * z * z)
    lse = _sp.logsumexp(terms, axis=1)
    return float(np.sum(_log_binom_coeff(n, d) + lse + np.log(sigma) - _LOG_SQRT_PI))


def _beta_terms(x, alpha, beta):
    """Log Beta(alpha, beta) density at x and its derivative in x."""
    lb = _sp.gammaln(alpha) + _sp.gammaln(beta) - _sp.gammaln(alpha + beta)
    logpdf = (alpha - 1.0) * np.log(x) + (beta - 1.0) * np.log1p(-x) - lb
    dlogpdf = (alpha - 1.0) / x - (beta - 1.0) / (1.0 - x)
    return logpdf, dlogpdf


def logpost(theta, d, n, mu_p, mu_rho, phi_rho, a):
    """Log posterior density in unconstrained coordinates.

    theta = [logit p, logit rho, z_1..z_T].  Includes the likelihood,
    the standard-normal latent density, BetaP priors on (p, rho) with
    the p-prior precision a·rho, and logit Jacobians.  Returns -inf on
    any non-finite intermediate (log-zero sentinel).
    """
    lp, _ = _logpost_impl(theta, d, n, mu_p, mu_rho, phi_rho, a, want_grad=False)
    return lp


def logpost_grad(theta, d, n, mu_p, mu_rho, phi_rho, a, grad):
    """Fills grad with the analytic gradient; returns the log posterior."""
    lp, g = _logpost_impl(theta, d, n, mu_p, mu_rho, phi_rho, a, want_grad=True)
    grad[:] = g
    return lp


def _logpost_impl(theta, d, n, mu_p, mu_rho, phi_rho, a, want_grad):
    theta = np.asarray(theta, dtype=float)
    d = np.asarray(d, dtype=float)
    n = np.asarray(n, dtype=float)
    nz = theta.size - 2
    grad = np.zeros_like(theta) if want_grad else None

    p = _sp.expit(theta[0])
    rho = _sp.expit(theta[1])
    if not (0.0 < p < 1.0 and 0.0 < rho < 1.0):
        return -np.inf, grad

    s = _sp.ndtri(p)
    sq_rho = np.sqrt(rho)
    sq_1mrho = np.sqrt(1.0 - rho)

    # priors: rho ~ Beta(mu_rho·phi_rho, (1-mu_rho)·phi_rho),
    #         p|rho ~ Beta(mu_p·a·rho, (1-mu_p)·a·rho)
    a_r = mu_rho * phi_rho
    b_r = (1.0 - mu_rho) * phi_rho
    a_p = mu_p * a * rho
    b_p = (1.0 - mu_p) * a * rho
    lp_rho, d_rho = _beta_terms(rho, a_r, b_r)
    lp_p, d_p = _beta_terms(p, a_p, b_p)
    # rho also enters the p-prior through its precision a·rho
    d_rho += a * (mu_p * np.log(p) + (1.0 - mu_p) * np.log1p(-p)
                  - mu_p * _sp.psi(a_p) - (1.0 - mu_p) * _sp.psi(b_p)
                  + _sp.psi(a * rho))

    lp = lp_rho + lp_p
    # logit Jacobians
    lp += np.log(p) + np.log1p(-p) + np.log(rho) + np.log1p(-rho)

    if nz > 0:
        z = theta[2:]
        u = (s - sq_rho * z) / sq_1mrho
        lcdf = _sp.log_ndtr(u)
        lccdf = _sp.log_ndtr(-u)
        lp += float(np.sum(_log_binom_coeff(n, d) + d * lcdf + (n - d) * lccdf))
        lp += float(np.sum(-0.5 * z * z)) - 0.5 * nz * _LOG_2PI
        if want_grad:
            log_phi_u = -0.5 * u * u - 0.5 * _LOG_2PI
            gu = d * np.exp(log_phi_u - lcdf) - (n - d) * np.exp(log_phi_u - lccdf)
            grad[2:] = gu * (-sq_rho / sq_1mrho) - z
            d_p += float(np.sum(gu)) / (sq_1mrho * norm_pdf(s))
            d_rho += float(np.sum(gu * (u / (2.0 * (1.0 - rho))
                                        - z / (2.0 * sq_rho * sq_1mrho))))

    if not np.isfinite(lp):
        return -np.inf, grad
    if want_grad:
        grad[0] = d_p * p * (1.0 - p) + (1.0 - 2.0 * p)
        grad[1] = d_rho * rho * (1.0 - rho) + (1.0 - 2.0 * rho)
    return float(lp), grad
