# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: scalar special functions and the hot model densities.

Mirrors the surface of _ref exactly (same names, same argument order,
same -inf sentinels).  The likelihood and posterior loops release the
GIL so multi-chain sampling can run on real threads.
"""

from libc.float cimport DBL_EPSILON
from libc.math cimport (INFINITY, M_SQRT1_2, NAN, copysign, erfc, exp, fabs,
                        isfinite, lgamma as _c_lgamma, log, log1p, sqrt)

import numpy as np

IMPL = "c"

cdef double LOG_2PI = 1.8378770664093453
cdef double LOG_SQRT_PI = 0.5723649429247001
cdef double SQRT2 = 1.4142135623730951
cdef double SQRT_2PI = 2.5066282746310002
cdef double INV_SQRT_2PI = 0.3989422804014327

DEF MAX_QUAD = 512


# ---------------------------------------------------------------------------
# scalar kernels

cdef inline double c_norm_pdf(double x) nogil:
    return INV_SQRT_2PI * exp(-0.5 * x * x)


cdef inline double c_ndtr(double x) nogil:
    return 0.5 * erfc(-x * M_SQRT1_2)


cdef inline double c_log_ndtr(double x) nogil:
    # branch points follow the classical cephes implementation
    cdef double log_lhs, denom_cons, last, rhs, numerator, denom_factor, sign
    cdef int i
    if x > 6.0:
        return -c_ndtr(-x)
    if x > -20.0:
        return log(c_ndtr(x))
    # asymptotic series for the far lower tail
    log_lhs = -0.5 * x * x - log(-x) - 0.5 * LOG_2PI
    denom_cons = 1.0 / (x * x)
    last = 0.0
    rhs = 1.0
    numerator = 1.0
    denom_factor = 1.0
    sign = 1.0
    i = 0
    while fabs(last - rhs) > DBL_EPSILON:
        i += 1
        last = rhs
        sign = -sign
        denom_factor *= denom_cons
        numerator *= 2 * i - 1
        rhs += sign * numerator * denom_factor
    return log_lhs + log(rhs)


cdef inline double c_ndtri(double p) nogil:
    # Acklam's rational approximation, then one Halley step against the
    # exact CDF; accurate to a few ulp over the full open interval.
    cdef double q, r, x, e, u
    if p <= 0.0:
        return -INFINITY
    if p >= 1.0:
        return INFINITY
    if p < 0.02425:
        q = sqrt(-2.0 * log(p))
        x = ((((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                 - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
               + 4.374664141464968e+00) * q + 2.938163982698783e+00)
             / ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
                  + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q
                + 1.0))
    elif p <= 0.97575:
        q = p - 0.5
        r = q * q
        x = ((((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r
                 - 2.759285104469687e+02) * r + 1.383577518672690e+02) * r
               - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q
             / (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r
                   - 1.556989798598866e+02) * r + 6.680131188771972e+01) * r
                 - 1.328068155288572e+01) * r + 1.0))
    else:
        q = sqrt(-2.0 * log1p(-p))
        x = -((((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                  - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
                + 4.374664141464968e+00) * q + 2.938163982698783e+00)
              / ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
                   + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q
                 + 1.0))
    # residual against the nearer tail avoids cancellation; the update is
    # assembled in log space so exp(x*x/2) cannot overflow in the far tails
    if p < 0.5:
        e = c_ndtr(x) - p
    else:
        e = (1.0 - p) - c_ndtr(-x)
    if e != 0.0:
        u = copysign(exp(log(fabs(e)) + 0.5 * x * x + 0.5 * LOG_2PI), e)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


cdef inline double c_digamma(double x) nogil:
    # recurrence up to x >= 10, then the Bernoulli asymptotic series
    cdef double r = 0.0, f
    if x <= 0.0:
        return NAN
    while x < 10.0:
        r -= 1.0 / x
        x += 1.0
    f = 1.0 / (x * x)
    return (r + log(x) - 0.5 / x
            + f * (-1.0 / 12.0
                   + f * (1.0 / 120.0
                          + f * (-1.0 / 252.0
                                 + f * (1.0 / 240.0
                                        + f * (-1.0 / 132.0
                                               + f * (691.0 / 32760.0
                                                      + f * (-1.0 / 12.0))))))))


cdef inline double c_expit(double t) nogil:
    cdef double e
    if t >= 0.0:
        return 1.0 / (1.0 + exp(-t))
    e = exp(t)
    return e / (1.0 + e)


# ---------------------------------------------------------------------------
# python-visible scalar functions (scalar-or-array, like _ref)

ctypedef double (*unary_fn)(double) nogil


cdef double _pdf_shim(double x) nogil:
    return c_norm_pdf(x)

cdef double _cdf_shim(double x) nogil:
    return c_ndtr(x)

cdef double _logcdf_shim(double x) nogil:
    return c_log_ndtr(x)

cdef double _ndtri_shim(double x) nogil:
    return c_ndtri(x)

cdef double _lgamma_shim(double x) nogil:
    return _c_lgamma(x)

cdef double _digamma_shim(double x) nogil:
    return c_digamma(x)


cdef object _map_unary(unary_fn f, object x):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        return f(<double> arr.item())
    flat_arr = np.ascontiguousarray(arr).ravel()
    cdef const double[::1] flat = flat_arr
    out_arr = np.empty(flat.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, m = flat.shape[0]
    with nogil:
        for i in range(m):
            out[i] = f(flat[i])
    return out_arr.reshape(arr.shape)


def norm_pdf(x):
    return _map_unary(_pdf_shim, x)


def norm_cdf(x):
    return _map_unary(_cdf_shim, x)


def log_norm_cdf(x):
    return _map_unary(_logcdf_shim, x)


def norm_quantile(q):
    return _map_unary(_ndtri_shim, q)


def lgamma(x):
    return _map_unary(_lgamma_shim, x)


def digamma(x):
    return _map_unary(_digamma_shim, x)


# ---------------------------------------------------------------------------
# marginal likelihood via Gauss-Hermite quadrature

cdef double _mode_newton(double dd, double nn, double a0, double b,
                         double* g2out) nogil:
    # mode of g(z) = d·logΦ(u) + (n-d)·logΦ(-u) - z²/2 with u = a0 - b·z;
    # g is strictly concave (g'' <= -1) so damped Newton from 0 converges
    cdef double z = 0.0, u, lphi, r1, r2, g1, g2 = -1.0, step
    cdef int it
    for it in range(100):
        u = a0 - b * z
        lphi = -0.5 * u * u - 0.5 * LOG_2PI
        r1 = exp(lphi - c_log_ndtr(u))
        r2 = exp(lphi - c_log_ndtr(-u))
        g1 = -b * (dd * r1 - (nn - dd) * r2) - z
        g2 = -b * b * (dd * r1 * (u + r1) + (nn - dd) * r2 * (r2 - u)) - 1.0
        step = g1 / g2
        if step > 2.0:
            step = 2.0
        elif step < -2.0:
            step = -2.0
        z -= step
        if fabs(step) <= 1e-13 * (1.0 + fabs(z)):
            break
    g2out[0] = g2
    return z


cdef double _loglik_accum(const double[::1] d, const double[::1] n, double p,
                          double rho, const double[::1] nodes,
                          const double[::1] lw) nogil:
    cdef Py_ssize_t T = d.shape[0], Q = nodes.shape[0], t, q
    cdef double s = c_ndtri(p)
    cdef double b = sqrt(rho) / sqrt(1.0 - rho)
    cdef double a0 = s / sqrt(1.0 - rho)
    cdef double terms[MAX_QUAD]
    cdef double u, zq, zs, g2, sig, mx, acc, total = 0.0
    for t in range(T):
        zs = _mode_newton(d[t], n[t], a0, b, &g2)
        sig = 1.0 / sqrt(-g2)
        mx = -INFINITY
        for q in range(Q):
            zq = zs + SQRT2 * sig * nodes[q]
            u = a0 - b * zq
            terms[q] = (lw[q] + nodes[q] * nodes[q]
                        + d[t] * c_log_ndtr(u) + (n[t] - d[t]) * c_log_ndtr(-u)
                        - 0.5 * zq * zq)
            if terms[q] > mx:
                mx = terms[q]
        if mx == -INFINITY:
            return -INFINITY
        acc = 0.0
        for q in range(Q):
            acc += exp(terms[q] - mx)
        total += (_c_lgamma(n[t] + 1.0) - _c_lgamma(d[t] + 1.0)
                  - _c_lgamma(n[t] - d[t] + 1.0)
                  + mx + log(acc) + log(sig) - LOG_SQRT_PI)
    return total


def loglik_point(double d, double n, double p, double rho, nodes, log_weights):
    """Log Gauss-Hermite approximation of the marginal binomial pmf."""
    dd = np.array([d], dtype=np.float64)
    nn = np.array([n], dtype=np.float64)
    return loglik_series(dd, nn, p, rho, nodes, log_weights)


def loglik_series(d, n, double p, double rho, nodes, log_weights):
    """Sum of loglik_point over the series (d, n)."""
    cdef const double[::1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[::1] nn = np.ascontiguousarray(n, dtype=np.float64)
    cdef const double[::1] nd = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] lw = np.ascontiguousarray(log_weights, dtype=np.float64)
    if nd.shape[0] > MAX_QUAD:
        raise ValueError(f"quadrature order above {MAX_QUAD}")
    if dd.shape[0] != nn.shape[0] or nd.shape[0] != lw.shape[0]:
        raise ValueError("mismatched array lengths")
    cdef double out
    with nogil:
        out = _loglik_accum(dd, nn, p, rho, nd, lw)
    return out


# ---------------------------------------------------------------------------
# posterior log-density and analytic gradient

cdef inline double c_beta_logpdf(double x, double alpha, double beta,
                                 double* dx) nogil:
    cdef double lb = _c_lgamma(alpha) + _c_lgamma(beta) - _c_lgamma(alpha + beta)
    dx[0] = (alpha - 1.0) / x - (beta - 1.0) / (1.0 - x)
    return (alpha - 1.0) * log(x) + (beta - 1.0) * log1p(-x) - lb


cdef double _logpost_c(const double[::1] theta, const double[::1] d,
                       const double[::1] n,
                       double mu_p, double mu_rho, double phi_rho, double a,
                       double[::1] grad, bint want_grad) nogil:
    cdef Py_ssize_t T = theta.shape[0] - 2, t
    cdef double p, rho, s, sqr, sq1m, a_r, b_r, a_p, b_p
    cdef double d_p = 0.0, d_rho = 0.0, lp
    cdef double z, u, lcdf, lccdf, log_phi_u, gu
    cdef double sum_gu = 0.0, sum_grho = 0.0, sum_lik = 0.0, sum_z2 = 0.0

    if want_grad:
        for t in range(theta.shape[0]):
            grad[t] = 0.0
    p = c_expit(theta[0])
    rho = c_expit(theta[1])
    if not (0.0 < p < 1.0 and 0.0 < rho < 1.0):
        return -INFINITY

    s = c_ndtri(p)
    sqr = sqrt(rho)
    sq1m = sqrt(1.0 - rho)

    # priors: rho ~ Beta(mu_rho*phi_rho, .), p|rho ~ Beta(mu_p*a*rho, .)
    a_r = mu_rho * phi_rho
    b_r = (1.0 - mu_rho) * phi_rho
    a_p = mu_p * a * rho
    b_p = (1.0 - mu_p) * a * rho
    lp = c_beta_logpdf(rho, a_r, b_r, &d_rho)
    lp += c_beta_logpdf(p, a_p, b_p, &d_p)
    # rho also enters the p-prior through its precision a*rho
    d_rho += a * (mu_p * log(p) + (1.0 - mu_p) * log1p(-p)
                  - mu_p * c_digamma(a_p) - (1.0 - mu_p) * c_digamma(b_p)
                  + c_digamma(a * rho))
    # logit Jacobians
    lp += log(p) + log1p(-p) + log(rho) + log1p(-rho)

    if T > 0:
        for t in range(T):
            z = theta[2 + t]
            u = (s - sqr * z) / sq1m
            lcdf = c_log_ndtr(u)
            lccdf = c_log_ndtr(-u)
            sum_lik += (_c_lgamma(n[t] + 1.0) - _c_lgamma(d[t] + 1.0)
                        - _c_lgamma(n[t] - d[t] + 1.0)
                        + d[t] * lcdf + (n[t] - d[t]) * lccdf)
            sum_z2 += z * z
            if want_grad:
                log_phi_u = -0.5 * u * u - 0.5 * LOG_2PI
                gu = (d[t] * exp(log_phi_u - lcdf)
                      - (n[t] - d[t]) * exp(log_phi_u - lccdf))
                grad[2 + t] = gu * (-sqr / sq1m) - z
                sum_gu += gu
                sum_grho += gu * (u / (2.0 * (1.0 - rho))
                                  - z / (2.0 * sqr * sq1m))
        lp += sum_lik - 0.5 * sum_z2 - 0.5 * T * LOG_2PI
        if want_grad:
            d_p += sum_gu / (sq1m * c_norm_pdf(s))
            d_rho += sum_grho

    if not isfinite(lp):
        return -INFINITY
    if want_grad:
        grad[0] = d_p * p * (1.0 - p) + (1.0 - 2.0 * p)
        grad[1] = d_rho * rho * (1.0 - rho) + (1.0 - 2.0 * rho)
    return lp


def logpost(theta, d, n, double mu_p, double mu_rho, double phi_rho, double a):
    """Log posterior in unconstrained coordinates [logit p, logit rho, z]."""
    cdef const double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[::1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[::1] nn = np.ascontiguousarray(n, dtype=np.float64)
    if th.shape[0] - 2 != dd.shape[0] or dd.shape[0] != nn.shape[0]:
        raise ValueError("theta length must be len(d) + 2")
    cdef double[::1] scratch = np.empty(th.shape[0], dtype=np.float64)
    cdef double out
    with nogil:
        out = _logpost_c(th, dd, nn, mu_p, mu_rho, phi_rho, a, scratch, False)
    return out


def logpost_grad(theta, d, n, double mu_p, double mu_rho, double phi_rho,
                 double a, grad):
    """Fills grad with the analytic gradient; returns the log posterior."""
    cdef const double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[::1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[::1] nn = np.ascontiguousarray(n, dtype=np.float64)
    cdef double[::1] gr = grad
    if th.shape[0] - 2 != dd.shape[0] or dd.shape[0] != nn.shape[0]:
        raise ValueError("theta length must be len(d) + 2")
    if gr.shape[0] != th.shape[0]:
        raise ValueError("grad length must match theta")
    cdef double out
    with nogil:
        out = _logpost_c(th, dd, nn, mu_p, mu_rho, phi_rho, a, gr, True)
    return out
