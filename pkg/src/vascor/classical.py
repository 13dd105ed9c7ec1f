"""Frequentist estimators of (p, rho) and the bootstrap machinery.

Estimators: moment matching (MM), binomial-noise-corrected moment
matching (CMM), asymptotic MLE on rates (AMLE, valid for large
portfolios), and the full binomial-mixture MLE.  Bootstrap resampling of
periods yields bias-corrected points and BCa confidence intervals.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._kernels import backend as _kb
from .errors import ConfigError, DataError, DomainError, NumericalError
from .simulate import DefaultSeries, default_rates
from .stats_core import binorm_cdf, gauss_hermite, norm_cdf, norm_quantile
from .vasicek import VasicekParams, vasicek_logpdf

__all__ = [
    "EstimateReport",
    "MleSettings",
    "loglik_point",
    "loglik_series",
    "fit_mm",
    "fit_amle",
    "fit_mle",
    "fit_base",
    "bootstrap_estimate",
    "rate_autocorrelation",
]

_METHODS = ("MM", "CMM", "AMLE", "MLE", "BAYES")
_BOUND = 1e-6  # default open-interval margin for estimates


@dataclass
class EstimateReport:
    """Point estimates, optional intervals, and fit health for one method."""

    method: str
    p_hat: float
    rho_hat: float
    interval_p: tuple = None
    interval_rho: tuple = None
    interval_level: float = None
    n_bootstrap: int = 0
    convergence_flag: bool = True
    log_likelihood: float = None
    failure_fraction: float = 0.0
    notes: str = ""
    replicates: dict = field(default=None, repr=False)

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ConfigError(f"method must be one of {_METHODS}, got {self.method!r}")
        for name in ("p_hat", "rho_hat"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie strictly inside (0,1), got {v!r}")
        for name in ("interval_p", "interval_rho"):
            iv = getattr(self, name)
            if iv is not None:
                lo, hi = iv
                if not lo <= hi:
                    raise DomainError(f"{name} must satisfy lo <= hi, got {iv!r}")
        if self.interval_level is not None and not 0.0 < self.interval_level < 1.0:
            raise DomainError(f"interval_level must lie in (0,1), got {self.interval_level!r}")

    def to_dict(self):
        """JSON-ready summary (replicate arrays are exported separately)."""
        out = {
            "method": self.method,
            "p_hat": self.p_hat,
            "rho_hat": self.rho_hat,
            "interval_p": list(self.interval_p) if self.interval_p is not None else None,
            "interval_rho": list(self.interval_rho) if self.interval_rho is not None else None,
            "interval_level": self.interval_level,
            "n_bootstrap": self.n_bootstrap,
            "convergence_flag": bool(self.convergence_flag),
            "log_likelihood": self.log_likelihood,
            "failure_fraction": self.failure_fraction,
            "notes": self.notes,
        }
        return out


@dataclass(frozen=True)
class MleSettings:
    """Quadrature order, iteration caps, and search bounds for the MLE."""

    quad_order: int = 64
    max_iter: int = 500
    tol: float = 1e-8
    rho_bounds: tuple = (1e-6, 1.0 - 1e-6)
    p_bounds: tuple = (1e-6, 1.0 - 1e-6)

    def __post_init__(self):
        if self.quad_order < 1:
            raise ConfigError(f"quad_order must be positive, got {self.quad_order!r}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be positive, got {self.max_iter!r}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol!r}")
        for name in ("rho_bounds", "p_bounds"):
            lo, hi = getattr(self, name)
            if not 0.0 < lo < hi < 1.0:
                raise ConfigError(f"{name} must be strictly inside (0,1), got {(lo, hi)!r}")


# ---------------------------------------------------------------------------
# marginal likelihood

def _log_weights(rule):
    # high orders carry underflowed-to-zero tail weights; -inf is correct
    with np.errstate(divide="ignore"):
        return np.log(rule.weights)


def loglik_point(d, n, params, rule):
    """Log marginal pmf of d defaults among n credits under Vas(p, rho).

    Gauss-Hermite approximation of
    log ∫ C(n,d) pi(z)^d (1-pi(z))^(n-d) phi(z) dz, entirely in log
    space.  The rule is recentred and rescaled at the mode of the
    integrand, whose width shrinks like 1/√n; a fixed-node rule loses
    the peak between nodes once n reaches the thousands.
    """
    if not 0 <= d <= n or n < 1:
        raise DataError(f"need 0 <= d <= n with n >= 1, got d={d!r}, n={n!r}")
    out = _kb.loglik_point(float(d), float(n), params.p, params.rho,
                           rule.nodes, _log_weights(rule))
    if np.isnan(out):
        raise NumericalError(
            "quadrature produced a non-finite log-likelihood",
            payload={"d": d, "n": n, "p": params.p, "rho": params.rho,
                     "quad_order": rule.order})
    return out


def loglik_series(series, params, rule):
    """Sum of loglik_point over all periods of the series."""
    out = _kb.loglik_series(series.n_defaults.astype(float),
                            series.n_credits.astype(float),
                            params.p, params.rho,
                            rule.nodes, _log_weights(rule))
    if np.isnan(out):
        raise NumericalError(
            "quadrature produced a non-finite log-likelihood",
            payload={"p": params.p, "rho": params.rho, "quad_order": rule.order})
    return out


# ---------------------------------------------------------------------------
# moment matching

def _require_length(series, k=3):
    if len(series) < k:
        raise DataError(f"estimator needs at least {k} periods, got {len(series)}")


def fit_mm(series, corrected=False):
    """(Corrected) moment matching.

    p_hat is the mean default rate; rho_hat solves
    binorm_cdf(s, s; rho) - p_hat^2 = V_hat by monotone bisection, where
    s = norm_quantile(p_hat) and V_hat is the sample rate variance
    (ddof=1).  With corrected=True V_hat is first reduced by the mean
    within-period binomial sampling noise (1/T) sum p_hat(1-p_hat)/N_t.
    """
    _require_length(series)
    method = "CMM" if corrected else "MM"
    rates = default_rates(series)
    p_hat = float(np.mean(rates))
    v_hat = float(np.var(rates, ddof=1))
    notes = []
    flagged = False
    if not _BOUND < p_hat < 1.0 - _BOUND:
        p_hat = min(max(p_hat, _BOUND), 1.0 - _BOUND)
        flagged = True
        notes.append("mean rate at boundary, p_hat clamped")
    if corrected:
        noise = float(np.mean(p_hat * (1.0 - p_hat) / series.n_credits))
        v_hat = max(v_hat - noise, 1e-12)

    s = norm_quantile(p_hat)
    var_of = lambda r: binorm_cdf(s, s, r) - p_hat ** 2
    if v_hat <= 1e-12:
        rho_hat = _BOUND
        flagged = True
        notes.append("rate variance vanished (<= noise floor), rho_hat at lower bound")
    elif var_of(_BOUND) >= v_hat:
        rho_hat = _BOUND
        flagged = True
        notes.append("target variance below model minimum, rho_hat at lower bound")
    elif var_of(1.0 - _BOUND) <= v_hat:
        rho_hat = 1.0 - _BOUND
        flagged = True
        notes.append("target variance above model maximum, rho_hat at upper bound")
    else:
        lo, hi = _BOUND, 1.0 - _BOUND
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            if var_of(mid) < v_hat:
                lo = mid
            else:
                hi = mid
        rho_hat = 0.5 * (lo + hi)
    return EstimateReport(method=method, p_hat=p_hat, rho_hat=rho_hat,
                          convergence_flag=not flagged, notes="; ".join(notes))


# ---------------------------------------------------------------------------
# asymptotic MLE on rates

def fit_amle(series):
    """Asymptotic MLE treating observed rates as exact Vasicek draws.

    Maximizes sum_t vasicek_logpdf(rate_t; p, rho).  Under
    y_t = norm_quantile(rate_t) the objective is a Gaussian likelihood
    with mean m = norm_quantile(p)/sqrt(1-rho) and variance
    v = rho/(1-rho), so the exact maximizer is closed-form:
    rho_hat = v_hat/(1+v_hat), p_hat = norm_cdf(m_hat/sqrt(1+v_hat))
    with (m_hat, v_hat) the sample mean and ddof=0 variance of y.
    Rates of exactly 0 or 1 are clamped to [1/(2N_t), 1 - 1/(2N_t)].
    """
    _require_length(series)
    rates = default_rates(series)
    half = 0.5 / series.n_credits
    clamped = np.minimum(np.maximum(rates, half), 1.0 - half)
    y = norm_quantile(clamped)
    m_hat = float(np.mean(y))
    v_hat = float(np.var(y, ddof=0))
    notes = []
    flagged = False
    if v_hat <= 0.0:
        flagged = True
        notes.append("all transformed rates identical, rho_hat at lower bound")
        rho_hat = _BOUND
        p_hat = norm_cdf(m_hat)
    else:
        rho_hat = v_hat / (1.0 + v_hat)
        p_hat = norm_cdf(m_hat / np.sqrt(1.0 + v_hat))
    p_hat = min(max(p_hat, _BOUND), 1.0 - _BOUND)
    rho_hat = min(max(rho_hat, _BOUND), 1.0 - _BOUND)
    ll = float(np.sum(vasicek_logpdf(clamped, VasicekParams(p_hat, rho_hat))))
    return EstimateReport(method="AMLE", p_hat=p_hat, rho_hat=rho_hat,
                          convergence_flag=not flagged, log_likelihood=ll,
                          notes="; ".join(notes))


# ---------------------------------------------------------------------------
# full binomial-mixture MLE

def _scaled_logit(x, lo, hi):
    u = (x - lo) / (hi - lo)
    return np.log(u) - np.log1p(-u)


def _scaled_expit(t, lo, hi):
    return lo + (hi - lo) / (1.0 + np.exp(-t))

# coarse 4x4 restart grid in (p, rho)
_P_GRID = (0.002, 0.01, 0.05, 0.2)
_RHO_GRID = (0.02, 0.1, 0.3, 0.6)


def fit_mle(series, settings=None):
    """Full-likelihood fit by Nelder-Mead on logit-transformed (p, rho).

    Restarts from the 5 best points of a coarse 4x4 grid; the report
    carries the final log-likelihood and convergence_flag is False when
    the iteration cap was hit.  An all-zero (or all-full) default series
    is returned as a boundary-flagged report without search.
    """
    _require_length(series)
    settings = settings or MleSettings()
    rule = gauss_hermite(settings.quad_order)
    log_w = _log_weights(rule)
    d = series.n_defaults.astype(float)
    n = series.n_credits.astype(float)
    p_lo, p_hi = settings.p_bounds
    r_lo, r_hi = settings.rho_bounds

    if np.all(series.n_defaults == 0) or np.all(series.n_defaults == series.n_credits):
        p_hat = p_lo if np.all(series.n_defaults == 0) else p_hi
        rho_hat = 0.5
        ll = _kb.loglik_series(d, n, p_hat, rho_hat, rule.nodes, log_w)
        return EstimateReport(method="MLE", p_hat=p_hat, rho_hat=rho_hat,
                              convergence_flag=False, log_likelihood=float(ll),
                              notes="degenerate defaults, p_hat at search bound")

    def neg_ll(theta):
        p = _scaled_expit(theta[0], p_lo, p_hi)
        rho = _scaled_expit(theta[1], r_lo, r_hi)
        val = _kb.loglik_series(d, n, p, rho, rule.nodes, log_w)
        return -val if np.isfinite(val) else 1e300

    grid = []
    for p0 in _P_GRID:
        for r0 in _RHO_GRID:
            p0c = min(max(p0, p_lo * 1.001), p_hi * 0.999)
            r0c = min(max(r0, r_lo * 1.001), r_hi * 0.999)
            theta0 = np.array([_scaled_logit(p0c, p_lo, p_hi),
                               _scaled_logit(r0c, r_lo, r_hi)])
            grid.append((neg_ll(theta0), theta0))
    grid.sort(key=lambda t: t[0])

    best = None
    capped = False
    for _, theta0 in grid[:5]:
        res = minimize(neg_ll, theta0, method="Nelder-Mead",
                       options={"maxiter": settings.max_iter,
                                "fatol": settings.tol, "xatol": 1e-10})
        if best is None or res.fun < best.fun:
            best = res
            capped = not res.success
    p_hat = float(_scaled_expit(best.x[0], p_lo, p_hi))
    rho_hat = float(_scaled_expit(best.x[1], r_lo, r_hi))
    return EstimateReport(method="MLE", p_hat=p_hat, rho_hat=rho_hat,
                          convergence_flag=not capped,
                          log_likelihood=float(-best.fun),
                          notes="iteration cap hit" if capped else "")


# ---------------------------------------------------------------------------
# bootstrap

_BASES = {"mm", "cmm", "amle", "mle"}


def fit_base(series, base, settings=None):
    """Dispatch a base estimator by lowercase name."""
    b = base.lower()
    if b not in _BASES:
        raise ConfigError(f"base estimator must be one of {sorted(_BASES)}, got {base!r}")
    if b == "mm":
        return fit_mm(series, corrected=False)
    if b == "cmm":
        return fit_mm(series, corrected=True)
    if b == "amle":
        return fit_amle(series)
    return fit_mle(series, settings)


def _bca_interval(values, theta_hat, jackknife, level):
    """BCa interval from bootstrap replicate values.

    z0 from the fraction of replicates below the original estimate
    (counts clamped away from 0 and B so z0 stays finite); acceleration
    from the jackknife skewness; adjusted percentiles taken by linear
    interpolation.  Degenerate replicate spreads collapse to zero width.
    """
    v = np.sort(values)
    b = v.size
    n_below = np.count_nonzero(v < theta_hat)
    z0 = norm_quantile(min(max(n_below, 0.5), b - 0.5) / b)
    if jackknife is not None and jackknife.size >= 2:
        dev = np.mean(jackknife) - jackknife
        denom = np.sum(dev ** 2) ** 1.5
        a = float(np.sum(dev ** 3) / (6.0 * denom)) if denom > 0 else 0.0
    else:
        a = 0.0
    alpha = (1.0 - level) / 2.0
    adj = []
    for q in (alpha, 1.0 - alpha):
        zq = z0 + norm_quantile(q)
        denom = 1.0 - a * zq
        arg = z0 + zq / denom if denom > 0 else (np.inf if zq > 0 else -np.inf)
        adj.append(norm_cdf(arg))
    lo, hi = np.quantile(v, adj)
    return (float(min(lo, hi)), float(max(lo, hi)))


def bootstrap_estimate(series, base, n_rep, level, rng, settings=None):
    """Bootstrap of a base estimator over resampled periods.

    Resamples the T periods with replacement n_rep times, refits the
    base method, and reports the bias-corrected point 2*theta_hat -
    mean(theta*) with BCa intervals at the given level.  Replicate
    values are retained on the report for export.  Replicates are
    indexed by their own split RNG streams, so any parallel execution
    order reproduces identical output.
    """
    _require_length(series)
    if n_rep < 100:
        raise ConfigError(f"n_rep must be at least 100, got {n_rep!r}")
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level must lie in (0,1), got {level!r}")
    fit0 = fit_base(series, base, settings)
    t = len(series)
    reps = {"p": np.full(n_rep, np.nan), "rho": np.full(n_rep, np.nan)}
    failures = 0
    for i in range(n_rep):
        idx = rng.split(i).generator().integers(0, t, size=t)
        sub = DefaultSeries(series.n_credits[idx], series.n_defaults[idx])
        try:
            fit_i = fit_base(sub, base, settings)
            reps["p"][i] = fit_i.p_hat
            reps["rho"][i] = fit_i.rho_hat
        except (DataError, DomainError, NumericalError):
            failures += 1
    failure_fraction = failures / n_rep
    ok_p = reps["p"][np.isfinite(reps["p"])]
    ok_rho = reps["rho"][np.isfinite(reps["rho"])]
    if ok_p.size == 0:
        raise NumericalError("every bootstrap replicate failed",
                             payload={"base": base, "n_rep": n_rep})

    jk = {"p": [], "rho": []}
    if t >= 4:
        mask = np.ones(t, dtype=bool)
        for i in range(t):
            mask[i] = False
            try:
                fit_i = fit_base(DefaultSeries(series.n_credits[mask],
                                               series.n_defaults[mask]),
                                 base, settings)
                jk["p"].append(fit_i.p_hat)
                jk["rho"].append(fit_i.rho_hat)
            except (DataError, DomainError, NumericalError):
                pass
            mask[i] = True
    jk_p = np.asarray(jk["p"]) if len(jk["p"]) >= 2 else None
    jk_rho = np.asarray(jk["rho"]) if len(jk["rho"]) >= 2 else None

    p_point = float(np.clip(2.0 * fit0.p_hat - np.mean(ok_p), _BOUND, 1.0 - _BOUND))
    rho_point = float(np.clip(2.0 * fit0.rho_hat - np.mean(ok_rho), _BOUND, 1.0 - _BOUND))
    interval_p = _bca_interval(ok_p, fit0.p_hat, jk_p, level)
    interval_rho = _bca_interval(ok_rho, fit0.rho_hat, jk_rho, level)
    flagged = failure_fraction > 0.2
    notes = (f"{failures}/{n_rep} replicates failed" if failures else "")
    return EstimateReport(method=fit0.method, p_hat=p_point, rho_hat=rho_point,
                          interval_p=interval_p, interval_rho=interval_rho,
                          interval_level=level, n_bootstrap=n_rep,
                          convergence_flag=fit0.convergence_flag and not flagged,
                          log_likelihood=fit0.log_likelihood,
                          failure_fraction=failure_fraction,
                          notes=notes, replicates=reps)


# ---------------------------------------------------------------------------
# exploratory diagnostics

def rate_autocorrelation(series, nlags=5):
    """Sample autocorrelation of the default-rate series, lags 1..nlags."""
    rates = default_rates(series)
    x = rates - np.mean(rates)
    denom = float(np.sum(x * x))
    nlags = min(nlags, len(series) - 2)
    if denom <= 0.0 or nlags < 1:
        return np.zeros(max(nlags, 0))
    return np.array([float(np.sum(x[k:] * x[:-k]) / denom)
                     for k in range(1, nlags + 1)])
