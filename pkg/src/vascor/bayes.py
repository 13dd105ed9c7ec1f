"""Hierarchical posterior and a self-contained NUTS sampler.

Model, in unconstrained coordinates theta = (logit p, logit rho, z_1..z_T):

    rho ~ BetaP(mu_rho, phi_rho)
    p | rho ~ BetaP(mu_p, a * rho)
    z_t ~ N(0, 1)                      (non-centered latent factor)
    pi_t = pi_conditional(z_t; p, rho) (pushforward prior is Vas(p, rho))
    D_t | pi_t ~ Binomial(N_t, pi_t)

plus the logit Jacobians for p and rho.  The sampler is multinomial
NUTS with dual-averaging step-size adaptation and diagonal mass-matrix
estimation in expanding warmup windows; gradients are analytic and live
in the kernel backend.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from ._kernels import backend as _kb
from .classical import EstimateReport
from .errors import ConfigError, DataError, NumericalError
from .stats_core import RngStream

__all__ = [
    "PriorConfig",
    "UnconstrainedState",
    "SamplerConfig",
    "PosteriorDraws",
    "Diagnostics",
    "log_posterior",
    "grad_log_posterior",
    "sample_nuts",
    "nuts_sample",
    "split_rhat",
    "ess_bulk",
    "diagnostics",
    "posterior_event_prob",
    "summarize_draws",
    "report_from_draws",
]


@dataclass(frozen=True)
class PriorConfig:
    """Beta-proportion prior parameters: rho ~ BetaP(mu_rho, phi_rho), p|rho ~ BetaP(mu_p, a*rho)."""

    mu_p: float = 0.2
    mu_rho: float = 0.5
    phi_rho: float = 5.0
    a: float = 10.0

    def __post_init__(self):
        for name in ("mu_p", "mu_rho"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must lie strictly inside (0,1), got {v!r}")
        for name in ("phi_rho", "a"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")

    @classmethod
    def corporate(cls):
        """Preset for low-default corporate portfolios: mu_p lowered to 0.1."""
        return cls(mu_p=0.1)

    def to_dict(self):
        return {"mu_p": self.mu_p, "mu_rho": self.mu_rho,
                "phi_rho": self.phi_rho, "a": self.a}


@dataclass
class UnconstrainedState:
    """Sampler coordinates: logit p, logit rho, and the T latent factors."""

    theta_p: float
    theta_rho: float
    zs: np.ndarray

    def as_vector(self):
        return np.concatenate(([self.theta_p, self.theta_rho],
                               np.asarray(self.zs, dtype=float)))

    @classmethod
    def from_vector(cls, theta):
        theta = np.asarray(theta, dtype=float)
        return cls(theta_p=float(theta[0]), theta_rho=float(theta[1]), zs=theta[2:].copy())


def _series_arrays(series):
    if series is None:
        return np.zeros(0), np.zeros(0)
    return series.n_defaults.astype(float), series.n_credits.astype(float)


def log_posterior(state, series, prior):
    """Log joint density in unconstrained coordinates; -inf sentinel on overflow.

    series may be None for the prior-only density over (p, rho) alone.
    """
    d, n = _series_arrays(series)
    theta = state.as_vector()
    if theta.size != d.size + 2:
        raise DataError(f"state has {theta.size - 2} latents for {d.size} periods")
    return _kb.logpost(theta, d, n, prior.mu_p, prior.mu_rho, prior.phi_rho, prior.a)


def grad_log_posterior(state, series, prior):
    """Analytic gradient of log_posterior in all T+2 coordinates."""
    d, n = _series_arrays(series)
    theta = state.as_vector()
    if theta.size != d.size + 2:
        raise DataError(f"state has {theta.size - 2} latents for {d.size} periods")
    grad = np.empty_like(theta)
    _kb.logpost_grad(theta, d, n, prior.mu_p, prior.mu_rho, prior.phi_rho,
                     prior.a, grad)
    return grad


# ---------------------------------------------------------------------------
# generic NUTS engine

@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    warmup: int = 1000
    draws: int = 1000
    target_accept: float = 0.8
    max_depth: int = 10
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.chains < 1 or self.draws < 1 or self.warmup < 0:
            raise ConfigError("chains and draws must be >= 1, warmup >= 0")
        if not 0.0 < self.target_accept < 1.0:
            raise ConfigError(f"target_accept must lie in (0,1), got {self.target_accept!r}")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth!r}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads!r}")

    def to_dict(self):
        return {"chains": self.chains, "warmup": self.warmup, "draws": self.draws,
                "target_accept": self.target_accept, "max_depth": self.max_depth,
                "seed": self.seed, "threads": self.threads}


_DIVERGENCE_DELTA = 1000.0  # energy error declaring a divergent transition


def _leapfrog(f, q, mom, grad, eps, inv_mass):
    """One leapfrog step; returns (q, mom, grad, lp) at the new point."""
    mom = mom + 0.5 * eps * grad
    q = q + eps * inv_mass * mom
    grad_new = np.empty_like(q)
    lp = f(q, grad_new)
    mom = mom + 0.5 * eps * grad_new
    return q, mom, grad_new, lp


def _kinetic(mom, inv_mass):
    return 0.5 * float(np.dot(mom, inv_mass * mom))


def _is_turning(q_minus, mom_minus, q_plus, mom_plus, inv_mass):
    dq = q_plus - q_minus
    return (np.dot(inv_mass * mom_plus, dq) < 0.0
            or np.dot(inv_mass * mom_minus, dq) < 0.0)


class _Tree:
    __slots__ = ("q_minus", "mom_minus", "grad_minus", "q_plus", "mom_plus",
                 "grad_plus", "q_prop", "grad_prop", "lp_prop", "h_prop",
                 "log_sum_w", "sum_alpha", "n_alpha", "n_leapfrog",
                 "turning", "divergent")

    def __init__(self, **kw):
        for k, v in kw.items():
            setattr(self, k, v)


def _build_tree(f, depth, q, mom, grad, direction, eps, inv_mass, h0, g):
    if depth == 0:
        q1, mom1, grad1, lp1 = _leapfrog(f, q, mom, grad, direction * eps, inv_mass)
        h = -lp1 + _kinetic(mom1, inv_mass) if np.isfinite(lp1) else np.inf
        dh = h - h0
        divergent = not dh < _DIVERGENCE_DELTA
        log_w = -dh if np.isfinite(dh) else -np.inf
        alpha = math.exp(min(0.0, -dh)) if np.isfinite(dh) else 0.0
        return _Tree(q_minus=q1, mom_minus=mom1, grad_minus=grad1,
                     q_plus=q1, mom_plus=mom1, grad_plus=grad1,
                     q_prop=q1, grad_prop=grad1, lp_prop=lp1, h_prop=h,
                     log_sum_w=log_w, sum_alpha=alpha, n_alpha=1,
                     n_leapfrog=1, turning=False, divergent=divergent)

    inner = _build_tree(f, depth - 1, q, mom, grad, direction, eps, inv_mass, h0, g)
    if inner.divergent or inner.turning:
        return inner
    if direction > 0:
        tip = (inner.q_plus, inner.mom_plus, inner.grad_plus)
    else:
        tip = (inner.q_minus, inner.mom_minus, inner.grad_minus)
    outer = _build_tree(f, depth - 1, *tip, direction, eps, inv_mass, h0, g)

    inner.sum_alpha += outer.sum_alpha
    inner.n_alpha += outer.n_alpha
    inner.n_leapfrog += outer.n_leapfrog
    inner.divergent = outer.divergent
    if outer.divergent:
        return inner
    if direction > 0:
        inner.q_plus, inner.mom_plus, inner.grad_plus = \
            outer.q_plus, outer.mom_plus, outer.grad_plus
    else:
        inner.q_minus, inner.mom_minus, inner.grad_minus = \
            outer.q_minus, outer.mom_minus, outer.grad_minus

    total = np.logaddexp(inner.log_sum_w, outer.log_sum_w)
    # multinomial selection between the two halves
    if outer.log_sum_w > -np.inf and \
            math.log(g.random()) < outer.log_sum_w - total:
        inner.q_prop = outer.q_prop
        inner.grad_prop = outer.grad_prop
        inner.lp_prop = outer.lp_prop
        inner.h_prop = outer.h_prop
    inner.log_sum_w = total
    inner.turning = outer.turning or _is_turning(
        inner.q_minus, inner.mom_minus, inner.q_plus, inner.mom_plus, inv_mass)
    return inner


def _transition(f, q, grad, lp, eps, inv_mass, max_depth, g):
    """One NUTS transition; returns new (q, grad, lp) and per-draw stats."""
    dim = q.size
    mom = g.standard_normal(dim) / np.sqrt(inv_mass)
    h0 = -lp + _kinetic(mom, inv_mass)
    q_minus = q_plus = q
    mom_minus = mom_plus = mom
    grad_minus = grad_plus = grad
    sample = (q, grad, lp, h0)
    log_sum_w = 0.0
    sum_alpha = 0.0
    n_alpha = 0
    n_leapfrog = 0
    divergent = False
    depth = 0
    for j in range(max_depth):
        direction = 1 if g.random() < 0.5 else -1
        if direction > 0:
            sub = _build_tree(f, j, q_plus, mom_plus, grad_plus,
                              direction, eps, inv_mass, h0, g)
        else:
            sub = _build_tree(f, j, q_minus, mom_minus, grad_minus,
                              direction, eps, inv_mass, h0, g)
        sum_alpha += sub.sum_alpha
        n_alpha += sub.n_alpha
        n_leapfrog += sub.n_leapfrog
        if sub.divergent:
            divergent = True
            break
        if sub.turning:
            break
        # biased progressive acceptance of the new half-trajectory
        if sub.log_sum_w >= log_sum_w or \
                math.log(g.random()) < sub.log_sum_w - log_sum_w:
            sample = (sub.q_prop, sub.grad_prop, sub.lp_prop, sub.h_prop)
        log_sum_w = np.logaddexp(log_sum_w, sub.log_sum_w)
        if direction > 0:
            q_plus, mom_plus, grad_plus = sub.q_plus, sub.mom_plus, sub.grad_plus
        else:
            q_minus, mom_minus, grad_minus = sub.q_minus, sub.mom_minus, sub.grad_minus
        depth = j + 1
        if _is_turning(q_minus, mom_minus, q_plus, mom_plus, inv_mass):
            break
    q_new, grad_new, lp_new, h_new = sample
    stats = {"accept_stat": sum_alpha / max(n_alpha, 1), "tree_depth": depth,
             "divergent": divergent, "energy": h_new, "n_leapfrog": n_leapfrog}
    return q_new, grad_new, lp_new, stats


def _initial_step_size(f, q, grad, lp, inv_mass, g):
    """Doubling/halving heuristic targeting acceptance near 0.5."""
    eps = 1.0
    dim = q.size
    mom = g.standard_normal(dim) / np.sqrt(inv_mass)
    h0 = -lp + _kinetic(mom, inv_mass)

    def energy_error(e):
        _, mom1, _, lp1 = _leapfrog(f, q, mom, grad, e, inv_mass)
        if not np.isfinite(lp1):
            return np.inf
        return (-lp1 + _kinetic(mom1, inv_mass)) - h0

    dh = energy_error(eps)
    direction = 1 if dh < math.log(2.0) else -1
    for _ in range(100):
        eps_next = eps * (2.0 if direction > 0 else 0.5)
        if not 1e-10 < eps_next < 1e7:
            break
        dh = energy_error(eps_next)
        if direction > 0 and not dh < math.log(2.0):
            break
        if direction < 0 and not dh > math.log(2.0):
            eps = eps_next
            break
        eps = eps_next
    return eps


class _DualAveraging:
    """Nesterov dual averaging of log step size (gamma=0.05, t0=10, kappa=0.75)."""

    def __init__(self, eps0, target):
        self.target = target
        self.restart(eps0)

    def restart(self, eps0):
        self.mu = math.log(10.0 * eps0)
        self.log_eps = math.log(eps0)
        self.log_eps_bar = math.log(eps0)
        self.h_bar = 0.0
        self.t = 0

    def update(self, alpha):
        self.t += 1
        eta = 1.0 / (self.t + 10.0)
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - alpha)
        self.log_eps = self.mu - math.sqrt(self.t) / 0.05 * self.h_bar
        w = self.t ** -0.75
        self.log_eps_bar = w * self.log_eps + (1.0 - w) * self.log_eps_bar


class _Welford:
    def __init__(self, dim):
        self.n = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def add(self, x):
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def variance(self):
        return self.m2 / max(self.n - 1, 1)


def _mass_windows(warmup):
    """End indices (1-based warmup iterations) of the mass adaptation windows.

    Expanding memoryless windows: 75 initial step-size-only iterations,
    doubling windows of base 25, and a 50-iteration terminal buffer, all
    scaled down proportionally for short warmups.
    """
    if warmup < 20:
        return 0, []
    if warmup >= 150:
        init, term, base = 75, 50, 25
    else:
        init = max(1, int(0.15 * warmup))
        term = max(1, int(0.10 * warmup))
        base = max(1, warmup - init - term)
    ends = []
    pos, w = init, base
    while pos + w <= warmup - term:
        end = pos + w
        if end + 2 * w > warmup - term:
            end = warmup - term
        ends.append(end)
        pos = end
        w *= 2
    return init, ends


def _run_chain(f, dim, config, init_fn, stream):
    g = stream.generator()
    q = np.asarray(init_fn(g), dtype=float)
    if q.shape != (dim,):
        raise ConfigError(f"init returned shape {q.shape}, expected ({dim},)")
    grad = np.empty(dim)
    lp = f(q, grad)
    if not np.isfinite(lp):
        raise NumericalError("chain initialized at a zero-density point",
                             payload={"lp": lp})
    grad = grad.copy()
    inv_mass = np.ones(dim)
    eps = _initial_step_size(f, q, grad, lp, inv_mass, g)
    da = _DualAveraging(eps, config.target_accept)
    init_buf, window_ends = _mass_windows(config.warmup)
    window_ends_set = set(window_ends)
    last_window_end = window_ends[-1] if window_ends else 0
    welford = _Welford(dim)

    for i in range(1, config.warmup + 1):
        q, grad, lp, stats = _transition(f, q, grad, lp, math.exp(da.log_eps),
                                         inv_mass, config.max_depth, g)
        da.update(stats["accept_stat"])
        if init_buf < i <= last_window_end:
            welford.add(q)
            if i in window_ends_set:
                n = welford.n
                var = welford.variance()
                inv_mass = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
                welford = _Welford(dim)
                da.restart(math.exp(da.log_eps))

    eps = math.exp(da.log_eps_bar)
    draws = np.empty((config.draws, dim))
    rec = {k: np.empty(config.draws) for k in
           ("accept_stat", "tree_depth", "divergent", "energy", "n_leapfrog")}
    for s in range(config.draws):
        q, grad, lp, stats = _transition(f, q, grad, lp, eps, inv_mass,
                                         config.max_depth, g)
        draws[s] = q
        for k in rec:
            rec[k][s] = stats[k]
    rec["step_size"] = np.full(config.draws, eps)
    return {"draws": draws, "stats": rec, "step_size": eps, "inv_mass": inv_mass}


def sample_nuts(f, dim, config, init_fn):
    """Run the generic NUTS engine on a kernel-style target.

    f(theta, grad_out) must fill grad_out and return the log density;
    init_fn(generator) must return a starting point of length dim.
    Chains own split RNG streams indexed by chain number, so results are
    identical for any thread count.
    """
    base = RngStream(config.seed)
    streams = [base.split(c) for c in range(config.chains)]
    run = lambda c: _run_chain(f, dim, config, init_fn, streams[c])
    if config.threads > 1 and config.chains > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(run, range(config.chains)))
    else:
        results = [run(c) for c in range(config.chains)]
    out = {
        "draws": np.stack([r["draws"] for r in results]),
        "stats": {k: np.stack([r["stats"][k] for r in results])
                  for k in results[0]["stats"]},
        "step_size": np.array([r["step_size"] for r in results]),
        "inv_mass": np.stack([r["inv_mass"] for r in results]),
    }
    return out


# ---------------------------------------------------------------------------
# model-level sampling

@dataclass
class PosteriorDraws:
    """Posterior draws of (p, rho, pi_1..pi_T) with per-draw sampler stats."""

    p: np.ndarray
    rho: np.ndarray
    pi: np.ndarray
    stats: dict
    warmup: int
    seed: int
    prior: PriorConfig
    max_depth: int = 10
    step_size: np.ndarray = None
    inv_mass: np.ndarray = None
    label: str = ""

    def __post_init__(self):
        for name in ("p", "rho"):
            arr = getattr(self, name)
            if arr.ndim != 2:
                raise DataError(f"{name} draws must be chains x draws")
            if not np.all((arr > 0.0) & (arr < 1.0)):
                raise DataError(f"{name} draws must lie strictly inside (0,1)")
        if self.pi.shape[:2] != self.p.shape:
            raise DataError("pi draws must be chains x draws x T")
        if self.pi.size and not np.all((self.pi > 0.0) & (self.pi < 1.0)):
            raise DataError("pi draws must lie strictly inside (0,1)")

    @property
    def n_chains(self):
        return self.p.shape[0]

    @property
    def n_draws(self):
        return self.p.shape[1]

    @property
    def n_periods(self):
        return self.pi.shape[2]

    @property
    def total_draws(self):
        return self.p.size

    @property
    def divergence_count(self):
        return int(np.sum(self.stats["divergent"]))

    @property
    def divergence_warning(self):
        """True when more than 1% of post-warmup transitions diverged."""
        return self.divergence_count > 0.01 * self.total_draws

    def flat(self, name):
        """Flatten draws of "p", "rho", or "pi[i]" (1-based) across chains."""
        if name == "p":
            return self.p.reshape(-1)
        if name == "rho":
            return self.rho.reshape(-1)
        if name.startswith("pi[") and name.endswith("]"):
            i = int(name[3:-1])
            if not 1 <= i <= self.n_periods:
                raise ConfigError(f"period index {i} outside [1, {self.n_periods}]")
            return self.pi[:, :, i - 1].reshape(-1)
        raise ConfigError(f"unknown parameter name {name!r}")

    def parameter_names(self):
        return ["p", "rho"] + [f"pi[{i}]" for i in range(1, self.n_periods + 1)]


def _expit(x):
    return 1.0 / (1.0 + np.exp(-x))


def _logit(x):
    return np.log(x) - np.log1p(-x)


def nuts_sample(series, prior, config, prior_only=False, label=""):
    """Sample the posterior of (p, rho, z_1..z_T) for a default series.

    With prior_only=True the likelihood is disabled (all counts zeroed)
    and the draws realize the joint prior, including the Vasicek
    pushforward of the latent factors.  series=None samples the
    (p, rho) prior alone.
    """
    if series is None:
        d = np.zeros(0)
        n = np.zeros(0)
    else:
        d, n = _series_arrays(series)
        if prior_only:
            d = np.zeros_like(d)
            n = np.zeros_like(n)
    nt = d.size
    dim = nt + 2
    mu_p, mu_rho, phi_rho, a = prior.mu_p, prior.mu_rho, prior.phi_rho, prior.a

    def f(theta, grad):
        return _kb.logpost_grad(theta, d, n, mu_p, mu_rho, phi_rho, a, grad)

    def init_fn(g):
        for _ in range(100):
            rho0 = g.beta(mu_rho * phi_rho, (1.0 - mu_rho) * phi_rho)
            rho0 = min(max(rho0, 1e-12), 1.0 - 1e-12)
            p0 = g.beta(mu_p * a * rho0, (1.0 - mu_p) * a * rho0)
            p0 = min(max(p0, 1e-12), 1.0 - 1e-12)
            z0 = g.standard_normal(nt)
            theta = np.concatenate(([_logit(p0), _logit(rho0)], z0))
            theta += g.uniform(-2.0, 2.0, size=dim)
            scratch = np.empty(dim)
            if np.isfinite(f(theta, scratch)):
                return theta
        raise NumericalError("could not find a finite-density start point")

    raw = sample_nuts(f, dim, config, init_fn)
    theta = raw["draws"]
    p = _expit(theta[:, :, 0])
    rho = _expit(theta[:, :, 1])
    z = theta[:, :, 2:]
    # pi_t = Phi((Phi^-1(p) - sqrt(rho) z_t) / sqrt(1 - rho)), vectorized
    s = _kb.norm_quantile(p)
    u = (s[:, :, None] - np.sqrt(rho)[:, :, None] * z) / np.sqrt(1.0 - rho)[:, :, None]
    pi = _kb.norm_cdf(u) if z.size else np.empty(z.shape)
    if pi.size:
        # norm_cdf saturates past |u| ~ 39 (prior-only tails reach it); keep
        # pi inside the open interval the draws container demands
        fi = np.finfo(float)
        np.clip(pi, fi.tiny, 1.0 - fi.epsneg, out=pi)
    return PosteriorDraws(p=p, rho=rho, pi=pi, stats=raw["stats"],
                          warmup=config.warmup, seed=config.seed, prior=prior,
                          max_depth=config.max_depth,
                          step_size=raw["step_size"], inv_mass=raw["inv_mass"],
                          label=label)


# ---------------------------------------------------------------------------
# convergence diagnostics

@dataclass
class Diagnostics:
    rhat: dict
    ess_bulk: dict
    divergences: int
    max_treedepth_hits: int

    @property
    def worst_rhat(self):
        return max(self.rhat.values())

    @property
    def min_ess(self):
        return min(self.ess_bulk.values())

    def to_dict(self):
        return {"rhat": dict(self.rhat), "ess_bulk": dict(self.ess_bulk),
                "divergences": self.divergences,
                "max_treedepth_hits": self.max_treedepth_hits,
                "worst_rhat": self.worst_rhat, "min_ess": self.min_ess}


def _split_chains(x):
    x = np.asarray(x, dtype=float)
    c, s = x.shape
    half = s // 2
    return np.concatenate([x[:, :half], x[:, s - half:]], axis=0)


def split_rhat(x):
    """Split-chain potential scale reduction of a chains x draws array.

    Each chain is halved (2C half-chains); constant chains make the
    statistic undefined and return inf as a flagged sentinel.
    """
    h = _split_chains(x)
    n = h.shape[1]
    if n < 2:
        raise DataError("split_rhat needs at least 4 draws per chain")
    w = float(np.mean(np.var(h, axis=1, ddof=1)))
    b = n * float(np.var(np.mean(h, axis=1), ddof=1))
    if w <= 0.0:
        return 1.0 if b <= 0.0 else np.inf
    return float(np.sqrt((n - 1) / n + b / (n * w)))


def _autocovariance(x):
    """Biased autocovariance of a 1-d array via FFT, lags 0..n-1."""
    n = x.size
    xc = x - x.mean()
    m = 1 << (2 * n - 1).bit_length()
    fx = np.fft.rfft(xc, m)
    acov = np.fft.irfft(fx * np.conj(fx), m)[:n].real
    return acov / n


def ess_bulk(x):
    """Effective sample size of a chains x draws array.

    Combined-chain autocovariance estimate with Geyer initial-positive-
    sequence truncation (paired lags, monotone envelope) on the split
    chains.  Constant chains return inf as a flagged sentinel.
    """
    h = _split_chains(x)
    m, n = h.shape
    if n < 2:
        raise DataError("ess_bulk needs at least 4 draws per chain")
    acov = np.stack([_autocovariance(h[i]) for i in range(m)])
    mean_var = float(np.mean(acov[:, 0])) * n / (n - 1)
    if mean_var <= 0.0:
        return np.inf
    var_plus = mean_var * (n - 1) / n
    if m > 1:
        var_plus += float(np.var(np.mean(h, axis=1), ddof=1))

    rho = 1.0 - (mean_var - np.mean(acov, axis=0)) / var_plus
    # Geyer initial positive sequence of paired autocorrelations,
    # with the monotone nonincreasing envelope
    pairs = []
    idx = 0
    while 2 * idx + 1 < n:
        p_k = rho[2 * idx] + rho[2 * idx + 1]
        if p_k <= 0.0:
            break
        pairs.append(p_k)
        idx += 1
    for i in range(1, len(pairs)):
        pairs[i] = min(pairs[i], pairs[i - 1])
    tau = -1.0 + 2.0 * (sum(pairs) if pairs else 1.0)
    tau = max(tau, 1.0 / math.log10(n + 10.0))  # guard against tiny/negative tau
    ess = m * n / tau
    return float(min(ess, m * n))


def diagnostics(draws):
    """Split R-hat, ESS, divergence and tree-depth saturation counts."""
    if draws.n_chains < 2:
        raise DataError("diagnostics need at least 2 chains")
    if draws.n_draws < 4:
        raise DataError("diagnostics need at least 4 draws per chain")
    rhat = {}
    ess = {}
    for name in draws.parameter_names():
        if name == "p":
            arr = draws.p
        elif name == "rho":
            arr = draws.rho
        else:
            arr = draws.pi[:, :, int(name[3:-1]) - 1]
        rhat[name] = split_rhat(arr)
        ess[name] = ess_bulk(arr)
    hits = int(np.sum(draws.stats["tree_depth"] >= draws.max_depth))
    return Diagnostics(rhat=rhat, ess_bulk=ess,
                       divergences=draws.divergence_count,
                       max_treedepth_hits=hits)


def posterior_event_prob(draws_a, draws_b, which):
    """Fraction of index-matched draws with parameter_a > parameter_b."""
    if which not in ("p", "rho"):
        raise ConfigError(f"which must be 'p' or 'rho', got {which!r}")
    va = draws_a.flat(which)
    vb = draws_b.flat(which)
    m = min(va.size, vb.size)
    if va.size != vb.size:
        # deterministic stride resample of the longer stream to common size
        if va.size > m:
            va = va[np.linspace(0, va.size - 1, m).astype(int)]
        if vb.size > m:
            vb = vb[np.linspace(0, vb.size - 1, m).astype(int)]
    return float(np.mean(va > vb))


# ---------------------------------------------------------------------------
# summaries

def summarize_draws(draws):
    """Means, quantiles, R-hat, and ESS per parameter, plus sampler health."""
    diag = diagnostics(draws)
    params = {}
    for name in draws.parameter_names():
        v = draws.flat(name)
        params[name] = {
            "mean": float(np.mean(v)),
            "sd": float(np.std(v, ddof=1)),
            "q05": float(np.quantile(v, 0.05)),
            "q50": float(np.quantile(v, 0.50)),
            "q95": float(np.quantile(v, 0.95)),
            "rhat": diag.rhat[name],
            "ess_bulk": diag.ess_bulk[name],
        }
    return {
        "params": params,
        "divergences": diag.divergences,
        "max_treedepth_hits": diag.max_treedepth_hits,
        "divergence_warning": bool(draws.divergence_warning),
        "n_chains": draws.n_chains,
        "n_draws": draws.n_draws,
        "warmup": draws.warmup,
        "seed": draws.seed,
        "prior": draws.prior.to_dict(),
    }


def report_from_draws(draws, level=0.95):
    """Condense posterior draws into an EstimateReport (method BAYES)."""
    alpha = (1.0 - level) / 2.0
    p = draws.flat("p")
    rho = draws.flat("rho")
    diag = diagnostics(draws)
    ok = (max(diag.rhat["p"], diag.rhat["rho"]) < 1.05
          and not draws.divergence_warning)
    return EstimateReport(
        method="BAYES",
        p_hat=float(np.mean(p)),
        rho_hat=float(np.mean(rho)),
        interval_p=(float(np.quantile(p, alpha)), float(np.quantile(p, 1 - alpha))),
        interval_rho=(float(np.quantile(rho, alpha)), float(np.quantile(rho, 1 - alpha))),
        interval_level=level,
        convergence_flag=bool(ok),
        notes="" if ok else "sampler diagnostics flagged",
    )
