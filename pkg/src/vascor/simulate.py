"""Synthetic default series under the single-factor model.

Exposure paths follow the linear-trend-plus-noise process
N_t = max(1, round(a*t + b + e_t)), e_t ~ N(0, sigma_n), t = 1..T;
defaults are conditionally binomial given the per-period factor draw.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError
from .vasicek import VasicekParams, pi_conditional

__all__ = [
    "DefaultSeries",
    "ExposureModel",
    "PRESETS",
    "PRESET_EXPOSURE",
    "PRESET_HORIZON",
    "simulate_exposures",
    "simulate_defaults",
    "default_rates",
]


@dataclass(frozen=True, eq=False)
class DefaultSeries:
    """Per-period credit counts N_t and default counts D_t, t = 1..T."""

    n_credits: np.ndarray
    n_defaults: np.ndarray
    label: str = ""
    periods: np.ndarray = field(default=None)

    def __post_init__(self):
        n = np.array(self.n_credits, dtype=np.int64, copy=True)
        d = np.array(self.n_defaults, dtype=np.int64, copy=True)
        if n.ndim != 1 or d.shape != n.shape or n.size < 1:
            raise DataError("series needs parallel 1-d count arrays of length >= 1")
        if np.any(n < 1):
            raise DataError("every n_credits must be a positive integer")
        if np.any(d < 0) or np.any(d > n):
            raise DataError("defaults must satisfy 0 <= D_t <= N_t")
        periods = self.periods
        if periods is None:
            periods = np.arange(1, n.size + 1, dtype=np.int64)
        else:
            periods = np.array(periods, dtype=np.int64, copy=True)
            if periods.shape != n.shape or np.any(np.diff(periods) <= 0):
                raise DataError("periods must be strictly increasing and match length")
        for name, arr in (("n_credits", n), ("n_defaults", d), ("periods", periods)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self):
        return int(self.n_credits.size)

    def prefix(self, t):
        """First t periods as a new series."""
        if not 1 <= t <= len(self):
            raise DataError(f"prefix length {t} outside [1, {len(self)}]")
        return DefaultSeries(self.n_credits[:t], self.n_defaults[:t],
                             label=self.label, periods=self.periods[:t])

    def __eq__(self, other):
        if not isinstance(other, DefaultSeries):
            return NotImplemented
        return (np.array_equal(self.n_credits, other.n_credits)
                and np.array_equal(self.n_defaults, other.n_defaults)
                and np.array_equal(self.periods, other.periods)
                and self.label == other.label)


@dataclass(frozen=True)
class ExposureModel:
    """Linear exposure trend N_t ~ a*t + b with Gaussian noise sigma_n."""

    a: float
    b: float
    sigma_n: float

    def __post_init__(self):
        if self.sigma_n < 0:
            raise DomainError(f"sigma_n must be nonnegative, got {self.sigma_n!r}")


# Table-style simulation presets: (p, rho) scenario grid, the shared
# exposure process, and the default horizon used in the benchmark runs.
PRESETS = {
    "LL": VasicekParams(p=0.01, rho=0.1),
    "LH": VasicekParams(p=0.01, rho=0.5),
    "HL": VasicekParams(p=0.05, rho=0.1),
    "HH": VasicekParams(p=0.05, rho=0.5),
}
PRESET_EXPOSURE = ExposureModel(a=500.0, b=1000.0, sigma_n=500.0)
PRESET_HORIZON = 20


def simulate_exposures(model, horizon, rng):
    """N_t = max(1, round(a*t + b + e_t)) for t = 1..horizon."""
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon!r}")
    g = rng.generator()
    t = np.arange(1, horizon + 1, dtype=float)
    e = g.normal(0.0, model.sigma_n, size=horizon) if model.sigma_n > 0 else 0.0
    n = np.rint(model.a * t + model.b + e).astype(np.int64)
    return np.maximum(n, 1)


def simulate_defaults(params, exposures, rng, label=""):
    """Draw z_t ~ N(0,1), then D_t ~ Binomial(N_t, pi(z_t)) per period."""
    exposures = np.asarray(exposures, dtype=np.int64)
    if exposures.ndim != 1 or exposures.size < 1 or np.any(exposures < 1):
        raise DataError("exposures must be a 1-d array of positive integers")
    g = rng.generator()
    z = g.standard_normal(exposures.size)
    pi = pi_conditional(z, params)
    d = g.binomial(exposures, pi)
    return DefaultSeries(exposures, d.astype(np.int64), label=label)


def default_rates(series):
    """Element-wise default rates D_t / N_t."""
    return series.n_defaults / series.n_credits
