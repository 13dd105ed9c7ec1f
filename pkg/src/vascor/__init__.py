"""Default-rate time series under a single-factor Gaussian credit model.

The package simulates correlated default counts, estimates the default
probability p and asset correlation rho by classical methods (moments,
corrected moments, a closed-form approximate MLE, full quadrature MLE,
bootstrap intervals) and by NUTS posterior sampling, and provides
posterior predictive checks, one-step forecasts, prior sensitivity
sweeps, and growing-sample studies.  Hot numerical kernels run on a
compiled backend when available, with a pure-Python fallback selected
at import time (force it with VASCOR_PURE_PYTHON=1).
"""

__version__ = "0.1.0"

from ._kernels import IMPL as backend_name
from .bayes import (Diagnostics, PosteriorDraws, PriorConfig, SamplerConfig,
                    diagnostics, ess_bulk, nuts_sample, posterior_event_prob,
                    report_from_draws, split_rhat, summarize_draws)
from .checks_forecast import (ForecastResult, PredictiveDraws, cumulative_study,
                              density_grid, forecast_one_step,
                              posterior_predictive, ppc_pvalue, sweep_priors)
from .classical import (EstimateReport, MleSettings, bootstrap_estimate,
                        fit_amle, fit_base, fit_mle, fit_mm, loglik_point,
                        loglik_series, rate_autocorrelation)
from .errors import (ConfigError, DataError, DomainError, NumericalError,
                     VascorError)
from .simulate import (PRESET_EXPOSURE, PRESET_HORIZON, PRESETS, DefaultSeries,
                       ExposureModel, default_rates, simulate_defaults,
                       simulate_exposures)
from .stats_core import (QuadratureRule, RngStream, betap_logpdf, binorm_cdf,
                         digamma, gauss_hermite, lgamma, log_norm_cdf,
                         norm_cdf, norm_pdf, norm_quantile)
from .vasicek import (VasicekParams, pi_conditional, sample_pi, vasicek_cdf,
                      vasicek_logpdf, vasicek_moments, vasicek_pdf,
                      vasicek_quantile)

__all__ = [
    "__version__",
    "backend_name",
    # errors
    "VascorError", "DomainError", "ConfigError", "DataError", "NumericalError",
    # stats_core
    "RngStream", "QuadratureRule", "norm_pdf", "norm_cdf", "log_norm_cdf",
    "norm_quantile", "binorm_cdf", "gauss_hermite", "lgamma", "digamma",
    "betap_logpdf",
    # vasicek
    "VasicekParams", "pi_conditional", "vasicek_pdf", "vasicek_logpdf",
    "vasicek_cdf", "vasicek_quantile", "vasicek_moments", "sample_pi",
    # simulate
    "DefaultSeries", "ExposureModel", "PRESETS", "PRESET_EXPOSURE",
    "PRESET_HORIZON", "simulate_exposures", "simulate_defaults",
    "default_rates",
    # classical
    "EstimateReport", "MleSettings", "loglik_point", "loglik_series",
    "fit_mm", "fit_amle", "fit_mle", "fit_base", "bootstrap_estimate",
    "rate_autocorrelation",
    # bayes
    "PriorConfig", "SamplerConfig", "PosteriorDraws", "Diagnostics",
    "nuts_sample", "split_rhat", "ess_bulk", "diagnostics",
    "posterior_event_prob", "summarize_draws", "report_from_draws",
    # checks_forecast
    "PredictiveDraws", "ForecastResult", "posterior_predictive", "ppc_pvalue",
    "forecast_one_step", "density_grid", "sweep_priors", "cumulative_study",
]
