"""Timing comparison of the compiled and pure-Python kernel backends.

Times the four hot paths used by the estimators and the sampler:
vectorised normal CDF, single-period likelihood, series likelihood,
and the posterior gradient (the cost that dominates NUTS).  Run as

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

import vascor as v
from vascor._kernels import get_backend


def _best_of(repeat, fn, *args):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=7,
                    help="timing repeats per case, best-of (default 7)")
    args = ap.parse_args(argv)

    try:
        compiled = get_backend("c")
    except Exception as exc:  # pragma: no cover - build-dependent
        raise SystemExit(f"compiled backend unavailable: {exc}")
    pure = get_backend("python")

    rule = v.gauss_hermite(64)
    with np.errstate(divide="ignore"):
        log_w = np.log(rule.weights)

    stream = v.RngStream(4)
    exposures = v.simulate_exposures(v.PRESET_EXPOSURE, 20, stream.split(10))
    series = v.simulate_defaults(v.PRESETS["HL"], exposures, stream.split(13))
    d = np.asarray(series.n_defaults, dtype=float)
    n = np.asarray(series.n_credits, dtype=float)

    x = np.linspace(-8.0, 8.0, 1_000_000)
    theta = np.concatenate([[-2.9, -2.2], np.linspace(-1.0, 1.0, len(series))])
    grad = np.empty(theta.size)

    def series_ll(kb):
        kb.loglik_series(d, n, 0.05, 0.1, rule.nodes, log_w)

    def point_ll(kb):
        for t in range(len(series)):
            kb.loglik_point(float(d[t]), float(n[t]), 0.05, 0.1,
                            rule.nodes, log_w)

    def posterior_grad(kb):
        for _ in range(100):
            kb.logpost_grad(theta, d, n, 0.2, 0.5, 5.0, 10.0, grad)

    cases = [
        ("norm_cdf, 1e6 points", lambda kb: kb.norm_cdf(x)),
        ("loglik_point x 20", point_ll),
        ("loglik_series, T=20", series_ll),
        ("logpost_grad x 100", posterior_grad),
    ]

    print(f"{'case':<24}{'compiled':>12}{'pure':>12}{'speedup':>10}")
    for label, fn in cases:
        tc = _best_of(args.repeat, fn, compiled)
        tp = _best_of(args.repeat, fn, pure)
        print(f"{label:<24}{tc * 1e3:>10.3f}ms{tp * 1e3:>10.3f}ms{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
