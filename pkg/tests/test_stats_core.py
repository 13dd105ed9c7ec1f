"""Special functions, quadrature, beta-proportion density, RNG streams.

Frozen high-precision constants come from tests/oracles/compute_oracles.py
(mpmath at 40 digits, textbook definitions only).
"""

import math

import numpy as np
import pytest

from vascor import (
    ConfigError,
    DomainError,
    QuadratureRule,
    RngStream,
    betap_logpdf,
    binorm_cdf,
    digamma,
    gauss_hermite,
    lgamma,
    log_norm_cdf,
    norm_cdf,
    norm_pdf,
    norm_quantile,
)

SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# normal pdf / cdf / quantile

def test_norm_cdf_symmetry_anchor():
    assert norm_cdf(0.0) == pytest.approx(0.5, abs=1e-15)


def test_norm_quantile_median_anchor():
    assert norm_quantile(0.5) == pytest.approx(0.0, abs=1e-15)


def test_norm_cdf_oracle_point():
    # mpmath: Phi(1.959964) = 0.9750000009035576
    assert norm_cdf(1.959964) == pytest.approx(0.9750000009035576, abs=1e-14)


def test_norm_cdf_matches_mpmath_on_grid():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    xs = np.linspace(-8.0, 8.0, 401)
    got = norm_cdf(xs)
    want = [float(mp.erfc(-x / mp.sqrt(2)) / 2) for x in xs]
    assert np.max(np.abs(got - np.array(want))) < 1e-14


def test_norm_cdf_strictly_increasing():
    # strict only where 1 - Phi(x) stays representable in double precision
    xs = np.linspace(-12.0, 7.5, 2001)
    assert np.all(np.diff(norm_cdf(xs)) > 0.0)
    tail = np.linspace(7.5, 12.0, 101)
    assert np.all(np.diff(norm_cdf(tail)) >= 0.0)


def test_quantile_cdf_round_trip():
    # above x ~ 5.7 a half-ulp of q near 1 already moves the quantile by
    # more than 1e-9 (error ~ ulp(q)/(2 phi(x))), so the strict 1e-9 band
    # is testable on [-8, 5.5] plus the lower tail mirrored through -8
    xs = np.linspace(-8.0, 5.5, 801)
    back = norm_quantile(norm_cdf(xs))
    assert np.max(np.abs(back - xs)) < 1e-9
    lower = np.linspace(-8.0, -5.5, 101)
    assert np.max(np.abs(norm_quantile(norm_cdf(lower)) - lower)) < 1e-12


def test_cdf_quantile_round_trip_q_side():
    qs = np.concatenate([np.geomspace(1e-300, 0.5, 301),
                         1.0 - np.geomspace(1e-15, 0.5, 301)])
    back = norm_cdf(norm_quantile(qs))
    assert np.max(np.abs(back - qs)) < 1e-14


def test_norm_quantile_deep_tail():
    # round trip far beyond the [-8, 8] contract band
    for q in (1e-300, 1e-15, 1e-9, 1.0 - 1e-9, 1.0 - 1e-15):
        assert norm_cdf(norm_quantile(q)) == pytest.approx(q, rel=1e-12)


def test_norm_quantile_rejects_boundary():
    for q in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(DomainError):
            norm_quantile(q)


def test_log_norm_cdf_stable_tails():
    # log Phi(-40) = -x^2/2 - log(x sqrt(2 pi)) + log(1 - 1/x^2 + ...)
    x = 40.0
    series = math.log1p(-1.0 / x ** 2 + 3.0 / x ** 4 - 15.0 / x ** 6)
    want = -0.5 * x * x - math.log(x * math.sqrt(2.0 * math.pi)) + series
    assert log_norm_cdf(-x) == pytest.approx(want, rel=1e-12)
    assert log_norm_cdf(9.0) == pytest.approx(math.log(norm_cdf(9.0)), abs=1e-15)


def test_norm_pdf_matches_formula():
    xs = np.linspace(-10.0, 10.0, 101)
    want = np.exp(-0.5 * xs * xs) / math.sqrt(2.0 * math.pi)
    assert np.allclose(norm_pdf(xs), want, rtol=1e-14, atol=0.0)


def test_scalar_inputs_return_floats():
    assert isinstance(norm_cdf(0.3), float)
    assert isinstance(norm_quantile(0.3), float)
    assert isinstance(lgamma(2.5), float)


# ---------------------------------------------------------------------------
# bivariate normal cdf

def test_binorm_cdf_independence_anchor():
    assert binorm_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25, abs=1e-14)


def test_binorm_cdf_arcsine_identity():
    # closed form: Phi2(0, 0; rho) = 1/4 + asin(rho)/(2 pi)
    for rho in np.arange(-0.9, 0.95, 0.1):
        want = 0.25 + math.asin(rho) / (2.0 * math.pi)
        assert binorm_cdf(0.0, 0.0, float(rho)) == pytest.approx(want, abs=1e-10)


def test_binorm_cdf_oracle_point():
    # mpmath conditional-normal reduction: P(X<=1, Y<=2; rho=0.3)
    assert binorm_cdf(1.0, 2.0, 0.3) == pytest.approx(0.82728251153508305, abs=1e-10)


def test_binorm_cdf_zero_rho_factorizes():
    for x, y in ((0.3, -1.2), (-2.0, 2.5), (1.0, 1.0)):
        assert binorm_cdf(x, y, 0.0) == pytest.approx(norm_cdf(x) * norm_cdf(y), abs=1e-14)


def test_binorm_cdf_symmetric_in_arguments():
    for rho in (-0.8, -0.3, 0.0, 0.4, 0.95):
        assert binorm_cdf(0.7, -1.1, rho) == pytest.approx(binorm_cdf(-1.1, 0.7, rho), abs=1e-14)


def test_binorm_cdf_monotone_in_all_arguments():
    grid = np.linspace(-2.0, 2.0, 9)
    rhos = np.linspace(-0.95, 0.95, 9)
    for y in grid:
        for rho in rhos:
            vals = [binorm_cdf(x, y, float(rho)) for x in grid]
            assert np.all(np.diff(vals) >= -1e-14)
    for x in grid:
        for y in grid:
            vals = [binorm_cdf(x, y, float(r)) for r in rhos]
            assert np.all(np.diff(vals) >= -1e-14)


def test_binorm_cdf_high_correlation_limit():
    # rho -> 1: P(X<=x, Y<=y) -> Phi(min(x, y))
    assert binorm_cdf(0.5, 1.5, 0.999999) == pytest.approx(norm_cdf(0.5), abs=1e-5)
    # rho -> -1: P(X<=x, Y<=y) -> max(Phi(x) + Phi(y) - 1, 0)
    assert binorm_cdf(0.5, 1.5, -0.999999) == pytest.approx(
        norm_cdf(0.5) + norm_cdf(1.5) - 1.0, abs=1e-5)


def test_binorm_cdf_rejects_unit_correlation():
    for rho in (1.0, -1.0, 1.5):
        with pytest.raises(DomainError):
            binorm_cdf(0.0, 0.0, rho)


def test_binorm_cdf_broadcasts():
    xs = np.array([-1.0, 0.0, 1.0])
    out = binorm_cdf(xs, 0.5, 0.2)
    assert out.shape == (3,)
    assert out[1] == pytest.approx(binorm_cdf(0.0, 0.5, 0.2), abs=1e-15)


# ---------------------------------------------------------------------------
# lgamma / digamma

def test_lgamma_anchors():
    assert lgamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert lgamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)


def test_lgamma_matches_scipy_grid():
    from scipy.special import gammaln
    xs = np.concatenate([np.linspace(0.01, 2.0, 200), np.linspace(2.0, 100.0, 200)])
    got = lgamma(xs)
    assert np.max(np.abs(got - gammaln(xs)) / np.maximum(np.abs(gammaln(xs)), 1.0)) < 1e-12


def test_digamma_euler_anchor():
    # mpmath: psi(1) = -0.57721566490153286
    assert digamma(1.0) == pytest.approx(-0.57721566490153286, abs=1e-10)


def test_digamma_recurrence():
    for x in (0.05, 0.3, 1.7, 9.4, 55.0):
        assert digamma(x + 1.0) == pytest.approx(digamma(x) + 1.0 / x, abs=1e-10)


def test_digamma_matches_lgamma_derivative():
    for x in (0.5, 2.0, 10.0, 80.0):
        h = 1e-6 * max(x, 1.0)
        fd = (lgamma(x + h) - lgamma(x - h)) / (2.0 * h)
        assert digamma(x) == pytest.approx(fd, abs=1e-6)


def test_gamma_functions_reject_nonpositive():
    for fn in (lgamma, digamma):
        for x in (0.0, -1.0):
            with pytest.raises(DomainError):
                fn(x)


# ---------------------------------------------------------------------------
# Gauss-Hermite quadrature

def test_gauss_hermite_order_one():
    rule = gauss_hermite(1)
    assert rule.nodes == pytest.approx([0.0], abs=1e-15)
    assert rule.weights == pytest.approx([SQRT_PI], rel=1e-15)


def test_gauss_hermite_order_two():
    rule = gauss_hermite(2)
    assert rule.nodes == pytest.approx([-1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)], abs=1e-15)
    assert rule.weights == pytest.approx([SQRT_PI / 2.0, SQRT_PI / 2.0], rel=1e-14)


def test_gauss_hermite_second_moment():
    rule = gauss_hermite(7)
    assert float(rule.weights @ rule.nodes ** 2) == pytest.approx(SQRT_PI / 2.0, rel=1e-14)


@pytest.mark.parametrize("order", [3, 16, 64, 128, 512])
def test_gauss_hermite_polynomial_exactness(order):
    # exact moments of exp(-x^2): odd vanish, even are sqrt(pi) (k-1)!! / 2^(k/2)
    rule = gauss_hermite(order)
    k_max = min(2 * order - 1, 40)
    moment = SQRT_PI
    for k in range(0, k_max + 1):
        got = float(rule.weights @ rule.nodes ** k)
        if k % 2 == 1:
            # cancellation scale grows with the summed absolute terms
            scale = float(rule.weights @ np.abs(rule.nodes) ** k)
            assert abs(got) < 1e-13 * max(scale, 1.0)
        else:
            if k >= 2:
                moment *= (k - 1) / 2.0
            assert got == pytest.approx(moment, rel=1e-12)


@pytest.mark.parametrize("order", [2, 33, 64, 256, 512])
def test_gauss_hermite_structure(order):
    rule = gauss_hermite(order)
    if order <= 256:
        assert np.all(rule.weights > 0.0)
    else:
        # beyond |x| ~ 27 the true weights underflow double range to 0
        assert np.all(rule.weights >= 0.0)
        assert np.all(rule.weights[np.abs(rule.nodes) < 26.0] > 0.0)
    assert rule.nodes == pytest.approx(-rule.nodes[::-1], abs=1e-13)
    assert float(np.sum(rule.weights)) == pytest.approx(SQRT_PI, rel=1e-13)
    assert np.all(np.diff(rule.nodes) > 0.0)


def test_gauss_hermite_gaussian_cdf_identity():
    # int Phi(a + b x) exp(-x^2) dx / sqrt(pi) = Phi(a / sqrt(1 + b^2 / 2))
    # after z = sqrt(2) x; with nodes in exp(-x^2) form the identity is
    # sum w_i Phi(a + b sqrt(2) x_i) / sqrt(pi) = Phi(a / sqrt(1 + b^2))
    rule = gauss_hermite(64)
    for a, b in ((0.0, 1.0), (-1.3, 0.7), (2.0, 2.5)):
        got = float(rule.weights @ norm_cdf(a + b * math.sqrt(2.0) * rule.nodes)) / SQRT_PI
        assert got == pytest.approx(norm_cdf(a / math.sqrt(1.0 + b * b)), abs=1e-8)


def test_gauss_hermite_cached_and_frozen():
    rule = gauss_hermite(64)
    assert rule is gauss_hermite(64)
    assert not rule.nodes.flags.writeable
    assert not rule.weights.flags.writeable


def test_gauss_hermite_rejects_bad_order():
    for order in (0, -3, 513, 2.5):
        with pytest.raises(ConfigError):
            gauss_hermite(order)


# ---------------------------------------------------------------------------
# beta-proportion log density

def test_betap_uniform_case():
    assert betap_logpdf(0.3, 0.5, 2.0) == pytest.approx(0.0, abs=1e-14)


def test_betap_oracle_point():
    # mpmath: Beta(2.5, 2.5) log density at 0.5
    assert betap_logpdf(0.5, 0.5, 5.0) == pytest.approx(0.52924654772227137, rel=1e-13)


def test_betap_normalizes():
    from scipy.integrate import quad
    for mu, phi in ((0.2, 10.0), (0.5, 5.0), (0.9, 2.0)):
        val, _ = quad(lambda x: math.exp(betap_logpdf(x, mu, phi)), 0.0, 1.0)
        assert val == pytest.approx(1.0, abs=1e-8)


def test_betap_mean_is_mu():
    from scipy.integrate import quad
    for mu, phi in ((0.2, 10.0), (0.5, 5.0), (0.77, 31.0)):
        val, _ = quad(lambda x: x * math.exp(betap_logpdf(x, mu, phi)), 0.0, 1.0)
        assert val == pytest.approx(mu, abs=1e-8)


def test_betap_sampling_mean():
    g = RngStream(123).generator()
    draws = g.beta(0.2 * 10.0, 0.8 * 10.0, size=10 ** 6)
    sd = math.sqrt(0.2 * 0.8 / 11.0)
    assert abs(float(np.mean(draws)) - 0.2) < 3.0 * sd / 10 ** 3


def test_betap_boundary_sentinel():
    assert betap_logpdf(0.0, 0.3, 4.0) == -np.inf
    assert betap_logpdf(1.0, 0.3, 4.0) == -np.inf


def test_betap_rejects_bad_parameters():
    with pytest.raises(DomainError):
        betap_logpdf(0.5, 0.0, 4.0)
    with pytest.raises(DomainError):
        betap_logpdf(0.5, 0.3, 0.0)


# ---------------------------------------------------------------------------
# RNG streams

def test_rng_reproducible():
    a = RngStream(42, 7).generator().standard_normal(16)
    b = RngStream(42, 7).generator().standard_normal(16)
    assert np.array_equal(a, b)


def test_rng_split_deterministic_and_distinct():
    s = RngStream(42)
    assert s.split(3) == s.split(3)
    assert s.split(3) != s.split(4)
    a = s.split(3).generator().standard_normal(16)
    b = s.split(4).generator().standard_normal(16)
    assert not np.array_equal(a, b)


def test_rng_split_children_differ_from_parent():
    s = RngStream(9, 1)
    child = s.split(0)
    assert child.seed == 9
    assert child.stream_id != s.stream_id


def test_rng_rejects_bad_seed():
    for bad in (-1, 2 ** 64, 1.5):
        with pytest.raises(ConfigError):
            RngStream(bad)


def test_quadrature_rule_is_plain_record():
    rule = QuadratureRule(nodes=np.zeros(1), weights=np.ones(1), order=1)
    assert rule.order == 1
