"""Independent high-precision oracles for frozen test constants.

Run from the repository root:

    python3 tests/oracles/compute_oracles.py

Every constant frozen into the test suite is computed here with mpmath
at 40 significant digits, using only textbook definitions (no package
code), then rounded to double precision.  Re-running this script must
reproduce the frozen values bit-for-bit.
"""

import mpmath as mp

mp.mp.dps = 40


def phi(x):
    return mp.exp(-x * x / 2) / mp.sqrt(2 * mp.pi)


def Phi(x):
    return mp.erfc(-x / mp.sqrt(2)) / 2


def Phi_inv(q):
    return mp.sqrt(2) * mp.erfinv(2 * q - 1)


def main():
    print("# stats_core")
    print("norm_cdf(1.959964) =", mp.nstr(Phi(mp.mpf("1.959964")), 17))
    print("digamma(1) =", mp.nstr(mp.digamma(1), 17))
    print("lgamma(5) = log(24) =", mp.nstr(mp.log(24), 17))

    # bivariate normal CDF at (1, 2, rho=0.3): integrate the density over
    # the quadrant below (x, y) using the conditional-normal reduction
    # P(X<=x, Y<=y) = int_{-inf}^{x} phi(t) Phi((y - rho t)/sqrt(1-rho^2)) dt
    rho = mp.mpf("0.3")

    def cond(t):
        return phi(t) * Phi((2 - rho * t) / mp.sqrt(1 - rho * rho))

    bvn = mp.quad(cond, [-mp.inf, 1])
    print("binorm_cdf(1, 2, 0.3) =", mp.nstr(bvn, 17))

    # arcsine identity value used in criterion 1 sanity anchors
    print("1/4 + asin(0.5)/(2 pi) =", mp.nstr(mp.mpf(1) / 4 + mp.asin(mp.mpf("0.5")) / (2 * mp.pi), 17))

    print()
    print("# vasicek")
    p, r = mp.mpf("0.05"), mp.mpf("0.1")
    val = Phi((Phi_inv(p) - mp.sqrt(r) * 1) / mp.sqrt(1 - r))
    print("pi_conditional(1; p=0.05, rho=0.1) =", mp.nstr(val, 17))

    # Vasicek log density at x via the change-of-variables Jacobian:
    # z(x) = (Phi^-1(p) - sqrt(1-rho) Phi^-1(x)) / sqrt(rho)
    # f(x) = phi(z(x)) * sqrt((1-rho)/rho) / phi(Phi^-1(x))
    p, r, x = mp.mpf("0.01"), mp.mpf("0.1"), mp.mpf("0.03")
    z = (Phi_inv(p) - mp.sqrt(1 - r) * Phi_inv(x)) / mp.sqrt(r)
    dens = phi(z) * mp.sqrt((1 - r) / r) / phi(Phi_inv(x))
    print("vasicek_logpdf(0.03; p=0.01, rho=0.1) =", mp.nstr(mp.log(dens), 17))

    # Vas(0.5, 0.5) variance closed form
    print("asin(0.5)/(2 pi) =", mp.nstr(mp.asin(mp.mpf("0.5")) / (2 * mp.pi), 17))

    print()
    print("# classical")
    # log marginal pmf of d=1 among n=2 under Vas(0.1, 0.3):
    # integral of C(2,1) pi(z) (1 - pi(z)) phi(z) dz over the real line
    p, r = mp.mpf("0.1"), mp.mpf("0.3")

    def integrand(z):
        pi = Phi((Phi_inv(p) - mp.sqrt(r) * z) / mp.sqrt(1 - r))
        return 2 * pi * (1 - pi) * phi(z)

    val = mp.quad(integrand, [-mp.inf, mp.inf])
    print("loglik_point(d=1, n=2; p=0.1, rho=0.3) =", mp.nstr(mp.log(val), 17))

    print()
    print("# bayes")
    # Beta(2.5, 2.5) log density at 1/2
    a = b = mp.mpf("2.5")
    lbeta = mp.loggamma(a) + mp.loggamma(b) - mp.loggamma(a + b)
    val = (a - 1) * mp.log(mp.mpf("0.5")) + (b - 1) * mp.log(mp.mpf("0.5")) - lbeta
    print("betap_logpdf(0.5; mu=0.5, phi=5) =", mp.nstr(val, 17))

    # gradient of the t-th likelihood term with respect to z_t at
    # z_t = 0, p = 0.5: d/dz [D log pi + (N-D) log(1-pi)] with
    # pi = Phi(u), u = (Phi_inv(p) - sqrt(rho) z)/sqrt(1-rho).  At the
    # point: pi = 1/2, dpi/dz = -phi(0) sqrt(rho/(1-rho)), so the term is
    # (D/pi - (N-D)/(1-pi)) dpi/dz = 4 (D - N/2) * (-phi(0) sqrt(rho/(1-rho))).
    r = mp.mpf("0.3")
    coef = -4 * phi(0) * mp.sqrt(r / (1 - r))
    print("dloglik/dz coefficient at z=0, p=0.5, rho=0.3 (times (D - N/2)) =",
          mp.nstr(coef, 17))

    print()
    print("# amle probability-integral-transform fixture (T = 2000)")
    # rates r_i = vasicek_quantile(i/(T+1); 0.05, 0.1) transform to
    # y_i = Phi^-1(r_i) = m + s q_i with q_i = Phi_inv(i/(T+1)); the
    # closed-form AMLE is then rho = v/(1+v), p = Phi(mean(y)/sqrt(1+v))
    # with v the ddof-0 variance of y.
    T = 2000
    p, r = mp.mpf("0.05"), mp.mpf("0.1")
    m = Phi_inv(p) / mp.sqrt(1 - r)
    s = mp.sqrt(r / (1 - r))
    qs = [Phi_inv(mp.mpf(i) / (T + 1)) for i in range(1, T + 1)]
    ys = [m + s * q for q in qs]
    ybar = mp.fsum(ys) / T
    v = mp.fsum((y - ybar) ** 2 for y in ys) / T
    rho_hat = v / (1 + v)
    p_hat = Phi(ybar / mp.sqrt(1 + v))
    print("p_hat =", mp.nstr(p_hat, 17))
    print("rho_hat =", mp.nstr(rho_hat, 17))


if __name__ == "__main__":
    main()
