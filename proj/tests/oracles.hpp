// Test-only oracles, independent of the library implementation paths they
// check: an erf-series normal CDF, the base-2 radical inverse, a
// Kolmogorov-Smirnov test, and Gauss-Hermite quadrature.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

// erf by Maclaurin series (|z| <= 3), long double accumulation.
inline long double erf_series(long double z) {
    const long double two_over_sqrt_pi = 1.1283791670955125738961589031L;
    long double term = z;
    long double sum = z;
    const long double z2 = z * z;
    for (int n = 1; n < 200; ++n) {
        term *= -z2 / n;
        const long double contrib = term / (2 * n + 1);
        sum += contrib;
        if (std::fabs((double)contrib) < 1e-24L * std::fabs((double)sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

// erfc by continued fraction (z > 3), modified Lentz.
inline long double erfc_fraction(long double z) {
    const long double tiny = 1e-30L;
    long double f = z, c = z, d = 0.0L;
    for (int n = 1; n < 300; ++n) {
        const long double a = n * 0.5L;
        // continued fraction erfc(z) = exp(-z^2)/sqrt(pi) / (z + a1/(z + a2/(z + ...)))
        d = z + a * d;
        if (d == 0.0L) d = tiny;
        c = z + a / c;
        if (c == 0.0L) c = tiny;
        d = 1.0L / d;
        const long double delta = c * d;
        f *= delta;
        if (std::fabs((double)(delta - 1.0L)) < 1e-22) break;
    }
    const long double sqrt_pi = 1.7724538509055160272981674833L;
    return std::exp(-z * z) / (sqrt_pi * f);
}

/// Standard normal CDF, accurate to ~1e-18 relative over |x| <= 8.5.
inline double normal_cdf(double x) {
    const long double z = std::fabs((long double)x) * 0.70710678118654752440084436210L;
    long double tail; // P(X > |x|)
    if (z <= 3.0L) tail = 0.5L * (1.0L - erf_series(z));
    else tail = 0.5L * erfc_fraction(z);
    return (double)(x >= 0.0 ? 1.0L - tail : tail);
}

/// Inverse normal CDF by bisection on the oracle CDF; slow but independent.
inline double inverse_normal_bisect(double p, double tol = 1e-13) {
    double lo = -9.0, hi = 9.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p) lo = mid;
        else hi = mid;
        if (hi - lo < tol) break;
    }
    return 0.5 * (lo + hi);
}

/// Base-2 radical inverse (van der Corput).
inline double van_der_corput(std::uint64_t n) {
    double result = 0.0, base = 0.5;
    while (n) {
        if (n & 1u) result += base;
        base *= 0.5;
        n >>= 1;
    }
    return result;
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1).
inline double ks_statistic(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double u = sample[i];
        d = std::max(d, (i + 1) / n - u);
        d = std::max(d, u - i / n);
    }
    return d;
}

/// Asymptotic KS p-value with the Stephens small-sample correction.
inline double ks_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    for (int k = 1; k <= 101; ++k) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        p += 2.0 * sign * std::exp(-2.0 * k * k * lambda * lambda);
    }
    return std::min(1.0, std::max(0.0, p));
}

struct GaussHermite {
    std::vector<double> nodes;   // roots of H_n
    std::vector<double> weights; // physicists' weights for weight e^{-x^2}
};

/// Nodes and weights via the orthonormal recurrence and Newton iteration.
inline GaussHermite gauss_hermite(int n) {
    GaussHermite gh;
    gh.nodes.resize(n);
    gh.weights.resize(n);
    const double pim4 = 0.7511255444649425; // pi^{-1/4}
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0) z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1) z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2) z = 1.86 * z - 0.86 * gh.nodes[0];
        else if (i == 3) z = 1.91 * z - 0.91 * gh.nodes[1];
        else z = 2.0 * z - gh.nodes[i - 2];

        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        gh.nodes[i] = z;
        gh.nodes[n - 1 - i] = -z;
        gh.weights[i] = 2.0 / (pp * pp);
        gh.weights[n - 1 - i] = gh.weights[i];
    }
    return gh;
}

/// E[f(Z)] for Z ~ N(0,1) by Gauss-Hermite quadrature.
inline double gauss_hermite_normal_mean(const std::function<double(double)>& f, int n = 200) {
    const GaussHermite gh = gauss_hermite(n);
    const double inv_sqrt_pi = 0.5641895835477563;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += gh.weights[i] * f(std::sqrt(2.0) * gh.nodes[i]);
    return inv_sqrt_pi * acc;
}

/// Central finite-difference gradient of a scalar function of a vector.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> theta,
    double h = 1e-5) {
    std::vector<double> grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double saved = theta[i];
        theta[i] = saved + h;
        const double fp = f(theta);
        theta[i] = saved - h;
        const double fm = f(theta);
        theta[i] = saved;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

} // namespace oracles
