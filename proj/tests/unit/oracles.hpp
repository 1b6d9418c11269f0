#pragma once

// Independent reference values used by the unit tests. Nothing here calls
// the library under test.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

// erf through the positive series 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!.
inline long double erf_series(long double x) {
    const long double x2 = x * x;
    long double term = x, sum = x;
    for (int n = 1; n < 400; ++n) {
        term *= 2.0L * x2 / (2.0L * n + 1.0L);
        sum += term;
        if (term < 1e-22L * sum) break;
    }
    return 2.0L / std::sqrt(std::numbers::pi_v<long double>) * std::exp(-x2) * sum;
}

// erfc for x > 0 from its continued fraction, evaluated with modified Lentz.
inline long double erfc_cf(long double x) {
    const long double tiny = 1e-300L;
    long double f = x, c = x, d = 0.0L;
    for (int k = 1; k < 2000; ++k) {
        const long double a = 0.5L * k;
        d = x + a * d;
        c = x + a / c;
        if (std::fabs(d) < tiny) d = tiny;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0L / d;
        const long double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0L) < 1e-20L) break;
    }
    return std::exp(-x * x) / (std::sqrt(std::numbers::pi_v<long double>) * f);
}

inline double erf_ref(double x) {
    const long double ax = std::fabs(static_cast<long double>(x));
    const long double v = ax < 2.5L ? erf_series(ax) : 1.0L - erfc_cf(ax);
    return static_cast<double>(x < 0 ? -v : v);
}

inline double erfc_ref(double x) {
    if (x < 0) return 2.0 - erfc_ref(-x);
    const long double lx = x;
    return static_cast<double>(lx < 2.5L ? 1.0L - erf_series(lx) : erfc_cf(lx));
}

// Rank-one closed forms in the u variable.
inline double e1(double u) { return erf_ref(std::sqrt(std::numbers::pi) * u); }
inline double m1(double u) {
    const double s = u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
    return -s * erfc_ref(std::sqrt(std::numbers::pi) * std::fabs(u));
}

inline Eigen::MatrixXd rotation(std::mt19937_64& gen, int n) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = nd(gen);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
}

}  // namespace oracle
