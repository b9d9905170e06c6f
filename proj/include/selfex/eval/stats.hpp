/**
 * @file stats.hpp
 * @brief Student-t distribution and the paired t-test.
 */

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace selfex::eval {

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iterations = 20000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-tailed tail mass P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_tailed_p(double t, double df) {
    if (!(df > 0.0)) throw std::domain_error("degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

/// P(T <= t) for Student's t with df degrees of freedom.
inline double student_t_cdf(double t, double df) {
    const double tail = 0.5 * student_t_two_tailed_p(t, df);
    return t >= 0.0 ? 1.0 - tail : tail;
}

struct TTestResult {
    std::optional<double> t;  // empty when the differences have no variance
    double df = 0.0;
    std::optional<double> p;  // two-tailed
    double mean_difference = 0.0;

    bool no_variance() const noexcept { return !t.has_value(); }
};

/// Two-tailed paired t-test on xs[i] - ys[i]. Differences that are all
/// identical give a no-variance result with t and p undefined.
inline TTestResult paired_t_test(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("paired samples differ in length");
    if (xs.size() < 2) throw std::invalid_argument("paired t-test needs at least two pairs");

    const std::size_t n = xs.size();
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = xs[i] - ys[i];

    TTestResult r;
    r.df = static_cast<double>(n - 1);
    double mean = 0.0;
    for (double d : diff) mean += d;
    mean /= static_cast<double>(n);
    r.mean_difference = mean;

    bool constant = true;
    for (double d : diff) constant = constant && d == diff.front();
    double ss = 0.0;
    for (double d : diff) ss += (d - mean) * (d - mean);
    if (constant || ss == 0.0) return r;

    const double sd = std::sqrt(ss / r.df);
    const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.t = t;
    r.p = student_t_two_tailed_p(t, r.df);
    return r;
}

}  // namespace selfex::eval
