#pragma once

// Statistical machinery for the experiment harness: sample moments, z-scores,
// Beta CDFs and the two-sided Kolmogorov-Smirnov test with the asymptotic
// p-value.

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rwde {

struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double standard_error = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("empty sample");
    SampleStats s;
    s.n = xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    const double var = s.n > 1 ? ss / static_cast<double>(s.n - 1) : 0.0;
    s.standard_error = std::sqrt(var / static_cast<double>(s.n));
    return s;
}

inline SampleStats bernoulli_stats(std::uint64_t successes, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("empty sample");
    SampleStats s;
    s.n = n;
    s.mean = static_cast<double>(successes) / static_cast<double>(n);
    s.standard_error = std::sqrt(s.mean * (1.0 - s.mean) / static_cast<double>(n));
    return s;
}

inline double z_score(double estimate, double target, double se) {
    if (se <= 0.0) return estimate == target ? 0.0 : std::numeric_limits<double>::infinity();
    return (estimate - target) / se;
}

struct BetaDist {
    double a = 1.0;
    double b = 1.0;

    double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        if (a == 1.0 && b == 1.0) return x;
        return boost::math::ibeta(a, b, x);
    }

    double mean() const { return a / (a + b); }
};

// Asymptotic survival function of the Kolmogorov distribution.
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12 * std::abs(sum) + 1e-300) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sided KS test of a sample against a continuous CDF.
inline KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks test: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    const double sqrt_n = std::sqrt(n);
    const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    return {d, kolmogorov_q(lambda)};
}

inline KsResult ks_test_beta(const std::vector<double>& sample, const BetaDist& beta) {
    for (double x : sample)
        if (x < 0.0 || x > 1.0)
            throw std::invalid_argument("ks test: sample value outside [0,1]");
    return ks_test(sample, [&beta](double x) { return beta.cdf(x); });
}

}  // namespace rwde
