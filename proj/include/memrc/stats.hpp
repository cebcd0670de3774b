#pragma once

// Summary statistics for trial aggregation and the exact paired Wilcoxon
// signed-rank test used to compare reservoir sizes.

#include "memrc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace memrc::stats {

[[nodiscard]] inline double mean(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("mean of an empty sample");
    double acc = 0.0;
    for (const double v : x) acc += v;
    return acc / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
[[nodiscard]] inline double stdev(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("stdev of an empty sample");
    if (x.size() == 1) return 0.0;
    const double m = mean(x);
    double acc = 0.0;
    for (const double v : x) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

/// Ranks 1..n of |values| with ties sharing their average rank.
[[nodiscard]] inline std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

struct WilcoxonResult {
    double w_plus = 0.0;     ///< rank sum of the positive differences
    std::size_t n = 0;       ///< pairs with a nonzero difference
    double p_value = 1.0;    ///< one-sided: P(W+ >= observed) under the null
};

/// Exact one-sided signed-rank test of "a tends to exceed b" on paired samples.
///
/// Zero differences are dropped; tied magnitudes get average ranks and the null
/// distribution is enumerated over those same ranks, so ties stay exact.
[[nodiscard]] inline WilcoxonResult wilcoxon_greater(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("wilcoxon: samples must be paired");
    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (!std::isfinite(d)) throw InvalidArgument("wilcoxon: non-finite difference");
        if (d != 0.0) diff.push_back(d);
    }
    WilcoxonResult result;
    result.n = diff.size();
    if (diff.empty()) return result;

    std::vector<double> magnitude(diff.size());
    for (std::size_t i = 0; i < diff.size(); ++i) magnitude[i] = std::abs(diff[i]);
    const auto ranks = average_ranks(magnitude);

    // Average ranks are multiples of 1/2, so doubled ranks are integers.
    std::vector<std::size_t> doubled(ranks.size());
    std::size_t total = 0;
    std::size_t observed = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
        total += doubled[i];
        if (diff[i] > 0.0) observed += doubled[i];
    }
    result.w_plus = 0.5 * static_cast<double>(observed);

    // count[s] = number of sign assignments whose doubled positive rank sum is s.
    std::vector<double> count(total + 1, 0.0);
    count[0] = 1.0;
    for (const auto r : doubled) {
        for (std::size_t s = total; s >= r; --s) {
            count[s] += count[s - r];
            if (s == r) break;
        }
    }
    double tail = 0.0;
    for (std::size_t s = observed; s <= total; ++s) tail += count[s];
    result.p_value = std::min(1.0, tail / std::ldexp(1.0, static_cast<int>(doubled.size())));
    return result;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least-squares line y = slope * x + intercept.
[[nodiscard]] inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("fit_line: length mismatch");
    if (x.size() < 2) throw InvalidArgument("fit_line: need at least two points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw UndefinedMetric("fit_line: x has zero spread");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

}  // namespace memrc::stats
