#pragma once

// Linear readout training (ridge regression on the bias-extended state) and the
// evaluation metrics: MSE, NRMSE, delay capacity and memory capacity.

#include "memrc/error.hpp"
#include "memrc/tasks.hpp"
#include "memrc/text.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace memrc {

/// Output weights; the last entry multiplies the constant 1.
struct ReadoutWeights {
    Eigen::VectorXd weights;

    [[nodiscard]] std::size_t state_dimension() const noexcept {
        return weights.size() == 0 ? 0 : static_cast<std::size_t>(weights.size() - 1);
    }
    [[nodiscard]] double bias() const { return weights[weights.size() - 1]; }
};

struct TrainSpec {
    double ridge_coefficient = 1.0e-8;
    std::size_t washout = 100;

    void validate() const {
        if (!(ridge_coefficient >= 0.0)) throw InvalidArgument("ridge_coefficient must be >= 0");
    }
};

/// Train/test protocol: drop `washout` rows, train on the next `train_fraction` of the
/// remainder, test on the rest (contiguous blocks).
struct SplitSpec {
    TrainSpec train{};
    double train_fraction = 0.7;

    struct Ranges {
        std::size_t train_begin, train_end, test_begin, test_end;
    };

    [[nodiscard]] Ranges ranges(std::size_t length) const {
        if (train.washout >= length) throw InvalidArgument("washout must be shorter than the series");
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
            throw InvalidArgument("train_fraction must lie in (0, 1)");
        }
        const auto usable = length - train.washout;
        const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(usable)));
        return Ranges{train.washout, train.washout + n_train, train.washout + n_train, length};
    }
};

namespace detail {

inline void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("series lengths differ");
    if (a.empty()) throw InvalidArgument("series are empty");
}

}  // namespace detail

/// Ridge regression of `target` on [states, 1] over rows washout..T-1.
///
/// Solves (X'X + ridge I) w = X'y with the bias column regularized like the rest.
/// With zero ridge, all-zero columns get weight 0 and any remaining linear dependence
/// is rejected instead of returning garbage.
[[nodiscard]] inline ReadoutWeights train_readout(const Eigen::MatrixXd& states,
                                                  std::span<const double> target,
                                                  const TrainSpec& spec) {
    spec.validate();
    const auto rows = static_cast<std::size_t>(states.rows());
    if (rows != target.size()) throw InvalidArgument("train_readout: states/target length mismatch");
    if (spec.washout >= rows) throw InvalidArgument("train_readout: washout must be < series length");
    const auto n = states.cols();
    const auto used = static_cast<Eigen::Index>(rows - spec.washout);
    if (used <= n + 1) throw InvalidArgument("train_readout: need more samples than weights");

    Eigen::MatrixXd design(used, n + 1);
    design.leftCols(n) = states.bottomRows(used);
    design.col(n).setOnes();
    const Eigen::Map<const Eigen::VectorXd> y(target.data() + spec.washout, used);

    if (spec.ridge_coefficient > 0.0) {
        Eigen::MatrixXd gram = design.transpose() * design;
        gram.diagonal().array() += spec.ridge_coefficient;
        const Eigen::VectorXd rhs = design.transpose() * y;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success) throw SolverError("train_readout: factorization failed");
        ReadoutWeights w{ldlt.solve(rhs)};
        if (!w.weights.allFinite()) throw SolverError("train_readout: non-finite weights");
        return w;
    }

    // Zero ridge: columns that vanish on every training row carry weight 0; the
    // remaining columns must be linearly independent.
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j <= n; ++j) {
        if (design.col(j).cwiseAbs().maxCoeff() > 0.0) active.push_back(j);
    }
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(n + 1);
    if (active.empty()) return ReadoutWeights{weights};
    Eigen::MatrixXd reduced(used, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) reduced.col(static_cast<Eigen::Index>(k)) = design.col(active[k]);
    const Eigen::MatrixXd gram = reduced.transpose() * reduced;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw SolverError("train_readout: factorization failed");
    const auto d = ldlt.vectorD().cwiseAbs();
    if (!(d.minCoeff() > d.maxCoeff() * 1.0e-13 * static_cast<double>(active.size()))) {
        throw SolverError("train_readout: rank-deficient design; use a nonzero ridge_coefficient");
    }
    const Eigen::VectorXd solved = ldlt.solve(reduced.transpose() * y);
    for (std::size_t k = 0; k < active.size(); ++k) weights[active[k]] = solved[static_cast<Eigen::Index>(k)];
    if (!weights.allFinite()) throw SolverError("train_readout: non-finite weights");
    return ReadoutWeights{weights};
}

/// y(t) = W . [x(t), 1] for every row.
[[nodiscard]] inline std::vector<double> predict(const ReadoutWeights& w, const Eigen::MatrixXd& states) {
    if (w.weights.size() != states.cols() + 1) throw InvalidArgument("predict: dimension mismatch");
    const auto n = states.cols();
    Eigen::VectorXd y = states * w.weights.head(n);
    y.array() += w.weights[n];
    return {y.data(), y.data() + y.size()};
}

[[nodiscard]] inline double mse(std::span<const double> y, std::span<const double> y_hat) {
    detail::require_same_length(y, y_hat);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    return acc / static_cast<double>(y.size());
}

/// sqrt(<(y - y_hat)^2> / <y_hat^2>): normalized by the target's mean square.
[[nodiscard]] inline double nrmse(std::span<const double> y, std::span<const double> y_hat) {
    detail::require_same_length(y, y_hat);
    double power = 0.0;
    for (const double v : y_hat) power += v * v;
    power /= static_cast<double>(y_hat.size());
    if (!(power > 0.0)) throw UndefinedMetric("nrmse: target has zero power");
    return std::sqrt(mse(y, y_hat) / power);
}

/// Squared correlation Cov^2(y, y_hat) / (Var y Var y_hat).
[[nodiscard]] inline double delay_capacity(std::span<const double> y, std::span<const double> y_hat) {
    detail::require_same_length(y, y_hat);
    const auto n = static_cast<double>(y.size());
    double my = 0.0;
    double mt = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        my += y[i];
        mt += y_hat[i];
    }
    my /= n;
    mt /= n;
    double cov = 0.0;
    double vy = 0.0;
    double vt = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double a = y[i] - my;
        const double b = y_hat[i] - mt;
        cov += a * b;
        vy += a * a;
        vt += b * b;
    }
    if (!(vy > 0.0) || !(vt > 0.0)) throw UndefinedMetric("delay_capacity: zero variance");
    return std::clamp(cov * cov / (vy * vt), 0.0, 1.0);
}

/// Trains on the train block of `split` and returns predictions and targets for the test block.
struct HeldOut {
    ReadoutWeights weights;
    std::vector<double> prediction;
    std::vector<double> target;
};

[[nodiscard]] inline HeldOut fit_and_test(const Eigen::MatrixXd& states, std::span<const double> target,
                                          const SplitSpec& split) {
    const auto r = split.ranges(static_cast<std::size_t>(states.rows()));
    const auto train_rows = static_cast<Eigen::Index>(r.train_end);
    TrainSpec spec = split.train;
    HeldOut out;
    out.weights = train_readout(states.topRows(train_rows), target.first(r.train_end), spec);
    const auto test_rows = static_cast<Eigen::Index>(r.test_end - r.test_begin);
    if (test_rows < 2) throw InvalidArgument("fit_and_test: test block needs >= 2 rows");
    out.prediction = predict(out.weights, states.middleRows(static_cast<Eigen::Index>(r.test_begin), test_rows));
    out.target.assign(target.begin() + static_cast<std::ptrdiff_t>(r.test_begin), target.end());
    return out;
}

struct MemoryCapacity {
    double total = 0.0;
    std::vector<double> per_delay;  ///< entry phi-1 holds C_phi
};

/// Memory capacity from a precomputed state matrix driven by `input`:
/// for every delay phi = 1..max_delay a separate readout learns u(t - phi), and the
/// held-out squared correlations are summed.
[[nodiscard]] inline MemoryCapacity memory_capacity(const Eigen::MatrixXd& states, const TimeSeries& input,
                                                    const SplitSpec& split, std::size_t max_delay = 10) {
    if (static_cast<std::size_t>(states.rows()) != input.size()) {
        throw InvalidArgument("memory_capacity: states/input length mismatch");
    }
    if (split.train.washout < max_delay) throw InvalidArgument("memory_capacity: washout must cover max_delay");
    MemoryCapacity mc;
    std::vector<double> target(input.size(), 0.0);
    for (std::size_t phi = 1; phi <= max_delay; ++phi) {
        for (std::size_t t = 0; t < input.size(); ++t) target[t] = t >= phi ? input[t - phi] : 0.0;
        const auto held = fit_and_test(states, target, split);
        double c = 0.0;
        try {
            c = delay_capacity(held.prediction, held.target);
        } catch (const UndefinedMetric&) {
            c = 0.0;  // constant prediction reconstructs nothing
        }
        mc.per_delay.push_back(c);
        mc.total += c;
    }
    return mc;
}

/// Same, driving a reservoir through `runner` first.
[[nodiscard]] inline MemoryCapacity memory_capacity(const std::function<Eigen::MatrixXd(const TimeSeries&)>& runner,
                                                    const TimeSeries& input, const SplitSpec& split,
                                                    std::size_t max_delay = 10) {
    return memory_capacity(runner(input), input, split, max_delay);
}

// ---------------------------------------------------------------------------
// Weights file: one value per line, 17 significant digits.
// ---------------------------------------------------------------------------

inline void write_weights(std::ostream& out, const ReadoutWeights& w) {
    for (Eigen::Index i = 0; i < w.weights.size(); ++i) out << text::format_full(w.weights[i]) << '\n';
}

[[nodiscard]] inline ReadoutWeights read_weights(std::istream& in) {
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        const auto body = text::trim(text::strip_comment(line));
        if (!body.empty()) values.push_back(text::parse_double(body));
    }
    if (values.size() < 1) throw InvalidArgument("weights file is empty");
    return ReadoutWeights{Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()))};
}

}  // namespace memrc
