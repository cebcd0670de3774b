#include "memrc/learn.hpp"
#include "support.hpp"

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace memrc;
using Catch::Approx;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = 2.0 * uniform01(rng) - 1.0;
    }
    return m;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = 2.0 * uniform01(rng) - 1.0;
    return v;
}

double training_residual(const Eigen::MatrixXd& x, const std::vector<double>& y, const TrainSpec& spec) {
    const auto w = train_readout(x, y, spec);
    const auto p = predict(w, x);
    double acc = 0.0;
    for (std::size_t t = spec.washout; t < y.size(); ++t) acc += (p[t] - y[t]) * (p[t] - y[t]);
    return acc;
}

}  // namespace

TEST_CASE("target in the span is recovered exactly", "[learn]") {
    const auto y = random_vector(300, 1);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(300, 4);
    for (Eigen::Index t = 0; t < 300; ++t) x(t, 0) = y[static_cast<std::size_t>(t)];
    x.col(1) = random_matrix(300, 1, 2);
    const auto w = train_readout(x, y, TrainSpec{0.0, 50});
    CHECK(w.state_dimension() == 4);
    CHECK(w.weights[0] == Approx(1.0).margin(1e-10));
    for (Eigen::Index k = 1; k < w.weights.size(); ++k) CHECK(std::abs(w.weights[k]) < 1e-10);
    const auto p = predict(w, x);
    for (std::size_t t = 0; t < y.size(); ++t) REQUIRE(std::abs(p[t] - y[t]) < 1e-8);
}

TEST_CASE("constant target is carried by the bias", "[learn]") {
    const std::vector<double> y(40, 2.5);
    const auto w = train_readout(Eigen::MatrixXd::Zero(40, 3), y, TrainSpec{0.0, 5});
    CHECK(w.bias() == Approx(2.5).epsilon(1e-14));
    CHECK(w.weights.head(3).cwiseAbs().maxCoeff() == 0.0);
    const auto r = train_readout(Eigen::MatrixXd::Zero(40, 3), y, TrainSpec{1e-12, 5});
    CHECK(r.bias() == Approx(2.5).epsilon(1e-9));
}

TEST_CASE("collinear columns without ridge are rejected", "[learn]") {
    auto x = random_matrix(50, 3, 30);
    x.col(2) = 2.0 * x.col(0) - x.col(1);
    const auto y = random_vector(50, 31);
    CHECK_THROWS_AS(train_readout(x, y, TrainSpec{0.0, 5}), SolverError);
    CHECK_NOTHROW(train_readout(x, y, TrainSpec{1e-6, 5}));
}

TEST_CASE("ridge weights match a pseudoinverse oracle", "[learn][oracle]") {
    const auto x = random_matrix(200, 8, 3);
    Eigen::VectorXd truth(9);
    truth << 0.5, -1.2, 2.0, 0.0, 0.3, -0.7, 1.1, 0.25, -0.4;
    std::vector<double> y(200);
    Rng rng(4);
    for (Eigen::Index t = 0; t < 200; ++t) {
        y[static_cast<std::size_t>(t)] = x.row(t).dot(truth.head(8)) + truth[8] + 0.01 * (uniform01(rng) - 0.5);
    }
    const auto w = train_readout(x, y, TrainSpec{1e-12, 0});
    Eigen::MatrixXd design(200, 9);
    design.leftCols(8) = x;
    design.col(8).setOnes();
    const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(y.data(), 200);
    const Eigen::VectorXd oracle = design.completeOrthogonalDecomposition().pseudoInverse() * target;
    CHECK((w.weights - oracle).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("training rejects bad shapes", "[learn]") {
    const auto x = random_matrix(20, 3, 5);
    const auto y = random_vector(20, 6);
    CHECK_THROWS_AS(train_readout(x, random_vector(19, 6), TrainSpec{}), InvalidArgument);
    CHECK_THROWS_AS(train_readout(x, y, TrainSpec{1e-8, 20}), InvalidArgument);
    CHECK_THROWS_AS(train_readout(x, y, TrainSpec{1e-8, 16}), InvalidArgument);
    CHECK_THROWS_AS(train_readout(x, y, TrainSpec{-1.0, 0}), InvalidArgument);
}

TEST_CASE("prediction of trivial weights", "[learn]") {
    const auto x = random_matrix(30, 4, 7);
    const auto zero = predict(ReadoutWeights{Eigen::VectorXd::Zero(5)}, x);
    CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));
    Eigen::VectorXd bias = Eigen::VectorXd::Zero(5);
    bias[4] = -1.5;
    const auto c = predict(ReadoutWeights{bias}, x);
    CHECK(std::all_of(c.begin(), c.end(), [](double v) { return v == -1.5; }));
    CHECK_THROWS_AS(predict(ReadoutWeights{Eigen::VectorXd::Zero(4)}, x), InvalidArgument);
}

TEST_CASE("mse identities and a summation oracle", "[learn][metric]") {
    const auto a = random_vector(1000, 8);
    const auto b = random_vector(1000, 9);
    CHECK(mse(a, a) == 0.0);
    CHECK(mse(std::vector<double>(5, 0.0), std::vector<double>(5, 2.0)) == 4.0);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<long double>(a[i] - b[i]) * (a[i] - b[i]);
    CHECK(std::abs(mse(a, b) - static_cast<double>(acc / 1000.0L)) < 1e-12);
    CHECK_THROWS_AS(mse(a, std::vector<double>(3, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("nrmse identities", "[learn][metric]") {
    const auto y = random_vector(500, 10);
    const auto target = random_vector(500, 11);
    CHECK(nrmse(target, target) == 0.0);
    CHECK(nrmse(std::vector<double>(500, 0.0), target) == Approx(1.0).epsilon(1e-14));
    std::vector<double> ys(y);
    std::vector<double> ts(target);
    for (auto& v : ys) v *= -3.7;
    for (auto& v : ts) v *= -3.7;
    CHECK(nrmse(ys, ts) == Approx(nrmse(y, target)).epsilon(1e-12));
    CHECK_THROWS_AS(nrmse(y, std::vector<double>(500, 0.0)), UndefinedMetric);
}

TEST_CASE("errors do not depend on time order", "[learn][metric]") {
    auto y = random_vector(400, 12);
    auto t = random_vector(400, 13);
    const double m = mse(y, t);
    const double n = nrmse(y, t);
    std::vector<std::size_t> order(400);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), Rng(14));
    std::vector<double> ys(400);
    std::vector<double> ts(400);
    for (std::size_t i = 0; i < 400; ++i) {
        ys[i] = y[order[i]];
        ts[i] = t[order[i]];
    }
    CHECK(mse(ys, ts) == Approx(m).epsilon(1e-14));
    CHECK(nrmse(ys, ts) == Approx(n).epsilon(1e-14));
}

TEST_CASE("delay capacity identities", "[learn][metric]") {
    const auto y = random_vector(300, 15);
    CHECK(delay_capacity(y, y) == Approx(1.0).epsilon(1e-14));
    std::vector<double> affine(y);
    for (auto& v : affine) v = -2.0 * v + 7.0;
    CHECK(delay_capacity(affine, y) == Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(delay_capacity(std::vector<double>(300, 1.0), y), UndefinedMetric);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto a = random_vector(10000, 100 + seed);
        const auto b = random_vector(10000, 200 + seed);
        const double c = delay_capacity(a, b);
        CHECK(c >= 0.0);
        CHECK(c < 0.01);
    }
}

TEST_CASE("a perfect delay line has memory capacity ten", "[learn][oracle]") {
    const auto u = uniform_series(-0.8, 0.8, 2200, 16);
    const auto x = testing::delay_line_states(u, 10);
    SplitSpec split;
    split.train.washout = 200;
    const auto mc = memory_capacity(x, u, split);
    CHECK(std::abs(mc.total - 10.0) < 0.05);
    REQUIRE(mc.per_delay.size() == 10);
    for (const double c : mc.per_delay) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("white-noise states carry almost no memory", "[learn][statistics]") {
    const auto u = uniform_series(-0.8, 0.8, 2200, 17);
    const auto x = random_matrix(2200, 20, 18);
    SplitSpec split;
    split.train.washout = 200;
    const auto mc = memory_capacity(x, u, split);
    CHECK(mc.total < 0.5);
    CHECK(mc.total / 20.0 >= 0.0);
    CHECK(mc.total / 20.0 <= 1.0);
}

TEST_CASE("memory capacity through a runner matches the matrix form", "[learn]") {
    const auto u = uniform_series(-0.8, 0.8, 800, 19);
    SplitSpec split;
    split.train.washout = 100;
    const auto direct = memory_capacity(testing::delay_line_states(u, 4), u, split);
    const auto via = memory_capacity([](const TimeSeries& s) { return testing::delay_line_states(s, 4); }, u, split);
    CHECK(direct.total == via.total);
    split.train.washout = 5;
    CHECK_THROWS_AS(memory_capacity(testing::delay_line_states(u, 4), u, split), InvalidArgument);
}

TEST_CASE("training residual grows with the ridge coefficient", "[learn][property]") {
    const auto x = random_matrix(300, 12, 20);
    const auto y = random_vector(300, 21);
    double prev = training_residual(x, y, TrainSpec{0.0, 20});
    for (const double ridge : {1e-8, 1e-4, 1e-2, 1.0, 10.0, 100.0, 1e4}) {
        const double r = training_residual(x, y, TrainSpec{ridge, 20});
        CHECK(r >= prev * (1.0 - 1e-12));
        prev = r;
    }
}

TEST_CASE("held-out metrics see test targets only", "[learn][property]") {
    const auto u = uniform_series(-1.0, 1.0, 1000, 22);
    const auto x = testing::delay_line_states(u, 6);
    std::vector<double> y(1000);
    for (std::size_t t = 0; t < 1000; ++t) y[t] = t >= 2 ? 0.7 * u[t - 2] : 0.0;
    SplitSpec split;
    split.train.washout = 100;
    const auto r = split.ranges(1000);
    CHECK(r.train_begin == 100);
    CHECK(r.train_end == 730);
    CHECK(r.test_begin == 730);
    CHECK(r.test_end == 1000);

    const auto base = fit_and_test(x, y, split);
    CHECK(base.prediction.size() == 270);
    const double clean = nrmse(base.prediction, base.target);

    auto corrupt_test = y;
    for (std::size_t t = r.test_begin; t < r.test_end; ++t) corrupt_test[t] += 0.3;
    const auto moved = fit_and_test(x, corrupt_test, split);
    CHECK(nrmse(moved.prediction, moved.target) != clean);
    CHECK(moved.weights.weights == base.weights.weights);

    auto corrupt_washout = y;
    for (std::size_t t = 0; t < r.train_begin; ++t) corrupt_washout[t] = 99.0;
    const auto same = fit_and_test(x, corrupt_washout, split);
    CHECK(same.prediction == base.prediction);
    CHECK(split.ranges(1000).test_begin == r.test_begin);
}

TEST_CASE("weights file round-trips", "[learn][io]") {
    Eigen::VectorXd w(4);
    w << 1.0 / 3.0, -2e-17, 12345.678901234567, 0.0;
    std::stringstream io;
    write_weights(io, ReadoutWeights{w});
    CHECK(read_weights(io).weights == w);
    std::istringstream empty("# nothing\n");
    CHECK_THROWS_AS(read_weights(empty), InvalidArgument);
}
