#include "memrc/config.hpp"
#include "memrc/tasks.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

using namespace memrc;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

// Unit triangle wave with zero crossing at t = 0 and peak at t = 1/(4f).
double ideal_triangle(double f, double t) {
    double phase = std::fmod(f * t, 1.0);
    if (phase < 0) phase += 1.0;
    if (phase < 0.25) return 4.0 * phase;
    if (phase < 0.75) return 2.0 - 4.0 * phase;
    return 4.0 * phase - 4.0;
}

double ideal_square(double f, double t) { return std::sin(2.0 * pi * f * t) >= 0.0 ? 1.0 : -1.0; }

// Index of the largest-magnitude bin of a direct DFT, excluding DC.
std::size_t dft_peak(const TimeSeries& s) {
    const auto n = s.size();
    std::size_t best = 1;
    double best_power = -1.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            acc += s[t] * std::polar(1.0, -2.0 * pi * static_cast<double>(k * t) / static_cast<double>(n));
        }
        if (std::norm(acc) > best_power) {
            best_power = std::norm(acc);
            best = k;
        }
    }
    return best;
}

double l2_distance(const TimeSeries& s, double (*ideal)(double, double), double f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) acc += std::pow(s[k] - ideal(f, s.time(k)), 2);
    return std::sqrt(acc / static_cast<double>(s.size()));
}

}  // namespace

TEST_CASE("sine samples and power", "[tasks]") {
    const double f = 20.0;
    const auto s = sine(f, 1.7, 1e-3, 1000);
    CHECK(s[0] == 0.0);
    CHECK(sine(f, 1.7, 1.0 / (4.0 * f) / 10.0, 11)[10] == Approx(1.7).epsilon(1e-12));
    double power = 0.0;
    for (const double x : s.samples) power += x * x;
    power /= static_cast<double>(s.size());
    CHECK(std::abs(power - 1.7 * 1.7 / 2.0) < 0.01 * 1.7 * 1.7 / 2.0);
    CHECK_THROWS_AS(sine(20.0, 1.0, 0.025, 10), InvalidArgument);
    CHECK_THROWS_AS(sine(0.0, 1.0, 1e-3, 10), InvalidArgument);
}

TEST_CASE("second-harmonic task doubles the frequency", "[tasks]") {
    const auto task = hhg_sine_task(20.0, 1e-3, 500);
    task.validate();
    CHECK(task.input.size() == task.target.size());
    const auto in_peak = dft_peak(task.input);
    const auto out_peak = dft_peak(task.target);
    CHECK(in_peak == 10);
    CHECK(out_peak == 2 * in_peak);
    CHECK(TaskConfig{}.frequency == 20.0);
}

TEST_CASE("triangle series matches the ideal wave", "[tasks]") {
    const double f = 20.0;
    const double dt = 1e-5;
    CHECK(triangle_wave(f, dt, 1, 100)[0] == 0.0);
    // The tail past k_max is bounded by (8 / pi^2) / (2 (2 k_max + 1)).
    for (const std::size_t k : {50, 100, 400}) {
        const auto peak = triangle_wave(f, 1.0 / (4.0 * f) / 100.0, 101, k);
        const double tail = 8.0 / (pi * pi) / (2.0 * (2.0 * static_cast<double>(k) + 1.0));
        CHECK(peak[100] < 1.0);
        CHECK(1.0 - peak[100] <= tail);
        if (k >= 400) CHECK(1.0 - peak[100] < 1e-3);
    }
    const auto s = triangle_wave(f, dt, 5000, 100);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(s[i] - ideal_triangle(f, s.time(i))));
    CHECK(worst < 0.01);
    CHECK_THROWS_AS(triangle_wave(f, dt, 10, 0), InvalidArgument);
}

TEST_CASE("square series matches the sign function off the jumps", "[tasks]") {
    const double f = 20.0;
    CHECK(square_wave(f, 1e-5, 1, 200)[0] == 0.0);
    const auto quarter = square_wave(f, 1.0 / (4.0 * f) / 100.0, 101, 200);
    CHECK(std::abs(quarter[100] - 1.0) < 0.02);
    const double dt = 1e-5;
    const std::size_t half = static_cast<std::size_t>(std::llround(0.5 / f / dt));
    const auto s = square_wave(f, dt, 3 * half, 200);
    for (std::size_t i = 0; i + half < s.size(); ++i) REQUIRE(std::abs(s[i + half] + s[i]) < 1e-9);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double phase = std::fmod(f * s.time(i), 0.5);
        if (phase < 0.05 || phase > 0.45) continue;
        worst = std::max(worst, std::abs(s[i] - ideal_square(f, s.time(i))));
    }
    CHECK(worst < 0.02);
}

TEST_CASE("more Fourier terms bring the partial sums closer", "[tasks][property]") {
    const double f = 20.0;
    const double dt = 1.0 / (f * 1000.0);
    double tri_prev = 1e9;
    double sq_prev = 1e9;
    for (const std::size_t k : {1, 2, 4, 8, 16, 32, 64, 128}) {
        const double tri = l2_distance(triangle_wave(f, dt, 2000, k), ideal_triangle, f);
        const double sq = l2_distance(square_wave(f, dt, 2000, k), ideal_square, f);
        CHECK(tri < tri_prev);
        CHECK(sq < sq_prev);
        tri_prev = tri;
        sq_prev = sq;
    }
}

TEST_CASE("harmonic targets share the input sampling", "[tasks]") {
    for (const auto& task : {hhg_sine_task(20.0, 1e-3, 300), hhg_triangle_task(20.0, 1e-3, 300),
                             hhg_square_task(20.0, 1e-3, 300)}) {
        task.validate();
        CHECK(task.input.dt == task.target.dt);
        CHECK(task.input == sine(20.0, 1.0, 1e-3, 300));
    }
}

TEST_CASE("oscillator task basics", "[tasks]") {
    const auto task = mso_task(1e-3, 500);
    CHECK(task.input[0] == 0.0);
    CHECK(mso_task(1e-3, 500, 0.0).target == task.input);
    for (std::size_t k = 0; k + 5 < task.input.size(); ++k) REQUIRE(task.target[k] == Approx(task.input[k + 5]).margin(1e-12));
    const auto seconds = mso_task(1e-3, 10, 5e-3, 1.0);
    CHECK(seconds.input[3] == Approx(mso_value(3e-3, 1.0)));
    CHECK_THROWS_AS(mso_task(0.0, 10), InvalidArgument);
}

TEST_CASE("oscillator wave never repeats within the default window", "[tasks][property]") {
    const TaskConfig defaults;
    const auto s = mso_task(defaults.dt, defaults.length, defaults.horizon, defaults.time_unit).input;
    const auto n = s.size();
    double worst = -1.0;
    for (std::size_t lag = 1; lag <= n / 2; ++lag) {
        double xy = 0.0;
        double xx = 0.0;
        double yy = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) {
            xy += s[t] * s[t + lag];
            xx += s[t] * s[t];
            yy += s[t + lag] * s[t + lag];
        }
        worst = std::max(worst, xy / std::sqrt(xx * yy));
    }
    CHECK(worst < 0.999);
}

TEST_CASE("NARMA-10 matches an independent recurrence bit for bit", "[tasks][oracle]") {
    std::size_t compared = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto u = uniform_series(0.0, 0.5, 3000, seed);
        TimeSeries y;
        try {
            y = narma10(u);
        } catch (const DivergentSequence&) {
            continue;
        }
        const auto ref = testing::narma10_reference(u.samples);
        REQUIRE(y.samples == ref);
        for (std::size_t t = 0; t < 10; ++t) CHECK(y[t] == 0.0);
        ++compared;
    }
    CHECK(compared >= 10);
}

TEST_CASE("NARMA-10 under zero input settles at its fixed point", "[tasks][oracle]") {
    const auto y = narma10(TimeSeries(std::vector<double>(5000, 0.0), 1.0));
    double iterate = 0.0;
    for (int i = 0; i < 100000; ++i) iterate = 0.3 * iterate + 0.5 * iterate * iterate + 0.1;
    const double root = 0.7 - std::sqrt(0.49 - 0.2);
    CHECK(std::abs(iterate - root) < 1e-12);
    CHECK(std::abs(y.samples.back() - root) < 1e-6);
    CHECK(std::abs(root - 0.1615) < 1e-4);
}

TEST_CASE("NARMA-10 reacts to a perturbed input after one step", "[tasks][property]") {
    const auto u = uniform_series(0.0, 0.5, 400, 5);
    const auto y = narma10(u);
    for (const std::size_t s : {50, 123, 300}) {
        auto bumped = u.samples;
        bumped[s] = bumped[s] > 0.25 ? bumped[s] - 0.2 : bumped[s] + 0.2;
        const auto z = narma10(TimeSeries(bumped, u.dt));
        for (std::size_t t = 0; t <= s; ++t) REQUIRE(z[t] == y[t]);
        bool changed = false;
        for (std::size_t t = s + 1; t <= s + 10; ++t) changed = changed || z[t] != y[t];
        CHECK(changed);
        CHECK(z[s + 10] != y[s + 10]);
    }
}

TEST_CASE("NARMA-10 input checks and divergence", "[tasks]") {
    CHECK_THROWS_AS(narma10(TimeSeries({0.1, 0.6}, 1.0)), InvalidArgument);
    try {
        (void)narma10(TimeSeries(std::vector<double>(1000, 0.5), 1.0));
        FAIL("expected divergence");
    } catch (const DivergentSequence& e) {
        CHECK(e.index() >= 10);
        CHECK(e.index() < 1000);
    }
}

TEST_CASE("uniform series range, repeatability and mean", "[tasks][statistics]") {
    const std::size_t n = 20000;
    const auto a = uniform_series(-0.8, 0.8, n, 42);
    CHECK(a == uniform_series(-0.8, 0.8, n, 42));
    CHECK_FALSE(a == uniform_series(-0.8, 0.8, n, 43));
    double sum = 0.0;
    for (const double x : a.samples) {
        REQUIRE(x >= -0.8);
        REQUIRE(x <= 0.8);
        sum += x;
    }
    const double sigma = 1.6 / std::sqrt(12.0);
    CHECK(std::abs(sum / static_cast<double>(n)) < 3.0 * sigma / std::sqrt(static_cast<double>(n)));
    CHECK_THROWS_AS(uniform_series(1.0, 0.0, 5, 1), InvalidArgument);
}

TEST_CASE("series CSV round-trips at full precision", "[tasks][io]") {
    const auto s = uniform_series(-1.0, 1.0, 300, 9, 1e-3);
    std::stringstream io;
    write_series_csv(io, s);
    CHECK(read_series_csv(io) == s);
    std::istringstream bad("t,value\n0,1,2\n");
    CHECK_THROWS_AS(read_series_csv(bad), InvalidArgument);
    std::istringstream empty("# only a comment\n");
    CHECK_THROWS_AS(read_series_csv(empty), InvalidArgument);
}

TEST_CASE("time series rejects invalid samples", "[tasks]") {
    CHECK_THROWS_AS(TimeSeries({1.0, NAN}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(TimeSeries({1.0}, 0.0), InvalidArgument);
    const TaskInstance mismatched{TimeSeries({1.0, 2.0}, 1.0), TimeSeries({1.0}, 1.0), "x"};
    CHECK_THROWS_AS(mismatched.validate(), InvalidArgument);
}
