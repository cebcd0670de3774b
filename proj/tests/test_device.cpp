#include "memrc/device.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace memrc;
using Catch::Approx;

namespace {

// Classical RK4 on dw/dt = lambda sinh(eta v) - w / tau, unclamped.
double rk4_state(const DeviceParams& p, double w, double v, double t_end, double h) {
    const auto f = [&](double x) { return p.lambda_rate * std::sinh(p.eta * v) - x / p.tau; };
    const auto steps = static_cast<int>(std::llround(t_end / h));
    for (int i = 0; i < steps; ++i) {
        const double k1 = f(w);
        const double k2 = f(w + 0.5 * h * k1);
        const double k3 = f(w + 0.5 * h * k2);
        const double k4 = f(w + h * k3);
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return w;
}

}  // namespace

TEST_CASE("current vanishes at zero bias", "[device]") {
    const DeviceParams p;
    for (const double w : {0.0, 0.25, 0.5, 1.0}) CHECK(current(p, w, 0.0) == 0.0);
}

TEST_CASE("fully switched device is odd in voltage", "[device]") {
    const DeviceParams p;
    for (const double v : {0.01, 0.3, 1.0, 2.7}) CHECK(current(p, 1.0, -v) == -current(p, 1.0, v));
}

TEST_CASE("OFF branch matches its first-order expansion", "[device]") {
    const DeviceParams p;
    for (const double v : {1e-4, -5e-3, 9e-3}) {
        const double linear = p.sigma * p.beta * v;
        CHECK(std::abs(current(p, 0.0, v) - linear) < 0.01 * std::abs(linear));
    }
}

TEST_CASE("current matches the two-branch formula", "[device]") {
    DeviceParams p;
    p.beta = 3.0;
    for (const double w : {0.0, 0.3, 1.0}) {
        for (const double v : {-2.0, -0.4, 0.2, 1.7}) {
            const double expect = (1 - w) * p.sigma * (1 - std::exp(-p.beta * v)) + w * p.gamma * std::sinh(p.delta * v);
            CHECK(current(p, w, v) == Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("current is non-decreasing in voltage", "[device][property]") {
    const DeviceParams p;
    for (const double w : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        double prev = current(p, w, -6.0);
        for (double v = -6.0; v <= 6.0; v += 0.01) {
            const double i = current(p, w, v);
            CHECK(i >= prev);
            prev = i;
        }
    }
}

TEST_CASE("differential conductance matches a central difference", "[device]") {
    const DeviceParams p;
    for (const double w : {0.0, 0.4, 1.0}) {
        for (const double v : {-1.5, -0.2, 0.0, 0.7, 2.0}) {
            const double h = 1e-6;
            const double fd = (current(p, w, v + h) - current(p, w, v - h)) / (2 * h);
            CHECK(differential_conductance(p, w, v) == Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("non-finite inputs are rejected", "[device]") {
    const DeviceParams p;
    CHECK_THROWS_AS(current(p, 0.5, NAN), InvalidArgument);
    CHECK_THROWS_AS(current(p, INFINITY, 0.1), InvalidArgument);
    CHECK_THROWS_AS(state_derivative(p, 0.5, INFINITY), InvalidArgument);
    CHECK_THROWS_AS(current(p, 1.5, 0.1), InvalidArgument);
}

TEST_CASE("state derivative at rest", "[device]") {
    const DeviceParams p;
    CHECK(state_derivative(p, 0.3, 0.0) == Approx(-0.3 / p.tau));
    CHECK(state_derivative(p, 0.0, 0.0) == 0.0);
}

TEST_CASE("constant drive settles at the clamped equilibrium", "[device]") {
    const DeviceParams p;
    for (const double v : {0.8, 1.0, 1.1, 2.0, -1.0}) {
        DeviceState s;
        for (int i = 0; i < 20000; ++i) s = step_device(p, s, v, p.tau / 200);
        const double expect = std::clamp(p.tau * p.lambda_rate * std::sinh(p.eta * v), 0.0, 1.0);
        CHECK(std::abs(s.w - expect) < 1e-6);
        CHECK(equilibrium_state(p, v) == Approx(expect).margin(1e-15));
    }
}

TEST_CASE("step_device edge cases", "[device]") {
    const DeviceParams p;
    CHECK(step_device(p, DeviceState{0.42}, 1.3, 0.0).w == 0.42);
    CHECK(step_device(p, DeviceState{0.0}, 0.0, 0.5).w == 0.0);
    CHECK_THROWS_AS(step_device(p, DeviceState{0.1}, 0.0, -1e-3), InvalidArgument);
    CHECK(step_device(p, DeviceState{0.5}, 50.0, 1.0).w == 1.0);
}

TEST_CASE("explicit Euler agrees with an RK4 oracle", "[device][oracle]") {
    const DeviceParams p;
    for (const double v : {0.9, 1.0, 1.05}) {
        DeviceState s;
        const double h = p.tau / 100;
        for (int i = 0; i < 400; ++i) s = step_device(p, s, v, h);
        const double oracle = rk4_state(p, 0.0, v, 1.0, 1e-5);
        REQUIRE(oracle < 1.0);
        CHECK(std::abs(s.w - oracle) < 1e-4);
    }
}

TEST_CASE("state stays in the unit interval under random drive", "[device][property]") {
    const DeviceParams p;
    std::uint64_t x = 12345;
    DeviceState s;
    for (int i = 0; i < 100000; ++i) {
        x = x * 6364136223846793005ULL + 1442695040888963407ULL;
        const double v = (static_cast<double>(x >> 11) * 0x1.0p-53 - 0.5) * 8.0;
        const double dt = static_cast<double>((x >> 3) & 0xff) * 1e-3;
        s = step_device(p, s, v, dt);
        REQUIRE(s.w >= 0.0);
        REQUIRE(s.w <= 1.0);
    }
}

TEST_CASE("state decays below one percent after five time constants", "[device][property]") {
    const DeviceParams p;
    DeviceState s{0.8};
    const double h = p.tau / 1000;
    for (int i = 0; i < 5000; ++i) s = step_device(p, s, 0.0, h);
    CHECK(s.w < 0.01 * 0.8);
}

TEST_CASE("small-signal conductance interpolates linearly", "[device]") {
    const DeviceParams p;
    CHECK(small_signal_conductance(p, 0.0) == Approx(p.sigma * p.beta));
    CHECK(small_signal_conductance(p, 1.0) == Approx(p.gamma * p.delta));
    CHECK(small_signal_conductance(p, 0.5) ==
          Approx(0.5 * (small_signal_conductance(p, 0.0) + small_signal_conductance(p, 1.0))));
    CHECK(small_signal_conductance(p, 0.3) == Approx(differential_conductance(p, 0.3, 0.0)));
}

TEST_CASE("default device has a switching threshold between 1.0 V and 1.5 V", "[device][property]") {
    const DeviceParams p;
    double prev = -1.0;
    for (double a = 0.1; a <= 1.55; a += 0.05) {
        const double e = switching_excursion(p, a);
        CHECK(e > prev);
        prev = e;
    }
    const double low = switching_excursion(p, 1.0);
    const double high = switching_excursion(p, 1.5);
    CHECK(low < 0.01 * high);
    CHECK(high > 0.9);
    CHECK(low < 0.01);
}

TEST_CASE("device parameter file round-trips", "[device][io]") {
    DeviceParams p;
    p.sigma = 3.25e-7;
    p.tau = 0.1 / 3.0;
    std::stringstream io;
    write_device_params(io, p);
    CHECK(read_device_params(io) == p);
}

TEST_CASE("device parameter file rejects bad input", "[device][io]") {
    std::istringstream missing("sigma = 1\nbeta = 1\n");
    CHECK_THROWS_AS(read_device_params(missing), InvalidArgument);
    std::istringstream unknown("sigma = 1\nbeta = 1\ngamma = 1\ndelta = 1\nlambda_rate = 1\neta = 1\ntau = 1\nrho = 2\n");
    CHECK_THROWS_AS(read_device_params(unknown), InvalidArgument);
    std::istringstream negative("sigma = -1\nbeta = 1\ngamma = 1\ndelta = 1\nlambda_rate = 1\neta = 1\ntau = 1\n");
    CHECK_THROWS_AS(read_device_params(negative), InvalidArgument);
    CHECK_THROWS_AS(DeviceParams{}.get("rho"), InvalidArgument);
}

TEST_CASE("shipped default parameter file matches the built-in defaults", "[device][io]") {
    CHECK(load_device_params(MEMRC_CONFIG_DIR "/default_device.params") == DeviceParams{});
}
