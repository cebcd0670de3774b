#pragma once

// Benchmark signals: harmonic-generation inputs and targets, the superimposed
// oscillator wave, NARMA-10, and uniform random drive sequences.

#include "memrc/error.hpp"
#include "memrc/seed.hpp"
#include "memrc/text.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace memrc {

/// Uniformly sampled scalar signal; sample k sits at t = k * dt.
struct TimeSeries {
    std::vector<double> samples;
    double dt = 1.0;

    TimeSeries() = default;
    TimeSeries(std::vector<double> s, double sample_dt) : samples(std::move(s)), dt(sample_dt) {
        validate();
    }

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
    [[nodiscard]] double operator[](std::size_t i) const { return samples[i]; }
    [[nodiscard]] double time(std::size_t i) const noexcept { return static_cast<double>(i) * dt; }

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("TimeSeries: dt must be > 0");
        for (const double s : samples) {
            if (!std::isfinite(s)) throw InvalidArgument("TimeSeries: non-finite sample");
        }
    }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

struct TaskInstance {
    TimeSeries input;
    TimeSeries target;
    std::string name;

    void validate() const {
        if (input.size() != target.size() || input.dt != target.dt) {
            throw InvalidArgument("task '" + name + "': input and target must share length and dt");
        }
    }
};

namespace detail {

inline void require_sampling(double f, double dt, std::size_t n) {
    if (!(f > 0.0)) throw InvalidArgument("frequency must be > 0");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
    if (!(dt < 0.5 / f)) throw InvalidArgument("dt must be below the Nyquist interval 1/(2f)");
    if (n == 0) throw InvalidArgument("need at least one sample");
}

}  // namespace detail

[[nodiscard]] inline TimeSeries sine(double f, double amplitude, double dt, std::size_t n,
                                     double phase = 0.0) {
    detail::require_sampling(f, dt, n);
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) {
        s[k] = amplitude * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(k) * dt + phase);
    }
    return TimeSeries(std::move(s), dt);
}

/// Fourier partial sum of the unit triangle wave, terms k = 0..k_max.
[[nodiscard]] inline TimeSeries triangle_wave(double f, double dt, std::size_t n, std::size_t k_max = 100) {
    detail::require_sampling(f, dt, n);
    if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
    constexpr double pi = std::numbers::pi;
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        double acc = 0.0;
        for (std::size_t k = 0; k <= k_max; ++k) {
            const double h = static_cast<double>(2 * k + 1);
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            acc += sign * std::sin(2.0 * pi * h * f * t) / (h * h);
        }
        s[i] = 8.0 / (pi * pi) * acc;
    }
    return TimeSeries(std::move(s), dt);
}

/// Fourier partial sum of the unit square wave, terms k = 1..k_max.
[[nodiscard]] inline TimeSeries square_wave(double f, double dt, std::size_t n, std::size_t k_max = 200) {
    detail::require_sampling(f, dt, n);
    if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
    constexpr double pi = std::numbers::pi;
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        double acc = 0.0;
        for (std::size_t k = 1; k <= k_max; ++k) {
            const double h = static_cast<double>(2 * k - 1);
            acc += std::sin(2.0 * pi * h * f * t) / h;
        }
        s[i] = 4.0 / pi * acc;
    }
    return TimeSeries(std::move(s), dt);
}

/// Unit sine at f in, unit sine at 2f out.
[[nodiscard]] inline TaskInstance hhg_sine_task(double f, double dt, std::size_t n) {
    return TaskInstance{sine(f, 1.0, dt, n), sine(2.0 * f, 1.0, dt, n), "hhg_sine"};
}

[[nodiscard]] inline TaskInstance hhg_triangle_task(double f, double dt, std::size_t n,
                                                    std::size_t k_max = 100) {
    return TaskInstance{sine(f, 1.0, dt, n), triangle_wave(f, dt, n, k_max), "hhg_triangle"};
}

[[nodiscard]] inline TaskInstance hhg_square_task(double f, double dt, std::size_t n,
                                                  std::size_t k_max = 200) {
    return TaskInstance{sine(f, 1.0, dt, n), square_wave(f, dt, n, k_max), "hhg_square"};
}

/// sin(0.2 s) + sin(0.311 s) + sin(0.42 s) with s = t / time_unit.
[[nodiscard]] inline double mso_value(double t, double time_unit) {
    const double s = t / time_unit;
    return std::sin(0.2 * s) + std::sin(0.311 * s) + std::sin(0.42 * s);
}

/// Superimposed-oscillator prediction: input is the wave at t, target the wave at
/// t + horizon. `time_unit` is the duration of one unit of the oscillator argument;
/// the default ties it to dt so the argument counts samples.
[[nodiscard]] inline TaskInstance mso_task(double dt, std::size_t n, double horizon = 5.0e-3,
                                           double time_unit = 0.0) {
    if (!(dt > 0.0)) throw InvalidArgument("mso_task: dt must be > 0");
    if (!(horizon >= 0.0)) throw InvalidArgument("mso_task: horizon must be >= 0");
    if (n == 0) throw InvalidArgument("mso_task: need at least one sample");
    const double unit = time_unit > 0.0 ? time_unit : dt;
    std::vector<double> in(n);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        in[k] = mso_value(t, unit);
        out[k] = mso_value(t + horizon, unit);
    }
    return TaskInstance{TimeSeries(std::move(in), dt), TimeSeries(std::move(out), dt), "mso"};
}

/// NARMA-10 response to `u`:
///   y_t = 0.3 y_{t-1} + 0.05 y_{t-1} sum_{i=1..10} y_{t-i} + 1.5 u_{t-10} u_{t-1} + 0.1
/// with y_0 .. y_9 = 0. Throws DivergentSequence once |y_t| exceeds 10.
[[nodiscard]] inline TimeSeries narma10(const TimeSeries& u) {
    constexpr std::size_t order = 10;
    for (const double x : u.samples) {
        if (!(x >= 0.0 && x <= 0.5)) throw InvalidArgument("narma10: inputs must lie in [0, 0.5]");
    }
    std::vector<double> y(u.size(), 0.0);
    for (std::size_t t = order; t < u.size(); ++t) {
        double window = 0.0;
        for (std::size_t i = 1; i <= order; ++i) window += y[t - i];
        y[t] = 0.3 * y[t - 1] + 0.05 * y[t - 1] * window + 1.5 * u[t - order] * u[t - 1] + 0.1;
        if (!(std::abs(y[t]) <= 10.0)) {
            throw DivergentSequence("narma10 diverged at index " + std::to_string(t), t);
        }
    }
    return TimeSeries(std::move(y), u.dt);
}

/// I.i.d. uniform samples on [low, high].
[[nodiscard]] inline TimeSeries uniform_series(double low, double high, std::size_t n,
                                               std::uint64_t seed, double dt = 1.0e-3) {
    if (!(high >= low)) throw InvalidArgument("uniform_series: need low <= high");
    Rng rng(seed);
    std::vector<double> s(n);
    for (auto& x : s) x = low + (high - low) * uniform01(rng);
    return TimeSeries(std::move(s), dt);
}

// ---------------------------------------------------------------------------
// Two-column CSV (`t,value`) with 17 significant digits.
// ---------------------------------------------------------------------------

inline void write_series_csv(std::ostream& out, const TimeSeries& series) {
    out << "t,value\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        out << text::format_full(series.time(k)) << ',' << text::format_full(series[k]) << '\n';
    }
}

/// Reads `t,value` rows. dt is taken from the first two time stamps (1 for a single row).
/// Lines starting with `#` and a non-numeric header row are skipped.
[[nodiscard]] inline TimeSeries read_series_csv(std::istream& in) {
    std::vector<double> t;
    std::vector<double> v;
    std::string line;
    while (std::getline(in, line)) {
        const auto body = text::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto cols = text::split(body, ',');
        if (cols.size() != 2) throw InvalidArgument("series csv: expected 2 columns");
        if (t.empty() && v.empty() && cols[0] == "t") continue;
        t.push_back(text::parse_double(cols[0]));
        v.push_back(text::parse_double(cols[1]));
    }
    if (v.empty()) throw InvalidArgument("series csv: no samples");
    const double dt = t.size() > 1 ? t[1] - t[0] : 1.0;
    return TimeSeries(std::move(v), dt);
}

}  // namespace memrc
