#pragma once

// Power spectral density by Welch averaging (Hann window, 50% overlap) and the
// log-log power-law fit used to look for 1/f-like structure in node traces.

#include "memrc/error.hpp"
#include "memrc/stats.hpp"
#include "memrc/tasks.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <vector>

namespace memrc {

struct PsdRow {
    double frequency_hz;
    double power;  ///< one-sided density, units^2 / Hz
};

struct PsdSettings {
    std::size_t segment_length = 256;
    std::size_t min_length = 64;
};

namespace detail {

[[nodiscard]] inline std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

/// Adds the one-sided periodogram of x[begin, begin + n) (mean removed, windowed) to `acc`.
inline void accumulate_periodogram(const std::vector<double>& x, std::size_t begin, std::size_t n,
                                   const std::vector<double>& window, double fs,
                                   Eigen::FFT<double>& fft, std::vector<double>& acc) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x[begin + i];
    m /= static_cast<double>(n);
    std::vector<double> seg(n);
    double wss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        seg[i] = (x[begin + i] - m) * window[i];
        wss += window[i] * window[i];
    }
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, seg);
    const double scale = 1.0 / (fs * wss);
    const std::size_t bins = n / 2 + 1;
    for (std::size_t k = 0; k < bins; ++k) {
        double p = std::norm(spec[k]) * scale;
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        if (!edge) p *= 2.0;
        acc[k] += p;
    }
}

}  // namespace detail

/// Welch PSD of `series` at its own sample rate. Series shorter than one segment fall
/// back to a single Hann-windowed periodogram over the whole series.
[[nodiscard]] inline std::vector<PsdRow> psd(const TimeSeries& series, const PsdSettings& settings = {}) {
    if (series.size() < settings.min_length) {
        throw InvalidArgument("psd: need at least " + std::to_string(settings.min_length) + " samples");
    }
    if (settings.segment_length < 2) throw InvalidArgument("psd: segment_length must be >= 2");
    const double fs = 1.0 / series.dt;
    const std::size_t n = series.size() < settings.segment_length ? series.size() : settings.segment_length;
    const std::size_t hop = n / 2;
    const auto window = detail::hann(n);
    Eigen::FFT<double> fft;
    std::vector<double> acc(n / 2 + 1, 0.0);
    std::size_t segments = 0;
    for (std::size_t begin = 0; begin + n <= series.size(); begin += hop) {
        detail::accumulate_periodogram(series.samples, begin, n, window, fs, fft, acc);
        ++segments;
    }
    std::vector<PsdRow> rows(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) {
        rows[k] = PsdRow{static_cast<double>(k) * fs / static_cast<double>(n),
                         acc[k] / static_cast<double>(segments)};
    }
    return rows;
}

/// Averages power over logarithmic frequency bins (`per_decade` bins per decade),
/// skipping the DC row and empty bins. Returns (bin centre frequency, mean power).
[[nodiscard]] inline std::vector<PsdRow> log_binned(const std::vector<PsdRow>& rows, std::size_t per_decade = 10) {
    if (per_decade < 1) throw InvalidArgument("log_binned: per_decade must be >= 1");
    std::vector<PsdRow> out;
    double f_min = 0.0;
    for (const auto& r : rows) {
        if (r.frequency_hz > 0.0) {
            f_min = r.frequency_hz;
            break;
        }
    }
    if (!(f_min > 0.0)) return out;
    const double width = 1.0 / static_cast<double>(per_decade);
    long current = -1;
    double sum = 0.0;
    double log_f = 0.0;
    std::size_t count = 0;
    const auto flush = [&] {
        if (count > 0) out.push_back(PsdRow{std::pow(10.0, log_f / static_cast<double>(count)), sum / static_cast<double>(count)});
        sum = 0.0;
        log_f = 0.0;
        count = 0;
    };
    for (const auto& r : rows) {
        if (!(r.frequency_hz > 0.0)) continue;
        const auto bin = static_cast<long>(std::floor(std::log10(r.frequency_hz / f_min) / width + 1e-9));
        if (bin != current) {
            flush();
            current = bin;
        }
        sum += r.power;
        log_f += std::log10(r.frequency_hz);
        ++count;
    }
    flush();
    return out;
}

struct PowerLawFit {
    double exponent = 0.0;   ///< slope of log10 power against log10 frequency
    double r_squared = 0.0;
    double decades = 0.0;    ///< log10(f_hi / f_lo) of the fitted range
    std::size_t points = 0;
};

/// Least-squares line through the log-binned spectrum for f in [f_lo, f_hi].
[[nodiscard]] inline PowerLawFit fit_power_law(const std::vector<PsdRow>& rows, double f_lo, double f_hi,
                                               std::size_t per_decade = 10) {
    if (!(f_lo > 0.0 && f_hi > f_lo)) throw InvalidArgument("fit_power_law: need 0 < f_lo < f_hi");
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& r : log_binned(rows, per_decade)) {
        if (r.frequency_hz < f_lo || r.frequency_hz > f_hi || !(r.power > 0.0)) continue;
        x.push_back(std::log10(r.frequency_hz));
        y.push_back(std::log10(r.power));
    }
    if (x.size() < 3) throw UndefinedMetric("fit_power_law: fewer than 3 populated bins in range");
    const auto line = stats::fit_line(x, y);
    return PowerLawFit{line.slope, line.r_squared, x.back() - x.front(), x.size()};
}

inline void write_psd_csv(std::ostream& out, const std::vector<PsdRow>& rows) {
    out << "freq_hz,power\n";
    for (const auto& r : rows) out << text::format_full(r.frequency_hz) << ',' << text::format_full(r.power) << '\n';
}

}  // namespace memrc
