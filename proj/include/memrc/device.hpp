#pragma once

// Single memristive device: static I-V response, internal state dynamics,
// explicit state integration and the small-signal conductance used to seed
// the network solver.
//
//   I(w, v)  = (1 - w) * sigma * (1 - exp(-beta * v)) + w * gamma * sinh(delta * v)
//   dw/dt    = lambda_rate * sinh(eta * v) - w / tau

#include "memrc/error.hpp"
#include "memrc/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace memrc {

/// Constants of the device model. All strictly positive, SI units.
struct DeviceParams {
    double sigma = 1.0e-6;        ///< OFF-branch current scale (A)
    double beta = 1.0;            ///< OFF-branch exponential coefficient (1/V)
    double gamma = 2.0e-6;        ///< ON-branch current scale (A)
    double delta = 2.5;           ///< ON-branch sinh coefficient (1/V)
    double lambda_rate = 5.0e-6;  ///< state growth prefactor (1/s)
    double eta = 12.0;            ///< state growth voltage coefficient (1/V)
    double tau = 0.25;            ///< state decay time constant (s)

    static constexpr std::array<std::string_view, 7> names = {
        "sigma", "beta", "gamma", "delta", "lambda_rate", "eta", "tau"};

    [[nodiscard]] double* field(std::string_view name) { return lookup(*this, name); }
    [[nodiscard]] const double* field(std::string_view name) const { return lookup(*this, name); }

    [[nodiscard]] double get(std::string_view name) const {
        const double* slot = field(name);
        if (slot == nullptr) throw InvalidArgument("unknown device parameter '" + std::string(name) + "'");
        return *slot;
    }

    /// Throws InvalidArgument unless every constant is finite and > 0.
    void validate() const {
        for (const auto name : names) {
            const double value = get(name);
            if (!std::isfinite(value) || value <= 0.0) {
                throw InvalidArgument("device parameter '" + std::string(name) +
                                      "' must be finite and > 0");
            }
        }
    }

    friend bool operator==(const DeviceParams&, const DeviceParams&) = default;

private:
    template <class Self>
    static auto lookup(Self& self, std::string_view name) -> decltype(&self.sigma) {
        if (name == "sigma") return &self.sigma;
        if (name == "beta") return &self.beta;
        if (name == "gamma") return &self.gamma;
        if (name == "delta") return &self.delta;
        if (name == "lambda_rate") return &self.lambda_rate;
        if (name == "eta") return &self.eta;
        if (name == "tau") return &self.tau;
        return nullptr;
    }
};

/// Internal state of one device, kept in [0, 1].
struct DeviceState {
    double w = 0.0;

    friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

namespace detail {

inline void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw InvalidArgument(std::string(what) + " must be finite");
    }
}

inline void require_state(double w) {
    if (!(w >= 0.0 && w <= 1.0)) {
        throw InvalidArgument("device state w must lie in [0, 1]");
    }
}

}  // namespace detail

/// Device current at state `w` and branch voltage `v`.
[[nodiscard]] inline double current(const DeviceParams& p, double w, double v) {
    detail::require_finite(w, "device state");
    detail::require_finite(v, "voltage");
    detail::require_state(w);
    double i = 0.0;
    if (w < 1.0) i += (1.0 - w) * p.sigma * -std::expm1(-p.beta * v);
    if (w > 0.0) i += w * p.gamma * std::sinh(p.delta * v);
    return i;
}

/// dI/dv at (w, v).
[[nodiscard]] inline double differential_conductance(const DeviceParams& p, double w, double v) {
    double g = 0.0;
    if (w < 1.0) g += (1.0 - w) * p.sigma * p.beta * std::exp(-p.beta * v);
    if (w > 0.0) g += w * p.gamma * p.delta * std::cosh(p.delta * v);
    return g;
}

/// dw/dt at (w, v).
[[nodiscard]] inline double state_derivative(const DeviceParams& p, double w, double v) {
    detail::require_finite(w, "device state");
    detail::require_finite(v, "voltage");
    detail::require_state(w);
    return p.lambda_rate * std::sinh(p.eta * v) - w / p.tau;
}

/// One explicit-Euler step of the state equation followed by clamping to [0, 1].
[[nodiscard]] inline DeviceState step_device(const DeviceParams& p, DeviceState state, double v,
                                             double dt) {
    if (!(dt >= 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("time step must be finite and >= 0");
    }
    if (dt == 0.0) return state;
    const double next = state.w + dt * state_derivative(p, state.w, v);
    // A huge drive can push the update to +inf; the clamp still maps it onto 1.
    state.w = std::isnan(next) ? state.w : std::clamp(next, 0.0, 1.0);
    return state;
}

/// dI/dv at v = 0, linear in w.
[[nodiscard]] inline double small_signal_conductance(const DeviceParams& p, double w) {
    detail::require_state(w);
    return (1.0 - w) * p.sigma * p.beta + w * p.gamma * p.delta;
}

/// Steady state of the state equation under a constant voltage, clamped to [0, 1].
[[nodiscard]] inline double equilibrium_state(const DeviceParams& p, double v) {
    return std::clamp(p.tau * p.lambda_rate * std::sinh(p.eta * v), 0.0, 1.0);
}

struct SwitchingSample {
    double t;
    double v;
    double i;
    double w;
};

/// Sinusoidal drive of one device from w = 0: `periods` periods of amplitude*sin(2 pi f t),
/// integrated with explicit Euler at `dt`.
[[nodiscard]] inline std::vector<SwitchingSample> switching_trace(const DeviceParams& p, double amplitude,
                                                                  double frequency = 10.0, double dt = 1.0e-5,
                                                                  int periods = 4) {
    if (!(frequency > 0.0) || !(dt > 0.0) || periods < 1) {
        throw InvalidArgument("switching_trace: need frequency > 0, dt > 0, periods >= 1");
    }
    const auto n = static_cast<std::size_t>(std::llround(periods / (frequency * dt)));
    std::vector<SwitchingSample> out;
    out.reserve(n + 1);
    DeviceState s;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double v = amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
        out.push_back(SwitchingSample{t, v, current(p, s.w, v), s.w});
        s = step_device(p, s, v, dt);
    }
    return out;
}

/// Peak-to-peak excursion of w over the last period of `switching_trace`.
[[nodiscard]] inline double switching_excursion(const DeviceParams& p, double amplitude, double frequency = 10.0,
                                                double dt = 1.0e-5, int periods = 4) {
    const auto trace = switching_trace(p, amplitude, frequency, dt, periods);
    const auto per_period = static_cast<std::size_t>(std::llround(1.0 / (frequency * dt)));
    double lo = 1.0;
    double hi = 0.0;
    for (std::size_t k = trace.size() - 1 - per_period; k < trace.size(); ++k) {
        lo = std::min(lo, trace[k].w);
        hi = std::max(hi, trace[k].w);
    }
    return hi - lo;
}

// ---------------------------------------------------------------------------
// Parameter file: one `name = value` per line, `#` comments allowed.
// All seven names are mandatory; unknown names are rejected.
// ---------------------------------------------------------------------------

[[nodiscard]] inline DeviceParams read_device_params(std::istream& in) {
    DeviceParams params;
    std::array<bool, 7> seen{};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = text::trim(text::strip_comment(line));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidArgument("device params line " + std::to_string(line_no) +
                                  ": expected 'name = value'");
        }
        const auto name = text::trim(body.substr(0, eq));
        double* slot = params.field(name);
        if (slot == nullptr) {
            throw InvalidArgument("unknown device parameter '" + std::string(name) + "'");
        }
        *slot = text::parse_double(body.substr(eq + 1));
        const auto idx = static_cast<std::size_t>(
            std::find(DeviceParams::names.begin(), DeviceParams::names.end(), name) -
            DeviceParams::names.begin());
        seen[idx] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) {
            throw InvalidArgument("missing device parameter '" +
                                  std::string(DeviceParams::names[i]) + "'");
        }
    }
    params.validate();
    return params;
}

[[nodiscard]] inline DeviceParams load_device_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open device params file '" + path + "'");
    return read_device_params(in);
}

inline void write_device_params(std::ostream& out, const DeviceParams& p) {
    for (const auto name : DeviceParams::names) {
        out << name << " = " << text::format_full(p.get(name)) << '\n';
    }
}

}  // namespace memrc
