#pragma once

// Reservoirs built from memristive networks.
//
//  * ScrReservoir: simple cycle reservoir whose nodes are memristive networks.
//    Node i is driven by a_i = lambda * x_{i-1}(t) + s_i * v * u(t) and its new
//    state is the differential readout of its network.
//  * SingleNetworkReservoir: one network read out through many pairs.
//  * SigmoidScr: the same ring with tanh nodes.

#include "memrc/device.hpp"
#include "memrc/error.hpp"
#include "memrc/network.hpp"
#include "memrc/seed.hpp"
#include "memrc/tasks.hpp"
#include "memrc/topology.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace memrc {

/// Interface shared by every reservoir the harness can drive.
class Reservoir {
public:
    virtual ~Reservoir() = default;

    /// Consumes one input sample and returns the new state vector.
    virtual const Eigen::VectorXd& step(double u) = 0;
    [[nodiscard]] virtual std::size_t dimension() const = 0;
    [[nodiscard]] virtual const Eigen::VectorXd& state() const = 0;
    [[nodiscard]] virtual SolveStats solver_stats() const { return {}; }
    [[nodiscard]] virtual std::size_t clip_events() const { return 0; }
};

/// Drives `reservoir` with every sample of `input`; row t is the state after sample t.
[[nodiscard]] inline Eigen::MatrixXd run_reservoir(Reservoir& reservoir, const TimeSeries& input) {
    if (input.empty()) throw InvalidArgument("run_reservoir: empty input");
    Eigen::MatrixXd states(static_cast<Eigen::Index>(input.size()),
                           static_cast<Eigen::Index>(reservoir.dimension()));
    for (std::size_t t = 0; t < input.size(); ++t) {
        states.row(static_cast<Eigen::Index>(t)) = reservoir.step(input[t]).transpose();
    }
    return states;
}

struct ScrConfig {
    std::size_t n_nodes = 20;
    double input_coeff = 1.0;      ///< v, drive volts per unit input
    double spectral_radius = 1.0;  ///< lambda, uniform ring weight
    std::size_t network_nodes_min = 30;  ///< 3-regular: about 52 devices per network on average
    std::size_t network_nodes_max = 40;
    std::size_t k_degree = 3;
    double dt = 1.0e-3;            ///< seconds per reservoir step
    int substeps = 10;
    double drive_clip = 16.0;      ///< |a_i| limit in volts
    double input_offset = 0.0;     ///< DC volts added to every drive
    std::uint64_t seed = 1;
    DeviceParams device{};
    SolveSettings solver{};

    void validate() const {
        if (n_nodes < 2) throw InvalidArgument("scr: n_nodes must be >= 2");
        if (!(input_coeff >= 0.0)) throw InvalidArgument("scr: input_coeff must be >= 0");
        if (!(spectral_radius >= 0.0)) throw InvalidArgument("scr: spectral_radius must be >= 0");
        if (network_nodes_min < 3 || network_nodes_max < network_nodes_min) {
            throw InvalidArgument("scr: need 3 <= network_nodes_min <= network_nodes_max");
        }
        if (!(dt > 0.0)) throw InvalidArgument("scr: dt must be > 0");
        if (substeps < 1) throw InvalidArgument("scr: substeps must be >= 1");
        if (!(drive_clip > 0.0)) throw InvalidArgument("scr: drive_clip must be > 0");
        device.validate();
        solver.validate();
    }
};

namespace detail {

/// Holds `drive` constant for `substeps` quasi-static steps; returns the last readout.
inline Eigen::VectorXd drive_network(MemristiveNetwork& net, double drive, double dt, int substeps,
                                     const SolveSettings& settings) {
    const double h = dt / substeps;
    StepResult r;
    for (int s = 0; s < substeps; ++s) r = step_network(net, drive, h, settings);
    return std::move(r.readout);
}

inline double clip(double a, double limit, std::size_t& events) {
    if (a > limit) {
        ++events;
        return limit;
    }
    if (a < -limit) {
        ++events;
        return -limit;
    }
    return a;
}

}  // namespace detail

class ScrReservoir : public Reservoir {
public:
    ScrReservoir() = default;

    ScrReservoir(ScrConfig config, std::vector<MemristiveNetwork> nodes, std::vector<int> input_signs)
        : config_(std::move(config)), nodes_(std::move(nodes)), signs_(std::move(input_signs)) {
        if (nodes_.size() != signs_.size() || nodes_.size() < 2) {
            throw InvalidArgument("scr: need matching node and sign counts (>= 2)");
        }
        for (const int s : signs_) {
            if (s != 1 && s != -1) throw InvalidArgument("scr: input signs must be +1 or -1");
        }
        for (const auto& n : nodes_) {
            if (n.topology().readout_pairs.empty()) throw InvalidArgument("scr: node without readout");
        }
        config_.n_nodes = nodes_.size();
        state_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes_.size()));
        next_ = state_;
    }

    /// Synchronous ring update: every drive is computed from the old state vector.
    const Eigen::VectorXd& step(double u) override {
        const auto n = nodes_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double prev = state_[static_cast<Eigen::Index>((i + n - 1) % n)];
            double a = config_.spectral_radius * prev +
                       signs_[i] * config_.input_coeff * u + config_.input_offset;
            a = detail::clip(a, config_.drive_clip, clip_events_);
            next_[static_cast<Eigen::Index>(i)] =
                detail::drive_network(nodes_[i], a, config_.dt, config_.substeps, config_.solver)[0];
        }
        state_.swap(next_);
        return state_;
    }

    [[nodiscard]] std::size_t dimension() const override { return nodes_.size(); }
    [[nodiscard]] const Eigen::VectorXd& state() const override { return state_; }
    [[nodiscard]] std::size_t clip_events() const override { return clip_events_; }

    [[nodiscard]] SolveStats solver_stats() const override {
        SolveStats total;
        for (const auto& n : nodes_) total += n.stats();
        return total;
    }

    [[nodiscard]] const ScrConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<MemristiveNetwork>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::vector<MemristiveNetwork>& nodes() noexcept { return nodes_; }
    [[nodiscard]] const std::vector<int>& input_signs() const noexcept { return signs_; }
    [[nodiscard]] double ring_weight() const noexcept { return config_.spectral_radius; }

    void set_state(const Eigen::VectorXd& x) {
        if (x.size() != state_.size()) throw InvalidArgument("scr: state length mismatch");
        state_ = x;
    }

    [[nodiscard]] std::size_t total_devices() const {
        std::size_t d = 0;
        for (const auto& n : nodes_) d += n.device_count();
        return d;
    }

private:
    ScrConfig config_;
    std::vector<MemristiveNetwork> nodes_;
    std::vector<int> signs_;
    Eigen::VectorXd state_;
    Eigen::VectorXd next_;
    std::size_t clip_events_ = 0;
};

/// Builds the N node networks (sizes uniform in the configured range, one readout
/// pair each, independent derived seeds) and draws fair +-1 input signs.
[[nodiscard]] inline ScrReservoir build_scr(const ScrConfig& config) {
    config.validate();
    Rng rng(derive_seed(config.seed, {0}));
    const auto span = config.network_nodes_max - config.network_nodes_min + 1;
    std::vector<MemristiveNetwork> nodes;
    std::vector<int> signs;
    nodes.reserve(config.n_nodes);
    for (std::size_t i = 0; i < config.n_nodes; ++i) {
        const auto size = config.network_nodes_min + uniform_index(rng, span);
        signs.push_back((rng() >> 63) != 0 ? 1 : -1);
        nodes.emplace_back(generate_topology(size, config.k_degree, 1, derive_seed(config.seed, {1, i})),
                           config.device);
    }
    return ScrReservoir(config, std::move(nodes), std::move(signs));
}

struct SingleNetworkConfig {
    std::size_t n_circuit_nodes = 80;  ///< 120 devices at k_degree 3
    std::size_t n_readout_pairs = 16;
    std::size_t k_degree = 3;
    double input_coeff = 1.0;
    double dt = 1.0e-3;
    int substeps = 10;
    double drive_clip = 16.0;
    double input_offset = 0.0;
    std::uint64_t seed = 1;
    DeviceParams device{};
    SolveSettings solver{};
};

/// One network driven directly by v * u; its state is the vector of pair readouts.
class SingleNetworkReservoir : public Reservoir {
public:
    explicit SingleNetworkReservoir(SingleNetworkConfig config, MemristiveNetwork network)
        : config_(std::move(config)), network_(std::move(network)) {
        state_ = Eigen::VectorXd::Zero(
            static_cast<Eigen::Index>(network_.topology().readout_pairs.size()));
    }

    const Eigen::VectorXd& step(double u) override {
        const double a = detail::clip(config_.input_coeff * u + config_.input_offset,
                                      config_.drive_clip, clip_events_);
        state_ = detail::drive_network(network_, a, config_.dt, config_.substeps, config_.solver);
        return state_;
    }

    [[nodiscard]] std::size_t dimension() const override { return static_cast<std::size_t>(state_.size()); }
    [[nodiscard]] const Eigen::VectorXd& state() const override { return state_; }
    [[nodiscard]] SolveStats solver_stats() const override { return network_.stats(); }
    [[nodiscard]] std::size_t clip_events() const override { return clip_events_; }
    [[nodiscard]] const MemristiveNetwork& network() const noexcept { return network_; }

private:
    SingleNetworkConfig config_;
    MemristiveNetwork network_;
    Eigen::VectorXd state_;
    std::size_t clip_events_ = 0;
};

[[nodiscard]] inline SingleNetworkReservoir build_single_network_reservoir(const SingleNetworkConfig& config) {
    if (config.n_readout_pairs < 1) throw InvalidArgument("single network: need >= 1 readout pair");
    if (!(config.dt > 0.0) || config.substeps < 1) throw InvalidArgument("single network: bad dt/substeps");
    config.device.validate();
    config.solver.validate();
    auto topo = generate_topology(config.n_circuit_nodes, config.k_degree, config.n_readout_pairs,
                                  derive_seed(config.seed, {1, 0}));
    return SingleNetworkReservoir(config, MemristiveNetwork(std::move(topo), config.device));
}

/// Ring of tanh neurons with the same input/ring weights as the memristive SCR.
class SigmoidScr : public Reservoir {
public:
    SigmoidScr(std::size_t n_nodes, double input_coeff, double spectral_radius, std::uint64_t seed)
        : input_coeff_(input_coeff), ring_weight_(spectral_radius) {
        if (n_nodes < 2) throw InvalidArgument("sigmoid scr: n_nodes must be >= 2");
        Rng rng(derive_seed(seed, {0}));
        for (std::size_t i = 0; i < n_nodes; ++i) signs_.push_back((rng() >> 63) != 0 ? 1 : -1);
        state_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_nodes));
        next_ = state_;
    }

    const Eigen::VectorXd& step(double u) override {
        const auto n = signs_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double prev = state_[static_cast<Eigen::Index>((i + n - 1) % n)];
            next_[static_cast<Eigen::Index>(i)] = std::tanh(ring_weight_ * prev + signs_[i] * input_coeff_ * u);
        }
        state_.swap(next_);
        return state_;
    }

    [[nodiscard]] std::size_t dimension() const override { return signs_.size(); }
    [[nodiscard]] const Eigen::VectorXd& state() const override { return state_; }
    [[nodiscard]] const std::vector<int>& input_signs() const noexcept { return signs_; }
    [[nodiscard]] double ring_weight() const noexcept { return ring_weight_; }

private:
    double input_coeff_;
    double ring_weight_;
    std::vector<int> signs_;
    Eigen::VectorXd state_;
    Eigen::VectorXd next_;
};

// ---------------------------------------------------------------------------
// Snapshot of a memristive SCR. Doubles are written as hex floats so a resumed
// reservoir continues bit-identically.
//
//   scr nodes=<N>
//   config <key> <value>          (one per ScrConfig scalar)
//   param <name> <value>          (device constants)
//   signs <s_0> ... <s_{N-1}>
//   network <i>
//   <topology text>
//   w <w_0> ... <w_{E-1}>
//   voltages <v_0> ... <v_{n-1}>
//   state <x_0> ... <x_{N-1}>
// ---------------------------------------------------------------------------

namespace detail {

inline std::string hexf(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline std::vector<double> parse_doubles(const std::vector<std::string_view>& toks, std::size_t from) {
    std::vector<double> out;
    for (std::size_t i = from; i < toks.size(); ++i) out.push_back(text::parse_double(toks[i]));
    return out;
}

}  // namespace detail

inline void write_snapshot(std::ostream& out, const ScrReservoir& scr) {
    const auto& c = scr.config();
    out << "scr nodes=" << scr.nodes().size() << '\n';
    out << "config input_coeff " << detail::hexf(c.input_coeff) << '\n'
        << "config spectral_radius " << detail::hexf(c.spectral_radius) << '\n'
        << "config dt " << detail::hexf(c.dt) << '\n'
        << "config substeps " << c.substeps << '\n'
        << "config drive_clip " << detail::hexf(c.drive_clip) << '\n'
        << "config input_offset " << detail::hexf(c.input_offset) << '\n'
        << "config max_fixed_point_iters " << c.solver.max_fixed_point_iters << '\n'
        << "config voltage_tolerance " << detail::hexf(c.solver.voltage_tolerance) << '\n'
        << "config min_conductance " << detail::hexf(c.solver.min_conductance) << '\n'
        << "config relative_kcl_tolerance " << detail::hexf(c.solver.relative_kcl_tolerance) << '\n'
        << "config method " << (c.solver.method == SolveMethod::newton ? "newton" : "secant") << '\n';
    for (const auto name : DeviceParams::names) {
        out << "param " << name << ' ' << detail::hexf(c.device.get(name)) << '\n';
    }
    out << "signs";
    for (const int s : scr.input_signs()) out << ' ' << s;
    out << '\n';
    for (std::size_t i = 0; i < scr.nodes().size(); ++i) {
        const auto& net = scr.nodes()[i];
        out << "network " << i << '\n';
        write_topology(out, net.topology());
        out << 'w';
        for (const auto& s : net.device_states()) out << ' ' << detail::hexf(s.w);
        out << "\nvoltages";
        for (Eigen::Index k = 0; k < net.last_voltages().size(); ++k) {
            out << ' ' << detail::hexf(net.last_voltages()[k]);
        }
        out << '\n';
        if (const auto* g = net.factored_conductances()) {
            out << "jacobian";
            for (const double x : *g) out << ' ' << detail::hexf(x);
            out << '\n';
        }
    }
    out << "state";
    for (Eigen::Index k = 0; k < scr.state().size(); ++k) out << ' ' << detail::hexf(scr.state()[k]);
    out << '\n';
}

[[nodiscard]] inline ScrReservoir read_snapshot(std::istream& in) {
    std::string line;
    auto next_line = [&](const char* what) {
        while (std::getline(in, line)) {
            if (!text::trim(line).empty()) return;
        }
        throw InvalidArgument(std::string("snapshot: unexpected end before ") + what);
    };
    next_line("header");
    auto toks = text::tokens(line);
    if (toks.size() != 2 || toks[0] != "scr" || toks[1].substr(0, 6) != "nodes=") {
        throw InvalidArgument("snapshot: bad header");
    }
    const auto n = static_cast<std::size_t>(text::parse_int(toks[1].substr(6)));

    ScrConfig config;
    std::vector<int> signs;
    std::vector<MemristiveNetwork> nodes;
    Eigen::VectorXd state;
    std::string pending;
    while (true) {
        if (!pending.empty()) {
            line = pending;
            pending.clear();
        } else if (!std::getline(in, line)) {
            break;
        }
        toks = text::tokens(text::trim(line));
        if (toks.empty()) continue;
        if (toks[0] == "config" && toks.size() == 3) {
            const auto key = toks[1];
            if (key == "input_coeff") config.input_coeff = text::parse_double(toks[2]);
            else if (key == "spectral_radius") config.spectral_radius = text::parse_double(toks[2]);
            else if (key == "dt") config.dt = text::parse_double(toks[2]);
            else if (key == "substeps") config.substeps = static_cast<int>(text::parse_int(toks[2]));
            else if (key == "drive_clip") config.drive_clip = text::parse_double(toks[2]);
            else if (key == "input_offset") config.input_offset = text::parse_double(toks[2]);
            else if (key == "max_fixed_point_iters") config.solver.max_fixed_point_iters = static_cast<int>(text::parse_int(toks[2]));
            else if (key == "voltage_tolerance") config.solver.voltage_tolerance = text::parse_double(toks[2]);
            else if (key == "min_conductance") config.solver.min_conductance = text::parse_double(toks[2]);
            else if (key == "relative_kcl_tolerance") config.solver.relative_kcl_tolerance = text::parse_double(toks[2]);
            else if (key == "method") config.solver.method = toks[2] == "secant" ? SolveMethod::secant : SolveMethod::newton;
            else throw InvalidArgument("snapshot: unknown config key '" + std::string(key) + "'");
        } else if (toks[0] == "param" && toks.size() == 3) {
            double* slot = config.device.field(toks[1]);
            if (slot == nullptr) throw InvalidArgument("snapshot: unknown device parameter");
            *slot = text::parse_double(toks[2]);
        } else if (toks[0] == "signs") {
            for (std::size_t i = 1; i < toks.size(); ++i) signs.push_back(static_cast<int>(text::parse_int(toks[i])));
        } else if (toks[0] == "network") {
            auto topo = read_topology(in, &pending);
            MemristiveNetwork net(std::move(topo), config.device);
            if (pending.empty()) {
                next_line("device states");
            } else {
                line = pending;
                pending.clear();
            }
            auto wt = text::tokens(line);
            if (wt.empty() || wt[0] != "w") throw InvalidArgument("snapshot: expected 'w' line");
            const auto ws = detail::parse_doubles(wt, 1);
            std::vector<DeviceState> states;
            for (const double w : ws) states.push_back(DeviceState{w});
            net.set_device_states(std::move(states));
            next_line("voltages");
            auto vt = text::tokens(line);
            if (vt.empty() || vt[0] != "voltages") throw InvalidArgument("snapshot: expected 'voltages' line");
            const auto vs = detail::parse_doubles(vt, 1);
            net.set_last_voltages(Eigen::Map<const Eigen::VectorXd>(vs.data(), static_cast<Eigen::Index>(vs.size())));
            nodes.push_back(std::move(net));
        } else if (toks[0] == "jacobian") {
            if (nodes.empty()) throw InvalidArgument("snapshot: 'jacobian' before any network");
            nodes.back().restore_factorization(detail::parse_doubles(toks, 1));
        } else if (toks[0] == "state") {
            const auto xs = detail::parse_doubles(toks, 1);
            state = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
        } else {
            throw InvalidArgument("snapshot: unexpected line '" + line + "'");
        }
    }
    if (nodes.size() != n) throw InvalidArgument("snapshot: network count does not match header");
    config.device.validate();
    ScrReservoir scr(config, std::move(nodes), std::move(signs));
    scr.set_state(state);
    return scr;
}

}  // namespace memrc
