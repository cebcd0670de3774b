#pragma once

// Independent oracles and property sweeps shared by the unit tests and the
// acceptance binary.

#include "memrc/memrc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <string>
#include <vector>

namespace memrc::testing {

/// Breadth-first connectivity written independently of the library's version.
inline bool bfs_connected(const NetworkTopology& t) {
    std::vector<std::vector<std::size_t>> adj(t.node_count);
    for (const auto& e : t.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::vector<char> seen(t.node_count, 0);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        const auto n = q.front();
        q.pop();
        for (const auto m : adj[n]) {
            if (!seen[m]) {
                seen[m] = 1;
                ++count;
                q.push(m);
            }
        }
    }
    return count == t.node_count;
}

/// Dense nodal solve of the linearized network: every device is the conductance
/// small_signal_conductance(w); input and ground rows are replaced by identities.
inline Eigen::VectorXd dense_linear_oracle(const MemristiveNetwork& net, double vin) {
    const auto& t = net.topology();
    const auto n = static_cast<Eigen::Index>(t.node_count);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
        const auto a = static_cast<Eigen::Index>(t.edges[e].a);
        const auto b = static_cast<Eigen::Index>(t.edges[e].b);
        const double c = small_signal_conductance(net.params(), net.device_states()[e].w);
        g(a, a) += c;
        g(b, b) += c;
        g(a, b) -= c;
        g(b, a) -= c;
    }
    for (const auto& [node, value] : {std::pair{t.input_node, vin}, std::pair{t.ground_node, 0.0}}) {
        const auto k = static_cast<Eigen::Index>(node);
        g.row(k).setZero();
        g(k, k) = 1.0;
        rhs[k] = value;
    }
    return g.fullPivLu().solve(rhs);
}

/// Frozen linear network with random device states; 20..100 nodes.
inline MemristiveNetwork random_linear_network(std::uint64_t seed) {
    Rng rng(seed);
    const auto nodes = 20 + uniform_index(rng, 81);
    const auto k = 2 + uniform_index(rng, 4);
    MemristiveNetwork net(generate_topology(nodes, k, 3, derive_seed(seed, {1})), DeviceParams{});
    std::vector<DeviceState> w(net.device_count());
    for (auto& s : w) s.w = uniform01(rng);
    net.set_device_states(w);
    net.set_mode(DeviceMode::linearized);
    net.set_frozen(true);
    return net;
}

struct OracleSummary {
    std::size_t instances = 0;
    double worst_error = 0.0;  ///< V
    std::size_t max_iterations = 0;
};

/// Linear networks from `seed`: library solve against the dense oracle.
inline OracleSummary linear_oracle_sweep(std::size_t instances, std::uint64_t seed) {
    OracleSummary s;
    for (std::size_t i = 0; i < instances; ++i) {
        auto net = random_linear_network(derive_seed(seed, {i}));
        Rng rng(derive_seed(seed, {i, 7}));
        const double vin = -5.0 + 10.0 * uniform01(rng);
        const auto r = solve_dc(net, vin);
        const auto oracle = dense_linear_oracle(net, vin);
        s.worst_error = std::max(s.worst_error, (r.voltages - oracle).cwiseAbs().maxCoeff());
        s.max_iterations = std::max(s.max_iterations, static_cast<std::size_t>(r.iterations));
        ++s.instances;
    }
    return s;
}

struct ProbeSummary {
    std::size_t probes = 0;
    std::size_t converged = 0;
    double worst_relative_kcl = 0.0;  ///< over converged solves with nonzero source current
    double worst_passivity_excess = 0.0;  ///< max(|readout| - |V|), should be <= 0
    double worst_bound_excess = 0.0;      ///< node voltage outside [min(0,V), max(0,V)]
};

/// Random nonlinear networks stepped through random drives; every solve is checked
/// for KCL, the voltage bound and readout passivity.
inline ProbeSummary network_probe_sweep(std::size_t networks, std::size_t probes_per_network, std::uint64_t seed) {
    ProbeSummary s;
    for (std::size_t i = 0; i < networks; ++i) {
        Rng rng(derive_seed(seed, {i}));
        const auto nodes = 30 + uniform_index(rng, 11);
        MemristiveNetwork net(generate_topology(nodes, 3, 4, derive_seed(seed, {i, 1})), DeviceParams{});
        std::vector<DeviceState> w(net.device_count());
        for (auto& d : w) d.w = uniform01(rng) < 0.5 ? 0.0 : uniform01(rng);
        net.set_device_states(w);
        for (std::size_t k = 0; k < probes_per_network; ++k) {
            const double scale = std::pow(10.0, -2.0 + 3.3 * uniform01(rng));
            const double vin = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * scale;
            const auto r = solve_dc(net, vin);
            ++s.probes;
            if (r.converged) {
                ++s.converged;
                const double source = std::abs(net.source_current(r.voltages));
                if (source > 0.0) s.worst_relative_kcl = std::max(s.worst_relative_kcl, net.kcl_residual(r.voltages) / source);
            }
            const auto out = net.readout(r.voltages);
            s.worst_passivity_excess = std::max(s.worst_passivity_excess, out.cwiseAbs().maxCoeff() - std::abs(vin));
            const double lo = std::min(0.0, vin);
            const double hi = std::max(0.0, vin);
            for (Eigen::Index n = 0; n < r.voltages.size(); ++n) {
                s.worst_bound_excess = std::max({s.worst_bound_excess, r.voltages[n] - hi, lo - r.voltages[n]});
            }
            net.advance_states(r.voltages, 1.0e-4);
        }
    }
    return s;
}

/// Direct NARMA-10 recurrence with its own loop structure, for bit-exact comparison.
inline std::vector<double> narma10_reference(const std::vector<double>& u) {
    std::vector<double> y(u.size(), 0.0);
    for (std::size_t t = 10; t < u.size(); ++t) {
        double s = 0.0;
        for (std::size_t i = 1; i <= 10; ++i) s += y[t - i];
        y[t] = 0.3 * y[t - 1] + 0.05 * y[t - 1] * s + 1.5 * u[t - 10] * u[t - 1] + 0.1;
    }
    return y;
}

/// States x_i(t) = u(t - i), i = 1..taps: a perfect delay line.
inline Eigen::MatrixXd delay_line_states(const TimeSeries& u, std::size_t taps) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(u.size()), static_cast<Eigen::Index>(taps));
    for (std::size_t t = 0; t < u.size(); ++t) {
        for (std::size_t i = 1; i <= taps; ++i) {
            if (t >= i) x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i - 1)) = u[t - i];
        }
    }
    return x;
}

}  // namespace memrc::testing
