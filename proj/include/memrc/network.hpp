#pragma once

// Quasi-static simulation of a memristive network: each call to solve_dc treats
// the devices as a stationary nonlinear resistive network driven by one ideal
// voltage source. The nodal system has the ground and source nodes eliminated;
// the nonlinearity is handled by damped Newton (default) or by a plain
// secant-conductance fixed point.

#include "memrc/device.hpp"
#include "memrc/error.hpp"
#include "memrc/topology.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace memrc {

/// Nonlinear iteration used by solve_dc.
enum class SolveMethod {
    newton,  ///< damped Newton on the network co-content (default)
    secant,  ///< plain secant-conductance fixed point, G = I(v) / v
};

struct SolveSettings {
    SolveMethod method = SolveMethod::newton;
    int max_fixed_point_iters = 50;
    double voltage_tolerance = 1.0e-6;  ///< V
    double min_conductance = 1.0e-12;   ///< S, floor keeping the system nonsingular
    /// Newton also requires the worst free-node KCL residual to fall below this
    /// fraction of the source current.
    double relative_kcl_tolerance = 1.0e-9;

    void validate() const {
        if (max_fixed_point_iters < 1) throw InvalidArgument("max_fixed_point_iters must be >= 1");
        if (!(voltage_tolerance > 0.0)) throw InvalidArgument("voltage_tolerance must be > 0");
        if (!(min_conductance > 0.0)) throw InvalidArgument("min_conductance must be > 0");
        if (!(relative_kcl_tolerance > 0.0)) throw InvalidArgument("relative_kcl_tolerance must be > 0");
    }
};

/// How devices conduct during a solve.
enum class DeviceMode {
    nonlinear,   ///< full I-V curve
    linearized,  ///< I = small_signal_conductance(w) * v
};

struct SolveResult {
    Eigen::VectorXd voltages;
    bool converged = false;
    int iterations = 0;
};

/// Solver health counters accumulated over the lifetime of a network.
struct SolveStats {
    std::size_t solves = 0;
    std::size_t unconverged = 0;
    std::size_t iterations = 0;

    SolveStats& operator+=(const SolveStats& o) {
        solves += o.solves;
        unconverged += o.unconverged;
        iterations += o.iterations;
        return *this;
    }
};

class MemristiveNetwork {
public:
    MemristiveNetwork() = default;

    MemristiveNetwork(NetworkTopology topology, DeviceParams params)
        : topology_(std::move(topology)), params_(params) {
        validate_topology(topology_, false, true);
        params_.validate();
        states_.assign(topology_.edges.size(), DeviceState{});
        last_voltages_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(topology_.node_count));
        build_index();
    }

    [[nodiscard]] const NetworkTopology& topology() const noexcept { return topology_; }
    [[nodiscard]] const DeviceParams& params() const noexcept { return params_; }
    [[nodiscard]] const std::vector<DeviceState>& device_states() const noexcept { return states_; }
    [[nodiscard]] const Eigen::VectorXd& last_voltages() const noexcept { return last_voltages_; }
    [[nodiscard]] const SolveStats& stats() const noexcept { return stats_; }
    [[nodiscard]] std::size_t device_count() const noexcept { return topology_.edges.size(); }

    [[nodiscard]] DeviceMode mode() const noexcept { return mode_; }
    void set_mode(DeviceMode mode) noexcept {
        mode_ = mode;
        jacobian_ready_ = false;
    }

    /// Frozen devices keep their state through step().
    [[nodiscard]] bool frozen() const noexcept { return frozen_; }
    void set_frozen(bool frozen) noexcept { frozen_ = frozen; }

    void set_device_states(std::vector<DeviceState> states) {
        if (states.size() != states_.size()) {
            throw InvalidArgument("device state count does not match edge count");
        }
        for (const auto& s : states) detail::require_state(s.w);
        states_ = std::move(states);
        jacobian_ready_ = false;
    }

    void set_last_voltages(Eigen::VectorXd v) {
        if (v.size() != static_cast<Eigen::Index>(topology_.node_count)) {
            throw InvalidArgument("voltage vector length does not match node count");
        }
        last_voltages_ = std::move(v);
    }

    void reset_states() {
        std::fill(states_.begin(), states_.end(), DeviceState{});
        last_voltages_.setZero();
        jacobian_ready_ = false;
    }

    /// Branch voltage of edge `e` under node voltages `v`.
    [[nodiscard]] double branch_voltage(const Eigen::VectorXd& v, const Edge& e) const {
        return v[static_cast<Eigen::Index>(e.a)] - v[static_cast<Eigen::Index>(e.b)];
    }

    /// Current through edge `e` (a -> b) at branch voltage `vb`.
    [[nodiscard]] double branch_current(std::size_t e, double vb) const {
        const double w = states_[e].w;
        if (mode_ == DeviceMode::linearized) return small_signal_conductance(params_, w) * vb;
        return current(params_, w, vb);
    }

    /// Differential readouts v[p] - v[q] for every readout pair.
    [[nodiscard]] Eigen::VectorXd readout(const Eigen::VectorXd& v) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(topology_.readout_pairs.size()));
        for (std::size_t i = 0; i < topology_.readout_pairs.size(); ++i) {
            const auto& r = topology_.readout_pairs[i];
            out[static_cast<Eigen::Index>(i)] =
                v[static_cast<Eigen::Index>(r.p)] - v[static_cast<Eigen::Index>(r.q)];
        }
        return out;
    }

    /// Solves the network for a source of `input_voltage` between input and ground.
    ///
    /// Iteration starts from the voltages cached by the previous solve and stops once
    /// no node moves by more than the tolerance. An unconverged result returns the last
    /// iterate with `converged == false`. Nodes with no conducting path to a terminal
    /// are held at 0 V. Linearized devices take exactly one linear solve.
    SolveResult solve(double input_voltage, const SolveSettings& settings) {
        detail::require_finite(input_voltage, "input voltage");
        Eigen::VectorXd v = last_voltages_;
        v[static_cast<Eigen::Index>(topology_.input_node)] = input_voltage;
        v[static_cast<Eigen::Index>(topology_.ground_node)] = 0.0;
        for (const auto n : floating_) v[static_cast<Eigen::Index>(n)] = 0.0;

        SolveResult result;
        if (unknowns_.empty()) {
            result.converged = true;
        } else if (mode_ == DeviceMode::linearized || settings.method == SolveMethod::secant) {
            solve_secant(v, input_voltage, settings, result);
        } else {
            try {
                solve_newton(v, settings, result);
            } catch (const SolverError&) {
                result.converged = false;
            }
            if (!result.converged) continuation(v, input_voltage, settings, result);
        }
        ++stats_.solves;
        stats_.iterations += static_cast<std::size_t>(result.iterations);
        if (!result.converged) ++stats_.unconverged;
        last_voltages_ = v;
        result.voltages = std::move(v);
        return result;
    }

    /// Integrates every device over `dt` at the branch voltages in `v`.
    void advance_states(const Eigen::VectorXd& v, double dt) {
        if (frozen_) return;
        for (std::size_t e = 0; e < topology_.edges.size(); ++e) {
            states_[e] = step_device(params_, states_[e], branch_voltage(v, topology_.edges[e]), dt);
        }
    }

    /// Current delivered by the source into the network at node voltages `v`.
    [[nodiscard]] double source_current(const Eigen::VectorXd& v) const {
        double total = 0.0;
        for (std::size_t e = 0; e < topology_.edges.size(); ++e) {
            const auto& edge = topology_.edges[e];
            const double i = branch_current(e, branch_voltage(v, edge));
            if (edge.a == topology_.input_node) total += i;
            if (edge.b == topology_.input_node) total -= i;
        }
        return total;
    }

    /// Largest |sum of device currents| over nodes that are neither source nor ground,
    /// evaluated with the device curves (not the linearized conductances).
    [[nodiscard]] double kcl_residual(const Eigen::VectorXd& v) const {
        std::vector<double> net(topology_.node_count, 0.0);
        for (std::size_t e = 0; e < topology_.edges.size(); ++e) {
            const auto& edge = topology_.edges[e];
            const double i = branch_current(e, branch_voltage(v, edge));
            net[edge.a] -= i;
            net[edge.b] += i;
        }
        double worst = 0.0;
        for (const auto n : unknowns_) worst = std::max(worst, std::abs(net[n]));
        return worst;
    }

    /// Edge conductances behind the factorization kept for chord steps, or nullptr if
    /// the next solve starts with a fresh factorization.
    [[nodiscard]] const std::vector<double>* factored_conductances() const noexcept {
        return jacobian_ready_ ? &jacobian_g_ : nullptr;
    }

    /// Rebuilds the kept factorization from saved conductances so a restored network
    /// solves exactly like the one it was saved from.
    void restore_factorization(std::vector<double> conductances) {
        if (conductances.size() != topology_.edges.size()) {
            throw InvalidArgument("conductance count does not match edge count");
        }
        for (const double g : conductances) {
            if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("conductances must be finite and > 0");
        }
        jacobian_g_ = std::move(conductances);
        jacobian_ready_ = false;
        if (unknowns_.empty()) return;
        stamp_jacobian();
        factorize();
        jacobian_ready_ = true;
    }

    /// Nodes with no path to the input or ground terminal.
    [[nodiscard]] const std::vector<std::size_t>& floating_nodes() const noexcept { return floating_; }

private:
    // Secant-conductance fixed point: every device becomes G = I(v)/v at the previous
    // iterate and the resulting linear network is solved.
    void solve_secant(Eigen::VectorXd& v, double input_voltage, const SolveSettings& settings,
                      SolveResult& result) {
        const auto m = static_cast<Eigen::Index>(unknowns_.size());
        const int max_iters = mode_ == DeviceMode::linearized ? 1 : settings.max_fixed_point_iters;
        for (int iter = 0; iter < max_iters; ++iter) {
            matrix_.setZero(m, m);
            rhs_.setZero(m);
            for (std::size_t e = 0; e < topology_.edges.size(); ++e) {
                const auto& edge = topology_.edges[e];
                const double g = std::max(secant_conductance(e, branch_voltage(v, edge)),
                                          settings.min_conductance);
                stamp(edge.a, edge.b, g, input_voltage);
            }
            factorize();
            jacobian_ready_ = false;
            solution_ = solve_factored(rhs_);
            if (!solution_.allFinite()) throw SolverError("nodal solve produced non-finite voltages");

            double max_change = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                const auto node = static_cast<Eigen::Index>(unknowns_[static_cast<std::size_t>(i)]);
                max_change = std::max(max_change, std::abs(solution_[i] - v[node]));
                v[node] = solution_[i];
            }
            result.iterations = iter + 1;
            if (mode_ == DeviceMode::linearized || max_change < settings.voltage_tolerance) {
                result.converged = true;
                return;
            }
        }
    }

    // Newton on the co-content E(v) = sum_e integral_0^{v_e} I_e. E is convex in the free
    // node voltages (every device is monotone), its gradient is the KCL residual and its
    // Hessian the differential-conductance Laplacian, so a backtracking line search on E
    // converges from any start. The factorization is reused across iterations and solves
    // (chord steps) until a chord step fails to cut the residual tenfold; the rest of the
    // solve then refactorizes every iteration.
    void solve_newton(Eigen::VectorXd& v, const SolveSettings& settings, SolveResult& result) {
        const auto m = static_cast<Eigen::Index>(unknowns_.size());
        Eigen::VectorXd trial = v;
        double energy = evaluate(v);
        bool allow_chord = true;
        for (int iter = 0; iter < settings.max_fixed_point_iters; ++iter) {
            for (Eigen::Index k = 0; k < m; ++k) rhs_[k] = node_net_[unknowns_[static_cast<std::size_t>(k)]];
            const bool chord = allow_chord && jacobian_ready_;
            if (!chord) {
                assemble_jacobian(settings);
                factorize();
                jacobian_ready_ = true;
            }
            solution_ = -solve_factored(rhs_);
            if (!solution_.allFinite()) throw SolverError("nodal solve produced non-finite voltages");
            const double slope = rhs_.dot(solution_);
            const double residual = rhs_.cwiseAbs().maxCoeff();
            const double source = node_net_[topology_.input_node];

            double t = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                trial = v;
                for (Eigen::Index k = 0; k < m; ++k) {
                    trial[static_cast<Eigen::Index>(unknowns_[static_cast<std::size_t>(k)])] += t * solution_[k];
                }
                const double trial_energy = evaluate(trial);
                if (trial_energy <= energy + 1.0e-4 * t * slope || free_residual() < residual) {
                    accepted = true;
                    energy = trial_energy;
                    break;
                }
                t *= 0.5;
            }
            result.iterations = iter + 1;
            if (!accepted) {
                if (chord) {
                    allow_chord = false;
                    evaluate(v);
                    continue;
                }
                // No descent left at machine precision: accept the point if it balances.
                result.converged = residual <= settings.relative_kcl_tolerance * std::abs(source);
                return;
            }
            v.swap(trial);
            const double new_residual = free_residual();
            if (t * solution_.cwiseAbs().maxCoeff() < settings.voltage_tolerance &&
                new_residual <= settings.relative_kcl_tolerance * std::abs(node_net_[topology_.input_node])) {
                result.converged = true;
                return;
            }
            if (chord && new_residual > 0.1 * residual) allow_chord = false;
        }
    }

    // Fallback when the warm-started solve fails: restart from rest and ramp the source
    // up in equal steps, each warm-started from the one before.
    void continuation(Eigen::VectorXd& v, double to, const SolveSettings& settings, SolveResult& result) {
        constexpr int ramp_steps = 8;
        const auto input = static_cast<Eigen::Index>(topology_.input_node);
        v.setZero();
        jacobian_ready_ = false;
        int total = result.iterations;
        for (int k = 1; k <= ramp_steps; ++k) {
            v[input] = k == ramp_steps ? to : to * k / ramp_steps;
            SolveResult part;
            solve_newton(v, settings, part);
            total += part.iterations;
            result.converged = part.converged;
        }
        result.iterations = total;
    }

    void assemble_jacobian(const SolveSettings& settings) {
        for (std::size_t e = 0; e < topology_.edges.size(); ++e) {
            jacobian_g_[e] = std::max(edge_g_[e], settings.min_conductance);
        }
        stamp_jacobian();
    }

    void stamp_jacobian() {
        const auto m = static_cast<Eigen::Index>(unknowns_.size());
        matrix_.setZero(m, m);
        for (std::size_t e = 0; e < topology_.edges.size(); ++e) {
            const auto& edge = topology_.edges[e];
            const double g = jacobian_g_[e];
            const auto ia = index_[edge.a];
            const auto ib = index_[edge.b];
            if (ia >= 0) matrix_(ia, ia) += g;
            if (ib >= 0) matrix_(ib, ib) += g;
            if (ia >= 0 && ib >= 0) {
                matrix_(ia, ib) -= g;
                matrix_(ib, ia) -= g;
            }
        }
    }

    // Co-content, net current leaving every node and differential conductance per edge
    // at node voltages `v`. Results land in node_net_ and edge_g_.
    double evaluate(const Eigen::VectorXd& v) {
        std::fill(node_net_.begin(), node_net_.end(), 0.0);
        const double sigma = params_.sigma;
        const double beta = params_.beta;
        const double gamma = params_.gamma;
        const double delta = params_.delta;
        double energy = 0.0;
        for (std::size_t e = 0; e < topology_.edges.size(); ++e) {
            const auto& edge = topology_.edges[e];
            const double vb = branch_voltage(v, edge);
            const double w = states_[e].w;
            double i = 0.0;
            double g = 0.0;
            if (w < 1.0) {
                const double off = std::expm1(-beta * vb);  // exp(-beta v) - 1
                i += (1.0 - w) * sigma * -off;
                g += (1.0 - w) * sigma * beta * (1.0 + off);
                energy += (1.0 - w) * sigma * (vb + off / beta);
            }
            if (w > 0.0) {
                // sinh and cosh - 1 from one expm1 of |delta v|, finite for any sign.
                const double x = delta * vb;
                const double em1 = std::expm1(std::abs(x));
                const double ep = 1.0 + em1;
                const double ratio = std::isinf(em1) ? 1.0 : em1 / ep;
                const double sinh_dv = std::copysign(0.5 * (em1 + ratio), x);
                const double cosh_dv_m1 = 0.5 * em1 * ratio;
                i += w * gamma * sinh_dv;
                g += w * gamma * delta * (1.0 + cosh_dv_m1);
                energy += w * gamma * cosh_dv_m1 / delta;
            }
            edge_g_[e] = g;
            node_net_[edge.a] += i;
            node_net_[edge.b] -= i;
        }
        return energy;
    }

    [[nodiscard]] double free_residual() const {
        double worst = 0.0;
        for (const auto n : unknowns_) worst = std::max(worst, std::abs(node_net_[n]));
        return worst;
    }

    // Plain Cholesky first; a system whose conductances span too many decades for that
    // is refactorized after symmetric diagonal scaling.
    void factorize() {
        scaled_ = false;
        llt_.compute(matrix_);
        if (llt_.info() == Eigen::Success) return;
        scale_ = matrix_.diagonal().cwiseSqrt().cwiseInverse();
        matrix_ = scale_.asDiagonal() * matrix_ * scale_.asDiagonal();
        llt_.compute(matrix_);
        if (llt_.info() != Eigen::Success || !scale_.allFinite()) {
            throw SolverError("nodal system is singular after conductance flooring");
        }
        scaled_ = true;
    }

    [[nodiscard]] Eigen::VectorXd solve_factored(const Eigen::VectorXd& b) const {
        if (!scaled_) return llt_.solve(b);
        return scale_.cwiseProduct(llt_.solve(scale_.cwiseProduct(b)).eval());
    }

    [[nodiscard]] double secant_conductance(std::size_t e, double vb) const {
        const double w = states_[e].w;
        if (mode_ == DeviceMode::linearized || std::abs(vb) < 1.0e-9) {
            return small_signal_conductance(params_, w);
        }
        return current(params_, w, vb) / vb;
    }

    void stamp(std::size_t a, std::size_t b, double g, double input_voltage) {
        const auto ia = index_[a];
        const auto ib = index_[b];
        if (ia >= 0) {
            matrix_(ia, ia) += g;
            if (ib >= 0) {
                matrix_(ia, ib) -= g;
            } else if (b == topology_.input_node) {
                rhs_[ia] += g * input_voltage;
            }
        }
        if (ib >= 0) {
            matrix_(ib, ib) += g;
            if (ia >= 0) {
                matrix_(ib, ia) -= g;
            } else if (a == topology_.input_node) {
                rhs_[ib] += g * input_voltage;
            }
        }
    }

    void build_index() {
        const auto n = topology_.node_count;
        std::vector<bool> anchored(n, false);
        const auto from_input = reachable_from(topology_, topology_.input_node);
        const auto from_ground = reachable_from(topology_, topology_.ground_node);
        for (std::size_t i = 0; i < n; ++i) anchored[i] = from_input[i] || from_ground[i];

        index_.assign(n, -1);
        unknowns_.clear();
        floating_.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (i == topology_.input_node || i == topology_.ground_node) continue;
            if (!anchored[i]) {
                floating_.push_back(i);
                continue;
            }
            index_[i] = static_cast<Eigen::Index>(unknowns_.size());
            unknowns_.push_back(i);
        }
        node_net_.assign(n, 0.0);
        edge_g_.assign(topology_.edges.size(), 0.0);
        jacobian_g_.assign(topology_.edges.size(), 0.0);
        rhs_.setZero(static_cast<Eigen::Index>(unknowns_.size()));
    }

    NetworkTopology topology_;
    DeviceParams params_;
    std::vector<DeviceState> states_;
    Eigen::VectorXd last_voltages_;
    DeviceMode mode_ = DeviceMode::nonlinear;
    bool frozen_ = false;
    bool jacobian_ready_ = false;
    SolveStats stats_;

    std::vector<Eigen::Index> index_;
    std::vector<std::size_t> unknowns_;
    std::vector<std::size_t> floating_;
    std::vector<double> node_net_;
    std::vector<double> edge_g_;
    std::vector<double> jacobian_g_;

    // scratch owned by this network
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd rhs_;
    Eigen::VectorXd solution_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd scale_;
    bool scaled_ = false;
};

/// Converged node voltages for `input_voltage`; cached in the network for warm starts.
inline SolveResult solve_dc(MemristiveNetwork& network, double input_voltage,
                            const SolveSettings& settings = {}) {
    return network.solve(input_voltage, settings);
}

struct StepResult {
    Eigen::VectorXd readout;
    bool converged = true;
};

/// One quasi-static timestep: solve, then integrate every device over `dt` at its
/// converged branch voltage. Returns the differential readouts of the solved point.
inline StepResult step_network(MemristiveNetwork& network, double input_voltage, double dt,
                               const SolveSettings& settings = {}) {
    if (!(dt > 0.0)) throw InvalidArgument("step_network: dt must be > 0");
    auto solved = network.solve(input_voltage, settings);
    network.advance_states(solved.voltages, dt);
    return StepResult{network.readout(solved.voltages), solved.converged};
}

/// Source current at `probe_voltage`, without disturbing the network's cached state.
[[nodiscard]] inline double network_impedance_signature(const MemristiveNetwork& network,
                                                        double probe_voltage,
                                                        const SolveSettings& settings = {}) {
    if (probe_voltage == 0.0) throw InvalidArgument("probe voltage must be nonzero");
    MemristiveNetwork probe = network;
    const auto solved = probe.solve(probe_voltage, settings);
    return probe.source_current(solved.voltages);
}

/// Indices of readout pairs whose differential stays below `threshold` volts over a
/// probe sweep. A pair in this list contributes nothing to a readout layer.
[[nodiscard]] inline std::vector<std::size_t> dead_readouts(const MemristiveNetwork& network,
                                                            const std::vector<double>& probes,
                                                            const SolveSettings& settings = {},
                                                            double threshold = 1.0e-12) {
    MemristiveNetwork probe = network;
    const auto pairs = network.topology().readout_pairs.size();
    std::vector<double> peak(pairs, 0.0);
    for (const double p : probes) {
        const auto r = probe.readout(probe.solve(p, settings).voltages);
        for (std::size_t i = 0; i < pairs; ++i) {
            peak[i] = std::max(peak[i], std::abs(r[static_cast<Eigen::Index>(i)]));
        }
    }
    std::vector<std::size_t> dead;
    for (std::size_t i = 0; i < pairs; ++i) {
        if (peak[i] < threshold) dead.push_back(i);
    }
    return dead;
}

}  // namespace memrc
