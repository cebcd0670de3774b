#pragma once

// Seeded multi-trial experiments over (v, lambda) grids, the SCR versus
// single-network comparison, and CSV emission with provenance lines.

#include "memrc/config.hpp"
#include "memrc/device.hpp"
#include "memrc/error.hpp"
#include "memrc/learn.hpp"
#include "memrc/network.hpp"
#include "memrc/reservoir.hpp"
#include "memrc/seed.hpp"
#include "memrc/stats.hpp"
#include "memrc/tasks.hpp"
#include "memrc/text.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace memrc {

inline constexpr std::string_view version = "0.1.0";

/// Metric columns a task reports; `primary` feeds heatmaps and best-cell selection.
struct MetricLayout {
    std::vector<std::string> names;
    std::size_t primary = 0;
    bool higher_is_better = false;
};

[[nodiscard]] inline MetricLayout metric_layout(const TaskConfig& task) {
    switch (task.kind) {
        case TaskKind::memory_capacity: {
            MetricLayout m{{"mc"}, 0, true};
            for (std::size_t phi = 1; phi <= task.max_delay; ++phi) m.names.push_back("c_" + std::to_string(phi));
            return m;
        }
        case TaskKind::narma10:
        case TaskKind::mso:
            return {{"nrmse", "mse"}, 0, false};
        case TaskKind::hhg_sine:
        case TaskKind::hhg_triangle:
        case TaskKind::hhg_square:
            return {{"mse", "nrmse"}, 0, false};
        case TaskKind::hhg_combined:
            return {{"mse", "mse_sine", "mse_triangle", "mse_square"}, 0, false};
    }
    return {};
}

struct TrialOutcome {
    std::vector<double> metrics;
    SolveStats solver;
    std::size_t clip_events = 0;
    std::size_t regenerations = 0;
    std::vector<double> trace;  ///< node 0 state series when requested
};

[[nodiscard]] inline std::unique_ptr<Reservoir> make_reservoir(const ArchitectureConfig& a, const ExperimentConfig& c,
                                                               double v, double lambda, std::uint64_t seed) {
    switch (a.kind) {
        case ArchitectureKind::scr: {
            ScrConfig s;
            s.n_nodes = a.n_nodes;
            s.input_coeff = v;
            s.spectral_radius = lambda;
            s.network_nodes_min = a.network_nodes_min;
            s.network_nodes_max = a.network_nodes_max;
            s.k_degree = a.k_degree;
            s.dt = c.task.dt;
            s.substeps = a.substeps;
            s.drive_clip = a.drive_clip;
            s.input_offset = a.input_offset;
            s.seed = seed;
            s.device = c.device;
            s.solver = c.solver;
            return std::make_unique<ScrReservoir>(build_scr(s));
        }
        case ArchitectureKind::single_network: {
            SingleNetworkConfig s;
            s.n_circuit_nodes = a.n_circuit_nodes;
            s.n_readout_pairs = a.n_readout_pairs;
            s.k_degree = a.k_degree;
            s.input_coeff = v;
            s.dt = c.task.dt;
            s.substeps = a.substeps;
            s.drive_clip = a.drive_clip;
            s.input_offset = a.input_offset;
            s.seed = seed;
            s.device = c.device;
            s.solver = c.solver;
            return std::make_unique<SingleNetworkReservoir>(build_single_network_reservoir(s));
        }
        case ArchitectureKind::sigmoid_scr:
            return std::make_unique<SigmoidScr>(a.n_nodes, v, lambda, seed);
    }
    throw InvalidArgument("unknown architecture");
}

namespace detail {

inline double held_out_mse(const Eigen::MatrixXd& states, const TimeSeries& target, const SplitSpec& split) {
    const auto h = fit_and_test(states, target.samples, split);
    return mse(h.prediction, h.target);
}

inline void held_out_errors(const Eigen::MatrixXd& states, const TimeSeries& target, const SplitSpec& split,
                            double& nrmse_out, double& mse_out) {
    const auto h = fit_and_test(states, target.samples, split);
    mse_out = mse(h.prediction, h.target);
    nrmse_out = nrmse(h.prediction, h.target);
}

inline Eigen::MatrixXd drive(Reservoir& r, const TimeSeries& input, TrialOutcome& out, bool trace) {
    auto states = run_reservoir(r, input);
    if (trace) out.trace.assign(states.col(0).data(), states.col(0).data() + states.rows());
    return states;
}

}  // namespace detail

/// One trial: build the architecture from `seed`, generate the task data, run,
/// train on the train block and evaluate on the held-out block.
[[nodiscard]] inline TrialOutcome run_trial(const ExperimentConfig& c, const ArchitectureConfig& arch, double v,
                                            double lambda, std::uint64_t seed, bool trace = false) {
    TrialOutcome out;
    auto reservoir = make_reservoir(arch, c, v, lambda, derive_seed(seed, {0}));
    const auto& t = c.task;
    switch (t.kind) {
        case TaskKind::memory_capacity: {
            const auto u = uniform_series(t.input_low, t.input_high, t.length, derive_seed(seed, {1, 0}), t.dt);
            const auto states = detail::drive(*reservoir, u, out, trace);
            const auto mc = memory_capacity(states, u, c.split, t.max_delay);
            out.metrics.push_back(mc.total);
            out.metrics.insert(out.metrics.end(), mc.per_delay.begin(), mc.per_delay.end());
            break;
        }
        case TaskKind::narma10: {
            constexpr std::size_t max_attempts = 1000;
            TimeSeries u;
            TimeSeries y;
            for (std::size_t attempt = 0;; ++attempt) {
                if (attempt == max_attempts) throw SolverError("narma10: no non-divergent input found");
                u = uniform_series(0.0, 0.5, t.length, derive_seed(seed, {1, attempt}), t.dt);
                try {
                    y = narma10(u);
                    break;
                } catch (const DivergentSequence&) {
                    ++out.regenerations;
                }
            }
            const auto states = detail::drive(*reservoir, u, out, trace);
            double e = 0.0;
            double m = 0.0;
            detail::held_out_errors(states, y, c.split, e, m);
            out.metrics = {e, m};
            break;
        }
        case TaskKind::mso: {
            const auto task = mso_task(t.dt, t.length, t.horizon, t.time_unit);
            const auto states = detail::drive(*reservoir, task.input, out, trace);
            double e = 0.0;
            double m = 0.0;
            detail::held_out_errors(states, task.target, c.split, e, m);
            out.metrics = {e, m};
            break;
        }
        case TaskKind::hhg_sine:
        case TaskKind::hhg_triangle:
        case TaskKind::hhg_square: {
            const auto task = t.kind == TaskKind::hhg_sine       ? hhg_sine_task(t.frequency, t.dt, t.length)
                              : t.kind == TaskKind::hhg_triangle ? hhg_triangle_task(t.frequency, t.dt, t.length)
                                                                 : hhg_square_task(t.frequency, t.dt, t.length);
            const auto states = detail::drive(*reservoir, task.input, out, trace);
            double e = 0.0;
            double m = 0.0;
            detail::held_out_errors(states, task.target, c.split, e, m);
            out.metrics = {m, e};
            break;
        }
        case TaskKind::hhg_combined: {
            // All three targets share the same sine input, so one run feeds three readouts.
            const auto sine_task = hhg_sine_task(t.frequency, t.dt, t.length);
            const auto states = detail::drive(*reservoir, sine_task.input, out, trace);
            const double a = detail::held_out_mse(states, sine_task.target, c.split);
            const double b = detail::held_out_mse(states, triangle_wave(t.frequency, t.dt, t.length), c.split);
            const double d = detail::held_out_mse(states, square_wave(t.frequency, t.dt, t.length), c.split);
            out.metrics = {a + b + d, a, b, d};
            break;
        }
    }
    out.solver = reservoir->solver_stats();
    out.clip_events = reservoir->clip_events();
    return out;
}

/// Worker count: the explicit request, else MEMRC_THREADS, else 1.
[[nodiscard]] inline std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MEMRC_THREADS")) {
        try {
            const auto n = text::parse_int(env);
            if (n > 0) return static_cast<std::size_t>(n);
        } catch (const InvalidArgument&) {
        }
    }
    return 1;
}

/// Runs fn(0..n-1) on up to `threads` workers. The first exception is rethrown after all workers stop.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto worker = [&] {
        while (!failed.load()) {
            const auto i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

struct TrialRecord {
    std::size_t cell = 0;
    std::size_t trial = 0;
    double v = 0.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> metrics;
    SolveStats solver;
    std::size_t clip_events = 0;
    std::size_t regenerations = 0;
};

struct CellSummary {
    std::size_t cell = 0;
    double v = 0.0;
    double lambda = 0.0;
    double mean = 0.0;   ///< primary metric over trials
    double stdev = 0.0;
    SolveStats solver;
    std::size_t clip_events = 0;
    std::size_t regenerations = 0;
    bool tainted = false;  ///< unconverged solves above the configured fraction

    [[nodiscard]] double unconverged_fraction() const {
        return solver.solves == 0 ? 0.0 : static_cast<double>(solver.unconverged) / static_cast<double>(solver.solves);
    }
};

struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string version{memrc::version};
};

struct ExperimentReport {
    MetricLayout layout;
    std::vector<CellSummary> cells;
    std::vector<TrialRecord> trials;  ///< cell-major, trial-minor
    Provenance provenance;
    std::vector<double> trace;

    [[nodiscard]] bool tainted() const {
        for (const auto& c : cells) {
            if (c.tainted) return true;
        }
        return false;
    }

    /// Best cell by the primary metric (first on ties).
    [[nodiscard]] const CellSummary& best_cell() const {
        if (cells.empty()) throw InvalidArgument("report has no cells");
        std::size_t best = 0;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            const bool better = layout.higher_is_better ? cells[i].mean > cells[best].mean : cells[i].mean < cells[best].mean;
            if (better) best = i;
        }
        return cells[best];
    }

    /// Primary metric of every trial in `cell`.
    [[nodiscard]] std::vector<double> primary_values(std::size_t cell) const {
        std::vector<double> out;
        for (const auto& t : trials) {
            if (t.cell == cell) out.push_back(t.metrics[layout.primary]);
        }
        return out;
    }
};

/// Seed of (cell, trial); paired trials share one seed per trial index across cells.
[[nodiscard]] inline std::uint64_t trial_seed(const ExperimentConfig& c, std::size_t cell, std::size_t trial) {
    return c.paired_trials ? derive_seed(c.seed, {trial}) : derive_seed(c.seed, {cell, trial});
}

namespace detail {

inline void summarize(ExperimentReport& report, double max_unconverged_fraction) {
    for (auto& cell : report.cells) {
        const auto values = report.primary_values(cell.cell);
        cell.mean = stats::mean(values);
        cell.stdev = stats::stdev(values);
        for (const auto& t : report.trials) {
            if (t.cell != cell.cell) continue;
            cell.solver += t.solver;
            cell.clip_events += t.clip_events;
            cell.regenerations += t.regenerations;
        }
        cell.tainted = cell.unconverged_fraction() > max_unconverged_fraction;
    }
}

inline TrialRecord to_record(std::size_t cell, std::size_t trial, double v, double lambda, std::uint64_t seed,
                             TrialOutcome&& o) {
    TrialRecord r;
    r.cell = cell;
    r.trial = trial;
    r.v = v;
    r.lambda = lambda;
    r.seed = seed;
    r.metrics = std::move(o.metrics);
    r.solver = o.solver;
    r.clip_events = o.clip_events;
    r.regenerations = o.regenerations;
    return r;
}

}  // namespace detail

/// Every (v, lambda) cell times every trial. Cell index = v index * |lambda grid| + lambda index.
/// Results depend only on the config, never on the worker count or completion order.
[[nodiscard]] inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report;
    report.layout = metric_layout(config.task);
    report.provenance = Provenance{config.hash(), config.seed};
    const auto& sweep = config.sweep;
    const std::size_t n_cells = sweep.cells();
    for (std::size_t iv = 0; iv < sweep.v.size(); ++iv) {
        for (std::size_t il = 0; il < sweep.lambda.size(); ++il) {
            CellSummary cell;
            cell.cell = iv * sweep.lambda.size() + il;
            cell.v = sweep.v[iv];
            cell.lambda = sweep.lambda[il];
            report.cells.push_back(cell);
        }
    }
    const std::size_t n_items = n_cells * config.trials;
    report.trials.resize(n_items);
    parallel_for(n_items, resolve_threads(config.threads), [&](std::size_t item) {
        const std::size_t cell = item / config.trials;
        const std::size_t trial = item % config.trials;
        const auto seed = trial_seed(config, cell, trial);
        const double v = report.cells[cell].v;
        const double lambda = report.cells[cell].lambda;
        const bool trace = config.trace && item == 0;
        auto outcome = run_trial(config, config.architecture, v, lambda, seed, trace);
        if (trace) report.trace = std::move(outcome.trace);
        report.trials[item] = detail::to_record(cell, trial, v, lambda, seed, std::move(outcome));
    });
    detail::summarize(report, config.max_unconverged_fraction);
    return report;
}

// ---------------------------------------------------------------------------
// Architecture comparison: for each count k, an SCR with k nodes against one
// network with k readout pairs, both swept over the v grid (the SCR also over
// lambda) with the same trial seeds. Each side is scored at its best cell.
// ---------------------------------------------------------------------------

struct ComparisonCell {
    std::size_t count = 0;
    ArchitectureKind architecture = ArchitectureKind::scr;
    double v = 0.0;
    double lambda = 0.0;  ///< unused by the single network
    std::vector<double> values;  ///< primary metric per trial
    SolveStats solver;
    std::size_t clip_events = 0;
    double mean = 0.0;
    double stdev = 0.0;
    bool tainted = false;
};

struct ComparisonRow {
    std::size_t count = 0;
    ArchitectureKind architecture = ArchitectureKind::scr;
    std::size_t best = 0;  ///< index into Comparison::cells
};

struct Comparison {
    MetricLayout layout;
    std::vector<ComparisonCell> cells;
    std::vector<ComparisonRow> rows;  ///< per count: scr row, then single-network row
    Provenance provenance;

    [[nodiscard]] const ComparisonCell& best(std::size_t count, ArchitectureKind kind) const {
        for (const auto& r : rows) {
            if (r.count == count && r.architecture == kind) return cells[r.best];
        }
        throw InvalidArgument("no comparison row for count " + std::to_string(count));
    }

    /// Relative improvement of the SCR over the single network at `count`: 1 - scr / single.
    [[nodiscard]] double improvement(std::size_t count) const {
        const double scr = best(count, ArchitectureKind::scr).mean;
        const double single = best(count, ArchitectureKind::single_network).mean;
        return layout.higher_is_better ? scr / single - 1.0 : 1.0 - scr / single;
    }
};

[[nodiscard]] inline Comparison compare_architectures(const ExperimentConfig& config,
                                                      const std::vector<std::size_t>& counts) {
    config.validate();
    if (counts.empty()) throw InvalidArgument("compare_architectures: no counts");
    Comparison out;
    out.layout = metric_layout(config.task);
    out.provenance = Provenance{config.hash(), config.seed};
    std::vector<std::size_t> count_index;
    for (std::size_t ik = 0; ik < counts.size(); ++ik) {
        for (const auto kind : {ArchitectureKind::scr, ArchitectureKind::single_network}) {
            ComparisonRow row{counts[ik], kind, out.cells.size()};
            for (const double v : config.sweep.v) {
                const std::vector<double> lambdas =
                    kind == ArchitectureKind::scr ? config.sweep.lambda : std::vector<double>{0.0};
                for (const double lambda : lambdas) {
                    ComparisonCell cell;
                    cell.count = counts[ik];
                    cell.architecture = kind;
                    cell.v = v;
                    cell.lambda = lambda;
                    cell.values.resize(config.trials);
                    out.cells.push_back(cell);
                    count_index.push_back(ik);
                }
            }
            out.rows.push_back(row);
        }
    }
    const std::size_t n_items = out.cells.size() * config.trials;
    std::vector<TrialOutcome> outcomes(n_items);
    parallel_for(n_items, resolve_threads(config.threads), [&](std::size_t item) {
        const auto& cell = out.cells[item / config.trials];
        const std::size_t trial = item % config.trials;
        ArchitectureConfig arch = config.architecture;
        arch.kind = cell.architecture;
        if (cell.architecture == ArchitectureKind::scr) arch.n_nodes = cell.count;
        else arch.n_readout_pairs = cell.count;
        const auto seed = derive_seed(config.seed, {count_index[item / config.trials], trial});
        outcomes[item] = run_trial(config, arch, cell.v, cell.lambda, seed);
    });
    for (std::size_t ci = 0; ci < out.cells.size(); ++ci) {
        auto& cell = out.cells[ci];
        for (std::size_t t = 0; t < config.trials; ++t) {
            auto& o = outcomes[ci * config.trials + t];
            cell.values[t] = o.metrics[out.layout.primary];
            cell.solver += o.solver;
            cell.clip_events += o.clip_events;
        }
        cell.mean = stats::mean(cell.values);
        cell.stdev = stats::stdev(cell.values);
        cell.tainted = cell.solver.solves > 0 &&
                       static_cast<double>(cell.solver.unconverged) / static_cast<double>(cell.solver.solves) >
                           config.max_unconverged_fraction;
    }
    for (auto& row : out.rows) {
        for (std::size_t ci = 0; ci < out.cells.size(); ++ci) {
            const auto& cell = out.cells[ci];
            if (cell.count != row.count || cell.architecture != row.architecture) continue;
            const double cur = out.cells[row.best].mean;
            const bool better = out.layout.higher_is_better ? cell.mean > cur : cell.mean < cur;
            if (better) row.best = ci;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV output. Every file starts with a `#` provenance line, then a header row.
// ---------------------------------------------------------------------------

inline void write_provenance(std::ostream& out, const Provenance& p) {
    out << "# memrc " << p.version << " config_hash=" << text::hex64(p.config_hash) << " seed=" << p.seed << '\n';
}

inline void write_metrics_csv(std::ostream& out, const ExperimentReport& r) {
    write_provenance(out, r.provenance);
    out << "cell,trial,v,lambda,seed";
    for (const auto& n : r.layout.names) out << ',' << n;
    out << ",solves,unconverged,clip_events,regenerations\n";
    for (const auto& t : r.trials) {
        out << t.cell << ',' << t.trial << ',' << text::format_full(t.v) << ',' << text::format_full(t.lambda) << ','
            << t.seed;
        for (const double m : t.metrics) out << ',' << text::format_full(m);
        out << ',' << t.solver.solves << ',' << t.solver.unconverged << ',' << t.clip_events << ','
            << t.regenerations << '\n';
    }
}

inline void write_heatmap_csv(std::ostream& out, const ExperimentReport& r) {
    write_provenance(out, r.provenance);
    out << "v,lambda,mean,stdev,metric,unconverged_fraction,clip_events,tainted\n";
    for (const auto& c : r.cells) {
        out << text::format_full(c.v) << ',' << text::format_full(c.lambda) << ',' << text::format_full(c.mean) << ','
            << text::format_full(c.stdev) << ',' << r.layout.names[r.layout.primary] << ','
            << text::format_full(c.unconverged_fraction()) << ',' << c.clip_events << ','
            << (c.tainted ? 1 : 0) << '\n';
    }
}

inline void write_comparison_csv(std::ostream& out, const Comparison& c) {
    write_provenance(out, c.provenance);
    out << "count,architecture,v,lambda,mean,stdev,metric,best,tainted\n";
    for (std::size_t ci = 0; ci < c.cells.size(); ++ci) {
        const auto& cell = c.cells[ci];
        bool best = false;
        for (const auto& r : c.rows) best = best || r.best == ci;
        out << cell.count << ',' << to_string(cell.architecture) << ',' << text::format_full(cell.v) << ',';
        if (cell.architecture == ArchitectureKind::scr) out << text::format_full(cell.lambda);
        out << ',' << text::format_full(cell.mean) << ',' << text::format_full(cell.stdev) << ','
            << c.layout.names[c.layout.primary] << ',' << (best ? 1 : 0) << ',' << (cell.tainted ? 1 : 0) << '\n';
    }
}

inline void write_trace_csv(std::ostream& out, const Provenance& p, const std::vector<double>& trace, double dt) {
    write_provenance(out, p);
    write_series_csv(out, TimeSeries(trace, dt));
}

// ---------------------------------------------------------------------------
// Device calibration: switching excursion against sine amplitude, plus full
// traces at a few amplitudes for hysteresis plots.
// ---------------------------------------------------------------------------

struct CalibrationRow {
    double amplitude;
    double excursion;
    double peak_current;
};

[[nodiscard]] inline std::vector<CalibrationRow> calibration_sweep(const DeviceParams& p, double a_min = 0.1,
                                                                   double a_max = 2.0, double step = 0.05,
                                                                   double frequency = 10.0) {
    if (!(step > 0.0) || a_max < a_min) throw InvalidArgument("calibration_sweep: bad amplitude range");
    std::vector<CalibrationRow> rows;
    const auto n = static_cast<std::size_t>(std::floor((a_max - a_min) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = a_min + static_cast<double>(k) * step;
        const auto trace = switching_trace(p, a, frequency);
        double peak = 0.0;
        for (const auto& s : trace) peak = std::max(peak, std::abs(s.i));
        rows.push_back(CalibrationRow{a, switching_excursion(p, a, frequency), peak});
    }
    return rows;
}

inline void write_calibration_csv(std::ostream& out, const Provenance& p, const std::vector<CalibrationRow>& rows) {
    write_provenance(out, p);
    out << "amplitude_v,w_excursion,peak_current_a\n";
    for (const auto& r : rows) {
        out << text::format_full(r.amplitude) << ',' << text::format_full(r.excursion) << ','
            << text::format_full(r.peak_current) << '\n';
    }
}

inline void write_switching_csv(std::ostream& out, const Provenance& p, const DeviceParams& params,
                                const std::vector<double>& amplitudes, double frequency = 10.0,
                                std::size_t stride = 10) {
    write_provenance(out, p);
    out << "amplitude_v,t,v,i,w\n";
    for (const double a : amplitudes) {
        const auto trace = switching_trace(params, a, frequency);
        for (std::size_t k = 0; k < trace.size(); k += stride) {
            const auto& s = trace[k];
            out << text::format_full(a) << ',' << text::format_full(s.t) << ',' << text::format_full(s.v) << ','
                << text::format_full(s.i) << ',' << text::format_full(s.w) << '\n';
        }
    }
}

}  // namespace memrc
