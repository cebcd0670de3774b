#pragma once

// Experiment configuration: a flat INI file with the sections
//
//   [experiment]   name, trials, seed, output_dir (default out/<name>), threads, paired_trials,
//                  max_unconverged_fraction, trace
//   [task]         name, length, dt, frequency, horizon, time_unit, max_delay,
//                  input_low, input_high
//   [readout]      washout, train_fraction, ridge
//   [architecture] type, n_nodes, network_nodes_min, network_nodes_max, k_degree,
//                  substeps, drive_clip, input_offset, n_circuit_nodes, n_readout_pairs
//   [sweep]        v, lambda            (comma lists or start:step:stop ranges)
//   [compare]      counts               (architecture comparison: SCR nodes vs readout pairs)
//   [device]       params_file and/or any of the seven device constants
//   [solver]       method, max_iterations, voltage_tolerance, relative_kcl_tolerance,
//                  min_conductance
//
// Every key is optional except [task] name and [architecture] type. Unknown
// sections and keys are errors that name the offending entry.

#include "memrc/device.hpp"
#include "memrc/error.hpp"
#include "memrc/learn.hpp"
#include "memrc/network.hpp"
#include "memrc/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace memrc {

enum class TaskKind { memory_capacity, narma10, mso, hhg_sine, hhg_triangle, hhg_square, hhg_combined };
enum class ArchitectureKind { scr, single_network, sigmoid_scr };

[[nodiscard]] inline std::string_view to_string(TaskKind k) {
    switch (k) {
        case TaskKind::memory_capacity: return "memory_capacity";
        case TaskKind::narma10: return "narma10";
        case TaskKind::mso: return "mso";
        case TaskKind::hhg_sine: return "hhg_sine";
        case TaskKind::hhg_triangle: return "hhg_triangle";
        case TaskKind::hhg_square: return "hhg_square";
        case TaskKind::hhg_combined: return "hhg_combined";
    }
    return "?";
}

[[nodiscard]] inline std::string_view to_string(ArchitectureKind k) {
    switch (k) {
        case ArchitectureKind::scr: return "scr";
        case ArchitectureKind::single_network: return "single-network";
        case ArchitectureKind::sigmoid_scr: return "sigmoid-scr";
    }
    return "?";
}

struct TaskConfig {
    TaskKind kind = TaskKind::memory_capacity;
    std::size_t length = 2200;
    double dt = 1.0e-3;
    double frequency = 20.0;    ///< HHG input frequency (Hz)
    double horizon = 5.0e-3;    ///< MSO prediction horizon (s)
    double time_unit = 0.0;     ///< MSO oscillator time unit (s); 0 ties it to dt
    std::size_t max_delay = 10; ///< memory capacity delays 1..max_delay
    double input_low = -0.8;    ///< memory capacity input range
    double input_high = 0.8;
};

struct ArchitectureConfig {
    ArchitectureKind kind = ArchitectureKind::scr;
    std::size_t n_nodes = 20;
    std::size_t network_nodes_min = 30;
    std::size_t network_nodes_max = 40;
    std::size_t k_degree = 3;
    int substeps = 10;
    double drive_clip = 16.0;
    double input_offset = 0.0;
    std::size_t n_circuit_nodes = 80;
    std::size_t n_readout_pairs = 16;
};

struct SweepConfig {
    std::vector<double> v{1.0};
    std::vector<double> lambda{1.0};

    [[nodiscard]] std::size_t cells() const noexcept { return v.size() * lambda.size(); }
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::size_t threads = 0;              ///< 0: MEMRC_THREADS or 1
    bool paired_trials = false;           ///< trial t reuses its seeds in every cell
    double max_unconverged_fraction = 1.0e-3;
    bool trace = false;                   ///< record node 0 of cell 0, trial 0
    TaskConfig task{};
    SplitSpec split{TrainSpec{1.0e-8, 200}, 0.7};
    ArchitectureConfig architecture{};
    SweepConfig sweep{};
    std::vector<std::size_t> compare_counts;  ///< non-empty: run the architecture comparison
    DeviceParams device{};
    SolveSettings solver{};

    void validate() const {
        const auto fail = [](const std::string& key, const std::string& what) {
            throw ConfigError(key + ": " + what, key);
        };
        if (trials < 1) fail("experiment.trials", "must be >= 1");
        if (sweep.v.empty()) fail("sweep.v", "grid must not be empty");
        if (sweep.lambda.empty()) fail("sweep.lambda", "grid must not be empty");
        for (const double v : sweep.v) {
            if (!(v >= 0.0)) fail("sweep.v", "values must be >= 0");
        }
        for (const double l : sweep.lambda) {
            if (!(l >= 0.0)) fail("sweep.lambda", "values must be >= 0");
        }
        for (const auto k : compare_counts) {
            if (k < 2) fail("compare.counts", "values must be >= 2");
        }
        if (!compare_counts.empty() && architecture.kind == ArchitectureKind::sigmoid_scr) {
            fail("architecture.type", "comparison needs the memristive scr");
        }
        if (!(max_unconverged_fraction >= 0.0)) fail("experiment.max_unconverged_fraction", "must be >= 0");
        if (!(task.dt > 0.0)) fail("task.dt", "must be > 0");
        if (task.length < 2) fail("task.length", "must be >= 2");
        if (split.train.washout >= task.length) fail("readout.washout", "must be shorter than task.length");
        if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) fail("readout.train_fraction", "must lie in (0, 1)");
        if (!(split.train.ridge_coefficient >= 0.0)) fail("readout.ridge", "must be >= 0");
        if (task.kind == TaskKind::memory_capacity) {
            if (task.max_delay < 1) fail("task.max_delay", "must be >= 1");
            if (split.train.washout < task.max_delay) fail("readout.washout", "must be >= task.max_delay");
            if (!(task.input_high >= task.input_low)) fail("task.input_high", "must be >= task.input_low");
        }
        if (task.kind == TaskKind::mso) {
            if (!(task.horizon >= 0.0)) fail("task.horizon", "must be >= 0");
            if (!(task.time_unit >= 0.0)) fail("task.time_unit", "must be >= 0");
        }
        if (task.kind == TaskKind::hhg_sine || task.kind == TaskKind::hhg_triangle ||
            task.kind == TaskKind::hhg_square || task.kind == TaskKind::hhg_combined) {
            if (!(task.frequency > 0.0)) fail("task.frequency", "must be > 0");
            if (!(task.dt < 0.25 / task.frequency)) fail("task.dt", "must resolve the second harmonic");
        }
        const auto& a = architecture;
        if (a.n_nodes < 2) fail("architecture.n_nodes", "must be >= 2");
        if (a.network_nodes_min < 3) fail("architecture.network_nodes_min", "must be >= 3");
        if (a.network_nodes_max < a.network_nodes_min) fail("architecture.network_nodes_max", "must be >= network_nodes_min");
        if (a.k_degree < 1) fail("architecture.k_degree", "must be >= 1");
        if (a.kind == ArchitectureKind::scr && a.k_degree >= a.network_nodes_min) {
            fail("architecture.k_degree", "must be < network_nodes_min");
        }
        if (a.kind == ArchitectureKind::single_network && a.k_degree >= a.n_circuit_nodes) {
            fail("architecture.k_degree", "must be < n_circuit_nodes");
        }
        if (a.substeps < 1) fail("architecture.substeps", "must be >= 1");
        if (!(a.drive_clip > 0.0)) fail("architecture.drive_clip", "must be > 0");
        if (a.n_circuit_nodes < 3) fail("architecture.n_circuit_nodes", "must be >= 3");
        if (a.n_readout_pairs < 1) fail("architecture.n_readout_pairs", "must be >= 1");
        try {
            device.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("device: ") + e.what(), "device");
        }
        try {
            solver.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("solver: ") + e.what(), "solver");
        }
    }

    /// Every setting that influences emitted numbers, one `key = value` per line.
    /// Output location and thread count are excluded.
    [[nodiscard]] std::string canonical() const {
        std::ostringstream o;
        const auto list = [](const std::vector<double>& xs) {
            std::string s;
            for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + text::format_full(xs[i]);
            return s;
        };
        o << "experiment.name = " << name << '\n'
          << "experiment.trials = " << trials << '\n'
          << "experiment.seed = " << seed << '\n'
          << "experiment.paired_trials = " << (paired_trials ? "true" : "false") << '\n'
          << "experiment.max_unconverged_fraction = " << text::format_full(max_unconverged_fraction) << '\n'
          << "task.name = " << to_string(task.kind) << '\n'
          << "task.length = " << task.length << '\n'
          << "task.dt = " << text::format_full(task.dt) << '\n'
          << "task.frequency = " << text::format_full(task.frequency) << '\n'
          << "task.horizon = " << text::format_full(task.horizon) << '\n'
          << "task.time_unit = " << text::format_full(task.time_unit) << '\n'
          << "task.max_delay = " << task.max_delay << '\n'
          << "task.input_low = " << text::format_full(task.input_low) << '\n'
          << "task.input_high = " << text::format_full(task.input_high) << '\n'
          << "readout.washout = " << split.train.washout << '\n'
          << "readout.train_fraction = " << text::format_full(split.train_fraction) << '\n'
          << "readout.ridge = " << text::format_full(split.train.ridge_coefficient) << '\n'
          << "architecture.type = " << to_string(architecture.kind) << '\n'
          << "architecture.n_nodes = " << architecture.n_nodes << '\n'
          << "architecture.network_nodes_min = " << architecture.network_nodes_min << '\n'
          << "architecture.network_nodes_max = " << architecture.network_nodes_max << '\n'
          << "architecture.k_degree = " << architecture.k_degree << '\n'
          << "architecture.substeps = " << architecture.substeps << '\n'
          << "architecture.drive_clip = " << text::format_full(architecture.drive_clip) << '\n'
          << "architecture.input_offset = " << text::format_full(architecture.input_offset) << '\n'
          << "architecture.n_circuit_nodes = " << architecture.n_circuit_nodes << '\n'
          << "architecture.n_readout_pairs = " << architecture.n_readout_pairs << '\n'
          << "sweep.v = " << list(sweep.v) << '\n'
          << "sweep.lambda = " << list(sweep.lambda) << '\n';
        if (!compare_counts.empty()) {
            o << "compare.counts = ";
            for (std::size_t i = 0; i < compare_counts.size(); ++i) o << (i ? "," : "") << compare_counts[i];
            o << '\n';
        }
        for (const auto n : DeviceParams::names) o << "device." << n << " = " << text::format_full(device.get(n)) << '\n';
        o << "solver.method = " << (solver.method == SolveMethod::newton ? "newton" : "secant") << '\n'
          << "solver.max_iterations = " << solver.max_fixed_point_iters << '\n'
          << "solver.voltage_tolerance = " << text::format_full(solver.voltage_tolerance) << '\n'
          << "solver.relative_kcl_tolerance = " << text::format_full(solver.relative_kcl_tolerance) << '\n'
          << "solver.min_conductance = " << text::format_full(solver.min_conductance) << '\n';
        return o.str();
    }

    [[nodiscard]] std::uint64_t hash() const { return text::fnv1a(canonical()); }
};

namespace detail {

/// Comma list (`0.5, 1, 2`) or inclusive range (`1:1:15`).
[[nodiscard]] inline std::vector<double> parse_grid(std::string_view value) {
    std::vector<double> out;
    const auto colon = text::split(value, ':');
    if (colon.size() == 3) {
        const double start = text::parse_double(colon[0]);
        const double step = text::parse_double(colon[1]);
        const double stop = text::parse_double(colon[2]);
        if (!(step > 0.0) || stop < start) throw InvalidArgument("range needs step > 0 and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (n > 100000) throw InvalidArgument("range has too many points");
        for (std::size_t i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
    if (colon.size() != 1) throw InvalidArgument("expected a list or start:step:stop");
    for (const auto item : text::split(value, ',')) out.push_back(text::parse_double(item));
    return out;
}

[[nodiscard]] inline bool parse_bool(std::string_view v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw InvalidArgument("expected true or false");
}

[[nodiscard]] inline std::size_t parse_count(std::string_view v) {
    const auto n = text::parse_int(v);
    if (n < 0) throw InvalidArgument("expected a non-negative integer");
    return static_cast<std::size_t>(n);
}

}  // namespace detail

/// Parses an INI stream. Relative `params_file` paths resolve against `base_dir`.
[[nodiscard]] inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig c;
    std::map<std::string, std::pair<std::string, int>> entries;  // "section.key" -> (value, line)
    std::string section;
    std::string line;
    int line_no = 0;
    static const std::map<std::string, std::vector<std::string>> schema = {
        {"experiment", {"name", "trials", "seed", "output_dir", "threads", "paired_trials", "max_unconverged_fraction",
                        "trace"}},
        {"task", {"name", "length", "dt", "frequency", "horizon", "time_unit", "max_delay", "input_low", "input_high"}},
        {"readout", {"washout", "train_fraction", "ridge"}},
        {"architecture", {"type", "n_nodes", "network_nodes_min", "network_nodes_max", "k_degree", "substeps",
                          "drive_clip", "input_offset", "n_circuit_nodes", "n_readout_pairs"}},
        {"sweep", {"v", "lambda"}},
        {"compare", {"counts"}},
        {"device", {"params_file", "sigma", "beta", "gamma", "delta", "lambda_rate", "eta", "tau"}},
        {"solver", {"method", "max_iterations", "voltage_tolerance", "relative_kcl_tolerance", "min_conductance"}},
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = text::trim(text::strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            section = std::string(text::trim(body.substr(1, body.size() - 2)));
            if (!schema.contains(section)) throw ConfigError("unknown section [" + section + "]", section);
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(text::trim(body.substr(0, eq)));
        if (section.empty()) throw ConfigError("key '" + key + "' appears before any section", key);
        const std::string full = section + "." + key;
        const auto& allowed = schema.at(section);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + full + "'", full);
        }
        if (entries.contains(full)) throw ConfigError("duplicate key '" + full + "'", full);
        entries[full] = {std::string(text::trim(body.substr(eq + 1))), line_no};
    }

    const auto apply = [&](const std::string& key, const std::function<void(std::string_view)>& set) {
        const auto it = entries.find(key);
        if (it == entries.end()) return;
        try {
            set(it->second.first);
        } catch (const InvalidArgument& e) {
            throw ConfigError("line " + std::to_string(it->second.second) + ": " + key + ": " + e.what(), key);
        }
    };
    const auto require = [&](const std::string& key) {
        if (!entries.contains(key)) throw ConfigError("missing required key '" + key + "'", key);
    };

    apply("experiment.name", [&](auto v) { c.name = std::string(v); });
    apply("experiment.trials", [&](auto v) { c.trials = detail::parse_count(v); });
    apply("experiment.seed", [&](auto v) {
        std::uint64_t s = 0;
        const auto r = std::from_chars(v.data(), v.data() + v.size(), s);
        if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw InvalidArgument("expected an unsigned integer");
        c.seed = s;
    });
    c.output_dir = "out/" + c.name;
    apply("experiment.output_dir", [&](auto v) { c.output_dir = std::string(v); });
    apply("experiment.threads", [&](auto v) { c.threads = detail::parse_count(v); });
    apply("experiment.paired_trials", [&](auto v) { c.paired_trials = detail::parse_bool(v); });
    apply("experiment.trace", [&](auto v) { c.trace = detail::parse_bool(v); });
    apply("experiment.max_unconverged_fraction", [&](auto v) { c.max_unconverged_fraction = text::parse_double(v); });

    require("task.name");
    apply("task.name", [&](auto v) {
        static const std::map<std::string, TaskKind, std::less<>> kinds = {
            {"memory_capacity", TaskKind::memory_capacity}, {"narma10", TaskKind::narma10},
            {"mso", TaskKind::mso}, {"hhg_sine", TaskKind::hhg_sine}, {"hhg_triangle", TaskKind::hhg_triangle},
            {"hhg_square", TaskKind::hhg_square}, {"hhg_combined", TaskKind::hhg_combined}};
        const auto it = kinds.find(v);
        if (it == kinds.end()) throw InvalidArgument("unknown task '" + std::string(v) + "'");
        c.task.kind = it->second;
    });
    apply("task.length", [&](auto v) { c.task.length = detail::parse_count(v); });
    apply("task.dt", [&](auto v) { c.task.dt = text::parse_double(v); });
    apply("task.frequency", [&](auto v) { c.task.frequency = text::parse_double(v); });
    apply("task.horizon", [&](auto v) { c.task.horizon = text::parse_double(v); });
    apply("task.time_unit", [&](auto v) { c.task.time_unit = text::parse_double(v); });
    apply("task.max_delay", [&](auto v) { c.task.max_delay = detail::parse_count(v); });
    apply("task.input_low", [&](auto v) { c.task.input_low = text::parse_double(v); });
    apply("task.input_high", [&](auto v) { c.task.input_high = text::parse_double(v); });

    apply("readout.washout", [&](auto v) { c.split.train.washout = detail::parse_count(v); });
    apply("readout.train_fraction", [&](auto v) { c.split.train_fraction = text::parse_double(v); });
    apply("readout.ridge", [&](auto v) { c.split.train.ridge_coefficient = text::parse_double(v); });

    require("architecture.type");
    apply("architecture.type", [&](auto v) {
        if (v == "scr") c.architecture.kind = ArchitectureKind::scr;
        else if (v == "single-network") c.architecture.kind = ArchitectureKind::single_network;
        else if (v == "sigmoid-scr") c.architecture.kind = ArchitectureKind::sigmoid_scr;
        else throw InvalidArgument("unknown architecture '" + std::string(v) + "'");
    });
    auto& a = c.architecture;
    apply("architecture.n_nodes", [&](auto v) { a.n_nodes = detail::parse_count(v); });
    apply("architecture.network_nodes_min", [&](auto v) { a.network_nodes_min = detail::parse_count(v); });
    apply("architecture.network_nodes_max", [&](auto v) { a.network_nodes_max = detail::parse_count(v); });
    apply("architecture.k_degree", [&](auto v) { a.k_degree = detail::parse_count(v); });
    apply("architecture.substeps", [&](auto v) { a.substeps = static_cast<int>(detail::parse_count(v)); });
    apply("architecture.drive_clip", [&](auto v) { a.drive_clip = text::parse_double(v); });
    apply("architecture.input_offset", [&](auto v) { a.input_offset = text::parse_double(v); });
    apply("architecture.n_circuit_nodes", [&](auto v) { a.n_circuit_nodes = detail::parse_count(v); });
    apply("architecture.n_readout_pairs", [&](auto v) { a.n_readout_pairs = detail::parse_count(v); });

    apply("sweep.v", [&](auto v) { c.sweep.v = detail::parse_grid(v); });
    apply("sweep.lambda", [&](auto v) { c.sweep.lambda = detail::parse_grid(v); });
    apply("compare.counts", [&](auto v) {
        for (const auto item : text::split(v, ',')) c.compare_counts.push_back(detail::parse_count(item));
    });

    apply("device.params_file", [&](auto v) {
        std::filesystem::path p{std::string(v)};
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        c.device = load_device_params(p.string());
    });
    for (const auto name : DeviceParams::names) {
        apply("device." + std::string(name), [&](auto v) { *c.device.field(name) = text::parse_double(v); });
    }

    apply("solver.method", [&](auto v) {
        if (v == "newton") c.solver.method = SolveMethod::newton;
        else if (v == "secant") c.solver.method = SolveMethod::secant;
        else throw InvalidArgument("unknown solver method '" + std::string(v) + "'");
    });
    apply("solver.max_iterations", [&](auto v) { c.solver.max_fixed_point_iters = static_cast<int>(detail::parse_count(v)); });
    apply("solver.voltage_tolerance", [&](auto v) { c.solver.voltage_tolerance = text::parse_double(v); });
    apply("solver.relative_kcl_tolerance", [&](auto v) { c.solver.relative_kcl_tolerance = text::parse_double(v); });
    apply("solver.min_conductance", [&](auto v) { c.solver.min_conductance = text::parse_double(v); });

    c.validate();
    return c;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, std::filesystem::path(path).parent_path());
}

}  // namespace memrc
