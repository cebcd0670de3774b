#include "memrc/memrc.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace memrc;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_runtime = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> threads;
};

ExperimentConfig load_with_overrides(const std::string& path, const Overrides& o) {
    auto c = load_config(path);
    if (o.seed) c.seed = *o.seed;
    if (o.trials) c.trials = *o.trials;
    if (o.out_dir) c.output_dir = *o.out_dir;
    if (o.threads) c.threads = *o.threads;
    c.validate();
    return c;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    writer(out);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

int run_comparison(const ExperimentConfig& c) {
    const auto cmp = compare_architectures(c, c.compare_counts);
    fs::create_directories(c.output_dir);
    const fs::path dir(c.output_dir);
    write_file(dir / "comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, cmp); });
    const auto& metric = cmp.layout.names[cmp.layout.primary];
    bool tainted = false;
    for (const auto k : c.compare_counts) {
        const auto& s = cmp.best(k, ArchitectureKind::scr);
        const auto& n = cmp.best(k, ArchitectureKind::single_network);
        std::cout << "count " << k << ": scr " << metric << ' ' << text::format_double(s.mean) << " (v="
                  << text::format_double(s.v) << ", lambda=" << text::format_double(s.lambda)
                  << "), single-network " << text::format_double(n.mean) << " (v=" << text::format_double(n.v)
                  << "), improvement " << text::format_double(100.0 * cmp.improvement(k)) << "%\n";
    }
    for (const auto& cell : cmp.cells) tainted = tainted || cell.tainted;
    std::cout << "wrote " << (dir / "comparison.csv").string() << '\n';
    if (tainted) {
        std::cerr << "error: unconverged solves exceeded the allowed fraction in at least one cell\n";
        return exit_runtime;
    }
    return exit_ok;
}

int run_config(const ExperimentConfig& c, bool heatmap) {
    if (!c.compare_counts.empty()) return run_comparison(c);
    const auto report = run_experiment(c);
    fs::create_directories(c.output_dir);
    const fs::path dir(c.output_dir);
    write_file(dir / "metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, report); });
    if (heatmap) write_file(dir / "heatmap.csv", [&](std::ostream& o) { write_heatmap_csv(o, report); });
    if (c.trace && !report.trace.empty()) {
        write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, report.provenance, report.trace, c.task.dt); });
    }
    const auto& best = report.best_cell();
    const auto& metric = report.layout.names[report.layout.primary];
    std::cout << c.name << ": " << report.cells.size() << " cell(s) x " << c.trials << " trial(s)\n"
              << "best " << metric << ' ' << text::format_double(best.mean) << " +- "
              << text::format_double(best.stdev) << " at v=" << text::format_double(best.v)
              << " lambda=" << text::format_double(best.lambda) << '\n'
              << "wrote " << (dir / "metrics.csv").string() << (heatmap ? " and heatmap.csv" : "") << '\n';
    if (report.tainted()) {
        std::cerr << "error: unconverged solves exceeded the allowed fraction in at least one cell\n";
        return exit_runtime;
    }
    return exit_ok;
}

int run_psd(const std::string& in_path, const std::string& out_path, std::size_t segment) {
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open series file '" + in_path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();
    std::istringstream parse(content);
    const auto series = read_series_csv(parse);
    PsdSettings settings;
    settings.segment_length = segment;
    const auto rows = psd(series, settings);
    write_file(out_path, [&](std::ostream& o) {
        write_provenance(o, Provenance{text::fnv1a(content), 0});
        write_psd_csv(o, rows);
    });
    std::cout << "wrote " << rows.size() << " rows to " << out_path << '\n';
    return exit_ok;
}

int run_calibration(const std::string& params_path, const std::string& out_dir) {
    DeviceParams p;
    try {
        p = load_device_params(params_path);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    std::ostringstream canon;
    write_device_params(canon, p);
    const Provenance prov{text::fnv1a(canon.str()), 0};
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    const auto rows = calibration_sweep(p);
    write_file(dir / "calibration.csv", [&](std::ostream& o) { write_calibration_csv(o, prov, rows); });
    write_file(dir / "switching.csv", [&](std::ostream& o) { write_switching_csv(o, prov, p, {1.0, 1.2, 1.5}); });
    for (const double a : {1.0, 1.2, 1.5}) {
        std::cout << "amplitude " << text::format_double(a) << " V: w excursion "
                  << text::format_double(switching_excursion(p, a)) << '\n';
    }
    std::cout << "wrote " << (dir / "calibration.csv").string() << " and switching.csv\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Memristive reservoir computing simulator and benchmark harness"};
    app.require_subcommand(1);
    Overrides overrides;
    const auto add_overrides = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { overrides.seed = v; }, "Root seed");
        sub->add_option_function<std::size_t>("--trials", [&](const std::size_t& v) { overrides.trials = v; }, "Trials per cell");
        sub->add_option_function<std::string>("--out-dir", [&](const std::string& v) { overrides.out_dir = v; }, "Output directory");
        sub->add_option_function<std::size_t>("--threads", [&](const std::size_t& v) { overrides.threads = v; }, "Worker threads");
    };

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run an experiment and write metrics.csv");
    run->add_option("config", config_path, "Config file")->required();
    add_overrides(run);

    auto* sweep = app.add_subcommand("sweep", "Run a (v, lambda) sweep and write metrics.csv and heatmap.csv");
    sweep->add_option("config", config_path, "Config file")->required();
    add_overrides(sweep);

    std::string psd_in;
    std::string psd_out;
    std::size_t segment = 256;
    auto* psd_cmd = app.add_subcommand("psd", "Welch power spectral density of a t,value series");
    psd_cmd->add_option("input", psd_in, "Input CSV")->required();
    psd_cmd->add_option("output", psd_out, "Output CSV")->required();
    psd_cmd->add_option("--segment", segment, "Segment length")->check(CLI::Range(2, 1 << 24));

    std::string params_path;
    std::string calib_dir = "calibration";
    auto* calib = app.add_subcommand("device-calibrate", "Switching excursion against sine amplitude");
    calib->add_option("params", params_path, "Device parameter file")->required();
    calib->add_option("--out-dir", calib_dir, "Output directory");

    auto* validate = app.add_subcommand("validate", "Check a config file and print its canonical form");
    validate->add_option("config", config_path, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*run) return run_config(load_with_overrides(config_path, overrides), false);
        if (*sweep) return run_config(load_with_overrides(config_path, overrides), true);
        if (*psd_cmd) return run_psd(psd_in, psd_out, segment);
        if (*calib) return run_calibration(params_path, calib_dir);
        if (*validate) {
            const auto c = load_config(config_path);
            std::cout << c.canonical() << "config_hash = " << text::hex64(c.hash()) << '\n' << "ok\n";
            return exit_ok;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_runtime;
}
