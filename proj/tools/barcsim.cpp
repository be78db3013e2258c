// Command-line front end for the Monte Carlo harness.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "barc/harness.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

barc::sim::StudyKind study_from_name(const std::string& name) {
    for (const auto& [kind, desc] : barc::sim::list_studies())
        if (barc::sim::to_string(kind) == name) return kind;
    throw barc::sim::config_error("study", "unknown study '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blind adaptive reduced-rank receiver simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> study;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> threads;
    std::string out_dir = "results";
    std::string stem = "results";
    bool emit_plot = false;

    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo study");
    simulate->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    simulate->add_option("--study", study, "Override the study kind");
    simulate->add_option("--seed", seed, "Override the master seed");
    simulate->add_option("--runs", runs, "Override the number of runs per grid point");
    simulate->add_option("--threads", threads, "Worker threads (0: all cores, 1: serial)");
    simulate->add_option("--out", out_dir, "Output directory");
    simulate->add_option("--stem", stem, "Output file stem");
    simulate->add_flag("--emit-plot", emit_plot, "Also write a gnuplot script");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate-config", "Check a config file and print the resolved config");
    validate->add_option("path", validate_path, "JSON experiment config")->required();

    auto* list = app.add_subcommand("list-studies", "List the available study kinds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& [kind, desc] : barc::sim::list_studies()) {
                const auto param = barc::sim::grid_parameter(kind);
                std::cout << barc::sim::to_string(kind) << "\t" << desc
                          << (param.empty() ? "" : " [grid: " + std::string(param) + "]") << "\n";
            }
            return 0;
        }
        if (validate->parsed()) {
            const auto cfg = barc::sim::load_config(validate_path);
            std::cout << barc::sim::to_json(cfg).dump(2) << "\n";
            return 0;
        }

        auto cfg = barc::sim::load_config(config_path);
        if (study) cfg.study = study_from_name(*study);
        if (seed) cfg.run.seed = *seed;
        if (runs) cfg.run.num_runs = *runs;
        if (threads) cfg.run.threads = *threads;
        barc::sim::validate(cfg);

        const auto result = barc::sim::run_experiment(cfg);
        barc::sim::EmitOptions opts;
        opts.plot_script = emit_plot;
        opts.stem = stem;
        const auto files = barc::sim::emit_results(result, out_dir, opts);
        std::cerr << "wrote " << files.csv.string() << " and " << files.sidecar.string();
        if (files.plot) std::cerr << " and " << files.plot->string();
        std::cerr << "\n";
        for (const auto& p : result.points)
            for (const auto& f : p.failures) std::cerr << "warning: grid value " << p.value << ": " << f << "\n";
        return 0;
    } catch (const barc::sim::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}
