#pragma once

// Monte Carlo experiment orchestration: config ingestion, seeded runs over a
// parameter grid, BER/SINR aggregation and result emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "barc/barc.hpp"
#include "barc/chanmodel.hpp"

namespace barc::sim {

/// Invalid configuration; `path` names the offending field (e.g. "receiver.rank").
struct config_error : std::runtime_error {
    config_error(std::string path, const std::string& msg)
        : std::runtime_error(path + ": " + msg), path(std::move(path)) {}
    std::string path;
};

enum class StudyKind {
    ber_vs_rank,
    ber_vs_interp_rank,
    ber_vs_symbols,
    ber_vs_branches,
    ber_vs_snr,
    ber_vs_users,
    order_selection,
    branch_selection,
};

enum class Algorithm { barc_sg, barc_rls, fullrank_sg, fullrank_rls, mmse };
enum class ChannelMode { blind, genie };
enum class RankSelection { fixed, automatic };
enum class BranchSelection { fixed, snb, snb_sorted };

std::string_view to_string(StudyKind s) noexcept;
std::string_view to_string(Algorithm a) noexcept;
std::string_view to_string(ChannelMode m) noexcept;
std::string_view to_string(RankSelection m) noexcept;
std::string_view to_string(BranchSelection m) noexcept;

/// Every study kind with a one-line description.
std::vector<std::pair<StudyKind, std::string_view>> list_studies();

/// Name of the parameter a study sweeps ("" for time-resolved studies).
std::string_view grid_parameter(StudyKind s) noexcept;

struct SystemConfig {
    int n = 32;
    int lp = 9;
    int users = 8;
    double ebn0_db = 15.0;
    double fdt = 0.0001;
    double power_std_db = 1.5;
    chan::FadingModel fading = chan::FadingModel::clarke;
    chan::Modulation modulation = chan::Modulation::qpsk;
    int oscillators = 16;
};

struct ReceiverConfig {
    rx::DecimationScheme scheme = rx::DecimationScheme::prestored;
    int branches = 4;
    int rank = 5;
    int interp_len = 3;
    double nu = 1.0;
    double mu_v = 0.002;
    double mu_w = 0.02;
    double mu_full = 0.002;
    double alpha = 0.998;
    double delta_v = 0.01;
    double delta_w = 0.01;
    double rho_v = 0.01;
    double rho_w = 0.01;
    ChannelMode channel_mode = ChannelMode::blind;
    double blind_alpha = 0.998;
    double blind_delta = 10.0;
    std::size_t optimal_cap = rx::kDefaultOptimalCap;
};

struct RankSelectionConfig {
    RankSelection mode = RankSelection::fixed;
    int d_min = 3;
    int d_max = 6;
    int i_min = 2;
    int i_max = 6;
    int selection_symbols = 500;
    int replay_symbols = 200;
};

struct BranchSelectionConfig {
    BranchSelection mode = BranchSelection::fixed;
    int b_max = 16;
    double rho_multiplier = 1.04;
    int calibration_symbols = 200;
    int warmup = 200;
    int resort_interval = 500;
};

struct RunConfig {
    int num_symbols = 1500;
    int num_runs = 50;
    int training_prefix = 500;
    std::uint64_t seed = 1;
    int threads = 0;  // 0: OpenMP default
    int bin_size = 100;
    bool record_sinr = false;
    bool paired_grid = true;  // same data streams at every grid point
};

struct ExperimentConfig {
    StudyKind study = StudyKind::ber_vs_snr;
    std::vector<double> grid;
    std::vector<Algorithm> algorithms{Algorithm::barc_rls};
    SystemConfig system;
    ReceiverConfig receiver;
    RankSelectionConfig rank_selection;
    BranchSelectionConfig branch_selection;
    RunConfig run;
};

/// Parses and validates; throws config_error with the field path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Applies a grid value to a copy of the config (the study's parameter).
ExperimentConfig at_grid_point(const ExperimentConfig& cfg, double value);

/// Seed of run `run` at grid point `grid`: derive_seed(master, grid, run),
/// with grid forced to 0 when paired_grid is set.
std::uint64_t run_seed(const ExperimentConfig& cfg, std::size_t grid, std::size_t run);

struct BerCount {
    double ber = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    std::uint64_t symbols = 0;
};

/// Gray-mapped bit errors between detected and true symbols (QPSK: sign of
/// each quadrature; BPSK: sign of the real part).
BerCount compute_ber(std::span<const cd> detected, std::span<const cd> truth,
                     chan::Modulation mod = chan::Modulation::qpsk);

/// Counters over a span of symbols.
struct Tally {
    std::uint64_t errors = 0;
    std::uint64_t bits = 0;
    std::uint64_t symbols = 0;
    double evaluated = 0.0;  // branches evaluated, summed over symbols
    double d_sum = 0.0;
    double i_sum = 0.0;
    double sinr_sum = 0.0;   // linear SINR, summed over recorded symbols
    std::uint64_t sinr_count = 0;

    void merge(const Tally& o) noexcept;
};

/// Per-run, per-algorithm outcome.
struct RunRecord {
    bool failed = false;
    std::string failure;
    Tally window;             // symbols from the training prefix on
    std::vector<Tally> bins;  // consecutive bins of bin_size symbols from 0
};

/// One simulated run of every configured algorithm on shared data.
std::vector<RunRecord> simulate_run(const ExperimentConfig& point, std::uint64_t seed);

struct ResultRow {
    std::size_t grid_index = 0;
    double grid_value = 0.0;
    Algorithm algorithm = Algorithm::barc_rls;
    int symbol_start = 0;
    int symbol_end = 0;
    bool aggregate = true;      // false: one time bin
    std::optional<double> ber;  // nullopt: no measured bits
    double ber_se = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    int runs = 0;
    int failed_runs = 0;
    std::optional<double> b_avg;
    std::optional<double> sinr_db;
    std::optional<double> d_avg;
    std::optional<double> i_avg;
};

struct GridPointInfo {
    double value = 0.0;
    std::vector<std::uint64_t> seeds;
    double wall_time_s = 0.0;
    std::vector<std::string> failures;
    std::vector<std::vector<std::optional<double>>> run_ber;  // [algorithm][run], measured window
};

struct RunResult {
    ExperimentConfig config;
    std::vector<ResultRow> rows;
    std::vector<GridPointInfo> points;
};

/// Runs every grid point; runs execute on an OpenMP worker pool (threads > 1)
/// or serially, with results reduced in (grid, run) order.
RunResult run_experiment(const ExperimentConfig& cfg);

struct EmitOptions {
    bool plot_script = false;
    std::string stem = "results";
};

struct EmittedFiles {
    std::filesystem::path csv;
    std::filesystem::path sidecar;
    std::optional<std::filesystem::path> plot;
};

/// Writes <stem>.csv, <stem>.json and optionally <stem>.gp into `dir`.
EmittedFiles emit_results(const RunResult& result, const std::filesystem::path& dir, const EmitOptions& opts = {});

/// CSV text only (header + rows).
std::string results_csv(const RunResult& result);
nlohmann::json results_sidecar(const RunResult& result);

/// Binomial standard error of a bit error rate.
double binomial_se(double ber, std::uint64_t bits);

}  // namespace barc::sim
