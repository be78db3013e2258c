#include "barc/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "barc/adapt_select.hpp"
#include "barc/baselines.hpp"

namespace barc::sim {

using nlohmann::json;

std::string_view to_string(StudyKind s) noexcept {
    switch (s) {
        case StudyKind::ber_vs_rank: return "ber_vs_rank";
        case StudyKind::ber_vs_interp_rank: return "ber_vs_interp_rank";
        case StudyKind::ber_vs_symbols: return "ber_vs_symbols";
        case StudyKind::ber_vs_branches: return "ber_vs_branches";
        case StudyKind::ber_vs_snr: return "ber_vs_snr";
        case StudyKind::ber_vs_users: return "ber_vs_users";
        case StudyKind::order_selection: return "order_selection";
        case StudyKind::branch_selection: return "branch_selection";
    }
    return "unknown";
}

std::string_view to_string(Algorithm a) noexcept {
    switch (a) {
        case Algorithm::barc_sg: return "barc_sg";
        case Algorithm::barc_rls: return "barc_rls";
        case Algorithm::fullrank_sg: return "fullrank_sg";
        case Algorithm::fullrank_rls: return "fullrank_rls";
        case Algorithm::mmse: return "mmse";
    }
    return "unknown";
}

std::string_view to_string(ChannelMode m) noexcept { return m == ChannelMode::blind ? "blind" : "genie"; }

std::string_view to_string(RankSelection m) noexcept { return m == RankSelection::fixed ? "fixed" : "auto"; }

std::string_view to_string(BranchSelection m) noexcept {
    switch (m) {
        case BranchSelection::fixed: return "fixed";
        case BranchSelection::snb: return "snb";
        case BranchSelection::snb_sorted: return "snb_s";
    }
    return "unknown";
}

std::vector<std::pair<StudyKind, std::string_view>> list_studies() {
    return {
        {StudyKind::ber_vs_rank, "BER against the reduced rank D (grid: D values)"},
        {StudyKind::ber_vs_interp_rank, "BER against the interpolator length I (grid: I values)"},
        {StudyKind::ber_vs_symbols, "BER per block of received symbols (time bins)"},
        {StudyKind::ber_vs_branches, "BER against the number of decimation branches B (grid: B values)"},
        {StudyKind::ber_vs_snr, "BER against Eb/N0 in dB (grid: Eb/N0 values)"},
        {StudyKind::ber_vs_users, "BER against the number of users K (grid: K values)"},
        {StudyKind::order_selection, "BER and selected (D, I) per block with automatic rank selection"},
        {StudyKind::branch_selection, "BER and mean evaluated branches per block with SNB / SNB-S"},
    };
}

std::string_view grid_parameter(StudyKind s) noexcept {
    switch (s) {
        case StudyKind::ber_vs_rank: return "rank";
        case StudyKind::ber_vs_interp_rank: return "interp_len";
        case StudyKind::ber_vs_branches: return "branches";
        case StudyKind::ber_vs_snr: return "ebn0_db";
        case StudyKind::ber_vs_users: return "users";
        default: return "";
    }
}

namespace {

bool time_resolved(StudyKind s) { return grid_parameter(s).empty(); }

template <class E>
E parse_enum(const json& j, const std::string& path, std::initializer_list<std::pair<std::string_view, E>> table) {
    if (!j.is_string()) throw config_error(path, "expected a string");
    const auto name = j.get<std::string>();
    for (const auto& [n, e] : table)
        if (n == name) return e;
    std::string allowed;
    for (const auto& [n, e] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(n);
    throw config_error(path, "unknown value '" + name + "' (allowed: " + allowed + ")");
}

StudyKind parse_study(const json& j, const std::string& path) {
    return parse_enum<StudyKind>(j, path,
                                 {{"ber_vs_rank", StudyKind::ber_vs_rank},
                                  {"ber_vs_interp_rank", StudyKind::ber_vs_interp_rank},
                                  {"ber_vs_symbols", StudyKind::ber_vs_symbols},
                                  {"ber_vs_branches", StudyKind::ber_vs_branches},
                                  {"ber_vs_snr", StudyKind::ber_vs_snr},
                                  {"ber_vs_users", StudyKind::ber_vs_users},
                                  {"order_selection", StudyKind::order_selection},
                                  {"branch_selection", StudyKind::branch_selection}});
}

Algorithm parse_algorithm(const json& j, const std::string& path) {
    return parse_enum<Algorithm>(j, path,
                                 {{"barc_sg", Algorithm::barc_sg},
                                  {"barc_rls", Algorithm::barc_rls},
                                  {"fullrank_sg", Algorithm::fullrank_sg},
                                  {"fullrank_rls", Algorithm::fullrank_rls},
                                  {"mmse", Algorithm::mmse}});
}

// Reads the fields of one JSON object, rejecting unknown keys.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw config_error(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw config_error(at(key), "expected a number");
            out = v->get<double>();
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw config_error(at(key), "expected an integer");
            out = v->get<int>();
        }
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0))
                throw config_error(at(key), "expected a nonnegative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void size(const std::string& key, std::size_t& out) {
        std::uint64_t tmp = out;
        unsigned64(key, tmp);
        out = static_cast<std::size_t>(tmp);
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw config_error(at(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    template <class E>
    void choice(const std::string& key, E& out, std::initializer_list<std::pair<std::string_view, E>> table) {
        if (const json* v = find(key)) out = parse_enum<E>(*v, at(key), table);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw config_error(at(it.key()), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

bool grid_is_integer(StudyKind s) {
    return s == StudyKind::ber_vs_rank || s == StudyKind::ber_vs_interp_rank || s == StudyKind::ber_vs_branches ||
           s == StudyKind::ber_vs_users;
}

bool uses_barc(const ExperimentConfig& cfg) {
    return std::any_of(cfg.algorithms.begin(), cfg.algorithms.end(),
                       [](Algorithm a) { return a == Algorithm::barc_sg || a == Algorithm::barc_rls; });
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    Section root(j, "");
    if (const json* v = root.find("study")) cfg.study = parse_study(*v, "study");
    if (const json* v = root.find("grid")) {
        if (!v->is_array()) throw config_error("grid", "expected an array of numbers");
        cfg.grid.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& x = (*v)[i];
            if (!x.is_number()) throw config_error("grid[" + std::to_string(i) + "]", "expected a number");
            cfg.grid.push_back(x.get<double>());
        }
    }
    if (const json* v = root.find("algorithms")) {
        if (!v->is_array()) throw config_error("algorithms", "expected an array of algorithm names");
        cfg.algorithms.clear();
        for (std::size_t i = 0; i < v->size(); ++i)
            cfg.algorithms.push_back(parse_algorithm((*v)[i], "algorithms[" + std::to_string(i) + "]"));
    }
    if (const json* v = root.find("system")) {
        Section s(*v, "system");
        SystemConfig& c = cfg.system;
        s.integer("N", c.n);
        s.integer("Lp", c.lp);
        s.integer("users", c.users);
        s.number("ebn0_db", c.ebn0_db);
        s.number("fdt", c.fdt);
        s.number("power_std_db", c.power_std_db);
        s.choice<chan::FadingModel>("fading", c.fading,
                                    {{"clarke", chan::FadingModel::clarke}, {"fixed", chan::FadingModel::fixed}});
        s.choice<chan::Modulation>("modulation", c.modulation,
                                   {{"qpsk", chan::Modulation::qpsk}, {"bpsk", chan::Modulation::bpsk}});
        s.integer("oscillators", c.oscillators);
        s.finish();
    }
    if (const json* v = root.find("receiver")) {
        Section s(*v, "receiver");
        ReceiverConfig& c = cfg.receiver;
        s.choice<rx::DecimationScheme>("scheme", c.scheme,
                                       {{"uniform", rx::DecimationScheme::uniform},
                                        {"prestored", rx::DecimationScheme::prestored},
                                        {"random", rx::DecimationScheme::random},
                                        {"optimal", rx::DecimationScheme::optimal}});
        s.integer("branches", c.branches);
        s.integer("rank", c.rank);
        s.integer("interp_len", c.interp_len);
        s.number("nu", c.nu);
        s.number("mu_v", c.mu_v);
        s.number("mu_w", c.mu_w);
        s.number("mu_full", c.mu_full);
        s.number("alpha", c.alpha);
        s.number("delta_v", c.delta_v);
        s.number("delta_w", c.delta_w);
        s.number("rho_v", c.rho_v);
        s.number("rho_w", c.rho_w);
        s.choice<ChannelMode>("channel_mode", c.channel_mode,
                              {{"blind", ChannelMode::blind}, {"genie", ChannelMode::genie}});
        s.number("blind_alpha", c.blind_alpha);
        s.number("blind_delta", c.blind_delta);
        s.size("optimal_cap", c.optimal_cap);
        s.finish();
    }
    if (const json* v = root.find("rank_selection")) {
        Section s(*v, "rank_selection");
        RankSelectionConfig& c = cfg.rank_selection;
        s.choice<RankSelection>("mode", c.mode, {{"fixed", RankSelection::fixed}, {"auto", RankSelection::automatic}});
        s.integer("d_min", c.d_min);
        s.integer("d_max", c.d_max);
        s.integer("i_min", c.i_min);
        s.integer("i_max", c.i_max);
        s.integer("selection_symbols", c.selection_symbols);
        s.integer("replay_symbols", c.replay_symbols);
        s.finish();
    }
    if (const json* v = root.find("branch_selection")) {
        Section s(*v, "branch_selection");
        BranchSelectionConfig& c = cfg.branch_selection;
        s.choice<BranchSelection>("mode", c.mode,
                                  {{"fixed", BranchSelection::fixed},
                                   {"snb", BranchSelection::snb},
                                   {"snb_s", BranchSelection::snb_sorted}});
        s.integer("b_max", c.b_max);
        s.number("rho_multiplier", c.rho_multiplier);
        s.integer("calibration_symbols", c.calibration_symbols);
        s.integer("warmup", c.warmup);
        s.integer("resort_interval", c.resort_interval);
        s.finish();
    }
    if (const json* v = root.find("run")) {
        Section s(*v, "run");
        RunConfig& c = cfg.run;
        s.integer("num_symbols", c.num_symbols);
        s.integer("num_runs", c.num_runs);
        s.integer("training_prefix", c.training_prefix);
        s.unsigned64("seed", c.seed);
        s.integer("threads", c.threads);
        s.integer("bin_size", c.bin_size);
        s.boolean("record_sinr", c.record_sinr);
        s.boolean("paired_grid", c.paired_grid);
        s.finish();
    }
    root.finish();
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path.string(), "cannot open config file");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw config_error(path.string(), std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

namespace {

void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) throw config_error(path, msg);
}

void validate_point(const ExperimentConfig& cfg) {
    const SystemConfig& s = cfg.system;
    const ReceiverConfig& r = cfg.receiver;
    require(s.n >= 1, "system.N", "must be at least 1");
    require(s.lp >= 1, "system.Lp", "must be at least 1");
    require(s.users >= 1, "system.users", "must be at least 1");
    require(std::isfinite(s.ebn0_db), "system.ebn0_db", "must be finite");
    require(std::isfinite(s.fdt) && s.fdt >= 0.0, "system.fdt", "must be nonnegative");
    require(std::isfinite(s.power_std_db) && s.power_std_db >= 0.0, "system.power_std_db", "must be nonnegative");
    require(s.oscillators >= 16, "system.oscillators", "must be at least 16");
    const int m = s.n + s.lp - 1;

    require(r.rank >= 1 && r.rank <= m, "receiver.rank", "must lie in [1, M] with M = " + std::to_string(m));
    require(r.interp_len >= 1 && r.interp_len <= m, "receiver.interp_len", "must lie in [1, M]");
    require(r.branches >= 1, "receiver.branches", "must be at least 1");
    require(r.nu > 0.0, "receiver.nu", "must be positive");
    require(r.mu_v >= 0.0, "receiver.mu_v", "must be nonnegative");
    require(r.mu_w >= 0.0, "receiver.mu_w", "must be nonnegative");
    require(r.mu_full >= 0.0, "receiver.mu_full", "must be nonnegative");
    require(r.alpha > 0.0 && r.alpha <= 1.0, "receiver.alpha", "must lie in (0, 1]");
    require(r.delta_v > 0.0, "receiver.delta_v", "must be positive");
    require(r.delta_w > 0.0, "receiver.delta_w", "must be positive");
    require(r.rho_v >= 0.0, "receiver.rho_v", "must be nonnegative");
    require(r.rho_w >= 0.0, "receiver.rho_w", "must be nonnegative");
    require(r.blind_alpha > 0.0 && r.blind_alpha <= 1.0, "receiver.blind_alpha", "must lie in (0, 1]");
    require(r.blind_delta > 0.0, "receiver.blind_delta", "must be positive");

    if (uses_barc(cfg) && cfg.rank_selection.mode == RankSelection::fixed) {
        if (r.scheme == rx::DecimationScheme::prestored) {
            const int step = m / r.rank;
            require((r.rank - 1) * step + r.branches - 1 <= m - 1, "receiver.branches",
                    "prestored patterns need (D-1)*floor(M/D) + B <= M");
        }
        if (r.scheme == rx::DecimationScheme::optimal) {
            const double count = binomial(m, r.rank);
            require(count <= static_cast<double>(r.optimal_cap), "receiver.rank",
                    "optimal decimation would enumerate " + std::to_string(static_cast<long long>(count)) +
                        " patterns, above receiver.optimal_cap");
        }
    }

    const RankSelectionConfig& rs = cfg.rank_selection;
    if (rs.mode == RankSelection::automatic) {
        require(rs.d_min >= 1, "rank_selection.d_min", "must be at least 1");
        require(rs.d_max >= rs.d_min && rs.d_max <= m, "rank_selection.d_max", "must lie in [d_min, M]");
        require(rs.i_min >= 1, "rank_selection.i_min", "must be at least 1");
        require(rs.i_max >= rs.i_min && rs.i_max <= m, "rank_selection.i_max", "must lie in [i_min, M]");
        require(rs.selection_symbols >= 1, "rank_selection.selection_symbols", "must be at least 1");
        require(rs.replay_symbols >= 0, "rank_selection.replay_symbols", "must be nonnegative");
        require(r.scheme != rx::DecimationScheme::optimal, "receiver.scheme",
                "automatic rank selection does not support optimal decimation");
    }

    const BranchSelectionConfig& bs = cfg.branch_selection;
    if (bs.mode != BranchSelection::fixed) {
        require(bs.b_max >= 1, "branch_selection.b_max", "must be at least 1");
        require(bs.rho_multiplier > 0.0, "branch_selection.rho_multiplier", "must be positive");
        require(bs.calibration_symbols >= 1, "branch_selection.calibration_symbols", "must be at least 1");
        require(bs.warmup >= 0, "branch_selection.warmup", "must be nonnegative");
        require(bs.resort_interval >= 1, "branch_selection.resort_interval", "must be at least 1");
        require(rs.mode == RankSelection::fixed, "branch_selection.mode",
                "branch-count selection requires rank_selection.mode = fixed");
    }

    const RunConfig& run = cfg.run;
    require(run.num_symbols >= 0, "run.num_symbols", "must be nonnegative");
    require(run.num_runs >= 1, "run.num_runs", "must be at least 1");
    require(run.training_prefix >= 0, "run.training_prefix", "must be nonnegative");
    require(run.threads >= 0, "run.threads", "must be nonnegative");
    require(run.bin_size >= 1, "run.bin_size", "must be at least 1");
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
    require(!cfg.algorithms.empty(), "algorithms", "must name at least one algorithm");
    if (!time_resolved(cfg.study)) {
        require(!cfg.grid.empty(), "grid", "must be nonempty for study " + std::string(to_string(cfg.study)));
        for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
            const double g = cfg.grid[i];
            const std::string path = "grid[" + std::to_string(i) + "]";
            require(std::isfinite(g), path, "must be finite");
            if (grid_is_integer(cfg.study))
                require(g >= 1.0 && g == std::floor(g) && g < 1e9, path, "must be a positive integer");
        }
        for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
            try {
                validate_point(at_grid_point(cfg, cfg.grid[i]));
            } catch (const config_error& e) {
                throw config_error(e.path, std::string(e.what()).substr(e.path.size() + 2) + " (at grid[" +
                                               std::to_string(i) + "])");
            }
        }
    } else {
        validate_point(cfg);
    }
}

ExperimentConfig at_grid_point(const ExperimentConfig& cfg, double value) {
    ExperimentConfig p = cfg;
    switch (cfg.study) {
        case StudyKind::ber_vs_rank: p.receiver.rank = static_cast<int>(value); break;
        case StudyKind::ber_vs_interp_rank: p.receiver.interp_len = static_cast<int>(value); break;
        case StudyKind::ber_vs_branches: p.receiver.branches = static_cast<int>(value); break;
        case StudyKind::ber_vs_snr: p.system.ebn0_db = value; break;
        case StudyKind::ber_vs_users: p.system.users = static_cast<int>(value); break;
        default: break;
    }
    return p;
}

json to_json(const ExperimentConfig& cfg) {
    json algos = json::array();
    for (Algorithm a : cfg.algorithms) algos.push_back(std::string(to_string(a)));
    const SystemConfig& s = cfg.system;
    const ReceiverConfig& r = cfg.receiver;
    const RankSelectionConfig& rs = cfg.rank_selection;
    const BranchSelectionConfig& bs = cfg.branch_selection;
    const RunConfig& run = cfg.run;
    return json{
        {"study", std::string(to_string(cfg.study))},
        {"grid", cfg.grid},
        {"algorithms", algos},
        {"system",
         {{"N", s.n},
          {"Lp", s.lp},
          {"users", s.users},
          {"ebn0_db", s.ebn0_db},
          {"fdt", s.fdt},
          {"power_std_db", s.power_std_db},
          {"fading", s.fading == chan::FadingModel::clarke ? "clarke" : "fixed"},
          {"modulation", s.modulation == chan::Modulation::qpsk ? "qpsk" : "bpsk"},
          {"oscillators", s.oscillators}}},
        {"receiver",
         {{"scheme", std::string(rx::to_string(r.scheme))},
          {"branches", r.branches},
          {"rank", r.rank},
          {"interp_len", r.interp_len},
          {"nu", r.nu},
          {"mu_v", r.mu_v},
          {"mu_w", r.mu_w},
          {"mu_full", r.mu_full},
          {"alpha", r.alpha},
          {"delta_v", r.delta_v},
          {"delta_w", r.delta_w},
          {"rho_v", r.rho_v},
          {"rho_w", r.rho_w},
          {"channel_mode", std::string(to_string(r.channel_mode))},
          {"blind_alpha", r.blind_alpha},
          {"blind_delta", r.blind_delta},
          {"optimal_cap", r.optimal_cap}}},
        {"rank_selection",
         {{"mode", std::string(to_string(rs.mode))},
          {"d_min", rs.d_min},
          {"d_max", rs.d_max},
          {"i_min", rs.i_min},
          {"i_max", rs.i_max},
          {"selection_symbols", rs.selection_symbols},
          {"replay_symbols", rs.replay_symbols}}},
        {"branch_selection",
         {{"mode", std::string(to_string(bs.mode))},
          {"b_max", bs.b_max},
          {"rho_multiplier", bs.rho_multiplier},
          {"calibration_symbols", bs.calibration_symbols},
          {"warmup", bs.warmup},
          {"resort_interval", bs.resort_interval}}},
        {"run",
         {{"num_symbols", run.num_symbols},
          {"num_runs", run.num_runs},
          {"training_prefix", run.training_prefix},
          {"seed", run.seed},
          {"threads", run.threads},
          {"bin_size", run.bin_size},
          {"record_sinr", run.record_sinr},
          {"paired_grid", run.paired_grid}}},
    };
}

std::uint64_t run_seed(const ExperimentConfig& cfg, std::size_t grid, std::size_t run) {
    return derive_seed(cfg.run.seed, cfg.run.paired_grid ? 0 : grid, run);
}

BerCount compute_ber(std::span<const cd> detected, std::span<const cd> truth, chan::Modulation mod) {
    if (detected.size() != truth.size()) throw invalid_argument("compute_ber: length mismatch");
    BerCount out;
    out.symbols = detected.size();
    for (std::size_t i = 0; i < detected.size(); ++i) {
        if ((detected[i].real() >= 0.0) != (truth[i].real() >= 0.0)) ++out.bit_errors;
        if (mod == chan::Modulation::qpsk && (detected[i].imag() >= 0.0) != (truth[i].imag() >= 0.0))
            ++out.bit_errors;
    }
    out.bits = out.symbols * static_cast<std::uint64_t>(chan::bits_per_symbol(mod));
    out.ber = out.bits == 0 ? 0.0 : static_cast<double>(out.bit_errors) / static_cast<double>(out.bits);
    return out;
}

double binomial_se(double ber, std::uint64_t bits) {
    if (bits == 0) return 0.0;
    return std::sqrt(std::max(0.0, ber * (1.0 - ber)) / static_cast<double>(bits));
}

void Tally::merge(const Tally& o) noexcept {
    errors += o.errors;
    bits += o.bits;
    symbols += o.symbols;
    evaluated += o.evaluated;
    d_sum += o.d_sum;
    i_sum += o.i_sum;
    sinr_sum += o.sinr_sum;
    sinr_count += o.sinr_count;
}

namespace {

// Everything a receiver sees for one symbol interval.
struct FrameView {
    std::span<const cd> r;
    std::span<const cd> p;       // signature used by the blind receivers (estimated or genie)
    std::span<const cd> p_true;
    const ComplexMat* signal_cov = nullptr;
    double sigma2 = 0.0;
};

struct Output {
    cd z;
    int evaluated = 1;
    int d = 0;
    int i = 0;
    bool true_phase = false;   // output already referenced to the true signature
    ComplexVec w_eff;          // equivalent M-tap filter, when SINR is tracked
};

class Receiver {
public:
    virtual ~Receiver() = default;
    virtual Output step(const FrameView& f, bool want_filter) = 0;
};

class BarcReceiver : public Receiver {
public:
    BarcReceiver(const ExperimentConfig& cfg, bool rls, std::uint64_t seed, double rho)
        : cfg_(cfg), rls_(rls), seed_(seed), rho_(rho) {}

    Output step(const FrameView& f, bool want_filter) override {
        const ReceiverConfig& rc = cfg_.receiver;
        if (!started_) start(f.p);
        Output out;
        if (auto_) {
            const auto o = auto_->step(f.p, f.r);
            out.z = o.z;
            out.d = o.d;
            out.i = o.i;
            out.evaluated = static_cast<int>(std::min<std::size_t>(
                static_cast<std::size_t>(rc.branches),
                static_cast<std::size_t>(cfg_.system.n + cfg_.system.lp - 1)));
            return out;
        }
        rx::BarcState& s = *state_;
        const ComplexVec r_i = rx::interpolate(f.r, s.v);
        const ComplexVec p_i = rx::interpolate(f.p, s.v);
        const rx::Selection sel = budget_ ? budget_->choose(s, r_i, p_i) : rx::select_min_branch(s, r_i, p_i);
        if (rls_)
            rx::rls_update(s, f.p, f.r, sel, rc.alpha);
        else
            rx::sg_update(s, f.p, f.r, sel, rc.mu_v, rc.mu_w);
        if (budget_)
            budget_->record(s, sel.branch);
        else
            ++s.bank.usage_counts[static_cast<std::size_t>(sel.branch)];
        out.z = sel.z;
        out.evaluated = sel.evaluated;
        out.d = s.rank();
        out.i = s.interp_len();
        if (want_filter) out.w_eff = rx::effective_filter(s, sel.branch);
        return out;
    }

private:
    void start(std::span<const cd> p) {
        started_ = true;
        const ReceiverConfig& rc = cfg_.receiver;
        const int m = cfg_.system.n + cfg_.system.lp - 1;
        rx::InitOptions init;
        init.nu = rc.nu;
        init.rls = {rc.delta_v, rc.delta_w, rc.rho_v, rc.rho_w};
        const std::uint64_t pattern_seed = substream(seed_, Stream::patterns);
        if (cfg_.rank_selection.mode == RankSelection::automatic) {
            const RankSelectionConfig& rs = cfg_.rank_selection;
            select::ExtendedOptions opts;
            opts.range = {rs.d_min, rs.d_max, rs.i_min, rs.i_max};
            opts.scheme = rc.scheme;
            opts.branches = rc.branches;
            opts.pattern_seed = pattern_seed;
            opts.cost_alpha = rc.alpha;
            opts.selection_symbols = rs.selection_symbols;
            opts.replay_symbols = rs.replay_symbols;
            opts.init = init;
            opts.adapt = {rls_ ? select::AdaptKind::rls : select::AdaptKind::sg, rc.mu_v, rc.mu_w, rc.alpha};
            auto_ = std::make_unique<select::AutoRankReceiver>(m, p, opts);
            return;
        }
        rx::BranchBank bank = rx::gen_patterns(rc.scheme, m, rc.rank, rc.branches, pattern_seed, rc.optimal_cap);
        state_ = rx::init_state(std::move(bank), rc.interp_len, p, init);
        state_->exec = kernels::Exec::parallel;
        const BranchSelectionConfig& bs = cfg_.branch_selection;
        if (bs.mode != BranchSelection::fixed) {
            select::BranchBudgetOptions opts;
            opts.rho = rho_;
            opts.b_max = bs.b_max;
            opts.sorted = bs.mode == BranchSelection::snb_sorted;
            opts.warmup = bs.warmup;
            opts.resort_interval = bs.resort_interval;
            budget_ = std::make_unique<select::BranchBudget>(state_->bank.size(), opts);
        }
    }

    const ExperimentConfig& cfg_;
    bool rls_;
    std::uint64_t seed_;
    double rho_;
    bool started_ = false;
    std::optional<rx::BarcState> state_;
    std::unique_ptr<select::AutoRankReceiver> auto_;
    std::unique_ptr<select::BranchBudget> budget_;
};

class FullRankReceiver : public Receiver {
public:
    FullRankReceiver(const ExperimentConfig& cfg, bool rls) : cfg_(cfg), rls_(rls) {}

    Output step(const FrameView& f, bool want_filter) override {
        const ReceiverConfig& rc = cfg_.receiver;
        if (!state_) state_ = ref::make_fullrank_state(static_cast<int>(f.r.size()), f.p, rc.nu,
                                                       {rc.delta_v, rc.delta_w, rc.rho_v, rc.rho_w});
        Output out;
        out.z = rls_ ? ref::fullrank_ccm_rls_step(*state_, f.r, f.p, rc.alpha).z
                     : ref::fullrank_ccm_sg_step(*state_, f.r, f.p, rc.mu_full).z;
        out.d = static_cast<int>(f.r.size());
        out.i = 1;
        if (want_filter) out.w_eff = state_->w;
        return out;
    }

private:
    const ExperimentConfig& cfg_;
    bool rls_;
    std::optional<ref::FullRankState> state_;
};

class MmseReceiver : public Receiver {
public:
    explicit MmseReceiver(double nu) : nu_(nu) {}

    Output step(const FrameView& f, bool) override {
        Output out;
        out.w_eff = ref::mmse_oracle(*f.signal_cov, f.p_true, f.sigma2, nu_);
        out.z = dot(out.w_eff, f.r);
        out.d = static_cast<int>(f.r.size());
        out.i = 1;
        out.true_phase = true;
        return out;
    }

private:
    double nu_;
};

struct RunData {
    chan::UserEnsemble ens;
    std::vector<chan::ReceivedFrame> frames;
    std::vector<ComplexVec> p_true;
    std::vector<ComplexVec> p_used;
    std::vector<cd> phase_ref;
    std::vector<ComplexMat> cov;  // one entry when the channel is static
    double sigma2 = 0.0;
    double amplitude = 1.0;

    const ComplexMat& cov_at(int i) const { return cov.size() == 1 ? cov[0] : cov[static_cast<std::size_t>(i)]; }
};

bool needs_covariance(const ExperimentConfig& cfg) {
    return cfg.run.record_sinr || cfg.branch_selection.mode != BranchSelection::fixed ||
           std::find(cfg.algorithms.begin(), cfg.algorithms.end(), Algorithm::mmse) != cfg.algorithms.end();
}

RunData generate(const ExperimentConfig& cfg, std::uint64_t seed) {
    const SystemConfig& s = cfg.system;
    const ReceiverConfig& rc = cfg.receiver;
    const int frames = cfg.run.num_symbols;
    RunData d;
    d.ens = chan::draw_user_ensemble(s.users, s.n, s.lp, s.power_std_db, substream(seed, Stream::ensemble));
    chan::StreamOptions so;
    so.num_frames = frames;
    so.normalized_doppler = s.fdt;
    so.fading = s.fading;
    so.modulation = s.modulation;
    so.oscillators = s.oscillators;
    chan::attach_streams(d.ens, so, substream(seed, Stream::fading), substream(seed, Stream::symbols));
    d.amplitude = d.ens.users[0].amplitude;
    d.sigma2 = chan::noise_variance_for_ebn0(d.amplitude, s.ebn0_db, s.modulation);
    Rng noise(substream(seed, Stream::noise));

    const chan::User& desired = d.ens.users[0];
    const int m = d.ens.m();
    std::optional<ref::InverseCovarianceTracker> tracker;
    if (rc.channel_mode == ChannelMode::blind) tracker.emplace(m, rc.blind_alpha, rc.blind_delta);
    ComplexVec h_hat;
    const bool static_channel = s.fading == chan::FadingModel::fixed || s.fdt == 0.0;
    const bool want_cov = needs_covariance(cfg);

    d.frames.reserve(static_cast<std::size_t>(frames));
    for (int i = 0; i < frames; ++i) {
        d.frames.push_back(chan::synthesize_received(d.ens, i, d.sigma2, noise));
        const ComplexVec h = desired.taps(i + 1);
        d.p_true.push_back(chan::effective_signature(desired.constraint, h));
        if (tracker) {
            tracker->update(d.frames.back().r);
            try {
                h_hat = ref::blind_channel_estimate(tracker->inverse(), desired.constraint, h_hat).h_hat;
            } catch (const convergence_error&) {
                // Nearly degenerate smallest eigenvalue (short data record): keep the last estimate.
                if (h_hat.empty()) {
                    h_hat.assign(static_cast<std::size_t>(s.lp), cd{});
                    h_hat[0] = 1.0;
                }
            }
            d.p_used.push_back(chan::effective_signature(desired.constraint, h_hat));
            d.phase_ref.push_back(ref::phase_reference(h, h_hat));
        } else {
            d.p_used.push_back(d.p_true.back());
            d.phase_ref.push_back(ref::phase_reference(h, h));
        }
        if (want_cov && (!static_channel || d.cov.empty())) d.cov.push_back(chan::signal_covariance(d.ens, i));
    }
    return d;
}

// Mean CM cost of the MMSE oracle over the first frames.
double calibrate_rho(const ExperimentConfig& cfg, const RunData& d) {
    const int n = std::min<int>(cfg.branch_selection.calibration_symbols, static_cast<int>(d.frames.size()));
    if (n == 0) return cfg.branch_selection.rho_multiplier;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const ComplexVec w = ref::mmse_oracle(d.cov_at(i), d.p_true[static_cast<std::size_t>(i)], d.sigma2, cfg.receiver.nu);
        const double e = std::norm(dot(w, d.frames[static_cast<std::size_t>(i)].r)) - 1.0;
        sum += e * e;
    }
    return cfg.branch_selection.rho_multiplier * sum / n;
}

std::unique_ptr<Receiver> make_receiver(const ExperimentConfig& cfg, Algorithm a, std::uint64_t seed, double rho) {
    switch (a) {
        case Algorithm::barc_sg: return std::make_unique<BarcReceiver>(cfg, false, seed, rho);
        case Algorithm::barc_rls: return std::make_unique<BarcReceiver>(cfg, true, seed, rho);
        case Algorithm::fullrank_sg: return std::make_unique<FullRankReceiver>(cfg, false);
        case Algorithm::fullrank_rls: return std::make_unique<FullRankReceiver>(cfg, true);
        case Algorithm::mmse: return std::make_unique<MmseReceiver>(cfg.receiver.nu);
    }
    throw invalid_argument("unknown algorithm");
}

std::size_t bin_count(const ExperimentConfig& cfg) {
    const int n = cfg.run.num_symbols;
    return static_cast<std::size_t>((n + cfg.run.bin_size - 1) / cfg.run.bin_size);
}

}  // namespace

std::vector<RunRecord> simulate_run(const ExperimentConfig& cfg, std::uint64_t seed) {
    const std::size_t na = cfg.algorithms.size();
    std::vector<RunRecord> out(na);
    for (auto& rec : out) rec.bins.assign(bin_count(cfg), Tally{});

    RunData d;
    double rho = 0.0;
    try {
        d = generate(cfg, seed);
        if (cfg.branch_selection.mode != BranchSelection::fixed) rho = calibrate_rho(cfg, d);
    } catch (const std::exception& e) {
        for (auto& rec : out) {
            rec.failed = true;
            rec.failure = std::string("data generation: ") + e.what();
        }
        return out;
    }

    const chan::Modulation mod = cfg.system.modulation;
    const int bits = chan::bits_per_symbol(mod);
    const bool want_cov = needs_covariance(cfg);
    for (std::size_t a = 0; a < na; ++a) {
        RunRecord& rec = out[a];
        try {
            std::unique_ptr<Receiver> receiver = make_receiver(cfg, cfg.algorithms[a], seed, rho);
            for (std::size_t i = 0; i < d.frames.size(); ++i) {
                const int idx = static_cast<int>(i);
                FrameView f{d.frames[i].r, d.p_used[i], d.p_true[i], want_cov ? &d.cov_at(idx) : nullptr, d.sigma2};
                const Output o = receiver->step(f, cfg.run.record_sinr);
                const cd ref = o.true_phase ? cd(1.0) : d.phase_ref[i];
                const cd det = mod == chan::Modulation::qpsk ? ref::detect_qpsk(o.z, ref) : ref::detect_bpsk(o.z, ref);
                const BerCount bc = compute_ber(std::span<const cd>(&det, 1), std::span<const cd>(&d.frames[i].truth, 1), mod);

                Tally t;
                t.errors = bc.bit_errors;
                t.bits = static_cast<std::uint64_t>(bits);
                t.symbols = 1;
                t.evaluated = o.evaluated;
                t.d_sum = o.d;
                t.i_sum = o.i;
                if (cfg.run.record_sinr && !o.w_eff.empty()) {
                    const double s = ref::sinr(o.w_eff, d.cov_at(idx), d.p_true[i], d.amplitude * d.amplitude, d.sigma2);
                    if (std::isfinite(s)) {
                        t.sinr_sum = s;
                        t.sinr_count = 1;
                    }
                }
                rec.bins[i / static_cast<std::size_t>(cfg.run.bin_size)].merge(t);
                if (idx >= cfg.run.training_prefix) rec.window.merge(t);
            }
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.failure = std::string(to_string(cfg.algorithms[a])) + ": " + e.what();
        }
    }
    return out;
}

namespace {

ResultRow make_row(const Tally& t, int runs, int failed) {
    ResultRow row;
    row.bit_errors = t.errors;
    row.bits = t.bits;
    row.runs = runs;
    row.failed_runs = failed;
    if (t.bits > 0) {
        row.ber = static_cast<double>(t.errors) / static_cast<double>(t.bits);
        row.ber_se = binomial_se(*row.ber, t.bits);
    }
    if (t.symbols > 0) {
        const double n = static_cast<double>(t.symbols);
        row.b_avg = t.evaluated / n;
        row.d_avg = t.d_sum / n;
        row.i_avg = t.i_sum / n;
    }
    if (t.sinr_count > 0) {
        const double mean = t.sinr_sum / static_cast<double>(t.sinr_count);
        if (mean > 0.0) row.sinr_db = 10.0 * std::log10(mean);
    }
    return row;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    RunResult result;
    result.config = cfg;
    const std::vector<double> grid = time_resolved(cfg.study) ? std::vector<double>{0.0} : cfg.grid;
    const int runs = cfg.run.num_runs;
    const int threads = cfg.run.threads == 0 ? omp_get_max_threads() : cfg.run.threads;

    for (std::size_t g = 0; g < grid.size(); ++g) {
        const ExperimentConfig point = at_grid_point(cfg, grid[g]);
        GridPointInfo info;
        info.value = grid[g];
        for (int r = 0; r < runs; ++r) info.seeds.push_back(run_seed(cfg, g, static_cast<std::size_t>(r)));

        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::vector<RunRecord>> records(static_cast<std::size_t>(runs));
        if (threads <= 1) {
            for (int r = 0; r < runs; ++r)
                records[static_cast<std::size_t>(r)] = simulate_run(point, info.seeds[static_cast<std::size_t>(r)]);
        } else {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
            for (int r = 0; r < runs; ++r)
                records[static_cast<std::size_t>(r)] = simulate_run(point, info.seeds[static_cast<std::size_t>(r)]);
        }
        info.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        const std::size_t nbins = bin_count(point);
        for (std::size_t a = 0; a < point.algorithms.size(); ++a) {
            Tally window;
            std::vector<Tally> bins(nbins);
            int failed = 0;
            auto& per_run = info.run_ber.emplace_back();
            for (int r = 0; r < runs; ++r) {
                const RunRecord& rec = records[static_cast<std::size_t>(r)][a];
                if (rec.failed) {
                    ++failed;
                    info.failures.push_back("run " + std::to_string(r) + ": " + rec.failure);
                    per_run.emplace_back();
                    continue;
                }
                per_run.push_back(rec.window.bits > 0 ? std::optional<double>(static_cast<double>(rec.window.errors) /
                                                                              static_cast<double>(rec.window.bits))
                                                      : std::nullopt);
                window.merge(rec.window);
                for (std::size_t b = 0; b < nbins; ++b) bins[b].merge(rec.bins[b]);
            }
            ResultRow row = make_row(window, runs, failed);
            row.grid_index = g;
            row.grid_value = grid[g];
            row.algorithm = point.algorithms[a];
            row.symbol_start = std::min(point.run.training_prefix, point.run.num_symbols);
            row.symbol_end = point.run.num_symbols;
            result.rows.push_back(row);
            if (!time_resolved(cfg.study)) continue;
            for (std::size_t b = 0; b < nbins; ++b) {
                ResultRow br = make_row(bins[b], runs, failed);
                br.aggregate = false;
                br.grid_index = g;
                br.grid_value = grid[g];
                br.algorithm = point.algorithms[a];
                br.symbol_start = static_cast<int>(b) * point.run.bin_size;
                br.symbol_end = std::min(point.run.num_symbols, br.symbol_start + point.run.bin_size);
                result.rows.push_back(br);
            }
        }
        result.points.push_back(std::move(info));
    }
    return result;
}

namespace {

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string num(const std::optional<double>& x) { return x ? num(*x) : "NA"; }

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "row_kind", "study", "grid_parameter", "grid_index", "grid_value", "algorithm", "symbol_start", "symbol_end",
        // configuration
        "N", "Lp", "M", "users", "ebn0_db", "fdt", "power_std_db", "fading", "modulation", "scheme", "branches",
        "rank", "interp_len", "nu", "mu_v", "mu_w", "mu_full", "alpha", "delta_v", "delta_w", "rho_v", "rho_w",
        "channel_mode", "blind_alpha", "blind_delta", "rank_selection", "d_min", "d_max", "i_min", "i_max",
        "selection_symbols", "replay_symbols", "branch_selection", "b_max", "rho_multiplier", "calibration_symbols",
        "warmup", "resort_interval", "num_symbols", "num_runs", "training_prefix", "seed", "paired_grid", "bin_size",
        // metrics
        "ber", "ber_se", "bit_errors", "bits", "runs", "failed_runs", "b_avg", "sinr_db", "d_avg", "i_avg"};
    return cols;
}

}  // namespace

std::string results_csv(const RunResult& result) {
    std::ostringstream os;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const ResultRow& row : result.rows) {
        const ExperimentConfig c = at_grid_point(result.config, row.grid_value);
        const SystemConfig& s = c.system;
        const ReceiverConfig& r = c.receiver;
        const RankSelectionConfig& rs = c.rank_selection;
        const BranchSelectionConfig& bs = c.branch_selection;
        const RunConfig& run = c.run;
        const std::vector<std::string> fields = {
            row.aggregate ? "aggregate" : "bin",
            std::string(to_string(c.study)),
            std::string(grid_parameter(c.study)),
            std::to_string(row.grid_index),
            num(row.grid_value),
            std::string(to_string(row.algorithm)),
            std::to_string(row.symbol_start),
            std::to_string(row.symbol_end),
            std::to_string(s.n),
            std::to_string(s.lp),
            std::to_string(s.n + s.lp - 1),
            std::to_string(s.users),
            num(s.ebn0_db),
            num(s.fdt),
            num(s.power_std_db),
            s.fading == chan::FadingModel::clarke ? "clarke" : "fixed",
            s.modulation == chan::Modulation::qpsk ? "qpsk" : "bpsk",
            std::string(rx::to_string(r.scheme)),
            std::to_string(r.branches),
            std::to_string(r.rank),
            std::to_string(r.interp_len),
            num(r.nu),
            num(r.mu_v),
            num(r.mu_w),
            num(r.mu_full),
            num(r.alpha),
            num(r.delta_v),
            num(r.delta_w),
            num(r.rho_v),
            num(r.rho_w),
            std::string(to_string(r.channel_mode)),
            num(r.blind_alpha),
            num(r.blind_delta),
            std::string(to_string(rs.mode)),
            std::to_string(rs.d_min),
            std::to_string(rs.d_max),
            std::to_string(rs.i_min),
            std::to_string(rs.i_max),
            std::to_string(rs.selection_symbols),
            std::to_string(rs.replay_symbols),
            std::string(to_string(bs.mode)),
            std::to_string(bs.b_max),
            num(bs.rho_multiplier),
            std::to_string(bs.calibration_symbols),
            std::to_string(bs.warmup),
            std::to_string(bs.resort_interval),
            std::to_string(run.num_symbols),
            std::to_string(run.num_runs),
            std::to_string(run.training_prefix),
            std::to_string(run.seed),
            run.paired_grid ? "true" : "false",
            std::to_string(run.bin_size),
            num(row.ber),
            num(row.ber_se),
            std::to_string(row.bit_errors),
            std::to_string(row.bits),
            std::to_string(row.runs),
            std::to_string(row.failed_runs),
            num(row.b_avg),
            num(row.sinr_db),
            num(row.d_avg),
            num(row.i_avg),
        };
        for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << fields[i];
        os << '\n';
    }
    return os.str();
}

json results_sidecar(const RunResult& result) {
    json points = json::array();
    for (std::size_t g = 0; g < result.points.size(); ++g) {
        const GridPointInfo& p = result.points[g];
        json per_run = json::object();
        for (std::size_t a = 0; a < p.run_ber.size() && a < result.config.algorithms.size(); ++a) {
            json list = json::array();
            for (const auto& b : p.run_ber[a]) list.push_back(b ? json(*b) : json(nullptr));
            per_run[std::string(to_string(result.config.algorithms[a]))] = list;
        }
        points.push_back({{"grid_index", g},
                          {"value", p.value},
                          {"seeds", p.seeds},
                          {"wall_time_s", p.wall_time_s},
                          {"failures", p.failures},
                          {"run_ber", per_run}});
    }
    auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
    json rows = json::array();
    for (const ResultRow& r : result.rows) {
        rows.push_back({{"kind", r.aggregate ? "aggregate" : "bin"},
                        {"grid_index", r.grid_index},
                        {"algorithm", std::string(to_string(r.algorithm))},
                        {"symbol_start", r.symbol_start},
                        {"symbol_end", r.symbol_end},
                        {"ber", opt(r.ber)},
                        {"ber_se", r.ber_se},
                        {"bit_errors", r.bit_errors},
                        {"bits", r.bits},
                        {"failed_runs", r.failed_runs},
                        {"b_avg", opt(r.b_avg)},
                        {"sinr_db", opt(r.sinr_db)},
                        {"d_avg", opt(r.d_avg)},
                        {"i_avg", opt(r.i_avg)}});
    }
    return json{
        {"config", to_json(result.config)},
        {"seed_derivation",
         "run seed = derive_seed(run.seed, paired_grid ? 0 : grid_index, run_index), where derive_seed(s, a, b) = "
         "mix64(mix64(mix64(s) ^ (a + 0x632be59bd9b4e019)) ^ (b + 0x8cb92ba72f3d8dd7)) and mix64 is the splitmix64 "
         "finalizer; substreams (ensemble=1, fading=2, symbols=3, noise=4, patterns=5) use derive_seed(run_seed, id, 0)"},
        {"ebn0_definition",
         "per-chip noise variance sigma^2 = A_1^2 / (bits_per_symbol * 10^(Eb/N0 / 10)), with A_1 the desired "
         "user's amplitude after log-normal loading and channel path powers normalized to unit total; absolute BER "
         "levels depend on this normalization"},
        {"ber_aggregation", "pooled bit errors over successful runs (equal to the mean per-run BER); ber_se is the "
                            "binomial standard error sqrt(ber (1 - ber) / bits)"},
        {"points", points},
        {"rows", rows},
    };
}

EmittedFiles emit_results(const RunResult& result, const std::filesystem::path& dir, const EmitOptions& opts) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error(dir.string() + ": cannot create directory: " + ec.message());
    EmittedFiles files;
    files.csv = dir / (opts.stem + ".csv");
    files.sidecar = dir / (opts.stem + ".json");

    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
        out << text;
        out.flush();
        if (!out) throw std::runtime_error(path.string() + ": write failed");
    };
    write(files.csv, results_csv(result));
    write(files.sidecar, results_sidecar(result).dump(2) + "\n");

    if (opts.plot_script) {
        const auto& cols = csv_columns();
        auto col = [&](const std::string& name) {
            return std::to_string(std::find(cols.begin(), cols.end(), name) - cols.begin() + 1);
        };
        const bool bins = time_resolved(result.config.study);
        const std::string kind = bins ? "bin" : "aggregate";
        const std::string xcol = bins ? col("symbol_end") : col("grid_value");
        const std::string xlabel = bins ? "received symbols" : std::string(grid_parameter(result.config.study));
        std::ostringstream gp;
        gp << "# gnuplot script for " << files.csv.filename().string() << "\n"
           << "set datafile separator ','\n"
           << "set datafile missing 'NA'\n"
           << "set logscale y\n"
           << "set grid\n"
           << "set key outside right\n"
           << "set xlabel '" << xlabel << "'\n"
           << "set ylabel 'BER'\n"
           << "set terminal pngcairo size 900,600\n"
           << "set output '" << opts.stem << ".png'\n"
           << "plot \\\n";
        const auto& algos = result.config.algorithms;
        for (std::size_t a = 0; a < algos.size(); ++a) {
            const std::string name(to_string(algos[a]));
            gp << "  '" << files.csv.filename().string() << "' skip 1 using (strcol(1) eq '" << kind
               << "' && strcol(" << col("algorithm") << ") eq '" << name << "' ? $" << xcol << " : 1/0):"
               << col("ber") << " with linespoints title '" << name << "'" << (a + 1 < algos.size() ? ", \\" : "")
               << "\n";
        }
        files.plot = dir / (opts.stem + ".gp");
        write(*files.plot, gp.str());
    }
    return files;
}

}  // namespace barc::sim
