#pragma once

// Automatic structure selection for the reduced-rank receiver:
//  - Auto-Rank: picks (D, I) minimizing an exponentially weighted CM cost over
//    a rank range, from filters adapted at the maximum rank.
//  - SNB / SNB-S: evaluates decimation branches sequentially and stops at the
//    first one whose squared CM error meets a threshold rho; SNB-S visits the
//    branches in descending order of past usage.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "barc/barc.hpp"
#include "barc/random.hpp"

namespace barc::select {

struct RankRange {
    int d_min = 1;
    int d_max = 1;
    int i_min = 1;
    int i_max = 1;

    void validate() const;
    int d_count() const noexcept { return d_max - d_min + 1; }
    int i_count() const noexcept { return i_max - i_min + 1; }
};

/// Accumulated cost per candidate, row-major over d then n.
struct CostTable {
    RankRange range;
    std::vector<double> cost;

    explicit CostTable(const RankRange& r);
    double& at(int d, int n);
    double at(int d, int n) const;
};

/// argmin over the range, ties broken by smaller d, then smaller n.
std::pair<int, int> auto_rank(const CostTable& table);

enum class AdaptKind { sg, rls };

struct AdaptParams {
    AdaptKind kind = AdaptKind::rls;
    double mu_v = 0.0;
    double mu_w = 0.0;
    double alpha = 0.998;
};

struct ExtendedOptions {
    RankRange range;
    rx::DecimationScheme scheme = rx::DecimationScheme::prestored;
    int branches = 1;
    std::uint64_t pattern_seed = 0;
    double cost_alpha = 0.998;   // forgetting factor of the candidate costs
    int selection_symbols = 500; // Auto-Rank runs for this many symbols, then freezes
    int replay_symbols = 200;    // frames replayed to warm the frozen-rank state
    rx::InitOptions init;
    AdaptParams adapt;
};

/// Receiver with Auto-Rank: filters of length (I_max, D_max) adapt on every
/// symbol; each candidate (d, n) is scored from the truncated filters
/// v[0..n), w[0..d) applied with its own rank-d bank. After the selection
/// window the receiver continues at the chosen rank, warmed by replaying the
/// most recent frames.
class AutoRankReceiver {
public:
    AutoRankReceiver(int m, std::span<const cd> p, const ExtendedOptions& opts);

    struct Output {
        cd z;
        int d = 0;
        int i = 0;
    };

    Output step(std::span<const cd> p, std::span<const cd> r);

    bool frozen() const noexcept { return frozen_.has_value(); }
    std::pair<int, int> selected() const noexcept { return selected_; }
    const CostTable& costs() const noexcept { return table_; }
    const rx::BarcState& extended_state() const noexcept { return ext_; }

private:
    void freeze(std::span<const cd> p);
    cd adapt(rx::BarcState& s, std::span<const cd> p, std::span<const cd> r);

    ExtendedOptions opts_;
    rx::BarcState ext_;
    std::vector<rx::BranchBank> banks_;  // per candidate d
    CostTable table_;
    std::pair<int, int> selected_;
    std::optional<rx::BarcState> frozen_;
    std::deque<std::pair<ComplexVec, ComplexVec>> history_;  // (p, r)
    int symbol_ = 0;
};

struct SnbChoice {
    int position = 0;  // index into the evaluation order
    int evaluated = 0; // B_s
};

/// Sequential search: stops at the first cost <= rho; if none of the first
/// b_max qualifies, returns the argmin over them with evaluated = b_max.
template <class CostFn>
SnbChoice snb_search(int available, CostFn&& cost, double rho, int b_max) {
    const int limit = std::min(available, b_max);
    if (limit < 1) throw invalid_argument("snb: no branches to evaluate");
    int best = 0;
    double best_cost = 0.0;
    for (int k = 0; k < limit; ++k) {
        const double c = cost(k);
        if (c <= rho) return {k, k + 1};
        if (k == 0 || c < best_cost) {
            best = k;
            best_cost = c;
        }
    }
    return {best, limit};
}

/// SNB over precomputed outputs (in evaluation order).
SnbChoice snb(std::span<const rx::BranchOutput> outputs, double rho, int b_max);

/// Stable descending sort of branch indices by usage count.
std::vector<int> sort_branches(std::span<const std::uint64_t> usage_counts);

/// Mean number of evaluated branches.
double avg_branches(std::span<const int> history);

struct BranchBudgetOptions {
    double rho = 0.0;
    int b_max = 16;
    bool sorted = false;       // SNB-S
    int warmup = 200;          // first re-sort after this many symbols
    int resort_interval = 500; // then every this many symbols
};

/// SNB / SNB-S driver around a BarcState.
class BranchBudget {
public:
    BranchBudget(std::size_t bank_size, const BranchBudgetOptions& opts);

    /// Chooses a branch for this symbol (outputs at their feasible points)
    /// and records B_s.
    rx::Selection choose(const rx::BarcState& state, std::span<const cd> r_interp, std::span<const cd> p_interp);

    /// Called once per symbol after the update, with the chosen branch.
    void record(rx::BarcState& state, int branch);

    const std::vector<int>& order() const noexcept { return order_; }
    const std::vector<int>& history() const noexcept { return history_; }
    double rho() const noexcept { return opts_.rho; }

private:
    BranchBudgetOptions opts_;
    std::vector<int> order_;
    std::vector<int> history_;
    int symbol_ = 0;
};

}  // namespace barc::select
