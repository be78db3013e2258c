#include "barc/adapt_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace barc::select {

void RankRange::validate() const {
    if (d_min < 1 || i_min < 1) throw invalid_argument("rank range: minimum ranks must be positive");
    if (d_min > d_max || i_min > i_max) throw invalid_argument("rank range: empty range");
}

CostTable::CostTable(const RankRange& r) : range(r) {
    r.validate();
    cost.assign(static_cast<std::size_t>(r.d_count() * r.i_count()), 0.0);
}

double& CostTable::at(int d, int n) {
    return cost[static_cast<std::size_t>((d - range.d_min) * range.i_count() + (n - range.i_min))];
}

double CostTable::at(int d, int n) const {
    return cost[static_cast<std::size_t>((d - range.d_min) * range.i_count() + (n - range.i_min))];
}

std::pair<int, int> auto_rank(const CostTable& table) {
    table.range.validate();
    if (table.cost.size() != static_cast<std::size_t>(table.range.d_count() * table.range.i_count()))
        throw invalid_argument("auto_rank: cost table does not match its range");
    std::pair<int, int> best{table.range.d_min, table.range.i_min};
    double best_cost = table.at(best.first, best.second);
    for (int d = table.range.d_min; d <= table.range.d_max; ++d)
        for (int n = table.range.i_min; n <= table.range.i_max; ++n) {
            const double c = table.at(d, n);
            if (c < best_cost) {
                best_cost = c;
                best = {d, n};
            }
        }
    return best;
}

namespace {

int branches_for(rx::DecimationScheme scheme, int m, int d, int requested) {
    if (scheme != rx::DecimationScheme::prestored) return requested;
    const int room = m - (d - 1) * (m / d);
    return std::max(1, std::min(requested, room));
}

}  // namespace

AutoRankReceiver::AutoRankReceiver(int m, std::span<const cd> p, const ExtendedOptions& opts)
    : opts_(opts), table_(opts.range), selected_{opts.range.d_min, opts.range.i_min} {
    opts_.range.validate();
    if (opts_.range.d_max > m) throw invalid_argument("AutoRankReceiver: D_max exceeds M");
    auto bank_for = [&](int d) {
        return rx::gen_patterns(opts_.scheme, m, d, branches_for(opts_.scheme, m, d, opts_.branches),
                                derive_seed(opts_.pattern_seed, static_cast<std::uint64_t>(d)));
    };
    for (int d = opts_.range.d_min; d <= opts_.range.d_max; ++d) banks_.push_back(bank_for(d));
    rx::InitOptions init = opts_.init;
    init.v0.clear();
    init.w0.clear();
    ext_ = rx::init_state(bank_for(opts_.range.d_max), opts_.range.i_max, p, init);
}

cd AutoRankReceiver::adapt(rx::BarcState& s, std::span<const cd> p, std::span<const cd> r) {
    if (opts_.adapt.kind == AdaptKind::rls) return rx::rls_step(s, p, r, opts_.adapt.alpha).z;
    return rx::sg_step(s, p, r, opts_.adapt.mu_v, opts_.adapt.mu_w).z;
}

AutoRankReceiver::Output AutoRankReceiver::step(std::span<const cd> p, std::span<const cd> r) {
    if (frozen_) {
        const cd z = adapt(*frozen_, p, r);
        return {z, selected_.first, selected_.second};
    }

    const RankRange& rg = opts_.range;
    std::vector<cd> z_best(static_cast<std::size_t>(rg.d_count() * rg.i_count()));
    for (int n = rg.i_min; n <= rg.i_max; ++n) {
        const std::span<const cd> v = std::span<const cd>(ext_.v).first(static_cast<std::size_t>(n));
        const ComplexVec r_i = rx::interpolate(r, v);
        const ComplexVec p_i = rx::interpolate(p, v);
        for (int d = rg.d_min; d <= rg.d_max; ++d) {
            const rx::BranchBank& bank = banks_[static_cast<std::size_t>(d - rg.d_min)];
            const std::span<const cd> w = std::span<const cd>(ext_.w).first(static_cast<std::size_t>(d));
            double best = 0.0;
            cd zb{};
            for (std::size_t b = 0; b < bank.size(); ++b) {
                const cd z = rx::feasible_output(kernels::branch_output(bank.flat, b, r_i, w),
                                                 kernels::branch_output(bank.flat, b, p_i, w), ext_.nu);
                const double e = std::norm(z) - 1.0;
                if (b == 0 || e * e < best) {
                    best = e * e;
                    zb = z;
                }
            }
            table_.at(d, n) = opts_.cost_alpha * table_.at(d, n) + best;
            z_best[static_cast<std::size_t>((d - rg.d_min) * rg.i_count() + (n - rg.i_min))] = zb;
        }
    }
    selected_ = auto_rank(table_);
    const cd z_out =
        z_best[static_cast<std::size_t>((selected_.first - rg.d_min) * rg.i_count() + (selected_.second - rg.i_min))];

    adapt(ext_, p, r);
    history_.emplace_back(ComplexVec(p.begin(), p.end()), ComplexVec(r.begin(), r.end()));
    while (static_cast<int>(history_.size()) > opts_.replay_symbols) history_.pop_front();

    ++symbol_;
    if (opts_.selection_symbols > 0 && symbol_ == opts_.selection_symbols) freeze(p);
    return {z_out, selected_.first, selected_.second};
}

void AutoRankReceiver::freeze(std::span<const cd> p) {
    rx::InitOptions init = opts_.init;
    init.v0.clear();
    init.w0.clear();
    rx::BranchBank bank = banks_[static_cast<std::size_t>(selected_.first - opts_.range.d_min)];
    std::fill(bank.usage_counts.begin(), bank.usage_counts.end(), 0);
    const ComplexVec& p0 = history_.empty() ? ComplexVec(p.begin(), p.end()) : history_.front().first;
    rx::BarcState s = rx::init_state(std::move(bank), selected_.second, p0, init);
    for (const auto& [hp, hr] : history_) adapt(s, hp, hr);
    frozen_ = std::move(s);
    history_.clear();
}

SnbChoice snb(std::span<const rx::BranchOutput> outputs, double rho, int b_max) {
    if (outputs.empty()) throw invalid_argument("snb: empty branch list");
    if (!(rho > 0.0)) throw invalid_argument("snb: rho must be positive");
    return snb_search(static_cast<int>(outputs.size()),
                      [&](int k) { return outputs[static_cast<std::size_t>(k)].e * outputs[static_cast<std::size_t>(k)].e; },
                      rho, b_max);
}

std::vector<int> sort_branches(std::span<const std::uint64_t> usage_counts) {
    std::vector<int> order(usage_counts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return usage_counts[static_cast<std::size_t>(a)] > usage_counts[static_cast<std::size_t>(b)];
    });
    return order;
}

double avg_branches(std::span<const int> history) {
    if (history.empty()) throw invalid_argument("avg_branches: empty history");
    const double sum = std::accumulate(history.begin(), history.end(), 0.0);
    return sum / static_cast<double>(history.size());
}

BranchBudget::BranchBudget(std::size_t bank_size, const BranchBudgetOptions& opts) : opts_(opts) {
    if (bank_size == 0) throw invalid_argument("BranchBudget: empty bank");
    if (!(opts.rho > 0.0)) throw invalid_argument("BranchBudget: rho must be positive");
    if (opts.b_max < 1) throw invalid_argument("BranchBudget: B_max must be positive");
    order_.resize(bank_size);
    std::iota(order_.begin(), order_.end(), 0);
}

rx::Selection BranchBudget::choose(const rx::BarcState& state, std::span<const cd> r_interp,
                                   std::span<const cd> p_interp) {
    std::vector<cd> z(order_.size());
    auto cost = [&](int k) {
        const auto b = static_cast<std::size_t>(order_[static_cast<std::size_t>(k)]);
        z[static_cast<std::size_t>(k)] =
            rx::feasible_output(kernels::branch_output(state.bank.flat, b, r_interp, state.w),
                                kernels::branch_output(state.bank.flat, b, p_interp, state.w), state.nu);
        const double e = std::norm(z[static_cast<std::size_t>(k)]) - 1.0;
        return e * e;
    };
    const SnbChoice c = snb_search(static_cast<int>(order_.size()), cost, opts_.rho, opts_.b_max);
    const cd zc = z[static_cast<std::size_t>(c.position)];
    history_.push_back(c.evaluated);
    return {order_[static_cast<std::size_t>(c.position)], zc, std::norm(zc) - 1.0, c.evaluated};
}

void BranchBudget::record(rx::BarcState& state, int branch) {
    ++state.bank.usage_counts.at(static_cast<std::size_t>(branch));
    ++symbol_;
    if (!opts_.sorted) return;
    const bool first = symbol_ == opts_.warmup;
    const bool periodic = symbol_ > opts_.warmup && opts_.resort_interval > 0 &&
                          (symbol_ - opts_.warmup) % opts_.resort_interval == 0;
    if (first || periodic) order_ = sort_branches(state.bank.usage_counts);
}

}  // namespace barc::select
