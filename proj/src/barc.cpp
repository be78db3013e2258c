#include "barc/barc.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <string>

#include "barc/random.hpp"

namespace barc::rx {

namespace {

constexpr double kDegenerateNorm2 = 1e-24;  // |x| < 1e-12

void require_finite(std::span<const cd> x, const char* what) {
    if (!all_finite(x)) throw singular_matrix_error(std::string(what) + ": non-finite values");
}

}  // namespace

std::string_view to_string(DecimationScheme s) noexcept {
    switch (s) {
        case DecimationScheme::uniform: return "uniform";
        case DecimationScheme::prestored: return "prestored";
        case DecimationScheme::random: return "random";
        case DecimationScheme::optimal: return "optimal";
    }
    return "unknown";
}

DecimationScheme parse_scheme(std::string_view name) {
    if (name == "uniform" || name == "U") return DecimationScheme::uniform;
    if (name == "prestored" || name == "PS") return DecimationScheme::prestored;
    if (name == "random" || name == "R") return DecimationScheme::random;
    if (name == "optimal" || name == "OPT") return DecimationScheme::optimal;
    throw invalid_argument("unknown decimation scheme '" + std::string(name) + "'");
}

BranchBank make_bank(DecimationScheme scheme, int m, std::vector<DecimationPattern> patterns) {
    if (patterns.empty()) throw invalid_argument("make_bank: need at least one pattern");
    const int d = patterns.front().rank();
    if (d < 1 || d > m) throw invalid_argument("make_bank: rank outside [1, M]");
    BranchBank bank;
    bank.scheme = scheme;
    bank.m = m;
    bank.d = d;
    bank.flat.rank = d;
    for (const auto& pat : patterns) {
        if (pat.rank() != d) throw invalid_argument("make_bank: patterns of different rank");
        std::vector<int> sorted = pat.offsets;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw invalid_argument("make_bank: repeated offset in pattern");
        if (sorted.front() < 0 || sorted.back() >= m) throw invalid_argument("make_bank: offset outside [0, M-1]");
        bank.flat.offsets.insert(bank.flat.offsets.end(), pat.offsets.begin(), pat.offsets.end());
    }
    bank.patterns = std::move(patterns);
    bank.usage_counts.assign(bank.patterns.size(), 0);
    return bank;
}

BranchBank gen_patterns(DecimationScheme scheme, int m, int d, int b, std::uint64_t seed, std::size_t optimal_cap) {
    if (m < 1 || d < 1 || b < 1) throw invalid_argument("gen_patterns: M, D and B must be positive");
    if (d > m) throw invalid_argument("gen_patterns: D exceeds M");
    const int step = m / d;
    std::vector<DecimationPattern> pats;
    switch (scheme) {
        case DecimationScheme::uniform: {
            DecimationPattern p;
            for (int j = 0; j < d; ++j) p.offsets.push_back(j * step);
            pats.push_back(std::move(p));
            break;
        }
        case DecimationScheme::prestored: {
            if ((d - 1) * step + (b - 1) > m - 1)
                throw invalid_argument("gen_patterns: prestored offsets exceed M-1 (B too large for this D)");
            for (int br = 0; br < b; ++br) {
                DecimationPattern p;
                for (int j = 0; j < d; ++j) p.offsets.push_back(j * step + br);
                pats.push_back(std::move(p));
            }
            break;
        }
        case DecimationScheme::random: {
            Rng rng(seed);
            std::vector<int> pool(static_cast<std::size_t>(m));
            for (int br = 0; br < b; ++br) {
                std::iota(pool.begin(), pool.end(), 0);
                for (int j = 0; j < d; ++j) {
                    const int k = rng.uniform_int(j, m - 1);
                    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(k)]);
                }
                DecimationPattern p;
                p.offsets.assign(pool.begin(), pool.begin() + d);
                std::sort(p.offsets.begin(), p.offsets.end());
                pats.push_back(std::move(p));
            }
            break;
        }
        case DecimationScheme::optimal: {
            if (binomial(m, d) > static_cast<double>(optimal_cap))
                throw capacity_error("gen_patterns: exhaustive bank of " + std::to_string(binomial(m, d)) +
                                     " patterns exceeds cap " + std::to_string(optimal_cap));
            for (auto& c : enumerate_combinations(m, d)) pats.push_back(DecimationPattern{std::move(c)});
            break;
        }
    }
    return make_bank(scheme, m, std::move(pats));
}

BranchBank identity_bank(int m) {
    DecimationPattern p;
    p.offsets.resize(static_cast<std::size_t>(m));
    std::iota(p.offsets.begin(), p.offsets.end(), 0);
    return make_bank(DecimationScheme::uniform, m, {std::move(p)});
}

ComplexVec interpolate(std::span<const cd> r, std::span<const cd> v) {
    const std::size_t m = r.size();
    ComplexVec out(m);
    for (std::size_t i = 0; i < m; ++i) {
        cd acc{};
        const std::size_t lim = std::min(v.size(), m - i);
        for (std::size_t n = 0; n < lim; ++n) acc += r[i + n] * std::conj(v[n]);
        out[i] = acc;
    }
    return out;
}

ComplexVec decimate(std::span<const cd> x, const DecimationPattern& pattern) {
    ComplexVec out(pattern.offsets.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = x[static_cast<std::size_t>(pattern.offsets[j])];
    return out;
}

ComplexVec hankel_rows_adjoint(std::span<const cd> x, const DecimationPattern& pattern, std::span<const cd> w,
                               int interp_len) {
    const std::size_t m = x.size();
    ComplexVec out(static_cast<std::size_t>(interp_len));
    for (std::size_t j = 0; j < pattern.offsets.size(); ++j) {
        const auto g = static_cast<std::size_t>(pattern.offsets[j]);
        const cd cw = std::conj(w[j]);
        for (std::size_t n = 0; n < out.size() && g + n < m; ++n) out[n] += x[g + n] * cw;
    }
    return out;
}

BranchOutput apply_chain(std::span<const cd> v, const DecimationPattern& pattern, std::span<const cd> w,
                         std::span<const cd> r) {
    if (v.empty() || r.empty()) throw invalid_argument("apply_chain: empty interpolator or input");
    if (w.size() != pattern.offsets.size()) throw invalid_argument("apply_chain: filter length differs from rank");
    for (int g : pattern.offsets)
        if (g < 0 || static_cast<std::size_t>(g) >= r.size()) throw invalid_argument("apply_chain: pattern offset out of range");
    const int interp = static_cast<int>(v.size());
    const ComplexMat re_o = hankel_expand(r, interp);
    ComplexMat re_b(pattern.offsets.size(), v.size());
    for (std::size_t j = 0; j < pattern.offsets.size(); ++j)
        for (std::size_t n = 0; n < v.size(); ++n) re_b(j, n) = re_o(static_cast<std::size_t>(pattern.offsets[j]), n);

    BranchOutput out;
    const ComplexVec cv = conj(v);
    out.r_bar = re_b * std::span<const cd>(cv);
    const ComplexVec cw = conj(w);
    out.u = re_b.transpose() * std::span<const cd>(cw);
    out.z = dot(w, out.r_bar);
    out.e = std::norm(out.z) - 1.0;
    return out;
}

int select_branch(std::span<const double> errors) {
    if (errors.empty()) throw invalid_argument("select_branch: no branches");
    std::size_t best = 0;
    double best_cost = errors[0] * errors[0];
    for (std::size_t b = 1; b < errors.size(); ++b) {
        const double c = errors[b] * errors[b];
        if (c < best_cost) {
            best_cost = c;
            best = b;
        }
    }
    return static_cast<int>(best);
}

int select_branch(std::span<const BranchOutput> outputs) {
    std::vector<double> e(outputs.size());
    std::transform(outputs.begin(), outputs.end(), e.begin(), [](const BranchOutput& o) { return o.e; });
    return select_branch(e);
}

ConstraintData build_constraint_terms(const DecimationPattern& pattern, std::span<const cd> p, std::span<const cd> v,
                                      std::span<const cd> w) {
    if (w.size() != pattern.offsets.size()) throw invalid_argument("build_constraint_terms: filter length differs from rank");
    const ComplexMat re_p = hankel_expand(p, static_cast<int>(v.size()));
    ConstraintData c;
    c.p.assign(p.begin(), p.end());
    c.p_o = ComplexMat(pattern.offsets.size(), v.size());
    for (std::size_t j = 0; j < pattern.offsets.size(); ++j)
        for (std::size_t n = 0; n < v.size(); ++n) c.p_o(j, n) = re_p(static_cast<std::size_t>(pattern.offsets[j]), n);
    const ComplexVec cw = conj(w);
    c.p_w = c.p_o.transpose() * std::span<const cd>(cw);
    const ComplexVec cv = conj(v);
    c.p_bar = c.p_o * std::span<const cd>(cv);
    return c;
}

void reset_rls(BarcState& state, const RlsInit& init) {
    const auto i = state.v.size();
    const auto d = state.w.size();
    state.rls_u_inv = ComplexMat::identity(i, init.delta_v);
    state.rls_z_inv = ComplexMat::identity(d, init.delta_w);
    state.d_u.assign(i, cd(init.rho_v));
    state.d_z.assign(d, cd(init.rho_w));
}

BarcState init_state(BranchBank bank, int interp_len, std::span<const cd> p, const InitOptions& opts) {
    if (interp_len < 1) throw invalid_argument("init_state: interpolator length must be positive");
    if (static_cast<int>(p.size()) != bank.m) throw invalid_argument("init_state: signature length differs from M");
    BarcState s;
    s.bank = std::move(bank);
    s.nu = opts.nu;
    s.adapt_interpolator = opts.adapt_interpolator;
    const auto& pat = s.bank.patterns.front();

    if (!opts.v0.empty()) {
        if (static_cast<int>(opts.v0.size()) != interp_len) throw invalid_argument("init_state: v0 length differs from I");
        s.v = opts.v0;
    } else {
        s.v.assign(static_cast<std::size_t>(interp_len), cd{});
        s.v[0] = 1.0;
    }
    const ComplexVec p_bar = decimate(interpolate(p, s.v), pat);
    const double np = norm2(p_bar);
    if (np < kDegenerateNorm2) throw degenerate_constraint_error("init_state: decimated signature vanishes");
    if (!opts.w0.empty()) {
        if (opts.w0.size() != pat.offsets.size()) throw invalid_argument("init_state: w0 length differs from D");
        s.w = opts.w0;
        const cd c = dot(p_bar, s.w);
        for (std::size_t j = 0; j < s.w.size(); ++j) s.w[j] += p_bar[j] * ((s.nu - c) / np);
    } else {
        s.w = scaled(p_bar, s.nu / np);
        if (opts.v0.empty() && s.adapt_interpolator) {
            const ComplexVec p_w = hankel_rows_adjoint(p, pat, s.w, interp_len);
            const double npw = norm2(p_w);
            if (npw < kDegenerateNorm2) throw degenerate_constraint_error("init_state: interpolator constraint vector vanishes");
            s.v = scaled(p_w, s.nu / npw);
        }
    }
    reset_rls(s, opts.rls);
    return s;
}

std::vector<cd> all_branch_outputs(const BarcState& state, std::span<const cd> r_interp) {
    std::vector<cd> z(state.bank.size());
    kernels::branch_outputs(state.exec, state.bank.flat, r_interp, state.w, z);
    return z;
}

cd feasible_output(cd raw, cd response, double nu) noexcept {
    if (response == cd{}) return {std::numeric_limits<double>::infinity(), 0.0};
    return nu * raw / response;
}

Selection select_min_branch(const BarcState& state, std::span<const cd> r_interp, std::span<const cd> p_interp) {
    std::vector<cd> z = all_branch_outputs(state, r_interp);
    const std::vector<cd> c = all_branch_outputs(state, p_interp);
    std::vector<double> e(z.size());
    for (std::size_t b = 0; b < z.size(); ++b) {
        z[b] = feasible_output(z[b], c[b], state.nu);
        e[b] = std::norm(z[b]) - 1.0;
    }
    const int b = select_branch(e);
    return {b, z[static_cast<std::size_t>(b)], e[static_cast<std::size_t>(b)], static_cast<int>(z.size())};
}

namespace {

// After a branch switch w satisfies the constraint of the previous branch
// only; rescaling it reproduces the feasible output the selection used.
void rescale_onto_branch(BarcState& s, std::span<const cd> p, const DecimationPattern& pat, const char* who) {
    const ComplexVec p_bar = decimate(interpolate(p, s.v), pat);
    if (norm2(p_bar) < kDegenerateNorm2) throw degenerate_constraint_error(std::string(who) + ": |p_bar| vanishes");
    const cd c0 = dot(p_bar, s.w);
    if (std::abs(c0 - s.nu) <= 1e-10 * std::max(1.0, std::abs(s.nu))) return;
    if (std::abs(c0) < 1e-12)
        throw degenerate_constraint_error(std::string(who) + ": selected branch has no response to p");
    const cd k = s.nu / c0;
    for (cd& x : s.w) x *= k;
}

// z and both constraints are invariant under (v, w) -> (v / c, c w); the
// RLS statistics transform with them, so this rescale leaves every output
// unchanged. Applied only when |v| drifts far from 1.
void renormalize(BarcState& s) {
    const double c = norm(s.v);
    if (!(c > 0.0) || (c > 1e-4 && c < 1e4)) return;
    for (cd& x : s.v) x /= c;
    for (cd& x : s.w) x *= c;
    s.rls_u_inv = (1.0 / (c * c)) * s.rls_u_inv;
    for (cd& x : s.d_u) x *= c;
    s.rls_z_inv = (c * c) * s.rls_z_inv;
    for (cd& x : s.d_z) x /= c;
}

}  // namespace

void sg_update(BarcState& s, std::span<const cd> p, std::span<const cd> r, const Selection& sel, double mu_v,
               double mu_w, StepTrace* trace) {
    if (mu_v < 0.0 || mu_w < 0.0) throw invalid_argument("sg_update: negative step size");
    const auto& pat = s.bank.patterns.at(static_cast<std::size_t>(sel.branch));
    const int interp = s.interp_len();

    rescale_onto_branch(s, p, pat, "sg_update");
    ComplexVec p_bar = decimate(interpolate(p, s.v), pat);
    double np = norm2(p_bar);
    if (np < kDegenerateNorm2) throw degenerate_constraint_error("sg_update: |p_bar| vanishes");

    const cd gain = sel.e * std::conj(sel.z);  // e z^*

    if (s.adapt_interpolator) {
        const ComplexVec u = hankel_rows_adjoint(r, pat, s.w, interp);
        const ComplexVec p_w = hankel_rows_adjoint(p, pat, s.w, interp);
        const double npw = norm2(p_w);
        if (npw < kDegenerateNorm2) throw degenerate_constraint_error("sg_update: |p_w| vanishes");
        const cd proj = dot(p_w, u) / npw;
        for (std::size_t n = 0; n < s.v.size(); ++n) s.v[n] -= mu_v * gain * (u[n] - p_w[n] * proj);
        if (trace) {
            trace->u = u;
            trace->p_w = p_w;
        }
        p_bar = decimate(interpolate(p, s.v), pat);
        np = norm2(p_bar);
        if (np < kDegenerateNorm2) throw degenerate_constraint_error("sg_update: |p_bar| vanishes");
    }

    const ComplexVec r_bar = decimate(interpolate(r, s.v), pat);
    const cd before = dot(p_bar, s.w);
    const cd proj = dot(p_bar, r_bar) / np;
    for (std::size_t j = 0; j < s.w.size(); ++j) s.w[j] -= mu_w * gain * (r_bar[j] - p_bar[j] * proj);
    require_finite(s.v, "sg_update");
    require_finite(s.w, "sg_update");
    if (trace) {
        trace->branch = sel.branch;
        trace->z = sel.z;
        trace->r_bar = r_bar;
        trace->p_bar = p_bar;
        trace->pbar_w_before = before;
        trace->pbar_w_after = dot(p_bar, s.w);
    }
}

ComplexVec constrained_ls_solution(const ComplexMat& r_inv, std::span<const cd> d, std::span<const cd> c, double nu) {
    const ComplexVec a = r_inv * d;
    const ComplexVec b = r_inv * c;
    const cd denom = dot(c, b);
    if (std::abs(denom) < 1e-300) throw degenerate_constraint_error("constrained solution: c^H R^{-1} c vanishes");
    const cd k = (dot(c, a) - nu) / denom;
    ComplexVec x(a.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = a[i] - b[i] * k;
    return x;
}

void rls_update(BarcState& s, std::span<const cd> p, std::span<const cd> r, const Selection& sel, double alpha,
                StepTrace* trace) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw invalid_argument("rls_update: forgetting factor outside (0, 1]");
    const auto& pat = s.bank.patterns.at(static_cast<std::size_t>(sel.branch));
    const int interp = s.interp_len();
    const cd zc = std::conj(sel.z);
    rescale_onto_branch(s, p, pat, "rls_update");

    if (s.adapt_interpolator) {
        const ComplexVec u = hankel_rows_adjoint(r, pat, s.w, interp);
        const ComplexVec x = scaled(u, sel.z);
        s.rls_u_inv = mil_rank1_update(s.rls_u_inv, alpha, x, x);
        for (std::size_t n = 0; n < s.d_u.size(); ++n) s.d_u[n] = alpha * s.d_u[n] + zc * u[n];
        const ComplexVec p_w = hankel_rows_adjoint(p, pat, s.w, interp);
        if (norm2(p_w) < kDegenerateNorm2) throw degenerate_constraint_error("rls_update: |p_w| vanishes");
        s.v = constrained_ls_solution(s.rls_u_inv, s.d_u, p_w, s.nu);
        require_finite(s.v, "rls_update");
        if (trace) {
            trace->u = u;
            trace->p_w = p_w;
        }
    }

    const ComplexVec r_bar = decimate(interpolate(r, s.v), pat);
    const ComplexVec x = scaled(r_bar, sel.z);
    s.rls_z_inv = mil_rank1_update(s.rls_z_inv, alpha, x, x);
    for (std::size_t j = 0; j < s.d_z.size(); ++j) s.d_z[j] = alpha * s.d_z[j] + zc * r_bar[j];
    const ComplexVec p_bar = decimate(interpolate(p, s.v), pat);
    if (norm2(p_bar) < kDegenerateNorm2) throw degenerate_constraint_error("rls_update: |p_bar| vanishes");
    s.w = constrained_ls_solution(s.rls_z_inv, s.d_z, p_bar, s.nu);
    require_finite(s.w, "rls_update");
    if (s.adapt_interpolator) renormalize(s);
    if (trace) {
        trace->branch = sel.branch;
        trace->z = sel.z;
        trace->r_bar = r_bar;
        trace->p_bar = p_bar;
    }
}

namespace {

void check_dims(const BarcState& s, std::span<const cd> p, std::span<const cd> r) {
    if (static_cast<int>(r.size()) != s.m() || static_cast<int>(p.size()) != s.m())
        throw invalid_argument("adaptation step: received vector or signature length differs from M");
}

}  // namespace

StepResult sg_step(BarcState& s, std::span<const cd> p, std::span<const cd> r, double mu_v, double mu_w,
                   StepTrace* trace) {
    check_dims(s, p, r);
    const ComplexVec r_i = interpolate(r, s.v);
    const ComplexVec p_i = interpolate(p, s.v);
    const Selection sel = select_min_branch(s, r_i, p_i);
    sg_update(s, p, r, sel, mu_v, mu_w, trace);
    ++s.bank.usage_counts[static_cast<std::size_t>(sel.branch)];
    return {sel.z, sel.branch, sel.e, sel.evaluated};
}

StepResult rls_step(BarcState& s, std::span<const cd> p, std::span<const cd> r, double alpha, StepTrace* trace) {
    check_dims(s, p, r);
    const ComplexVec r_i = interpolate(r, s.v);
    const ComplexVec p_i = interpolate(p, s.v);
    const Selection sel = select_min_branch(s, r_i, p_i);
    rls_update(s, p, r, sel, alpha, trace);
    ++s.bank.usage_counts[static_cast<std::size_t>(sel.branch)];
    return {sel.z, sel.branch, sel.e, sel.evaluated};
}

double constraint_residual(const BarcState& s, std::span<const cd> p, int branch) {
    const auto& pat = s.bank.patterns.at(static_cast<std::size_t>(branch));
    const ComplexVec p_bar = decimate(interpolate(p, s.v), pat);
    return std::abs(dot(s.w, p_bar) - s.nu);
}

ComplexVec effective_filter(const BarcState& s, int branch) {
    const auto& pat = s.bank.patterns.at(static_cast<std::size_t>(branch));
    const auto m = static_cast<std::size_t>(s.m());
    ComplexVec w_eff(m);
    for (std::size_t j = 0; j < pat.offsets.size(); ++j)
        for (std::size_t n = 0; n < s.v.size(); ++n) {
            const auto idx = static_cast<std::size_t>(pat.offsets[j]) + n;
            if (idx < m) w_eff[idx] += s.w[j] * s.v[n];
        }
    return w_eff;
}

BatchResult batch_ccm_solve(std::span<const ComplexVec> frames, const DecimationPattern& pattern,
                            std::span<const cd> p, std::span<const cd> v0, std::span<const cd> w0, int iterations,
                            double nu, double ridge) {
    if (iterations < 0) throw invalid_argument("batch_ccm_solve: negative iteration count");
    if (v0.empty() || w0.size() != pattern.offsets.size())
        throw invalid_argument("batch_ccm_solve: initial filter dimensions inconsistent with pattern");
    BatchResult res{ComplexVec(v0.begin(), v0.end()), ComplexVec(w0.begin(), w0.end())};
    if (iterations == 0) return res;
    const std::size_t need = 4 * std::max(v0.size(), w0.size());
    if (frames.size() < need) throw invalid_argument("batch_ccm_solve: too few frames for invertible sample averages");

    const int interp = static_cast<int>(v0.size());
    const double inv_t = 1.0 / static_cast<double>(frames.size());
    for (int it = 0; it < iterations; ++it) {
        {
            ComplexMat ru(v0.size(), v0.size());
            ComplexVec du(v0.size());
            for (const ComplexVec& r : frames) {
                const ComplexVec u = hankel_rows_adjoint(r, pattern, res.w, interp);
                const cd z = dot(res.v, u);
                const double z2 = std::norm(z);
                for (std::size_t a = 0; a < u.size(); ++a) {
                    du[a] += std::conj(z) * u[a] * inv_t;
                    for (std::size_t b = 0; b < u.size(); ++b) ru(a, b) += z2 * u[a] * std::conj(u[b]) * inv_t;
                }
            }
            const ComplexVec p_w = hankel_rows_adjoint(p, pattern, res.w, interp);
            if (norm2(p_w) < kDegenerateNorm2) throw degenerate_constraint_error("batch_ccm_solve: |p_w| vanishes");
            res.v = constrained_ls_solution(regularized_inverse(ru, ridge), du, p_w, nu);
        }
        {
            ComplexMat rz(w0.size(), w0.size());
            ComplexVec dz(w0.size());
            for (const ComplexVec& r : frames) {
                const ComplexVec r_bar = decimate(interpolate(r, res.v), pattern);
                const cd z = dot(res.w, r_bar);
                const double z2 = std::norm(z);
                for (std::size_t a = 0; a < r_bar.size(); ++a) {
                    dz[a] += std::conj(z) * r_bar[a] * inv_t;
                    for (std::size_t b = 0; b < r_bar.size(); ++b) rz(a, b) += z2 * r_bar[a] * std::conj(r_bar[b]) * inv_t;
                }
            }
            const ComplexVec p_bar = decimate(interpolate(p, res.v), pattern);
            if (norm2(p_bar) < kDegenerateNorm2) throw degenerate_constraint_error("batch_ccm_solve: |p_bar| vanishes");
            res.w = constrained_ls_solution(regularized_inverse(rz, ridge), dz, p_bar, nu);
        }
    }
    return res;
}

}  // namespace barc::rx
