#pragma once

// Reduced-rank receiver built from an interpolator v (I taps), a bank of
// switched decimation patterns (D of M samples each) and a reduced-rank
// filter w (D taps), adapted blindly under the constrained constant-modulus
// criterion
//
//     min E[(|z|^2 - 1)^2]   s.t.   w^H S_D^H p = nu,    S_D^H = D_b V^H,
//
// with z = w^H D_b Re_o(r) conj(v) and Re_o(r) the M×I Hankel expansion of r.
//
// Conjugation conventions (fixed so that every identity below holds exactly):
//   r_I   = Re_o(r) conj(v)             interpolated vector (length M)
//   r_bar = D_b r_I                     decimated vector (length D)
//   u     = (D_b Re_o(r))^T conj(w)     interpolator regressor (length I)
//   z     = w^H r_bar = v^H u
//   p_bar = D_b Re_o(p) conj(v),  p_w = (D_b Re_o(p))^T conj(w)
//   w^H p_bar = v^H p_w               (one bilinear constraint, two views)

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "barc/kernels.hpp"
#include "barc/numerics.hpp"

namespace barc::rx {

enum class DecimationScheme { uniform, prestored, random, optimal };

std::string_view to_string(DecimationScheme s) noexcept;
DecimationScheme parse_scheme(std::string_view name);

struct DecimationPattern {
    std::vector<int> offsets;  // gamma_j, distinct, in [0, M-1]
    int rank() const noexcept { return static_cast<int>(offsets.size()); }
};

struct BranchBank {
    DecimationScheme scheme = DecimationScheme::uniform;
    int m = 0;
    int d = 0;
    std::vector<DecimationPattern> patterns;
    std::vector<std::uint64_t> usage_counts;
    kernels::FlatPatterns flat;

    std::size_t size() const noexcept { return patterns.size(); }
};

/// Builds a bank from explicit patterns (validated against M).
BranchBank make_bank(DecimationScheme scheme, int m, std::vector<DecimationPattern> patterns);

inline constexpr std::size_t kDefaultOptimalCap = 50000;

/// uniform: one pattern gamma_j = j*L; prestored: gamma_j = j*L + b;
/// random: B independent draws of D distinct offsets (sorted);
/// optimal: every D-subset of M, refused above `optimal_cap` patterns.
/// L = floor(M/D).
BranchBank gen_patterns(DecimationScheme scheme, int m, int d, int b, std::uint64_t seed,
                        std::size_t optimal_cap = kDefaultOptimalCap);

/// Single pattern selecting all M samples (full-rank degenerate case).
BranchBank identity_bank(int m);

/// r_I[m] = sum_n r[m+n] conj(v[n]), zero beyond the end of r.
ComplexVec interpolate(std::span<const cd> r, std::span<const cd> v);

ComplexVec decimate(std::span<const cd> x, const DecimationPattern& pattern);

/// (D_b Re_o(x))^T conj(w): out[n] = sum_j x[gamma_j + n] conj(w[j]).
ComplexVec hankel_rows_adjoint(std::span<const cd> x, const DecimationPattern& pattern, std::span<const cd> w,
                               int interp_len);

struct BranchOutput {
    cd z;
    double e = 0.0;  // |z|^2 - 1
    ComplexVec r_bar;
    ComplexVec u;
};

/// Full interpolation -> decimation -> estimation chain for one branch.
BranchOutput apply_chain(std::span<const cd> v, const DecimationPattern& pattern, std::span<const cd> w,
                         std::span<const cd> r);

/// argmin_b e_b^2, lowest index on ties.
int select_branch(std::span<const BranchOutput> outputs);
int select_branch(std::span<const double> errors);

struct ConstraintData {
    ComplexVec p;
    ComplexMat p_o;      // D×I: D_b Re_o(p)
    ComplexVec p_w;      // I
    ComplexVec p_bar;    // D
};

ConstraintData build_constraint_terms(const DecimationPattern& pattern, std::span<const cd> p,
                                      std::span<const cd> v, std::span<const cd> w);

struct RlsInit {
    double delta_v = 0.01;  // R_u^{-1}[0] = delta_v I
    double delta_w = 0.01;  // R_z^{-1}[0] = delta_w I
    double rho_v = 0.01;    // d_u[0] = rho_v 1
    double rho_w = 0.01;    // d_z[0] = rho_w 1
};

struct BarcState {
    ComplexVec v;
    ComplexVec w;
    BranchBank bank;
    ComplexMat rls_u_inv;
    ComplexMat rls_z_inv;
    ComplexVec d_u;
    ComplexVec d_z;
    double nu = 1.0;
    bool adapt_interpolator = true;
    kernels::Exec exec = kernels::Exec::serial;

    int m() const noexcept { return bank.m; }
    int rank() const noexcept { return bank.d; }
    int interp_len() const noexcept { return static_cast<int>(v.size()); }
};

struct InitOptions {
    double nu = 1.0;
    RlsInit rls{};
    bool adapt_interpolator = true;
    ComplexVec v0;  // optional starting interpolator
    ComplexVec w0;  // optional starting reduced-rank filter
};

/// Initial state satisfying the constraint on branch 0. Without explicit
/// starting values: v = e_1, w = nu p_bar / |p_bar|^2, then
/// v = nu p_w / |p_w|^2.
BarcState init_state(BranchBank bank, int interp_len, std::span<const cd> p, const InitOptions& opts = {});

/// Resets the RLS recursion quantities to their initial values.
void reset_rls(BarcState& state, const RlsInit& init);

struct Selection {
    int branch = 0;
    cd z;
    double e = 0.0;
    int evaluated = 0;  // number of branch outputs computed
};

/// Output of a branch at its feasible point: the filter rescaled so that the
/// branch's own constraint holds, z = nu (w^H r_bar_b) / (w^H p_bar_b).
/// A vanishing response yields an infinite output.
cd feasible_output(cd raw, cd response, double nu) noexcept;

/// Evaluates every branch at its feasible point and picks argmin e_b^2.
/// `p_interp` is the interpolated signature.
Selection select_min_branch(const BarcState& state, std::span<const cd> r_interp, std::span<const cd> p_interp);

/// Outputs of every branch for a given interpolated vector.
std::vector<cd> all_branch_outputs(const BarcState& state, std::span<const cd> r_interp);

struct StepResult {
    cd z;
    int branch = 0;
    double e = 0.0;
    int evaluated = 0;
};

struct StepTrace {
    int branch = 0;
    cd z;
    ComplexVec u;       // regressor used for the v recursion
    ComplexVec p_w;
    ComplexVec r_bar;   // regressor used for the w recursion
    ComplexVec p_bar;
    double constraint_before_w = 0.0;  // p_bar^H w before the w update (SG)
    cd pbar_w_before;
    cd pbar_w_after;
};

/// Projected-gradient update on the selected branch. If the selected branch's
/// constraint is violated on entry (after a branch switch), w is first
/// rescaled onto it, which reproduces the feasible output used for selection.
void sg_update(BarcState& state, std::span<const cd> p, std::span<const cd> r, const Selection& sel, double mu_v,
               double mu_w, StepTrace* trace = nullptr);

/// Exponentially weighted constrained LS update via the matrix inversion lemma.
void rls_update(BarcState& state, std::span<const cd> p, std::span<const cd> r, const Selection& sel, double alpha,
                StepTrace* trace = nullptr);

StepResult sg_step(BarcState& state, std::span<const cd> p, std::span<const cd> r, double mu_v, double mu_w,
                   StepTrace* trace = nullptr);
StepResult rls_step(BarcState& state, std::span<const cd> p, std::span<const cd> r, double alpha,
                    StepTrace* trace = nullptr);

/// |w^H p_bar - nu| for the given branch.
double constraint_residual(const BarcState& state, std::span<const cd> p, int branch);

/// M-tap filter equivalent to the chain on a branch: z = w_eff^H r.
ComplexVec effective_filter(const BarcState& state, int branch);

/// R^{-1} (d - c (c^H R^{-1} c)^{-1} (c^H R^{-1} d - nu)), given R^{-1}.
ComplexVec constrained_ls_solution(const ComplexMat& r_inv, std::span<const cd> d, std::span<const cd> c, double nu);

struct BatchResult {
    ComplexVec v;
    ComplexVec w;
};

/// Alternating closed-form CCM solve with sample-average statistics over
/// `frames`, on a single pattern. `ridge` adds ridge·I to both sample
/// matrices; with ridge = 0 singular statistics throw.
BatchResult batch_ccm_solve(std::span<const ComplexVec> frames, const DecimationPattern& pattern,
                            std::span<const cd> p, std::span<const cd> v0, std::span<const cd> w0, int iterations,
                            double nu = 1.0, double ridge = 0.0);

}  // namespace barc::rx
