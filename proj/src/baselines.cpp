#include "barc/baselines.hpp"

#include <cmath>

namespace barc::ref {

FullRankState make_fullrank_state(int m, std::span<const cd> p, double nu, const rx::RlsInit& rls) {
    rx::InitOptions opts;
    opts.nu = nu;
    opts.rls = rls;
    opts.adapt_interpolator = false;
    opts.v0 = {cd(1.0)};
    return rx::init_state(rx::identity_bank(m), 1, p, opts);
}

FullRankStep fullrank_ccm_sg_step(FullRankState& state, std::span<const cd> r, std::span<const cd> p, double mu) {
    if (!(mu >= 0.0)) throw invalid_argument("fullrank_ccm_sg_step: negative step size");
    const rx::StepResult res = rx::sg_step(state, p, r, 0.0, mu);
    return {res.z, res.e};
}

FullRankStep fullrank_ccm_rls_step(FullRankState& state, std::span<const cd> r, std::span<const cd> p, double alpha) {
    const rx::StepResult res = rx::rls_step(state, p, r, alpha);
    return {res.z, res.e};
}

ComplexVec mmse_oracle(const ComplexMat& signal_cov, std::span<const cd> p, double sigma2, double nu) {
    if (sigma2 < 0.0) throw invalid_argument("mmse_oracle: negative noise variance");
    const ComplexVec x = solve(signal_cov, p, sigma2);
    const cd resp = dot(x, p);
    if (std::abs(resp) < 1e-300) throw singular_matrix_error("mmse_oracle: vanishing response to the signature");
    // w^H p = nu
    return scaled(x, nu / std::conj(resp));
}

double sinr(std::span<const cd> w, const ComplexMat& signal_cov, std::span<const cd> p, double desired_power,
            double sigma2) {
    const ComplexVec rw = signal_cov * w;
    const double total = dot(w, rw).real() + sigma2 * norm2(w);
    const double desired = desired_power * std::norm(dot(w, p));
    const double interference = total - desired;
    if (interference <= 0.0) return std::numeric_limits<double>::infinity();
    return desired / interference;
}

InverseCovarianceTracker::InverseCovarianceTracker(int m, double alpha, double delta)
    : inv_(ComplexMat::identity(static_cast<std::size_t>(m), delta)), alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw invalid_argument("InverseCovarianceTracker: alpha outside (0, 1]");
    if (!(delta > 0.0)) throw invalid_argument("InverseCovarianceTracker: delta must be positive");
}

void InverseCovarianceTracker::update(std::span<const cd> r) { inv_ = mil_rank1_update(inv_, alpha_, r, r); }

ChannelEstimate blind_channel_estimate(const ComplexMat& r_inv_hat, const chan::ConstraintMatrix& c,
                                       std::span<const cd> warm_start) {
    const ComplexMat& cm = c.matrix;
    if (r_inv_hat.rows() != cm.rows() || r_inv_hat.cols() != cm.rows())
        throw invalid_argument("blind_channel_estimate: covariance size differs from constraint matrix");
    // C^H R^{-1} C
    const ComplexMat rc = r_inv_hat * cm;
    ComplexMat q = cm.adjoint() * rc;
    // Normalize so the convergence tolerance is scale-free.
    double scale = 0.0;
    for (std::size_t i = 0; i < q.rows(); ++i) scale = std::max(scale, q(i, i).real());
    if (!(scale > 0.0)) throw singular_matrix_error("blind_channel_estimate: degenerate quadratic form");
    for (std::size_t i = 0; i < q.rows(); ++i) {
        q(i, i) = q(i, i).real() / scale;
        for (std::size_t j = i + 1; j < q.cols(); ++j) {
            const cd avg = 0.5 * (q(i, j) + std::conj(q(j, i))) / scale;
            q(i, j) = avg;
            q(j, i) = std::conj(avg);
        }
    }
    EigResult eig = smallest_eigvec(q, {}, warm_start);
    return {std::move(eig.vector)};
}

cd detect_qpsk(cd z, cd phase_ref) {
    if (std::abs(phase_ref) == 0.0) throw invalid_argument("detect_qpsk: zero phase reference");
    const cd y = z * std::conj(phase_ref) / std::abs(phase_ref);
    const double q = 1.0 / std::sqrt(2.0);
    return {y.real() >= 0.0 ? q : -q, y.imag() >= 0.0 ? q : -q};
}

cd detect_bpsk(cd z, cd phase_ref) {
    if (std::abs(phase_ref) == 0.0) throw invalid_argument("detect_bpsk: zero phase reference");
    const cd y = z * std::conj(phase_ref);
    return {y.real() >= 0.0 ? 1.0 : -1.0, 0.0};
}

cd phase_reference(std::span<const cd> h_true, std::span<const cd> h_hat) {
    if (h_true.empty() || h_hat.empty()) throw invalid_argument("phase_reference: empty channel vector");
    if (h_true.size() != h_hat.size()) throw invalid_argument("phase_reference: channel lengths differ");
    // h_true ~ c h_hat with c = h_hat^H h_true; the desired output carries c.
    const cd ref = dot(h_hat, h_true);
    if (std::abs(ref) == 0.0) return cd(1.0);
    return ref;
}

}  // namespace barc::ref
