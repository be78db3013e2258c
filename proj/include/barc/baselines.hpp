#pragma once

// Reference receivers and supporting estimators: full-rank CCM (the reduced
// receiver in its degenerate I = 1, D = M configuration), the MMSE oracle,
// subspace blind channel estimation and symbol detection.

#include <span>

#include "barc/barc.hpp"
#include "barc/chanmodel.hpp"
#include "barc/numerics.hpp"

namespace barc::ref {

/// Full-rank CCM state: a BarcState with v = [1], one identity pattern and a
/// frozen interpolator.
using FullRankState = rx::BarcState;

FullRankState make_fullrank_state(int m, std::span<const cd> p, double nu = 1.0, const rx::RlsInit& rls = {});

struct FullRankStep {
    cd z;
    double e = 0.0;
};

FullRankStep fullrank_ccm_sg_step(FullRankState& state, std::span<const cd> r, std::span<const cd> p, double mu);
FullRankStep fullrank_ccm_rls_step(FullRankState& state, std::span<const cd> r, std::span<const cd> p, double alpha);

/// w = (R + sigma2 I)^{-1} p scaled so that w^H p = nu. `signal_cov` is the
/// noiseless covariance.
ComplexVec mmse_oracle(const ComplexMat& signal_cov, std::span<const cd> p, double sigma2, double nu = 1.0);

/// Output SINR of filter w for a desired component power·p p^H against the
/// total covariance signal_cov + sigma2 I.
double sinr(std::span<const cd> w, const ComplexMat& signal_cov, std::span<const cd> p, double desired_power,
            double sigma2);

/// Exponentially weighted RLS estimate of R^{-1}, the input of the blind
/// channel estimator.
class InverseCovarianceTracker {
public:
    InverseCovarianceTracker(int m, double alpha, double delta);
    void update(std::span<const cd> r);
    const ComplexMat& inverse() const noexcept { return inv_; }

private:
    ComplexMat inv_;
    double alpha_;
};

struct ChannelEstimate {
    ComplexVec h_hat;  // unit norm, h_hat[0] real nonnegative
};

/// Smallest eigenvector of C^H R^{-1} C. `warm_start` (previous estimate)
/// speeds up the inverse iteration when supplied.
ChannelEstimate blind_channel_estimate(const ComplexMat& r_inv_hat, const chan::ConstraintMatrix& c,
                                       std::span<const cd> warm_start = {});

/// Rotates z by -arg(phase_ref) and slices to the nearest (±1±j)/sqrt(2).
cd detect_qpsk(cd z, cd phase_ref);

/// Rotates z by -arg(phase_ref) and slices the real part to ±1.
cd detect_bpsk(cd z, cd phase_ref);

/// Phase reference removing the blind-estimate ambiguity: the projection
/// h_hat^H h_true of the true channel onto the estimate. A single tap is not
/// usable because each path fades through zero.
cd phase_reference(std::span<const cd> h_true, std::span<const cd> h_hat);

}  // namespace barc::ref
