#include <doctest.h>

#include "barc/baselines.hpp"
#include "barc/chanmodel.hpp"
#include "oracles.hpp"
#include "rls_replay.hpp"
#include "synthetic.hpp"

using namespace barc;
using namespace barc::ref;

namespace {

double angle_deg(const ComplexVec& a, const ComplexVec& b) {
    const double c = std::abs(oracle::inner(a, b)) / std::sqrt(oracle::inner(a, a).real() * oracle::inner(b, b).real());
    return std::acos(std::min(1.0, c)) * 180.0 / std::acos(-1.0);
}

// Closed-form smallest eigenpair of a 2×2 Hermitian matrix.
ComplexVec smallest_2x2(const ComplexMat& a) {
    const double p = a(0, 0).real(), q = a(1, 1).real();
    const cd b = a(0, 1);
    const double lambda = 0.5 * (p + q) - std::sqrt(0.25 * (p - q) * (p - q) + std::norm(b));
    ComplexVec x{b, lambda - p};
    if (std::abs(b) < 1e-14) x = p <= q ? ComplexVec{1.0, 0.0} : ComplexVec{0.0, 1.0};
    const double n = std::sqrt(oracle::inner(x, x).real());
    for (auto& e : x) e /= n;
    return x;
}

chan::UserEnsemble fixed_ensemble(int k, int n, int lp, int frames, std::uint64_t seed, double spread = 0.0) {
    chan::UserEnsemble ens = chan::draw_user_ensemble(k, n, lp, spread, seed);
    chan::StreamOptions so;
    so.num_frames = frames;
    so.fading = chan::FadingModel::fixed;
    chan::attach_streams(ens, so, seed + 1, seed + 2);
    return ens;
}

}  // namespace

TEST_CASE("full-rank SG: zero step, constraint invariance and the reduced-rank equivalence") {
    oracle::Source src(12, 3, 0.1, 41);
    const ComplexVec& p = src.sigs[0];
    FullRankState s = make_fullrank_state(12, p);
    CHECK(std::abs(oracle::inner(s.w, p) - 1.0) < 1e-12);
    const ComplexVec w0 = s.w;
    fullrank_ccm_sg_step(s, src.next(), p, 0.0);
    CHECK(s.w == w0);

    rx::BarcState twin = s;
    for (int t = 0; t < 300; ++t) {
        const ComplexVec r = src.next();
        const cd before = oracle::inner(p, s.w);
        fullrank_ccm_sg_step(s, r, p, 0.02);
        rx::sg_step(twin, p, r, 0.0, 0.02);
        CHECK(std::abs(oracle::inner(p, s.w) - before) < 1e-12);
        CHECK(oracle::max_abs(s.w, twin.w) < 1e-12);
    }
    CHECK_THROWS_AS(fullrank_ccm_sg_step(s, src.next(), p, -0.1), barc::invalid_argument);
    CHECK_THROWS_AS(make_fullrank_state(12, ComplexVec(12)), degenerate_constraint_error);
}

TEST_CASE("full-rank RLS: first step, residual and the batch re-solve") {
    oracle::Source src(12, 3, 0.1, 42);
    const ComplexVec& p = src.sigs[0];
    FullRankState s = make_fullrank_state(12, p);
    const FullRankStep first = fullrank_ccm_rls_step(s, src.next(), p, 0.998);
    CHECK(std::isfinite(std::abs(first.z)));
    CHECK(all_finite(s.w));
    CHECK(std::abs(oracle::inner(s.w, p) - 1.0) < 1e-6);
    for (int t = 0; t < 500; ++t) {
        fullrank_ccm_rls_step(s, src.next(), p, 0.998);
        CHECK(std::abs(oracle::inner(s.w, p) - 1.0) < 1e-6);
    }

    FullRankState b = make_fullrank_state(12, p);
    std::vector<oracle::RlsRecord> recs;
    rx::StepTrace tr;
    for (int t = 0; t < 50; ++t) {
        rx::rls_step(b, p, src.next(), 1.0, &tr);
        recs.push_back({tr.z, {}, {}, tr.r_bar, tr.p_bar});
    }
    const rx::RlsInit init{};
    const ComplexVec w = oracle::constrained_solution(
        oracle::accumulate(recs, false, 1.0, init.delta_w, init.rho_w), recs.back().p_bar, 1.0);
    double dist = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) dist += std::norm(w[i] - b.w[i]);
    CHECK(std::sqrt(dist) < 1e-4);
    CHECK(oracle::max_abs(recs.back().p_bar, p) == 0.0);

    CHECK_THROWS_AS(fullrank_ccm_rls_step(b, src.next(), p, 1.5), barc::invalid_argument);
}

// One 500-step run in 16 dimensions scatters by about sqrt(M/N) rad around
// the fixed point, so the direction is checked on the mean over independent
// runs and on a single long run.
TEST_CASE("full-rank RLS on white noise points along the signature") {
    oracle::Source sig(16, 1, 0.0, 43);
    const ComplexVec& p = sig.sigs[0];
    ComplexVec mean(16);
    for (std::uint64_t run = 0; run < 40; ++run) {
        Rng rng(100 + run);
        FullRankState s = make_fullrank_state(16, p);
        for (int t = 0; t < 500; ++t) fullrank_ccm_rls_step(s, oracle::random_vec(rng, 16), p, 0.998);
        for (std::size_t i = 0; i < 16; ++i) mean[i] += s.w[i] / 40.0;
    }
    CHECK(angle_deg(mean, p) < 5.0);

    Rng rng(44);
    FullRankState s = make_fullrank_state(16, p);
    for (int t = 0; t < 50000; ++t) fullrank_ccm_rls_step(s, oracle::random_vec(rng, 16), p, 1.0);
    CHECK(angle_deg(s.w, p) < 5.0);
}

TEST_CASE("mmse_oracle examples") {
    // single user, one path: R = A^2 s s^H gives w proportional to s
    const chan::UserEnsemble one = fixed_ensemble(1, 16, 1, 4, 45);
    const ComplexVec s1 = chan::user_signature(one, 0, 0);
    const ComplexVec w = mmse_oracle(chan::signal_covariance(one, 0), s1, 0.1);
    CHECK(angle_deg(w, s1) < 1e-6);
    CHECK(std::abs(oracle::inner(w, s1) - 1.0) < 1e-12);
    CHECK(std::abs(oracle::inner(mmse_oracle(chan::signal_covariance(one, 0), s1, 0.1, 2.0), s1) - 2.0) < 1e-12);

    // large noise: the interference structure no longer matters
    const chan::UserEnsemble many = fixed_ensemble(6, 16, 3, 4, 46);
    const ComplexVec p = chan::user_signature(many, 0, 0);
    const ComplexMat cov = chan::signal_covariance(many, 0);
    CHECK(angle_deg(mmse_oracle(cov, p, 1e8), p) < 1e-3);
    CHECK(angle_deg(mmse_oracle(cov, p, 1e-2), p) > 1.0);

    CHECK_THROWS_AS(mmse_oracle(ComplexMat(4, 4), ComplexVec(4, 1.0), 0.0), singular_matrix_error);
    CHECK_THROWS_AS(mmse_oracle(cov, p, -1.0), barc::invalid_argument);
}

TEST_CASE("mmse_oracle beats random constraint-satisfying probes") {
    const chan::UserEnsemble ens = fixed_ensemble(4, 16, 3, 4, 47, 1.5);
    const ComplexVec p = chan::user_signature(ens, 0, 0);
    const ComplexMat cov = chan::signal_covariance(ens, 0);
    const double a2 = ens.users[0].amplitude * ens.users[0].amplitude;
    const double sigma2 = chan::noise_variance_for_ebn0(ens.users[0].amplitude, 10.0, chan::Modulation::qpsk);
    const ComplexVec w = mmse_oracle(cov, p, sigma2);
    const double best = sinr(w, cov, p, a2, sigma2);
    CHECK(std::isfinite(best));
    const double pp = oracle::inner(p, p).real();
    Rng rng(48);
    int beaten = 0;
    for (int probe = 0; probe < 10000; ++probe) {
        ComplexVec x = oracle::random_vec(rng, p.size());
        // minimum-norm correction onto x^H p = 1
        const cd c = oracle::inner(x, p);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += p[i] * std::conj(1.0 - c) / pp;
        if (sinr(x, cov, p, a2, sigma2) > best * (1.0 + 1e-9)) ++beaten;
    }
    CHECK(beaten == 0);
}

TEST_CASE("blind_channel_estimate: white-noise covariance matches the 2×2 eigensolve") {
    Rng rng(49);
    for (int trial = 0; trial < 50; ++trial) {
        const chan::ConstraintMatrix c = chan::build_constraint_matrix(chan::random_code(8, rng), 2);
        const double sigma2 = rng.uniform(0.1, 3.0);
        const ComplexMat rinv = ComplexMat::identity(static_cast<std::size_t>(c.m()), 1.0 / sigma2);
        const ChannelEstimate est = blind_channel_estimate(rinv, c);
        const ComplexVec want =
            smallest_2x2(oracle::matmul(oracle::herm(c.matrix), oracle::matmul(rinv, c.matrix)));
        CHECK(std::abs(oracle::inner(est.h_hat, want)) > 1.0 - 1e-9);
    }
}

TEST_CASE("blind_channel_estimate recovers a single user's channel") {
    for (std::uint64_t seed = 50; seed < 60; ++seed) {
        const chan::UserEnsemble ens = fixed_ensemble(1, 16, 4, 4, seed);
        ComplexMat r = chan::signal_covariance(ens, 0);
        for (std::size_t i = 0; i < r.rows(); ++i) r(i, i) += 1e-3;
        const ComplexMat rinv = oracle::inverse(r);
        const ChannelEstimate est = blind_channel_estimate(rinv, ens.users[0].constraint);
        const ComplexVec h = ens.users[0].taps(1);
        CHECK(std::abs(oracle::inner(est.h_hat, h)) / std::sqrt(oracle::inner(h, h).real()) > 0.99);

        // contract and scale invariance
        CHECK(std::abs(norm(est.h_hat) - 1.0) < 1e-12);
        CHECK(std::abs(est.h_hat[0].imag()) < 1e-12);
        CHECK(est.h_hat[0].real() >= 0.0);
        const ChannelEstimate scaled = blind_channel_estimate(37.5 * rinv, ens.users[0].constraint);
        CHECK(oracle::max_abs(scaled.h_hat, est.h_hat) < 1e-8);
    }
    Rng rng(61);
    const chan::ConstraintMatrix c = chan::build_constraint_matrix(chan::random_code(8, rng), 3);
    CHECK_THROWS_AS(blind_channel_estimate(ComplexMat::identity(5), c), barc::invalid_argument);
}

TEST_CASE("InverseCovarianceTracker follows the weighted sample covariance") {
    Rng rng(62);
    InverseCovarianceTracker tr(5, 0.99, 10.0);
    ComplexMat sum = ComplexMat::identity(5, 0.1);
    for (int t = 0; t < 300; ++t) {
        const ComplexVec r = oracle::random_vec(rng, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) sum(i, j) = 0.99 * sum(i, j) + r[i] * std::conj(r[j]);
        tr.update(r);
    }
    CHECK(oracle::max_abs(tr.inverse(), oracle::inverse(sum)) < 1e-8);
    CHECK_THROWS_AS(InverseCovarianceTracker(5, 0.0, 1.0), barc::invalid_argument);
    CHECK_THROWS_AS(InverseCovarianceTracker(5, 0.9, 0.0), barc::invalid_argument);
}

TEST_CASE("detect_qpsk and detect_bpsk") {
    const double q = 1.0 / std::sqrt(2.0);
    CHECK(detect_qpsk(cd(q, q), 1.0) == cd(q, q));
    CHECK(detect_qpsk(cd(-0.2, 0.9), 1.0) == cd(-q, q));
    Rng rng(63);
    for (int trial = 0; trial < 1000; ++trial) {
        const cd s(rng.coin() ? q : -q, rng.coin() ? q : -q);
        const cd ref = std::polar(rng.uniform(0.1, 3.0), rng.uniform(-3.14, 3.14));
        CHECK(detect_qpsk(s * ref, ref) == s);
        const cd b(rng.coin() ? 1.0 : -1.0, 0.0);
        CHECK(detect_bpsk(b * ref, ref) == b);
    }
    CHECK_THROWS_AS(detect_qpsk(cd(1, 0), cd{}), barc::invalid_argument);
    CHECK_THROWS_AS(detect_bpsk(cd(1, 0), cd{}), barc::invalid_argument);
}

TEST_CASE("phase_reference") {
    const ComplexVec h{cd(0, 2), cd(1, 0)};
    const ComplexVec h_hat{1.0, 0.0};
    CHECK(phase_reference(h, h_hat) == cd(0, 2));
    CHECK(phase_reference(h, ComplexVec{0.0, 0.0}) == cd(1.0));
    CHECK_THROWS_AS(phase_reference(h, ComplexVec{1.0}), barc::invalid_argument);
    CHECK_THROWS_AS(phase_reference(ComplexVec{}, ComplexVec{}), barc::invalid_argument);

    // recovers an arbitrary rotation of the estimate
    Rng rng(64);
    const ComplexVec t = oracle::random_vec(rng, 3);
    const cd rot = std::polar(1.0, 2.0);
    ComplexVec est = t;
    for (auto& e : est) e *= std::conj(rot);
    const cd ref = phase_reference(t, est);
    CHECK(std::abs(std::arg(ref) - std::arg(rot)) < 1e-12);
}

TEST_CASE("matched-filter QPSK detection reproduces the analytic BER") {
    const int symbols = 200000;
    for (const double ebn0_db : {4.0, 8.0}) {
        const chan::UserEnsemble ens = fixed_ensemble(1, 16, 1, symbols, 70 + static_cast<std::uint64_t>(ebn0_db));
        const double sigma2 = chan::noise_variance_for_ebn0(ens.users[0].amplitude, ebn0_db, chan::Modulation::qpsk);
        Rng noise(71);
        long errors = 0;
        for (int i = 0; i < symbols; ++i) {
            const chan::ReceivedFrame f = chan::synthesize_received(ens, i, sigma2, noise);
            const ComplexVec p = chan::user_signature(ens, 0, i);
            const cd z = oracle::inner(p, f.r) / oracle::inner(p, p).real();
            const cd d = detect_qpsk(z, phase_reference(ens.users[0].taps(i + 1), ComplexVec{1.0}));
            errors += (d.real() * f.truth.real() < 0.0) + (d.imag() * f.truth.imag() < 0.0);
        }
        const double bits = 2.0 * symbols;
        const double ber = static_cast<double>(errors) / bits;
        const double want = oracle::q_function(std::sqrt(2.0 * std::pow(10.0, ebn0_db / 10.0)));
        const double sd = std::sqrt(want * (1.0 - want) / bits);
        CHECK(std::abs(ber - want) <= 3.0 * sd);
    }
}
