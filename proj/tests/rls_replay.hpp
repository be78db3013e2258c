#pragma once

// Batch re-solve of the constrained RLS recursion. Every step's regressors
// and output are recorded; the weighted sample statistics are rebuilt from
// scratch and the constrained closed form is solved by direct inversion.

#include <vector>

#include "barc/barc.hpp"
#include "oracles.hpp"

namespace oracle {

struct RlsRecord {
    barc::cd z;
    ComplexVec u, p_w, r_bar, p_bar;
};

struct Accumulated {
    ComplexMat r;
    ComplexVec d;
};

// R = alpha^T / delta I + sum alpha^(T-t) |z_t|^2 x_t x_t^H,
// d = alpha^T rho 1 + sum alpha^(T-t) conj(z_t) x_t.
inline Accumulated accumulate(const std::vector<RlsRecord>& recs, bool for_interp, double alpha, double delta,
                              double rho) {
    const std::size_t n = for_interp ? recs.front().u.size() : recs.front().r_bar.size();
    const auto steps = static_cast<double>(recs.size());
    const double decay = std::pow(alpha, steps);
    Accumulated acc{ComplexMat(n, n), ComplexVec(n, barc::cd(decay * rho))};
    for (std::size_t i = 0; i < n; ++i) acc.r(i, i) = decay / delta;
    for (std::size_t t = 0; t < recs.size(); ++t) {
        const double wgt = std::pow(alpha, steps - 1.0 - static_cast<double>(t));
        const ComplexVec& x = for_interp ? recs[t].u : recs[t].r_bar;
        const double z2 = std::norm(recs[t].z);
        for (std::size_t a = 0; a < n; ++a) {
            acc.d[a] += wgt * std::conj(recs[t].z) * x[a];
            for (std::size_t b = 0; b < n; ++b) acc.r(a, b) += wgt * z2 * x[a] * std::conj(x[b]);
        }
    }
    return acc;
}

// argmin x^H R x - 2 Re(d^H x) subject to c^H x = nu.
inline ComplexVec constrained_solution(const Accumulated& acc, const ComplexVec& c, double nu) {
    const ComplexMat inv = inverse(acc.r);
    const ComplexVec a = matvec(inv, acc.d);
    const ComplexVec b = matvec(inv, c);
    const barc::cd lambda = (inner(c, a) - nu) / inner(c, b);
    ComplexVec x(a.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = a[i] - lambda * b[i];
    return x;
}

struct ReplayResult {
    ComplexVec v, w;
};

inline ReplayResult replay_rls(const std::vector<RlsRecord>& recs, double alpha, const barc::rx::RlsInit& init,
                               double nu) {
    return {constrained_solution(accumulate(recs, true, alpha, init.delta_v, init.rho_v), recs.back().p_w, nu),
            constrained_solution(accumulate(recs, false, alpha, init.delta_w, init.rho_w), recs.back().p_bar, nu)};
}

}  // namespace oracle
