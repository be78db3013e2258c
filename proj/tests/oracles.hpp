#pragma once

// Test-only reference constructions. Nothing here calls into the library's
// algorithm paths: matrices are built entry by entry and inverted with a
// separate full-pivoting elimination.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "barc/numerics.hpp"
#include "barc/random.hpp"

namespace oracle {

using barc::cd;
using barc::ComplexMat;
using barc::ComplexVec;

inline ComplexVec random_vec(barc::Rng& rng, std::size_t n, double scale = 1.0) {
    ComplexVec x(n);
    for (auto& e : x) e = rng.complex_normal(scale * scale);
    return x;
}

inline ComplexMat random_mat(barc::Rng& rng, std::size_t r, std::size_t c) {
    ComplexMat a(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) a(i, j) = rng.complex_normal(1.0);
    return a;
}

// B B^H + n I: comfortably positive definite.
inline ComplexMat random_pd(barc::Rng& rng, std::size_t n) {
    const ComplexMat b = random_mat(rng, n, n);
    ComplexMat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cd s{};
            for (std::size_t k = 0; k < n; ++k) s += b(i, k) * std::conj(b(j, k));
            a(i, j) = s + (i == j ? cd(static_cast<double>(n)) : cd{});
        }
    return a;
}

inline ComplexMat random_hermitian(barc::Rng& rng, std::size_t n) {
    ComplexMat a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = rng.normal();
        for (std::size_t j = i + 1; j < n; ++j) {
            a(i, j) = rng.complex_normal(1.0);
            a(j, i) = std::conj(a(i, j));
        }
    }
    return a;
}

inline ComplexMat matmul(const ComplexMat& a, const ComplexMat& b) {
    ComplexMat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            cd s{};
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

inline ComplexVec matvec(const ComplexMat& a, const ComplexVec& x) {
    ComplexVec y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) y[i] += a(i, k) * x[k];
    return y;
}

inline ComplexMat herm(const ComplexMat& a) {
    ComplexMat h(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) h(j, i) = std::conj(a(i, j));
    return h;
}

inline cd inner(const ComplexVec& a, const ComplexVec& b) {  // a^H b
    cd s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline ComplexVec conjugate(const ComplexVec& x) {
    ComplexVec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::conj(x[i]);
    return y;
}

// Gauss-Jordan with full pivoting.
inline ComplexMat inverse(ComplexMat a) {
    const std::size_t n = a.rows();
    ComplexMat inv = ComplexMat(n, n);
    for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1.0;
    std::vector<std::size_t> col_perm(n);
    for (std::size_t i = 0; i < n; ++i) col_perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pr = k, pc = k;
        double best = -1.0;
        for (std::size_t i = k; i < n; ++i)
            for (std::size_t j = k; j < n; ++j)
                if (std::abs(a(i, j)) > best) {
                    best = std::abs(a(i, j));
                    pr = i;
                    pc = j;
                }
        if (best < 1e-300) throw std::runtime_error("oracle::inverse: singular");
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(a(k, j), a(pr, j));
            std::swap(inv(k, j), inv(pr, j));
        }
        for (std::size_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, pc));
        std::swap(col_perm[k], col_perm[pc]);
        const cd piv = a(k, k);
        for (std::size_t j = 0; j < n; ++j) {
            a(k, j) /= piv;
            inv(k, j) /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const cd f = a(i, k);
            if (f == cd{}) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    // Column swaps on A permute the rows of its inverse.
    ComplexMat out(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) out(col_perm[k], j) = inv(k, j);
    return out;
}

inline double max_abs(const ComplexMat& a, const ComplexMat& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

inline double max_abs(const ComplexVec& a, const ComplexVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// M×M banded convolution matrix with V^H x = interpolated x: column m holds
// the interpolator taps starting at row m.
inline ComplexMat convolution_matrix(const ComplexVec& v, std::size_t m) {
    ComplexMat big(m, m);
    for (std::size_t col = 0; col < m; ++col)
        for (std::size_t n = 0; n < v.size(); ++n)
            if (col + n < m) big(col + n, col) = v[n];
    return big;
}

// D×M selection matrix: row j has a single one at column offsets[j].
inline ComplexMat selection_matrix(const std::vector<int>& offsets, std::size_t m) {
    ComplexMat d(offsets.size(), m);
    for (std::size_t j = 0; j < offsets.size(); ++j) d(j, static_cast<std::size_t>(offsets[j])) = 1.0;
    return d;
}

// S_D = V D_b^H (M×D).
inline ComplexMat projection_matrix(const ComplexVec& v, const std::vector<int>& offsets, std::size_t m) {
    return matmul(convolution_matrix(v, m), herm(selection_matrix(offsets, m)));
}

// Explicit Hankel construction, entry by entry.
inline ComplexMat hankel(const ComplexVec& x, std::size_t width) {
    ComplexMat h(x.size(), width);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) h(i, j) = i + j < x.size() ? x[i + j] : cd{};
    return h;
}

// All strictly increasing D-subsets of {0..M-1}, by recursion.
inline void combinations(int m, int d, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == d) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < m; ++i) {
        cur.push_back(i);
        combinations(m, d, i + 1, cur, out);
        cur.pop_back();
    }
}

inline std::vector<std::vector<int>> combinations(int m, int d) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    combinations(m, d, 0, cur, out);
    return out;
}

// Gaussian tail probability.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Bessel J0 by its power series (adequate for |x| < 20).
inline double bessel_j0(double x) {
    double term = 1.0, sum = 1.0;
    const double q = -(x * x) / 4.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (std::abs(term) < 1e-17) break;
    }
    return sum;
}

}  // namespace oracle
