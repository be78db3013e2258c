#include "barc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace barc {

ComplexMat ComplexMat::identity(std::size_t n, double scale) {
    ComplexMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
    return m;
}

ComplexMat ComplexMat::diagonal(std::span<const cd> diag) {
    ComplexMat m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

ComplexMat ComplexMat::adjoint() const {
    ComplexMat t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = std::conj((*this)(r, c));
    return t;
}

ComplexMat ComplexMat::transpose() const {
    ComplexMat t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

ComplexMat operator*(const ComplexMat& a, const ComplexMat& b) {
    if (a.cols() != b.rows()) throw invalid_argument("matrix product: inner dimensions differ");
    ComplexMat out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cd aik = a(i, k);
            if (aik == cd{}) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

ComplexMat operator+(const ComplexMat& a, const ComplexMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw invalid_argument("matrix sum: shape mismatch");
    ComplexMat out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) + b(r, c);
    return out;
}

ComplexMat operator-(const ComplexMat& a, const ComplexMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw invalid_argument("matrix difference: shape mismatch");
    ComplexMat out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) - b(r, c);
    return out;
}

ComplexMat operator*(cd s, const ComplexMat& a) {
    ComplexMat out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = s * a(r, c);
    return out;
}

ComplexVec operator*(const ComplexMat& a, std::span<const cd> x) {
    if (a.cols() != x.size()) throw invalid_argument("matrix-vector product: dimension mismatch");
    ComplexVec y(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        cd acc{};
        auto row = a.row(r);
        for (std::size_t c = 0; c < x.size(); ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

cd dot(std::span<const cd> a, std::span<const cd> b) {
    if (a.size() != b.size()) throw invalid_argument("dot: length mismatch");
    cd acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2(std::span<const cd> x) {
    double acc = 0.0;
    for (const cd& v : x) acc += std::norm(v);
    return acc;
}

double norm(std::span<const cd> x) { return std::sqrt(norm2(x)); }

ComplexVec conj(std::span<const cd> x) {
    ComplexVec y(x.size());
    std::transform(x.begin(), x.end(), y.begin(), [](cd v) { return std::conj(v); });
    return y;
}

ComplexVec scaled(std::span<const cd> x, cd s) {
    ComplexVec y(x.size());
    std::transform(x.begin(), x.end(), y.begin(), [s](cd v) { return s * v; });
    return y;
}

bool all_finite(std::span<const cd> x) {
    return std::all_of(x.begin(), x.end(),
                       [](cd v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

double frobenius_distance(const ComplexMat& a, const ComplexMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw invalid_argument("frobenius_distance: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) acc += std::norm(a.data()[i] - b.data()[i]);
    return std::sqrt(acc);
}

double max_abs_diff(std::span<const cd> a, std::span<const cd> b) {
    if (a.size() != b.size()) throw invalid_argument("max_abs_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

ComplexMat hankel_expand(std::span<const cd> x, int width) {
    if (width <= 0) throw invalid_argument("hankel_expand: width must be positive");
    if (x.empty()) throw invalid_argument("hankel_expand: empty input");
    const std::size_t m = x.size();
    const auto w = static_cast<std::size_t>(width);
    ComplexMat h(m, w);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < w && r + c < m; ++c) h(r, c) = x[r + c];
    return h;
}

ComplexMat mil_rank1_update(const ComplexMat& a_inv, double a, std::span<const cd> g,
                            std::span<const cd> h) {
    const std::size_t n = a_inv.rows();
    if (a_inv.cols() != n || g.size() != n || h.size() != n)
        throw invalid_argument("mil_rank1_update: dimension mismatch");
    if (!(a > 0.0 && a <= 1.0)) throw invalid_argument("mil_rank1_update: forgetting factor outside (0, 1]");

    const double inv_a = 1.0 / a;
    const ComplexVec pg = a_inv * g;
    // h^H P, as a row
    ComplexVec hp(n);
    for (std::size_t c = 0; c < n; ++c) {
        cd acc{};
        for (std::size_t r = 0; r < n; ++r) acc += std::conj(h[r]) * a_inv(r, c);
        hp[c] = acc;
    }
    const cd denom = 1.0 + inv_a * dot(h, pg);
    if (std::abs(denom) < 1e-300) throw singular_matrix_error("mil_rank1_update: vanishing denominator");

    const cd kscale = inv_a / denom;
    ComplexMat out(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const cd kr = kscale * pg[r];
        for (std::size_t c = 0; c < n; ++c) out(r, c) = inv_a * (a_inv(r, c) - kr * hp[c]);
    }
    // Symmetric updates should stay Hermitian; rounding drifts it otherwise.
    if (std::equal(g.begin(), g.end(), h.begin())) {
        for (std::size_t r = 0; r < n; ++r) {
            out(r, r) = out(r, r).real();
            for (std::size_t c = r + 1; c < n; ++c) {
                const cd avg = 0.5 * (out(r, c) + std::conj(out(c, r)));
                out(r, c) = avg;
                out(c, r) = std::conj(avg);
            }
        }
    }
    return out;
}

namespace {

// Gauss-Jordan on [A + delta I | rhs] with partial pivoting. rhs is overwritten
// with the solution.
void gauss_jordan(ComplexMat a, double delta, ComplexMat& rhs) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw invalid_argument("inverse: matrix must be square");
    if (n == 0) throw invalid_argument("inverse: empty matrix");
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) += delta;
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    }
    const double threshold = std::max(scale, 1e-300) * 1e-14;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(a(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best > threshold)) throw singular_matrix_error("matrix is numerically singular");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
            for (std::size_t c = 0; c < rhs.cols(); ++c) std::swap(rhs(piv, c), rhs(col, c));
        }
        const cd inv_p = 1.0 / a(col, col);
        for (std::size_t c = 0; c < n; ++c) a(col, c) *= inv_p;
        for (std::size_t c = 0; c < rhs.cols(); ++c) rhs(col, c) *= inv_p;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const cd f = a(r, col);
            if (f == cd{}) continue;
            for (std::size_t c = 0; c < n; ++c) a(r, c) -= f * a(col, c);
            for (std::size_t c = 0; c < rhs.cols(); ++c) rhs(r, c) -= f * rhs(col, c);
        }
    }
}

}  // namespace

ComplexMat regularized_inverse(const ComplexMat& a, double delta) {
    if (delta < 0.0) throw invalid_argument("regularized_inverse: negative regularization");
    ComplexMat inv = ComplexMat::identity(a.rows());
    gauss_jordan(a, delta, inv);
    return inv;
}

ComplexVec solve(const ComplexMat& a, std::span<const cd> b, double delta) {
    if (b.size() != a.rows()) throw invalid_argument("solve: dimension mismatch");
    ComplexMat rhs(b.size(), 1);
    for (std::size_t i = 0; i < b.size(); ++i) rhs(i, 0) = b[i];
    gauss_jordan(a, delta, rhs);
    ComplexVec x(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) x[i] = rhs(i, 0);
    return x;
}

void fix_phase(ComplexVec& x) {
    for (const cd& v : x) {
        if (std::abs(v) > 1e-12) {
            const cd rot = std::conj(v) / std::abs(v);
            for (cd& e : x) e *= rot;
            return;
        }
    }
}

EigResult smallest_eigvec(const ComplexMat& a, const EigOptions& opts, std::span<const cd> start) {
    const std::size_t n = a.rows();
    if (a.cols() != n || n == 0) throw invalid_argument("smallest_eigvec: matrix must be square and nonempty");
    double anorm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(a(i, j) - std::conj(a(j, i))) > 1e-10 * std::max(1.0, std::abs(a(i, j))))
                throw invalid_argument("smallest_eigvec: matrix is not Hermitian");
            anorm = std::max(anorm, std::abs(a(i, j)));
        }
    anorm = std::max(anorm * static_cast<double>(n), 1e-300);

    // Gershgorin lower bound keeps A - shift·I positive semidefinite, so the
    // dominant eigenvalue of its inverse belongs to the algebraically smallest
    // eigenvalue of A.
    double lower = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double radius = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) radius += std::abs(a(i, j));
        lower = std::min(lower, a(i, i).real() - radius);
    }
    double shift = std::min(0.0, lower) - 1e-9 * anorm;

    ComplexVec x;
    if (start.size() == n && norm(start) > 0.0) {
        x.assign(start.begin(), start.end());
    } else {
        // Deterministic, generic start vector.
        x.resize(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = cd(1.0 + 0.1 * static_cast<double>(i), 0.05 * static_cast<double>(i));
    }
    x = scaled(x, 1.0 / norm(x));

    auto residual_of = [&](const ComplexVec& v, double& lambda) {
        const ComplexVec av = a * v;
        lambda = dot(v, av).real();
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r += std::norm(av[i] - lambda * v[i]);
        return std::sqrt(r);
    };

    double lambda = 0.0;
    double res = residual_of(x, lambda);
    int it = 0;
    ComplexMat shifted_inv;
    for (;;) {
        if (res <= opts.tolerance * anorm) break;
        if (it >= opts.max_iterations)
            throw convergence_error("smallest_eigvec: inverse iteration did not converge", res);
        if (it == 0) {
            try {
                shifted_inv = regularized_inverse(a, -shift);
            } catch (const singular_matrix_error&) {
                shift -= 1e-6 * anorm;
                shifted_inv = regularized_inverse(a, -shift);
            }
        }
        ComplexVec y = shifted_inv * x;
        const double ny = norm(y);
        if (!(ny > 0.0) || !std::isfinite(ny)) throw convergence_error("smallest_eigvec: iteration collapsed", res);
        x = scaled(y, 1.0 / ny);
        res = residual_of(x, lambda);
        ++it;
    }
    fix_phase(x);
    return {std::move(x), lambda, it};
}

std::vector<IndexCombination> enumerate_combinations(int m, int d) {
    if (m < 1 || d < 1) throw invalid_argument("enumerate_combinations: M and D must be positive");
    if (d > m) throw invalid_argument("enumerate_combinations: D exceeds M");
    std::vector<IndexCombination> out;
    out.reserve(static_cast<std::size_t>(binomial(m, d)));
    IndexCombination c(static_cast<std::size_t>(d));
    std::iota(c.begin(), c.end(), 0);
    for (;;) {
        out.push_back(c);
        int j = d - 1;
        while (j >= 0 && c[static_cast<std::size_t>(j)] == m - d + j) --j;
        if (j < 0) break;
        ++c[static_cast<std::size_t>(j)];
        for (int k = j + 1; k < d; ++k) c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)] + 1;
    }
    return out;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

}  // namespace barc
