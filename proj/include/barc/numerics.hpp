#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace barc {

using cd = std::complex<double>;
using ComplexVec = std::vector<cd>;

// Error taxonomy shared by every module. All derive from std::runtime_error or
// std::invalid_argument so callers can catch broadly.
struct invalid_argument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct singular_matrix_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct convergence_error : std::runtime_error {
    convergence_error(const std::string& what, double residual)
        : std::runtime_error(what), residual(residual) {}
    double residual;
};
struct degenerate_constraint_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense complex matrix, row-major.
class ComplexMat {
public:
    ComplexMat() = default;
    ComplexMat(std::size_t rows, std::size_t cols, cd fill = {})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static ComplexMat identity(std::size_t n, double scale = 1.0);
    static ComplexMat diagonal(std::span<const cd> diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    cd& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const cd& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<cd> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const cd> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<const cd> data() const noexcept { return data_; }

    ComplexMat adjoint() const;
    ComplexMat transpose() const;

    bool operator==(const ComplexMat&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cd> data_;
};

ComplexMat operator*(const ComplexMat& a, const ComplexMat& b);
ComplexMat operator+(const ComplexMat& a, const ComplexMat& b);
ComplexMat operator-(const ComplexMat& a, const ComplexMat& b);
ComplexMat operator*(cd s, const ComplexMat& a);
ComplexVec operator*(const ComplexMat& a, std::span<const cd> x);

// Vector helpers. `dot(a, b)` is a^H b.
cd dot(std::span<const cd> a, std::span<const cd> b);
double norm2(std::span<const cd> x);  // squared Euclidean norm
double norm(std::span<const cd> x);
ComplexVec conj(std::span<const cd> x);
ComplexVec scaled(std::span<const cd> x, cd s);
bool all_finite(std::span<const cd> x);
double frobenius_distance(const ComplexMat& a, const ComplexMat& b);
double max_abs_diff(std::span<const cd> a, std::span<const cd> b);

/// M×I Hankel expansion of x: entry (m, n) = x[m+n] when m+n < M, else 0.
/// Multiplying by conj(v) gives the convolution of x with the length-I filter v.
ComplexMat hankel_expand(std::span<const cd> x, int width);

/// Inverse of (a·A + g·h^H) given A^{-1}, via the gain-vector form of the
/// matrix inversion lemma. Throws singular_matrix_error on a vanishing
/// denominator.
ComplexMat mil_rank1_update(const ComplexMat& a_inv, double a, std::span<const cd> g,
                            std::span<const cd> h);

/// Inverse of (A + delta·I) by Gauss-Jordan elimination with partial pivoting.
ComplexMat regularized_inverse(const ComplexMat& a, double delta = 0.0);

/// Solves (A + delta·I) x = b. Same pivoting and failure mode as regularized_inverse.
ComplexVec solve(const ComplexMat& a, std::span<const cd> b, double delta = 0.0);

struct EigOptions {
    int max_iterations = 2000;
    double tolerance = 1e-11;  // relative residual
};

struct EigResult {
    ComplexVec vector;
    double value = 0.0;
    int iterations = 0;
};

/// Unit-norm eigenvector for the smallest eigenvalue of a Hermitian matrix,
/// via shifted inverse power iteration. The first entry with magnitude above
/// 1e-12 is rotated onto the nonnegative real axis. `start` warm-starts the
/// iteration when non-empty.
EigResult smallest_eigvec(const ComplexMat& a, const EigOptions& opts = {},
                          std::span<const cd> start = {});

/// Rotates x so its first non-negligible entry is real and nonnegative.
void fix_phase(ComplexVec& x);

using IndexCombination = std::vector<int>;

/// Every D-subset of {0..M-1} as strictly increasing index lists, in
/// lexicographic order.
std::vector<IndexCombination> enumerate_combinations(int m, int d);

/// choose(n, k) as a double (exact for the sizes used here).
double binomial(int n, int k);

}  // namespace barc
