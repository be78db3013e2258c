#include <doctest.h>

#include <set>

#include "barc/numerics.hpp"
#include "oracles.hpp"

using namespace barc;

TEST_CASE("hankel_expand small cases") {
    const ComplexVec x{1.0, 2.0, 3.0};
    const ComplexMat h = hankel_expand(x, 2);
    REQUIRE(h.rows() == 3);
    REQUIRE(h.cols() == 2);
    CHECK(h(0, 0) == cd(1.0));
    CHECK(h(0, 1) == cd(2.0));
    CHECK(h(1, 0) == cd(2.0));
    CHECK(h(1, 1) == cd(3.0));
    CHECK(h(2, 0) == cd(3.0));
    CHECK(h(2, 1) == cd(0.0));

    const ComplexMat z = hankel_expand(ComplexVec(5), 3);
    CHECK(z == ComplexMat(5, 3));

    CHECK_THROWS_AS(hankel_expand(x, 0), barc::invalid_argument);
    CHECK_THROWS_AS(hankel_expand(x, -1), barc::invalid_argument);
}

TEST_CASE("hankel_expand times conj(v) is the convolution matrix product") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = static_cast<std::size_t>(rng.uniform_int(1, 16));
        const auto width = static_cast<std::size_t>(rng.uniform_int(1, 5));
        const ComplexVec x = oracle::random_vec(rng, m);
        const ComplexVec v = oracle::random_vec(rng, width);
        const ComplexMat h = hankel_expand(x, static_cast<int>(width));
        const ComplexVec via_hankel = h * std::span<const cd>(oracle::conjugate(v));
        const ComplexVec via_conv = oracle::matvec(oracle::herm(oracle::convolution_matrix(v, m)), x);
        CHECK(oracle::max_abs(via_hankel, via_conv) < 1e-12);
        CHECK(oracle::max_abs(h, oracle::hankel(x, width)) == 0.0);
    }
}

TEST_CASE("mil_rank1_update examples") {
    const ComplexMat id2 = ComplexMat::identity(2);
    const ComplexVec zero(2);
    CHECK(mil_rank1_update(id2, 1.0, zero, zero) == id2);

    const ComplexVec e1{1.0, 0.0, 0.0};
    const ComplexMat r = mil_rank1_update(ComplexMat::identity(3), 1.0, e1, e1);
    CHECK(std::abs(r(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(r(1, 1) - 1.0) < 1e-15);
    CHECK(std::abs(r(2, 2) - 1.0) < 1e-15);
    CHECK(std::abs(r(0, 1)) == 0.0);

    // 1 + h^H A^{-1} g = 0
    const ComplexVec g{-1.0, 0.0};
    const ComplexVec h{1.0, 0.0};
    CHECK_THROWS_AS(mil_rank1_update(id2, 1.0, g, h), singular_matrix_error);
    CHECK_THROWS_AS(mil_rank1_update(id2, 0.0, zero, zero), barc::invalid_argument);
    CHECK_THROWS_AS(mil_rank1_update(id2, 1.5, zero, zero), barc::invalid_argument);
}

TEST_CASE("mil_rank1_update matches a direct inverse") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const ComplexMat a = oracle::random_pd(rng, 4);
        const ComplexVec g = oracle::random_vec(rng, 4);
        const ComplexVec h = oracle::random_vec(rng, 4);
        const double alpha = 0.998;
        ComplexMat target = a;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) target(i, j) = alpha * a(i, j) + g[i] * std::conj(h[j]);
        const ComplexMat got = mil_rank1_update(oracle::inverse(a), alpha, g, h);
        CHECK(frobenius_distance(got, oracle::inverse(target)) < 1e-8);
    }
}

TEST_CASE("mil_rank1_update composed over 200 steps tracks the weighted sum") {
    Rng rng(8);
    for (std::size_t n = 1; n <= 6; ++n) {
        const double alpha = 0.99;
        ComplexMat sum = ComplexMat::identity(n);
        ComplexMat inv = ComplexMat::identity(n);
        for (int t = 0; t < 200; ++t) {
            const ComplexVec x = oracle::random_vec(rng, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) sum(i, j) = alpha * sum(i, j) + x[i] * std::conj(x[j]);
            inv = mil_rank1_update(inv, alpha, x, x);
        }
        CHECK(frobenius_distance(inv, oracle::inverse(sum)) < 1e-6);
    }
}

TEST_CASE("regularized_inverse") {
    CHECK(regularized_inverse(ComplexMat::identity(3), 0.0) == ComplexMat::identity(3));
    const ComplexMat half = regularized_inverse(ComplexMat(2, 2), 0.5);
    CHECK(frobenius_distance(half, ComplexMat::identity(2, 2.0)) < 1e-15);
    CHECK_THROWS_AS(regularized_inverse(ComplexMat(2, 2), 0.0), singular_matrix_error);
    CHECK_THROWS_AS(regularized_inverse(ComplexMat(2, 3), 0.0), barc::invalid_argument);

    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const ComplexMat a = oracle::random_pd(rng, 5);
        const ComplexMat prod = oracle::matmul(a, regularized_inverse(a));
        CHECK(oracle::max_abs(prod, ComplexMat::identity(5)) < 1e-10);
    }

    // solve agrees with the inverse
    const ComplexMat a = oracle::random_pd(rng, 4);
    const ComplexVec b = oracle::random_vec(rng, 4);
    CHECK(oracle::max_abs(solve(a, b, 0.1), regularized_inverse(a, 0.1) * std::span<const cd>(b)) < 1e-12);
}

TEST_CASE("smallest_eigvec examples") {
    const ComplexVec diag{3.0, 1.0, 2.0};
    const EigResult r = smallest_eigvec(ComplexMat::diagonal(diag));
    REQUIRE(r.vector.size() == 3);
    CHECK(std::abs(r.vector[0]) < 1e-10);
    CHECK(std::abs(r.vector[1] - 1.0) < 1e-10);
    CHECK(std::abs(r.vector[2]) < 1e-10);
    CHECK(std::abs(r.value - 1.0) < 1e-10);

    const EigResult id = smallest_eigvec(ComplexMat::identity(4));
    CHECK(std::abs(norm(id.vector) - 1.0) < 1e-12);
    const ComplexVec ax = ComplexMat::identity(4) * std::span<const cd>(id.vector);
    CHECK(std::abs(dot(id.vector, ax).real() - 1.0) < 1e-12);

    ComplexMat not_herm = ComplexMat::identity(2);
    not_herm(0, 1) = 1.0;
    CHECK_THROWS_AS(smallest_eigvec(not_herm), barc::invalid_argument);

    EigOptions tight;
    tight.max_iterations = 1;
    tight.tolerance = 1e-300;
    Rng rng(3);
    CHECK_THROWS_AS(smallest_eigvec(oracle::random_hermitian(rng, 5), tight), convergence_error);
}

TEST_CASE("smallest_eigvec beats random probes and satisfies the eigen equation") {
    Rng rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMat a = oracle::random_hermitian(rng, 5);
        const EigResult r = smallest_eigvec(a);
        CHECK(std::abs(norm(r.vector) - 1.0) < 1e-12);
        const ComplexVec ax = oracle::matvec(a, r.vector);
        const double rq = oracle::inner(r.vector, ax).real();
        double resid = 0.0;
        for (std::size_t i = 0; i < 5; ++i) resid += std::norm(ax[i] - rq * r.vector[i]);
        CHECK(std::sqrt(resid) < 1e-8);
        // deterministic phase: first non-negligible entry real nonnegative
        for (const cd& e : r.vector)
            if (std::abs(e) > 1e-12) {
                CHECK(std::abs(e.imag()) < 1e-12);
                CHECK(e.real() > 0.0);
                break;
            }
        for (int probe = 0; probe < 10000; ++probe) {
            ComplexVec x = oracle::random_vec(rng, 5);
            const double nx = std::sqrt(oracle::inner(x, x).real());
            for (auto& e : x) e /= nx;
            const double q = oracle::inner(x, oracle::matvec(a, x)).real();
            if (q < rq - 1e-9) {
                FAIL("probe beat the smallest eigenvector");
                break;
            }
        }
    }
}

TEST_CASE("enumerate_combinations") {
    const auto c32 = enumerate_combinations(3, 2);
    REQUIRE(c32.size() == 3);
    CHECK(c32[0] == IndexCombination{0, 1});
    CHECK(c32[1] == IndexCombination{0, 2});
    CHECK(c32[2] == IndexCombination{1, 2});
    CHECK(enumerate_combinations(5, 2).size() == 10);
    CHECK_THROWS_AS(enumerate_combinations(3, 4), barc::invalid_argument);
    CHECK_THROWS_AS(enumerate_combinations(3, 0), barc::invalid_argument);

    const auto c84 = enumerate_combinations(8, 4);
    CHECK(c84.size() == 70);
    CHECK(c84 == oracle::combinations(8, 4));
    for (const auto& c : c84)
        for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i - 1] < c[i]);
}

TEST_CASE("enumerate_combinations count property") {
    for (int m = 1; m <= 10; ++m)
        for (int d = 1; d <= m; ++d) {
            const auto all = enumerate_combinations(m, d);
            CHECK(static_cast<double>(all.size()) == binomial(m, d));
            std::set<IndexCombination> unique(all.begin(), all.end());
            CHECK(unique.size() == all.size());
            CHECK(std::is_sorted(all.begin(), all.end()));
            for (const auto& c : all) {
                CHECK(c.front() >= 0);
                CHECK(c.back() < m);
            }
        }
}

TEST_CASE("vector helpers") {
    const ComplexVec a{cd(1, 1), cd(0, 2)};
    const ComplexVec b{cd(2, 0), cd(1, 1)};
    // a^H b = (1-i)*2 + (-2i)(1+i) = 2-2i -2i +2 = 4-4i
    CHECK(std::abs(dot(a, b) - cd(4, -4)) < 1e-15);
    CHECK(norm2(a) == doctest::Approx(6.0));
    CHECK(all_finite(a));
    CHECK_FALSE(all_finite(ComplexVec{cd(std::nan(""), 0)}));
    CHECK_THROWS_AS(dot(a, ComplexVec{1.0}), barc::invalid_argument);
}
