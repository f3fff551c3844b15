#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fex/matrix.hpp"

using namespace fex;

namespace {

DenseMatrix random_nonneg(std::size_t r, std::size_t c, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DenseMatrix m(r, c);
    for (auto& x : m.data) x = u(rng);
    return m;
}

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return e;
}

void check_orthonormal_columns(const DenseMatrix& m) {
    for (std::size_t a = 0; a < m.cols; ++a)
        for (std::size_t b = 0; b < m.cols; ++b) {
            double dot = 0;
            for (std::size_t i = 0; i < m.rows; ++i) dot += m(i, a) * m(i, b);
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-8);
        }
}

}  // namespace

TEST_CASE("singular values agree with a dense reference decomposition") {
    for (unsigned seed : {1u, 7u, 42u}) {
        const DenseMatrix a = random_nonneg(10, 5, seed);
        const SvdResult s = thin_svd(a);
        const Eigen::JacobiSVD<Eigen::MatrixXd> ref(to_eigen(a));
        REQUIRE(s.sigma.size() == 5);
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(s.sigma[i] == doctest::Approx(ref.singularValues()(static_cast<Eigen::Index>(i))).epsilon(1e-10));
    }
}

TEST_CASE("factors are orthonormal and sigma sorted descending") {
    const DenseMatrix a = random_nonneg(12, 7, 3);
    const SvdResult s = thin_svd(a);
    check_orthonormal_columns(s.u);
    check_orthonormal_columns(s.v);
    for (std::size_t i = 0; i < s.sigma.size(); ++i) {
        CHECK(s.sigma[i] > 0);
        if (i) CHECK(s.sigma[i] <= s.sigma[i - 1]);
    }
}

TEST_CASE("full rank reconstructs the matrix") {
    const DenseMatrix a = random_nonneg(6, 9, 11);
    const SvdResult s = thin_svd(a);
    CHECK(reconstruction_error(a, s, s.sigma.size()) <= 1e-9 * frobenius_norm(a));
}

TEST_CASE("reconstruction error is non-increasing in k") {
    const DenseMatrix a = random_nonneg(10, 5, 5);
    const SvdResult s = thin_svd(a);
    double prev = frobenius_norm(a);
    for (std::size_t k = 1; k <= s.sigma.size(); ++k) {
        const double e = reconstruction_error(a, s, k);
        CHECK(e <= prev + 1e-12);
        prev = e;
    }
}

TEST_CASE("rank-1 error of the background TDM equals the second singular value") {
    // Rows time, heals, cures, everything; columns D1, D2.
    DenseMatrix a(4, 2);
    const double vals[4][2] = {{1, 1}, {1, 0}, {0, 1}, {1, 1}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = vals[i][j];
    // A^T A = [[3,2],[2,3]]: eigenvalues 5 and 1 by hand.
    const double s1 = std::sqrt(5.0), s2 = 1.0;
    const SvdResult s = thin_svd(a);
    REQUIRE(s.sigma.size() == 2);
    CHECK(s.sigma[0] == doctest::Approx(s1).epsilon(1e-12));
    CHECK(s.sigma[1] == doctest::Approx(s2).epsilon(1e-12));
    CHECK(reconstruction_error(a, s, 1) == doctest::Approx(s2).epsilon(1e-10));
}

TEST_CASE("rank-deficient input drops null directions") {
    DenseMatrix a(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        a(i, 0) = static_cast<double>(i + 1);
        a(i, 1) = 2.0 * static_cast<double>(i + 1);
        a(i, 2) = 1.0;
    }
    const SvdResult s = thin_svd(a);
    CHECK(s.sigma.size() == 2);
    CHECK(reconstruction_error(a, s, 2) <= 1e-9 * frobenius_norm(a));
}
