#pragma once

#include <cstddef>
#include <vector>

namespace fex {

/// Row-major dense matrix of doubles.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    DenseMatrix transposed() const;
    bool operator==(const DenseMatrix&) const = default;
};

struct SvdResult {
    DenseMatrix u;               // rows x k, orthonormal columns
    std::vector<double> sigma;   // k values, non-increasing, > 0
    DenseMatrix v;               // cols x k, orthonormal columns
};

/// Thin SVD by one-sided Jacobi rotations. Singular values below
/// `relative_tolerance * sigma_max` are dropped, so k is the numerical rank.
/// Singular vectors are sign-normalized: the largest-magnitude entry of each
/// left singular vector is positive.
SvdResult thin_svd(const DenseMatrix& a, double relative_tolerance = 1e-12);

/// Frobenius norm of a - u * diag(sigma) * v^T using the first k triplets.
double reconstruction_error(const DenseMatrix& a, const SvdResult& svd, std::size_t k);

double frobenius_norm(const DenseMatrix& a);

}  // namespace fex
