#include <algorithm>
#include <cmath>
#include <numeric>

#include "fex/matrix.hpp"

namespace fex {

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
    return t;
}

double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (double x : a.data) s += x * x;
    return std::sqrt(s);
}

namespace {

// Hestenes one-sided Jacobi for a tall matrix (rows >= cols). Columns of the
// working copy are rotated until mutually orthogonal; the accumulated
// rotations form V.
SvdResult jacobi_tall(const DenseMatrix& a, double relative_tolerance) {
    const std::size_t m = a.rows;
    const std::size_t n = a.cols;
    // Column-major working storage keeps column rotations cache friendly.
    std::vector<std::vector<double>> w(n, std::vector<double>(m));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) w[j][i] = a(i, j);
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

    constexpr double eps = 1e-15;
    constexpr int max_sweeps = 80;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += w[p][i] * w[p][i];
                    beta += w[q][i] * w[q][i];
                    gamma += w[p][i] * w[q][i];
                }
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w[p][i];
                    const double wq = w[q][i];
                    w[p][i] = c * wp - s * wq;
                    w[q][i] = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v[p][i];
                    const double vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (double x : w[j]) s += x * x;
        norms[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    const double sigma_max = n ? norms[order.front()] : 0.0;
    std::size_t k = 0;
    while (k < n && norms[order[k]] > relative_tolerance * sigma_max && norms[order[k]] > 0.0) ++k;

    SvdResult out;
    out.u = DenseMatrix(m, k);
    out.v = DenseMatrix(n, k);
    out.sigma.resize(k);
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t j = order[r];
        const double sigma = norms[j];
        out.sigma[r] = sigma;
        // Sign convention: largest-magnitude entry of u is positive.
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (std::abs(w[j][i]) > best + 1e-12) {
                best = std::abs(w[j][i]);
                arg = i;
            }
        }
        const double sign = w[j][arg] < 0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < m; ++i) out.u(i, r) = sign * w[j][i] / sigma;
        for (std::size_t i = 0; i < n; ++i) out.v(i, r) = sign * v[j][i];
    }
    return out;
}

}  // namespace

SvdResult thin_svd(const DenseMatrix& a, double relative_tolerance) {
    if (a.rows >= a.cols) return jacobi_tall(a, relative_tolerance);
    SvdResult t = jacobi_tall(a.transposed(), relative_tolerance);
    SvdResult out;
    out.sigma = std::move(t.sigma);
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    // Re-apply the sign convention on the new left factor.
    for (std::size_t r = 0; r < out.sigma.size(); ++r) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < out.u.rows; ++i) {
            if (std::abs(out.u(i, r)) > best + 1e-12) {
                best = std::abs(out.u(i, r));
                arg = i;
            }
        }
        if (out.u(arg, r) < 0) {
            for (std::size_t i = 0; i < out.u.rows; ++i) out.u(i, r) = -out.u(i, r);
            for (std::size_t i = 0; i < out.v.rows; ++i) out.v(i, r) = -out.v(i, r);
        }
    }
    return out;
}

double reconstruction_error(const DenseMatrix& a, const SvdResult& svd, std::size_t k) {
    k = std::min(k, svd.sigma.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            double approx = 0.0;
            for (std::size_t r = 0; r < k; ++r) approx += svd.u(i, r) * svd.sigma[r] * svd.v(j, r);
            const double d = a(i, j) - approx;
            s += d * d;
        }
    }
    return std::sqrt(s);
}

}  // namespace fex
