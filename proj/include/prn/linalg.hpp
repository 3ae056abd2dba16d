#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace prn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SpectralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Estimate the dominant |eigenvalue| from the last k+1 power iterates by a
// companion (Krylov) fit: solve v_t ~ c_1 v_{t-1} + ... + c_k v_{t-k} in
// least squares and take the largest-modulus root of
// lambda^k = c_1 lambda^{k-1} + ... + c_k. A plain Rayleigh quotient (k = 1)
// fails on complex conjugate pairs, and a quadratic fit (k = 2) stalls when
// three or more eigenvalue moduli are (nearly) tied; degree k resolves up to
// k dominant eigenvalues at once.
//
// `iterates` holds unit vectors u_0..u_k, `norms` the growth factors with
// norms[j] = |M u_j| (so M u_j = norms[j] * u_{j+1}).
inline double dominant_modulus_from_window(const std::deque<Vector>& iterates,
                                           const std::deque<double>& norms) {
    const auto k = static_cast<Eigen::Index>(iterates.size()) - 1;
    const auto n = iterates.back().size();
    // Rebuild a consistent unnormalized sequence with the newest iterate at
    // scale 1: v_{k-j} = u_{k-j} / (norms[k-j] * ... * norms[k-1]).
    Matrix a(n, k);
    double scale = 1.0;
    for (Eigen::Index j = 1; j <= k; ++j) {
        scale /= norms[static_cast<std::size_t>(k - j)];
        a.col(j - 1) = iterates[static_cast<std::size_t>(k - j)] * scale;
    }
    const Vector c = a.colPivHouseholderQr().solve(iterates.back());

    if (k == 1) return std::abs(c(0));
    Matrix companion = Matrix::Zero(k, k);
    companion.row(0) = c.transpose();
    companion.block(1, 0, k - 1, k - 1).setIdentity();
    const Eigen::EigenSolver<Matrix> roots(companion, false);
    return roots.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace detail

/// Spectral radius (max eigenvalue modulus) of a square real matrix by power
/// iteration with a companion-polynomial estimate over the trailing Krylov
/// window, robust to complex pairs and near-tied dominant moduli.
inline double spectral_radius(const Matrix& m, double tol = 1e-13,
                              int max_iters = 200000) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("spectral_radius: matrix must be square");
    if (!m.allFinite())
        throw std::invalid_argument("spectral_radius: non-finite entries");
    const Eigen::Index n = m.rows();
    if (n == 1) return std::abs(m(0, 0));
    const std::size_t k = static_cast<std::size_t>(std::min<Eigen::Index>(6, n));

    // Deterministic start vector with incommensurate components so it is not
    // orthogonal to the dominant eigenspace for generic matrices.
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = std::cos(1.0 + 0.7 * static_cast<double>(i));
    v.normalize();

    std::deque<Vector> iterates{v};
    std::deque<double> norms;
    double prev = -1.0;
    for (int it = 1; it <= max_iters; ++it) {
        Vector next = m * iterates.back();
        const double norm = next.norm();
        if (norm <= 1e-150) return 0.0; // Krylov sequence collapsed
        norms.push_back(norm);
        iterates.push_back(next / norm);
        if (iterates.size() > k + 1) {
            iterates.pop_front();
            norms.pop_front();
        }
        if (iterates.size() < k + 1) continue; // warm-up
        const double est = detail::dominant_modulus_from_window(iterates, norms);
        if (prev >= 0.0 && std::abs(est - prev) <= tol * std::max(1.0, est))
            return est;
        prev = est;
    }
    throw SpectralError("spectral_radius: power iteration did not converge");
}

} // namespace prn
