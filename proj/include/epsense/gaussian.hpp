// Copyright 2026 The epsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>

#include "epsense/errors.hpp"
#include "epsense/linalg.hpp"

namespace epsense {

/// Quadrature ordering (q_1, ..., q_N, p_1, ..., p_N) with q = a + a^dagger and
/// p = -i (a - a^dagger). Under this convention the vacuum covariance is the identity.
class QuadratureLayout {
   public:
    explicit QuadratureLayout(int n_modes) : n_modes_(n_modes) {
        if (n_modes < 1) throw PreconditionError("layout needs at least one mode");
    }
    int n_modes() const noexcept { return n_modes_; }
    int dim() const noexcept { return 2 * n_modes_; }
    int q_index(int mode) const noexcept { return mode; }
    int p_index(int mode) const noexcept { return n_modes_ + mode; }

    friend bool operator==(const QuadratureLayout&, const QuadratureLayout&) = default;

   private:
    int n_modes_;
};

/// Block matrix [[0, I], [-I, 0]].
inline Matrix symplectic_form(const QuadratureLayout& layout) {
    const int n = layout.n_modes();
    Matrix omega = Matrix::Zero(2 * n, 2 * n);
    omega.topRightCorner(n, n).setIdentity();
    omega.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
    return omega;
}

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kPhysicalityTolerance = 1e-9;

/// Amplitude vector and covariance matrix of a Gaussian state.
///
/// States produced by linear propagation also carry a square-root factor B
/// with V = B B^T. Near an exceptional point V spans many orders of magnitude
/// and the factor keeps its small eigen-directions accurate.
class GaussianState {
   public:
    const QuadratureLayout& layout() const noexcept { return layout_; }
    const Vector& mean() const noexcept { return mu_; }
    const Matrix& covariance() const noexcept { return cov_; }
    const std::optional<Matrix>& covariance_factor() const noexcept { return factor_; }

   private:
    GaussianState(QuadratureLayout layout, Vector mu, Matrix cov, std::optional<Matrix> factor)
        : layout_(layout), mu_(std::move(mu)), cov_(std::move(cov)), factor_(std::move(factor)) {}

    friend GaussianState make_gaussian_state(Vector, Matrix, QuadratureLayout);
    friend GaussianState make_gaussian_state_from_factor(Vector, Matrix, QuadratureLayout);

    QuadratureLayout layout_;
    Vector mu_;
    Matrix cov_;
    std::optional<Matrix> factor_;
};

inline void check_state_dims(const Vector& mu, const Matrix& cov, const QuadratureLayout& layout) {
    const int d = layout.dim();
    if (mu.size() != d)
        throw DimensionError("mean has length " + std::to_string(mu.size()) + ", layout expects " +
                             std::to_string(d));
    if (cov.rows() != d || cov.cols() != d)
        throw DimensionError("covariance is " + std::to_string(cov.rows()) + "x" +
                             std::to_string(cov.cols()) + ", layout expects " + std::to_string(d) +
                             "x" + std::to_string(d));
}

/// Validates dimensions and symmetry, then projects V onto its symmetric part.
inline GaussianState make_gaussian_state(Vector mu, Matrix cov, QuadratureLayout layout) {
    check_state_dims(mu, cov, layout);
    if (!cov.allFinite()) throw MalformedStateError("covariance has non-finite entries");
    const double asym = asymmetry(cov);
    if (asym > kSymmetryTolerance)
        throw MalformedStateError("covariance asymmetry " + std::to_string(asym) + " exceeds tolerance");
    return GaussianState(layout, std::move(mu), symmetrized(cov), std::nullopt);
}

inline GaussianState make_gaussian_state_from_factor(Vector mu, Matrix factor, QuadratureLayout layout) {
    if (factor.rows() != layout.dim())
        throw DimensionError("covariance factor has " + std::to_string(factor.rows()) + " rows, layout expects " +
                             std::to_string(layout.dim()));
    Matrix cov = symmetrized(factor * factor.transpose());
    check_state_dims(mu, cov, layout);
    return GaussianState(layout, std::move(mu), std::move(cov), std::move(factor));
}

inline GaussianState vacuum_state(const QuadratureLayout& layout) {
    return make_gaussian_state_from_factor(Vector::Zero(layout.dim()), Matrix::Identity(layout.dim(), layout.dim()),
                                           layout);
}

inline GaussianState coherent_state(const Vector& mu, const QuadratureLayout& layout) {
    return make_gaussian_state_from_factor(mu, Matrix::Identity(layout.dim(), layout.dim()), layout);
}

struct PhysicalityReport {
    bool physical = false;
    /// Smallest eigenvalue of the Hermitian matrix V + i Omega.
    double min_eigenvalue = 0.0;
    /// Smallest eigenvalue of L^{-1} (V + i Omega) L^{-T} with V = L L^T. Same sign
    /// pattern as min_eigenvalue (congruence), but scale-free: 1 - 1/nu_min where
    /// nu_min is the smallest symplectic eigenvalue.
    double normalized_min_eigenvalue = 0.0;
};

namespace detail {

inline double raw_min_eigenvalue(const Matrix& cov, const Matrix& omega) {
    const ComplexMatrix h = cov.cast<std::complex<double>>() + std::complex<double>(0.0, 1.0) * omega.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// With V = R^T R, the spectrum of I + i R^{-T} Omega R^{-1} is 1 +- sigma_k.
inline double normalized_from_upper(const Matrix& r, const Matrix& omega) {
    const int n = static_cast<int>(r.rows());
    for (int i = 0; i < n; ++i)
        if (r(i, i) == 0.0) return -std::numeric_limits<double>::infinity();
    const Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n));
    const Matrix k = r_inv.transpose() * omega * r_inv;
    return 1.0 - Eigen::JacobiSVD<Matrix>(k).singularValues()(0);
}

// Upper-triangular R with R^T R = B B^T, via a QR factorization of B^T.
inline std::optional<Matrix> upper_factor_from(const Matrix& factor) {
    const int n = static_cast<int>(factor.rows());
    if (factor.cols() < n) return std::nullopt;
    Eigen::HouseholderQR<Matrix> qr(factor.transpose());
    return Matrix(qr.matrixQR().topRows(n).triangularView<Eigen::Upper>());
}

}  // namespace detail

/// Raw-matrix variant. Rejects asymmetric covariances.
inline PhysicalityReport physicality_check(const Matrix& cov, const QuadratureLayout& layout,
                                           double tol = kPhysicalityTolerance) {
    if (cov.rows() != layout.dim() || cov.cols() != layout.dim())
        throw DimensionError("covariance does not match layout");
    if (asymmetry(cov) > kSymmetryTolerance) throw MalformedStateError("covariance is not symmetric");
    const Matrix omega = symplectic_form(layout);
    PhysicalityReport rep;
    rep.min_eigenvalue = detail::raw_min_eigenvalue(symmetrized(cov), omega);
    Eigen::LLT<Matrix> llt(symmetrized(cov));
    if (llt.info() != Eigen::Success) {
        rep.normalized_min_eigenvalue = std::min(rep.min_eigenvalue, -1.0);
    } else {
        rep.normalized_min_eigenvalue =
            detail::normalized_from_upper(llt.matrixL().transpose(), omega);
    }
    rep.physical = rep.normalized_min_eigenvalue >= -tol;
    return rep;
}

/// True iff V + i Omega is positive semidefinite within tol. The decision is made
/// on the scale-free normalized spectrum, computed from the square-root factor
/// when the state carries one.
inline PhysicalityReport physicality_check(const GaussianState& state, double tol = kPhysicalityTolerance) {
    if (!state.covariance_factor()) return physicality_check(state.covariance(), state.layout(), tol);
    const Matrix omega = symplectic_form(state.layout());
    PhysicalityReport rep;
    rep.min_eigenvalue = detail::raw_min_eigenvalue(state.covariance(), omega);
    const auto r = detail::upper_factor_from(*state.covariance_factor());
    rep.normalized_min_eigenvalue =
        r ? detail::normalized_from_upper(*r, omega) : -std::numeric_limits<double>::infinity();
    rep.physical = rep.normalized_min_eigenvalue >= -tol;
    return rep;
}

}  // namespace epsense
