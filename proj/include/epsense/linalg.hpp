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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>

namespace epsense {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// 2-norm condition number; +inf for a numerically singular matrix.
inline double condition_number(const Matrix& a) {
    if (a.size() == 0) return 1.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// ||a - a^T||_F / ||a||_F, zero for the zero matrix.
inline double asymmetry(const Matrix& a) {
    const double n = a.norm();
    if (n == 0.0) return 0.0;
    return (a - a.transpose()).norm() / n;
}

/// Principal square root of a symmetric positive semidefinite matrix.
/// Negative eigenvalues from round-off are clipped to zero.
inline Matrix psd_sqrt(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(a));
    Vector w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

/// |iK| for a real antisymmetric K. The result is real, symmetric and PSD.
inline Matrix hermitian_abs_of_i_times(const Matrix& k) {
    const ComplexMatrix h = std::complex<double>(0.0, 1.0) * k.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const Vector w = es.eigenvalues().cwiseAbs();
    const ComplexMatrix out = es.eigenvectors() * w.cast<std::complex<double>>().asDiagonal() *
                              es.eigenvectors().adjoint();
    return symmetrized(out.real());
}

/// Sum of singular values.
inline double trace_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(a).singularValues().sum();
}

inline double relative_frobenius_error(const Matrix& a, const Matrix& reference) {
    const double denom = reference.norm();
    if (denom == 0.0) return a.norm();
    return (a - reference).norm() / denom;
}

inline double relative_error(const Vector& a, const Vector& reference) {
    const double denom = reference.norm();
    if (denom == 0.0) return a.norm();
    return (a - reference).norm() / denom;
}

inline Matrix matrix_power(const Matrix& a, int k) {
    Matrix out = Matrix::Identity(a.rows(), a.cols());
    for (int i = 0; i < k; ++i) out = out * a;
    return out;
}

}  // namespace epsense
