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

#include <cmath>
#include <limits>
#include <optional>

#include "epsense/errors.hpp"
#include "epsense/gaussian.hpp"
#include "epsense/linalg.hpp"
#include "epsense/sensor.hpp"

namespace epsense {

/// Guard on the square-root factor of the covariance; the covariance itself may
/// reach the square of this.
inline constexpr double kFactorConditionLimit = 1e14;
inline constexpr double kFactorConditionWarning = 1e7;

struct QuadraticFormResult {
    double value = 0.0;
    double factor_condition = 1.0;
    bool ill_conditioned_warning = false;
};

/// v^T (B B^T)^{-1} v through a QR factorization of B^T, so the condition number
/// is never squared.
inline QuadraticFormResult inverse_quadratic_form(const Matrix& factor, const Vector& v) {
    const int n = static_cast<int>(factor.rows());
    if (v.size() != n) throw DimensionError("vector does not match covariance factor");
    if (factor.cols() < n) throw IllConditionedCovarianceError("covariance factor is rank deficient");
    Eigen::HouseholderQR<Matrix> qr(factor.transpose());
    const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    QuadraticFormResult out;
    out.factor_condition = condition_number(r);
    if (!(out.factor_condition < kFactorConditionLimit))
        throw IllConditionedCovarianceError("factor condition number " + std::to_string(out.factor_condition));
    out.ill_conditioned_warning = out.factor_condition > kFactorConditionWarning;
    const Vector z = r.transpose().triangularView<Eigen::Lower>().solve(v);
    out.value = z.squaredNorm();
    return out;
}

/// Per-theta sensitivity figures. I1 is the mean-vector part of the Gaussian quantum
/// Fisher information; the covariance-only part is non-negative, so
/// delta_theta_cr = I1^{-1/2} is an I1-based lower bound on any estimator.
struct SensitivityReport {
    double theta = 0.0;
    double I1 = 0.0;
    double delta_theta_cr = std::numeric_limits<double>::infinity();
    double delta_theta_het = std::numeric_limits<double>::infinity();
    std::optional<double> upper_bound_I;
    bool ill_conditioned_warning = false;
    /// Normalized smallest eigenvalue of V_out + i Omega (see physicality_check).
    double physicality_margin = 0.0;
};

/// delta theta >= I^{-1/2}.
inline double cramer_rao(double i1) {
    if (!(i1 > 0.0) || !std::isfinite(i1)) throw DomainError("Cramer-Rao bound needs positive finite information");
    return 1.0 / std::sqrt(i1);
}

namespace detail {

struct ProbeEvaluation {
    GaussianState out;
    Vector dmu;
};

inline ProbeEvaluation evaluate_probe(const SensorModel& model, const ResponseMatrix& response, const Vector& mu_in) {
    if (mu_in.size() != model.dim()) throw DimensionError("probe amplitude does not match the sensor");
    return {propagate(model, response, coherent_state(mu_in, model.layout())),
            amplitude_derivative(model, response, mu_in)};
}

inline double uncertainty_from_information(double info) {
    if (info == 0.0) return std::numeric_limits<double>::infinity();
    return cramer_rao(info);
}

}  // namespace detail

/// I1 = (d mu_out/d theta)^T V_out^{-1} (d mu_out/d theta) for a coherent probe.
inline double fisher_I1(const SensorModel& model, const ResponseMatrix& response, const Vector& mu_in) {
    const auto ev = detail::evaluate_probe(model, response, mu_in);
    return inverse_quadratic_form(*ev.out.covariance_factor(), ev.dmu).value;
}

inline double fisher_I1(const SensorModel& model, double theta, const Vector& mu_in) {
    return fisher_I1(model, response_dense(model, theta), mu_in);
}

/// Heterodyne detection sees V_out + I. Returns +inf when the signal does not
/// depend on theta.
inline double heterodyne_uncertainty(const SensorModel& model, const ResponseMatrix& response, const Vector& mu_in) {
    const auto ev = detail::evaluate_probe(model, response, mu_in);
    const Matrix& b = *ev.out.covariance_factor();
    const int d = model.dim();
    Matrix het(d, b.cols() + d);
    het << b, Matrix::Identity(d, d);
    return detail::uncertainty_from_information(inverse_quadratic_form(het, ev.dmu).value);
}

inline double heterodyne_uncertainty(const SensorModel& model, double theta, const Vector& mu_in) {
    return heterodyne_uncertainty(model, response_dense(model, theta), mu_in);
}

/// ||G_{theta=0}||_tr^2. Below threshold this bounds the Fisher information; at
/// threshold G_0 does not exist and a SingularResponseError is raised.
inline double fisher_upper_bound(const SensorModel& model) {
    const double tn = trace_norm(response_dense(model, 0.0).G);
    return tn * tn;
}

/// Everything at one theta from a single dense response.
inline SensitivityReport sensitivity(const SensorModel& model, double theta, const Vector& mu_in) {
    const ResponseMatrix response = response_dense(model, theta);
    const auto ev = detail::evaluate_probe(model, response, mu_in);
    const Matrix& b = *ev.out.covariance_factor();
    const int d = model.dim();

    SensitivityReport rep;
    rep.theta = theta;
    const auto cr = inverse_quadratic_form(b, ev.dmu);
    rep.I1 = cr.value;
    rep.ill_conditioned_warning = cr.ill_conditioned_warning;
    rep.delta_theta_cr = cramer_rao(rep.I1);

    Matrix het(d, b.cols() + d);
    het << b, Matrix::Identity(d, d);
    rep.delta_theta_het = detail::uncertainty_from_information(inverse_quadratic_form(het, ev.dmu).value);
    rep.physicality_margin = physicality_check(ev.out).normalized_min_eigenvalue;
    if (model.detuning() > 0.0) rep.upper_bound_I = fisher_upper_bound(model);
    return rep;
}

}  // namespace epsense
