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
#include <optional>
#include <string>

#include "epsense/errors.hpp"
#include "epsense/gaussian.hpp"
#include "epsense/linalg.hpp"

namespace epsense {

/// Dimensionless parameters of the two-cavity gain/loss sensor, all in units of the
/// probe coupling kappa. The detuning adds loss to both cavities:
/// Gamma1 -> Gamma1 + detuning and Gamma2 -> Gamma2 - detuning.
struct SensorParams {
    double gamma1 = 1.0;    // total loss rate of mode 1, gamma_1 / (2 kappa)
    double gamma2 = 1.0;    // total gain rate of mode 2, gamma_2 / (2 kappa)
    double coupling = 1.0;  // g / kappa
    double detuning = 0.0;  // added loss per cavity, pushes the sensor below threshold
    double kappa = 1.0;     // only for reporting in physical units

    double effective_gamma1() const noexcept { return gamma1 + detuning; }
    double effective_gamma2() const noexcept { return gamma2 - detuning; }
    /// eta_1 / kappa.
    double loss_rate() const noexcept { return 2.0 * effective_gamma1() - 1.0; }
    /// eta_2 / kappa.
    double gain_rate() const noexcept { return 2.0 * effective_gamma2() + 1.0; }

    /// Gamma1 = Gamma2 = G, zero detuning.
    static SensorParams exceptional_point(double rate = 1.0) { return {rate, rate, rate, 0.0, 1.0}; }
};

inline void validate(const SensorParams& p) {
    if (!(p.kappa > 0.0)) throw PreconditionError("kappa must be positive");
    if (!(p.detuning >= 0.0)) throw PreconditionError("detuning must be non-negative");
    if (p.loss_rate() < 0.0)
        throw PreconditionError("negative loss rate: Gamma1 + detuning = " + std::to_string(p.effective_gamma1()) +
                                " is below 1/2");
    if (!(p.gain_rate() > 0.0)) throw PreconditionError("gain channel rate must be positive");
}

enum class ModelKind { two_mode, single_mode, custom };

/// Linear sensor in quadrature space. Immutable once built.
///
///   effective Hamiltonian   M          (dim x dim)
///   perturbation direction  Pi         (defaults to identity)
///   ancilla coupling        R          (dim x dim)
///   ancilla covariance      V'_in      (vacuum = identity)
///
/// The time-domain drift with time in units of 1/kappa is (M - theta Pi) Omega.
class SensorModel {
   public:
    SensorModel(ModelKind kind, QuadratureLayout layout, Matrix m, Matrix pi, Matrix r, Matrix ancilla_cov,
                std::optional<SensorParams> params)
        : kind_(kind),
          layout_(layout),
          m_(std::move(m)),
          pi_(std::move(pi)),
          r_(std::move(r)),
          ancilla_cov_(std::move(ancilla_cov)),
          params_(params) {
        const int d = layout_.dim();
        auto square = [d](const Matrix& a, const char* what) {
            if (a.rows() != d || a.cols() != d)
                throw DimensionError(std::string(what) + " must be " + std::to_string(d) + "x" + std::to_string(d));
        };
        square(m_, "M");
        square(pi_, "Pi");
        square(ancilla_cov_, "ancilla covariance");
        if (r_.rows() != d) throw DimensionError("R must have " + std::to_string(d) + " rows");
        if (r_.cols() != ancilla_cov_.rows()) throw DimensionError("R columns must match ancilla covariance");
    }

    ModelKind kind() const noexcept { return kind_; }
    const QuadratureLayout& layout() const noexcept { return layout_; }
    int dim() const noexcept { return layout_.dim(); }
    const Matrix& M() const noexcept { return m_; }
    const Matrix& Pi() const noexcept { return pi_; }
    const Matrix& R() const noexcept { return r_; }
    const Matrix& ancilla_covariance() const noexcept { return ancilla_cov_; }
    const std::optional<SensorParams>& params() const noexcept { return params_; }
    double detuning() const noexcept { return params_ ? params_->detuning : 0.0; }

    Matrix omega() const { return symplectic_form(layout_); }
    Matrix drift(double theta) const { return (m_ - theta * pi_) * omega(); }
    /// R V'_in R^T.
    Matrix noise_covariance() const { return r_ * ancilla_cov_ * r_.transpose(); }
    bool pi_is_identity() const { return (pi_ - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff() == 0.0; }

   private:
    ModelKind kind_;
    QuadratureLayout layout_;
    Matrix m_;
    Matrix pi_;
    Matrix r_;
    Matrix ancilla_cov_;
    std::optional<SensorParams> params_;
};

/// Two coupled cavities, mode 1 lossy and mode 2 amplifying.
inline SensorModel build_model(const SensorParams& params, std::optional<Matrix> pi = std::nullopt) {
    validate(params);
    const double g1 = params.effective_gamma1();
    const double g2 = params.effective_gamma2();
    const double g = params.coupling;
    Matrix m(4, 4);
    // clang-format off
    m <<  0.0,   g,  g1, 0.0,
            g, 0.0, 0.0, -g2,
          -g1, 0.0, 0.0,   g,
          0.0,  g2,   g, 0.0;
    // clang-format on
    const double s1 = std::sqrt(params.loss_rate());
    const double s2 = std::sqrt(params.gain_rate());
    Vector rdiag(4);
    rdiag << s1, -s2, s1, s2;
    Matrix r = rdiag.asDiagonal();
    Matrix p = pi ? std::move(*pi) : Matrix::Identity(4, 4);
    return SensorModel(ModelKind::two_mode, QuadratureLayout(2), std::move(m), std::move(p), std::move(r),
                       Matrix::Identity(4, 4), params);
}

/// One cavity with probe coupling and intrinsic loss only.
/// Gamma1 = 1/2 is a lossless cavity seen only through its probe port.
inline SensorModel build_single_mode_model(double gamma1, double detuning = 0.0) {
    SensorParams params{gamma1, 0.0, 0.0, detuning, 1.0};
    if (!(detuning >= 0.0)) throw PreconditionError("detuning must be non-negative");
    if (params.loss_rate() < 0.0)
        throw PreconditionError("negative loss rate: Gamma1 = " + std::to_string(params.effective_gamma1()) +
                                " is below 1/2");
    const double g1 = params.effective_gamma1();
    Matrix m(2, 2);
    m << 0.0, g1, -g1, 0.0;
    Matrix r = std::sqrt(params.loss_rate()) * Matrix::Identity(2, 2);
    return SensorModel(ModelKind::single_mode, QuadratureLayout(1), std::move(m), Matrix::Identity(2, 2),
                       std::move(r), Matrix::Identity(2, 2), params);
}

/// Smallest ancilla noise R V'_in R^T that keeps the output of (M, Pi) physical for
/// every theta: |i(M - M^T - Omega)|. Requires symmetric Pi, otherwise the bound
/// would depend on theta.
inline Matrix physical_noise_completion(const Matrix& m, const Matrix& pi) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0) throw DimensionError("M must be square with even dimension");
    if (asymmetry(pi) > kSymmetryTolerance) throw PreconditionError("noise completion needs a symmetric Pi");
    const QuadratureLayout layout(static_cast<int>(m.rows() / 2));
    const Matrix k = m - m.transpose() - symplectic_form(layout);
    return hermitian_abs_of_i_times(k);
}

/// Arbitrary effective Hamiltonian (e.g. a synthesized higher-order EP). Without an
/// explicit noise covariance the minimal physical completion is used.
inline SensorModel build_custom_model(Matrix m, std::optional<Matrix> pi = std::nullopt,
                                      std::optional<Matrix> noise_cov = std::nullopt) {
    if (m.rows() != m.cols()) throw DimensionError("M must be square");
    if (m.rows() < 2 || m.rows() % 2 != 0) throw DimensionError("M must have even dimension");
    const int d = static_cast<int>(m.rows());
    Matrix p = pi ? std::move(*pi) : Matrix::Identity(d, d);
    Matrix noise = noise_cov ? std::move(*noise_cov) : physical_noise_completion(m, p);
    if (noise.rows() != d || noise.cols() != d) throw DimensionError("noise covariance must match M");
    Matrix r = psd_sqrt(noise);
    return SensorModel(ModelKind::custom, QuadratureLayout(d / 2), std::move(m), std::move(p), std::move(r),
                       Matrix::Identity(d, d), std::nullopt);
}

enum class ResponseMethod { dense_solve, nilpotent_expansion };

/// G_theta = -Omega (theta Pi - M)^{-1}.
struct ResponseMatrix {
    double theta = 0.0;
    Matrix G;
    ResponseMethod method = ResponseMethod::dense_solve;
};

inline constexpr double kDenseConditionLimit = 1e14;
inline constexpr double kNilpotencyTolerance = 1e-12;

/// Smallest k with ||M^k|| <= tol ||M||^k, or 0 if M is not nilpotent.
inline int nilpotency_index(const Matrix& m, double tol = kNilpotencyTolerance) {
    const double scale = m.norm();
    if (scale == 0.0) return 1;
    Matrix power = m;
    for (int k = 1; k <= m.rows(); ++k) {
        if (power.norm() <= tol * std::pow(scale, k)) return k;
        power = power * m;
    }
    return 0;
}

inline ResponseMatrix response_dense(const SensorModel& model, double theta) {
    const int d = model.dim();
    const Matrix x = theta * model.Pi() - model.M();
    const double cond = condition_number(x);
    if (!(cond < kDenseConditionLimit)) throw SingularResponseError(theta, cond);
    Eigen::FullPivLU<Matrix> lu(x);
    Matrix inv = lu.inverse();
    // One step of refinement with the residual formed in extended precision.
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const LMatrix residual = LMatrix::Identity(d, d) - x.cast<long double>() * inv.cast<long double>();
    inv += inv * residual.cast<double>();
    return {theta, -model.omega() * inv, ResponseMethod::dense_solve};
}

/// Finite Taylor series of the response for nilpotent M and Pi = I:
/// G_theta = -sum_{n<k} theta^{-(n+1)} Omega M^n.
inline ResponseMatrix response_expansion(const SensorModel& model, double theta) {
    if (!model.pi_is_identity()) throw PreconditionError("nilpotent expansion requires Pi = I");
    const int k = nilpotency_index(model.M());
    if (k == 0) throw PreconditionError("M is not nilpotent");
    if (theta == 0.0) throw DomainError("nilpotent expansion is undefined at theta = 0");
    const Matrix omega = model.omega();
    Matrix term = omega;
    Matrix g = Matrix::Zero(model.dim(), model.dim());
    double scale = 1.0 / theta;
    for (int n = 0; n < k; ++n) {
        g -= scale * term;
        term = term * model.M();
        scale /= theta;
    }
    return {theta, std::move(g), ResponseMethod::nilpotent_expansion};
}

/// Output state for an arbitrary Gaussian probe:
///   mu_out = (I - G) mu_in
///   V_out  = (I - G) V_in (I - G)^T + G R V'_in R^T G^T
/// The returned state carries the factor [(I - G) L_in, G R L'] of V_out.
inline GaussianState propagate(const SensorModel& model, const ResponseMatrix& response, const GaussianState& probe) {
    if (!(probe.layout() == model.layout())) throw DimensionError("probe layout does not match the sensor");
    const int d = model.dim();
    const Matrix t = Matrix::Identity(d, d) - response.G;
    const Matrix l_in = probe.covariance_factor() ? *probe.covariance_factor() : psd_sqrt(probe.covariance());
    const Matrix l_anc = response.G * model.R() * psd_sqrt(model.ancilla_covariance());
    Matrix factor(d, l_in.cols() + l_anc.cols());
    factor << t * l_in, l_anc;
    return make_gaussian_state_from_factor(t * probe.mean(), std::move(factor), model.layout());
}

inline GaussianState output_state(const SensorModel& model, double theta, const GaussianState& probe) {
    return propagate(model, response_dense(model, theta), probe);
}

/// dG/dtheta = s * G Pi Omega G. Differentiating G = -Omega X^{-1} with
/// X = theta Pi - M and Omega^{-1} = -Omega gives s = -1; the finite-difference
/// tests pin this.
inline constexpr double kResponseDerivativeSign = -1.0;

inline Matrix response_derivative(const SensorModel& model, const ResponseMatrix& response) {
    return kResponseDerivativeSign * response.G * model.Pi() * model.omega() * response.G;
}

/// d mu_out / d theta = -(dG/dtheta) mu_in.
inline Vector amplitude_derivative(const SensorModel& model, const ResponseMatrix& response, const Vector& mu_in) {
    if (mu_in.size() != model.dim()) throw DimensionError("probe amplitude does not match the sensor");
    return -(response_derivative(model, response) * mu_in);
}

inline Vector amplitude_derivative(const SensorModel& model, double theta, const Vector& mu_in) {
    return amplitude_derivative(model, response_dense(model, theta), mu_in);
}

}  // namespace epsense
