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

#include <gtest/gtest.h>

#include <random>

#include "epsense/epsense.hpp"
#include "oracles.hpp"

namespace epsense {
namespace {

SensorModel canonical() { return build_model(SensorParams::exceptional_point()); }

Matrix canonical_m() {
    Matrix m(4, 4);
    m << 0, 1, 1, 0, 1, 0, 0, -1, -1, 0, 0, 1, 0, 1, 1, 0;
    return m;
}

TEST(BuildModel, CanonicalMatrix) { EXPECT_EQ(canonical().M(), canonical_m()); }

TEST(BuildModel, CanonicalIsNilpotent) {
    const Matrix m = canonical().M();
    EXPECT_LE((m * m).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(nilpotency_index(m), 2);
}

TEST(BuildModel, NoiseMatrixSigns) {
    const auto model = canonical();
    Vector diag(4);
    diag << 1.0, -std::sqrt(3.0), 1.0, std::sqrt(3.0);
    EXPECT_LE((model.R() - Matrix(diag.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(model.ancilla_covariance(), Matrix::Identity(4, 4));
    EXPECT_EQ(model.Pi(), Matrix::Identity(4, 4));
}

TEST(BuildModel, DetuningFoldsIntoRates) {
    const auto model = build_model(SensorParams{1.0, 1.0, 1.0, 0.1, 1.0});
    EXPECT_DOUBLE_EQ(model.M()(0, 2), 1.1);
    EXPECT_DOUBLE_EQ(model.M()(1, 3), -0.9);
    EXPECT_NEAR(model.R()(0, 0), std::sqrt(1.2), 1e-15);
    EXPECT_NEAR(model.R()(1, 1), -std::sqrt(2.8), 1e-15);
}

TEST(BuildModel, ZeroCouplingDecouples) {
    const auto model = build_model(SensorParams{0.5, 0.7, 0.0, 0.0, 1.0});
    const Matrix& m = model.M();
    EXPECT_EQ(m(0, 1), 0.0);
    EXPECT_EQ(m(1, 0), 0.0);
    EXPECT_EQ(m(2, 3), 0.0);
    EXPECT_EQ(m(3, 2), 0.0);
    EXPECT_EQ(model.R()(0, 0), 0.0);
}

TEST(BuildModel, NegativeLossRejected) {
    EXPECT_THROW(build_model(SensorParams{0.4, 1.0, 1.0, 0.0, 1.0}), PreconditionError);
}

TEST(BuildModel, CanonicalCompletionMatchesExplicitNoise) {
    const auto model = canonical();
    EXPECT_LE((physical_noise_completion(model.M(), model.Pi()) - model.noise_covariance()).norm(), 1e-12);
}

TEST(ResponseDense, ZeroHamiltonian) {
    const auto model = build_custom_model(Matrix::Zero(4, 4));
    for (double theta : {0.3, -2.0, 7.5}) {
        const auto g = response_dense(model, theta);
        EXPECT_LE((g.G + model.omega() / theta).norm(), 1e-14);
        EXPECT_EQ(g.method, ResponseMethod::dense_solve);
    }
}

TEST(ResponseDense, SingularAtThreshold) {
    try {
        response_dense(canonical(), 0.0);
        FAIL() << "expected SingularResponseError";
    } catch (const SingularResponseError& e) {
        EXPECT_EQ(e.theta(), 0.0);
    }
}

TEST(ResponseExpansion, MatchesDense) {
    const auto model = canonical();
    for (double theta : {1e-3, 1e-2, 1e-1, 0.5, 1.0}) {
        const auto a = response_expansion(model, theta);
        const auto b = response_dense(model, theta);
        EXPECT_EQ(a.method, ResponseMethod::nilpotent_expansion);
        EXPECT_LE(relative_frobenius_error(b.G, a.G), 1e-10) << theta;
    }
}

TEST(ResponseExpansion, UnitTheta) {
    const auto model = canonical();
    const Matrix omega = model.omega();
    EXPECT_LE((response_expansion(model, 1.0).G - (-omega - omega * model.M())).norm(), 1e-14);
}

TEST(ResponseExpansion, LargeEntriesAtSmallTheta) {
    const auto g = response_expansion(canonical(), 1e-3).G;
    EXPECT_GT(g.cwiseAbs().maxCoeff(), 5e5);
    EXPECT_LT(g.cwiseAbs().maxCoeff(), 5e6);
}

TEST(ResponseExpansion, Preconditions) {
    EXPECT_THROW(response_expansion(canonical(), 0.0), DomainError);
    EXPECT_THROW(response_expansion(build_model(SensorParams{1.0, 1.0, 1.0, 0.1, 1.0}), 0.1), PreconditionError);
    EXPECT_THROW(response_expansion(build_model(SensorParams::exceptional_point(), Matrix(Eigen::Vector4d(1, 0, 1, 0).asDiagonal())), 0.1),
                 PreconditionError);
}

TEST(OutputState, LargeThetaIsPassthrough) {
    const auto model = canonical();
    Vector mu(4);
    mu << 1.0, -2.0, 0.5, 3.0;
    const auto out = output_state(model, 1e6, coherent_state(mu, model.layout()));
    EXPECT_LE(relative_error(out.mean(), mu), 1e-4);
    EXPECT_LE(relative_frobenius_error(out.covariance(), Matrix::Identity(4, 4)), 1e-4);
}

TEST(OutputState, VacuumProbeFormula) {
    const auto model = canonical();
    const double theta = 0.2;
    const Matrix g = response_dense(model, theta).G;
    const Matrix id = Matrix::Identity(4, 4);
    const Matrix expected = (id - g) * (id - g).transpose() + g * model.R() * model.R().transpose() * g.transpose();
    const auto out = output_state(model, theta, vacuum_state(model.layout()));
    EXPECT_EQ(out.mean(), Vector::Zero(4));
    EXPECT_LE(relative_frobenius_error(out.covariance(), expected), 1e-12);
}

TEST(OutputState, JordanProbeAmplitude) {
    // With M P = P Lambda the chain top maps to (I - G) mu = mu + Omega P (theta^-2, theta^-1, 0, 0).
    const auto model = canonical();
    const auto dec = jordan_decompose(model.M());
    const double theta = 0.1;
    const Vector mu = dec.P.col(1);
    const Vector coeffs = Eigen::Vector4d(std::pow(theta, -2), 1.0 / theta, 0.0, 0.0);
    const Vector expected = mu + model.omega() * dec.P * coeffs;
    const auto out = output_state(model, theta, coherent_state(mu, model.layout()));
    EXPECT_LE(relative_error(out.mean(), expected), 1e-9);
}

TEST(OutputState, CovarianceIndependentOfMean) {
    const auto model = canonical();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    const Matrix v0 = output_state(model, 0.05, vacuum_state(model.layout())).covariance();
    for (int t = 0; t < 5; ++t) {
        Vector mu(4);
        for (int i = 0; i < 4; ++i) mu(i) = 10 * n(rng);
        const auto out = output_state(model, 0.05, coherent_state(mu, model.layout()));
        EXPECT_EQ(out.covariance(), v0);
    }
}

TEST(OutputState, MeanIsLinear) {
    const auto model = canonical();
    const Vector a = Eigen::Vector4d(1, 2, 3, 4), b = Eigen::Vector4d(-1, 0.5, 0, 2);
    auto mean = [&](const Vector& mu) { return output_state(model, 0.03, coherent_state(mu, model.layout())).mean(); };
    EXPECT_LE(relative_error(mean(2.0 * a - 3.0 * b), 2.0 * mean(a) - 3.0 * mean(b)), 1e-12);
}

TEST(OutputState, Physical) {
    const auto model = canonical();
    for (double theta : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
        const auto rep = physicality_check(output_state(model, theta, vacuum_state(model.layout())));
        EXPECT_TRUE(rep.physical) << theta << " " << rep.normalized_min_eigenvalue;
    }
}

TEST(OutputState, DivergenceOrdering) {
    const auto model = canonical();
    const Vector mu = jordan_decompose(model.M()).chain_top().normalized();
    std::vector<double> th, mean_norm, cov_norm;
    for (double t : ThetaGrid{1e-3, 1e-1, 10}.points()) {
        const auto out = output_state(model, t, coherent_state(mu, model.layout()));
        th.push_back(t);
        mean_norm.push_back(out.mean().norm());
        cov_norm.push_back(out.covariance().norm());
    }
    EXPECT_NEAR(fit_power_law(th, mean_norm).exponent, -2.0, 0.05);
    EXPECT_NEAR(fit_power_law(th, cov_norm).exponent, -4.0, 0.05);
}

TEST(Derivative, ZeroHamiltonian) {
    const auto model = build_custom_model(Matrix::Zero(4, 4));
    const double theta = 0.7;
    const auto g = response_dense(model, theta);
    EXPECT_LE((response_derivative(model, g) - model.omega() / (theta * theta)).norm(), 1e-13);
    const Vector mu = Eigen::Vector4d(1, -1, 2, 0.5);
    EXPECT_LE(relative_error(amplitude_derivative(model, g, mu), -model.omega() * mu / (theta * theta)), 1e-13);
}

TEST(Derivative, JordanProbeClosedForm) {
    const auto model = canonical();
    const auto dec = jordan_decompose(model.M());
    const double theta = 0.1;
    const Vector coeffs = Eigen::Vector4d(2 * std::pow(theta, -3), std::pow(theta, -2), 0, 0);
    const Vector expected = -model.omega() * dec.P * coeffs;
    EXPECT_LE(relative_error(amplitude_derivative(model, theta, dec.P.col(1)), expected), 1e-9);
}

TEST(Derivative, MatchesFiniteDifference) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    const std::vector<SensorModel> models = {canonical(), build_model(SensorParams{1.3, 0.8, 0.6, 0.05, 1.0}),
                                             build_model(SensorParams::exceptional_point(), Matrix(Eigen::Vector4d(1, 0, 1, 0).asDiagonal())),
                                             build_single_mode_model(0.75)};
    for (const auto& model : models) {
        Vector mu(model.dim());
        for (int i = 0; i < mu.size(); ++i) mu(i) = n(rng);
        const double theta = 0.3;
        const Matrix fd = oracle::central_difference(
            [&](double t) { return Matrix(output_state(model, t, coherent_state(mu, model.layout())).mean()); }, theta,
            theta * 1e-6);
        EXPECT_LE(relative_error(amplitude_derivative(model, theta, mu), fd.col(0)), 1e-5);
    }
}

TEST(Derivative, SignIsNegativeOfPrintedForm) {
    const auto model = canonical();
    const double theta = 0.25;
    const auto g = response_dense(model, theta);
    const Matrix fd = oracle::central_difference([&](double t) { return response_dense(model, t).G; }, theta, 1e-6);
    const Matrix printed = g.G * model.Pi() * model.omega() * g.G;
    EXPECT_LE(relative_frobenius_error(fd, -printed), 1e-6);
    EXPECT_GT(relative_frobenius_error(fd, printed), 1.0);
}

TEST(ResponseNorm, SlopeMatchesJordanOrder) {
    const auto model = canonical();
    std::vector<double> th, norm;
    for (double t : ThetaGrid{1e-3, 1e-1, 10}.points()) {
        th.push_back(t);
        norm.push_back(response_dense(model, t).G.norm());
    }
    EXPECT_NEAR(fit_power_law(th, norm).exponent, -jordan_profile(model.M()).n_max, 0.05);
}

}  // namespace
}  // namespace epsense
