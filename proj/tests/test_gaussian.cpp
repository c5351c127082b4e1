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

#include "epsense/epsense.hpp"

namespace epsense {
namespace {

TEST(SymplecticForm, SingleMode) {
    Matrix expected(2, 2);
    expected << 0, 1, -1, 0;
    EXPECT_EQ(symplectic_form(QuadratureLayout(1)), expected);
}

TEST(SymplecticForm, TwoModesHasIdentityBlocks) {
    const Matrix omega = symplectic_form(QuadratureLayout(2));
    EXPECT_EQ(Matrix(omega.topRightCorner(2, 2)), Matrix::Identity(2, 2));
    EXPECT_EQ(Matrix(omega.bottomLeftCorner(2, 2)), -Matrix::Identity(2, 2));
    EXPECT_EQ(omega.topLeftCorner(2, 2).cwiseAbs().sum(), 0.0);
    EXPECT_EQ(omega.bottomRightCorner(2, 2).cwiseAbs().sum(), 0.0);
}

TEST(SymplecticForm, SquaresToMinusIdentity) {
    for (int n = 1; n <= 5; ++n) {
        const Matrix omega = symplectic_form(QuadratureLayout(n));
        EXPECT_EQ(omega * omega, -Matrix::Identity(2 * n, 2 * n));
        EXPECT_EQ(Matrix(omega.transpose()), -omega);
    }
}

TEST(QuadratureLayout, Ordering) {
    const QuadratureLayout l(3);
    EXPECT_EQ(l.dim(), 6);
    EXPECT_EQ(l.q_index(2), 2);
    EXPECT_EQ(l.p_index(0), 3);
    EXPECT_THROW(QuadratureLayout(0), PreconditionError);
}

TEST(Physicality, VacuumSaturates) {
    const auto rep = physicality_check(vacuum_state(QuadratureLayout(2)));
    EXPECT_TRUE(rep.physical);
    EXPECT_NEAR(rep.min_eigenvalue, 0.0, 1e-14);
}

TEST(Physicality, SubVacuumRejected) {
    const QuadratureLayout l(2);
    const auto rep = physicality_check(make_gaussian_state(Vector::Zero(4), 0.5 * Matrix::Identity(4, 4), l));
    EXPECT_FALSE(rep.physical);
    EXPECT_NEAR(rep.min_eigenvalue, -0.5, 1e-12);
    EXPECT_LT(rep.normalized_min_eigenvalue, 0.0);
}

TEST(Physicality, ThermalStateIsPhysical) {
    const QuadratureLayout l(1);
    const auto rep = physicality_check(3.0 * Matrix::Identity(2, 2), l);
    EXPECT_TRUE(rep.physical);
    EXPECT_NEAR(rep.min_eigenvalue, 2.0, 1e-12);
    EXPECT_NEAR(rep.normalized_min_eigenvalue, 1.0 - 1.0 / 3.0, 1e-12);
}

TEST(Physicality, SqueezedVacuumSaturates) {
    const QuadratureLayout l(1);
    Matrix v(2, 2);
    v << 0.1, 0, 0, 10.0;
    const auto rep = physicality_check(v, l);
    EXPECT_TRUE(rep.physical);
    EXPECT_NEAR(rep.normalized_min_eigenvalue, 0.0, 1e-12);
}

TEST(Physicality, AsymmetricMatrixIsMalformed) {
    Matrix v = Matrix::Identity(2, 2);
    v(0, 1) = 1e-3;
    EXPECT_THROW(physicality_check(v, QuadratureLayout(1)), MalformedStateError);
}

TEST(Physicality, EpOutputAtHalf) {
    const auto model = build_model(SensorParams::exceptional_point());
    const auto out = output_state(model, 0.5, vacuum_state(model.layout()));
    const auto rep = physicality_check(out);
    EXPECT_TRUE(rep.physical);
    // Explicit covariance route agrees with the factor route at moderate theta.
    const auto raw = physicality_check(out.covariance(), out.layout());
    EXPECT_TRUE(raw.physical);
    EXPECT_NEAR(raw.normalized_min_eigenvalue, rep.normalized_min_eigenvalue, 1e-8);
}

TEST(MakeGaussianState, Vacuum) {
    const auto s = make_gaussian_state(Vector::Zero(4), Matrix::Identity(4, 4), QuadratureLayout(2));
    EXPECT_EQ(s.covariance(), Matrix::Identity(4, 4));
    EXPECT_EQ(s.mean(), Vector::Zero(4));
}

TEST(MakeGaussianState, DimensionMismatch) {
    EXPECT_THROW(make_gaussian_state(Vector::Zero(3), Matrix::Identity(4, 4), QuadratureLayout(2)), DimensionError);
    EXPECT_THROW(make_gaussian_state(Vector::Zero(4), Matrix::Identity(3, 3), QuadratureLayout(2)), DimensionError);
}

TEST(MakeGaussianState, AsymmetryRejected) {
    Matrix v = Matrix::Identity(4, 4);
    v(0, 1) = 1e-3;
    EXPECT_THROW(make_gaussian_state(Vector::Ones(4), v, QuadratureLayout(2)), MalformedStateError);
}

TEST(MakeGaussianState, RoundoffIsSymmetrized) {
    Matrix v = Matrix::Identity(4, 4);
    v(0, 1) = 1e-14;
    const auto s = make_gaussian_state(Vector::Ones(4), v, QuadratureLayout(2));
    EXPECT_EQ(s.covariance()(0, 1), s.covariance()(1, 0));
}

}  // namespace
}  // namespace epsense
