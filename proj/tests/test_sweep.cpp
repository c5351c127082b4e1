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

#include <sstream>

#include "epsense/cli.hpp"
#include "epsense/epsense.hpp"

namespace epsense {
namespace {

Scenario named(const std::string& name) {
    auto s = find_scenario(name);
    EXPECT_TRUE(s.has_value());
    return *s;
}

TEST(Scenarios, FourBuiltins) {
    const auto all = builtin_scenarios();
    ASSERT_EQ(all.size(), 4u);
    EXPECT_EQ(all[0].name, "ep_all_modes");
    EXPECT_EQ(all[1].name, "ep_one_mode");
    EXPECT_EQ(all[2].name, "single_mode_plain");
    EXPECT_EQ(all[3].name, "ep_detuned");
    EXPECT_FALSE(find_scenario("nonsense").has_value());
    EXPECT_DOUBLE_EQ(all[3].model.params.detuning, 0.05);
}

TEST(ThetaGrid, PointsAndErrors) {
    const auto pts = ThetaGrid{1e-3, 1e-1, 10}.points();
    ASSERT_EQ(pts.size(), 21u);
    EXPECT_DOUBLE_EQ(pts.front(), 1e-3);
    EXPECT_NEAR(pts.back(), 1e-1, 1e-15);
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GT(pts[i], pts[i - 1]);
    EXPECT_THROW((ThetaGrid{1e-1, 1e-3, 10}.points()), PreconditionError);
    EXPECT_THROW((ThetaGrid{0.0, 1e-3, 10}.points()), PreconditionError);
    EXPECT_THROW((ThetaGrid{1e-3, 1e-1, 0}.points()), PreconditionError);
}

TEST(RunSweep, ScenarioSlopes) {
    const std::vector<std::pair<std::string, double>> expected = {
        {"ep_all_modes", 2.0}, {"ep_one_mode", 1.0}, {"single_mode_plain", 0.0}};
    for (const auto& [name, slope] : expected) {
        const auto res = run_sweep(named(name));
        EXPECT_NEAR(res.fit.exponent, slope, 0.1) << name;
        EXPECT_EQ(res.failed, 0u);
    }
}

TEST(RunSweep, AllModesRows) {
    const auto res = run_sweep(named("ep_all_modes"));
    ASSERT_EQ(res.rows.size(), 21u);
    for (const auto& r : res.rows) {
        EXPECT_EQ(r.status, "ok");
        EXPECT_TRUE(std::isfinite(r.I1));
        EXPECT_DOUBLE_EQ(r.delta_theta_cr, 1.0 / std::sqrt(r.I1));
        EXPECT_GE(r.delta_theta_het, r.delta_theta_cr);
        EXPECT_GE(r.physicality_margin, -kPhysicalityTolerance);
    }
    EXPECT_NEAR(res.fit_range.min, 1e-3, 1e-15);
    EXPECT_NEAR(res.fit_range.max, 1e-1, 1e-15);
    const auto het = run_sweep(named("ep_all_modes"), SweepOptions{0, SweepColumn::delta_theta_het});
    EXPECT_NEAR(het.fit.exponent, 2.0, 0.1);
}

TEST(RunSweep, DetunedCutoff) {
    const auto s = named("ep_detuned");
    const auto res = run_sweep(s);
    const double delta = s.model.params.detuning;
    EXPECT_NEAR(res.fit.exponent, 2.0, 0.15);
    EXPECT_NEAR(res.fit_range.min, 10 * delta, 1e-12);
    std::vector<double> th, dt;
    for (const auto& r : res.rows) {
        th.push_back(r.theta);
        dt.push_back(r.delta_theta_cr);
    }
    const auto local = local_log_slopes(th, dt);
    for (std::size_t i = 0; i < local.size(); ++i)
        if (th[i] <= delta / 10 * (1 + 1e-12)) EXPECT_LE(std::abs(local[i]), 0.1) << th[i];
    ASSERT_TRUE(res.cutoff_theta.has_value());
    EXPECT_GT(*res.cutoff_theta, delta / 3);
    EXPECT_LT(*res.cutoff_theta, delta * 3);
    ASSERT_TRUE(res.upper_bound.has_value());
}

TEST(RunSweep, OrderPreservedAcrossWorkers) {
    const auto s = named("ep_detuned");
    const auto one = run_sweep(s, SweepOptions{1});
    const auto many = run_sweep(s, SweepOptions{4});
    ASSERT_EQ(one.rows.size(), many.rows.size());
    for (std::size_t i = 0; i < one.rows.size(); ++i) {
        EXPECT_EQ(one.rows[i].theta, many.rows[i].theta);
        EXPECT_EQ(one.rows[i].I1, many.rows[i].I1);
    }
}

TEST(RunSweep, DeterministicCsv) {
    auto s = named("ep_all_modes");
    s.probe = ProbeRecipe{ProbeKind::seeded_random, Vector(), 42};
    std::ostringstream a, b;
    cli::write_rows(a, run_sweep(s).rows, ',');
    cli::write_rows(b, run_sweep(s).rows, ',');
    EXPECT_EQ(a.str(), b.str());
}

TEST(RunSweep, ScaleCovariance) {
    // theta -> c theta together with M -> c M leaves the fitted exponent unchanged.
    const double c = 5.0;
    Scenario base = named("ep_all_modes");
    base.model.kind = ModelKind::custom;
    base.model.custom_m = build_model(SensorParams::exceptional_point()).M();
    Scenario scaled = base;
    scaled.model.custom_m *= c;
    scaled.grid = ThetaGrid{c * base.grid.min, c * base.grid.max, base.grid.points_per_decade};
    EXPECT_NEAR(run_sweep(scaled).fit.exponent, run_sweep(base).fit.exponent, 0.02);
}

TEST(RunSweep, FailedPointsAreMarked) {
    Scenario s = named("ep_all_modes");
    s.model.kind = ModelKind::custom;
    s.model.custom_m = Matrix::Identity(4, 4) * 0.01;  // theta = 0.01 makes theta Pi - M singular
    s.probe = ProbeRecipe{ProbeKind::fixed_vector, Eigen::Vector4d(1, 0, 0, 0), 0};
    s.model.custom_m(0, 2) = 1.0;
    s.model.custom_m(2, 0) = -1.0;
    const auto res = run_sweep(s);
    std::size_t errors = 0;
    for (const auto& r : res.rows)
        if (r.status != "ok") ++errors;
    EXPECT_EQ(errors, res.failed);
    EXPECT_EQ(res.rows.size(), 21u);
}

TEST(RunSweep, TooManyFailuresThrow) {
    Scenario s = named("ep_all_modes");
    s.model.kind = ModelKind::custom;
    s.model.custom_m = Matrix::Zero(4, 4);
    s.probe = ProbeRecipe{ProbeKind::fixed_vector, Vector::Zero(4), 0};  // I1 = 0 everywhere
    EXPECT_THROW(run_sweep(s), SweepFailure);
}

TEST(FitPowerLaw, RowsOutsideRangeIgnored) {
    std::vector<SweepRow> rows;
    for (double t : ThetaGrid{1e-3, 1, 10}.points()) {
        SweepRow r;
        r.theta = t;
        r.I1 = t < 0.1 ? std::pow(t, -4) : 1.0;
        r.delta_theta_cr = 1.0 / std::sqrt(r.I1);
        r.delta_theta_het = r.delta_theta_cr;
        rows.push_back(r);
    }
    const auto fit = fit_power_law(rows, SweepColumn::I1, FitRange{1e-3, 1e-2});
    EXPECT_NEAR(fit.exponent, -4.0, 1e-12);
    EXPECT_EQ(fit.n_points, 11u);
}

}  // namespace
}  // namespace epsense
