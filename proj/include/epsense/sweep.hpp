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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "epsense/errors.hpp"
#include "epsense/estimation.hpp"
#include "epsense/jordan.hpp"
#include "epsense/power_law.hpp"
#include "epsense/sensor.hpp"

namespace epsense {

/// Log-spaced grid, both ends included.
struct ThetaGrid {
    double min = 1e-3;
    double max = 1e-1;
    int points_per_decade = 10;

    std::vector<double> points() const {
        if (!(min > 0.0) || !(max >= min) || points_per_decade < 1 || !std::isfinite(max))
            throw PreconditionError("theta grid must satisfy 0 < min <= max and points_per_decade >= 1");
        const double decades = std::log10(max / min);
        const int steps = static_cast<int>(std::lround(decades * points_per_decade));
        std::vector<double> out;
        out.reserve(steps + 1);
        for (int i = 0; i <= steps; ++i)
            out.push_back(i == steps ? max : min * std::pow(10.0, static_cast<double>(i) / points_per_decade));
        if (out.size() == 1 && min != max) out.push_back(max);
        return out;
    }
};

struct FitRange {
    double min = 0.0;
    double max = 0.0;
    bool contains(double x) const { return x >= min * (1.0 - 1e-12) && x <= max * (1.0 + 1e-12); }
};

enum class ProbeKind { jordan_probe, fixed_vector, seeded_random };

struct ProbeRecipe {
    ProbeKind kind = ProbeKind::jordan_probe;
    Vector vector;  // fixed_vector only
    std::uint64_t seed = 0;
};

struct ModelRecipe {
    ModelKind kind = ModelKind::two_mode;
    SensorParams params = SensorParams::exceptional_point();
    std::optional<Matrix> pi;
    Matrix custom_m;  // ModelKind::custom only
};

enum class SweepColumn { I1, delta_theta_cr, delta_theta_het };

inline const char* column_name(SweepColumn c) {
    switch (c) {
        case SweepColumn::I1:
            return "I1";
        case SweepColumn::delta_theta_cr:
            return "delta_theta_cr";
        case SweepColumn::delta_theta_het:
            return "delta_theta_het";
    }
    return "?";
}

struct Scenario {
    std::string name;
    std::string description;
    ModelRecipe model;
    ProbeRecipe probe;
    ThetaGrid grid;
    std::optional<FitRange> fit_range;  // resolved by resolve_fit_range when empty
};

inline SensorModel build_model(const ModelRecipe& recipe) {
    switch (recipe.kind) {
        case ModelKind::two_mode:
            return build_model(recipe.params, recipe.pi);
        case ModelKind::single_mode:
            return build_single_mode_model(recipe.params.gamma1, recipe.params.detuning);
        case ModelKind::custom:
            return build_custom_model(recipe.custom_m, recipe.pi);
    }
    throw PreconditionError("unknown model kind");
}

/// Unit-norm probe amplitude. The Jordan probe is P (0,1,0,...)^T, the head of the
/// largest chain of the threshold (zero-detuning) M; Pi plays no role in it.
inline Vector resolve_probe(const ModelRecipe& recipe, const ProbeRecipe& probe) {
    const int d = build_model(recipe).dim();
    switch (probe.kind) {
        case ProbeKind::fixed_vector:
            if (probe.vector.size() != d) throw DimensionError("fixed probe does not match the sensor");
            return probe.vector;
        case ProbeKind::seeded_random: {
            std::mt19937_64 rng(probe.seed);
            std::normal_distribution<double> normal;
            Vector v(d);
            for (int i = 0; i < d; ++i) v(i) = normal(rng);
            return v.normalized();
        }
        case ProbeKind::jordan_probe: {
            ModelRecipe threshold = recipe;
            threshold.params.detuning = 0.0;
            const auto dec = jordan_decompose(build_model(threshold).M());
            if (dec.block_sizes.empty() || dec.block_sizes.front() < 2)
                throw PreconditionError("Jordan probe needs an exceptional point in the threshold model");
            return dec.chain_top().normalized();
        }
    }
    throw PreconditionError("unknown probe kind");
}

/// Fit windows: theta >= 10 * detuning up to the grid end below threshold,
/// otherwise the lowest two decades of the grid.
inline FitRange resolve_fit_range(const Scenario& s) {
    if (s.fit_range) return *s.fit_range;
    const double delta = s.model.params.detuning;
    if (s.model.kind != ModelKind::custom && delta > 0.0) return {10.0 * delta, s.grid.max};
    return {s.grid.min, std::min(s.grid.max, 100.0 * s.grid.min)};
}

/// The four reference configurations.
inline std::vector<Scenario> builtin_scenarios() {
    const SensorParams ep = SensorParams::exceptional_point();
    const ThetaGrid low{1e-3, 1e-1, 10};

    Scenario a{"ep_all_modes", "EP at lasing threshold, both modes perturbed", {ModelKind::two_mode, ep, std::nullopt, {}},
               {ProbeKind::jordan_probe, {}, 0}, low, std::nullopt};

    Vector one_mode(4);
    one_mode << 1.0, 0.0, 1.0, 0.0;
    Scenario b{"ep_one_mode", "EP at lasing threshold, only mode 1 perturbed",
               {ModelKind::two_mode, ep, Matrix(one_mode.asDiagonal()), {}}, {ProbeKind::jordan_probe, {}, 0}, low,
               std::nullopt};

    Vector unit_q(2);
    unit_q << 1.0, 0.0;
    Scenario c{"single_mode_plain", "single lossless mode, no gain or intrinsic loss",
               {ModelKind::single_mode, SensorParams{0.5, 0.0, 0.0, 0.0, 1.0}, std::nullopt, {}},
               {ProbeKind::fixed_vector, unit_q, 0}, low, std::nullopt};

    SensorParams detuned = ep;
    detuned.detuning = 0.05 * ep.coupling;
    Scenario d{"ep_detuned", "EP sensor with added loss 0.05 G per cavity (below threshold)",
               {ModelKind::two_mode, detuned, std::nullopt, {}}, {ProbeKind::jordan_probe, {}, 0},
               ThetaGrid{1e-4, 10.0, 10}, std::nullopt};
    return {a, b, c, d};
}

inline std::optional<Scenario> find_scenario(const std::string& name) {
    for (auto& s : builtin_scenarios())
        if (s.name == name) return s;
    return std::nullopt;
}

struct SweepRow {
    double theta = 0.0;
    double I1 = std::nan("");
    double delta_theta_cr = std::nan("");
    double delta_theta_het = std::nan("");
    double physicality_margin = std::nan("");
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
    double value(SweepColumn c) const {
        switch (c) {
            case SweepColumn::I1:
                return I1;
            case SweepColumn::delta_theta_cr:
                return delta_theta_cr;
            case SweepColumn::delta_theta_het:
                return delta_theta_het;
        }
        return std::nan("");
    }
};

struct SweepResult {
    Scenario scenario;
    std::vector<SweepRow> rows;
    SweepColumn column = SweepColumn::delta_theta_cr;
    FitRange fit_range;
    PowerLawFit fit;
    std::size_t failed = 0;
    /// Below threshold: where the flat small-theta plateau meets the fitted power law.
    std::optional<double> cutoff_theta;
    /// Below threshold: ||G_0||_tr^2.
    std::optional<double> upper_bound;
};

inline PowerLawFit fit_power_law(const std::vector<SweepRow>& rows, SweepColumn column, const FitRange& range) {
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        if (!r.ok() || !range.contains(r.theta)) continue;
        xs.push_back(r.theta);
        ys.push_back(r.value(column));
    }
    return fit_power_law(xs, ys);
}

/// EPSENSE_WORKERS, else the hardware concurrency.
inline int worker_count_from_env() {
    if (const char* env = std::getenv("EPSENSE_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct SweepOptions {
    int workers = 0;  // 0: worker_count_from_env()
    SweepColumn column = SweepColumn::delta_theta_cr;
    double max_failed_fraction = 0.2;
};

inline SweepRow evaluate_row(const SensorModel& model, const Vector& mu_in, double theta) {
    SweepRow row;
    row.theta = theta;
    try {
        const auto rep = sensitivity(model, theta, mu_in);
        row.I1 = rep.I1;
        row.delta_theta_cr = rep.delta_theta_cr;
        row.delta_theta_het = rep.delta_theta_het;
        row.physicality_margin = rep.physicality_margin;
    } catch (const Error& e) {
        row.status = std::string("error: ") + e.what();
    }
    return row;
}

/// Rows come back in grid order whatever the worker count.
inline SweepResult run_sweep(const Scenario& scenario, const SweepOptions& options = {}) {
    const std::vector<double> thetas = scenario.grid.points();
    if (thetas.empty()) throw PreconditionError("empty theta grid");
    const SensorModel model = build_model(scenario.model);
    const Vector mu_in = resolve_probe(scenario.model, scenario.probe);

    SweepResult result;
    result.scenario = scenario;
    result.column = options.column;
    result.rows.resize(thetas.size());

    const int workers =
        std::max(1, std::min<int>(options.workers > 0 ? options.workers : worker_count_from_env(),
                                  static_cast<int>(thetas.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < thetas.size(); i = next++) result.rows[i] = evaluate_row(model, mu_in, thetas[i]);
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    for (const auto& r : result.rows)
        if (!r.ok()) ++result.failed;
    if (static_cast<double>(result.failed) > options.max_failed_fraction * static_cast<double>(thetas.size()))
        throw SweepFailure(std::to_string(result.failed) + " of " + std::to_string(thetas.size()) +
                           " grid points failed in scenario " + scenario.name);

    result.fit_range = resolve_fit_range(scenario);
    try {
        result.fit = fit_power_law(result.rows, options.column, result.fit_range);
    } catch (const Error& e) {
        throw SweepFailure(std::string("power-law fit: ") + e.what());
    }

    if (scenario.model.kind != ModelKind::custom && scenario.model.params.detuning > 0.0) {
        result.upper_bound = fisher_upper_bound(model);
        const auto first = std::find_if(result.rows.begin(), result.rows.end(), [](const SweepRow& r) { return r.ok(); });
        if (first != result.rows.end() && result.fit.exponent != 0.0) {
            const double plateau = std::log(first->value(options.column));
            result.cutoff_theta = std::exp((plateau - result.fit.intercept) / result.fit.exponent);
        }
    }
    return result;
}

}  // namespace epsense
