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
#include <cstddef>
#include <ranges>
#include <vector>

#include "epsense/errors.hpp"

namespace epsense {

struct PowerLawFit {
    double exponent = 0.0;
    double stderr_exponent = 0.0;
    double intercept = 0.0;  // log prefactor
    std::size_t n_points = 0;

    double evaluate(double x) const { return std::exp(intercept) * std::pow(x, exponent); }
};

inline constexpr std::size_t kMinFitPoints = 5;

/// Ordinary least squares of log y on log x.
template <std::ranges::input_range X, std::ranges::input_range Y>
PowerLawFit fit_power_law(const X& xs, const Y& ys) {
    std::vector<double> lx, ly;
    auto xi = std::ranges::begin(xs);
    auto yi = std::ranges::begin(ys);
    for (; xi != std::ranges::end(xs) && yi != std::ranges::end(ys); ++xi, ++yi) {
        const double x = static_cast<double>(*xi);
        const double y = static_cast<double>(*yi);
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw DomainError("power-law fit needs strictly positive finite data");
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    if (xi != std::ranges::end(xs) || yi != std::ranges::end(ys))
        throw DimensionError("x and y must have equal length");
    const std::size_t n = lx.size();
    if (n < kMinFitPoints) throw PreconditionError("power-law fit needs at least 5 points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("power-law fit needs distinct x values");
    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    fit.n_points = n;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - fit.intercept - fit.exponent * lx[i];
        sse += r * r;
    }
    fit.stderr_exponent = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
    return fit;
}

/// d log y / d log x by central differences (one-sided at the ends).
inline std::vector<double> local_log_slopes(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw DimensionError("x and y must have equal length");
    const std::size_t n = xs.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
        out[i] = (std::log(ys[hi]) - std::log(ys[lo])) / (std::log(xs[hi]) - std::log(xs[lo]));
    }
    return out;
}

}  // namespace epsense
