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

// Prints the sensitivity scaling of the four built-in scenarios and the
// below-threshold bound for a few detunings.

#include <cstdio>

#include "epsense/epsense.hpp"

int main() {
    using namespace epsense;
    for (const auto& scenario : builtin_scenarios()) {
        const auto res = run_sweep(scenario);
        std::printf("%-18s exponent %+.3f (+- %.3f) over [%g, %g]\n", scenario.name.c_str(), res.fit.exponent,
                    res.fit.stderr_exponent, res.fit_range.min, res.fit_range.max);
        for (std::size_t i = 0; i < res.rows.size(); i += 10)
            std::printf("    theta %-10.3g  dtheta_cr %-12.5g  dtheta_het %-12.5g\n", res.rows[i].theta,
                        res.rows[i].delta_theta_cr, res.rows[i].delta_theta_het);
    }
    for (double delta : {1e-3, 1e-2, 1e-1}) {
        const auto model = build_model(SensorParams{1.0, 1.0, 1.0, delta, 1.0});
        std::printf("delta %-6g I_UB %.6g\n", delta, fisher_upper_bound(model));
    }
}
