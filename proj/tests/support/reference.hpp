/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <string>

#include "chiron/simulator.hpp"
#include "support/oracles.hpp"

namespace chiron::testing {

inline std::string data_path(const std::string& name) { return std::string(CHIRON_TEST_DATA_DIR) + "/" + name; }

/// Desk-scale reference scenario: 1000/2000 eps, T=5 s, R=2 s, W=1 s, L0=100 ms, beta=1e6.
inline SimConfig reference_config() { return sim_config_from_json(oracle::slurp(data_path("reference_config.json"))); }

inline const std::vector<double>& reference_grid() {
    static const std::vector<double> grid = make_grid({1000, 60000, 11});
    return grid;
}

/// Profiled once per test binary; 3 failures per run, 5 repeats.
inline const ProfileResult& reference_profile() {
    static const ProfileResult result = profile_grid(reference_config(), reference_grid(), 3, 5);
    return result;
}

} // namespace chiron::testing
