/*
Copyright 2026 The mttkrp-lab Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Picks grids for both parallel algorithms, simulates them, and compares the
// simulated per-processor words with the planner's prediction.

#include <iostream>

#include "mttkrp/mttkrp.hpp"

int main() {
    using namespace mttkrp;
    const MttkrpShape shape{{8, 8, 8}, 8, 1};
    const MttkrpProblem problem = make_synthetic_problem(shape, kDefaultSeed);
    const FactorMatrix want = mttkrp_oracle(problem);

    for (Count p : {Count{4}, Count{16}, Count{64}}) {
        const ProcessorGrid g3 = choose_grid(shape, p, ParAlgorithm::Stationary);
        const ProcessorGrid g4 = choose_grid(shape, p, ParAlgorithm::General);
        const ParResult r3 = par_stationary_mttkrp(problem, g3);
        const ParResult r4 = par_general_mttkrp(problem, g4);
        std::cout << "P=" << to_string(p) << "  stationary " << g3.to_string() << ": "
                  << to_string(r3.ledger.max_words()) << " words (predicted " << to_string(predicted_words(shape, g3))
                  << ")  general " << g4.to_string() << ": " << to_string(r4.ledger.max_words())
                  << " words (predicted " << to_string(predicted_words(shape, g4)) << ")  err "
                  << std::max(max_relative_error(r3.output, want), max_relative_error(r4.output, want)) << '\n';
    }
    return 0;
}
