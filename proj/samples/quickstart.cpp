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

// Runs both sequential algorithms on a small synthetic problem and prints
// their traffic next to the sequential lower bounds.

#include <iostream>

#include "mttkrp/mttkrp.hpp"

int main() {
    using namespace mttkrp;
    const MttkrpShape shape{{8, 8, 8}, 4, 0};
    const MttkrpProblem problem = make_synthetic_problem(shape, kDefaultSeed);
    const Count memory = 64;

    MemoryMachine m1(memory);
    const SeqResult unblocked = mttkrp_seq_unblocked(problem, m1);

    const Index b = choose_block_size(shape.order(), memory);
    MemoryMachine m2(memory);
    const SeqResult blocked = mttkrp_seq_blocked(problem, m2, b);

    const ProblemShape ps{shape.dims, shape.rank, memory, std::nullopt, 1.0L, 1.0L};
    std::cout << LedgerRow::kHeader << '\n'
              << LedgerRow{"unblocked", shape.dims, shape.rank, memory, 0, unblocked.ledger} << '\n'
              << LedgerRow{"blocked", shape.dims, shape.rank, memory, b, blocked.ledger} << '\n';
    std::cout << "lower bound (memory-dependent): " << format_wide(lb_seq_memdep(ps).value) << '\n'
              << "lower bound (trivial):          " << format_wide(lb_seq_trivial(ps).value) << '\n'
              << "blocked vs oracle max rel err:  " << max_relative_error(blocked.output, mttkrp_oracle(problem))
              << '\n';
    return 0;
}
