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

#pragma once

#include <vector>

#include "mttkrp/tensor.hpp"

namespace mttkrp {

/// One atomic N-ary multiply: the tensor entry times the input-factor
/// entries of column r, multiplied left to right in increasing mode order.
/// Every algorithm that must agree bit-for-bit with the oracle calls this.
inline Real nary_product(const MttkrpProblem& problem, std::span<const Index> idx, Real tensor_value, Index r) {
    Real prod = tensor_value;
    for (std::size_t k = 0; k < problem.order(); ++k) {
        if (k != problem.mode()) {
            prod *= problem.factor(k)(idx[k], r);
        }
    }
    return prod;
}

/// Reference MTTKRP by direct summation.
///
/// Multi-indices are visited lexicographically (mode 0 outermost) with the
/// rank loop innermost, and each product is accumulated into B(i_n, r) as it
/// is formed. The unblocked sequential algorithm uses the same order, so the
/// two agree exactly.
inline FactorMatrix mttkrp_oracle(const MttkrpProblem& problem) {
    const DenseTensor& x = problem.tensor();
    const std::size_t n = problem.mode();
    FactorMatrix out(x.dim(n), problem.rank());
    if (problem.rank() == 0) {
        return out;
    }
    const std::vector<Index> lo(x.order(), 0);
    std::vector<Index> idx(x.order(), 0);
    do {
        const Real xv = x(idx);
        for (Index r = 0; r < problem.rank(); ++r) {
            out(idx[n], r) += nary_product(problem, idx, xv, r);
        }
    } while (next_index_lex(idx, lo, x.dims()));
    return out;
}

}  // namespace mttkrp
