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

#include "mttkrp/memmodel.hpp"
#include "mttkrp/oracle.hpp"
#include "mttkrp/tensor.hpp"

namespace mttkrp {

struct SeqResult {
    FactorMatrix output;  // empty in trace-only runs
    CostLedger ledger;
    Count peak_resident = 0;
};

/// Peak residency of the unblocked algorithm: the tensor entry, N-1 factor
/// entries and one output entry.
inline Count unblocked_min_capacity(std::size_t order) { return static_cast<Count>(order) + 1; }

/// Fast memory needed by the blocked algorithm with block edge b.
inline Count blocked_footprint(std::size_t order, Index b) {
    Count footprint = 1;
    for (std::size_t k = 0; k < order; ++k) {
        footprint *= b;
    }
    return footprint + static_cast<Count>(order) * b;
}

/// Exact loads+stores of the unblocked algorithm: I + I*R*(N+1).
inline Count unblocked_words(const MttkrpShape& shape) {
    const Count i = shape.tensor_size();
    return i + i * shape.rank * static_cast<Count>(shape.order() + 1);
}

/// Exact loads+stores of the blocked algorithm: every block loads its
/// subtensor once and, per column, its factor segments plus a load and a
/// store of its output segment.
inline Count blocked_words(const MttkrpShape& shape, Index b) {
    const std::size_t n_modes = shape.order();
    std::vector<Count> nblocks(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        nblocks[k] = ceil_div(shape.dims[k], b);
    }
    Count vector_words = 0;
    for (std::size_t k = 0; k < n_modes; ++k) {
        // Ranges of mode k over all blocks: each block-row of mode k is
        // repeated once per combination of the other modes' block indices.
        Count others = 1;
        for (std::size_t j = 0; j < n_modes; ++j) {
            if (j != k) {
                others *= nblocks[j];
            }
        }
        vector_words += (k == shape.mode ? 2 : 1) * others * shape.dims[k];
    }
    return shape.tensor_size() + shape.rank * vector_words;
}

/// The ceiling-form upper bound I + prod ceil(I_k/b) * R (N+1) b.
inline Count blocked_words_ceil_bound(const MttkrpShape& shape, Index b) {
    Count blocks = 1;
    for (Index d : shape.dims) {
        blocks *= ceil_div(d, b);
    }
    return shape.tensor_size() + blocks * shape.rank * static_cast<Count>(shape.order() + 1) * b;
}

namespace detail {

template <bool kCompute>
void run_unblocked(const MttkrpShape& shape, const MttkrpProblem* problem, FactorMatrix* out,
                   MemoryMachine& machine) {
    const std::size_t n_modes = shape.order();
    const std::size_t n = shape.mode;
    const std::vector<Index> lo(n_modes, 0);
    std::vector<Index> idx(n_modes, 0);
    do {
        const Region x_elem = Region::tensor_element(idx);
        machine.load(x_elem);
        Real xv = 0.0;
        if constexpr (kCompute) {
            xv = problem->tensor()(idx);
        }
        for (Index r = 0; r < shape.rank; ++r) {
            for (std::size_t k = 0; k < n_modes; ++k) {
                if (k != n) {
                    machine.load(Region::matrix_element(ArrayKind::Factor, k, idx[k], r));
                }
            }
            const Region b_elem = Region::matrix_element(ArrayKind::Output, n, idx[n], r);
            machine.load(b_elem);
            if constexpr (kCompute) {
                (*out)(idx[n], r) += nary_product(*problem, idx, xv, r);
            }
            machine.record_nary(1);
            machine.record_additions(1);
            machine.store(b_elem);
            for (std::size_t k = 0; k < n_modes; ++k) {
                if (k != n) {
                    machine.evict(Region::matrix_element(ArrayKind::Factor, k, idx[k], r), false);
                }
            }
        }
        machine.evict(x_elem, false);
    } while (next_index_lex(idx, lo, shape.dims));
}

template <bool kCompute>
void run_blocked(const MttkrpShape& shape, Index b, const MttkrpProblem* problem, FactorMatrix* out,
                 MemoryMachine& machine) {
    const std::size_t n_modes = shape.order();
    const std::size_t n = shape.mode;
    std::vector<Index> nblocks(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        nblocks[k] = static_cast<Index>(ceil_div(shape.dims[k], b));
    }
    const std::vector<Index> zero(n_modes, 0);
    std::vector<Index> block(n_modes, 0);
    std::vector<Index> lo(n_modes);
    std::vector<Index> hi(n_modes);
    std::vector<Index> idx(n_modes);
    std::vector<Real> prefix(n_modes);
    do {
        Count block_size = 1;
        for (std::size_t k = 0; k < n_modes; ++k) {
            lo[k] = block[k] * b;
            hi[k] = std::min(shape.dims[k], lo[k] + b);
            block_size *= hi[k] - lo[k];
        }
        const Region x_block = Region::tensor_box(lo, hi);
        machine.load(x_block);
        for (Index r = 0; r < shape.rank; ++r) {
            for (std::size_t k = 0; k < n_modes; ++k) {
                if (k != n) {
                    machine.load(Region::matrix_segment(ArrayKind::Factor, k, lo[k], hi[k], r));
                }
            }
            const Region b_seg = Region::matrix_segment(ArrayKind::Output, n, lo[n], hi[n], r);
            machine.load(b_seg);
            if constexpr (kCompute) {
                std::copy(lo.begin(), lo.end(), idx.begin());
                do {
                    (*out)(idx[n], r) += nary_product(*problem, idx, problem->tensor()(idx), r);
                } while (next_index_lex(idx, lo, hi));
            }
            machine.record_nary(block_size);
            machine.record_additions(block_size);
            machine.store(b_seg);
            for (std::size_t k = 0; k < n_modes; ++k) {
                if (k != n) {
                    machine.evict(Region::matrix_segment(ArrayKind::Factor, k, lo[k], hi[k], r), false);
                }
            }
        }
        machine.evict(x_block, false);
    } while (next_index_lex(block, zero, nblocks));
}

inline void check_unblocked_machine(const MttkrpShape& shape, const MemoryMachine& machine) {
    if (machine.capacity() < unblocked_min_capacity(shape.order())) {
        throw InfeasibleMachine("unblocked MTTKRP of order " + std::to_string(shape.order()) + " needs M >= " +
                                to_string(unblocked_min_capacity(shape.order())) + ", got M = " +
                                to_string(machine.capacity()));
    }
}

inline void check_block(const MttkrpShape& shape, const MemoryMachine& machine, Index b) {
    if (b < 1) {
        throw InfeasibleBlock("block size must be a positive integer, got " + std::to_string(b));
    }
    if (blocked_footprint(shape.order(), b) > machine.capacity()) {
        throw InfeasibleBlock("block size b = " + std::to_string(b) + " needs b^N + N*b = " +
                              to_string(blocked_footprint(shape.order(), b)) + " words, M = " +
                              to_string(machine.capacity()));
    }
}

}  // namespace detail

/// Sequential unblocked MTTKRP: one tensor load per entry and, per column,
/// N-1 factor loads plus a load and store of the output entry. Agrees with
/// mttkrp_oracle bit for bit.
inline SeqResult mttkrp_seq_unblocked(const MttkrpProblem& problem, MemoryMachine& machine) {
    const MttkrpShape shape = problem.shape();
    detail::check_unblocked_machine(shape, machine);
    SeqResult result{FactorMatrix(shape.dims[shape.mode], shape.rank), {}, 0};
    detail::run_unblocked<true>(shape, &problem, &result.output, machine);
    result.ledger = machine.ledger();
    result.peak_resident = machine.peak_resident_words();
    return result;
}

/// Sequential blocked MTTKRP with cubic blocks of edge b (clipped at the
/// tensor boundary). Requires b^N + N*b <= M.
inline SeqResult mttkrp_seq_blocked(const MttkrpProblem& problem, MemoryMachine& machine, Index b) {
    const MttkrpShape shape = problem.shape();
    detail::check_block(shape, machine, b);
    SeqResult result{FactorMatrix(shape.dims[shape.mode], shape.rank), {}, 0};
    detail::run_blocked<true>(shape, b, &problem, &result.output, machine);
    result.ledger = machine.ledger();
    result.peak_resident = machine.peak_resident_words();
    return result;
}

/// Same instruction stream as mttkrp_seq_unblocked with no values attached.
inline SeqResult trace_seq_unblocked(const MttkrpShape& shape, MemoryMachine& machine) {
    shape.validate();
    detail::check_unblocked_machine(shape, machine);
    detail::run_unblocked<false>(shape, nullptr, nullptr, machine);
    return {FactorMatrix{}, machine.ledger(), machine.peak_resident_words()};
}

/// Same instruction stream as mttkrp_seq_blocked with no values attached;
/// used for sweeps whose tensors are too large to materialize.
inline SeqResult trace_seq_blocked(const MttkrpShape& shape, MemoryMachine& machine, Index b) {
    shape.validate();
    detail::check_block(shape, machine, b);
    detail::run_blocked<false>(shape, b, nullptr, nullptr, machine);
    return {FactorMatrix{}, machine.ledger(), machine.peak_resident_words()};
}

}  // namespace mttkrp
