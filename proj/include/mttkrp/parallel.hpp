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

#include <string>
#include <vector>

#include "mttkrp/bounds.hpp"
#include "mttkrp/collectives.hpp"
#include "mttkrp/grid.hpp"
#include "mttkrp/memmodel.hpp"
#include "mttkrp/tensor.hpp"

namespace mttkrp {

enum class ArithMode { Atomic, Krp };

inline std::string to_string(ArithMode mode) { return mode == ArithMode::Atomic ? "atomic" : "krp"; }

struct ProcessorCounters {
    Count words_sent = 0;
    Count words_received = 0;
    Count additions = 0;        // local accumulation plus reduce-scatter
    Count nary_multiplies = 0;  // atomic mode only
    Count krp_multiplies = 0;   // krp mode: forming the local Khatri-Rao product
    Count matmul_flops = 0;     // krp mode: multiplies and adds of the local product
    Count storage = 0;          // words held while computing

    /// Bandwidth cost of this processor: it sends and receives concurrently,
    /// so the larger direction.
    Count words() const { return std::max(words_sent, words_received); }
    Count traffic() const { return words_sent + words_received; }

    friend bool operator==(const ProcessorCounters&, const ProcessorCounters&) = default;
};

/// One collective line of the algorithm, aggregated over the simultaneous
/// groups that execute it.
struct CollectiveRecord {
    std::string op;  // "all-gather" or "reduce-scatter"
    ArrayKind array = ArrayKind::Tensor;
    std::size_t mode = 0;
    Index group_size = 1;
    Index groups = 0;
    Count max_part = 0;  // largest part before (all-gather) or after (reduce-scatter)
    Count max_sent = 0;
    Count max_received = 0;
    Count total_sent = 0;
    Count total_received = 0;

    friend bool operator==(const CollectiveRecord&, const CollectiveRecord&) = default;
};

struct CommLedger {
    std::vector<ProcessorCounters> processors;
    std::vector<CollectiveRecord> collectives;

    Count max_words() const {
        Count m = 0;
        for (const auto& p : processors) {
            m = std::max(m, p.words());
        }
        return m;
    }

    Count max_traffic() const {
        Count m = 0;
        for (const auto& p : processors) {
            m = std::max(m, p.traffic());
        }
        return m;
    }

    Wide mean_words() const {
        if (processors.empty()) {
            return 0.0L;
        }
        Wide s = 0.0L;
        for (const auto& p : processors) {
            s += static_cast<Wide>(p.words());
        }
        return s / static_cast<Wide>(processors.size());
    }

    Count total_sent() const {
        Count s = 0;
        for (const auto& p : processors) {
            s += p.words_sent;
        }
        return s;
    }

    Count total_received() const {
        Count s = 0;
        for (const auto& p : processors) {
            s += p.words_received;
        }
        return s;
    }

    Count max_storage() const {
        Count m = 0;
        for (const auto& p : processors) {
            m = std::max(m, p.storage);
        }
        return m;
    }

    Count max_arithmetic(std::size_t order) const {
        Count m = 0;
        for (const auto& p : processors) {
            const Count ops = static_cast<Count>(order - 1) * p.nary_multiplies + p.additions + p.krp_multiplies +
                              p.matmul_flops;
            m = std::max(m, ops);
        }
        return m;
    }

    /// Words moved for one array (summed over its collectives).
    Count array_words(ArrayKind array) const {
        Count s = 0;
        for (const auto& c : collectives) {
            if (c.array == array) {
                s += c.total_sent;
            }
        }
        return s;
    }

    friend bool operator==(const CommLedger&, const CommLedger&) = default;
};

struct ParOptions {
    ArithMode arith = ArithMode::Atomic;
};

struct ParResult {
    FactorMatrix output;
    CommLedger ledger;
    Wide gamma = 1.0L;  // measured tensor imbalance
    Wide delta = 1.0L;  // measured matrix imbalance
};

/// Arithmetic of one local MTTKRP done as an explicit Khatri-Rao product
/// followed by a matrix multiply: R * prod|S| * (2 + 1/|S^(n)|). Exact for
/// N = 3; for larger N forming the product costs more (see ProcessorCounters).
inline Count local_krp_matmul_flops(std::span<const Index> block_dims, std::size_t mode, Index rank) {
    if (block_dims.empty() || mode >= block_dims.size()) {
        throw ShapeError("local block needs a valid output mode");
    }
    Count all = 1;
    for (Index d : block_dims) {
        if (d <= 0) {
            throw ShapeError("local block must be nonempty");
        }
        all *= d;
    }
    const Count others = all / block_dims[mode];
    return 2 * static_cast<Count>(rank) * all + static_cast<Count>(rank) * others;
}

/// Atomic count N * R * prod|S| for the same block.
inline Count local_atomic_flops(std::span<const Index> block_dims, Index rank) {
    return static_cast<Count>(block_dims.size()) * static_cast<Count>(rank) * product(block_dims);
}

namespace detail {

inline std::vector<Index> block_lo(const DataDistribution& dist, Index id) {
    const auto c = dist.grid().coords(id);
    std::vector<Index> lo(dist.shape().order());
    for (std::size_t k = 0; k < lo.size(); ++k) {
        lo[k] = dist.rows(k).begin(c[k + 1]);
    }
    return lo;
}

inline std::vector<Index> block_dims(const DataDistribution& dist, Index id) {
    const auto c = dist.grid().coords(id);
    std::vector<Index> dims(dist.shape().order());
    for (std::size_t k = 0; k < dims.size(); ++k) {
        dims[k] = dist.rows(k).size(c[k + 1]);
    }
    return dims;
}

/// Tensor block of processor `id`, column-major in local indices.
inline std::vector<Real> tensor_block_values(const DenseTensor& x, const DataDistribution& dist, Index id) {
    const std::vector<Index> lo = block_lo(dist, id);
    const std::vector<Index> dims = block_dims(dist, id);
    std::vector<Real> out;
    out.reserve(static_cast<std::size_t>(product(dims)));
    const std::vector<Index> zero(dims.size(), 0);
    std::vector<Index> local(dims.size(), 0);
    std::vector<Index> global(dims.size());
    do {
        for (std::size_t k = 0; k < dims.size(); ++k) {
            global[k] = lo[k] + local[k];
        }
        out.push_back(x(global));
    } while (next_index(local, zero, dims));
    return out;
}

/// M(S^(k)_{p_k}, T_{p_0}) of processor `id`, row-major.
inline std::vector<Real> matrix_block_values(const FactorMatrix& m, const DataDistribution& dist, std::size_t k,
                                             Index id) {
    const auto c = dist.grid().coords(id);
    const Index row_lo = dist.rows(k).begin(c[k + 1]);
    const Index rows = dist.rows(k).size(c[k + 1]);
    const Index col_lo = dist.cols().begin(c[0]);
    const Index cols = dist.cols().size(c[0]);
    std::vector<Real> out;
    out.reserve(static_cast<std::size_t>(rows * cols));
    for (Index i = 0; i < rows; ++i) {
        for (Index r = 0; r < cols; ++r) {
            out.push_back(m(row_lo + i, col_lo + r));
        }
    }
    return out;
}

inline std::vector<std::vector<Real>> split_chunks(const std::vector<Real>& block, Count parts) {
    std::vector<std::vector<Real>> out(static_cast<std::size_t>(parts));
    for (Count j = 0; j < parts; ++j) {
        const Range r = balanced_chunk(static_cast<Count>(block.size()), parts, j);
        out[static_cast<std::size_t>(j)].assign(block.begin() + static_cast<std::ptrdiff_t>(r.begin),
                                                block.begin() + static_cast<std::ptrdiff_t>(r.end));
    }
    return out;
}

inline void absorb(CollectiveRecord& rec, CommLedger& ledger, const std::vector<Index>& members,
                   const CollectiveCounts& counts) {
    rec.groups += 1;
    for (std::size_t j = 0; j < members.size(); ++j) {
        ProcessorCounters& p = ledger.processors[static_cast<std::size_t>(members[j])];
        p.words_sent += counts.sent[j];
        p.words_received += counts.received[j];
        p.additions += counts.additions[j];
        rec.max_sent = std::max(rec.max_sent, counts.sent[j]);
        rec.max_received = std::max(rec.max_received, counts.received[j]);
        rec.total_sent += counts.sent[j];
        rec.total_received += counts.received[j];
    }
}

/// Local MTTKRP on processor-resident blocks. `x` is column-major over
/// `dims`; `a[k]` is row-major dims[k] x cols (unused for k == mode). The
/// result is row-major dims[mode] x cols.
inline std::vector<Real> local_mttkrp(const std::vector<Real>& x, const std::vector<Index>& dims,
                                      const std::vector<std::vector<Real>>& a, std::size_t mode, Index cols,
                                      ArithMode arith, ProcessorCounters& counters) {
    const std::size_t n_modes = dims.size();
    std::vector<Real> c(static_cast<std::size_t>(dims[mode] * cols), 0.0);
    if (cols == 0) {
        return c;
    }
    std::vector<Index> strides(n_modes);
    Index stride = 1;
    for (std::size_t k = 0; k < n_modes; ++k) {
        strides[k] = stride;
        stride *= dims[k];
    }
    const Count block = stride;
    if (arith == ArithMode::Atomic) {
        const std::vector<Index> zero(n_modes, 0);
        std::vector<Index> idx(n_modes, 0);
        do {
            Index off = 0;
            for (std::size_t k = 0; k < n_modes; ++k) {
                off += idx[k] * strides[k];
            }
            const Real xv = x[static_cast<std::size_t>(off)];
            for (Index r = 0; r < cols; ++r) {
                Real prod = xv;
                for (std::size_t k = 0; k < n_modes; ++k) {
                    if (k != mode) {
                        prod *= a[k][static_cast<std::size_t>(idx[k] * cols + r)];
                    }
                }
                c[static_cast<std::size_t>(idx[mode] * cols + r)] += prod;
            }
        } while (next_index_lex(idx, zero, dims));
        counters.nary_multiplies += block * cols;
        counters.additions += block * cols;
        return c;
    }

    // Khatri-Rao rows are indexed by the non-output modes, first mode
    // fastest, matching the column-major matricization X_(n).
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < n_modes; ++k) {
        if (k != mode) {
            others.push_back(k);
        }
    }
    Index krp_rows = 1;
    for (std::size_t k : others) {
        krp_rows *= dims[k];
    }
    std::vector<Real> krp(static_cast<std::size_t>(krp_rows));
    std::vector<Real> next;
    for (Index r = 0; r < cols; ++r) {
        // Build column r incrementally: kron of later modes onto earlier ones.
        Index len = dims[others[0]];
        for (Index i = 0; i < len; ++i) {
            krp[static_cast<std::size_t>(i)] = a[others[0]][static_cast<std::size_t>(i * cols + r)];
        }
        for (std::size_t t = 1; t < others.size(); ++t) {
            const std::size_t k = others[t];
            next.assign(static_cast<std::size_t>(len * dims[k]), 0.0);
            for (Index i = 0; i < dims[k]; ++i) {
                const Real v = a[k][static_cast<std::size_t>(i * cols + r)];
                for (Index j = 0; j < len; ++j) {
                    next[static_cast<std::size_t>(i * len + j)] = krp[static_cast<std::size_t>(j)] * v;
                }
            }
            len *= dims[k];
            counters.krp_multiplies += len;
            std::copy(next.begin(), next.end(), krp.begin());
        }
        // C(i_n, r) = sum_j X_(n)(i_n, j) * K(j, r).
        const std::vector<Index> zero(n_modes, 0);
        std::vector<Index> idx(n_modes, 0);
        do {
            Index off = 0;
            Index j = 0;
            Index jstride = 1;
            for (std::size_t k = 0; k < n_modes; ++k) {
                off += idx[k] * strides[k];
                if (k != mode) {
                    j += idx[k] * jstride;
                    jstride *= dims[k];
                }
            }
            c[static_cast<std::size_t>(idx[mode] * cols + r)] +=
                x[static_cast<std::size_t>(off)] * krp[static_cast<std::size_t>(j)];
        } while (next_index(idx, zero, dims));
        counters.matmul_flops += 2 * block;
    }
    return c;
}

inline ParResult run_parallel(const MttkrpProblem& problem, const ProcessorGrid& grid, const ParOptions& options,
                              bool gather_tensor) {
    const MttkrpShape shape = problem.shape();
    const DataDistribution dist(shape, grid);
    const std::size_t n_modes = shape.order();
    const std::size_t n = shape.mode;
    const Index procs = grid.size();

    ParResult result;
    result.output = FactorMatrix(shape.dims[n], shape.rank);
    CommLedger& ledger = result.ledger;
    ledger.processors.assign(static_cast<std::size_t>(procs), {});

    // Tensor: each fiber along grid dimension 0 assembles its block.
    std::vector<std::vector<Real>> xblock(static_cast<std::size_t>(procs));
    {
        CollectiveRecord rec{"all-gather", ArrayKind::Tensor, 0, grid.p0(), 0, 0, 0, 0, 0, 0};
        for (Index id = 0; id < procs; ++id) {
            if (grid.coords(id)[0] != 0) {
                continue;
            }
            const std::vector<Index> members = grid.rank_fiber(id);
            const std::vector<Real> block = tensor_block_values(problem.tensor(), dist, id);
            if (members.size() == 1) {
                xblock[static_cast<std::size_t>(id)] = block;
                continue;
            }
            if (!gather_tensor) {
                throw SimulatorBug("stationary run on a grid with P_0 > 1");
            }
            const auto parts = split_chunks(block, static_cast<Count>(members.size()));
            for (const auto& p : parts) {
                rec.max_part = std::max(rec.max_part, static_cast<Count>(p.size()));
            }
            AllGatherResult ag = bucket_allgather(parts);
            absorb(rec, ledger, members, ag.counts);
            for (std::size_t j = 0; j < members.size(); ++j) {
                xblock[static_cast<std::size_t>(members[j])] = std::move(ag.gathered[j]);
            }
        }
        if (rec.groups > 0) {
            ledger.collectives.push_back(rec);
        }
    }

    // Input factors: each mode-k hyperslice (fixed p_0, p_k) assembles its
    // block row.
    std::vector<std::vector<std::vector<Real>>> ablock(
        static_cast<std::size_t>(procs), std::vector<std::vector<Real>>(n_modes));
    for (std::size_t k = 0; k < n_modes; ++k) {
        if (k == n) {
            continue;
        }
        const Index q = procs / (grid.p0() * grid.mode_factor(k));
        CollectiveRecord rec{"all-gather", ArrayKind::Factor, k, q, 0, 0, 0, 0, 0, 0};
        for (Index id = 0; id < procs; ++id) {
            if (dist.hyperslice_rank(k, id) != 0) {
                continue;
            }
            const std::vector<Index> members = grid.mode_group(id, k);
            const std::vector<Real> block = matrix_block_values(problem.factor(k), dist, k, id);
            if (members.size() == 1) {
                ablock[static_cast<std::size_t>(id)][k] = block;
                continue;
            }
            const auto parts = split_chunks(block, static_cast<Count>(members.size()));
            for (const auto& p : parts) {
                rec.max_part = std::max(rec.max_part, static_cast<Count>(p.size()));
            }
            AllGatherResult ag = bucket_allgather(parts);
            absorb(rec, ledger, members, ag.counts);
            for (std::size_t j = 0; j < members.size(); ++j) {
                ablock[static_cast<std::size_t>(members[j])][k] = std::move(ag.gathered[j]);
            }
        }
        if (rec.groups > 0) {
            ledger.collectives.push_back(rec);
        }
    }

    // Local computation, round-robin over virtual processors.
    std::vector<std::vector<Real>> cblock(static_cast<std::size_t>(procs));
    for (Index id = 0; id < procs; ++id) {
        ProcessorCounters& counters = ledger.processors[static_cast<std::size_t>(id)];
        const auto c = grid.coords(id);
        cblock[static_cast<std::size_t>(id)] =
            local_mttkrp(xblock[static_cast<std::size_t>(id)], block_dims(dist, id),
                         ablock[static_cast<std::size_t>(id)], n, dist.cols().size(c[0]), options.arith, counters);
        counters.storage = dist.working_storage(id);
    }

    // Output: each mode-n hyperslice sums and scatters its block row.
    const Index qn = procs / (grid.p0() * grid.mode_factor(n));
    CollectiveRecord rec{"reduce-scatter", ArrayKind::Output, n, qn, 0, 0, 0, 0, 0, 0};
    for (Index id = 0; id < procs; ++id) {
        if (dist.hyperslice_rank(n, id) != 0) {
            continue;
        }
        const std::vector<Index> members = grid.mode_group(id, n);
        std::vector<std::vector<Real>> slices;
        if (members.size() == 1) {
            slices.push_back(std::move(cblock[static_cast<std::size_t>(id)]));
        } else {
            std::vector<std::vector<Real>> arrays;
            for (Index m : members) {
                arrays.push_back(std::move(cblock[static_cast<std::size_t>(m)]));
            }
            ReduceScatterResult rs = bucket_reduce_scatter(arrays);
            absorb(rec, ledger, members, rs.counts);
            slices = std::move(rs.slices);
            for (const auto& s : slices) {
                rec.max_part = std::max(rec.max_part, static_cast<Count>(s.size()));
            }
        }
        const auto c = grid.coords(id);
        const Index row_lo = dist.rows(n).begin(c[n + 1]);
        const Index col_lo = dist.cols().begin(c[0]);
        const Index cols = dist.cols().size(c[0]);
        const Count length = dist.matrix_block_words(n, id);
        for (std::size_t j = 0; j < slices.size(); ++j) {
            const Range r = balanced_chunk(length, static_cast<Count>(slices.size()), static_cast<Count>(j));
            for (Count f = r.begin; f < r.end; ++f) {
                const Index row = static_cast<Index>(f / cols);
                const Index col = static_cast<Index>(f % cols);
                result.output(row_lo + row, col_lo + col) = slices[j][static_cast<std::size_t>(f - r.begin)];
            }
        }
    }
    if (rec.groups > 0) {
        ledger.collectives.push_back(rec);
    }

    // Measured imbalance against the perfectly even I/P and sum_k I_k R / P.
    const Wide p = static_cast<Wide>(procs);
    const Wide i_over_p = static_cast<Wide>(shape.tensor_size()) / p;
    Wide dim_sum = 0.0L;
    for (Index d : shape.dims) {
        dim_sum += static_cast<Wide>(d);
    }
    const Wide matrix_even = dim_sum * static_cast<Wide>(shape.rank) / p;
    Count max_x = 0;
    Count max_m = 0;
    for (Index id = 0; id < procs; ++id) {
        max_x = std::max(max_x, dist.tensor_part(id).size());
        Count m = 0;
        for (std::size_t k = 0; k < n_modes; ++k) {
            m += dist.matrix_part(k, id).size();
        }
        max_m = std::max(max_m, m);
    }
    result.gamma = std::max(1.0L, static_cast<Wide>(max_x) / i_over_p);
    result.delta = matrix_even > 0.0L ? std::max(1.0L, static_cast<Wide>(max_m) / matrix_even) : 1.0L;
    return result;
}

}  // namespace detail

/// Stationary-tensor parallel MTTKRP: the tensor never moves; factor block
/// rows are all-gathered within mode hyperslices and the output is
/// reduce-scattered. `grid` must have P_0 = 1.
inline ParResult par_stationary_mttkrp(const MttkrpProblem& problem, const ProcessorGrid& grid,
                                       const ParOptions& options = {}) {
    if (grid.p0() != 1) {
        throw PlanningError("stationary algorithm needs P_0 = 1, got grid " + grid.to_string());
    }
    return detail::run_parallel(problem, grid, options, false);
}

/// General parallel MTTKRP over an (N+1)-way grid: tensor blocks are
/// all-gathered along the rank dimension, then each of the P_0 column
/// groups runs the stationary algorithm on its columns.
inline ParResult par_general_mttkrp(const MttkrpProblem& problem, const ProcessorGrid& grid,
                                    const ParOptions& options = {}) {
    return detail::run_parallel(problem, grid, options, true);
}

}  // namespace mttkrp
