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

#include "mttkrp/collectives.hpp"
#include "mttkrp/tensor.hpp"

namespace mttkrp {

/// Processor grid P = P_0 * P_1 * ... * P_N. P_0 splits the rank (column)
/// dimension and is 1 for the stationary algorithm; P_k splits tensor mode k.
/// Processor ids are column-major over (p_0, p_1, ..., p_N).
class ProcessorGrid {
  public:
    ProcessorGrid() = default;

    /// `factors` = {P_0, P_1, ..., P_N}.
    explicit ProcessorGrid(std::vector<Index> factors) : factors_(std::move(factors)) {
        if (factors_.size() < 3) {
            throw ShapeError("processor grid needs P_0 and at least two mode factors");
        }
        for (Index f : factors_) {
            if (f < 1) {
                throw ShapeError("processor grid factors must be >= 1, got " + join_dims(factors_));
            }
        }
        strides_.resize(factors_.size());
        Index stride = 1;
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            strides_[k] = stride;
            stride *= factors_[k];
        }
        size_ = stride;
    }

    /// Grid with P_0 = 1 over the given mode factors.
    static ProcessorGrid stationary(const std::vector<Index>& mode_factors) {
        std::vector<Index> f{1};
        f.insert(f.end(), mode_factors.begin(), mode_factors.end());
        return ProcessorGrid(std::move(f));
    }

    /// Parses `P0xP1x...xPN`.
    static ProcessorGrid parse(const std::string& text) {
        std::vector<Index> f;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t next = text.find('x', pos);
            const std::string tok = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            try {
                std::size_t used = 0;
                const long long v = std::stoll(tok, &used);
                if (used != tok.size()) {
                    throw std::invalid_argument(tok);
                }
                f.push_back(v);
            } catch (const std::logic_error&) {
                throw ShapeError("malformed processor grid '" + text + "', expected P0xP1x...xPN");
            }
            if (next == std::string::npos) {
                break;
            }
            pos = next + 1;
        }
        return ProcessorGrid(std::move(f));
    }

    std::size_t order() const { return factors_.size() - 1; }  // N
    Index size() const { return size_; }                       // P
    Index p0() const { return factors_[0]; }
    /// Factor along grid dimension d: d = 0 is P_0, d = k + 1 is mode k.
    Index factor(std::size_t d) const { return factors_[d]; }
    Index mode_factor(std::size_t k) const { return factors_[k + 1]; }
    const std::vector<Index>& factors() const { return factors_; }

    std::vector<Index> coords(Index id) const {
        std::vector<Index> c(factors_.size());
        for (std::size_t d = 0; d < factors_.size(); ++d) {
            c[d] = (id / strides_[d]) % factors_[d];
        }
        return c;
    }

    Index id(std::span<const Index> coords) const {
        Index out = 0;
        for (std::size_t d = 0; d < factors_.size(); ++d) {
            out += coords[d] * strides_[d];
        }
        return out;
    }

    /// Processors sharing every coordinate of `id` except those in grid
    /// dimensions `free`, ordered column-major over the free dimensions.
    std::vector<Index> group(Index id, const std::vector<std::size_t>& free) const {
        std::vector<Index> c = coords(id);
        for (std::size_t d : free) {
            c[d] = 0;
        }
        std::vector<Index> members;
        while (true) {
            members.push_back(this->id(c));
            std::size_t i = 0;
            for (; i < free.size(); ++i) {
                if (++c[free[i]] < factors_[free[i]]) {
                    break;
                }
                c[free[i]] = 0;
            }
            if (i == free.size()) {
                break;
            }
        }
        return members;
    }

    /// The hyperslice of mode k for the general algorithm: fixed p_0 and p_k.
    std::vector<Index> mode_group(Index id, std::size_t k) const {
        std::vector<std::size_t> free;
        for (std::size_t d = 1; d < factors_.size(); ++d) {
            if (d != k + 1) {
                free.push_back(d);
            }
        }
        return group(id, free);
    }

    /// The fiber along grid dimension 0: fixed p_1, ..., p_N.
    std::vector<Index> rank_fiber(Index id) const { return group(id, {0}); }

    std::string to_string() const { return join_dims(factors_); }

    friend bool operator==(const ProcessorGrid& a, const ProcessorGrid& b) { return a.factors_ == b.factors_; }

  private:
    std::vector<Index> factors_;
    std::vector<Index> strides_;
    Index size_ = 0;
};

/// Contiguous partition of [0, n) into `parts` blocks, the first (n mod parts)
/// one larger.
struct BlockPartition {
    Index n = 0;
    Index parts = 1;

    Range block(Index j) const { return balanced_chunk(n, parts, j); }
    Index begin(Index j) const { return static_cast<Index>(block(j).begin); }
    Index size(Index j) const { return static_cast<Index>(block(j).size()); }
    Index max_size() const { return static_cast<Index>(ceil_div(n, parts)); }
};

/// Which processor owns what, for the general algorithm's (N+1)-way grid
/// (the stationary distribution is the P_0 = 1 case).
///
/// Tensor: block X(S^(1)_{p_1}, ..., S^(N)_{p_N}) flattened column-major and
/// split in balanced contiguous chunks over the P_0 processors of its fiber.
/// Factors and output: block M(S^(k)_{p_k}, T_{p_0}) flattened row-major and
/// split in balanced contiguous chunks over the hyperslice with fixed
/// (p_0, p_k), ordered as ProcessorGrid::mode_group.
class DataDistribution {
  public:
    DataDistribution(const MttkrpShape& shape, const ProcessorGrid& grid) : shape_(shape), grid_(grid) {
        shape.validate();
        const std::size_t n_modes = shape.order();
        if (grid.order() != n_modes) {
            throw PlanningError("grid " + grid.to_string() + " has " + std::to_string(grid.order()) +
                                " mode factors for an order-" + std::to_string(n_modes) + " tensor");
        }
        for (std::size_t k = 0; k < n_modes; ++k) {
            if (grid.mode_factor(k) > shape.dims[k]) {
                throw PlanningError("grid factor P_" + std::to_string(k + 1) + " = " +
                                    std::to_string(grid.mode_factor(k)) + " exceeds I_" + std::to_string(k + 1) +
                                    " = " + std::to_string(shape.dims[k]));
            }
            rows_.push_back({shape.dims[k], grid.mode_factor(k)});
        }
        if (grid.p0() > 1 && grid.p0() > shape.rank) {
            throw PlanningError("grid factor P_0 = " + std::to_string(grid.p0()) + " exceeds R = " +
                                std::to_string(shape.rank));
        }
        cols_ = {shape.rank, grid.p0()};
    }

    const MttkrpShape& shape() const { return shape_; }
    const ProcessorGrid& grid() const { return grid_; }
    const BlockPartition& rows(std::size_t k) const { return rows_[k]; }
    const BlockPartition& cols() const { return cols_; }

    /// |X(S_{p_1}, ..., S_{p_N})| for processor `id`.
    Count tensor_block_words(Index id) const {
        const auto c = grid_.coords(id);
        Count w = 1;
        for (std::size_t k = 0; k < shape_.order(); ++k) {
            w *= rows_[k].size(c[k + 1]);
        }
        return w;
    }

    /// |S^(k)_{p_k}| * |T_{p_0}|.
    Count matrix_block_words(std::size_t k, Index id) const {
        const auto c = grid_.coords(id);
        return static_cast<Count>(rows_[k].size(c[k + 1])) * cols_.size(c[0]);
    }

    /// Processor `id`'s slice of its tensor block (flattened column-major).
    Range tensor_part(Index id) const {
        const auto c = grid_.coords(id);
        return balanced_chunk(tensor_block_words(id), grid_.p0(), c[0]);
    }

    /// Processor `id`'s slice of its mode-k matrix block (flattened row-major).
    Range matrix_part(std::size_t k, Index id) const {
        const Count q = grid_.size() / (grid_.p0() * grid_.mode_factor(k));
        return balanced_chunk(matrix_block_words(k, id), q, hyperslice_rank(k, id));
    }

    /// Position of `id` within its mode-k hyperslice.
    Index hyperslice_rank(std::size_t k, Index id) const {
        const auto c = grid_.coords(id);
        Index rank = 0;
        Index stride = 1;
        for (std::size_t d = 1; d < c.size(); ++d) {
            if (d == k + 1) {
                continue;
            }
            rank += c[d] * stride;
            stride *= grid_.factor(d);
        }
        return rank;
    }

    /// True when every tensor block, matrix block and collective part has
    /// the same size, so each processor moves exactly as many words.
    bool even() const {
        if (shape_.rank % grid_.p0() != 0) {
            return false;
        }
        Count block = 1;
        for (std::size_t k = 0; k < shape_.order(); ++k) {
            if (shape_.dims[k] % grid_.mode_factor(k) != 0) {
                return false;
            }
            block *= shape_.dims[k] / grid_.mode_factor(k);
        }
        if (block % grid_.p0() != 0) {
            return false;
        }
        for (std::size_t k = 0; k < shape_.order(); ++k) {
            const Count q = grid_.size() / (grid_.p0() * grid_.mode_factor(k));
            const Count words = static_cast<Count>(shape_.dims[k] / grid_.mode_factor(k)) * (shape_.rank / grid_.p0());
            if (words % q != 0) {
                return false;
            }
        }
        return true;
    }

    /// Words a processor holds while computing: its tensor block, every
    /// gathered factor block and the local output block.
    Count working_storage(Index id) const {
        Count w = tensor_block_words(id);
        for (std::size_t k = 0; k < shape_.order(); ++k) {
            w += matrix_block_words(k, id);
        }
        return w;
    }

  private:
    MttkrpShape shape_;
    ProcessorGrid grid_;
    std::vector<BlockPartition> rows_;
    BlockPartition cols_;
};

}  // namespace mttkrp
