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

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mttkrp/common.hpp"
#include "mttkrp/random.hpp"

namespace mttkrp {

/// N-way dense tensor in generalized column-major order: mode 0 varies
/// fastest, so entry (i_0, ..., i_{N-1}) lives at sum_k i_k * stride_k with
/// stride_0 = 1 and stride_k = stride_{k-1} * dims[k-1].
class DenseTensor {
  public:
    DenseTensor() = default;

    explicit DenseTensor(std::vector<Index> dims) : DenseTensor(dims, std::vector<Real>{}) {}

    DenseTensor(std::vector<Index> dims, std::vector<Real> values) : dims_(std::move(dims)) {
        if (dims_.size() < 2) {
            throw InvalidProblem("tensor order must be at least 2, got " + std::to_string(dims_.size()));
        }
        for (Index d : dims_) {
            if (d <= 0) {
                throw InvalidProblem("tensor dimensions must be positive: " + join_dims(dims_));
            }
        }
        strides_.resize(dims_.size());
        Index stride = 1;
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            strides_[k] = stride;
            stride *= dims_[k];
        }
        if (values.empty()) {
            values.assign(static_cast<std::size_t>(stride), 0.0);
        }
        if (static_cast<Index>(values.size()) != stride) {
            throw InvalidProblem("tensor of dims " + join_dims(dims_) + " needs " + std::to_string(stride) +
                                 " values, got " + std::to_string(values.size()));
        }
        values_ = std::move(values);
    }

    std::size_t order() const { return dims_.size(); }
    const std::vector<Index>& dims() const { return dims_; }
    Index dim(std::size_t k) const { return dims_[k]; }
    Index size() const { return static_cast<Index>(values_.size()); }
    std::span<const Real> values() const { return values_; }
    std::span<Real> values() { return values_; }
    const std::vector<Index>& strides() const { return strides_; }

    Index linear_index(std::span<const Index> idx) const {
        Index offset = 0;
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            offset += idx[k] * strides_[k];
        }
        return offset;
    }

    Real operator()(std::span<const Index> idx) const { return values_[linear_index(idx)]; }
    Real& operator()(std::span<const Index> idx) { return values_[linear_index(idx)]; }

  private:
    std::vector<Index> dims_;
    std::vector<Index> strides_;
    std::vector<Real> values_;
};

/// Dense rows x cols matrix, row-major.
class FactorMatrix {
  public:
    FactorMatrix() = default;

    FactorMatrix(Index rows, Index cols) : FactorMatrix(rows, cols, {}) {}

    FactorMatrix(Index rows, Index cols, std::vector<Real> values) : rows_(rows), cols_(cols) {
        if (rows <= 0 || cols < 0) {
            throw InvalidProblem("factor matrix must have positive rows and non-negative cols");
        }
        if (values.empty()) {
            values.assign(static_cast<std::size_t>(rows * cols), 0.0);
        }
        if (static_cast<Index>(values.size()) != rows * cols) {
            throw InvalidProblem("factor matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                                 " given " + std::to_string(values.size()) + " values");
        }
        values_ = std::move(values);
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    std::span<const Real> values() const { return values_; }
    std::span<Real> values() { return values_; }

    Real operator()(Index row, Index col) const { return values_[static_cast<std::size_t>(row * cols_ + col)]; }
    Real& operator()(Index row, Index col) { return values_[static_cast<std::size_t>(row * cols_ + col)]; }

    friend bool operator==(const FactorMatrix&, const FactorMatrix&) = default;

  private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Real> values_;
};

/// Dimensions, rank and output mode of an MTTKRP instance, without data.
/// Trace-only simulations and all cost formulas work from this.
struct MttkrpShape {
    std::vector<Index> dims;
    Index rank = 0;
    std::size_t mode = 0;  // 0-based

    std::size_t order() const { return dims.size(); }
    Count tensor_size() const { return product(dims); }

    void validate() const {
        if (dims.size() < 2) {
            throw InvalidProblem("MTTKRP needs a tensor of order >= 2");
        }
        for (Index d : dims) {
            if (d <= 0) {
                throw InvalidProblem("tensor dimensions must be positive: " + join_dims(dims));
            }
        }
        if (rank < 0) {
            throw InvalidProblem("rank must be non-negative");
        }
        if (mode >= dims.size()) {
            throw InvalidProblem("mode " + std::to_string(mode + 1) + " out of range for order " +
                                 std::to_string(dims.size()));
        }
    }
};

/// Tensor plus the N-1 input factor matrices. `factors` holds the matrices
/// for modes 0..N-1 in increasing order with `mode` skipped.
class MttkrpProblem {
  public:
    MttkrpProblem(DenseTensor tensor, std::vector<FactorMatrix> factors, std::size_t mode, Index rank)
        : tensor_(std::move(tensor)), factors_(std::move(factors)), mode_(mode), rank_(rank) {
        const std::size_t n_modes = tensor_.order();
        if (mode_ >= n_modes) {
            throw InvalidProblem("mode " + std::to_string(mode_ + 1) + " out of range for order " +
                                 std::to_string(n_modes));
        }
        if (rank_ < 0) {
            throw InvalidProblem("rank must be non-negative");
        }
        if (factors_.size() != n_modes - 1) {
            throw InvalidProblem("expected " + std::to_string(n_modes - 1) + " factor matrices, got " +
                                 std::to_string(factors_.size()));
        }
        for (std::size_t k = 0; k < n_modes; ++k) {
            if (k == mode_) {
                continue;
            }
            const FactorMatrix& a = factor(k);
            if (a.rows() != tensor_.dim(k) || a.cols() != rank_) {
                throw InvalidProblem("factor for mode " + std::to_string(k + 1) + " is " +
                                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ", expected " +
                                     std::to_string(tensor_.dim(k)) + "x" + std::to_string(rank_));
            }
        }
    }

    const DenseTensor& tensor() const { return tensor_; }
    std::size_t mode() const { return mode_; }
    Index rank() const { return rank_; }
    std::size_t order() const { return tensor_.order(); }
    const std::vector<FactorMatrix>& factors() const { return factors_; }

    const FactorMatrix& factor(std::size_t k) const {
        if (k == mode_) {
            throw InvalidProblem("no input factor for the output mode");
        }
        return factors_[k < mode_ ? k : k - 1];
    }

    MttkrpShape shape() const { return {tensor_.dims(), rank_, mode_}; }

  private:
    DenseTensor tensor_;
    std::vector<FactorMatrix> factors_;
    std::size_t mode_;
    Index rank_;
};

/// Fills tensor values first (linear order), then each input factor
/// row-major in increasing mode order, all uniform in [-1, 1).
inline MttkrpProblem make_synthetic_problem(const MttkrpShape& shape, std::uint64_t seed) {
    shape.validate();
    Xorshift64Star rng(seed);
    DenseTensor tensor(shape.dims);
    for (Real& v : tensor.values()) {
        v = rng.uniform_symmetric();
    }
    std::vector<FactorMatrix> factors;
    for (std::size_t k = 0; k < shape.dims.size(); ++k) {
        if (k == shape.mode) {
            continue;
        }
        FactorMatrix a(shape.dims[k], shape.rank);
        for (Real& v : a.values()) {
            v = rng.uniform_symmetric();
        }
        factors.push_back(std::move(a));
    }
    return MttkrpProblem(std::move(tensor), std::move(factors), shape.mode, shape.rank);
}

/// Advances a column-major multi-index over `dims`; returns false on wrap.
inline bool next_index(std::span<Index> idx, std::span<const Index> lo, std::span<const Index> hi) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (++idx[k] < hi[k]) {
            return true;
        }
        idx[k] = lo[k];
    }
    return false;
}

/// Advances a multi-index lexicographically, last mode fastest.
inline bool next_index_lex(std::span<Index> idx, std::span<const Index> lo, std::span<const Index> hi) {
    for (std::size_t k = idx.size(); k-- > 0;) {
        if (++idx[k] < hi[k]) {
            return true;
        }
        idx[k] = lo[k];
    }
    return false;
}

/// Largest elementwise |a - b| relative to max |b| (or absolute when b is 0).
inline double max_relative_error(const FactorMatrix& got, const FactorMatrix& want) {
    if (got.rows() != want.rows() || got.cols() != want.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    double scale = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < want.values().size(); ++i) {
        scale = std::max(scale, std::abs(want.values()[i]));
        diff = std::max(diff, std::abs(got.values()[i] - want.values()[i]));
    }
    return scale == 0.0 ? diff : diff / scale;
}

}  // namespace mttkrp
