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

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mttkrp/common.hpp"

namespace mttkrp {

enum class ArrayKind : std::uint8_t { Tensor, Factor, Output };

inline constexpr std::size_t kMaxRegionRank = 16;

/// Symbolic slow-memory address range: one array plus a half-open box of
/// indices. A single element is a unit box. The machine never sees raw
/// offsets, only these names.
struct Region {
    ArrayKind kind = ArrayKind::Tensor;
    std::uint32_t mode = 0;
    std::uint32_t rank = 0;
    std::array<Index, kMaxRegionRank> lo{};
    std::array<Index, kMaxRegionRank> hi{};

    static Region tensor_box(std::span<const Index> lo, std::span<const Index> hi) {
        if (lo.size() > kMaxRegionRank) {
            throw InvalidInput("tensor order exceeds " + std::to_string(kMaxRegionRank));
        }
        Region r;
        r.kind = ArrayKind::Tensor;
        r.rank = static_cast<std::uint32_t>(lo.size());
        for (std::size_t k = 0; k < lo.size(); ++k) {
            r.lo[k] = lo[k];
            r.hi[k] = hi[k];
        }
        return r;
    }

    static Region tensor_element(std::span<const Index> idx) {
        Region r = tensor_box(idx, idx);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            r.hi[k] = idx[k] + 1;
        }
        return r;
    }

    /// Rows [row_lo, row_hi) of column `col` of a factor (or the output).
    static Region matrix_segment(ArrayKind kind, std::size_t mode, Index row_lo, Index row_hi, Index col) {
        Region r;
        r.kind = kind;
        r.mode = static_cast<std::uint32_t>(mode);
        r.rank = 2;
        r.lo[0] = row_lo;
        r.hi[0] = row_hi;
        r.lo[1] = col;
        r.hi[1] = col + 1;
        return r;
    }

    static Region matrix_element(ArrayKind kind, std::size_t mode, Index row, Index col) {
        return matrix_segment(kind, mode, row, row + 1, col);
    }

    Count words() const {
        Count w = 1;
        for (std::uint32_t k = 0; k < rank; ++k) {
            w *= hi[k] - lo[k];
        }
        return w;
    }

    bool same_array(const Region& other) const {
        return kind == other.kind && mode == other.mode && rank == other.rank;
    }

    bool overlaps(const Region& other) const {
        if (!same_array(other)) {
            return false;
        }
        for (std::uint32_t k = 0; k < rank; ++k) {
            if (hi[k] <= other.lo[k] || other.hi[k] <= lo[k]) {
                return false;
            }
        }
        return true;
    }

    bool operator==(const Region& other) const {
        if (!same_array(other)) {
            return false;
        }
        for (std::uint32_t k = 0; k < rank; ++k) {
            if (lo[k] != other.lo[k] || hi[k] != other.hi[k]) {
                return false;
            }
        }
        return true;
    }
};

inline std::string describe(const Region& region) {
    std::string out = region.kind == ArrayKind::Tensor ? "X" : region.kind == ArrayKind::Factor ? "A" : "B";
    if (region.kind != ArrayKind::Tensor) {
        out += "(" + std::to_string(region.mode + 1) + ")";
    }
    out += "[";
    for (std::uint32_t k = 0; k < region.rank; ++k) {
        if (k != 0) {
            out += ",";
        }
        out += std::to_string(region.lo[k]) + ":" + std::to_string(region.hi[k]);
    }
    return out + "]";
}

/// Traffic and arithmetic counters of one sequential run.
struct CostLedger {
    Count loads = 0;
    Count stores = 0;
    Count nary_multiplies = 0;
    Count additions = 0;

    Count communication() const { return loads + stores; }

    friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

struct MachineOptions {
    /// Inputs may start, and outputs may end, in fast memory. Modeled as a
    /// credit of up to M loads and up to M stores on the reported ledger.
    bool warm_start = false;
};

/// Two-level memory: fast memory of `capacity` words over an unbounded slow
/// memory. Algorithms drive residency explicitly; the machine only audits
/// that the declared traffic respects capacity and counts it.
class MemoryMachine {
  public:
    explicit MemoryMachine(Count capacity, MachineOptions options = {}) : capacity_(capacity), options_(options) {
        if (capacity <= 0) {
            throw InfeasibleMachine("fast memory capacity must be positive");
        }
    }

    Count capacity() const { return capacity_; }
    Count resident_words() const { return resident_words_; }
    Count peak_resident_words() const { return peak_words_; }
    const MachineOptions& options() const { return options_; }

    void load(const Region& region) {
        const Count w = region.words();
        if (resident_words_ + w > capacity_) {
            throw CapacityViolation("loading " + describe(region) + " (" + to_string(w) + " words) with " +
                                    to_string(resident_words_) + " of " + to_string(capacity_) +
                                    " words resident");
        }
        for (const Region& r : resident_) {
            if (r.overlaps(region)) {
                throw SimulatorBug("load of " + describe(region) + " overlaps resident " + describe(r));
            }
        }
        resident_.push_back(region);
        resident_words_ += w;
        peak_words_ = std::max(peak_words_, resident_words_);
        ledger_.loads += w;
    }

    /// Removes `region` from fast memory, writing it back when dirty.
    void evict(const Region& region, bool dirty) {
        for (std::size_t i = 0; i < resident_.size(); ++i) {
            if (resident_[i] == region) {
                const Count w = region.words();
                resident_[i] = resident_.back();
                resident_.pop_back();
                resident_words_ -= w;
                if (dirty) {
                    ledger_.stores += w;
                }
                return;
            }
        }
        throw SimulatorBug("evicting non-resident " + describe(region));
    }

    void store(const Region& region) { evict(region, true); }

    void record_nary(Count count) { ledger_.nary_multiplies += count; }
    void record_additions(Count count) { ledger_.additions += count; }

    bool is_resident(const Region& region) const {
        return std::find(resident_.begin(), resident_.end(), region) != resident_.end();
    }

    /// Raw counters, without any warm-start credit.
    const CostLedger& raw_ledger() const { return ledger_; }

    /// Counters as reported: raw unless warm start is on.
    CostLedger ledger() const {
        CostLedger out = ledger_;
        if (options_.warm_start) {
            out.loads -= std::min(out.loads, capacity_);
            out.stores -= std::min(out.stores, capacity_);
        }
        return out;
    }

  private:
    Count capacity_;
    MachineOptions options_;
    std::vector<Region> resident_;
    Count resident_words_ = 0;
    Count peak_words_ = 0;
    CostLedger ledger_;
};

/// `alg,N,dims,R,M,b,loads,stores,nary,adds`
struct LedgerRow {
    std::string algorithm;
    std::vector<Index> dims;
    Index rank = 0;
    Count capacity = 0;
    Index block = 0;  // 0 for the unblocked algorithm
    CostLedger ledger;

    static constexpr const char* kHeader = "alg,N,dims,R,M,b,loads,stores,nary,adds";

    friend std::ostream& operator<<(std::ostream& os, const LedgerRow& row) {
        os << row.algorithm << ',' << row.dims.size() << ',' << join_dims(row.dims) << ',' << row.rank << ','
           << to_string(row.capacity) << ',' << (row.block == 0 ? std::string("-") : std::to_string(row.block))
           << ',' << to_string(row.ledger.loads) << ',' << to_string(row.ledger.stores) << ','
           << to_string(row.ledger.nary_multiplies) << ',' << to_string(row.ledger.additions);
        return os;
    }
};

}  // namespace mttkrp
