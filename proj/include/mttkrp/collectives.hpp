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

#include "mttkrp/common.hpp"

namespace mttkrp {

/// Half-open range [begin, end) of a flattened index space.
struct Range {
    Count begin = 0;
    Count end = 0;

    Count size() const { return end - begin; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Part j of `total` items split into `parts` contiguous chunks, the first
/// (total mod parts) of them one larger.
inline Range balanced_chunk(Count total, Count parts, Count j) {
    const Count base = total / parts;
    const Count extra = total % parts;
    const Count begin = j * base + std::min(j, extra);
    return {begin, begin + base + (j < extra ? 1 : 0)};
}

/// Per-member word and addition counts of one collective.
struct CollectiveCounts {
    std::vector<Count> sent;
    std::vector<Count> received;
    std::vector<Count> additions;

    explicit CollectiveCounts(std::size_t q = 0) : sent(q, 0), received(q, 0), additions(q, 0) {}
};

struct AllGatherResult {
    std::vector<std::vector<Real>> gathered;  // every member's concatenation
    CollectiveCounts counts;
};

/// Bucket (ring) All-Gather among q = parts.size() members.
///
/// At step s = 0..q-2, member j passes part (j + s) mod q to member j - 1.
/// After q - 1 steps every member holds all parts, concatenated in member
/// order.
inline AllGatherResult bucket_allgather(const std::vector<std::vector<Real>>& parts) {
    const std::size_t q = parts.size();
    AllGatherResult out;
    out.counts = CollectiveCounts(q);
    if (q == 0) {
        return out;
    }
    // held[j][i]: member j's copy of part i (empty until received).
    std::vector<std::vector<std::vector<Real>>> held(q, std::vector<std::vector<Real>>(q));
    std::vector<std::vector<bool>> has(q, std::vector<bool>(q, false));
    for (std::size_t j = 0; j < q; ++j) {
        held[j][j] = parts[j];
        has[j][j] = true;
    }
    for (std::size_t s = 0; s + 1 < q; ++s) {
        for (std::size_t j = 0; j < q; ++j) {
            const std::size_t part = (j + s) % q;
            const std::size_t dest = (j + q - 1) % q;
            if (!has[j][part] || has[dest][part]) {
                throw SimulatorBug("bucket all-gather schedule out of order");
            }
            held[dest][part] = held[j][part];
            has[dest][part] = true;
            const Count w = static_cast<Count>(held[j][part].size());
            out.counts.sent[j] += w;
            out.counts.received[dest] += w;
        }
    }
    out.gathered.resize(q);
    for (std::size_t j = 0; j < q; ++j) {
        for (std::size_t i = 0; i < q; ++i) {
            out.gathered[j].insert(out.gathered[j].end(), held[j][i].begin(), held[j][i].end());
        }
    }
    return out;
}

/// Word counts of bucket_allgather for the given part sizes, without data.
inline CollectiveCounts bucket_allgather_counts(const std::vector<Count>& part_sizes) {
    const std::size_t q = part_sizes.size();
    CollectiveCounts counts(q);
    for (std::size_t s = 0; s + 1 < q; ++s) {
        for (std::size_t j = 0; j < q; ++j) {
            const Count w = part_sizes[(j + s) % q];
            counts.sent[j] += w;
            counts.received[(j + q - 1) % q] += w;
        }
    }
    return counts;
}

struct ReduceScatterResult {
    std::vector<std::vector<Real>> slices;  // member j's slice of the sum
    CollectiveCounts counts;
};

/// Bucket (ring) Reduce-Scatter among q = arrays.size() members.
///
/// The sum is split into balanced contiguous slices, member j owning slice j.
/// At step s = 0..q-2, member j passes its running partial sum of slice
/// (j + s + 1) mod q to member j - 1, which adds it to its own values. The
/// partial sum of slice m starts at member m + 1 and ends, complete, at m.
inline ReduceScatterResult bucket_reduce_scatter(const std::vector<std::vector<Real>>& arrays) {
    const std::size_t q = arrays.size();
    ReduceScatterResult out;
    out.counts = CollectiveCounts(q);
    if (q == 0) {
        return out;
    }
    const std::size_t length = arrays.front().size();
    for (const auto& a : arrays) {
        if (a.size() != length) {
            throw DistributionError("reduce-scatter arrays differ in length: " + std::to_string(a.size()) +
                                    " vs " + std::to_string(length));
        }
    }
    std::vector<std::vector<Real>> acc = arrays;
    for (std::size_t s = 0; s + 1 < q; ++s) {
        // Every member sends before anyone adds: copy the outgoing slices.
        std::vector<std::vector<Real>> outgoing(q);
        std::vector<Range> ranges(q);
        for (std::size_t j = 0; j < q; ++j) {
            const std::size_t slice = (j + s + 1) % q;
            ranges[j] = balanced_chunk(static_cast<Count>(length), static_cast<Count>(q), static_cast<Count>(slice));
            outgoing[j].assign(acc[j].begin() + static_cast<std::ptrdiff_t>(ranges[j].begin),
                               acc[j].begin() + static_cast<std::ptrdiff_t>(ranges[j].end));
        }
        for (std::size_t j = 0; j < q; ++j) {
            const std::size_t dest = (j + q - 1) % q;
            const Count w = ranges[j].size();
            for (Count i = 0; i < w; ++i) {
                acc[dest][static_cast<std::size_t>(ranges[j].begin + i)] += outgoing[j][static_cast<std::size_t>(i)];
            }
            out.counts.sent[j] += w;
            out.counts.received[dest] += w;
            out.counts.additions[dest] += w;
        }
    }
    out.slices.resize(q);
    for (std::size_t j = 0; j < q; ++j) {
        const Range r = balanced_chunk(static_cast<Count>(length), static_cast<Count>(q), static_cast<Count>(j));
        out.slices[j].assign(acc[j].begin() + static_cast<std::ptrdiff_t>(r.begin),
                             acc[j].begin() + static_cast<std::ptrdiff_t>(r.end));
    }
    return out;
}

/// Word and addition counts of bucket_reduce_scatter for arrays of
/// `length` words among q members, without data.
inline CollectiveCounts bucket_reduce_scatter_counts(Count length, std::size_t q) {
    CollectiveCounts counts(q);
    for (std::size_t s = 0; s + 1 < q; ++s) {
        for (std::size_t j = 0; j < q; ++j) {
            const Count w = balanced_chunk(length, static_cast<Count>(q), static_cast<Count>((j + s + 1) % q)).size();
            const std::size_t dest = (j + q - 1) % q;
            counts.sent[j] += w;
            counts.received[dest] += w;
            counts.additions[dest] += w;
        }
    }
    return counts;
}

}  // namespace mttkrp
