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
#include <cstdio>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mttkrp/bounds.hpp"
#include "mttkrp/grid.hpp"
#include "mttkrp/sequential.hpp"

namespace mttkrp {

enum class ParAlgorithm { Stationary, General };

inline std::string to_string(ParAlgorithm alg) { return alg == ParAlgorithm::Stationary ? "stationary" : "general"; }

/// Largest b with b^N + N*b <= M.
inline Index choose_block_size(std::size_t order, Count memory) {
    if (memory < unblocked_min_capacity(order)) {
        throw InfeasibleMachine("M = " + to_string(memory) + " is below the minimum " +
                                to_string(unblocked_min_capacity(order)) + " for order " + std::to_string(order));
    }
    Index b = 1;
    while (blocked_footprint(order, b + 1) <= memory) {
        ++b;
    }
    return b;
}

/// Per-processor words the general algorithm moves on `grid` with the
/// balanced distribution. A bucket collective over an array of w words split
/// among q members costs each member w minus its own part, at most
/// w - floor(w/q); this is summed over the tensor gather, the N-1 factor
/// gathers and the output reduce-scatter, with w the largest block. Exact
/// when every block and part is even; an upper bound otherwise.
inline Count predicted_words(const MttkrpShape& shape, const ProcessorGrid& grid) {
    const std::size_t n_modes = shape.order();
    const Count p = grid.size();
    const Count p0 = grid.p0();
    auto bucket = [](Count w, Count q) { return w - w / q; };
    Count block = 1;
    for (std::size_t k = 0; k < n_modes; ++k) {
        block *= ceil_div(shape.dims[k], grid.mode_factor(k));
    }
    Count words = p0 > 1 ? bucket(block, p0) : 0;
    const Count cols = ceil_div(shape.rank, p0);
    for (std::size_t k = 0; k < n_modes; ++k) {
        const Count q = p / (p0 * grid.mode_factor(k));
        if (q > 1) {
            words += bucket(ceil_div(shape.dims[k], grid.mode_factor(k)) * cols, q);
        }
    }
    return words;
}

namespace detail {

inline std::vector<std::pair<Count, int>> factorize(Count p) {
    std::vector<std::pair<Count, int>> out;
    for (Count f = 2; f * f <= p; ++f) {
        int e = 0;
        while (p % f == 0) {
            p /= f;
            ++e;
        }
        if (e > 0) {
            out.emplace_back(f, e);
        }
    }
    if (p > 1) {
        out.emplace_back(p, 1);
    }
    return out;
}

inline std::vector<Count> divisors(Count p) {
    std::vector<Count> divs{1};
    for (auto [f, e] : factorize(p)) {
        const std::size_t base = divs.size();
        Count m = 1;
        for (int i = 0; i < e; ++i) {
            m *= f;
            for (std::size_t j = 0; j < base; ++j) {
                divs.push_back(divs[j] * m);
            }
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

/// Number of ordered factorizations of P into `slots` factors.
inline Wide factorization_count(Count p, std::size_t slots) {
    Wide total = 1.0L;
    for (auto [f, e] : factorize(p)) {
        // C(e + slots - 1, slots - 1)
        Wide c = 1.0L;
        for (std::size_t i = 1; i < slots; ++i) {
            c = c * static_cast<Wide>(e + static_cast<int>(i)) / static_cast<Wide>(i);
        }
        total *= c;
    }
    return total;
}

inline constexpr Wide kExhaustiveLimit = 2.0e6L;

}  // namespace detail

/// Continuous optimum of the grid for the general algorithm:
/// P_0 ~ (NR)^{N/(2N-1)} / (I/P)^{(N-1)/(2N-1)}, clamped to [1, min(P, R)],
/// and P_k ~ I_k / (I P_0 / P)^{1/N}.
inline std::vector<Wide> continuous_grid(const MttkrpShape& shape, Count p, ParAlgorithm alg) {
    const Wide n = static_cast<Wide>(shape.order());
    const Wide i = static_cast<Wide>(shape.tensor_size());
    const Wide r = static_cast<Wide>(shape.rank);
    const Wide pw = static_cast<Wide>(p);
    Wide p0 = 1.0L;
    if (alg == ParAlgorithm::General) {
        p0 = std::pow(n * r, n / (2.0L * n - 1.0L)) / std::pow(i / pw, (n - 1.0L) / (2.0L * n - 1.0L));
        p0 = std::clamp(p0, 1.0L, std::max(1.0L, std::min(pw, r)));
    }
    std::vector<Wide> out{p0};
    const Wide edge = std::pow(i * p0 / pw, 1.0L / n);
    for (Index d : shape.dims) {
        out.push_back(static_cast<Wide>(d) / edge);
    }
    return out;
}

/// Grid minimizing predicted_words among factorizations P = P_0 P_1 ... P_N
/// with P_k <= I_k and P_0 <= R (P_0 = 1 for the stationary algorithm). Ties
/// go to the lexicographically smallest (P_0, ..., P_N). When the number of
/// ordered factorizations exceeds two million, each factor is restricted
/// to the divisors nearest its continuous optimum.
inline ProcessorGrid choose_grid(const MttkrpShape& shape, Count p, ParAlgorithm alg) {
    shape.validate();
    if (p < 1) {
        throw PlanningError("processor count must be >= 1");
    }
    const std::size_t n_modes = shape.order();
    const std::vector<Count> divs = detail::divisors(p);
    const bool exhaustive = detail::factorization_count(p, n_modes + 1) <= detail::kExhaustiveLimit;

    // Allowed values per slot.
    std::vector<std::vector<Count>> allowed(n_modes + 1);
    const std::vector<Wide> target = continuous_grid(shape, p, alg);
    for (std::size_t d = 0; d <= n_modes; ++d) {
        const Count cap = d == 0 ? (alg == ParAlgorithm::Stationary ? 1 : std::max<Count>(1, shape.rank))
                                 : static_cast<Count>(shape.dims[d - 1]);
        std::vector<Count> vals;
        for (Count v : divs) {
            if (v <= cap) {
                vals.push_back(v);
            }
        }
        if (!exhaustive && vals.size() > 6) {
            std::vector<Count> sorted = vals;
            const Wide t = std::log(std::max(target[d], 1.0L));
            std::stable_sort(sorted.begin(), sorted.end(), [&](Count a, Count b) {
                return std::abs(std::log(static_cast<Wide>(a)) - t) < std::abs(std::log(static_cast<Wide>(b)) - t);
            });
            sorted.resize(6);
            std::sort(sorted.begin(), sorted.end());
            vals = sorted;
        }
        allowed[d] = vals;
    }

    std::optional<std::vector<Index>> best;
    Count best_words = 0;
    std::vector<Index> current(n_modes + 1, 1);
    // Depth-first in lexicographic order. The last slot takes what remains,
    // even off its shortlist, so a feasible grid is never missed.
    auto visit = [&](auto&& self, std::size_t d, Count remaining) -> void {
        if (d == n_modes) {
            const Count cap = static_cast<Count>(shape.dims[d - 1]);
            if (remaining > cap) {
                return;
            }
            current[d] = static_cast<Index>(remaining);
            const Count w = predicted_words(shape, ProcessorGrid(current));
            if (!best || w < best_words) {
                best = current;
                best_words = w;
            }
            return;
        }
        for (Count v : allowed[d]) {
            if (remaining % v != 0) {
                continue;
            }
            current[d] = static_cast<Index>(v);
            self(self, d + 1, remaining / v);
        }
    };
    visit(visit, 0, p);
    if (!best) {
        throw PlanningError("no processor grid for P = " + to_string(p) + " fits dims " + join_dims(shape.dims) +
                            " and R = " + std::to_string(shape.rank) + " (" + to_string(alg) + ")");
    }
    return ProcessorGrid(*best);
}

// ---------------------------------------------------------------------------
// Matrix-multiplication baseline: B^(n) = X_(n) * K with X_(n) of size
// m x k and K of size k x n_cols, m = I^{1/N}, k = I^{(N-1)/N}, n_cols = R.
// Forming K is not charged.

enum class MatmulModel {
    /// Recursive splitting of the largest dimension (CARMA-style); each
    /// split replicates the matrix not split across both halves.
    Recursive,
    /// Asymptotic per-regime costs for one, two and three large dimensions.
    Regime,
};

inline std::string to_string(MatmulModel m) { return m == MatmulModel::Recursive ? "recursive" : "regime"; }

struct MatmulDims {
    Wide m = 0.0L;
    Wide k = 0.0L;
    Wide n = 0.0L;
};

inline MatmulDims matmul_dims(const ProblemShape& shape) {
    shape.validate();
    if (!shape.cubical()) {
        throw ShapeError("matrix-multiplication baseline needs a cubical tensor, got dims " +
                         join_dims(shape.dims));
    }
    const Wide edge = static_cast<Wide>(shape.dims.front());
    return {edge, shape.tensor_size() / edge, static_cast<Wide>(shape.rank)};
}

/// Per-processor words of recursive splitting. At each step the current
/// group of P_cur processors is split by the smallest prime f of what is
/// left; the largest dimension (ties m, n, k) is divided by f and each
/// processor sends and receives (f-1)/P_cur of the replicated matrix.
inline Wide matmul_recursive_words(MatmulDims d, Count p) {
    Wide words = 0.0L;
    Count cur = p;
    while (cur > 1) {
        Count f = 2;
        while (cur % f != 0) {
            f = f * f > cur ? cur : f + 1;
        }
        const Wide fw = static_cast<Wide>(f);
        const Wide pc = static_cast<Wide>(cur);
        Wide shared = 0.0L;
        if (d.m >= d.n && d.m >= d.k) {
            shared = d.k * d.n;
            d.m /= fw;
        } else if (d.n >= d.k) {
            shared = d.m * d.k;
            d.n /= fw;
        } else {
            shared = d.m * d.n;
            d.k /= fw;
        }
        words += 2.0L * (fw - 1.0L) * shared / pc;
        cur /= f;
    }
    return words;
}

/// Per-regime asymptotic cost with sorted dims a >= b >= c:
/// bc while P <= a/b; c sqrt(ab/P) while P <= ab/c^2; (abc/P)^{2/3} beyond.
inline Wide matmul_regime_words(MatmulDims d, Count p) {
    if (p <= 1) {
        return 0.0L;
    }
    std::array<Wide, 3> s{d.m, d.k, d.n};
    std::sort(s.begin(), s.end(), std::greater<>());
    const Wide a = s[0];
    const Wide b = s[1];
    const Wide c = s[2];
    const Wide pw = static_cast<Wide>(p);
    if (pw <= a / b) {
        return b * c;
    }
    if (pw <= a * b / (c * c)) {
        return c * std::sqrt(a * b / pw);
    }
    return std::pow(a * b * c / pw, 2.0L / 3.0L);
}

inline Wide matmul_baseline_words(const ProblemShape& shape, Count p, MatmulModel model = MatmulModel::Recursive) {
    const MatmulDims d = matmul_dims(shape);
    return model == MatmulModel::Recursive ? matmul_recursive_words(d, p) : matmul_regime_words(d, p);
}

// ---------------------------------------------------------------------------

struct PlanResult {
    Count processors = 1;
    ProcessorGrid grid3;
    ProcessorGrid grid4;
    Count alg3_words = 0;
    Count alg4_words = 0;
    Wide mm_words = 0.0L;
    Bound lb_general;
    Bound lb_rect;
    std::optional<double> ratio3;
    std::optional<double> ratio4;
    std::optional<Index> block;  // when a memory size was given
};

inline PlanResult plan_parallel(const MttkrpShape& shape, Count p, MatmulModel model = MatmulModel::Recursive,
                                std::optional<Count> memory = std::nullopt) {
    PlanResult out;
    out.processors = p;
    out.grid3 = choose_grid(shape, p, ParAlgorithm::Stationary);
    out.grid4 = choose_grid(shape, p, ParAlgorithm::General);
    out.alg3_words = predicted_words(shape, out.grid3);
    out.alg4_words = predicted_words(shape, out.grid4);
    ProblemShape ps{shape.dims, std::max<Index>(shape.rank, 1), std::nullopt, p, 1.0L, 1.0L};
    out.mm_words = ps.cubical() ? matmul_baseline_words(ps, p, model) : 0.0L;
    out.lb_general = lb_par_memind_general(ps);
    out.lb_rect = lb_par_memind_rect(ps);
    if (out.alg3_words > 0) {
        out.ratio3 = optimality_ratio(ps, static_cast<Wide>(out.alg3_words), BoundKind::Parallel);
    }
    if (out.alg4_words > 0) {
        out.ratio4 = optimality_ratio(ps, static_cast<Wide>(out.alg4_words), BoundKind::Parallel);
    }
    if (memory) {
        out.block = choose_block_size(shape.order(), *memory);
    }
    return out;
}

struct SweepSpec {
    MttkrpShape shape;
    std::vector<Count> processors;
    MatmulModel matmul = MatmulModel::Recursive;

    void validate() const {
        shape.validate();
        if (shape.rank < 1) {
            throw InvalidProblem("sweep needs R >= 1");
        }
        for (Count p : processors) {
            if (p < 1) {
                throw InvalidProblem("sweep processor counts must be >= 1");
            }
        }
    }
};

/// I = 2^45 (I_k = 2^15, N = 3), R = 2^15, P = 2^0 .. 2^30.
inline SweepSpec fig3_spec() {
    SweepSpec spec;
    spec.shape = {{Index{1} << 15, Index{1} << 15, Index{1} << 15}, Index{1} << 15, 0};
    for (int e = 0; e <= 30; ++e) {
        spec.processors.push_back(Count{1} << e);
    }
    return spec;
}

inline std::vector<PlanResult> scaling_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<PlanResult> rows;
    rows.reserve(spec.processors.size());
    for (Count p : spec.processors) {
        rows.push_back(plan_parallel(spec.shape, p, spec.matmul));
    }
    return rows;
}

inline std::string format_wide(Wide v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6Lf", v);
    std::string s(buf);
    // Trim trailing zeros so integral values print as integers.
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') {
        s.pop_back();
    }
    return s;
}

inline constexpr const char* kSweepHeader = "P,alg3_words,alg4_words,mm_words,lb_memind,lb_rect,grid3,grid4,N,dims,R,mm_model";

inline void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<PlanResult>& rows) {
    os << kSweepHeader << '\n';
    for (const PlanResult& r : rows) {
        os << to_string(r.processors) << ',' << to_string(r.alg3_words) << ',' << to_string(r.alg4_words) << ','
           << format_wide(r.mm_words) << ',' << format_wide(r.lb_general.value) << ','
           << format_wide(r.lb_rect.value) << ',' << r.grid3.to_string() << ',' << r.grid4.to_string() << ','
           << spec.shape.order() << ',' << join_dims(spec.shape.dims) << ',' << spec.shape.rank << ','
           << to_string(spec.matmul) << '\n';
    }
}

/// Whitespace-separated columns for plotting tools.
inline void write_sweep_dat(std::ostream& os, const std::vector<PlanResult>& rows) {
    os << "# P alg3_words alg4_words mm_words lb_memind lb_rect\n";
    for (const PlanResult& r : rows) {
        os << to_string(r.processors) << ' ' << to_string(r.alg3_words) << ' ' << to_string(r.alg4_words) << ' '
           << format_wide(r.mm_words) << ' ' << format_wide(r.lb_general.value) << ' '
           << format_wide(r.lb_rect.value) << '\n';
    }
}

}  // namespace mttkrp
