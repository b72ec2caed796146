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

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mttkrp/common.hpp"

namespace mttkrp {

/// Bounds are evaluated in extended precision: at I ~ 2^45 the leading and
/// subtracted terms differ by many orders of magnitude.
using Wide = long double;

/// Problem and machine parameters a bound depends on. `memory` is the fast
/// (sequential) or local (parallel) memory size; `processors` is P.
struct ProblemShape {
    std::vector<Index> dims;
    Index rank = 1;
    std::optional<Count> memory;
    std::optional<Count> processors;
    Wide gamma = 1.0L;
    Wide delta = 1.0L;

    std::size_t order() const { return dims.size(); }

    Wide tensor_size() const {
        Wide i = 1.0L;
        for (Index d : dims) {
            i *= static_cast<Wide>(d);
        }
        return i;
    }

    Wide dim_sum() const {
        Wide s = 0.0L;
        for (Index d : dims) {
            s += static_cast<Wide>(d);
        }
        return s;
    }

    bool cubical() const {
        return std::all_of(dims.begin(), dims.end(), [&](Index d) { return d == dims.front(); });
    }

    void validate() const {
        if (dims.size() < 2) {
            throw ShapeError("bounds need a tensor of order >= 2");
        }
        for (Index d : dims) {
            if (d <= 0) {
                throw ShapeError("tensor dimensions must be positive");
            }
        }
        if (rank <= 0) {
            throw ShapeError("rank must be positive");
        }
        if (memory && *memory <= 0) {
            throw ShapeError("memory size must be positive");
        }
        if (processors && *processors <= 0) {
            throw ShapeError("processor count must be positive");
        }
        if (!(gamma >= 1.0L) || !(delta >= 1.0L)) {
            throw ShapeError("balance constants gamma and delta must be >= 1");
        }
    }
};

/// A lower bound as evaluated (`raw`, possibly negative) and as reported
/// (`value`, clamped at zero).
struct Bound {
    Wide raw = 0.0L;
    Wide value = 0.0L;

    static Bound of(Wide raw_value) { return {raw_value, raw_value > 0.0L ? raw_value : 0.0L}; }
};

namespace detail {

inline Count require_memory(const ProblemShape& shape) {
    if (!shape.memory) {
        throw ShapeError("bound requires a memory size M");
    }
    return *shape.memory;
}

inline Count require_processors(const ProblemShape& shape) {
    if (!shape.processors) {
        throw ShapeError("bound requires a processor count P");
    }
    return *shape.processors;
}

}  // namespace detail

/// Memory-dependent sequential bound NIR / (3^(2-1/N) M^(1-1/N)) - M.
inline Bound lb_seq_memdep(const ProblemShape& shape) {
    shape.validate();
    const Wide m = static_cast<Wide>(detail::require_memory(shape));
    const Wide n = static_cast<Wide>(shape.order());
    const Wide nir = n * shape.tensor_size() * static_cast<Wide>(shape.rank);
    return Bound::of(nir / (std::pow(3.0L, 2.0L - 1.0L / n) * std::pow(m, 1.0L - 1.0L / n)) - m);
}

/// Every input and output word crosses once, less what fits at either end:
/// I + sum_k I_k R - 2M.
inline Bound lb_seq_trivial(const ProblemShape& shape) {
    shape.validate();
    const Wide m = static_cast<Wide>(detail::require_memory(shape));
    return Bound::of(shape.tensor_size() + shape.dim_sum() * static_cast<Wide>(shape.rank) - 2.0L * m);
}

/// Parallel memory-dependent bound: the sequential bound applied to the
/// processor holding IR/P iterations.
inline Bound lb_par_memdep(const ProblemShape& shape) {
    shape.validate();
    const Wide m = static_cast<Wide>(detail::require_memory(shape));
    const Wide p = static_cast<Wide>(detail::require_processors(shape));
    const Wide n = static_cast<Wide>(shape.order());
    const Wide nir = n * shape.tensor_size() * static_cast<Wide>(shape.rank);
    return Bound::of(nir / (p * std::pow(3.0L, 2.0L - 1.0L / n) * std::pow(m, 1.0L - 1.0L / n)) - m);
}

/// 2 (NIR/P)^(N/(2N-1)) - gamma I/P - delta sum_k I_k R / P.
inline Bound lb_par_memind_general(const ProblemShape& shape) {
    shape.validate();
    const Wide p = static_cast<Wide>(detail::require_processors(shape));
    const Wide n = static_cast<Wide>(shape.order());
    const Wide i = shape.tensor_size();
    const Wide r = static_cast<Wide>(shape.rank);
    const Wide lead = 2.0L * std::pow(n * i * r / p, n / (2.0L * n - 1.0L));
    return Bound::of(lead - shape.gamma * i / p - shape.delta * shape.dim_sum() * r / p);
}

/// min( sqrt(2/(3 gamma)) N R (I/P)^(1/N) - delta sum_j I_j R / P,
///      gamma I / (2P) ).
inline Bound lb_par_memind_rect(const ProblemShape& shape) {
    shape.validate();
    const Wide p = static_cast<Wide>(detail::require_processors(shape));
    const Wide n = static_cast<Wide>(shape.order());
    const Wide i = shape.tensor_size();
    const Wide r = static_cast<Wide>(shape.rank);
    const Wide factor_branch = std::sqrt(2.0L / (3.0L * shape.gamma)) * n * r * std::pow(i / p, 1.0L / n) -
                               shape.delta * shape.dim_sum() * r / p;
    const Wide tensor_branch = shape.gamma * i / (2.0L * p);
    return Bound::of(std::min(factor_branch, tensor_branch));
}

enum class ParallelRegime { FactorDominated, TensorDominated };

/// Cubical-tensor combination of the two memory-independent bounds. The
/// regime is decided by NR against (I/P)^(1-1/N); `selected` is the bound
/// that dominates in that regime, and both raw bounds are kept.
struct CombinedBound {
    ParallelRegime regime = ParallelRegime::FactorDominated;
    Bound selected;
    Bound general;
    Bound rect;
    Wide threshold = 0.0L;  // (I/P)^(1-1/N)
};

inline CombinedBound lb_par_combined(const ProblemShape& shape) {
    shape.validate();
    if (!shape.cubical()) {
        throw ShapeError("combined parallel bound requires a cubical tensor, got dims " + join_dims(shape.dims));
    }
    const Wide p = static_cast<Wide>(detail::require_processors(shape));
    const Wide n = static_cast<Wide>(shape.order());
    CombinedBound out;
    out.general = lb_par_memind_general(shape);
    out.rect = lb_par_memind_rect(shape);
    out.threshold = std::pow(shape.tensor_size() / p, 1.0L - 1.0L / n);
    if (n * static_cast<Wide>(shape.rank) >= out.threshold) {
        out.regime = ParallelRegime::TensorDominated;
        out.selected = out.general;
    } else {
        out.regime = ParallelRegime::FactorDominated;
        out.selected = out.rect;
    }
    return out;
}

/// Everything applicable to `shape`: sequential bounds need M, parallel
/// ones need P, and the combined bound needs a cubical tensor.
struct BoundsReport {
    ProblemShape shape;
    std::optional<Bound> seq_mem_dependent;
    std::optional<Bound> seq_trivial;
    std::optional<Bound> par_mem_dependent;
    std::optional<Bound> par_mem_independent_general;
    std::optional<Bound> par_mem_independent_rect;
    std::optional<CombinedBound> par_combined;
};

inline BoundsReport evaluate_bounds(const ProblemShape& shape) {
    shape.validate();
    BoundsReport report{shape, {}, {}, {}, {}, {}, {}};
    if (shape.memory) {
        report.seq_mem_dependent = lb_seq_memdep(shape);
        report.seq_trivial = lb_seq_trivial(shape);
    }
    if (shape.processors) {
        if (shape.memory) {
            report.par_mem_dependent = lb_par_memdep(shape);
        }
        report.par_mem_independent_general = lb_par_memind_general(shape);
        report.par_mem_independent_rect = lb_par_memind_rect(shape);
        if (shape.cubical()) {
            report.par_combined = lb_par_combined(shape);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Lemmas behind the bounds.

/// Constraint matrix of the MTTKRP loop nest: rows are the loop indices
/// (i_1..i_N, r), columns the arrays (N factor matrices, then the tensor).
/// Entry (i, j) is 1 when array j is indexed by loop index i.
inline std::vector<std::vector<int>> hbl_delta(std::size_t order) {
    const std::size_t d = order + 1;
    std::vector<std::vector<int>> delta(d, std::vector<int>(d, 0));
    for (std::size_t k = 0; k < order; ++k) {
        delta[k][k] = 1;          // factor k is indexed by i_k
        delta[k][order] = 1;      // the tensor is indexed by every i_k
        delta[order][k] = 1;      // every factor is indexed by r
    }
    return delta;
}

struct LpSolution {
    std::vector<Wide> s;
    Wide objective = 0.0L;
};

/// Optimum of min 1^T s subject to Delta s >= 1, s >= 0:
/// s* = (1/N, ..., 1/N, 1 - 1/N) with objective 2 - 1/N.
inline LpSolution lemma_lp_solution(std::size_t order) {
    if (order < 2) {
        throw DomainError("LP solution defined for N >= 2");
    }
    const Wide n = static_cast<Wide>(order);
    LpSolution out;
    out.s.assign(order, 1.0L / n);
    out.s.push_back(1.0L - 1.0L / n);
    out.objective = 2.0L - 1.0L / n;
    return out;
}

/// max prod x_j^{s_j} subject to sum x_j <= c, x >= 0, for s > 0:
/// c^{sum s} prod (s_j / sum s)^{s_j}.
inline Wide lemma_max_product(std::span<const Wide> s, Wide c) {
    if (!(c > 0.0L)) {
        throw DomainError("lemma_max_product needs c > 0");
    }
    if (s.empty()) {
        throw DomainError("lemma_max_product needs a non-empty exponent vector");
    }
    Wide total = 0.0L;
    for (Wide sj : s) {
        if (!(sj > 0.0L)) {
            throw DomainError("lemma_max_product needs strictly positive exponents");
        }
        total += sj;
    }
    Wide value = std::pow(c, total);
    for (Wide sj : s) {
        value *= std::pow(sj / total, sj);
    }
    return value;
}

/// min sum x_j subject to prod x_j^{s_j} >= c, x >= 0, for s >= 0 with
/// sum s > 0: (c / prod s_j^{s_j})^{1/sum s} * sum s. Uses 0^0 = 1.
inline Wide lemma_min_sum(std::span<const Wide> s, Wide c) {
    if (!(c > 0.0L)) {
        throw DomainError("lemma_min_sum needs c > 0");
    }
    Wide total = 0.0L;
    Wide weighted = 1.0L;
    for (Wide sj : s) {
        if (sj < 0.0L) {
            throw DomainError("lemma_min_sum needs non-negative exponents");
        }
        total += sj;
        if (sj > 0.0L) {
            weighted *= std::pow(sj, sj);
        }
    }
    if (!(total > 0.0L)) {
        throw DomainError("lemma_min_sum needs a positive exponent sum");
    }
    return std::pow(c / weighted, 1.0L / total) * total;
}

/// prod_j (s_j / sum s)^{s_j} at the LP optimum; the sequential bound's
/// derivation needs this to be at most 1/N.
inline Wide lp_optimum_constant(std::size_t order) {
    const LpSolution lp = lemma_lp_solution(order);
    Wide value = 1.0L;
    for (Wide sj : lp.s) {
        value *= std::pow(sj / lp.objective, sj);
    }
    return value;
}

inline bool hbl_feasible(std::span<const Wide> s, std::size_t order, Wide tol = 1e-12L) {
    if (s.size() != order + 1) {
        return false;
    }
    for (Wide sj : s) {
        if (sj < -tol || sj > 1.0L + tol) {
            return false;
        }
    }
    const auto delta = hbl_delta(order);
    for (const auto& row : delta) {
        Wide dot = 0.0L;
        for (std::size_t j = 0; j < row.size(); ++j) {
            dot += static_cast<Wide>(row[j]) * s[j];
        }
        if (dot < 1.0L - tol) {
            return false;
        }
    }
    return true;
}

/// Iteration-space point (i_1, ..., i_N, r).
using IterationPoint = std::vector<Index>;

struct HblResult {
    Count lhs = 0;                       // |F|
    Wide rhs = 0.0L;                     // prod |phi_j(F)|^{s_j}
    std::vector<Count> projection_sizes;  // N factor projections, then the tensor
    bool holds = false;
};

/// Evaluates both sides of |F| <= prod_j |phi_j(F)|^{s_j} where phi_k
/// keeps (i_k, r) for k < N and phi_N keeps (i_1, ..., i_N).
inline HblResult hbl_check(std::span<const IterationPoint> points, std::span<const Wide> s) {
    if (points.empty()) {
        throw DomainError("HBL check needs a non-empty point set");
    }
    const std::size_t d = points.front().size();
    if (d < 3) {
        throw DomainError("iteration points need at least 3 coordinates");
    }
    const std::size_t order = d - 1;
    if (!hbl_feasible(s, order)) {
        throw DomainError("exponent vector is outside the feasible polytope");
    }
    std::set<IterationPoint> distinct;
    std::vector<std::set<std::pair<Index, Index>>> factor_proj(order);
    std::set<std::vector<Index>> tensor_proj;
    for (const IterationPoint& p : points) {
        if (p.size() != d) {
            throw DomainError("iteration points have inconsistent dimension");
        }
        distinct.insert(p);
        for (std::size_t k = 0; k < order; ++k) {
            factor_proj[k].emplace(p[k], p[order]);
        }
        tensor_proj.emplace(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(order));
    }
    HblResult out;
    out.lhs = static_cast<Count>(distinct.size());
    out.rhs = 1.0L;
    for (std::size_t k = 0; k < order; ++k) {
        out.projection_sizes.push_back(static_cast<Count>(factor_proj[k].size()));
    }
    out.projection_sizes.push_back(static_cast<Count>(tensor_proj.size()));
    for (std::size_t j = 0; j <= order; ++j) {
        out.rhs *= std::pow(static_cast<Wide>(out.projection_sizes[j]), s[j]);
    }
    out.holds = static_cast<Wide>(out.lhs) <= out.rhs * (1.0L + 1e-12L);
    return out;
}

// ---------------------------------------------------------------------------

enum class BoundKind { Sequential, Parallel };

/// Largest applicable bound: Sequential uses the memory-dependent and
/// trivial bounds (needs M); Parallel uses both memory-independent bounds
/// and, when M is known, the memory-dependent one.
inline Bound best_lower_bound(const ProblemShape& shape, BoundKind kind) {
    Bound best = Bound::of(0.0L);
    auto take = [&](const Bound& b) {
        if (b.raw > best.raw) {
            best = b;
        }
    };
    if (kind == BoundKind::Sequential) {
        take(lb_seq_memdep(shape));
        take(lb_seq_trivial(shape));
    } else {
        take(lb_par_memind_general(shape));
        take(lb_par_memind_rect(shape));
        if (shape.memory) {
            take(lb_par_memdep(shape));
        }
    }
    return best;
}

/// measured / best applicable bound; nullopt when every bound clamps to 0.
inline std::optional<double> optimality_ratio(const ProblemShape& shape, Wide measured, BoundKind kind) {
    if (!(measured > 0.0L)) {
        throw DomainError("optimality ratio needs a positive measured cost");
    }
    const Bound best = best_lower_bound(shape, kind);
    if (!(best.value > 0.0L)) {
        return std::nullopt;
    }
    return static_cast<double>(measured / best.value);
}

}  // namespace mttkrp
