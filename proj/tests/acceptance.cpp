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

// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mttkrp/mttkrp.hpp"
#include "oracles/brute_force.hpp"
#include "oracles/grid_search.hpp"
#include "oracles/simplex.hpp"

using namespace mttkrp;

namespace {

// Pinned tolerances.
constexpr double kAlgTol = 1e-12;
constexpr double kLpTol = 1e-9;
constexpr double kGridTol = 1e-6;
constexpr long double kBoundSlack = 1e-9L;
constexpr double kCheckpointRatio = 25.0;
constexpr double kCheckpointFactor = 2.0;
constexpr double kGapLimit = 20.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Checker {
  public:
    void fail(const std::string& why) {
        if (out_.pass) {
            out_.detail = why;
        }
        out_.pass = false;
    }
    void note(const std::string& s) {
        if (out_.pass) {
            out_.detail = s;
        }
    }
    Outcome result() const { return out_; }

  private:
    Outcome out_;
};

std::mt19937_64& rng() {
    static std::mt19937_64 r(20260101);
    return r;
}

Index uniform(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng()); }

MttkrpShape random_shape(Index min_order, Index max_order, Index max_dim, Index min_rank, Index max_rank) {
    MttkrpShape s;
    const Index n = uniform(min_order, max_order);
    for (Index k = 0; k < n; ++k) {
        s.dims.push_back(uniform(1, max_dim));
    }
    s.rank = uniform(min_rank, max_rank);
    s.mode = static_cast<std::size_t>(uniform(0, n - 1));
    return s;
}

ProcessorGrid random_grid(const MttkrpShape& s, bool stationary, Index max_factor) {
    std::vector<Index> f{stationary ? 1 : uniform(1, std::min(s.rank, max_factor))};
    for (Index d : s.dims) {
        f.push_back(uniform(1, std::min(d, max_factor)));
    }
    return ProcessorGrid(f);
}

/// A random grid on which every block and collective part is even.
std::optional<ProcessorGrid> even_grid(const MttkrpShape& s, bool stationary) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        const ProcessorGrid g = random_grid(s, stationary, 4);
        if (g.size() > 1 && DataDistribution(s, g).even()) {
            return g;
        }
    }
    return std::nullopt;
}

std::string run_lab(const std::string& args, int& code) {
    const std::string cmd = std::string(MTTKRP_LAB_BIN) + " " + args;
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        code = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        out.append(buf.data(), n);
    }
    const int status = pclose(pipe);
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

// 1. Every algorithm against the brute-force oracle.
Outcome correctness() {
    Checker c;
    int problems = 0;
    for (int t = 0; t < 120; ++t) {
        const MttkrpShape s = random_shape(2, 5, 8, 1, 5);
        const MttkrpProblem p = make_synthetic_problem(s, static_cast<std::uint64_t>(1000 + t));
        const std::vector<double> want = oracles::brute_force_mttkrp(p);
        const std::string tag = " on " + join_dims(s.dims) + ":" + std::to_string(s.rank);

        MemoryMachine m1(unblocked_min_capacity(s.order()));
        const SeqResult a1 = mttkrp_seq_unblocked(p, m1);
        if (!(a1.output == mttkrp_oracle(p))) {
            c.fail("unblocked not bit-exact" + tag);
        }
        if (oracles::relative_error(a1.output, want) > kAlgTol) {
            c.fail("unblocked off" + tag);
        }
        const Index b = uniform(1, 4);
        MemoryMachine m2(blocked_footprint(s.order(), b));
        if (oracles::relative_error(mttkrp_seq_blocked(p, m2, b).output, want) > kAlgTol) {
            c.fail("blocked off" + tag);
        }
        for (ArithMode arith : {ArithMode::Atomic, ArithMode::Krp}) {
            const ProcessorGrid g3 = random_grid(s, true, 3);
            if (oracles::relative_error(par_stationary_mttkrp(p, g3, {arith}).output, want) > kAlgTol) {
                c.fail("stationary off" + tag + " grid " + g3.to_string());
            }
            const ProcessorGrid g4 = random_grid(s, false, 3);
            if (oracles::relative_error(par_general_mttkrp(p, g4, {arith}).output, want) > kAlgTol) {
                c.fail("general off" + tag + " grid " + g4.to_string());
            }
        }
        ++problems;
    }
    std::ostringstream os;
    os << problems << " problems, 4 algorithms, tol " << kAlgTol;
    c.note(os.str());
    return c.result();
}

// 2. Sequential ledgers equal the closed forms.
Outcome sequential_counts() {
    Checker c;
    int dividing = 0;
    int other = 0;
    for (int t = 0; t < 400; ++t) {
        const MttkrpShape s = random_shape(2, 5, 12, 0, 6);
        const Count i = product(s.dims);
        const Count n = static_cast<Count>(s.order());
        MemoryMachine m1(unblocked_min_capacity(s.order()));
        if (trace_seq_unblocked(s, m1).ledger.communication() != i + i * s.rank * (n + 1)) {
            c.fail("unblocked count differs on " + join_dims(s.dims));
        }
        const Index b = uniform(1, 6);
        MemoryMachine m2(blocked_footprint(s.order(), b));
        const Count got = trace_seq_blocked(s, m2, b).ledger.communication();
        bool divides = true;
        Count blocks = 1;
        Count ceil_blocks = 1;
        for (Index d : s.dims) {
            divides = divides && d % b == 0;
            blocks *= d / b;
            ceil_blocks *= ceil_div(d, b);
        }
        if (divides) {
            ++dividing;
            if (got != i + blocks * s.rank * (n + 1) * b) {
                c.fail("blocked count differs on " + join_dims(s.dims) + " b=" + std::to_string(b));
            }
        } else {
            ++other;
            if (got > i + ceil_blocks * s.rank * (n + 1) * b) {
                c.fail("blocked count above ceil formula on " + join_dims(s.dims) + " b=" + std::to_string(b));
            }
        }
    }
    c.note("400 shapes, " + std::to_string(dividing) + " with dividing b, " + std::to_string(other) + " without");
    return c.result();
}

// 3. Parallel ledgers equal the closed forms on dividing grids.
Outcome parallel_counts() {
    Checker c;
    int runs = 0;
    for (int t = 0; runs < 200; ++t) {
        MttkrpShape s = random_shape(2, 4, 8, 1, 8);
        const bool stationary = t % 2 == 0;
        const std::optional<ProcessorGrid> found = even_grid(s, stationary);
        if (!found) {
            continue;
        }
        const ProcessorGrid& g = *found;
        const MttkrpProblem p = make_synthetic_problem(s, static_cast<std::uint64_t>(t));
        const ParResult r = stationary ? par_stationary_mttkrp(p, g) : par_general_mttkrp(p, g);
        const Count procs = g.size();
        const Count p0 = g.p0();
        Count want = (p0 - 1) * product(s.dims) / procs;
        for (std::size_t k = 0; k < s.order(); ++k) {
            want += s.dims[k] * s.rank / (p0 * g.mode_factor(k)) - s.dims[k] * s.rank / procs;
        }
        if (r.ledger.max_words() != want) {
            c.fail("words " + to_string(r.ledger.max_words()) + " != " + to_string(want) + " on " +
                   join_dims(s.dims) + " grid " + g.to_string());
        }
        for (const auto& pc : r.ledger.processors) {
            if (pc.words() != want) {
                c.fail("uneven processor words on grid " + g.to_string());
                break;
            }
        }
        if (stationary && !(par_general_mttkrp(p, g).ledger == r.ledger)) {
            c.fail("general with P_0 = 1 differs from stationary on grid " + g.to_string());
        }
        ++runs;
    }
    c.note(std::to_string(runs) + " even grids");
    return c.result();
}

// 4. Measured costs dominate every applicable bound. The parallel bounds
// count words sent and received, so they are compared with traffic.
Outcome bound_dominance() {
    Checker c;
    int configs = 0;
    int positive = 0;
    std::map<std::string, int> violations;  // bound name -> count
    std::string example;
    auto check = [&](const std::string& name, Wide got, Wide bound, const std::string& where) {
        positive += bound > 0.0L;
        if (got < bound) {
            if (violations[name]++ == 0 && example.empty()) {
                std::ostringstream os;
                os << name << " = " << static_cast<double>(bound) << " > " << static_cast<double>(got) << " on "
                   << where;
                example = os.str();
            }
        }
    };
    for (int t = 0; t < 150; ++t) {
        const MttkrpShape s = random_shape(2, 4, 24, 1, 12);
        ProblemShape bs{s.dims, s.rank, Count{uniform(static_cast<Index>(s.order()) + 1, 400)}, std::nullopt,
                        1.0L, 1.0L};
        const std::string where = join_dims(s.dims) + ":" + std::to_string(s.rank) + " M=" + to_string(*bs.memory);
        MemoryMachine mb(*bs.memory);
        MemoryMachine mu(*bs.memory);
        for (Count w : {trace_seq_blocked(s, mb, choose_block_size(s.order(), *bs.memory)).ledger.communication(),
                        trace_seq_unblocked(s, mu).ledger.communication()}) {
            const Wide got = static_cast<Wide>(w) * (1 + kBoundSlack);
            check("seq memory-dependent", got, lb_seq_memdep(bs).value, where);
            check("seq trivial", got, lb_seq_trivial(bs).value, where);
        }
        ++configs;
    }
    // Random grids, plus single-processor runs of every tenth shape.
    for (int t = 0; t < 165; ++t) {
        MttkrpShape s = random_shape(2, 3, 12, 1, 16);
        if (t % 3 == 0) {
            s.dims.assign(s.order(), s.dims.front());
        }
        const ProcessorGrid g = t >= 150 ? ProcessorGrid(std::vector<Index>(s.order() + 1, 1))
                                         : random_grid(s, t % 4 == 0, 4);
        const ParResult r = par_general_mttkrp(make_synthetic_problem(s, 3), g);
        ProblemShape bs{s.dims, s.rank, r.ledger.max_storage(), g.size(), r.gamma, r.delta};
        const std::string where = join_dims(s.dims) + ":" + std::to_string(s.rank) + " grid " + g.to_string();
        const Wide got = static_cast<Wide>(r.ledger.max_traffic()) * (1 + kBoundSlack);
        const std::string at = g.size() == 1 ? " (P=1)" : " (P>1)";
        check("par memory-dependent" + at, got, lb_par_memdep(bs).value, where);
        check("par memory-independent general" + at, got, lb_par_memind_general(bs).value, where);
        check("par memory-independent rect" + at, got, lb_par_memind_rect(bs).value, where);
        if (bs.cubical()) {
            check("par combined" + at, got, lb_par_combined(bs).selected.value, where);
        }
        ++configs;
    }
    if (!violations.empty()) {
        std::ostringstream os;
        os << "violations:";
        for (const auto& [name, n] : violations) {
            os << " " << name << " x" << n << ";";
        }
        os << " e.g. " << example;
        c.fail(os.str());
    }
    c.note(std::to_string(configs) + " configurations, " + std::to_string(positive) + " nonzero bounds checked");
    return c.result();
}

// 5. Lemma checks.
Outcome lemmas() {
    Checker c;
    for (std::size_t n = 2; n <= 10; ++n) {
        std::vector<std::vector<double>> a;
        for (const auto& row : hbl_delta(n)) {
            a.emplace_back(row.begin(), row.end());
        }
        const auto lp = oracles::solve_covering_lp(a, std::vector<double>(n + 1, 1.0));
        const LpSolution want = lemma_lp_solution(n);
        if (std::abs(lp.objective - static_cast<double>(want.objective)) > kLpTol) {
            c.fail("LP objective off for N=" + std::to_string(n));
        }
        for (std::size_t j = 0; j <= n; ++j) {
            if (std::abs(lp.s[j] - static_cast<double>(want.s[j])) > kLpTol) {
                c.fail("LP solution off for N=" + std::to_string(n));
            }
        }
    }
    // 140 steps on the 2-simplex give 10011 lattice points; 100 x 100 samples
    // for the two free coordinates of the sum search.
    const std::vector<std::vector<double>> exps{{1.0 / 3, 1.0 / 3, 2.0 / 3}, {0.2, 0.7, 1.1}, {0.5, 0.5, 0.5}};
    for (const auto& s : exps) {
        const std::vector<Wide> sw(s.begin(), s.end());
        for (double cval : {1.0, 10.0, 81.0}) {
            const double maxp = static_cast<double>(lemma_max_product(sw, cval));
            if (oracles::grid_max_product(s, cval, 140) > maxp * (1 + kGridTol)) {
                c.fail("grid beats the max-product optimum");
            }
            const double mins = static_cast<double>(lemma_min_sum(sw, cval));
            if (oracles::grid_min_sum(s, cval, 100, 1e-2, 1e2) < mins * (1 - kGridTol)) {
                c.fail("grid beats the min-sum optimum");
            }
        }
    }
    int subsets = 0;
    for (std::size_t n : {2u, 3u, 4u}) {
        const std::vector<Wide> s = lemma_lp_solution(n).s;
        for (int t = 0; t < 1000; ++t) {
            std::vector<IterationPoint> pts;
            const Index count = uniform(1, 60);
            for (Index i = 0; i < count; ++i) {
                IterationPoint q(n + 1);
                for (Index& v : q) {
                    v = uniform(0, 3);
                }
                pts.push_back(q);
            }
            if (!hbl_check(pts, s).holds) {
                c.fail("HBL inequality violated for N=" + std::to_string(n));
            }
            ++subsets;
        }
    }
    c.note("LP N=2..10, 18 grid searches, " + std::to_string(subsets) + " HBL subsets");
    return c.result();
}

// 6. Large-cube scaling sweep from the CLI.
Outcome scaling() {
    Checker c;
    int code = 0;
    const std::string text = run_lab("sweep --fig3", code);
    if (code != 0) {
        c.fail("sweep exited with " + std::to_string(code));
        return c.result();
    }
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    struct Row {
        double p, alg3, alg4, mm;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string f[4];
        for (auto& x : f) {
            std::getline(ss, x, ',');
        }
        rows.push_back({std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
    }
    if (rows.size() != 31) {
        c.fail("expected 31 rows, got " + std::to_string(rows.size()));
        return c.result();
    }
    int first_diff = -1;
    for (int e = 0; e <= 30; ++e) {
        if (rows[static_cast<std::size_t>(e)].alg3 != rows[static_cast<std::size_t>(e)].alg4) {
            first_diff = e;
            break;
        }
    }
    std::ostringstream detail;
    detail << "alg3/alg4 first differ at P=2^" << first_diff;
    if (first_diff != 27) {
        c.fail(detail.str() + ", expected 2^27");
    }
    for (const Row& r : rows) {
        if (r.alg3 > r.mm || r.alg4 > r.mm) {
            c.fail("an algorithm exceeds the matmul baseline at P=" + std::to_string(r.p));
        }
    }
    const double ratio = rows[17].mm / rows[17].alg3;
    detail << "; mm/alg3 at 2^17 = " << ratio;
    if (ratio < kCheckpointRatio / kCheckpointFactor || ratio > kCheckpointRatio * kCheckpointFactor) {
        c.fail("mm/alg3 at P=2^17 is " + std::to_string(ratio));
    }
    c.note(detail.str());
    return c.result();
}

// 7. Blocked cost over the best sequential bound stays within a constant.
Outcome optimality_gap() {
    Checker c;
    double worst = 0.0;
    for (Index r : {16, 64}) {
        const MttkrpShape s{{256, 256, 256}, r, 0};
        for (int e = 10; e <= 16; ++e) {
            const Count m = Count{1} << e;
            MemoryMachine machine(m);
            const Count w = trace_seq_blocked(s, machine, choose_block_size(3, m)).ledger.communication();
            const std::optional<double> ratio =
                optimality_ratio({s.dims, r, m, std::nullopt, 1.0L, 1.0L}, static_cast<Wide>(w), BoundKind::Sequential);
            if (!ratio || !std::isfinite(*ratio)) {
                c.fail("no finite ratio at R=" + std::to_string(r) + " M=2^" + std::to_string(e));
                continue;
            }
            worst = std::max(worst, *ratio);
        }
    }
    if (worst > kGapLimit) {
        c.fail("worst ratio " + std::to_string(worst) + " exceeds " + std::to_string(kGapLimit));
    }
    c.note("worst blocked/bound ratio " + std::to_string(worst));
    return c.result();
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"correctness against oracle", correctness},
        {"exact sequential counts", sequential_counts},
        {"exact parallel counts", parallel_counts},
        {"bound dominance", bound_dominance},
        {"lemma validation", lemmas},
        {"large-cube scaling sweep", scaling},
        {"optimality gap", optimality_gap},
    };
    const double limits[] = {30.0, 1e9, 1e9, 1e9, 1e9, 5.0, 120.0};
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > limits[i]) {
            o.pass = false;
            o.detail += "; took " + std::to_string(secs) + " s";
        }
        all = all && o.pass;
        std::printf("criterion %zu %s: %s (%s) [%.2f s]\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
    }
    return all ? 0 : 1;
}
