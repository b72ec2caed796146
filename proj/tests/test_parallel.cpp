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

#include <gtest/gtest.h>

#include "mttkrp/oracle.hpp"
#include "mttkrp/parallel.hpp"
#include "mttkrp/planner.hpp"
#include "oracles/brute_force.hpp"

using namespace mttkrp;

namespace {

constexpr double kTol = 1e-12;

ParResult run(const MttkrpProblem& p, const std::string& grid, ArithMode arith = ArithMode::Atomic) {
    return par_general_mttkrp(p, ProcessorGrid::parse(grid), {arith});
}

}  // namespace

TEST(Stationary, CubeExample) {
    const MttkrpProblem p = make_synthetic_problem({{8, 8, 8}, 4, 0}, 42);
    const ParResult r = par_stationary_mttkrp(p, ProcessorGrid::parse("1x2x2x2"));
    for (const auto& c : r.ledger.processors) {
        EXPECT_EQ(c.words_sent, 36);
        EXPECT_EQ(c.words_received, 36);
    }
    EXPECT_EQ(r.ledger.max_words(), 36);
    EXPECT_EQ(r.ledger.array_words(ArrayKind::Tensor), 0);
    EXPECT_EQ(predicted_words(p.shape(), ProcessorGrid::parse("1x2x2x2")), 36);
    EXPECT_LT(oracles::relative_error(r.output, oracles::brute_force_mttkrp(p)), kTol);
}

TEST(Stationary, SingleProcessorHasNoCommunication) {
    const MttkrpProblem p = make_synthetic_problem({{3, 4, 5}, 2, 1}, 5);
    const ParResult r = par_stationary_mttkrp(p, ProcessorGrid::parse("1x1x1x1"));
    EXPECT_EQ(r.ledger.max_traffic(), 0);
    EXPECT_TRUE(r.ledger.collectives.empty());
    EXPECT_EQ(r.output, mttkrp_oracle(p));
}

TEST(Stationary, TensorNeverMoves) {
    const MttkrpProblem p = make_synthetic_problem({{6, 4, 5}, 3, 2}, 8);
    const ParResult r = par_stationary_mttkrp(p, ProcessorGrid::parse("1x3x2x1"));
    EXPECT_EQ(r.ledger.array_words(ArrayKind::Tensor), 0);
    EXPECT_LT(oracles::relative_error(r.output, oracles::brute_force_mttkrp(p)), kTol);
}

TEST(Stationary, RejectsRankSplit) {
    const MttkrpProblem p = make_synthetic_problem({{4, 4, 4}, 4, 0}, 1);
    EXPECT_THROW(par_stationary_mttkrp(p, ProcessorGrid::parse("2x1x1x1")), PlanningError);
}

TEST(Stationary, ArithmeticCount) {
    // 4x4x4 blocks with R = 6: 384 N-ary multiplies and additions locally,
    // plus the reduce-scatter's (q-1) * 24 / q additions.
    const MttkrpProblem p = make_synthetic_problem({{8, 8, 8}, 6, 0}, 2);
    const ParResult r = par_stationary_mttkrp(p, ProcessorGrid::parse("1x2x2x2"));
    for (const auto& c : r.ledger.processors) {
        EXPECT_EQ(c.nary_multiplies, 64 * 6);
        EXPECT_EQ(c.additions, 64 * 6 + 18);
    }
    EXPECT_EQ(r.ledger.max_arithmetic(3), 2 * 384 + 384 + 18);
}

TEST(General, RankSplitExample) {
    const MttkrpProblem p = make_synthetic_problem({{8, 8, 8}, 8, 0}, 42);
    const ProcessorGrid g = ProcessorGrid::parse("2x2x2x2");
    const ParResult r = par_general_mttkrp(p, g);
    for (const auto& c : r.ledger.processors) {
        EXPECT_EQ(c.words_sent, 32 + 36);
        EXPECT_EQ(c.words_received, 32 + 36);
    }
    EXPECT_EQ(r.ledger.array_words(ArrayKind::Tensor), 16 * 32);
    EXPECT_EQ(predicted_words(p.shape(), g), 68);
    EXPECT_LT(oracles::relative_error(r.output, oracles::brute_force_mttkrp(p)), kTol);
}

TEST(General, UnitRankFactorMatchesStationary) {
    for (std::size_t mode = 0; mode < 3; ++mode) {
        const MttkrpProblem p = make_synthetic_problem({{5, 6, 7}, 3, mode}, 9);
        const ProcessorGrid g = ProcessorGrid::parse("1x2x3x2");
        const ParResult a = par_general_mttkrp(p, g);
        const ParResult b = par_stationary_mttkrp(p, g);
        EXPECT_EQ(a.ledger, b.ledger);
        EXPECT_EQ(a.output, b.output);
    }
}

TEST(General, NonDividingGridsAreCorrectAndWithinPrediction) {
    const std::vector<std::pair<MttkrpShape, std::string>> cases{
        {{{5, 7, 3}, 5, 1}, "2x2x3x1"}, {{{7, 5, 6}, 3, 0}, "3x3x1x2"},
        {{{4, 3, 5, 3}, 4, 3}, "2x2x1x2x3"}, {{{9, 2}, 7, 1}, "3x4x2"}};
    for (const auto& [shape, grid] : cases) {
        const MttkrpProblem p = make_synthetic_problem(shape, 13);
        const ParResult r = run(p, grid);
        EXPECT_LT(oracles::relative_error(r.output, oracles::brute_force_mttkrp(p)), kTol) << grid;
        EXPECT_LE(r.ledger.max_words(), predicted_words(shape, ProcessorGrid::parse(grid))) << grid;
        EXPECT_EQ(r.ledger.total_sent(), r.ledger.total_received());
    }
}

TEST(General, StorageWithinWorkingSet) {
    const MttkrpProblem p = make_synthetic_problem({{6, 6, 6}, 4, 0}, 4);
    const ProcessorGrid g = ProcessorGrid::parse("2x3x1x2");
    const ParResult r = par_general_mttkrp(p, g);
    const DataDistribution d(p.shape(), g);
    for (Index id = 0; id < g.size(); ++id) {
        EXPECT_EQ(r.ledger.processors[static_cast<std::size_t>(id)].storage, d.working_storage(id));
    }
    // 2x6x3 block plus 2x2, 6x2 and 3x2 matrix blocks.
    EXPECT_EQ(r.ledger.max_storage(), 36 + 4 + 12 + 6);
}

TEST(Krp, FlopFormula) {
    const std::vector<Index> block{4, 4, 2};
    EXPECT_EQ(local_krp_matmul_flops(block, 0, 4), 288);
    EXPECT_EQ(local_atomic_flops(block, 4), 384);
    EXPECT_THROW(local_krp_matmul_flops(block, 3, 4), ShapeError);
}

TEST(Krp, SameCommunicationAndOutput) {
    const MttkrpProblem p = make_synthetic_problem({{8, 8, 4}, 4, 0}, 21);
    const ParResult a = run(p, "1x2x2x2", ArithMode::Atomic);
    const ParResult k = run(p, "1x2x2x2", ArithMode::Krp);
    EXPECT_EQ(a.ledger.collectives, k.ledger.collectives);
    EXPECT_EQ(a.ledger.max_words(), k.ledger.max_words());
    EXPECT_LT(oracles::relative_error(k.output, oracles::brute_force_mttkrp(p)), kTol);
    const std::vector<Index> block{4, 4, 2};
    for (const auto& c : k.ledger.processors) {
        EXPECT_EQ(c.krp_multiplies + c.matmul_flops, local_krp_matmul_flops(block, 0, 4));
        EXPECT_EQ(c.nary_multiplies, 0);
    }
}

TEST(Determinism, RepeatedRunsMatch) {
    const MttkrpProblem p = make_synthetic_problem({{6, 5, 4}, 6, 1}, 77);
    const ParResult a = run(p, "3x2x1x2");
    const ParResult b = run(p, "3x2x1x2");
    EXPECT_EQ(a.ledger, b.ledger);
    EXPECT_EQ(a.output, b.output);
}

TEST(Imbalance, EvenGridIsBalanced) {
    const MttkrpProblem p = make_synthetic_problem({{8, 8, 8}, 8, 0}, 1);
    const ParResult r = run(p, "2x2x2x2");
    EXPECT_EQ(r.gamma, 1.0L);
    EXPECT_EQ(r.delta, 1.0L);
    const ParResult u = run(make_synthetic_problem({{5, 7, 3}, 5, 1}, 1), "2x2x3x1");
    EXPECT_GT(u.gamma, 1.0L);
}

TEST(Errors, GridMismatch) {
    const MttkrpProblem p = make_synthetic_problem({{4, 4, 4}, 2, 0}, 1);
    EXPECT_THROW(run(p, "1x2x2"), PlanningError);
    EXPECT_THROW(run(p, "1x8x1x1"), PlanningError);
    EXPECT_THROW(run(p, "4x1x1x1"), PlanningError);
    EXPECT_THROW(ProcessorGrid::parse("1x0x2"), ShapeError);
    EXPECT_THROW(ProcessorGrid::parse("2xx2"), ShapeError);
}
