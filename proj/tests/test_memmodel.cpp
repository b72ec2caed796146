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

#include <sstream>

#include "mttkrp/sequential.hpp"

using namespace mttkrp;

namespace {

Region elem(Index i) { return Region::matrix_element(ArrayKind::Factor, 0, i, 0); }

}  // namespace

TEST(MemoryMachine, LoadsCountWords) {
    MemoryMachine m(2);
    m.load(elem(0));
    m.load(elem(1));
    EXPECT_TRUE(m.is_resident(elem(0)));
    EXPECT_TRUE(m.is_resident(elem(1)));
    EXPECT_EQ(m.resident_words(), 2);
    EXPECT_EQ(m.ledger().loads, 2);
}

TEST(MemoryMachine, CapacityViolation) {
    MemoryMachine m(1);
    m.load(elem(0));
    EXPECT_THROW(m.load(elem(1)), CapacityViolation);
}

TEST(MemoryMachine, StoreAndCleanEvict) {
    MemoryMachine m(4);
    const Region b = Region::matrix_element(ArrayKind::Output, 1, 0, 0);
    m.load(b);
    m.store(b);
    EXPECT_EQ(m.ledger().stores, 1);
    const Region x = Region::tensor_element(std::vector<Index>{0, 0});
    m.load(x);
    m.evict(x, false);
    EXPECT_EQ(m.ledger().stores, 1);
    EXPECT_EQ(m.resident_words(), 0);
}

TEST(MemoryMachine, EvictingNonResidentIsSimulatorBug) {
    MemoryMachine m(4);
    EXPECT_THROW(m.evict(elem(3), false), SimulatorBug);
    m.load(elem(0));
    EXPECT_THROW(m.load(elem(0)), SimulatorBug);  // duplicate residency
}

TEST(MemoryMachine, NonPositiveCapacity) { EXPECT_THROW(MemoryMachine(0), InfeasibleMachine); }

TEST(MemoryMachine, RegionWords) {
    const std::vector<Index> lo{0, 1, 2};
    const std::vector<Index> hi{2, 3, 5};
    EXPECT_EQ(Region::tensor_box(lo, hi).words(), 12);
    EXPECT_EQ(Region::matrix_segment(ArrayKind::Factor, 2, 4, 9, 1).words(), 5);
    EXPECT_EQ(describe(Region::matrix_segment(ArrayKind::Factor, 2, 4, 9, 1)), "A(3)[4:9,1:2]");
}

TEST(MemoryMachine, BlockedTraceWithinCapacity) {
    // b = 2 for M = 16, N = 3: footprint 8 + 6.
    MemoryMachine m(16);
    const SeqResult r = trace_seq_blocked({{4, 4, 4}, 2, 0}, m, 2);
    EXPECT_LE(r.peak_resident, 16);
    EXPECT_EQ(r.peak_resident, 14);
}

TEST(MemoryMachine, UnblockedTraceStoresOncePerOutputUpdate) {
    // N = 2, I_k = 2, R = 1: every (i, r) iteration stores its output entry.
    MemoryMachine m(3);
    const SeqResult r = trace_seq_unblocked({{2, 2}, 1, 0}, m);
    EXPECT_EQ(r.ledger.stores, 4);
    EXPECT_EQ(r.ledger.loads, 4 + 4 * 2);
}

TEST(MemoryMachine, WarmStartCreditsUpToM) {
    MemoryMachine cold(16);
    MemoryMachine warm(16, MachineOptions{true});
    const MttkrpShape shape{{4, 4, 4}, 2, 0};
    const SeqResult c = trace_seq_blocked(shape, cold, 2);
    const SeqResult w = trace_seq_blocked(shape, warm, 2);
    EXPECT_EQ(w.ledger.loads, c.ledger.loads - 16);
    EXPECT_EQ(w.ledger.stores, c.ledger.stores - 16);
    EXPECT_EQ(warm.raw_ledger(), c.ledger);
}

TEST(LedgerRow, CsvSchema) {
    std::ostringstream os;
    os << LedgerRow{"blocked", {4, 4, 4}, 2, 16, 2, CostLedger{160, 32, 128, 128}};
    EXPECT_EQ(os.str(), "blocked,3,4x4x4,2,16,2,160,32,128,128");
    std::ostringstream un;
    un << LedgerRow{"unblocked", {2, 2}, 1, 3, 0, CostLedger{}};
    EXPECT_EQ(un.str(), "unblocked,2,2x2,1,3,-,0,0,0,0");
}
