/* Copyright 2026 The SMOT Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include "smot/assignment.hpp"
#include "support/oracles.hpp"

namespace smot {
namespace {

TEST(Hungarian, TwoByTwoPrefersAntiDiagonal) {
  const CostMatrix m{{1, 2}, {2, 1}};
  const auto a = hungarian_assign(m);
  EXPECT_EQ(a, (Assignment{{0, 0}, {1, 1}}));
  EXPECT_DOUBLE_EQ(assignment_cost(m, a), 2.0);
  const CostMatrix n{{2, 1}, {1, 2}};
  EXPECT_EQ(hungarian_assign(n), (Assignment{{0, 1}, {1, 0}}));
}

TEST(Hungarian, SingleCell) {
  const CostMatrix m{{4}};
  EXPECT_EQ(hungarian_assign(m), (Assignment{{0, 0}}));
}

TEST(Hungarian, EmptyShapes) {
  EXPECT_TRUE(hungarian_assign(CostMatrix(0, 3)).empty());
  EXPECT_TRUE(hungarian_assign(CostMatrix(3, 0)).empty());
}

TEST(Hungarian, CardinalityBeatsCost) {
  // Matching (0,0) alone is cheapest but leaves row 1 unmatched.
  CostMatrix m{{0, 5}, {1, 100}};
  m.forbid(1, 1);
  EXPECT_EQ(hungarian_assign(m), (Assignment{{0, 1}, {1, 0}}));
}

TEST(Hungarian, TiesResolveLexicographically) {
  const CostMatrix m(3, 3, 1.0);
  EXPECT_EQ(hungarian_assign(m), (Assignment{{0, 0}, {1, 1}, {2, 2}}));
}

void expect_matches_oracle(const CostMatrix& m) {
  const auto a = hungarian_assign(m);
  const auto want = oracle::brute_force_assignment(m);
  ASSERT_EQ(a.size(), want.cardinality);
  EXPECT_NEAR(assignment_cost(m, a), want.cost, 1e-9);
  std::vector<bool> row_used(m.rows()), col_used(m.cols());
  for (const auto& [r, c] : a) {
    ASSERT_LT(r, m.rows());
    ASSERT_LT(c, m.cols());
    EXPECT_FALSE(m.forbidden(r, c));
    EXPECT_FALSE(row_used[r]);
    EXPECT_FALSE(col_used[c]);
    row_used[r] = col_used[c] = true;
  }
}

TEST(Hungarian, SquareMatchesExhaustiveSearch) {
  const CounterRng rng(5, 0);
  std::uint64_t k = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    CostMatrix m(5, 5);
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t c = 0; c < 5; ++c) m(r, c) = rng.uniform(k++, 0.0, 10.0);
    expect_matches_oracle(m);
  }
}

TEST(Hungarian, RectangularWithForbiddenCells) {
  const CounterRng rng(6, 0);
  std::uint64_t k = 0;
  for (std::size_t rows = 1; rows <= 6; ++rows) {
    for (std::size_t cols = 1; cols <= 6; ++cols) {
      for (int trial = 0; trial < 20; ++trial) {
        CostMatrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            // Coarse integer costs make ties common.
            m(r, c) = static_cast<double>(rng.bits(k++) % 4);
            if (rng.uniform01(k++) < 0.3) m.forbid(r, c);
          }
        }
        expect_matches_oracle(m);
      }
    }
  }
}

TEST(Hungarian, Deterministic) {
  const CounterRng rng(9, 0);
  CostMatrix m(6, 4);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 4; ++c) m(r, c) = static_cast<double>(rng.bits(r * 4 + c) % 3);
  const auto first = hungarian_assign(m);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(hungarian_assign(m), first);
}

}  // namespace
}  // namespace smot
