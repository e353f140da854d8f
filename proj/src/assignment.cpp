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

#include "smot/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "smot/error.hpp"

namespace smot {

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> values) {
  rows_ = values.size();
  cols_ = rows_ ? values.begin()->size() : 0;
  cost_.reserve(rows_ * cols_);
  for (const auto& row : values) {
    if (row.size() != cols_) {
      fail(ErrorCode::kDimMismatch, "ragged cost matrix");
    }
    cost_.insert(cost_.end(), row.begin(), row.end());
  }
  forbidden_.assign(rows_ * cols_, false);
}

double assignment_cost(const CostMatrix& cost, const Assignment& pairs) {
  double total = 0.0;
  for (const auto& [r, c] : pairs) total += cost(r, c);
  return total;
}

namespace {

// Lexicographic objective: first the (negated) number of real pairs, then the
// summed cost. Keeping the cardinality term integral makes "maximum
// cardinality first" exact instead of relying on a big-M constant.
struct Lex {
  std::int64_t k = 0;
  double c = 0.0;

  Lex operator+(const Lex& o) const { return {k + o.k, c + o.c}; }
  Lex operator-(const Lex& o) const { return {k - o.k, c - o.c}; }
  bool operator<(const Lex& o) const { return k != o.k ? k < o.k : c < o.c; }
};

constexpr int kFree = -2;
constexpr int kUnmatched = -1;

struct Solution {
  Lex value;
  std::vector<int> row_to_col;  // real rows only; -1 when unmatched
  std::vector<Lex> u, v;        // dual potentials, 1-based as in the solver
};

// Square problem of size rows+cols: real rows may take any dummy column,
// dummy rows may take any real column. Forbidden and constrained-away
// pairs are simply absent edges.
class Solver {
 public:
  explicit Solver(const CostMatrix& cost)
      : cost_(cost), m_(cost.rows()), n_(cost.cols()), size_(m_ + n_),
        row_fixed_(m_, kFree), col_owner_(n_, -1) {}

  void fix_row(std::size_t r, int col) {
    row_fixed_[r] = col;
    if (col >= 0) col_owner_[static_cast<std::size_t>(col)] = static_cast<int>(r);
  }
  void release_row(std::size_t r) {
    if (row_fixed_[r] >= 0) col_owner_[static_cast<std::size_t>(row_fixed_[r])] = -1;
    row_fixed_[r] = kFree;
  }

  // Entry (i, j) of the square problem; false when the edge is absent.
  bool edge(std::size_t i, std::size_t j, Lex& out) const {
    const bool real_row = i < m_;
    const bool real_col = j < n_;
    if (real_row && real_col) {
      if (cost_.forbidden(i, j)) return false;
      const int fixed = row_fixed_[i];
      if (fixed == kUnmatched) return false;
      if (fixed >= 0 && static_cast<std::size_t>(fixed) != j) return false;
      const int owner = col_owner_[j];
      if (owner >= 0 && static_cast<std::size_t>(owner) != i) return false;
      out = {-1, cost_(i, j)};
      return true;
    }
    if (real_row && !real_col) {
      if (row_fixed_[i] >= 0) return false;
      out = {};
      return true;
    }
    if (!real_row && real_col) {
      if (col_owner_[j] >= 0) return false;
      out = {};
      return true;
    }
    out = {};
    return true;
  }

  // Shortest augmenting path Hungarian method, O(size^3).
  bool solve(Solution& sol) const {
    const std::size_t N = size_;
    std::vector<Lex> u(N + 1), v(N + 1);
    std::vector<std::size_t> p(N + 1, 0), way(N + 1, 0);
    for (std::size_t i = 1; i <= N; ++i) {
      p[0] = i;
      std::size_t j0 = 0;
      std::vector<Lex> minv(N + 1);
      std::vector<char> reached(N + 1, 0);
      std::vector<char> used(N + 1, 0);
      do {
        used[j0] = 1;
        const std::size_t i0 = p[j0];
        Lex delta;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= N; ++j) {
          if (used[j]) continue;
          Lex a;
          if (edge(i0 - 1, j - 1, a)) {
            const Lex cur = a - u[i0] - v[j];
            if (!reached[j] || cur < minv[j]) {
              minv[j] = cur;
              reached[j] = 1;
              way[j] = j0;
            }
          }
          if (reached[j] && (j1 == 0 || minv[j] < delta)) {
            delta = minv[j];
            j1 = j;
          }
        }
        if (j1 == 0) return false;  // no perfect matching
        for (std::size_t j = 0; j <= N; ++j) {
          if (used[j]) {
            u[p[j]] = u[p[j]] + delta;
            v[j] = v[j] - delta;
          } else if (reached[j]) {
            minv[j] = minv[j] - delta;
          }
        }
        j0 = j1;
      } while (p[j0] != 0);
      do {
        const std::size_t j1 = way[j0];
        p[j0] = p[j1];
        j0 = j1;
      } while (j0 != 0);
    }

    sol.row_to_col.assign(m_, kUnmatched);
    sol.value = {};
    for (std::size_t j = 1; j <= N; ++j) {
      const std::size_t i = p[j] - 1;
      Lex a;
      edge(i, j - 1, a);
      sol.value = sol.value + a;
      if (i < m_ && j - 1 < n_) sol.row_to_col[i] = static_cast<int>(j - 1);
    }
    sol.u = std::move(u);
    sol.v = std::move(v);
    return true;
  }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

 private:
  const CostMatrix& cost_;
  std::size_t m_, n_, size_;
  std::vector<int> row_fixed_;
  std::vector<int> col_owner_;
};

}  // namespace

Assignment hungarian_assign(const CostMatrix& cost) {
  const std::size_t m = cost.rows();
  const std::size_t n = cost.cols();
  if (m == 0 || n == 0) return {};

  double scale = 1.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (cost.forbidden(r, c)) continue;
      if (!std::isfinite(cost(r, c))) {
        fail(ErrorCode::kInvalidArgument, "allowed costs must be finite");
      }
      scale = std::max(scale, std::abs(cost(r, c)));
    }
  }
  const double reduced_tol = 1e-9 * scale;
  const double value_tol = 1e-9 * scale * static_cast<double>(m + n);

  Solver solver(cost);
  Solution best;
  if (!solver.solve(best)) fail(ErrorCode::kInternal, "assignment infeasible");
  const Lex optimum = best.value;
  const std::vector<Lex> u = best.u;
  const std::vector<Lex> v = best.v;

  // A pair can belong to an optimal matching only if its reduced cost under
  // the optimal duals is zero (complementary slackness).
  auto tight = [&](std::size_t r, std::size_t c) {
    const Lex red = Lex{-1, cost(r, c)} - u[r + 1] - v[c + 1];
    return red.k == 0 && std::abs(red.c) <= reduced_tol;
  };
  auto optimal = [&](const Lex& val) {
    return val.k == optimum.k && std::abs(val.c - optimum.c) <= value_tol;
  };

  // Greedy lexicographic selection: each row takes the smallest column that
  // still admits an optimal completion of the prefix chosen so far.
  std::vector<int> current = best.row_to_col;
  std::vector<char> col_taken(n, 0);
  for (std::size_t r = 0; r < m; ++r) {
    int chosen = kUnmatched;
    for (std::size_t c = 0; c < n; ++c) {
      if (col_taken[c] || cost.forbidden(r, c) || !tight(r, c)) continue;
      if (current[r] == static_cast<int>(c)) {
        chosen = static_cast<int>(c);
        break;
      }
      solver.fix_row(r, static_cast<int>(c));
      Solution trial;
      if (solver.solve(trial) && optimal(trial.value)) {
        current = trial.row_to_col;
        chosen = static_cast<int>(c);
        solver.release_row(r);
        break;
      }
      solver.release_row(r);
    }
    if (chosen == kUnmatched && current[r] != kUnmatched) {
      // Tolerance corner case: keep the solver's own optimum for this row.
      chosen = current[r];
    }
    solver.fix_row(r, chosen);
    if (chosen >= 0) col_taken[static_cast<std::size_t>(chosen)] = 1;
  }

  Assignment out;
  for (std::size_t r = 0; r < m; ++r) {
    if (current[r] >= 0) out.emplace_back(r, static_cast<std::size_t>(current[r]));
  }
  return out;
}

}  // namespace smot
