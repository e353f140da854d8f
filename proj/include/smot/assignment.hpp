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

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace smot {

// Dense row-major cost matrix with an optional mask of forbidden pairs.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), cost_(rows * cols, fill),
        forbidden_(rows * cols, false) {}
  CostMatrix(std::initializer_list<std::initializer_list<double>> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return cost_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return cost_[r * cols_ + c];
  }

  void forbid(std::size_t r, std::size_t c) { forbidden_[r * cols_ + c] = true; }
  bool forbidden(std::size_t r, std::size_t c) const {
    return forbidden_[r * cols_ + c];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> cost_;
  std::vector<bool> forbidden_;
};

using Assignment = std::vector<std::pair<std::size_t, std::size_t>>;

// Maximum-cardinality matching over allowed pairs with minimum total cost
// among those. Among equal optima the lexicographically smallest pair list
// (sorted by row) is returned, so results are reproducible everywhere.
// Costs of allowed pairs must be finite.
Assignment hungarian_assign(const CostMatrix& cost);

// Sum of cost over `pairs`, accumulated in row order.
double assignment_cost(const CostMatrix& cost, const Assignment& pairs);

}  // namespace smot
