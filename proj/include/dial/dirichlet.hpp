// Copyright 2026 The DiAL Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIAL_DIRICHLET_HPP_
#define DIAL_DIRICHLET_HPP_

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dial/dataset.hpp"
#include "dial/propagation.hpp"

namespace dial {

// Accumulated pseudolabels alpha (n x K, prior excluded) under a uniform
// Dir(alpha0, ..., alpha0) prior.
class DirichletField {
 public:
  DirichletField(int n, int num_classes, double alpha0, bool allow_repeats = false);

  int size() const { return static_cast<int>(alpha_.rows()); }
  int num_classes() const { return static_cast<int>(alpha_.cols()); }
  double alpha0() const { return alpha0_; }
  const RowMatrix& alpha() const { return alpha_; }
  const std::vector<std::pair<int, int>>& labeled() const { return labeled_; }
  bool is_labeled(int node) const;

  // alpha[., k] += column. Throws DomainError for k >= K or a repeated
  // source outside repeat mode.
  void add_label(const PropagationColumn& column, int k);

 private:
  RowMatrix alpha_;
  double alpha0_;
  bool allow_repeats_;
  std::vector<std::pair<int, int>> labeled_;
  std::vector<char> is_labeled_;
};

// p_hat rows; throws DegenerateError naming the first node with zero beta.
RowMatrix posterior_mean(const DirichletField& field);

// argmax_k alpha_k(x), ties to the smallest class.
std::vector<int> classify(const DirichletField& field);

// Tr[C(x)] = (beta^2 - sum alpha_tilde^2) / (beta^2 (beta + 1)).
Eigen::VectorXd dirichlet_variance(const DirichletField& field);

// Prior strength from a sample of 5 * k_hat distinct random columns: the maximum over
// columns of their 100 (k_hat - 1) / k_hat percentile, or the mean column value
// when every such percentile is zero.
double alpha0_heuristic(const ColumnFn& propagate, int n, int k_hat, std::uint64_t seed);
double alpha0_heuristic(const LaplacianOperator& laplacian, double tau, int k_hat,
                        std::uint64_t seed, const CgOptions& cg = {});

// "node,alpha_0..,p_hat_0..,variance,y_hat" rows.
void write_snapshot(const DirichletField& field, std::ostream& out);

}  // namespace dial

#endif  // DIAL_DIRICHLET_HPP_
