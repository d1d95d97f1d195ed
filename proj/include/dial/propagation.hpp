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

#ifndef DIAL_PROPAGATION_HPP_
#define DIAL_PROPAGATION_HPP_

#include <functional>
#include <iosfwd>
#include <map>
#include <shared_mutex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dial/dataset.hpp"
#include "dial/laplacian.hpp"

namespace dial {

enum class PropagationKind { kPoisson, kRbf, kHeat };

struct PropagationParams {
  PropagationKind kind = PropagationKind::kPoisson;
  double tau = 0.1;    // poisson
  double sigma = 1.0;  // rbf
  double time = 1.0;   // heat
  int rank = 0;        // heat: modes used (0 = whole cache)
};

// Pseudolabel mass spread from one labeled source. values[source] == 1 and
// every entry lies in [0, 1].
struct PropagationColumn {
  int source = -1;
  Eigen::VectorXd values;
  PropagationParams params;
  // Unnormalized peak: g(source) for Poisson, h(source) for heat, 1 for rbf.
  double raw_peak = 1.0;
  CgStats solver;
};

// Throws NumericalError unless normalization, the maximum principle and the
// [0, 1] range hold.
void verify_column(const PropagationColumn& column);

// Raw solution of (L + tau I) g = e_source.
Eigen::VectorXd poisson_solve(const LaplacianOperator& laplacian, double tau, int source,
                              const CgOptions& cg = {}, CgStats* stats = nullptr);

// Shift-scaled Poisson kernel (g - min g) / (g(source) - min g).
PropagationColumn poisson_propagate(const LaplacianOperator& laplacian, double tau, int source,
                                    const CgOptions& cg = {});

PropagationColumn rbf_propagate(const Dataset& dataset, double sigma, int source);

// Truncated spectral heat kernel from the laplacian's spectral cache.
PropagationColumn heat_propagate(const LaplacianOperator& laplacian, double time, int source,
                                 int rank = 0);

using ColumnFn = std::function<PropagationColumn(int source)>;

// Builds the column function for the configured propagation kind.
ColumnFn make_propagator(const LaplacianOperator& laplacian, const Dataset& dataset,
                         const PropagationParams& params, const CgOptions& cg = {});

// Columns keyed by source node. Concurrent readers, one writer at a time;
// a column depends only on its source so insertion order is irrelevant.
class PropagationCache {
 public:
  explicit PropagationCache(ColumnFn propagate) : propagate_(std::move(propagate)) {}

  const PropagationColumn& get(int source);
  // Computes all missing columns, in parallel across sources.
  void prefetch(std::span<const int> sources);

  bool contains(int source) const;
  std::size_t size() const;
  int total_cg_iterations() const;
  double worst_cg_residual() const;

 private:
  ColumnFn propagate_;
  mutable std::shared_mutex mutex_;
  std::map<int, PropagationColumn> columns_;
};

struct SeparationEstimate {
  double delta = 0.0;
  double zeta = 0.0;
  double epsilon = 0.0;
  double margin() const { return zeta - epsilon; }
};

// kernel(a, b) is the propagation from probe a evaluated at probe b.
// For each delta keeps at least a (1 - delta) share of each cluster, removing
// greedily the member with the weakest within-cluster kernel value, then
// reports zeta = min within-cluster value and epsilon = max cross-cluster
// value over the retained sets. Returns the candidate with the largest
// zeta - epsilon (smallest delta on ties).
SeparationEstimate measure_class_separation(const Eigen::MatrixXd& kernel,
                                            std::span<const int> cluster_ids,
                                            std::span<const double> deltas);

// "node,value" rows.
void write_column(const PropagationColumn& column, std::ostream& out);

}  // namespace dial

#endif  // DIAL_PROPAGATION_HPP_
