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

#ifndef DIAL_GRAPH_HPP_
#define DIAL_GRAPH_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dial/dataset.hpp"
#include "dial/kernels.hpp"

namespace dial {

struct Edge {
  int i;
  int j;
  double w;
};

// Sparse symmetric weight matrix in CSR form. Immutable once built.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;

  // Builds from directed edges. Each edge is mirrored, duplicates are merged
  // with max(), self loops and zero weights are dropped.
  static SimilarityGraph from_edges(int n, std::span<const Edge> edges);
  // Dense symmetric nonnegative matrix; the diagonal is ignored.
  static SimilarityGraph from_dense(const Eigen::MatrixXd& weights);

  int size() const { return n_; }
  std::int64_t num_entries() const { return static_cast<std::int64_t>(cols_.size()); }
  std::span<const std::int64_t> row_offsets() const { return offsets_; }
  std::span<const int> col_indices() const { return cols_; }
  std::span<const double> values() const { return vals_; }
  const Eigen::VectorXd& degrees() const { return degrees_; }
  double max_degree() const { return degrees_.size() ? degrees_.maxCoeff() : 0.0; }

  // Entry lookup by binary search within the row; 0 when absent.
  double weight(int i, int j) const;
  Eigen::MatrixXd to_dense() const;

  // Throws NumericalError naming the first violated invariant.
  void check_invariants() const;

  bool operator==(const SimilarityGraph&) const = default;

 private:
  int n_ = 0;
  std::vector<std::int64_t> offsets_{0};
  std::vector<int> cols_;
  std::vector<double> vals_;
  Eigen::VectorXd degrees_;
};

enum class Metric { kCosine, kRbf };

struct KnnOptions {
  int k = 20;
  Metric metric = Metric::kCosine;
  // RBF bandwidth; <= 0 selects the mean distance to the k-th neighbour.
  double sigma = 0.0;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;
};

struct KnnGraph {
  SimilarityGraph graph;
  double sigma = 0.0;  // bandwidth actually used (rbf only)
};

KnnGraph build_knn_graph(const Dataset& dataset, const KnnOptions& options);

struct ConnectivityReport {
  int num_components = 0;
  std::vector<int> component;  // component id per node, numbered by first node
  bool connected() const { return num_components == 1; }
};

ConnectivityReport connectivity(const SimilarityGraph& graph);

// "i,j,w" rows for i < j.
void write_edge_list(const SimilarityGraph& graph, std::ostream& out);

// Path 0-1-...-(n-1) with unit weights; handy for oracles and examples.
SimilarityGraph path_graph(int n);

// Connected Erdos-Renyi style graph: a random spanning tree plus extra
// edges with probability p, weights uniform in [wmin, 1].
SimilarityGraph random_connected_graph(int n, double p, double wmin, std::uint64_t seed);

}  // namespace dial

#endif  // DIAL_GRAPH_HPP_
