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

#include "dial/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "dial/error.hpp"

namespace dial {

SimilarityGraph SimilarityGraph::from_edges(int n, std::span<const Edge> edges) {
  if (n < 1) throw DomainError("graph needs at least one node");
  std::vector<Edge> both;
  both.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) throw DomainError("edge endpoint out of range");
    if (!(e.w >= 0) || !std::isfinite(e.w)) throw DomainError("edge weights must be finite and >= 0");
    if (e.i == e.j || e.w == 0.0) continue;
    both.push_back(e);
    both.push_back({e.j, e.i, e.w});
  }
  std::sort(both.begin(), both.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });

  SimilarityGraph g;
  g.n_ = n;
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t e = 0; e < both.size();) {
    std::size_t f = e;
    double w = both[e].w;
    while (f + 1 < both.size() && both[f + 1].i == both[e].i && both[f + 1].j == both[e].j) {
      w = std::max(w, both[++f].w);
    }
    g.cols_.push_back(both[e].j);
    g.vals_.push_back(w);
    ++g.offsets_[static_cast<std::size_t>(both[e].i) + 1];
    e = f + 1;
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.degrees_ = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    for (auto e = g.offsets_[i]; e < g.offsets_[i + 1]; ++e) d += g.vals_[e];
    g.degrees_[i] = d;
  }
  return g;
}

SimilarityGraph SimilarityGraph::from_dense(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights.cols()) throw DomainError("weight matrix must be square");
  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < weights.cols(); ++j) {
      if (weights(i, j) != weights(j, i)) throw DomainError("weight matrix must be symmetric");
      if (weights(i, j) != 0.0) {
        edges.push_back({static_cast<int>(i), static_cast<int>(j), weights(i, j)});
      }
    }
  }
  return from_edges(static_cast<int>(weights.rows()), edges);
}

double SimilarityGraph::weight(int i, int j) const {
  auto begin = cols_.begin() + offsets_[i];
  auto end = cols_.begin() + offsets_[i + 1];
  auto it = std::lower_bound(begin, end, j);
  return (it != end && *it == j) ? vals_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
}

Eigen::MatrixXd SimilarityGraph::to_dense() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (auto e = offsets_[i]; e < offsets_[i + 1]; ++e) w(i, cols_[e]) = vals_[e];
  }
  return w;
}

void SimilarityGraph::check_invariants() const {
  for (int i = 0; i < n_; ++i) {
    double d = 0.0;
    for (auto e = offsets_[i]; e < offsets_[i + 1]; ++e) {
      const int j = cols_[e];
      if (j == i) throw NumericalError("nonzero diagonal at node " + std::to_string(i));
      if (vals_[e] < 0) throw NumericalError("negative weight at row " + std::to_string(i));
      if (weight(j, i) != vals_[e]) {
        throw NumericalError("asymmetric weight between " + std::to_string(i) + " and " +
                             std::to_string(j));
      }
      d += vals_[e];
    }
    if (std::abs(d - degrees_[i]) > 1e-12 * std::max(1.0, std::abs(d))) {
      throw NumericalError("stored degree mismatch at node " + std::to_string(i));
    }
  }
}

KnnGraph build_knn_graph(const Dataset& dataset, const KnnOptions& options) {
  const int n = dataset.size();
  const int k = options.k;
  if (k < 1 || k >= n) throw DomainError("k must satisfy 1 <= k < n");

  kernels::NeighborTable table;
  double sigma = 0.0;
  if (options.metric == Metric::kCosine) {
    for (int i = 0; i < n; ++i) {
      if (dataset.features.row(i).norm() == 0.0) {
        throw DomainError("cosine metric needs nonzero rows; row " + std::to_string(i) +
                          " is zero");
      }
    }
    table = kernels::knn_cosine(dataset.features, k, options.policy);
  } else {
    table = kernels::knn_euclidean(dataset.features, k, options.policy);
    sigma = options.sigma;
    if (sigma <= 0.0) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += table.score[static_cast<std::size_t>(i) * k + k - 1];
      sigma = total / n;
      // All points coincide: any bandwidth gives weight 1.
      if (sigma == 0.0) sigma = 1.0;
    }
  }

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * k);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < k; ++m) {
      const std::size_t slot = static_cast<std::size_t>(i) * k + m;
      double w = 0.0;
      if (options.metric == Metric::kCosine) {
        w = std::clamp(table.score[slot], 0.0, 1.0);
      } else {
        const double dist = table.score[slot];
        w = std::exp(-dist * dist / (2.0 * sigma * sigma));
      }
      edges.push_back({i, table.index[slot], w});
    }
  }
  return {SimilarityGraph::from_edges(n, edges), sigma};
}

ConnectivityReport connectivity(const SimilarityGraph& graph) {
  const int n = graph.size();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  const auto offsets = graph.row_offsets();
  const auto cols = graph.col_indices();
  for (int i = 0; i < n; ++i) {
    for (auto e = offsets[i]; e < offsets[i + 1]; ++e) {
      const int a = find(i);
      const int b = find(cols[e]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  ConnectivityReport report;
  report.component.assign(n, -1);
  std::vector<int> id_of_root(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (id_of_root[r] < 0) id_of_root[r] = report.num_components++;
    report.component[i] = id_of_root[r];
  }
  return report;
}

void write_edge_list(const SimilarityGraph& graph, std::ostream& out) {
  const auto offsets = graph.row_offsets();
  const auto cols = graph.col_indices();
  const auto vals = graph.values();
  out << "i,j,w\n";
  out.precision(17);
  for (int i = 0; i < graph.size(); ++i) {
    for (auto e = offsets[i]; e < offsets[i + 1]; ++e) {
      if (cols[e] > i) out << i << ',' << cols[e] << ',' << vals[e] << '\n';
    }
  }
}

SimilarityGraph path_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return SimilarityGraph::from_edges(n, edges);
}

SimilarityGraph random_connected_graph(int n, double p, double wmin, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(wmin, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    edges.push_back({i, parent(rng), weight(rng)});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (coin(rng) < p) edges.push_back({i, j, weight(rng)});
    }
  }
  return SimilarityGraph::from_edges(n, edges);
}

}  // namespace dial
