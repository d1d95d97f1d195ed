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

// Reference implementations. Deliberately straightforward: full sorts, no
// threading. The parallel versions are tested against these.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dial/kernels.hpp"
#include "kernels_common.hpp"

namespace dial::kernels::serial {

NeighborTable knn_cosine(RowMatrixView features, int k) {
  const int n = static_cast<int>(features.rows());
  const Eigen::VectorXd norms = features.rowwise().norm();
  NeighborTable table{k, std::vector<int>(static_cast<std::size_t>(n) * k),
                      std::vector<double>(static_cast<std::size_t>(n) * k)};
  std::vector<std::pair<double, int>> cand;
  for (int i = 0; i < n; ++i) {
    cand.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back(detail::cosine(features, norms, i, j), j);
    }
    std::sort(cand.begin(), cand.end(), detail::FartherLast{true});
    for (int m = 0; m < k; ++m) {
      table.index[static_cast<std::size_t>(i) * k + m] = cand[m].second;
      table.score[static_cast<std::size_t>(i) * k + m] = cand[m].first;
    }
  }
  return table;
}

NeighborTable knn_euclidean(RowMatrixView features, int k) {
  const int n = static_cast<int>(features.rows());
  NeighborTable table{k, std::vector<int>(static_cast<std::size_t>(n) * k),
                      std::vector<double>(static_cast<std::size_t>(n) * k)};
  std::vector<std::pair<double, int>> cand;
  for (int i = 0; i < n; ++i) {
    cand.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back(detail::squared_distance(features, i, j), j);
    }
    std::sort(cand.begin(), cand.end(), detail::FartherLast{false});
    for (int m = 0; m < k; ++m) {
      table.index[static_cast<std::size_t>(i) * k + m] = cand[m].second;
      table.score[static_cast<std::size_t>(i) * k + m] = std::sqrt(cand[m].first);
    }
  }
  return table;
}

void laplacian_apply(CsrView w, std::span<const double> degrees, double shift,
                     std::span<const double> x, std::span<double> y) {
  const int n = static_cast<int>(degrees.size());
  for (int i = 0; i < n; ++i) y[i] = detail::laplacian_row(w, degrees, shift, x, i);
}

void dirvar_scores(std::span<const double> alpha, int K, double alpha0,
                   std::span<const int> pool, std::span<double> out) {
  for (std::size_t p = 0; p < pool.size(); ++p) {
    out[p] = detail::dirvar_row(alpha.data() + static_cast<std::size_t>(pool[p]) * K, K, alpha0);
  }
}

void covariance_scores(const Eigen::MatrixXd& cov, double noise, std::span<const int> pool,
                       std::span<double> vopt, std::span<double> sigmaopt) {
  for (std::size_t p = 0; p < pool.size(); ++p) {
    detail::covariance_column_scores(cov, noise, pool[p], vopt.empty() ? nullptr : &vopt[p],
                                     sigmaopt.empty() ? nullptr : &sigmaopt[p]);
  }
}

}  // namespace dial::kernels::serial
