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

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dial/kernels.hpp"
#include "kernels_common.hpp"

namespace dial {

namespace {
int g_thread_limit = 0;
}

void set_thread_limit(int threads) {
  g_thread_limit = threads > 0 ? threads : 0;
#ifdef _OPENMP
  if (g_thread_limit > 0) {
    omp_set_num_threads(g_thread_limit);
  } else {
    omp_set_num_threads(omp_get_num_procs());
  }
#endif
}

int thread_limit() {
#ifdef _OPENMP
  return g_thread_limit > 0 ? g_thread_limit : omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels::parallel {

namespace {

// Per-row selection with nth_element + partial sort; each thread owns its
// scratch buffer and writes a disjoint slice of the table.
template <typename ScoreFn>
NeighborTable knn_rows(int n, int k, bool larger_is_nearer, ScoreFn score, bool take_sqrt) {
  NeighborTable table{k, std::vector<int>(static_cast<std::size_t>(n) * k),
                      std::vector<double>(static_cast<std::size_t>(n) * k)};
  const detail::FartherLast order{larger_is_nearer};
#pragma omp parallel
  {
    std::vector<std::pair<double, int>> cand;
    cand.reserve(static_cast<std::size_t>(n));
#pragma omp for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i) {
      cand.clear();
      for (int j = 0; j < n; ++j) {
        if (j != i) cand.emplace_back(score(i, j), j);
      }
      std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end(), order);
      std::sort(cand.begin(), cand.begin() + k, order);
      for (int m = 0; m < k; ++m) {
        table.index[static_cast<std::size_t>(i) * k + m] = cand[m].second;
        table.score[static_cast<std::size_t>(i) * k + m] =
            take_sqrt ? std::sqrt(cand[m].first) : cand[m].first;
      }
    }
  }
  return table;
}

}  // namespace

NeighborTable knn_cosine(RowMatrixView features, int k) {
  const Eigen::VectorXd norms = features.rowwise().norm();
  return knn_rows(
      static_cast<int>(features.rows()), k, true,
      [&](int i, int j) { return detail::cosine(features, norms, i, j); }, false);
}

NeighborTable knn_euclidean(RowMatrixView features, int k) {
  return knn_rows(
      static_cast<int>(features.rows()), k, false,
      [&](int i, int j) { return detail::squared_distance(features, i, j); }, true);
}

void laplacian_apply(CsrView w, std::span<const double> degrees, double shift,
                     std::span<const double> x, std::span<double> y) {
  const int n = static_cast<int>(degrees.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (int i = 0; i < n; ++i) y[i] = detail::laplacian_row(w, degrees, shift, x, i);
}

void dirvar_scores(std::span<const double> alpha, int K, double alpha0,
                   std::span<const int> pool, std::span<double> out) {
  const auto m = static_cast<std::ptrdiff_t>(pool.size());
#pragma omp parallel for schedule(static) if (m > 8192)
  for (std::ptrdiff_t p = 0; p < m; ++p) {
    out[p] = detail::dirvar_row(alpha.data() + static_cast<std::size_t>(pool[p]) * K, K, alpha0);
  }
}

void covariance_scores(const Eigen::MatrixXd& cov, double noise, std::span<const int> pool,
                       std::span<double> vopt, std::span<double> sigmaopt) {
  const auto m = static_cast<std::ptrdiff_t>(pool.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < m; ++p) {
    detail::covariance_column_scores(cov, noise, pool[p], vopt.empty() ? nullptr : &vopt[p],
                                     sigmaopt.empty() ? nullptr : &sigmaopt[p]);
  }
}

}  // namespace kernels::parallel

namespace kernels {

NeighborTable knn_cosine(RowMatrixView features, int k, ExecutionPolicy policy) {
  return policy == ExecutionPolicy::kSerial ? serial::knn_cosine(features, k)
                                            : parallel::knn_cosine(features, k);
}

NeighborTable knn_euclidean(RowMatrixView features, int k, ExecutionPolicy policy) {
  return policy == ExecutionPolicy::kSerial ? serial::knn_euclidean(features, k)
                                            : parallel::knn_euclidean(features, k);
}

void laplacian_apply(CsrView w, std::span<const double> degrees, double shift,
                     std::span<const double> x, std::span<double> y, ExecutionPolicy policy) {
  if (policy == ExecutionPolicy::kSerial) {
    serial::laplacian_apply(w, degrees, shift, x, y);
  } else {
    parallel::laplacian_apply(w, degrees, shift, x, y);
  }
}

void dirvar_scores(std::span<const double> alpha, int K, double alpha0,
                   std::span<const int> pool, std::span<double> out, ExecutionPolicy policy) {
  if (policy == ExecutionPolicy::kSerial) {
    serial::dirvar_scores(alpha, K, alpha0, pool, out);
  } else {
    parallel::dirvar_scores(alpha, K, alpha0, pool, out);
  }
}

void covariance_scores(const Eigen::MatrixXd& cov, double noise, std::span<const int> pool,
                       std::span<double> vopt, std::span<double> sigmaopt,
                       ExecutionPolicy policy) {
  if (policy == ExecutionPolicy::kSerial) {
    serial::covariance_scores(cov, noise, pool, vopt, sigmaopt);
  } else {
    parallel::covariance_scores(cov, noise, pool, vopt, sigmaopt);
  }
}

}  // namespace kernels
}  // namespace dial
