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

#include <doctest.h>

#include <numeric>
#include <random>

#include "dial/dataset.hpp"
#include "dial/graph.hpp"
#include "dial/kernels.hpp"

using namespace dial;

// Every parallel kernel must reproduce the serial reference bit for bit.
TEST_CASE("serial and parallel kernels agree exactly") {
  const Dataset ds = generate_mixture(ring_of_blobs(5, 4.0, 1.0), 700, 5);
  for (int k : {1, 7, 25}) {
    const auto a = kernels::serial::knn_euclidean(ds.features, k);
    const auto b = kernels::parallel::knn_euclidean(ds.features, k);
    CHECK(a.index == b.index);
    CHECK(a.score == b.score);
    const auto c = kernels::serial::knn_cosine(ds.features, k);
    const auto d = kernels::parallel::knn_cosine(ds.features, k);
    CHECK(c.index == d.index);
    CHECK(c.score == d.score);
  }

  KnnOptions opt;
  opt.k = 10;
  const SimilarityGraph g = build_knn_graph(ds, opt).graph;
  const kernels::CsrView csr{g.row_offsets(), g.col_indices(), g.values()};
  std::vector<double> x(static_cast<std::size_t>(g.size()));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (double& v : x) v = normal(rng);
  std::vector<double> y1(x.size()), y2(x.size());
  const std::span<const double> deg(g.degrees().data(), x.size());
  kernels::serial::laplacian_apply(csr, deg, 0.3, x, y1);
  kernels::parallel::laplacian_apply(csr, deg, 0.3, x, y2);
  CHECK(y1 == y2);

  const int K = 4;
  std::vector<double> alpha(x.size() * K);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (double& a : alpha) a = u(rng);
  std::vector<int> pool(x.size() / 2);
  std::iota(pool.begin(), pool.end(), 3);
  std::vector<double> s1(pool.size()), s2(pool.size());
  kernels::serial::dirvar_scores(alpha, K, 0.2, pool, s1);
  kernels::parallel::dirvar_scores(alpha, K, 0.2, pool, s2);
  CHECK(s1 == s2);

  const Eigen::MatrixXd m = Eigen::MatrixXd::Random(300, 300);
  const Eigen::MatrixXd cov = m * m.transpose();
  std::vector<int> cpool(300);
  std::iota(cpool.begin(), cpool.end(), 0);
  std::vector<double> v1(300), v2(300), w1(300), w2(300);
  kernels::serial::covariance_scores(cov, 0.01, cpool, v1, w1);
  kernels::parallel::covariance_scores(cov, 0.01, cpool, v2, w2);
  CHECK(v1 == v2);
  CHECK(w1 == w2);
}

TEST_CASE("knn neighbours are sorted nearest first with index tie-break") {
  RowMatrix f(4, 1);
  f << 0.0, 1.0, -1.0, 2.0;
  const auto t = kernels::serial::knn_euclidean(f, 3);
  CHECK(t.index[0] == 1);  // tie between nodes 1 and 2 goes to the smaller index
  CHECK(t.index[1] == 2);
  CHECK(t.index[2] == 3);
  CHECK(t.score[0] == 1.0);
}

TEST_CASE("thread limit round-trips") {
  const int before = thread_limit();
  set_thread_limit(1);
  CHECK(thread_limit() == 1);
  set_thread_limit(0);
  CHECK(thread_limit() == before);
}
