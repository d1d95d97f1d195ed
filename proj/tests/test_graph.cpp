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

#include <cmath>
#include <sstream>

#include "dial/graph.hpp"
#include "dial/error.hpp"

using namespace dial;

TEST_CASE("knn rbf weights on three collinear points") {
  Dataset ds;
  ds.features = RowMatrix(3, 1);
  ds.features << 0.0, 1.0, 3.0;
  KnnOptions opt;
  opt.k = 1;
  opt.metric = Metric::kRbf;
  opt.sigma = 1.0;
  const SimilarityGraph g = build_knn_graph(ds, opt).graph;
  CHECK(g.weight(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(g.weight(1, 2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(g.weight(0, 2) == 0.0);
  CHECK(g.weight(2, 1) == g.weight(1, 2));
  g.check_invariants();
}

TEST_CASE("duplicate points get weight one and orthogonal cosine weight is zero") {
  Dataset ds;
  ds.features = RowMatrix(3, 2);
  ds.features << 1.0, 0.0, 1.0, 0.0, 0.0, 1.0;
  KnnOptions rbf;
  rbf.k = 1;
  rbf.metric = Metric::kRbf;
  rbf.sigma = 0.7;
  CHECK(build_knn_graph(ds, rbf).graph.weight(0, 1) == 1.0);

  KnnOptions cos;
  cos.k = 2;
  cos.metric = Metric::kCosine;
  const SimilarityGraph g = build_knn_graph(ds, cos).graph;
  CHECK(g.weight(0, 1) == doctest::Approx(1.0));
  CHECK(g.weight(0, 2) == 0.0);

  ds.features.row(2).setZero();
  CHECK_THROWS_AS(build_knn_graph(ds, cos), DomainError);
  rbf.k = 3;
  CHECK_THROWS_AS(build_knn_graph(ds, rbf), DomainError);
}

TEST_CASE("graph build is deterministic and satisfies its invariants") {
  const Dataset ds = generate_mixture(ring_of_blobs(4, 5.0, 1.0), 300, 11);
  KnnOptions opt;
  opt.k = 8;
  opt.metric = Metric::kRbf;
  const KnnGraph a = build_knn_graph(ds, opt);
  const KnnGraph b = build_knn_graph(ds, opt);
  CHECK(a.graph == b.graph);
  CHECK(a.sigma > 0.0);
  a.graph.check_invariants();
  for (int i = 0; i < a.graph.size(); ++i) CHECK(a.graph.weight(i, i) == 0.0);

  opt.policy = ExecutionPolicy::kSerial;
  CHECK(build_knn_graph(ds, opt).graph == a.graph);
}

TEST_CASE("edge merging keeps the larger weight and drops self loops") {
  const std::vector<Edge> edges = {{0, 1, 0.3}, {1, 0, 0.7}, {2, 2, 5.0}, {1, 2, 0.0}};
  const SimilarityGraph g = SimilarityGraph::from_edges(3, edges);
  CHECK(g.weight(0, 1) == 0.7);
  CHECK(g.weight(1, 0) == 0.7);
  CHECK(g.weight(2, 2) == 0.0);
  CHECK(g.degrees()[2] == 0.0);
  CHECK_THROWS_AS(SimilarityGraph::from_edges(3, std::vector<Edge>{{0, 3, 1.0}}), DomainError);
  CHECK_THROWS_AS(SimilarityGraph::from_edges(3, std::vector<Edge>{{0, 1, -1.0}}), DomainError);
}

TEST_CASE("connectivity report counts components") {
  const std::vector<Edge> edges = {{0, 1, 1.0}, {2, 3, 1.0}};
  const ConnectivityReport r = connectivity(SimilarityGraph::from_edges(5, edges));
  CHECK(r.num_components == 3);
  CHECK(r.component[0] == r.component[1]);
  CHECK(r.component[2] == r.component[3]);
  CHECK(r.component[0] != r.component[2]);
  CHECK_FALSE(r.connected());
  CHECK(connectivity(random_connected_graph(60, 0.02, 0.1, 4)).connected());
}

TEST_CASE("edge list export") {
  std::ostringstream out;
  write_edge_list(path_graph(3), out);
  CHECK(out.str() == "i,j,w\n0,1,1\n1,2,1\n");
}
