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
#include <memory>
#include <random>
#include <sstream>

#include "dial/dirichlet.hpp"
#include "dial/error.hpp"
#include "dial/graph.hpp"

using namespace dial;

namespace {

PropagationColumn make_column(int source, std::vector<double> values) {
  PropagationColumn col;
  col.source = source;
  col.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return col;
}

double trace_of(std::vector<double> a) {
  double beta = 0.0;
  double sq = 0.0;
  for (double v : a) {
    beta += v;
    sq += v * v;
  }
  return (beta * beta - sq) / (beta * beta * (beta + 1.0));
}

}  // namespace

TEST_CASE("fresh field is uniform") {
  const DirichletField f(4, 3, 1.0);
  const RowMatrix p = posterior_mean(f);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 3; ++k) CHECK(p(i, k) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  const DirichletField g(3, 2, 1.0);
  const Eigen::VectorXd v = dirichlet_variance(g);
  for (int i = 0; i < 3; ++i) CHECK(v[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK_THROWS_AS(posterior_mean(DirichletField(2, 2, 0.0)), DegenerateError);
  CHECK_THROWS_AS(dirichlet_variance(DirichletField(2, 2, 0.0)), DegenerateError);
}

TEST_CASE("adding labels") {
  DirichletField f(3, 2, 1.0);
  f.add_label(make_column(0, {1.0, 0.25, 0.0}), 0);
  CHECK(f.alpha()(0, 0) == 1.0);
  CHECK(f.alpha()(1, 0) == 0.25);
  CHECK(f.alpha()(2, 0) == 0.0);
  CHECK(f.is_labeled(0));
  CHECK_THROWS_AS(f.add_label(make_column(0, {1.0, 0.0, 0.0}), 1), DomainError);
  CHECK_THROWS_AS(f.add_label(make_column(2, {0.0, 0.0, 1.0}), 2), DomainError);
  CHECK_THROWS_AS(f.add_label(make_column(2, {0.0, 1.0}), 1), DomainError);

  DirichletField r(3, 2, 1.0, true);
  r.add_label(make_column(0, {1.0, 0.5, 0.0}), 0);
  r.add_label(make_column(0, {1.0, 0.5, 0.0}), 0);
  CHECK(r.alpha()(1, 0) == 1.0);

  DirichletField ab(3, 2, 0.5);
  DirichletField ba(3, 2, 0.5);
  const auto a = make_column(0, {1.0, 0.3, 0.1});
  const auto b = make_column(2, {0.2, 0.6, 1.0});
  ab.add_label(a, 0);
  ab.add_label(b, 1);
  ba.add_label(b, 1);
  ba.add_label(a, 0);
  CHECK(ab.alpha() == ba.alpha());
}

TEST_CASE("posterior mean and classification") {
  DirichletField f(1, 2, 1.0);
  f.add_label(make_column(0, {2.0}), 0);
  DirichletField g(1, 2, 1.0, true);
  g.add_label(make_column(0, {2.0}), 0);
  g.add_label(make_column(0, {1.0}), 1);
  const RowMatrix p = posterior_mean(g);
  CHECK(p(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(p(0, 1) == doctest::Approx(0.4).epsilon(1e-15));

  DirichletField h(2, 3, 0.0, true);
  h.add_label(make_column(0, {0.2, 0.5}), 0);
  h.add_label(make_column(0, {0.7, 0.5}), 1);
  h.add_label(make_column(0, {0.1, 0.0}), 2);
  CHECK(classify(h) == std::vector<int>{1, 0});

  // Scaling alpha leaves p_hat unchanged when alpha0 = 0.
  DirichletField s(2, 3, 0.0, true);
  s.add_label(make_column(0, {0.4, 1.0}), 0);
  s.add_label(make_column(0, {1.4, 1.0}), 1);
  s.add_label(make_column(0, {0.2, 0.0}), 2);
  CHECK((posterior_mean(s) - posterior_mean(h)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("variance slice through alpha_1 = 1.6 peaks near 0.932") {
  double best = 0.0;
  double best_x = 0.0;
  for (double x = 0.01; x <= 5.0; x += 1e-4) {
    const double v = trace_of({1.6, x});
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  CHECK(std::abs(best_x - 0.932) < 2e-3);
  CHECK(trace_of({1.6, 0.93}) > trace_of({1.6, 0.4}));
  CHECK(trace_of({1.6, 0.93}) > trace_of({1.6, 3.0}));
}

TEST_CASE("variance matches the field and decays along a ray") {
  DirichletField f(2, 2, 0.5, true);
  f.add_label(make_column(0, {1.1, 0.0}), 0);
  f.add_label(make_column(0, {0.0, 2.0}), 1);
  const Eigen::VectorXd v = dirichlet_variance(f);
  CHECK(v[0] == doctest::Approx(trace_of({1.6, 0.5})).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(trace_of({0.5, 2.5})).epsilon(1e-14));
  double prev = 1.0;
  for (double t = 1.0; t < 1e6; t *= 10.0) {
    const double cur = trace_of({t, t});
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(trace_of({1e6, 1e6}) * 2e6 == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("Monte Carlo variance oracle") {
  std::mt19937_64 rng(17);
  for (std::vector<double> a : {std::vector<double>{0.7, 2.3}, std::vector<double>{1.0, 0.4, 3.1}}) {
    const int draws = 200000;
    const auto K = a.size();
    std::vector<std::gamma_distribution<double>> gammas;
    for (double ak : a) gammas.emplace_back(ak, 1.0);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
    for (int d = 0; d < draws; ++d) {
      Eigen::VectorXd x(static_cast<Eigen::Index>(K));
      for (std::size_t k = 0; k < K; ++k) x[static_cast<Eigen::Index>(k)] = gammas[k](rng);
      x /= x.sum();
      mean += x;
      sq += x.cwiseAbs2();
    }
    mean /= draws;
    const double trace = (sq / draws - mean.cwiseAbs2()).sum();
    CHECK(std::abs(trace - trace_of(a)) < 3e-3);
  }
}

TEST_CASE("alpha0 heuristic") {
  // Balanced two-block kernel: every column is half ones.
  auto block = [](int s) {
    PropagationColumn col;
    col.source = s;
    col.values = Eigen::VectorXd::Zero(10);
    col.values.segment(s < 5 ? 0 : 5, 5).setOnes();
    return col;
  };
  // Linear interpolation puts the median of a half-ones column at 1/2.
  CHECK(alpha0_heuristic(block, 10, 2, 3) == doctest::Approx(0.5));
  auto majority = [](int s) {
    PropagationColumn col;
    col.source = s;
    col.values = Eigen::VectorXd::Zero(10);
    col.values.head(6).setOnes();
    return col;
  };
  CHECK(alpha0_heuristic(majority, 10, 2, 3) == doctest::Approx(1.0));
  auto constant = [](int s) {
    PropagationColumn col;
    col.source = s;
    col.values = Eigen::VectorXd::Constant(10, 0.3);
    return col;
  };
  CHECK(alpha0_heuristic(constant, 10, 4, 3) == doctest::Approx(0.3));
  CHECK_THROWS_AS(alpha0_heuristic(constant, 10, 1, 3), DomainError);
  auto isolated = [](int s) {
    PropagationColumn col;
    col.source = s;
    col.values = Eigen::VectorXd::Zero(10);
    col.values[s] = 1.0;
    return col;
  };
  CHECK(alpha0_heuristic(isolated, 10, 2, 3) == doctest::Approx(0.1));

  const LaplacianOperator L(std::make_shared<const SimilarityGraph>(random_connected_graph(40, 0.1, 0.1, 1)));
  const double a = alpha0_heuristic(L, 0.1, 4, 8);
  CHECK(a == alpha0_heuristic(L, 0.1, 4, 8));
  CHECK(a > 0.0);
  CHECK(a <= 1.0);
}

TEST_CASE("snapshot export") {
  DirichletField f(2, 2, 1.0);
  f.add_label(make_column(0, {1.0, 0.5}), 0);
  std::ostringstream out;
  write_snapshot(f, out);
  const std::string text = out.str();
  CHECK(text.rfind("node,alpha_0,alpha_1,p_hat_0,p_hat_1,variance,y_hat\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
