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

#include <algorithm>
#include <set>
#include <sstream>

#include "dial/active_loop.hpp"
#include "dial/error.hpp"

using namespace dial;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.dataset.n = 300;
  c.dataset.clusters = 6;
  c.dataset.radius = 8.0;
  c.dataset.modulo = 3;
  c.graph.k = 10;
  c.graph.metric = Metric::kRbf;
  c.budget = 12;
  c.trials = 3;
  c.seed = 21;
  return c;
}

}  // namespace

TEST_CASE("modulo relabel") {
  const ModuloLabels m = modulo_relabel({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 3);
  CHECK(m.classes[7] == 1);
  CHECK(m.classes[0] == 0);
  CHECK(m.clusters[7] == 7);
  std::vector<int> zero;
  for (int y = 0; y < 10; ++y) {
    if (m.classes[y] == 0) zero.push_back(y);
  }
  CHECK(zero == std::vector<int>{0, 3, 6, 9});
  CHECK_THROWS_AS(modulo_relabel({1, 2}, 1), DomainError);
}

TEST_CASE("config parsing") {
  std::istringstream in(
      "[dataset]\nkind = ring\nn = 400\nmodulo = 3\n[graph]\nk = 12\n"
      "[acquisition]\nnames = dirvar, vopt-lowrank\nlambda = 5\n"
      "[model]\nalpha0 = 0.2\n[loop]\nbudget = 7\ntrials = 2\nseed = 4\n");
  const ExperimentConfig c = parse_config(in);
  CHECK(c.dataset.n == 400);
  CHECK(c.dataset.modulo == 3);
  CHECK(c.graph.k == 12);
  CHECK(c.acquisitions ==
        std::vector<Acquisition>{Acquisition::kDirVar, Acquisition::kVoptLowRank});
  CHECK(c.lambda.value() == 5.0);
  CHECK(c.alpha0.value() == 0.2);
  CHECK(c.budget == 7);

  std::istringstream bad_key("[loop]\nbudgt = 3\n");
  CHECK_THROWS_AS(parse_config(bad_key), ConfigError);
  std::istringstream bad_value("[loop]\nbudget = many\n");
  CHECK_THROWS_AS(parse_config(bad_value), ConfigError);
  std::istringstream bad_name("[acquisition]\nnames = dirvar, nope\n");
  CHECK_THROWS_AS(parse_config(bad_name), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/missing.cfg"), ConfigError);
}

TEST_CASE("trials partition the pool, cover monotonically and are deterministic") {
  ExperimentConfig c = small_config();
  auto problem = prepare_problem(c);
  CHECK(problem->num_classes == 3);
  CHECK(problem->num_clusters == 6);
  CHECK(problem->alpha0 > 0.0);
  for (Acquisition acq : {Acquisition::kDirVarProp, Acquisition::kRandom, Acquisition::kUncSm,
                          Acquisition::kVopt, Acquisition::kSigmaOptLowRank}) {
    const TrialRecord a = run_trial(*problem, c, acq, 1);
    const TrialRecord b = run_trial(*problem, c, acq, 1);
    REQUIRE(a.rows.size() == static_cast<std::size_t>(c.budget + 1));
    std::set<int> seen;
    for (const auto& [node, y] : a.initial) {
      CHECK(seen.insert(node).second);
      CHECK(problem->classes[node] == y);
    }
    CHECK(a.initial.size() == 3);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].iteration == static_cast<int>(i));
      CHECK(a.rows[i].node == b.rows[i].node);
      CHECK(a.rows[i].accuracy == b.rows[i].accuracy);
      CHECK(a.rows[i].accuracy >= 0.0);
      CHECK(a.rows[i].accuracy <= 1.0);
      if (i > 0) {
        CHECK(seen.insert(a.rows[i].node).second);
        CHECK(a.rows[i].coverage >= a.rows[i - 1].coverage);
        CHECK(a.rows[i].label == problem->classes[a.rows[i].node]);
      }
    }
    CHECK(replay_accuracies(*problem, a) == [&] {
      std::vector<double> acc;
      for (const auto& r : a.rows) acc.push_back(r.accuracy);
      return acc;
    }());
  }
}

TEST_CASE("budget zero records only the initial state") {
  ExperimentConfig c = small_config();
  c.budget = 0;
  auto problem = prepare_problem(c);
  const TrialRecord r = run_trial(*problem, c, Acquisition::kDirVar, 0);
  CHECK(r.rows.size() == 1);
  CHECK(r.rows[0].node == -1);
  CHECK(r.rows[0].coverage == doctest::Approx(3.0 / 6.0));
}

TEST_CASE("pool exhaustion stops early") {
  ExperimentConfig c = small_config();
  c.dataset.n = 20;
  c.graph.k = 5;
  c.budget = 100;
  auto problem = prepare_problem(c);
  const TrialRecord r = run_trial(*problem, c, Acquisition::kDirVar, 0);
  CHECK(r.rows.size() == 20 - 3 + 1);
}

TEST_CASE("aggregation") {
  TrialRecord t;
  t.rows = {{0, -1, -1, 0.5, 0.2, 0.0}, {1, 3, 0, 0.7, 0.4, 0.0}};
  const auto one = aggregate({t});
  CHECK(one[1].mean_acc == 0.7);
  CHECK(one[1].std_acc == 0.0);
  TrialRecord u = t;
  u.rows[1].accuracy = 0.9;
  const auto two = aggregate({t, u});
  const auto rev = aggregate({u, t});
  CHECK(two[1].mean_acc == doctest::Approx(0.8));
  CHECK(two[1].std_acc == doctest::Approx(0.1));
  CHECK(two[1].mean_acc == rev[1].mean_acc);
  CHECK(two[0].std_acc == 0.0);
}

TEST_CASE("experiment output is reproducible") {
  ExperimentConfig c = small_config();
  c.budget = 5;
  auto p1 = prepare_problem(c);
  auto p2 = prepare_problem(c);
  std::ostringstream a, b, qa, qb;
  const auto r1 = run_experiment(*p1, c);
  const auto r2 = run_experiment(*p2, c);
  write_curves(r1, a);
  write_curves(r2, b);
  write_queries(r1, qa);
  write_queries(r2, qb);
  CHECK(a.str() == b.str());
  CHECK(qa.str() == qb.str());
  CHECK(a.str().rfind("acquisition,iteration,mean_acc,std_acc,mean_coverage,std_coverage\n", 0) ==
        0);
}

TEST_CASE("stochastic oracle follows its probabilities") {
  RowMatrix probs(1, 2);
  probs << 0.25, 0.75;
  Oracle o(probs, 3);
  int ones = 0;
  for (int i = 0; i < 4000; ++i) ones += o.query(0);
  CHECK(std::abs(ones - 3000) < 150);
  Oracle d(std::vector<int>{2, 1});
  CHECK(d.query(0) == 2);
}
