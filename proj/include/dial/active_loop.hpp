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

#ifndef DIAL_ACTIVE_LOOP_HPP_
#define DIAL_ACTIVE_LOOP_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dial/acquisition.hpp"
#include "dial/dataset.hpp"
#include "dial/dirichlet.hpp"
#include "dial/graph.hpp"
#include "dial/laplacian.hpp"
#include "dial/propagation.hpp"

namespace dial {

enum class DatasetKind { kRing, kMoons, kCsv, kIdx };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kRing;
  DatasetSource file;      // csv / idx
  int n = 2000;            // synthetic size
  int clusters = 10;       // ring
  double radius = 10.0;    // ring
  double spread = 0.5;     // ring
  double noise = 0.1;      // moons
  int modulo = 0;          // 0 keeps the original classes
};

struct ExperimentConfig {
  DatasetSpec dataset;
  KnnOptions graph;
  PropagationParams propagation;
  std::vector<Acquisition> acquisitions{Acquisition::kDirVarProp, Acquisition::kRandom};
  std::optional<double> lambda;   // empty: percentile heuristic each iteration
  int k_hat = 0;                  // 0: twice the class count
  std::optional<double> alpha0;   // empty: alpha0 heuristic
  double baseline_tau = 0.1;      // Gaussian-field covariance shift
  double baseline_noise = 0.01;
  int baseline_rank = 50;
  int initial_per_class = 1;
  int budget = 100;
  int trials = 10;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
};

// Flat INI sections: [dataset] [graph] [propagation] [acquisition] [model]
// [loop]. Throws ConfigError naming the path or the offending key.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& in);

struct ModuloLabels {
  std::vector<int> classes;
  std::vector<int> clusters;
};
ModuloLabels modulo_relabel(const std::vector<int>& labels, int k_mod);

// Deterministic oracle returns the stored class; the stochastic one draws
// class k with probability probs(x, k).
class Oracle {
 public:
  explicit Oracle(std::vector<int> classes) : classes_(std::move(classes)) {}
  Oracle(RowMatrix probs, std::uint64_t seed) : probs_(std::move(probs)), rng_(seed) {}

  int query(int node);
  bool stochastic() const { return probs_.size() > 0; }

 private:
  std::vector<int> classes_;
  RowMatrix probs_;
  std::mt19937_64 rng_;
};

// Everything a trial needs that does not depend on the trial: the relabeled
// data, its graph, the prior strength and a shared column cache.
struct Problem {
  Dataset data;
  std::vector<int> classes;
  std::vector<int> clusters;
  int num_classes = 0;
  int num_clusters = 0;
  std::shared_ptr<const SimilarityGraph> graph;
  std::unique_ptr<LaplacianOperator> laplacian;
  double alpha0 = 0.0;
  std::unique_ptr<PropagationCache> cache;
  std::optional<SpectralCache> spectrum;  // filled when a low-rank baseline runs
};

std::unique_ptr<Problem> prepare_problem(const ExperimentConfig& config);
// Builds a problem from an existing dataset (labels = classes, cluster ids
// default to the labels).
std::unique_ptr<Problem> prepare_problem(Dataset data, const ExperimentConfig& config);

struct IterationRow {
  int iteration = 0;
  int node = -1;    // -1 on the initial row
  int label = -1;
  double accuracy = 0.0;
  double coverage = 0.0;
  double seconds = 0.0;
};

struct TrialRecord {
  Acquisition acquisition = Acquisition::kRandom;
  int trial = 0;
  std::vector<std::pair<int, int>> initial;  // (node, class)
  std::vector<IterationRow> rows;
};

TrialRecord run_trial(Problem& problem, const ExperimentConfig& config,
                      Acquisition acquisition, int trial);

// Recomputes the accuracy column of a record from its label sequence.
std::vector<double> replay_accuracies(Problem& problem, const TrialRecord& record);

struct CurvePoint {
  int iteration = 0;
  double mean_acc = 0.0;
  double std_acc = 0.0;
  double mean_coverage = 0.0;
  double std_coverage = 0.0;
};

struct AcquisitionResult {
  Acquisition acquisition = Acquisition::kRandom;
  std::vector<TrialRecord> trials;
  std::vector<CurvePoint> curve;
};

// Pointwise mean and population standard deviation over the trials that
// reached each iteration.
std::vector<CurvePoint> aggregate(const std::vector<TrialRecord>& trials);

std::vector<AcquisitionResult> run_experiment(Problem& problem, const ExperimentConfig& config);

struct TimingRow {
  int n = 0;
  Acquisition acquisition = Acquisition::kDirVar;
  double seconds = 0.0;          // one full pool scoring pass
  int state_per_candidate = 0;   // numbers read per candidate score
};

struct TimingOptions {
  int repetitions = 5;
  int initial_labels = 10;
  int rank = 50;
  double min_batch_seconds = 5e-2;
  std::size_t evict_bytes = std::size_t{8} << 20;  // swept before every timed pass
  std::uint64_t seed = 1;
};

std::vector<TimingRow> timing_benchmark(const std::vector<int>& sizes,
                                        const std::vector<Acquisition>& acquisitions,
                                        const TimingOptions& options = {});

void write_curves(const std::vector<AcquisitionResult>& results, std::ostream& out);
void write_queries(const std::vector<AcquisitionResult>& results, std::ostream& out);
void write_timing(const std::vector<TimingRow>& rows, std::ostream& out);

}  // namespace dial

#endif  // DIAL_ACTIVE_LOOP_HPP_
