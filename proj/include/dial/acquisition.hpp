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

#ifndef DIAL_ACQUISITION_HPP_
#define DIAL_ACQUISITION_HPP_

#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dial/dirichlet.hpp"
#include "dial/kernels.hpp"
#include "dial/laplacian.hpp"

namespace dial {

struct AcquisitionScores {
  std::string name;
  std::vector<int> candidates;
  std::vector<double> values;  // aligned with candidates
};

AcquisitionScores dir_var_scores(const DirichletField& field, std::span<const int> pool,
                                 ExecutionPolicy policy = ExecutionPolicy::kParallel);

struct LaplaceSolution {
  RowMatrix scores;               // n x K
  std::vector<char> unanchored;   // node lies in a component with no label
  int cg_iterations = 0;
};

// Harmonic extension with labeled rows fixed to their one-hot labels.
// Components without any label receive the labeled-class mean vector.
LaplaceSolution laplace_learning(const LaplacianOperator& laplacian, std::span<const int> nodes,
                                 std::span<const int> labels, int num_classes,
                                 const CgOptions& cg = {});

// -(p_(1) - p_(2)) from the two largest entries of each pool row.
AcquisitionScores smallest_margin_scores(const RowMatrix& prob, std::span<const int> pool);

// Gaussian-field covariance C = (L + tau I)^{-1}, stored densely or as
// C = V S V^T over r eigenvectors V, conditioned on noisy observations by
// rank-1 downdates.
class GaussianFieldCovariance {
 public:
  static GaussianFieldCovariance dense(const LaplacianOperator& laplacian, double tau,
                                       double noise = 0.01);
  static GaussianFieldCovariance low_rank(const SpectralCache& spectrum, double tau,
                                          double noise = 0.01);

  int size() const;
  bool is_low_rank() const { return low_rank_; }
  double noise() const { return noise_; }

  // C <- C - C[:,x] C[x,:] / (C[x,x] + noise)
  void condition(int x);
  double variance(int x) const;
  Eigen::MatrixXd to_dense() const;

  // Either span may be empty. Throws NumericalError on a negative diagonal.
  void scores(std::span<const int> pool, std::span<double> vopt, std::span<double> sigmaopt,
              ExecutionPolicy policy = ExecutionPolicy::kParallel) const;

 private:
  void refresh_product();

  bool low_rank_ = false;
  double noise_ = 0.01;
  Eigen::MatrixXd cov_;    // dense
  RowMatrix basis_;        // V, n x r
  Eigen::MatrixXd core_;   // S, r x r
  RowMatrix product_;      // V S, refreshed on every downdate
  Eigen::VectorXd diag_;   // C_xx of the low-rank form
  Eigen::VectorXd basis_sums_;
};

AcquisitionScores vopt_scores(const GaussianFieldCovariance& cov, std::span<const int> pool,
                              ExecutionPolicy policy = ExecutionPolicy::kParallel);
AcquisitionScores sigmaopt_scores(const GaussianFieldCovariance& cov, std::span<const int> pool,
                                  ExecutionPolicy policy = ExecutionPolicy::kParallel);

// Maximizer, ties to the first candidate.
int select_max(const AcquisitionScores& scores);
// Samples from softmax(lambda * values).
int select_proportional(const AcquisitionScores& scores, double lambda, std::mt19937_64& rng);

// lambda putting softmax mass 0.75 on the scores at or above their
// 100 (k_hat - 1) / k_hat percentile; 0 for constant scores, capped at 1e6.
double lambda_heuristic(std::span<const double> scores, int k_hat);
inline constexpr double kLambdaCap = 1e6;
inline constexpr double kLambdaTargetMass = 0.75;

enum class Acquisition {
  kDirVar,
  kDirVarProp,
  kUncSm,
  kVopt,
  kVoptLowRank,
  kSigmaOpt,
  kSigmaOptLowRank,
  kRandom,
};

Acquisition parse_acquisition(std::string_view name);
std::string_view acquisition_name(Acquisition acquisition);
bool uses_covariance(Acquisition acquisition);
bool uses_low_rank(Acquisition acquisition);

}  // namespace dial

#endif  // DIAL_ACQUISITION_HPP_
