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

#ifndef DIAL_THEORY_HPP_
#define DIAL_THEORY_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dial/dataset.hpp"

namespace dial::theory {

struct Component1D {
  double weight = 1.0;
  double mean = 0.0;
  double stddev = 1.0;
  int class_id = 0;
};

struct Mixture1D {
  std::vector<Component1D> components;
  double lower = -5.0;
  double upper = 5.0;

  int num_classes() const;
  // Normalized mixture density.
  double density(double x) const;
};

// Four alternating components on [-5, 5]; symmetric under x -> -x with the
// two classes swapped.
Mixture1D default_mixture();

std::vector<double> uniform_grid(double lower, double upper, int points);

// eta(x, k) = w_k rho_k(x) / rho(x) summed per class. Throws DomainError if
// rho vanishes at a grid point.
RowMatrix eval_eta(const Mixture1D& mixture, std::span<const double> grid);

// G = sum_k eta_k (1 - eta_k).
double population_uncertainty(std::span<const double> eta);
Eigen::VectorXd population_uncertainty(const RowMatrix& eta);

struct LambdaSchedule {
  enum class Kind { kConstant, kPower, kLinear };
  Kind kind = Kind::kConstant;
  double value = 1.0;  // constant lambda, exponent p, or slope l0

  double operator()(double t) const;
  // "constant", "constant:v", "power:p", "linear:l0".
  static LambdaSchedule parse(const std::string& text);
};

struct OdeOptions {
  double t_end = 1e10;
  int steps_per_decade = 400;
  double t_start = 1e-8;
  double seed_mass = 1e-6;  // alpha(x, 0) = seed_mass * eta(x)
};

struct QSnapshot {
  double t = 0.0;
  Eigen::VectorXd q;
};

struct OdeResult {
  std::vector<double> grid;
  RowMatrix eta;
  Eigen::VectorXd uncertainty;  // G on the grid
  RowMatrix alpha;              // final state
  Eigen::VectorXd q;            // final sampling density
  std::vector<QSnapshot> snapshots;  // one per decade
  int steps = 0;
  // Worst ray deviation |alpha / |alpha|_1 - eta|_inf over all steps.
  double ray_deviation = 0.0;
};

// Dirac-kernel limit d/dt alpha = q eta with q proportional to
// exp(lambda(t) V(alpha)), integrated by explicit Euler in log time.
OdeResult evolve_alpha(const Mixture1D& mixture, std::span<const double> grid,
                       const LambdaSchedule& schedule, const OdeOptions& options = {});

struct FixedPointResult {
  Eigen::VectorXd q;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped iteration q <- (1 - gamma) q + gamma F(q), F(q) = normalize(exp(lambda0 G / q)).
FixedPointResult fixed_point_qbar(double lambda0, std::span<const double> grid,
                                  const Eigen::VectorXd& uncertainty, double gamma = 0.1,
                                  double tol = 1e-9, int max_iterations = 100000);

struct BoundResult {
  double c = 0.0;           // factored form
  double c_expanded = 0.0;  // multiplied out
  double probability = 0.0;
};

// Constant C(alpha0, eps, zeta, K) and the K-step all-classes probability
// lower bound. Throws DomainError for alpha0 <= 0 or out-of-range inputs.
BoundResult exploration_bound(double alpha0, double epsilon, double zeta, double delta, int K,
                              double lambda, double w_min);
double exploration_constant(double alpha0, double epsilon, double zeta, int K);
double exploration_constant_expanded(double alpha0, double epsilon, double zeta, int K);
// (1 - exp(-lambda (K + 1) / (2 K (K alpha0 + 1))) / w_min)^K, clamped at 0.
double simplified_bound(double alpha0, int K, double lambda, double w_min);

struct DiscoveryOptions {
  int points_per_cluster = 200;
  int trials = 10000;
  std::uint64_t seed = 0;
};

struct DiscoveryResult {
  double frequency = 0.0;
  double standard_error = 0.0;  // binomial, from the empirical frequency
  int successes = 0;
  int trials = 0;
};

// Proportional sampling on point masses w_k / m per cluster for K steps.
// Within-cluster kernel zeta, across epsilon, self 1. A delta share of each
// cluster is background: as a source it propagates 1 everywhere, as a
// target it receives nothing but its own label.
DiscoveryResult monte_carlo_discovery(double delta, double zeta, double epsilon, double alpha0,
                                      double lambda, std::span<const double> weights,
                                      const DiscoveryOptions& options = {});

// s = sum_y P_y(x) prod_z P_y(z)^K(x, z) with 0^0 = 1.
double alignment_score(const RowMatrix& probs, const Eigen::MatrixXd& kernel, int x);
// w = prod_z Gamma(alpha0 + K(x, z)) / Gamma(K alpha0 + K(x, z)).
double centrality_weight(const Eigen::MatrixXd& kernel, double alpha0, int num_classes, int x);

struct ConsistencyRow {
  int n = 0;
  double bandwidth = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;       // across trials
  double standard_error = 0.0;  // of the mean
};

struct ConsistencyOptions {
  int trials = 20;
  int grid_points = 401;
  double exponent = -1.0 / 3.0;  // t(n) = n^exponent
  std::uint64_t seed = 0;
};

// L1(rho) error of the kernel trend estimate for a binary mixture, with a
// Gaussian kernel exp(-(x - z)^2 / (4 t)) and the normalizer integrated
// against the true density.
std::vector<ConsistencyRow> empirical_consistency(const Mixture1D& mixture,
                                                  const std::vector<int>& sizes,
                                                  const ConsistencyOptions& options = {});

}  // namespace dial::theory

#endif  // DIAL_THEORY_HPP_
