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

#ifndef DIAL_LAPLACIAN_HPP_
#define DIAL_LAPLACIAN_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "dial/graph.hpp"

namespace dial {

struct CgOptions {
  double tol = 1e-8;        // relative residual ||b - Ax|| / ||b||
  int max_iterations = 0;   // <= 0 means 10 * n
};

struct CgStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

using LinearMap = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Jacobi-preconditioned conjugate gradient for a symmetric positive definite
// operator. `x` holds the initial guess on entry. Throws ConvergenceError if
// the tolerance is not met within the iteration cap.
CgStats conjugate_gradient(const LinearMap& apply, const Eigen::VectorXd& diagonal,
                           const Eigen::VectorXd& b, Eigen::VectorXd& x, const CgOptions& options);

// r smallest eigenvalues (ascending) with orthonormal eigenvectors as columns.
struct SpectralCache {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  int rank() const { return static_cast<int>(eigenvalues.size()); }
};

// Applies L = D - W without forming it. Cheap to copy; shares the graph.
class LaplacianOperator {
 public:
  explicit LaplacianOperator(std::shared_ptr<const SimilarityGraph> graph,
                             ExecutionPolicy policy = ExecutionPolicy::kParallel);

  int size() const { return graph_->size(); }
  const SimilarityGraph& graph() const { return *graph_; }
  std::shared_ptr<const SimilarityGraph> graph_ptr() const { return graph_; }

  // y = (L + shift I) x
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y, double shift = 0.0) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x, double shift = 0.0) const;
  Eigen::MatrixXd to_dense(double shift = 0.0) const;

  // Solves (L + tau I) x = b.
  Eigen::VectorXd solve_shifted(const Eigen::VectorXd& b, double tau, const CgOptions& options,
                                CgStats* stats = nullptr) const;

  const std::optional<SpectralCache>& spectral_cache() const { return spectral_; }
  void set_spectral_cache(SpectralCache cache) { spectral_ = std::move(cache); }

 private:
  std::shared_ptr<const SimilarityGraph> graph_;
  ExecutionPolicy policy_;
  std::optional<SpectralCache> spectral_;
};

enum class EigenMethod { kAuto, kDense, kLanczos };

struct EigenOptions {
  double tol = 1e-8;  // bound on ||L e - lambda e|| per pair
  EigenMethod method = EigenMethod::kAuto;
  int dense_cutoff = 2000;  // kAuto uses the dense solver at or below this n
  int max_restarts = 50;
  std::uint64_t seed = 7;
};

SpectralCache smallest_eigenpairs(const LaplacianOperator& laplacian, int r,
                                  const EigenOptions& options = {});

}  // namespace dial

#endif  // DIAL_LAPLACIAN_HPP_
