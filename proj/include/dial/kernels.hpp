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

// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference in `serial::` and an OpenMP version in `parallel::` that must
// produce bit-identical output (each output element is computed by exactly
// one thread in the same order as the serial loop).

#ifndef DIAL_KERNELS_HPP_
#define DIAL_KERNELS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dial {

enum class ExecutionPolicy { kSerial, kParallel };

// Caps OpenMP worker count; <= 0 restores the runtime default.
void set_thread_limit(int threads);
int thread_limit();

namespace kernels {

using RowMatrixView =
    Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Row i's k nearest neighbours, nearest first, self excluded. For cosine the
// score is the similarity (larger is nearer); for euclidean it is the
// distance. Ties go to the smaller index.
struct NeighborTable {
  int k = 0;
  std::vector<int> index;     // n * k
  std::vector<double> score;  // n * k
};

struct CsrView {
  std::span<const std::int64_t> offsets;
  std::span<const int> cols;
  std::span<const double> vals;
};

namespace serial {
NeighborTable knn_cosine(RowMatrixView features, int k);
NeighborTable knn_euclidean(RowMatrixView features, int k);
// y = (D - W + shift I) x
void laplacian_apply(CsrView w, std::span<const double> degrees, double shift,
                     std::span<const double> x, std::span<double> y);
// Dirichlet variance at each pool node; alpha is n x K row-major.
void dirvar_scores(std::span<const double> alpha, int K, double alpha0,
                   std::span<const int> pool, std::span<double> out);
// VOpt and Sigma-Opt scores from a dense symmetric covariance. Either
// output span may be empty to skip it.
void covariance_scores(const Eigen::MatrixXd& cov, double noise, std::span<const int> pool,
                       std::span<double> vopt, std::span<double> sigmaopt);
}  // namespace serial

namespace parallel {
NeighborTable knn_cosine(RowMatrixView features, int k);
NeighborTable knn_euclidean(RowMatrixView features, int k);
void laplacian_apply(CsrView w, std::span<const double> degrees, double shift,
                     std::span<const double> x, std::span<double> y);
void dirvar_scores(std::span<const double> alpha, int K, double alpha0,
                   std::span<const int> pool, std::span<double> out);
void covariance_scores(const Eigen::MatrixXd& cov, double noise, std::span<const int> pool,
                       std::span<double> vopt, std::span<double> sigmaopt);
}  // namespace parallel

// Policy dispatch.
NeighborTable knn_cosine(RowMatrixView features, int k, ExecutionPolicy policy);
NeighborTable knn_euclidean(RowMatrixView features, int k, ExecutionPolicy policy);
void laplacian_apply(CsrView w, std::span<const double> degrees, double shift,
                     std::span<const double> x, std::span<double> y, ExecutionPolicy policy);
void dirvar_scores(std::span<const double> alpha, int K, double alpha0,
                   std::span<const int> pool, std::span<double> out, ExecutionPolicy policy);
void covariance_scores(const Eigen::MatrixXd& cov, double noise, std::span<const int> pool,
                       std::span<double> vopt, std::span<double> sigmaopt,
                       ExecutionPolicy policy);

// Closed-form trace of a Dirichlet covariance for concentration alpha_tilde.
inline double dirichlet_trace(const double* alpha_tilde, int K) {
  double beta = 0.0;
  double sumsq = 0.0;
  for (int k = 0; k < K; ++k) {
    beta += alpha_tilde[k];
    sumsq += alpha_tilde[k] * alpha_tilde[k];
  }
  return (beta * beta - sumsq) / (beta * beta * (beta + 1.0));
}

}  // namespace kernels
}  // namespace dial

#endif  // DIAL_KERNELS_HPP_
