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

// Per-element bodies shared by the serial and parallel kernels so both
// produce identical floating point results.

#ifndef DIAL_SRC_KERNELS_COMMON_HPP_
#define DIAL_SRC_KERNELS_COMMON_HPP_

#include <utility>

#include "dial/kernels.hpp"

namespace dial::kernels::detail {

inline double cosine(const RowMatrixView& f, const Eigen::VectorXd& norms, int i, int j) {
  return f.row(i).dot(f.row(j)) / (norms[i] * norms[j]);
}

inline double squared_distance(const RowMatrixView& f, int i, int j) {
  return (f.row(i) - f.row(j)).squaredNorm();
}

// Strict weak order putting nearer candidates first; equal scores fall back
// to the smaller index so results never depend on sort stability.
struct FartherLast {
  bool larger_is_nearer;
  bool operator()(const std::pair<double, int>& a, const std::pair<double, int>& b) const {
    if (a.first != b.first) return larger_is_nearer ? a.first > b.first : a.first < b.first;
    return a.second < b.second;
  }
};

inline double laplacian_row(const CsrView& w, std::span<const double> degrees, double shift,
                            std::span<const double> x, int i) {
  double acc = (degrees[i] + shift) * x[i];
  for (auto e = w.offsets[i]; e < w.offsets[i + 1]; ++e) acc -= w.vals[e] * x[w.cols[e]];
  return acc;
}

inline double dirvar_row(const double* alpha, int K, double alpha0) {
  double beta = 0.0;
  double sumsq = 0.0;
  for (int k = 0; k < K; ++k) {
    const double a = alpha[k] + alpha0;
    beta += a;
    sumsq += a * a;
  }
  return (beta * beta - sumsq) / (beta * beta * (beta + 1.0));
}

inline void covariance_column_scores(const Eigen::MatrixXd& cov, double noise, int x,
                                     double* vopt, double* sigmaopt) {
  const double* col = cov.data() + static_cast<std::ptrdiff_t>(x) * cov.rows();
  double sum = 0.0;
  double sumsq = 0.0;
  for (Eigen::Index j = 0; j < cov.rows(); ++j) {
    sum += col[j];
    sumsq += col[j] * col[j];
  }
  const double denom = col[x] + noise;
  if (vopt) *vopt = sumsq / denom;
  if (sigmaopt) *sigmaopt = sum * sum / denom;
}

}  // namespace dial::kernels::detail

#endif  // DIAL_SRC_KERNELS_COMMON_HPP_
