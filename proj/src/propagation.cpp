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

#include "dial/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>

#include "dial/error.hpp"

namespace dial {

void verify_column(const PropagationColumn& column) {
  const auto& v = column.values;
  if (column.source < 0 || column.source >= v.size()) {
    throw NumericalError("column source out of range");
  }
  if (v[column.source] != 1.0) throw NumericalError("column is not normalized at its source");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
      throw NumericalError("column entry " + std::to_string(i) + " outside [0, 1]");
    }
  }
}

namespace {

// Normalizes raw values to (v - floor) / (v[source] - floor) with the
// source pinned at exactly 1; entries are clamped into [0, 1] to absorb
// solver round-off.
Eigen::VectorXd shift_scale(const Eigen::VectorXd& raw, int source, double floor) {
  const double span = raw[source] - floor;
  if (!(span > 0.0)) {
    throw DegenerateError("propagation from node " + std::to_string(source) +
                          " is constant and cannot be normalized");
  }
  Eigen::VectorXd out = ((raw.array() - floor) / span).cwiseMax(0.0).cwiseMin(1.0);
  out[source] = 1.0;
  return out;
}

}  // namespace

Eigen::VectorXd poisson_solve(const LaplacianOperator& laplacian, double tau, int source,
                              const CgOptions& cg, CgStats* stats) {
  if (!(tau > 0.0)) throw DomainError("Poisson propagation needs tau > 0");
  if (source < 0 || source >= laplacian.size()) throw DomainError("source out of range");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(laplacian.size());
  rhs[source] = 1.0;
  return laplacian.solve_shifted(rhs, tau, cg, stats);
}

PropagationColumn poisson_propagate(const LaplacianOperator& laplacian, double tau, int source,
                                    const CgOptions& cg) {
  PropagationColumn col;
  col.source = source;
  col.params.kind = PropagationKind::kPoisson;
  col.params.tau = tau;
  const Eigen::VectorXd g = poisson_solve(laplacian, tau, source, cg, &col.solver);
  col.raw_peak = g[source];
  col.values = shift_scale(g, source, g.minCoeff());
  return col;
}

PropagationColumn rbf_propagate(const Dataset& dataset, double sigma, int source) {
  if (!(sigma > 0.0)) throw DomainError("rbf propagation needs sigma > 0");
  if (source < 0 || source >= dataset.size()) throw DomainError("source out of range");
  PropagationColumn col;
  col.source = source;
  col.params.kind = PropagationKind::kRbf;
  col.params.sigma = sigma;
  const auto src = dataset.features.row(source);
  col.values.resize(dataset.size());
  for (int i = 0; i < dataset.size(); ++i) {
    const double d2 = (dataset.features.row(i) - src).squaredNorm();
    col.values[i] = std::exp(-d2 / (2.0 * sigma * sigma));
  }
  col.values[source] = 1.0;
  return col;
}

PropagationColumn heat_propagate(const LaplacianOperator& laplacian, double time, int source,
                                 int rank) {
  const auto& cache = laplacian.spectral_cache();
  if (!cache || cache->rank() < 2) {
    throw DomainError("heat propagation needs a spectral cache with at least 2 modes");
  }
  if (time < 0.0) throw DomainError("heat propagation needs time >= 0");
  if (source < 0 || source >= laplacian.size()) throw DomainError("source out of range");
  const int r = rank > 0 ? std::min(rank, cache->rank()) : cache->rank();
  const auto vecs = cache->eigenvectors.leftCols(r);
  Eigen::VectorXd coeff(r);
  for (int k = 0; k < r; ++k) coeff[k] = std::exp(-cache->eigenvalues[k] * time) * vecs(source, k);
  Eigen::VectorXd h = (vecs * coeff).cwiseMax(0.0);

  PropagationColumn col;
  col.source = source;
  col.params.kind = PropagationKind::kHeat;
  col.params.time = time;
  col.params.rank = r;
  col.raw_peak = h[source];
  if (!(h[source] > 0.0)) {
    throw DegenerateError("heat kernel vanishes at source " + std::to_string(source) +
                          " (time too large or rank too small)");
  }
  // Truncation can leave entries above the source value; the column is
  // clamped to [0, 1] like the other kernels.
  col.values = shift_scale(h, source, 0.0);
  return col;
}

ColumnFn make_propagator(const LaplacianOperator& laplacian, const Dataset& dataset,
                         const PropagationParams& params, const CgOptions& cg) {
  switch (params.kind) {
    case PropagationKind::kPoisson:
      return [laplacian, tau = params.tau, cg](int s) {
        return poisson_propagate(laplacian, tau, s, cg);
      };
    case PropagationKind::kRbf:
      return [&dataset, sigma = params.sigma](int s) { return rbf_propagate(dataset, sigma, s); };
    case PropagationKind::kHeat:
      return [laplacian, t = params.time, r = params.rank](int s) {
        return heat_propagate(laplacian, t, s, r);
      };
  }
  throw DomainError("unknown propagation kind");
}

const PropagationColumn& PropagationCache::get(int source) {
  {
    std::shared_lock lock(mutex_);
    auto it = columns_.find(source);
    if (it != columns_.end()) return it->second;
  }
  PropagationColumn col = propagate_(source);
  std::unique_lock lock(mutex_);
  return columns_.try_emplace(source, std::move(col)).first->second;
}

void PropagationCache::prefetch(std::span<const int> sources) {
  std::vector<int> missing;
  {
    std::shared_lock lock(mutex_);
    for (int s : sources) {
      if (!columns_.count(s)) missing.push_back(s);
    }
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  std::vector<PropagationColumn> computed(missing.size());
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(missing.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      computed[i] = propagate_(missing[i]);
    } catch (...) {
#pragma omp critical(dial_prefetch_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::unique_lock lock(mutex_);
  for (auto& col : computed) columns_.try_emplace(col.source, std::move(col));
}

bool PropagationCache::contains(int source) const {
  std::shared_lock lock(mutex_);
  return columns_.count(source) > 0;
}

std::size_t PropagationCache::size() const {
  std::shared_lock lock(mutex_);
  return columns_.size();
}

int PropagationCache::total_cg_iterations() const {
  std::shared_lock lock(mutex_);
  int total = 0;
  for (const auto& [_, col] : columns_) total += col.solver.iterations;
  return total;
}

double PropagationCache::worst_cg_residual() const {
  std::shared_lock lock(mutex_);
  double worst = 0.0;
  for (const auto& [_, col] : columns_) worst = std::max(worst, col.solver.relative_residual);
  return worst;
}

SeparationEstimate measure_class_separation(const Eigen::MatrixXd& kernel,
                                            std::span<const int> cluster_ids,
                                            std::span<const double> deltas) {
  const auto m = static_cast<int>(cluster_ids.size());
  if (kernel.rows() != m || kernel.cols() != m) {
    throw DomainError("kernel matrix must be square over the probe sample");
  }
  int num_clusters = 0;
  for (int c : cluster_ids) num_clusters = std::max(num_clusters, c + 1);
  std::vector<std::vector<int>> members(num_clusters);
  for (int a = 0; a < m; ++a) members[cluster_ids[a]].push_back(a);
  int populated = 0;
  for (const auto& mem : members) populated += mem.empty() ? 0 : 1;
  if (populated < 2) throw DomainError("class separation needs at least two clusters in the probe");
  if (deltas.empty()) throw DomainError("class separation needs at least one delta");

  // Weakest link of a within its own retained cluster, in both directions.
  auto weakest = [&](int a, const std::vector<int>& kept) {
    double w = 1.0;
    for (int b : kept) w = std::min({w, kernel(a, b), kernel(b, a)});
    return w;
  };

  SeparationEstimate best;
  bool have_best = false;
  for (double delta : deltas) {
    if (delta < 0.0 || delta >= 1.0) throw DomainError("delta must lie in [0, 1)");
    std::vector<std::vector<int>> kept(num_clusters);
    for (int c = 0; c < num_clusters; ++c) {
      kept[c] = members[c];
      const auto target = static_cast<std::size_t>(
          std::ceil((1.0 - delta) * static_cast<double>(members[c].size()) - 1e-12));
      while (kept[c].size() > std::max<std::size_t>(target, 1)) {
        std::size_t worst = 0;
        double worst_value = std::numeric_limits<double>::infinity();
        for (std::size_t idx = 0; idx < kept[c].size(); ++idx) {
          const double w = weakest(kept[c][idx], kept[c]);
          if (w < worst_value) {
            worst_value = w;
            worst = idx;
          }
        }
        kept[c].erase(kept[c].begin() + static_cast<std::ptrdiff_t>(worst));
      }
    }
    double zeta = 1.0;
    double epsilon = 0.0;
    for (int c = 0; c < num_clusters; ++c) {
      for (int a : kept[c]) {
        zeta = std::min(zeta, weakest(a, kept[c]));
        for (int c2 = 0; c2 < num_clusters; ++c2) {
          if (c2 == c) continue;
          for (int b : kept[c2]) epsilon = std::max(epsilon, kernel(a, b));
        }
      }
    }
    SeparationEstimate candidate{delta, zeta, epsilon};
    if (!have_best || candidate.margin() > best.margin()) {
      best = candidate;
      have_best = true;
    }
  }
  return best;
}

void write_column(const PropagationColumn& column, std::ostream& out) {
  out << "node,value\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < column.values.size(); ++i) {
    out << i << ',' << column.values[i] << '\n';
  }
}

}  // namespace dial
