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

#include "dial/dirichlet.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <ostream>
#include <random>

#include "dial/error.hpp"
#include "dial/kernels.hpp"
#include "dial/numeric.hpp"

namespace dial {

DirichletField::DirichletField(int n, int num_classes, double alpha0, bool allow_repeats)
    : alpha_(RowMatrix::Zero(n, num_classes)),
      alpha0_(alpha0),
      allow_repeats_(allow_repeats),
      is_labeled_(static_cast<std::size_t>(n), 0) {
  if (n < 1 || num_classes < 1) throw DomainError("field needs n >= 1 and K >= 1");
  if (!(alpha0 >= 0.0)) throw DomainError("alpha0 must be >= 0");
}

bool DirichletField::is_labeled(int node) const {
  return is_labeled_.at(static_cast<std::size_t>(node)) != 0;
}

void DirichletField::add_label(const PropagationColumn& column, int k) {
  if (k < 0 || k >= num_classes()) {
    throw DomainError("class id " + std::to_string(k) + " outside [0, " +
                      std::to_string(num_classes()) + ")");
  }
  if (column.values.size() != size()) throw DomainError("column length differs from field size");
  if (column.source < 0 || column.source >= size()) throw DomainError("column source out of range");
  if (!allow_repeats_ && is_labeled(column.source)) {
    throw DomainError("node " + std::to_string(column.source) + " is already labeled");
  }
  alpha_.col(k) += column.values;
  labeled_.emplace_back(column.source, k);
  is_labeled_[static_cast<std::size_t>(column.source)] = 1;
}

namespace {

void require_positive_beta(const DirichletField& field) {
  const double prior = field.alpha0() * field.num_classes();
  for (int x = 0; x < field.size(); ++x) {
    if (!(field.alpha().row(x).sum() + prior > 0.0)) {
      throw DegenerateError("Dirichlet field has zero concentration at node " + std::to_string(x));
    }
  }
}

}  // namespace

RowMatrix posterior_mean(const DirichletField& field) {
  require_positive_beta(field);
  RowMatrix p = field.alpha().array() + field.alpha0();
  for (Eigen::Index x = 0; x < p.rows(); ++x) p.row(x) /= p.row(x).sum();
  return p;
}

std::vector<int> classify(const DirichletField& field) {
  require_positive_beta(field);
  std::vector<int> y(static_cast<std::size_t>(field.size()));
  for (int x = 0; x < field.size(); ++x) {
    Eigen::Index arg = 0;
    field.alpha().row(x).maxCoeff(&arg);  // first maximal index
    y[static_cast<std::size_t>(x)] = static_cast<int>(arg);
  }
  return y;
}

Eigen::VectorXd dirichlet_variance(const DirichletField& field) {
  require_positive_beta(field);
  const int n = field.size();
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  Eigen::VectorXd out(n);
  kernels::dirvar_scores({field.alpha().data(), static_cast<std::size_t>(field.alpha().size())},
                         field.num_classes(), field.alpha0(), all,
                         {out.data(), static_cast<std::size_t>(n)}, ExecutionPolicy::kParallel);
  return out;
}

double alpha0_heuristic(const ColumnFn& propagate, int n, int k_hat, std::uint64_t seed) {
  if (k_hat < 2) throw DomainError("alpha0 heuristic needs k_hat >= 2");
  constexpr int kMultiplier = 5;
  // Distinct sources; all nodes when the graph is smaller than the sample.
  std::vector<int> nodes(static_cast<std::size_t>(n));
  std::iota(nodes.begin(), nodes.end(), 0);
  std::vector<int> sources;
  std::sample(nodes.begin(), nodes.end(), std::back_inserter(sources),
              std::min(n, kMultiplier * k_hat), std::mt19937_64(seed));
  const double rank = 100.0 * (k_hat - 1) / k_hat;
  double best = 0.0;
  double mean = 0.0;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const PropagationColumn col = propagate(sources[s]);
    const double v = percentile({col.values.data(), static_cast<std::size_t>(col.values.size())},
                                rank);
    best = s == 0 ? v : std::max(best, v);
    mean += col.values.mean() / static_cast<double>(sources.size());
  }
  // Columns confined to small components put every percentile at zero, which
  // would leave unlabeled components with no concentration at all.
  if (!(best > 0.0)) return mean;
  return best;
}

double alpha0_heuristic(const LaplacianOperator& laplacian, double tau, int k_hat,
                        std::uint64_t seed, const CgOptions& cg) {
  return alpha0_heuristic([&](int s) { return poisson_propagate(laplacian, tau, s, cg); },
                          laplacian.size(), k_hat, seed);
}

void write_snapshot(const DirichletField& field, std::ostream& out) {
  const int K = field.num_classes();
  const RowMatrix p = posterior_mean(field);
  const Eigen::VectorXd var = dirichlet_variance(field);
  const std::vector<int> y = classify(field);
  out << "node";
  for (int k = 0; k < K; ++k) out << ",alpha_" << k;
  for (int k = 0; k < K; ++k) out << ",p_hat_" << k;
  out << ",variance,y_hat\n";
  out.precision(17);
  for (int x = 0; x < field.size(); ++x) {
    out << x;
    for (int k = 0; k < K; ++k) out << ',' << field.alpha()(x, k);
    for (int k = 0; k < K; ++k) out << ',' << p(x, k);
    out << ',' << var[x] << ',' << y[static_cast<std::size_t>(x)] << '\n';
  }
}

}  // namespace dial
