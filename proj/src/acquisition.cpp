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

#include "dial/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "dial/error.hpp"
#include "dial/numeric.hpp"

namespace dial {

AcquisitionScores dir_var_scores(const DirichletField& field, std::span<const int> pool,
                                 ExecutionPolicy policy) {
  AcquisitionScores out{"dirvar", {pool.begin(), pool.end()}, std::vector<double>(pool.size())};
  const double prior = field.alpha0() * field.num_classes();
  for (int x : pool) {
    if (x < 0 || x >= field.size()) throw DomainError("pool node out of range");
    if (!(field.alpha().row(x).sum() + prior > 0.0)) {
      throw DegenerateError("Dirichlet field has zero concentration at node " + std::to_string(x));
    }
  }
  kernels::dirvar_scores({field.alpha().data(), static_cast<std::size_t>(field.alpha().size())},
                         field.num_classes(), field.alpha0(), pool, out.values, policy);
  return out;
}

LaplaceSolution laplace_learning(const LaplacianOperator& laplacian, std::span<const int> nodes,
                                 std::span<const int> labels, int num_classes,
                                 const CgOptions& cg) {
  const int n = laplacian.size();
  if (nodes.empty()) throw DomainError("Laplace learning needs at least one label");
  if (nodes.size() != labels.size()) throw DomainError("labeled nodes and labels differ in length");

  LaplaceSolution sol{RowMatrix::Zero(n, num_classes), std::vector<char>(n, 1), 0};
  std::vector<char> fixed(n, 0);
  Eigen::RowVectorXd mean_label = Eigen::RowVectorXd::Zero(num_classes);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int x = nodes[i];
    const int k = labels[i];
    if (x < 0 || x >= n) throw DomainError("labeled node out of range");
    if (k < 0 || k >= num_classes) throw DomainError("label outside [0, K)");
    fixed[x] = 1;
    sol.scores.row(x).setZero();
    sol.scores(x, k) = 1.0;
    mean_label[k] += 1.0;
  }
  mean_label /= static_cast<double>(nodes.size());

  const ConnectivityReport comps = connectivity(laplacian.graph());
  std::vector<char> anchored_component(comps.num_components, 0);
  for (int x : nodes) anchored_component[comps.component[x]] = 1;

  std::vector<int> free_nodes;
  for (int x = 0; x < n; ++x) {
    sol.unanchored[x] = anchored_component[comps.component[x]] ? 0 : 1;
    if (sol.unanchored[x]) {
      sol.scores.row(x) = mean_label;
    } else if (!fixed[x]) {
      free_nodes.push_back(x);
    }
  }
  if (free_nodes.empty()) return sol;

  const auto m = static_cast<Eigen::Index>(free_nodes.size());
  Eigen::VectorXd diag(m);
  for (Eigen::Index i = 0; i < m; ++i) diag[i] = laplacian.graph().degrees()[free_nodes[i]];
  Eigen::VectorXd full(n), lfull(n);
  auto apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    full.setZero();
    for (Eigen::Index i = 0; i < m; ++i) full[free_nodes[i]] = in[i];
    laplacian.apply(full, lfull);
    out.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) out[i] = lfull[free_nodes[i]];
  };
  for (int k = 0; k < num_classes; ++k) {
    // rhs = W_ul Y_l = -(L y_l) restricted to the free nodes.
    Eigen::VectorXd yl = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < nodes.size(); ++i) yl[nodes[i]] = labels[i] == k ? 1.0 : 0.0;
    const Eigen::VectorXd lyl = laplacian.apply(yl);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) rhs[i] = -lyl[free_nodes[i]];
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    sol.cg_iterations += conjugate_gradient(apply, diag, rhs, u, cg).iterations;
    for (Eigen::Index i = 0; i < m; ++i) sol.scores(free_nodes[i], k) = u[i];
  }
  return sol;
}

AcquisitionScores smallest_margin_scores(const RowMatrix& prob, std::span<const int> pool) {
  AcquisitionScores out{"unc-sm", {pool.begin(), pool.end()}, std::vector<double>(pool.size())};
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto row = prob.row(pool[i]);
    double first = -std::numeric_limits<double>::infinity();
    double second = first;
    for (Eigen::Index k = 0; k < row.size(); ++k) {
      if (!std::isfinite(row[k])) throw NumericalError("non-finite probability row");
      if (row[k] > first) {
        second = first;
        first = row[k];
      } else if (row[k] > second) {
        second = row[k];
      }
    }
    out.values[i] = row.size() < 2 ? -1.0 : -(first - second);
  }
  return out;
}

GaussianFieldCovariance GaussianFieldCovariance::dense(const LaplacianOperator& laplacian,
                                                       double tau, double noise) {
  if (!(tau > 0.0)) throw DomainError("covariance shift tau must be positive");
  if (!(noise >= 0.0)) throw DomainError("observation noise must be >= 0");
  GaussianFieldCovariance c;
  c.noise_ = noise;
  Eigen::LLT<Eigen::MatrixXd> llt(laplacian.to_dense(tau));
  if (llt.info() != Eigen::Success) throw NumericalError("L + tau I is not positive definite");
  c.cov_ = llt.solve(Eigen::MatrixXd::Identity(laplacian.size(), laplacian.size()));
  c.cov_ = 0.5 * (c.cov_ + c.cov_.transpose());
  return c;
}

GaussianFieldCovariance GaussianFieldCovariance::low_rank(const SpectralCache& spectrum,
                                                          double tau, double noise) {
  if (!(tau > 0.0)) throw DomainError("covariance shift tau must be positive");
  if (!(noise >= 0.0)) throw DomainError("observation noise must be >= 0");
  GaussianFieldCovariance c;
  c.low_rank_ = true;
  c.noise_ = noise;
  c.basis_ = spectrum.eigenvectors;
  c.core_ = (spectrum.eigenvalues.array() + tau).inverse().matrix().asDiagonal();
  c.basis_sums_ = c.basis_.colwise().sum().transpose();
  c.refresh_product();
  return c;
}

void GaussianFieldCovariance::refresh_product() {
  product_.noalias() = basis_ * core_;
  diag_ = (basis_.array() * product_.array()).rowwise().sum();
}

int GaussianFieldCovariance::size() const {
  return static_cast<int>(low_rank_ ? basis_.rows() : cov_.rows());
}

void GaussianFieldCovariance::condition(int x) {
  if (x < 0 || x >= size()) throw DomainError("conditioning node out of range");
  if (low_rank_) {
    const Eigen::VectorXd sv = core_ * basis_.row(x).transpose();
    const double denom = basis_.row(x).dot(sv) + noise_;
    if (!(denom > 0.0)) throw NumericalError("covariance downdate with nonpositive pivot");
    core_.noalias() -= sv * sv.transpose() / denom;
    core_ = 0.5 * (core_ + core_.transpose());
    refresh_product();
  } else {
    const Eigen::VectorXd col = cov_.col(x);
    const double denom = col[x] + noise_;
    if (!(denom > 0.0)) throw NumericalError("covariance downdate with nonpositive pivot");
    cov_.noalias() -= col * col.transpose() / denom;
    cov_ = 0.5 * (cov_ + cov_.transpose());
  }
}

double GaussianFieldCovariance::variance(int x) const {
  if (!low_rank_) return cov_(x, x);
  return diag_[x];
}

Eigen::MatrixXd GaussianFieldCovariance::to_dense() const {
  return low_rank_ ? Eigen::MatrixXd(basis_ * core_ * basis_.transpose()) : cov_;
}

void GaussianFieldCovariance::scores(std::span<const int> pool, std::span<double> vopt,
                                     std::span<double> sigmaopt, ExecutionPolicy policy) const {
  for (int x : pool) {
    if (x < 0 || x >= size()) throw DomainError("pool node out of range");
  }
  auto negative = [](int x) {
    return NumericalError("covariance has negative diagonal at node " + std::to_string(x));
  };
  if (!low_rank_) {
    for (int x : pool) {
      if (cov_(x, x) < 0.0) throw negative(x);
    }
    kernels::covariance_scores(cov_, noise_, pool, vopt, sigmaopt, policy);
    return;
  }
  // With orthonormal V: C[:,x] = V m_x where m_x = S v_x, so C_xx = v_x . m_x
  // (kept in diag_), sum_j C_jx^2 = |m_x|^2 and sum_j C_jx = (V^T 1) . m_x.
  for (int x : pool) {
    if (diag_[x] < 0.0) throw negative(x);
  }
  const RowMatrix& m = product_;
  const auto count = static_cast<std::ptrdiff_t>(pool.size());
#pragma omp parallel for schedule(static) if (policy == ExecutionPolicy::kParallel && count > 256)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const int x = pool[i];
    const double denom = diag_[x] + noise_;
    if (!vopt.empty()) vopt[i] = m.row(x).squaredNorm() / denom;
    if (!sigmaopt.empty()) {
      const double s = m.row(x).dot(basis_sums_.transpose());
      sigmaopt[i] = s * s / denom;
    }
  }
}

AcquisitionScores vopt_scores(const GaussianFieldCovariance& cov, std::span<const int> pool,
                              ExecutionPolicy policy) {
  AcquisitionScores out{cov.is_low_rank() ? "vopt-lowrank" : "vopt",
                        {pool.begin(), pool.end()},
                        std::vector<double>(pool.size())};
  cov.scores(pool, out.values, {}, policy);
  return out;
}

AcquisitionScores sigmaopt_scores(const GaussianFieldCovariance& cov, std::span<const int> pool,
                                  ExecutionPolicy policy) {
  AcquisitionScores out{cov.is_low_rank() ? "sigmaopt-lowrank" : "sigmaopt",
                        {pool.begin(), pool.end()},
                        std::vector<double>(pool.size())};
  cov.scores(pool, {}, out.values, policy);
  return out;
}

int select_max(const AcquisitionScores& scores) {
  if (scores.candidates.empty()) throw DomainError("cannot select from an empty pool");
  const auto it = std::max_element(scores.values.begin(), scores.values.end());
  return scores.candidates[static_cast<std::size_t>(it - scores.values.begin())];
}

int select_proportional(const AcquisitionScores& scores, double lambda, std::mt19937_64& rng) {
  if (scores.candidates.empty()) throw DomainError("cannot select from an empty pool");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  const std::vector<double> p = softmax(scores.values, lambda);
  std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
  return scores.candidates[pick(rng)];
}

double lambda_heuristic(std::span<const double> scores, int k_hat) {
  if (k_hat < 2) throw DomainError("lambda heuristic needs k_hat >= 2");
  if (scores.empty()) return 0.0;
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 0.0)) return 0.0;
  // Work on scores rescaled to [0, 1]; mu = lambda * range.
  std::vector<double> u(scores.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (scores[i] - *lo_it) / range;
  const double threshold = percentile(u, 100.0 * (k_hat - 1) / k_hat);
  auto mass = [&](double mu) {
    double top = 0.0;
    double total = 0.0;
    for (double v : u) {
      const double e = std::exp(mu * (v - 1.0));
      total += e;
      if (v >= threshold) top += e;
    }
    return top / total;
  };
  if (mass(0.0) >= kLambdaTargetMass) return 0.0;
  const double mu_cap = kLambdaCap * range;
  double hi = 1.0;
  while (mass(hi) < kLambdaTargetMass) {
    if (hi >= mu_cap) return kLambdaCap;
    hi = std::min(2.0 * hi, mu_cap);
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < kLambdaTargetMass ? lo : hi) = mid;
  }
  return std::min(0.5 * (lo + hi) / range, kLambdaCap);
}

namespace {

constexpr std::pair<Acquisition, std::string_view> kNames[] = {
    {Acquisition::kDirVar, "dirvar"},
    {Acquisition::kDirVarProp, "dirvar-prop"},
    {Acquisition::kUncSm, "unc-sm"},
    {Acquisition::kVopt, "vopt"},
    {Acquisition::kVoptLowRank, "vopt-lowrank"},
    {Acquisition::kSigmaOpt, "sigmaopt"},
    {Acquisition::kSigmaOptLowRank, "sigmaopt-lowrank"},
    {Acquisition::kRandom, "random"},
};

}  // namespace

Acquisition parse_acquisition(std::string_view name) {
  for (const auto& [a, s] : kNames) {
    if (s == name) return a;
  }
  throw ConfigError("unknown acquisition '" + std::string(name) + "'");
}

std::string_view acquisition_name(Acquisition acquisition) {
  for (const auto& [a, s] : kNames) {
    if (a == acquisition) return s;
  }
  return "unknown";
}

bool uses_covariance(Acquisition a) {
  return a == Acquisition::kVopt || a == Acquisition::kVoptLowRank ||
         a == Acquisition::kSigmaOpt || a == Acquisition::kSigmaOptLowRank;
}

bool uses_low_rank(Acquisition a) {
  return a == Acquisition::kVoptLowRank || a == Acquisition::kSigmaOptLowRank;
}

}  // namespace dial
