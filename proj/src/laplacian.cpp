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

#include "dial/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "dial/error.hpp"

namespace dial {

CgStats conjugate_gradient(const LinearMap& apply, const Eigen::VectorXd& diagonal,
                           const Eigen::VectorXd& b, Eigen::VectorXd& x,
                           const CgOptions& options) {
  const Eigen::Index n = b.size();
  const int max_it = options.max_iterations > 0 ? options.max_iterations
                                                : static_cast<int>(10 * n);
  if (x.size() != n) x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    return {0, 0.0};
  }
  const Eigen::VectorXd inv_diag = diagonal.cwiseInverse();

  Eigen::VectorXd r(n), z(n), p(n), ap(n);
  apply(x, ap);
  r = b - ap;
  double rel = r.norm() / bnorm;
  int it = 0;
  while (rel > options.tol && it < max_it) {
    z = inv_diag.cwiseProduct(r);
    p = z;
    double rz = r.dot(z);
    while (it < max_it) {
      apply(p, ap);
      const double pap = p.dot(ap);
      if (!(pap > 0.0)) throw NumericalError("conjugate gradient: operator is not positive definite");
      const double step = rz / pap;
      x += step * p;
      r -= step * ap;
      ++it;
      if (r.norm() / bnorm <= options.tol) break;
      z = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    // Guard against drift of the recursive residual.
    apply(x, ap);
    r = b - ap;
    rel = r.norm() / bnorm;
  }
  if (rel > options.tol) {
    throw ConvergenceError("conjugate gradient did not converge in " + std::to_string(max_it) +
                               " iterations",
                           rel);
  }
  return {it, rel};
}

LaplacianOperator::LaplacianOperator(std::shared_ptr<const SimilarityGraph> graph,
                                     ExecutionPolicy policy)
    : graph_(std::move(graph)), policy_(policy) {
  if (!graph_) throw DomainError("LaplacianOperator needs a graph");
}

void LaplacianOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y, double shift) const {
  y.resize(x.size());
  const auto& g = *graph_;
  kernels::laplacian_apply({g.row_offsets(), g.col_indices(), g.values()},
                           {g.degrees().data(), static_cast<std::size_t>(g.size())}, shift,
                           {x.data(), static_cast<std::size_t>(x.size())},
                           {y.data(), static_cast<std::size_t>(y.size())}, policy_);
}

Eigen::VectorXd LaplacianOperator::apply(const Eigen::VectorXd& x, double shift) const {
  Eigen::VectorXd y;
  apply(x, y, shift);
  return y;
}

Eigen::MatrixXd LaplacianOperator::to_dense(double shift) const {
  Eigen::MatrixXd l = -graph_->to_dense();
  l.diagonal() = graph_->degrees().array() + shift;
  return l;
}

Eigen::VectorXd LaplacianOperator::solve_shifted(const Eigen::VectorXd& b, double tau,
                                                 const CgOptions& options,
                                                 CgStats* stats) const {
  if (!(tau > 0.0)) throw DomainError("shift tau must be positive");
  Eigen::VectorXd diag = graph_->degrees().array() + tau;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  const CgStats s = conjugate_gradient(
      [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { apply(in, out, tau); }, diag, b, x,
      options);
  if (stats) *stats = s;
  return x;
}

namespace {

// Fixes the sign so the largest-magnitude entry is positive.
void canonical_sign(Eigen::MatrixXd& vecs) {
  for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
    Eigen::Index arg = 0;
    vecs.col(c).cwiseAbs().maxCoeff(&arg);
    if (vecs(arg, c) < 0) vecs.col(c) *= -1.0;
  }
}

SpectralCache dense_eigenpairs(const LaplacianOperator& laplacian, int r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian.to_dense());
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("dense eigensolver failed", std::numeric_limits<double>::infinity());
  }
  SpectralCache cache{solver.eigenvalues().head(r), solver.eigenvectors().leftCols(r)};
  canonical_sign(cache.eigenvectors);
  return cache;
}

double residual_norm(const LaplacianOperator& laplacian, const Eigen::VectorXd& v, double lambda) {
  return (laplacian.apply(v) - lambda * v).norm();
}

void orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Eigen::Index cols) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index c = 0; c < cols; ++c) w -= basis.col(c).dot(w) * basis.col(c);
  }
}

// Shift-invert Lanczos with full reorthogonalization and locking: each cycle
// runs a fresh Krylov sequence orthogonal to the locked vectors of
// A = (L + sI)^{-1} and locks the leading converged Ritz pairs. Repeated
// cycles recover eigenvalue multiplicities (e.g. disconnected components).
SpectralCache lanczos_eigenpairs(const LaplacianOperator& laplacian, int r,
                                 const EigenOptions& options) {
  const int n = laplacian.size();
  const auto& degrees = laplacian.graph().degrees();
  const double mean_degree = degrees.size() ? degrees.mean() : 0.0;
  const double shift = mean_degree > 0 ? 1e-2 * mean_degree : 1.0;
  const double tol = options.tol;
  CgOptions inner{std::min(1e-13, tol * 1e-3), 0};
  inner.tol = std::max(inner.tol, 1e-14);

  Eigen::MatrixXd locked(n, std::min(n, 2 * r + 8));
  std::vector<double> locked_values;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;

  auto lock = [&](const Eigen::VectorXd& v, double lambda) {
    if (static_cast<Eigen::Index>(locked_values.size()) == locked.cols()) {
      locked.conservativeResize(n, std::min<Eigen::Index>(n, locked.cols() * 2));
    }
    locked.col(static_cast<Eigen::Index>(locked_values.size())) = v;
    locked_values.push_back(lambda);
  };

  double worst_residual = 0.0;
  int stalled = 0;
  int extra_steps = 0;
  bool verifying = false;
  for (int cycle = 0; cycle < options.max_restarts; ++cycle) {
    const auto nlocked = static_cast<Eigen::Index>(locked_values.size());
    if (nlocked >= n) break;
    const int want = std::max(1, r - static_cast<int>(nlocked));
    const int steps = static_cast<int>(
        std::min<Eigen::Index>(n - nlocked, std::max(2 * want + 20, 30) + extra_steps));

    Eigen::MatrixXd q(n, steps);
    Eigen::VectorXd alpha(steps), beta(steps);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    orthogonalize(v, locked, nlocked);
    v.normalize();

    int m = 0;
    Eigen::VectorXd w(n);
    for (; m < steps; ++m) {
      q.col(m) = v;
      w = laplacian.solve_shifted(v, shift, inner);
      alpha[m] = v.dot(w);
      w -= alpha[m] * v;
      if (m > 0) w -= beta[m - 1] * q.col(m - 1);
      orthogonalize(w, locked, nlocked);
      orthogonalize(w, q, m + 1);
      beta[m] = w.norm();
      if (beta[m] <= 1e-10 * std::abs(alpha[m])) {
        ++m;
        break;  // invariant subspace
      }
      v = w / beta[m];
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    // Largest Ritz values of A are the smallest eigenvalues of L.
    int newly_locked = 0;
    double first_unconverged = std::numeric_limits<double>::infinity();
    for (int idx = m - 1; idx >= 0; --idx) {
      Eigen::VectorXd y = q.leftCols(m) * small.eigenvectors().col(idx);
      orthogonalize(y, locked, static_cast<Eigen::Index>(locked_values.size()));
      y.normalize();
      const double lambda = y.dot(laplacian.apply(y));
      const double res = residual_norm(laplacian, y, lambda);
      if (res > tol) {
        first_unconverged = res;
        break;
      }
      if (verifying && !locked_values.empty() &&
          lambda >= *std::max_element(locked_values.begin(), locked_values.end()) - tol) {
        break;
      }
      lock(y, lambda);
      ++newly_locked;
      if (!verifying && static_cast<int>(locked_values.size()) >= r) break;
    }

    if (static_cast<int>(locked_values.size()) >= r) {
      if (verifying && newly_locked == 0) break;
      verifying = true;  // one more sweep to catch a missed smaller eigenvalue
      continue;
    }
    if (newly_locked == 0) {
      worst_residual = first_unconverged;
      ++stalled;
      extra_steps = std::min(n, 2 * extra_steps + 20);
    } else {
      stalled = 0;
    }
  }

  if (static_cast<int>(locked_values.size()) < r) {
    throw ConvergenceError("Lanczos eigensolver locked only " +
                               std::to_string(locked_values.size()) + " of " + std::to_string(r) +
                               " eigenpairs",
                           worst_residual);
  }

  // Rayleigh-Ritz on the locked subspace, then keep the r smallest.
  const auto nl = static_cast<Eigen::Index>(locked_values.size());
  Eigen::MatrixXd basis = locked.leftCols(nl);
  Eigen::MatrixXd lb(n, nl);
  for (Eigen::Index c = 0; c < nl; ++c) lb.col(c) = laplacian.apply(basis.col(c));
  Eigen::MatrixXd h = basis.transpose() * lb;
  h = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(h);
  SpectralCache cache{rr.eigenvalues().head(r), basis * rr.eigenvectors().leftCols(r)};
  for (int c = 0; c < r; ++c) {
    cache.eigenvectors.col(c).normalize();
    const double res = residual_norm(laplacian, cache.eigenvectors.col(c), cache.eigenvalues[c]);
    if (res > tol) {
      throw ConvergenceError("Lanczos eigenpair " + std::to_string(c) + " above tolerance", res);
    }
  }
  canonical_sign(cache.eigenvectors);
  return cache;
}

}  // namespace

SpectralCache smallest_eigenpairs(const LaplacianOperator& laplacian, int r,
                                  const EigenOptions& options) {
  const int n = laplacian.size();
  if (r < 1 || r > n) throw DomainError("eigenpair count must satisfy 1 <= r <= n");
  const bool dense = options.method == EigenMethod::kDense ||
                     (options.method == EigenMethod::kAuto && n <= options.dense_cutoff);
  return dense ? dense_eigenpairs(laplacian, r) : lanczos_eigenpairs(laplacian, r, options);
}

}  // namespace dial
