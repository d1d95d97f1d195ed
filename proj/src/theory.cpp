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

#include "dial/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dial/error.hpp"
#include "dial/kernels.hpp"
#include "dial/numeric.hpp"

namespace dial::theory {

int Mixture1D::num_classes() const {
  int k = 0;
  for (const auto& c : components) k = std::max(k, c.class_id + 1);
  return k;
}

namespace {

double normal_pdf(double x, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * std::numbers::pi));
}

double total_weight(const Mixture1D& m) {
  double w = 0.0;
  for (const auto& c : m.components) w += c.weight;
  if (!(w > 0.0)) throw DomainError("mixture weights must sum to a positive value");
  return w;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Rescales q so its trapezoid integral over the grid is 1.
void normalize_density(std::span<const double> grid, Eigen::VectorXd& q) {
  q /= trapezoid(grid, as_span(q));
}

}  // namespace

double Mixture1D::density(double x) const {
  double d = 0.0;
  for (const auto& c : components) d += c.weight * normal_pdf(x, c.mean, c.stddev);
  return d / total_weight(*this);
}

Mixture1D default_mixture() {
  return {{{0.35, -3.0, 0.6, 0}, {0.15, -1.0, 0.5, 1}, {0.15, 1.0, 0.5, 0}, {0.35, 3.0, 0.6, 1}},
          -5.0,
          5.0};
}

std::vector<double> uniform_grid(double lower, double upper, int points) {
  if (points < 2 || !(upper > lower)) throw DomainError("grid needs >= 2 points on a proper interval");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = lower + (upper - lower) * i / (points - 1);
  g.back() = upper;
  return g;
}

RowMatrix eval_eta(const Mixture1D& mixture, std::span<const double> grid) {
  const int K = mixture.num_classes();
  RowMatrix eta = RowMatrix::Zero(static_cast<Eigen::Index>(grid.size()), K);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto& c : mixture.components) {
      eta(i, c.class_id) += c.weight * normal_pdf(grid[i], c.mean, c.stddev);
    }
    const double rho = eta.row(i).sum();
    if (!(rho > 0.0)) {
      throw DomainError("mixture density vanishes at x = " + std::to_string(grid[i]) +
                        "; use a tighter domain");
    }
    eta.row(i) /= rho;
  }
  return eta;
}

double population_uncertainty(std::span<const double> eta) {
  double g = 0.0;
  for (double e : eta) g += e * (1.0 - e);
  return g;
}

Eigen::VectorXd population_uncertainty(const RowMatrix& eta) {
  Eigen::VectorXd g(eta.rows());
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    g[i] = population_uncertainty(
        std::span<const double>(eta.row(i).data(), static_cast<std::size_t>(eta.cols())));
  }
  return g;
}

double LambdaSchedule::operator()(double t) const {
  switch (kind) {
    case Kind::kConstant:
      return value;
    case Kind::kPower:
      return std::pow(t, value);
    case Kind::kLinear:
      return value * t;
  }
  return value;
}

LambdaSchedule LambdaSchedule::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  LambdaSchedule s;
  if (head == "constant") {
    s.kind = Kind::kConstant;
  } else if (head == "power") {
    s.kind = Kind::kPower;
  } else if (head == "linear") {
    s.kind = Kind::kLinear;
  } else {
    throw ConfigError("unknown lambda schedule '" + text + "'");
  }
  if (colon == std::string::npos) {
    if (s.kind != Kind::kConstant) throw ConfigError("schedule '" + text + "' needs a value");
    return s;
  }
  try {
    s.value = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad schedule value in '" + text + "'");
  }
  if (s.kind != Kind::kPower && s.value < 0.0) throw ConfigError("lambda must be >= 0");
  return s;
}

OdeResult evolve_alpha(const Mixture1D& mixture, std::span<const double> grid,
                       const LambdaSchedule& schedule, const OdeOptions& options) {
  if (!(options.t_end > options.t_start) || !(options.t_start > 0.0)) {
    throw DomainError("ODE needs 0 < t_start < t_end");
  }
  if (options.steps_per_decade < 1) throw DomainError("steps_per_decade must be >= 1");
  OdeResult r;
  r.grid.assign(grid.begin(), grid.end());
  r.eta = eval_eta(mixture, grid);
  r.uncertainty = population_uncertainty(r.eta);
  const auto m = r.eta.rows();
  const int K = static_cast<int>(r.eta.cols());
  r.alpha = options.seed_mass * r.eta;

  const double ds = std::log(10.0) / options.steps_per_decade;
  const double s_end = std::log(options.t_end);
  double s = std::log(options.t_start);
  Eigen::VectorXd q(m), v(m);

  auto sample_density = [&](double t) {
    const double lambda = schedule(t);
    for (Eigen::Index i = 0; i < m; ++i) {
      v[i] = lambda * kernels::dirichlet_trace(r.alpha.row(i).data(), K);
    }
    q = (v.array() - v.maxCoeff()).exp();
    normalize_density(grid, q);
    if (!q.allFinite()) {
      throw NumericalError("sampling density became non-finite at t = " + std::to_string(t) +
                           "; increase steps per decade");
    }
  };

  double next_decade = std::floor(s / std::log(10.0)) + 1.0;
  while (s < s_end - 1e-12) {
    const double step = std::min(ds, s_end - s);
    const double t = std::exp(s);
    sample_density(t);
    for (Eigen::Index i = 0; i < m; ++i) r.alpha.row(i) += (step * t * q[i]) * r.eta.row(i);
    s += step;
    ++r.steps;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double dev =
          (r.alpha.row(i) / r.alpha.row(i).sum() - r.eta.row(i)).cwiseAbs().maxCoeff();
      r.ray_deviation = std::max(r.ray_deviation, dev);
    }
    if (s / std::log(10.0) >= next_decade - 1e-9) {
      sample_density(std::exp(s));
      r.snapshots.push_back({std::exp(s), q});
      next_decade += 1.0;
    }
  }
  sample_density(options.t_end);
  r.q = q;
  return r;
}

FixedPointResult fixed_point_qbar(double lambda0, std::span<const double> grid,
                                  const Eigen::VectorXd& uncertainty, double gamma, double tol,
                                  int max_iterations) {
  if (!(lambda0 > 0.0)) throw DomainError("fixed point needs lambda0 > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("damping must lie in (0, 1]");
  if (static_cast<std::size_t>(uncertainty.size()) != grid.size()) {
    throw DomainError("uncertainty and grid differ in length");
  }
  FixedPointResult out;
  out.q = Eigen::VectorXd::Ones(uncertainty.size());
  normalize_density(grid, out.q);
  Eigen::VectorXd f(uncertainty.size());
  auto map = [&](const Eigen::VectorXd& q) {
    f = lambda0 * uncertainty.array() / q.array();
    f = (f.array() - f.maxCoeff()).exp();
    normalize_density(grid, f);
  };
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    map(out.q);
    out.residual = (out.q - f).cwiseAbs().maxCoeff();
    if (out.residual < tol) {
      out.converged = true;
      break;
    }
    out.q = (1.0 - gamma) * out.q + gamma * f;
  }
  return out;
}

namespace {

void check_bound_inputs(double alpha0, double epsilon, double zeta, int K) {
  if (!(alpha0 > 0.0)) throw DomainError("exploration constant needs alpha0 > 0");
  if (K < 1) throw DomainError("exploration constant needs K >= 1");
  if (!(epsilon >= 0.0) || !(zeta >= 0.0)) throw DomainError("epsilon and zeta must be >= 0");
}

}  // namespace

double exploration_constant(double alpha0, double epsilon, double zeta, int K) {
  check_bound_inputs(alpha0, epsilon, zeta, K);
  const double a = alpha0 + epsilon;
  const double b = alpha0 + zeta / K;
  return (1.0 + 4.0 * (alpha0 + 1.0) / (K * a)) *
         ((K - 1.0) * std::pow(a, 4) / ((K + 1.0) * alpha0 * alpha0 * b * b));
}

double exploration_constant_expanded(double alpha0, double epsilon, double zeta, int K) {
  check_bound_inputs(alpha0, epsilon, zeta, K);
  const double a = alpha0 + epsilon;
  const double num = K * (K - 1.0) * a * a * a * (K * a + 4.0 * (alpha0 + 1.0));
  const double den = (K + 1.0) * alpha0 * alpha0 * (K * alpha0 + zeta) * (K * alpha0 + zeta);
  return num / den;
}

BoundResult exploration_bound(double alpha0, double epsilon, double zeta, double delta, int K,
                              double lambda, double w_min) {
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("delta must lie in [0, 1)");
  if (!(w_min > 0.0 && w_min <= 1.0)) throw DomainError("w_min must lie in (0, 1]");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  BoundResult r;
  r.c = exploration_constant(alpha0, epsilon, zeta, K);
  r.c_expanded = exploration_constant_expanded(alpha0, epsilon, zeta, K);
  const double a = alpha0 + epsilon;
  const double kd = K;
  // delta == 0 drops the background term outright (avoids 0 * inf).
  const double background =
      delta == 0.0 ? 0.0
                   : delta / ((1.0 - delta) * w_min) *
                         std::exp(lambda * (kd + 1.0) * (2.0 * alpha0 + 1.0) /
                                  (kd * alpha0 * alpha0 * (kd * alpha0 + 1.0)));
  const double labeled =
      (1.0 - w_min * (1.0 - delta)) / ((1.0 - delta) * w_min) *
      std::exp(lambda * (r.c - 1.0) * kd * (kd + 1.0) * alpha0 * alpha0 /
               (kd * kd * a * a * (kd * a + 1.0)));
  const double base = std::max(0.0, 1.0 - background - labeled);
  r.probability = std::pow(base, K);
  return r;
}

double simplified_bound(double alpha0, int K, double lambda, double w_min) {
  if (!(w_min > 0.0)) throw DomainError("w_min must be > 0");
  const double kd = K;
  const double base =
      1.0 - std::exp(-lambda * (kd + 1.0) / (2.0 * kd * (kd * alpha0 + 1.0))) / w_min;
  return std::pow(std::max(0.0, base), K);
}

DiscoveryResult monte_carlo_discovery(double delta, double zeta, double epsilon, double alpha0,
                                      double lambda, std::span<const double> weights,
                                      const DiscoveryOptions& options) {
  const int K = static_cast<int>(weights.size());
  const int m = options.points_per_cluster;
  if (K < 1 || m < 1 || options.trials < 1) throw DomainError("discovery needs K, m, trials >= 1");
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("delta must lie in [0, 1)");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  if (!(alpha0 > 0.0) && lambda > 0.0) throw DomainError("discovery with lambda > 0 needs alpha0 > 0");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw DomainError("class weights must be positive");
    wsum += w;
  }
  const int background = static_cast<int>(std::lround(delta * m));
  const int n = K * m;
  auto cluster = [m](int x) { return x / m; };
  auto is_background = [&](int x) { return x % m < background; };
  auto kernel = [&](int s, int x) {
    if (s == x || is_background(s)) return 1.0;
    if (is_background(x)) return 0.0;
    return cluster(s) == cluster(x) ? zeta : epsilon;
  };
  std::vector<double> log_mass(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) log_mass[x] = std::log(weights[cluster(x)] / wsum / m);

  std::mt19937_64 rng(options.seed);
  std::vector<int> sources, classes;
  std::vector<double> alpha(static_cast<std::size_t>(K)), logits(static_cast<std::size_t>(n));
  DiscoveryResult result;
  result.trials = options.trials;
  for (int trial = 0; trial < options.trials; ++trial) {
    sources.clear();
    classes.clear();
    std::vector<char> found(static_cast<std::size_t>(K), 0);
    for (int step = 0; step < K; ++step) {
      for (int x = 0; x < n; ++x) {
        std::fill(alpha.begin(), alpha.end(), alpha0);
        for (std::size_t l = 0; l < sources.size(); ++l) alpha[classes[l]] += kernel(sources[l], x);
        logits[x] = log_mass[x];
        if (lambda > 0.0) logits[x] += lambda * kernels::dirichlet_trace(alpha.data(), K);
      }
      const double top = *std::max_element(logits.begin(), logits.end());
      for (double& l : logits) l = std::exp(l - top);
      std::discrete_distribution<int> pick(logits.begin(), logits.end());
      const int x = pick(rng);
      sources.push_back(x);
      classes.push_back(cluster(x));
      found[cluster(x)] = 1;
    }
    if (std::all_of(found.begin(), found.end(), [](char c) { return c != 0; })) {
      ++result.successes;
    }
  }
  result.frequency = static_cast<double>(result.successes) / result.trials;
  result.standard_error =
      std::sqrt(result.frequency * (1.0 - result.frequency) / result.trials);
  return result;
}

double alignment_score(const RowMatrix& probs, const Eigen::MatrixXd& kernel, int x) {
  const auto n = probs.rows();
  if (kernel.rows() != n || kernel.cols() != n) throw DomainError("kernel must be n x n");
  if (x < 0 || x >= n) throw DomainError("node out of range");
  double s = 0.0;
  for (Eigen::Index y = 0; y < probs.cols(); ++y) {
    double log_prod = 0.0;
    bool zero = false;
    for (Eigen::Index z = 0; z < n && !zero; ++z) {
      const double k = kernel(x, z);
      if (k == 0.0) continue;  // 0^0 = 1
      if (probs(z, y) == 0.0) {
        zero = true;
      } else {
        log_prod += k * std::log(probs(z, y));
      }
    }
    if (!zero) s += probs(x, y) * std::exp(log_prod);
  }
  return s;
}

double centrality_weight(const Eigen::MatrixXd& kernel, double alpha0, int num_classes, int x) {
  if (!(alpha0 > 0.0)) throw DomainError("centrality weight needs alpha0 > 0");
  if (x < 0 || x >= kernel.rows()) throw DomainError("node out of range");
  double log_w = 0.0;
  for (Eigen::Index z = 0; z < kernel.cols(); ++z) {
    const double k = kernel(x, z);
    log_w += std::lgamma(alpha0 + k) - std::lgamma(num_classes * alpha0 + k);
  }
  return std::exp(log_w);
}

std::vector<ConsistencyRow> empirical_consistency(const Mixture1D& mixture,
                                                  const std::vector<int>& sizes,
                                                  const ConsistencyOptions& options) {
  if (mixture.num_classes() > 2) throw DomainError("consistency check needs a binary mixture");
  if (options.trials < 1) throw DomainError("consistency check needs trials >= 1");
  const std::vector<double> grid =
      uniform_grid(mixture.lower, mixture.upper, options.grid_points);
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd rho(m), eta(m);
  {
    const RowMatrix e = eval_eta(mixture, grid);
    for (Eigen::Index i = 0; i < m; ++i) {
      rho[i] = mixture.density(grid[i]);
      eta[i] = e.cols() > 1 ? e(i, 1) : 1.0;
    }
    normalize_density(grid, rho);
  }
  std::vector<double> comp_weights;
  for (const auto& c : mixture.components) comp_weights.push_back(c.weight);

  std::vector<ConsistencyRow> rows;
  for (int n : sizes) {
    if (n < 1) throw DomainError("sample sizes must be >= 1");
    const double t = std::pow(static_cast<double>(n), options.exponent);
    auto kern = [t](double a, double b) { return std::exp(-(a - b) * (a - b) / (4.0 * t)); };
    Eigen::VectorXd expected(m);
    Eigen::VectorXd integrand(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) integrand[j] = kern(grid[j], grid[i]) * rho[j];
      expected[i] = trapezoid(grid, as_span(integrand));
    }
    std::vector<double> errors(static_cast<std::size_t>(options.trials));
#pragma omp parallel for schedule(dynamic)
    for (int trial = 0; trial < options.trials; ++trial) {
      std::seed_seq seq{options.seed, static_cast<std::uint64_t>(n),
                        static_cast<std::uint64_t>(trial)};
      std::mt19937_64 rng(seq);
      std::discrete_distribution<int> component(comp_weights.begin(), comp_weights.end());
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Eigen::VectorXd numer = Eigen::VectorXd::Zero(m);
      for (int i = 0; i < n; ++i) {
        double x = 0.0;
        do {
          const auto& c = mixture.components[component(rng)];
          x = std::normal_distribution<double>(c.mean, c.stddev)(rng);
        } while (x < mixture.lower || x > mixture.upper);
        double p1 = 0.0;
        double total = 0.0;
        for (const auto& c : mixture.components) {
          const double d = c.weight * normal_pdf(x, c.mean, c.stddev);
          total += d;
          if (c.class_id == 1 || mixture.num_classes() == 1) p1 += d;
        }
        if (unit(rng) >= p1 / total) continue;  // Y = 0 adds nothing
        for (Eigen::Index g = 0; g < m; ++g) numer[g] += kern(x, grid[g]);
      }
      Eigen::VectorXd err(m);
      for (Eigen::Index g = 0; g < m; ++g) {
        err[g] = std::abs(numer[g] / (n * expected[g]) - eta[g]) * rho[g];
      }
      errors[static_cast<std::size_t>(trial)] = trapezoid(grid, as_span(err));
    }
    ConsistencyRow row;
    row.n = n;
    row.bandwidth = t;
    double sum = 0.0, sum2 = 0.0;
    for (double e : errors) {
      sum += e;
      sum2 += e * e;
    }
    const double k = options.trials;
    row.mean_error = sum / k;
    row.std_error = k > 1 ? std::sqrt(std::max(0.0, (sum2 - k * row.mean_error * row.mean_error) /
                                                        (k - 1)))
                          : 0.0;
    row.standard_error = row.std_error / std::sqrt(k);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dial::theory
