#include "iproj/dualsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iproj/error.hpp"

namespace iproj {

namespace {

void check_reps(const DiscreteMeasure& q, const Reps& reps) {
  if (reps.empty()) throw InputError("at least one representative is required");
  for (const auto& v : reps) {
    if (v.size() != q.size()) throw InputError("representative length does not match the atoms");
    for (double x : v) {
      if (!std::isfinite(x)) throw InputError("representative values must be finite");
    }
  }
}

void check_beta(const Reps& reps, const std::vector<double>& beta) {
  if (beta.size() != reps.size()) throw InputError("beta length does not match representatives");
  for (double b : beta) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("beta must be finite and nonnegative");
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

// Shifted tilt q_j e^{y_j - m}, the objective in log form, and the gradients
// of g and of log g.
struct State {
  std::vector<double> beta;
  std::vector<double> y;
  std::vector<double> tilt;
  double tilt_sum = 0.0;
  double log_value = 0.0;
  double value = 0.0;
  std::vector<double> grad;
  std::vector<double> log_grad;
};

State evaluate(const DiscreteMeasure& q, const Reps& reps, std::vector<double> beta) {
  State s;
  s.y = combine(reps, beta, q.size());
  s.beta = std::move(beta);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q.weight(j) > 0.0) m = std::max(m, s.y[j]);
  }
  s.tilt.resize(q.size());
  CompensatedSum total;
  for (std::size_t j = 0; j < q.size(); ++j) {
    s.tilt[j] = q.weight(j) * std::exp(s.y[j] - m);
    total.add(s.tilt[j]);
  }
  s.tilt_sum = total.value();
  s.log_value = m + std::log(s.tilt_sum);
  s.value = std::exp(s.log_value);
  const double scale = std::exp(m);
  s.grad.resize(reps.size());
  s.log_grad.resize(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    CompensatedSum g;
    for (std::size_t j = 0; j < q.size(); ++j) g.add(reps[i][j] * s.tilt[j]);
    s.log_grad[i] = g.value() / s.tilt_sum;
    s.grad[i] = g.value() * scale;
  }
  return s;
}

// Projected-gradient norm of g and of log g; the second keeps a decaying
// objective (value -> 0 along a ray) from passing for stationary.
double projected_gradient_norm(const State& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.beta.size(); ++i) {
    const double rel = s.log_grad[i];
    m = std::max(m, std::abs(s.beta[i] - std::max(0.0, s.beta[i] - s.grad[i])));
    m = std::max(m, std::abs(s.beta[i] - std::max(0.0, s.beta[i] - rel)));
  }
  return m;
}

}  // namespace

std::vector<double> combine(const Reps& reps, const std::vector<double>& beta, std::size_t atoms) {
  std::vector<double> y(atoms, 0.0);
  for (std::size_t j = 0; j < atoms; ++j) {
    CompensatedSum s;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      if (beta[i] != 0.0) s.add(beta[i] * reps[i][j]);
    }
    y[j] = s.value();
  }
  return y;
}

double log_objective(const DiscreteMeasure& q, const std::vector<double>& y) {
  if (y.size() != q.size()) throw InputError("y length does not match the atoms");
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (q.weight(j) > 0.0) m = std::max(m, y[j]);
  }
  if (!std::isfinite(m)) return m;
  CompensatedSum s;
  for (std::size_t j = 0; j < y.size(); ++j) s.add(q.weight(j) * std::exp(y[j] - m));
  return m + std::log(s.value());
}

double objective(const DiscreteMeasure& q, const Reps& reps, const std::vector<double>& beta) {
  check_reps(q, reps);
  check_beta(reps, beta);
  return std::exp(log_objective(q, combine(reps, beta, q.size())));
}

std::vector<double> gradient(const DiscreteMeasure& q, const Reps& reps,
                             const std::vector<double>& beta) {
  check_reps(q, reps);
  check_beta(reps, beta);
  const auto y = combine(reps, beta, q.size());
  const double lg = log_objective(q, y);
  if (lg > 700.0) {
    return std::vector<double>(reps.size(), std::numeric_limits<double>::infinity());
  }
  return evaluate(q, reps, beta).grad;
}

DualSolution solve_finite_program(const DiscreteMeasure& q, const Reps& reps,
                                  const SolverConfig& config,
                                  std::optional<std::vector<double>> beta0) {
  check_reps(q, reps);
  if (!(config.grad_tol > 0.0) || config.max_iter <= 0 || !(config.beta_cap > 0.0) ||
      !(config.armijo_c > 0.0 && config.armijo_c < 1.0) ||
      !(config.backtrack > 0.0 && config.backtrack < 1.0)) {
    throw InputError("solver configuration values must be positive");
  }
  const std::size_t n = reps.size();
  std::vector<double> start = beta0 ? *beta0 : std::vector<double>(n, 0.0);
  check_beta(reps, start);

  DualSolution out;
  if (log_objective(q, combine(reps, start, q.size())) > 700.0) {
    throw InputError("objective overflows at the starting point");
  }
  State s = evaluate(q, reps, std::move(start));
  if (config.record_trace) out.trace.push_back(s.value);

  // iterate on log g: same minimizer, gradient stays scaled when g decays
  double step = 1.0;
  int it = 0;
  double pg = projected_gradient_norm(s);
  while (pg > config.grad_tol && it < config.max_iter) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = std::max(0.0, s.beta[i] - step * s.log_grad[i]) - s.beta[i];
    const double slope = dot(s.log_grad, d);
    if (!(slope < 0.0)) {
      out.diagnostic = "no descent direction at projected-gradient norm above tolerance";
      break;
    }
    // change of log g along d, evaluated without cancellation
    const auto dy = combine(reps, d, q.size());
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-30) {
      CompensatedSum change;
      for (std::size_t j = 0; j < q.size(); ++j) change.add(s.tilt[j] * std::expm1(t * dy[j]));
      const double delta = std::log1p(change.value() / s.tilt_sum);
      if (std::isfinite(delta) && delta <= config.armijo_c * t * slope && delta <= 0.0) {
        accepted = true;
        break;
      }
      t *= config.backtrack;
    }
    if (!accepted) {
      out.diagnostic = "line search stalled";
      break;
    }
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = std::max(0.0, s.beta[i] + t * d[i]);
    State ns = evaluate(q, reps, std::move(next));
    ++it;

    std::vector<double> sd(n), gd(n);
    for (std::size_t i = 0; i < n; ++i) {
      sd[i] = ns.beta[i] - s.beta[i];
      gd[i] = ns.log_grad[i] - s.log_grad[i];
    }
    const double sy = dot(sd, gd);
    const double ss = dot(sd, sd);
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1e10;
    s = std::move(ns);
    if (config.record_trace) out.trace.push_back(s.value);
    pg = projected_gradient_norm(s);

    if (*std::max_element(s.beta.begin(), s.beta.end()) > config.beta_cap) {
      out.diverged = true;
      out.diagnostic =
          "beta exceeded beta_cap: the objective is likely not coercive on this instance "
          "(the dual infimum is approached only as alpha grows without bound)";
      break;
    }
  }

  out.converged = !out.diverged && pg <= config.grad_tol;
  if (!out.converged && out.diagnostic.empty()) out.diagnostic = "max_iter reached";
  out.iterations = it;
  out.projected_gradient = pg;
  out.y = s.y;
  out.value = s.value;
  out.log_value = s.log_value;
  out.beta = std::move(s.beta);
  CompensatedSum a;
  for (double b : out.beta) a.add(b);
  out.alpha = a.value();
  out.mu.assign(n, 1.0 / static_cast<double>(n));
  if (out.alpha > 0.0) {
    for (std::size_t i = 0; i < n; ++i) out.mu[i] = out.beta[i] / out.alpha;
  }
  return out;
}

DensityVector density_from_dual(const DiscreteMeasure& q, const std::vector<double>& y) {
  if (y.size() != q.size()) throw InputError("y length does not match the atoms");
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (std::isnan(y[j]) || y[j] == std::numeric_limits<double>::infinity()) {
      throw InputError("y must be finite or -inf");
    }
    if (q.weight(j) > 0.0) m = std::max(m, y[j]);
  }
  if (!std::isfinite(m)) throw InputError("y is -inf on every charged atom");
  std::vector<double> p(y.size());
  CompensatedSum total;
  for (std::size_t j = 0; j < y.size(); ++j) {
    p[j] = std::exp(y[j] - m);
    total.add(q.weight(j) * p[j]);
  }
  const double z = total.value();
  for (double& v : p) v /= z;
  return DensityVector(std::move(p), q);
}

double duality_gap(const DiscreteMeasure& q, const DensityVector& p, double value) {
  if (!(value > 0.0)) throw InputError("value must be positive");
  return std::abs(kl_divergence(p, q) + std::log(value));
}

}  // namespace iproj
