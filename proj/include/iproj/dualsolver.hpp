#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iproj/measure.hpp"

namespace iproj {

using Reps = std::vector<std::vector<double>>;

struct SolverConfig {
  double grad_tol = 1e-10;
  int max_iter = 50000;
  double beta_cap = 1e3;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  bool record_trace = false;
};

struct DualSolution {
  std::vector<double> beta;  ///< cone coordinates, beta_i = alpha * mu_i
  double alpha = 0.0;
  std::vector<double> mu;    ///< beta / alpha, uniform when alpha = 0
  std::vector<double> y;     ///< sum_i beta_i v_i per atom
  double value = 1.0;        ///< int e^y dQ
  double log_value = 0.0;
  double projected_gradient = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  std::string diagnostic;
  std::vector<double> trace;  ///< objective after each accepted step (if recorded)
};

/// y = sum_i beta_i v_i at every atom.
std::vector<double> combine(const Reps& reps, const std::vector<double>& beta, std::size_t atoms);

/// log int e^y dQ, computed with a shifted exponent.
double log_objective(const DiscreteMeasure& q, const std::vector<double>& y);

/// int exp(sum_i beta_i v_i) dQ. +inf when it overflows.
double objective(const DiscreteMeasure& q, const Reps& reps, const std::vector<double>& beta);

/// Component i: int v_i exp(sum_j beta_j v_j) dQ.
std::vector<double> gradient(const DiscreteMeasure& q, const Reps& reps,
                             const std::vector<double>& beta);

/// Minimizes the objective over beta >= 0 by spectral projected gradient on
/// log g with monotone Armijo backtracking, starting from beta0 (default 0). Stops when
/// the projected gradients of both g and log g are within grad_tol.
DualSolution solve_finite_program(const DiscreteMeasure& q, const Reps& reps,
                                  const SolverConfig& config = {},
                                  std::optional<std::vector<double>> beta0 = std::nullopt);

/// p_j = e^{y_j} / int e^y dQ. Entries equal to -inf map to 0.
DensityVector density_from_dual(const DiscreteMeasure& q, const std::vector<double>& y);

/// |KL(p || Q) + log(value)|.
double duality_gap(const DiscreteMeasure& q, const DensityVector& p, double value);

}  // namespace iproj
