#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iproj/dualsolver.hpp"
#include "iproj/measure.hpp"
#include "iproj/moments.hpp"
#include "iproj/partition.hpp"

namespace iproj {

struct StageRecord {
  double epsilon = 0.0;
  std::size_t cells = 0;
  std::size_t representatives = 0;  ///< after dropping identically zero ones
  double achieved_epsilon = 0.0;
  std::size_t empty_selections = 0;
  double value = 1.0;
  double log_value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  double duality_gap = 0.0;
  std::string diagnostic;
};

struct ProjectOptions {
  std::vector<double> schedule;  ///< strictly decreasing; empty means default_schedule()
  double value_tol = 1e-10;
  double binding_tol = 1e-6;
  SolverConfig solver;
  PartitionOptions partition;
};

struct ConstraintCheck {
  double max_slack = 0.0;              ///< max over the grid of int f p dQ
  std::size_t argmax = 0;              ///< grid position of max_slack
  std::vector<std::size_t> binding;    ///< grid positions with |int f p dQ| <= binding_tol
  std::vector<double> slacks;          ///< int f p dQ per grid position
};

struct ProjectionResult {
  std::vector<double> density;
  double kl = 0.0;
  double value = 1.0;  ///< dual value of the reported stage
  std::vector<StageRecord> stages;
  std::size_t reported_stage = 0;
  bool stabilized = false;
  bool converged = false;
  std::string diagnostic;
  std::vector<MomentIndex> grid;  ///< verification grid
  ConstraintCheck check;
  // reported stage
  Partition partition;
  std::vector<std::size_t> rep_cells;  ///< cell of each kept representative
  DualSolution solution;
};

struct AssumptionReport {
  bool laplace_ok = false;
  MomentIndex laplace_index;
  double laplace_alpha = 1.0;
  double laplace_value = 0.0;  ///< int e^{-alpha f} dQ at the witness
  double tail_sup = 0.0;       ///< max over the grid of int |f|^{1+delta} dQ
  double strict_mass = 0.0;    ///< Q-mass where every grid member is > 0
  double precompact_epsilon = 0.0;
  std::size_t precompact_cells = 0;
};

/// eps_m = eps0 * decay^m, m = 0..stages-1.
std::vector<double> default_schedule(double eps0 = 0.5, double decay = 0.5, int stages = 12);

/// Runs the epsilon schedule: partition, representatives, finite program per
/// stage, until two successive stage values agree within value_tol and the
/// stage density meets every grid constraint within binding_tol.
ProjectionResult project(const DiscreteMeasure& q, const MomentFamily& family,
                         const ProjectOptions& options = {});

/// Numerical checks of the regularity conditions on the given grid. For the
/// interval families a member at gamma_min that vanishes Q-almost everywhere
/// is skipped for strict_mass.
AssumptionReport check_assumptions(const DiscreteMeasure& q, const MomentFamily& family,
                                   const std::vector<MomentIndex>& grid, double delta = 1.0,
                                   double reference_epsilon = 0.25);

ConstraintCheck verify_constraints(const std::vector<double>& p, const MomentFamily& family,
                                   const DiscreteMeasure& q, const std::vector<MomentIndex>& grid,
                                   double binding_tol = 1e-6);

struct CoercivityCheck {
  double lhs = 0.0;   ///< int e^{alpha y'} dQ
  double rhs = 0.0;   ///< alpha (e^2 - beta k)((k + 1) beta - e^2) / (beta k)
  double beta = 0.0;  ///< int e^{y'} dQ
  double k = 0.0;     ///< e^2 / beta - 1/2
  bool holds() const { return lhs >= rhs; }
};

/// Both sides of the lower bound for the bounded marginal family, with k at
/// the midpoint of (e^2/beta - 1, e^2/beta). y' must lie in [-2, 2].
CoercivityCheck coercivity_bound_check(const DiscreteMeasure& q, const std::vector<double>& y_prime,
                                       double alpha);

}  // namespace iproj
