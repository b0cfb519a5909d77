#pragma once

#include <string>
#include <vector>

#include "iproj/dualsolver.hpp"
#include "iproj/measure.hpp"
#include "iproj/moments.hpp"

namespace iproj {

/// The primal constraint  int v p dQ >= 0.
struct HalfspaceConstraint {
  std::vector<double> v;
};

struct OracleResult {
  std::vector<double> density;
  double kl = 0.0;
  double last_change = 0.0;  ///< L1(Q) change of the density over the final cycle
  int cycles = 0;
  bool converged = false;
  std::string diagnostic;
};

/// Cyclic KL projections onto the halfspaces with Dykstra corrections. Each
/// step undoes the constraint's previous tilt and re-solves
/// int v p e^{lambda v} dQ = 0 for lambda >= 0. Stops when a full cycle moves
/// the density by at most tol in L1(Q).
OracleResult bregman_dykstra(const DiscreteMeasure& q,
                             const std::vector<HalfspaceConstraint>& constraints,
                             double tol = 1e-13, int max_cycles = 200000);

/// Weighted isotonic (nondecreasing) least-squares fit by pool adjacent violators.
std::vector<double> pava(const std::vector<double>& values, const std::vector<double>& weights);

struct PavaProjection {
  std::vector<double> y0;     ///< per atom, -inf where the pooled ratio is 0
  std::vector<double> ratio;  ///< dG/dQ per atom
  std::vector<double> fitted; ///< isotonic fit of the ratio per atom
};

/// Closed form for the marginal-vs-G problem over the whole support: the
/// isotonic projection h of dG/dQ and y0 = ln h - int ln h dG. Atoms must be
/// one dimensional and G must reach 1 at the largest atom.
PavaProjection pava_closed_form(const DiscreteMeasure& q, const Cdf& g);

struct CyclicDescentResult {
  std::vector<double> y;
  std::vector<double> y1;
  std::vector<double> y2;
  std::vector<double> objective;  ///< int e^{y1 + y2} dQ after each cycle (entry 0 at y = 0)
  int cycles = 0;
  bool converged = false;
  std::string diagnostic;
};

/// Alternating minimization over the two marginal blocks. Each block solves
/// the finite program for members G_i(t) - 1[x_i <= t] under the reference
/// tilted by the other block.
CyclicDescentResult cyclic_descent_two_marginals(const DiscreteMeasure& q, const Cdf& g1,
                                                 const Cdf& g2, double tol = 1e-12,
                                                 int max_cycles = 1000,
                                                 const SolverConfig& config = {});

/// Constraints for every distinct nonzero member on the grid.
std::vector<HalfspaceConstraint> constraints_from_grid(const MomentFamily& family,
                                                       const DiscreteMeasure& q,
                                                       const std::vector<MomentIndex>& grid);

}  // namespace iproj
