#include "iproj/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iproj/error.hpp"

namespace iproj {

std::vector<double> default_schedule(double eps0, double decay, int stages) {
  if (!(eps0 > 0.0) || !(decay > 0.0 && decay < 1.0) || stages < 1) {
    throw InputError("schedule needs eps0 > 0, 0 < decay < 1 and at least one stage");
  }
  std::vector<double> out;
  double e = eps0;
  for (int m = 0; m < stages; ++m, e *= decay) out.push_back(e);
  return out;
}

ProjectionResult project(const DiscreteMeasure& q, const MomentFamily& family,
                         const ProjectOptions& options) {
  family.check_compatible(q);
  const auto schedule = options.schedule.empty() ? default_schedule() : options.schedule;
  for (std::size_t m = 0; m < schedule.size(); ++m) {
    if (!(schedule[m] > 0.0)) throw InputError("schedule entries must be positive");
    if (m > 0 && !(schedule[m] < schedule[m - 1])) {
      throw InputError("schedule must be strictly decreasing");
    }
  }
  if (!(options.value_tol > 0.0) || !(options.binding_tol > 0.0)) {
    throw InputError("tolerances must be positive");
  }

  ProjectionResult out;
  out.grid = index_grid(family, q, options.partition.resolution);
  bool have_stage = false;
  for (double eps : schedule) {
    Partition part = build_partition(q, family, eps, options.partition);
    const auto values = part.representative_values(family, q);
    Reps reps;
    std::vector<std::size_t> cells;
    for (std::size_t c = 0; c < values.size(); ++c) {
      const bool zero =
          std::all_of(values[c].begin(), values[c].end(), [](double x) { return x == 0.0; });
      if (zero) continue;
      reps.push_back(values[c]);
      cells.push_back(c);
    }

    DualSolution sol;
    if (reps.empty()) {
      sol.y.assign(q.size(), 0.0);
      sol.converged = true;
    } else {
      sol = solve_finite_program(q, reps, options.solver);
    }

    StageRecord rec;
    rec.epsilon = eps;
    rec.cells = part.size();
    rec.representatives = reps.size();
    rec.achieved_epsilon = part.achieved_epsilon();
    for (const auto& c : part.cells) rec.empty_selections += c.empty_selection ? 1 : 0;
    rec.value = sol.value;
    rec.log_value = sol.log_value;
    rec.iterations = sol.iterations;
    rec.converged = sol.converged;
    rec.diverged = sol.diverged;
    rec.diagnostic = sol.diagnostic;
    if (sol.converged) {
      rec.duality_gap = duality_gap(q, density_from_dual(q, sol.y), sol.value);
    }
    out.stages.push_back(rec);

    if (!sol.converged) {
      out.diagnostic = "stage at epsilon " + std::to_string(eps) + " failed: " + sol.diagnostic;
      if (!have_stage) {
        // nothing better to report than the failed first stage
        out.value = sol.value;
        out.partition = std::move(part);
        out.rep_cells = std::move(cells);
        out.solution = std::move(sol);
      }
      break;
    }
    const double previous = have_stage ? out.value : 0.0;
    out.value = sol.value;
    out.reported_stage = out.stages.size() - 1;
    out.partition = std::move(part);
    out.rep_cells = std::move(cells);
    out.solution = std::move(sol);
    if (have_stage && std::abs(out.value - previous) <= options.value_tol) {
      // equal values at coarse stages can still leave grid constraints violated
      const auto p = density_from_dual(q, out.solution.y);
      const std::vector<double> pv(p.values().begin(), p.values().end());
      if (verify_constraints(pv, family, q, out.grid, options.binding_tol).max_slack <=
          options.binding_tol) {
        out.stabilized = true;
        break;
      }
    }
    have_stage = true;
  }

  if (schedule.size() == 1) out.stabilized = true;
  const bool last_ok = out.stages.back().converged;
  out.converged = last_ok && out.stabilized;
  if (last_ok && !out.stabilized) out.diagnostic = "stage values did not stabilize within value_tol on a feasible stage";

  const auto p = density_from_dual(q, out.solution.y);
  out.density.assign(p.values().begin(), p.values().end());
  out.kl = kl_divergence(p, q);
  out.check = verify_constraints(out.density, family, q, out.grid, options.binding_tol);
  return out;
}

AssumptionReport check_assumptions(const DiscreteMeasure& q, const MomentFamily& family,
                                   const std::vector<MomentIndex>& grid, double delta,
                                   double reference_epsilon) {
  if (grid.empty()) throw InputError("assumption checks need a nonempty grid");
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  AssumptionReport r;
  r.laplace_index = grid.front();
  {
    const auto f = family.moments(grid.front(), q);
    std::vector<double> e(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) e[j] = std::exp(-r.laplace_alpha * f[j]);
    r.laplace_value = integrate(q, e);
    r.laplace_ok = std::isfinite(r.laplace_value);
  }
  std::vector<bool> positive(q.size(), true);
  for (const auto& idx : grid) {
    if (!idx.tail) {
      const auto f = family.moments(idx, q);
      std::vector<double> a(f.size());
      for (std::size_t j = 0; j < f.size(); ++j) a[j] = std::pow(std::abs(f[j]), 1.0 + delta);
      r.tail_sup = std::max(r.tail_sup, integrate(q, a));
    }
    const auto v = family.values(idx, q);
    if (!idx.tail && family.kind() != FamilyKind::Custom && idx.gamma == family.gamma_min()) {
      std::vector<double> absv(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) absv[j] = std::abs(v[j]);
      // the index set is read as (gamma_min, gamma_max] when the left end is null
      if (integrate(q, absv) == 0.0) continue;
    }
    for (std::size_t j = 0; j < v.size(); ++j) positive[j] = positive[j] && v[j] > 0.0;
  }
  CompensatedSum mass;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (positive[j]) mass.add(q.weight(j));
  }
  r.strict_mass = std::clamp(mass.value(), 0.0, 1.0);
  r.precompact_epsilon = reference_epsilon;
  r.precompact_cells = build_greedy_partition(q, family, grid, reference_epsilon).size();
  return r;
}

ConstraintCheck verify_constraints(const std::vector<double>& p, const MomentFamily& family,
                                   const DiscreteMeasure& q, const std::vector<MomentIndex>& grid,
                                   double binding_tol) {
  if (p.size() != q.size()) throw InputError("density length does not match the atoms");
  ConstraintCheck c;
  c.max_slack = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = family.values(grid[i], q);
    CompensatedSum s;
    for (std::size_t j = 0; j < v.size(); ++j) s.add(-v[j] * p[j] * q.weight(j));
    const double slack = s.value();
    c.slacks.push_back(slack);
    if (slack > c.max_slack) {
      c.max_slack = slack;
      c.argmax = i;
    }
    if (std::abs(slack) <= binding_tol) c.binding.push_back(i);
  }
  return c;
}

CoercivityCheck coercivity_bound_check(const DiscreteMeasure& q, const std::vector<double>& y_prime,
                                       double alpha) {
  if (y_prime.size() != q.size()) throw InputError("y' length does not match the atoms");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be nonnegative");
  for (double x : y_prime) {
    if (!(x >= -2.0 && x <= 2.0)) throw InputError("y' values must lie in [-2, 2]");
  }
  std::vector<double> scaled(y_prime.size());
  for (std::size_t j = 0; j < y_prime.size(); ++j) scaled[j] = alpha * y_prime[j];
  const double e2 = std::exp(2.0);
  CoercivityCheck c;
  c.lhs = std::exp(log_objective(q, scaled));
  c.beta = std::exp(log_objective(q, y_prime));
  c.k = e2 / c.beta - 0.5;
  c.rhs = alpha * (e2 - c.beta * c.k) * ((c.k + 1.0) * c.beta - e2) / (c.beta * c.k);
  return c;
}

}  // namespace iproj
