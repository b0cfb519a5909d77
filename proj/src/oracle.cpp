#include "iproj/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "iproj/error.hpp"

namespace iproj {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// h(lambda) = int v e^{l + lambda v} dQ up to the positive factor e^{-shift}.
double tilt_moment(const DiscreteMeasure& q, const std::vector<double>& l,
                   const std::vector<double>& v, double lambda) {
  double shift = kNegInf;
  for (std::size_t j = 0; j < l.size(); ++j) {
    if (q.weight(j) > 0.0) shift = std::max(shift, l[j] + lambda * v[j]);
  }
  CompensatedSum s;
  for (std::size_t j = 0; j < l.size(); ++j) {
    s.add(q.weight(j) * v[j] * std::exp(l[j] + lambda * v[j] - shift));
  }
  return s.value();
}

// Derivative of the same scaled quantity: int v^2 e^{...} dQ.
double tilt_curvature(const DiscreteMeasure& q, const std::vector<double>& l,
                      const std::vector<double>& v, double lambda) {
  double shift = kNegInf;
  for (std::size_t j = 0; j < l.size(); ++j) {
    if (q.weight(j) > 0.0) shift = std::max(shift, l[j] + lambda * v[j]);
  }
  CompensatedSum s;
  for (std::size_t j = 0; j < l.size(); ++j) {
    s.add(q.weight(j) * v[j] * v[j] * std::exp(l[j] + lambda * v[j] - shift));
  }
  return s.value();
}

// Root of the increasing map lambda -> int v e^{l + lambda v} dQ on [0, inf).
// Returns a negative value when no root exists.
double solve_tilt(const DiscreteMeasure& q, const std::vector<double>& l,
                  const std::vector<double>& v) {
  if (tilt_moment(q, l, v, 0.0) >= 0.0) return 0.0;
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  double lo = 0.0;
  double hi = 50.0 / vmax;
  int expansions = 0;
  while (tilt_moment(q, l, v, hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 60) return -1.0;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double h = tilt_moment(q, l, v, x);
    if (h == 0.0) return x;
    if (h < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double d = tilt_curvature(q, l, v, x);
    double next = d > 0.0 ? x - h / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-16 * hi) {
      return next;
    }
    x = next;
  }
  return x;
}

std::vector<double> normalized_density(const DiscreteMeasure& q, const std::vector<double>& l) {
  double m = kNegInf;
  for (std::size_t j = 0; j < l.size(); ++j) {
    if (q.weight(j) > 0.0) m = std::max(m, l[j]);
  }
  std::vector<double> p(l.size());
  CompensatedSum z;
  for (std::size_t j = 0; j < l.size(); ++j) {
    p[j] = std::exp(l[j] - m);
    z.add(q.weight(j) * p[j]);
  }
  for (double& x : p) x /= z.value();
  return p;
}

}  // namespace

OracleResult bregman_dykstra(const DiscreteMeasure& q,
                             const std::vector<HalfspaceConstraint>& constraints, double tol,
                             int max_cycles) {
  if (!(tol > 0.0) || max_cycles <= 0) throw InputError("tol and max_cycles must be positive");
  std::vector<std::vector<double>> vs;
  std::set<std::vector<double>> seen;
  for (const auto& c : constraints) {
    if (c.v.size() != q.size()) throw InputError("constraint length does not match the atoms");
    for (double x : c.v) {
      if (!std::isfinite(x)) throw InputError("constraint values must be finite");
    }
    const bool zero = std::all_of(c.v.begin(), c.v.end(), [](double x) { return x == 0.0; });
    if (!zero && seen.insert(c.v).second) vs.push_back(c.v);
  }

  OracleResult out;
  std::vector<double> lambda(vs.size(), 0.0);
  std::vector<double> l(q.size(), 0.0);  // log density up to a constant: sum_k lambda_k v_k
  std::vector<double> p = normalized_density(q, l);
  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    for (std::size_t k = 0; k < vs.size(); ++k) {
      const auto& v = vs[k];
      if (lambda[k] != 0.0) {
        for (std::size_t j = 0; j < l.size(); ++j) l[j] -= lambda[k] * v[j];
      }
      const double root = solve_tilt(q, l, v);
      if (root < 0.0) {
        out.density = p;
        out.kl = kl_divergence(DensityVector(p, q), q);
        out.cycles = cycle;
        out.diagnostic = "constraint cannot be met by any tilt: the constraint set looks empty";
        return out;
      }
      lambda[k] = root;
      if (root != 0.0) {
        for (std::size_t j = 0; j < l.size(); ++j) l[j] += root * v[j];
      }
    }
    auto next = normalized_density(q, l);
    out.last_change = l1_distance(next, p, q);
    p = std::move(next);
    out.cycles = cycle;
    if (out.last_change <= tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) out.diagnostic = "max_cycles reached";
  out.density = p;
  out.kl = kl_divergence(DensityVector(p, q), q);
  return out;
}

std::vector<double> pava(const std::vector<double>& values, const std::vector<double>& weights) {
  if (values.size() != weights.size()) throw InputError("pava: length mismatch");
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(weights[i] > 0.0)) throw InputError("pava: weights must be positive");
    blocks.push_back({values[i], weights[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double w = a.weight + b.weight;
      a.mean = (a.mean * a.weight + b.mean * b.weight) / w;
      a.weight = w;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

PavaProjection pava_closed_form(const DiscreteMeasure& q, const Cdf& g) {
  if (q.dim() != 1) throw InputError("pava_closed_form needs one dimensional atoms");
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return q.coord(a, 0) < q.coord(b, 0); });
  if (std::abs(g(q.coord(order.back(), 0)) - 1.0) > 1e-12) {
    throw InputError("G must reach 1 at the largest atom");
  }
  const std::size_t n = q.size();
  std::vector<double> m(n), w(n), r(n);
  double prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    const double cur = g(q.coord(j, 0));
    m[k] = cur - prev;
    prev = cur;
    w[k] = q.weight(j);
    if (!(w[k] > 0.0)) throw InputError("pava_closed_form needs positive weights");
    r[k] = m[k] / w[k];
  }
  const auto h = pava(r, w);
  CompensatedSum c;
  for (std::size_t k = 0; k < n; ++k) {
    if (m[k] > 0.0) c.add(m[k] * std::log(h[k]));
  }
  PavaProjection out;
  out.y0.resize(n);
  out.ratio.resize(n);
  out.fitted.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.ratio[j] = r[k];
    out.fitted[j] = h[k];
    out.y0[j] = h[k] > 0.0 ? std::log(h[k]) - c.value() : kNegInf;
  }
  return out;
}

namespace {

Reps marginal_members(const DiscreteMeasure& q, std::size_t coord, const Cdf& g) {
  std::vector<double> levels = q.coordinates(coord);
  for (const auto& k : g.knots()) levels.push_back(k.first);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  Reps reps;
  std::set<std::vector<double>> seen;
  for (double t : levels) {
    std::vector<double> v(q.size());
    const double gt = g(t);
    for (std::size_t j = 0; j < q.size(); ++j) v[j] = gt - (q.coord(j, coord) <= t ? 1.0 : 0.0);
    const bool zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (!zero && seen.insert(v).second) reps.push_back(std::move(v));
  }
  return reps;
}

std::vector<double> solve_block(const DiscreteMeasure& q, const Reps& reps,
                                const std::vector<double>& other, const SolverConfig& config,
                                bool& ok) {
  if (reps.empty()) return std::vector<double>(q.size(), 0.0);
  double m = kNegInf;
  for (double x : other) m = std::max(m, x);
  std::vector<double> w(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) w[j] = q.weight(j) * std::exp(other[j] - m);
  const auto tilted = q.reweighted(w);
  const auto sol = solve_finite_program(tilted, reps, config);
  ok = ok && sol.converged;
  return sol.y;
}

}  // namespace

CyclicDescentResult cyclic_descent_two_marginals(const DiscreteMeasure& q, const Cdf& g1,
                                                 const Cdf& g2, double tol, int max_cycles,
                                                 const SolverConfig& config) {
  if (q.dim() != 2) throw InputError("cyclic descent needs two dimensional atoms");
  if (!(tol > 0.0) || max_cycles <= 0) throw InputError("tol and max_cycles must be positive");
  const Reps r1 = marginal_members(q, 0, g1);
  const Reps r2 = marginal_members(q, 1, g2);
  CyclicDescentResult out;
  out.y1.assign(q.size(), 0.0);
  out.y2.assign(q.size(), 0.0);
  auto value = [&] {
    std::vector<double> y(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) y[j] = out.y1[j] + out.y2[j];
    return std::exp(log_objective(q, y));
  };
  out.objective.push_back(1.0);
  bool ok = true;
  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    out.y1 = solve_block(q, r1, out.y2, config, ok);
    out.y2 = solve_block(q, r2, out.y1, config, ok);
    out.objective.push_back(value());
    out.cycles = cycle;
    const double drop = out.objective[cycle - 1] - out.objective[cycle];
    if (drop <= tol) {
      out.converged = ok;
      break;
    }
  }
  if (!ok) out.diagnostic = "a block solve did not converge";
  else if (!out.converged) out.diagnostic = "max_cycles reached";
  out.y.resize(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) out.y[j] = out.y1[j] + out.y2[j];
  return out;
}

std::vector<HalfspaceConstraint> constraints_from_grid(const MomentFamily& family,
                                                       const DiscreteMeasure& q,
                                                       const std::vector<MomentIndex>& grid) {
  std::vector<HalfspaceConstraint> out;
  std::set<std::vector<double>> seen;
  for (const auto& idx : grid) {
    auto v = family.values(idx, q);
    const bool zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (!zero && seen.insert(v).second) out.push_back({std::move(v)});
  }
  return out;
}

}  // namespace iproj
