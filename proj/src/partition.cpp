#include "iproj/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "iproj/error.hpp"

namespace iproj {

namespace {

constexpr double kSlack = 1e-12;

bool within(double value, double budget) { return value <= budget * (1.0 + kSlack) + 1e-15; }

void require_positive_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InputError("epsilon must be positive");
}

/// Q_X((a, b]) for one coordinate.
class MarginalMass {
 public:
  MarginalMass(const DiscreteMeasure& q, std::size_t k) {
    std::vector<std::size_t> order(q.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return q.coord(i, k) < q.coord(j, k); });
    CompensatedSum s;
    for (std::size_t i : order) {
      coords_.push_back(q.coord(i, k));
      s.add(q.weight(i));
      cdf_.push_back(s.value());
    }
  }

  double cdf(double t) const {
    auto it = std::upper_bound(coords_.begin(), coords_.end(), t);
    if (it == coords_.begin()) return 0.0;
    return cdf_[static_cast<std::size_t>(it - coords_.begin()) - 1];
  }
  double operator()(double a, double b) const { return cdf(b) - cdf(a); }

 private:
  std::vector<double> coords_;
  std::vector<double> cdf_;
};

/// Maximal runs [first, last] of consecutive points with swept(first, last) <= budget.
template <class Swept>
std::vector<std::pair<std::size_t, std::size_t>> greedy_runs(const std::vector<double>& pts,
                                                             Swept swept, double budget) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  if (pts.empty()) return runs;
  std::size_t start = 0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (!within(swept(pts[start], pts[k]), budget)) {
      runs.emplace_back(start, k - 1);
      start = k;
    }
  }
  runs.emplace_back(start, pts.size() - 1);
  return runs;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(n));
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
}

std::vector<std::vector<double>> distinct_values(const Partition& p, const Cell& cell,
                                                 const MomentFamily& family,
                                                 const DiscreteMeasure& q) {
  std::vector<std::vector<double>> out;
  for (std::size_t m : cell.members) {
    auto v = family.values(p.grid[m], q);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
  }
  return out;
}

void certify(Partition& p, const DiscreteMeasure& q, const MomentFamily& family, unsigned threads) {
  parallel_for(p.cells.size(), threads, [&](std::size_t i) {
    auto& cell = p.cells[i];
    cell.diameter = max_pairwise_distance(distinct_values(p, cell, family, q), q);
  });
  p.accuracy_flag = !p.certified();
}

MomentFamily without_tail(const MomentFamily& family) {
  switch (family.kind()) {
    case FamilyKind::UnconditionalFSD:
      return MomentFamily::unconditional_fsd(family.gamma_min(), family.gamma_max());
    case FamilyKind::ConditionalFSD:
      return MomentFamily::conditional_fsd(family.gamma_min(), family.gamma_max(), family.dz(),
                                           family.r0(), family.r_max());
    case FamilyKind::MarginalGivenG:
      return MomentFamily::marginal_given_g(*family.cdf(), family.gamma_max());
    case FamilyKind::Custom:
      break;
  }
  return family;
}

}  // namespace

double Partition::achieved_epsilon() const {
  double m = 0.0;
  for (const auto& c : cells) m = std::max(m, c.diameter);
  return m;
}

bool Partition::certified() const {
  return std::all_of(cells.begin(), cells.end(),
                     [&](const Cell& c) { return within(c.diameter, epsilon); });
}

std::vector<std::vector<double>> Partition::representative_values(const MomentFamily& family,
                                                                  const DiscreteMeasure& q) const {
  std::vector<std::vector<double>> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(family.values(grid[c.representative], q));
  return out;
}

double max_pairwise_distance(const std::vector<std::vector<double>>& vectors,
                             const DiscreteMeasure& q) {
  double m = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t k = i + 1; k < vectors.size(); ++k) {
      m = std::max(m, l1_distance(vectors[i], vectors[k], q));
    }
  }
  return m;
}

Partition build_fsd_partition(const DiscreteMeasure& q, const MomentFamily& family, double epsilon,
                              const PartitionOptions& options) {
  require_positive_epsilon(epsilon);
  if (family.kind() != FamilyKind::UnconditionalFSD) {
    throw InputError("build_fsd_partition needs an unconditional FSD family");
  }
  const auto gammas = gamma_grid(family, q, options.resolution);
  const MarginalMass x1(q, 0), x2(q, 1);
  const auto runs =
      greedy_runs(gammas, [&](double a, double b) { return x1(a, b) + x2(a, b); }, epsilon);

  Partition p;
  p.epsilon = epsilon;
  for (double g : gammas) p.grid.push_back({g, {}, 0, false});
  p.cut_points.push_back(gammas.front());
  for (const auto& [first, last] : runs) {
    Cell c;
    for (std::size_t k = first; k <= last; ++k) c.members.push_back(k);
    c.representative = first;
    c.bound = x1(gammas[first], gammas[last]) + x2(gammas[first], gammas[last]);
    p.cells.push_back(std::move(c));
    p.cut_points.push_back(gammas[last]);
  }
  certify(p, q, family, options.threads);
  return p;
}

int choose_cube_level(const DiscreteMeasure& q, int dz, double epsilon) {
  require_positive_epsilon(epsilon);
  if (dz < 1 || q.dim() != static_cast<std::size_t>(2 + dz)) {
    throw InputError("atoms must carry 2 + d_Z coordinates");
  }
  std::map<std::vector<double>, double> point_mass;
  for (std::size_t j = 0; j < q.size(); ++j) {
    auto a = q.atom(j);
    std::vector<double> z(a.begin() + 2, a.end());
    for (double zu : z) {
      if (zu < 0.0 || zu > 1.0) {
        throw InputError(
            "Z coordinates must lie in [0, 1]^d_Z; rescale the covariates (e.g. by their "
            "empirical CDF) before building the partition");
      }
    }
    point_mass[z] += q.weight(j);
  }
  const double budget = epsilon / 6.0;
  for (const auto& [z, m] : point_mass) {
    const bool in_some_cube = std::all_of(z.begin(), z.end(), [](double v) { return v > 0.0; });
    if (in_some_cube && !within(m, budget)) {
      std::ostringstream os;
      os << "a single Z value carries mass " << m << " > epsilon/6 = " << budget
         << "; no cube level r0 exists (increase epsilon above " << 6.0 * m << ")";
      throw InputError(os.str());
    }
  }
  for (int r = 1; r <= (1 << 24); r = (r < 64 ? r + 1 : r + r / 8)) {
    std::map<std::vector<int>, double> cube_mass;
    double worst = 0.0;
    for (const auto& [z, m] : point_mass) {
      auto c = cube_of(z, r);
      if (!c) continue;
      worst = std::max(worst, cube_mass[c->a] += m);
    }
    if (within(worst, budget)) {
      // the coarse stride above r = 64 can overshoot; walk back to the smallest level
      int best = r;
      for (int s = r - 1; s >= 1 && r > 64; --s) {
        std::map<std::vector<int>, double> cm;
        double w = 0.0;
        for (const auto& [z, m] : point_mass) {
          auto c = cube_of(z, s);
          if (c) w = std::max(w, cm[c->a] += m);
        }
        if (!within(w, budget)) break;
        best = s;
      }
      return best;
    }
  }
  throw InputError("no cube level r0 found");
}

Partition build_conditional_fsd_partition(const DiscreteMeasure& q, const MomentFamily& family,
                                          double epsilon, const PartitionOptions& options) {
  require_positive_epsilon(epsilon);
  if (family.kind() != FamilyKind::ConditionalFSD) {
    throw InputError("build_conditional_fsd_partition needs a conditional FSD family");
  }
  const int dz = family.dz();
  const int r0 = choose_cube_level(q, dz, epsilon);
  const auto gammas = gamma_grid(family, q, options.resolution);
  const MarginalMass x1(q, 0), x2(q, 1);
  const auto runs = greedy_runs(
      gammas, [&](double a, double b) { return x1(a, b) + x2(a, b); }, 2.0 * epsilon / 3.0);

  const auto groups = cubes_at_level(r0, dz);
  std::vector<std::vector<CubeIndex>> group_cubes(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) group_cubes[g].push_back(groups[g]);
  for (int r = 2 * r0; r <= family.r_max(); r += r0) {
    std::size_t g = 0;
    for (const auto& c : cubes_at_level(r, dz)) {
      while (!c.inside(groups[g])) g = (g + 1) % groups.size();
      group_cubes[g].push_back(c);
    }
  }
  std::size_t cubes_per_gamma = 0;
  for (const auto& gc : group_cubes) cubes_per_gamma += gc.size();
  if (static_cast<double>(gammas.size()) * cubes_per_gamma * q.size() > 5e8) {
    throw InputError("conditional partition grid too large; increase epsilon");
  }

  std::vector<double> group_mass(groups.size(), 0.0);
  for (std::size_t j = 0; j < q.size(); ++j) {
    auto c = cube_of(q.atom(j).subspan(2), r0);
    if (!c) continue;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g] == *c) {
        group_mass[g] += q.weight(j);
        break;
      }
    }
  }

  Partition p;
  p.epsilon = epsilon;
  p.r0 = r0;
  p.n1 = runs.size();
  p.n2 = groups.size();
  // grid: gamma-major, then cube groups in lexicographic order
  std::vector<std::vector<std::size_t>> position(gammas.size(),
                                                 std::vector<std::size_t>(groups.size()));
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      position[k][g] = p.grid.size();
      for (const auto& c : group_cubes[g]) p.grid.push_back({gammas[k], c, 0, false});
    }
  }
  p.cut_points.push_back(gammas.front());
  for (const auto& [first, last] : runs) {
    const double swept = x1(gammas[first], gammas[last]) + x2(gammas[first], gammas[last]);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      Cell c;
      for (std::size_t k = first; k <= last; ++k) {
        for (std::size_t t = 0; t < group_cubes[g].size(); ++t) c.members.push_back(position[k][g] + t);
      }
      c.representative = c.members.front();
      c.bound = swept + 2.0 * (group_cubes[g].size() > 1 ? group_mass[g] : 0.0);
      p.cells.push_back(std::move(c));
    }
    p.cut_points.push_back(gammas[last]);
  }
  certify(p, q, family, options.threads);
  return p;
}

Partition build_marginal_partition(const DiscreteMeasure& q, const MomentFamily& family,
                                   double epsilon, const PartitionOptions& options) {
  require_positive_epsilon(epsilon);
  if (family.kind() != FamilyKind::MarginalGivenG) {
    throw InputError("build_marginal_partition needs a marginal-vs-G family");
  }
  if (family.gamma_max() > 1.0) throw InputError("marginal partition needs 0 < gamma_max <= 1");
  const auto gammas = gamma_grid(family, q, options.resolution);
  const MarginalMass w(q, 0);
  const Cdf& g = *family.cdf();
  const auto swept = [&](double a, double b) { return w(a, b) + (g(b) - g(a)); };
  const auto runs = greedy_runs(gammas, swept, epsilon);

  Partition p;
  p.epsilon = epsilon;
  for (double x : gammas) p.grid.push_back({x, {}, 0, false});
  p.cut_points.push_back(gammas.front());
  for (const auto& [first, last] : runs) {
    Cell c;
    for (std::size_t k = first; k <= last; ++k) c.members.push_back(k);
    c.representative = first;
    c.bound = swept(gammas[first], gammas[last]);
    p.cells.push_back(std::move(c));
    p.cut_points.push_back(gammas[last]);
  }
  certify(p, q, family, options.threads);
  return p;
}

Partition build_greedy_partition(const DiscreteMeasure& q, const MomentFamily& family,
                                 std::vector<MomentIndex> grid, double epsilon,
                                 const PartitionOptions& options) {
  require_positive_epsilon(epsilon);
  if (grid.empty()) throw InputError("greedy partition needs a nonempty grid");
  // identical members always share a cell, so cluster the distinct vectors
  std::map<std::vector<double>, std::size_t> distinct_id;
  std::vector<std::vector<double>> distinct;
  std::vector<std::vector<std::size_t>> owners;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto v = family.values(grid[i], q);
    auto [it, inserted] = distinct_id.emplace(v, distinct.size());
    if (inserted) {
      distinct.push_back(std::move(v));
      owners.emplace_back();
    }
    owners[it->second].push_back(i);
  }
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t d = 0; d < distinct.size(); ++d) {
    bool placed = false;
    for (auto& cl : clusters) {
      const bool fits = std::all_of(cl.begin(), cl.end(), [&](std::size_t o) {
        return within(l1_distance(distinct[o], distinct[d], q), epsilon);
      });
      if (fits) {
        cl.push_back(d);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({d});
  }

  Partition p;
  p.epsilon = epsilon;
  p.grid = std::move(grid);
  for (const auto& cl : clusters) {
    Cell c;
    for (std::size_t d : cl) c.members.insert(c.members.end(), owners[d].begin(), owners[d].end());
    std::sort(c.members.begin(), c.members.end());
    c.representative = c.members.front();
    std::vector<std::vector<double>> vs;
    for (std::size_t d : cl) vs.push_back(distinct[d]);
    c.diameter = max_pairwise_distance(vs, q);
    c.bound = c.diameter;
    p.cells.push_back(std::move(c));
  }
  (void)options;
  p.accuracy_flag = !p.certified();
  return p;
}

Partition select_representatives(Partition partition, const DiscreteMeasure& q,
                                 const MomentFamily& family) {
  for (auto& cell : partition.cells) {
    if (cell.members.empty()) throw InputError("partition cell without members");
    std::size_t best = cell.members.front();
    double best_mean = family_mean(family, partition.grid[best], q);
    for (std::size_t i = 1; i < cell.members.size(); ++i) {
      const std::size_t m = cell.members[i];
      const double mean = family_mean(family, partition.grid[m], q);
      if (mean < best_mean - 1e-14 || (std::abs(mean - best_mean) <= 1e-14 && m < best)) {
        if (mean < best_mean) best_mean = mean;
        best = m;
      }
    }
    cell.representative = best;
    cell.representative_mean = best_mean;
    cell.empty_selection = best_mean > 0.0;
  }
  return partition;
}

Partition build_partition(const DiscreteMeasure& q, const MomentFamily& family, double epsilon,
                          const PartitionOptions& options) {
  family.check_compatible(q);
  const MomentFamily base = without_tail(family);
  Partition p;
  switch (family.kind()) {
    case FamilyKind::UnconditionalFSD:
      p = build_fsd_partition(q, base, epsilon, options);
      break;
    case FamilyKind::ConditionalFSD:
      p = build_conditional_fsd_partition(q, base, epsilon, options);
      break;
    case FamilyKind::MarginalGivenG:
      p = build_marginal_partition(q, base, epsilon, options);
      break;
    case FamilyKind::Custom: {
      std::vector<MomentIndex> grid;
      for (const auto& idx : index_grid(base, q, options.resolution)) grid.push_back(idx);
      p = build_greedy_partition(q, base, std::move(grid), epsilon, options);
      break;
    }
  }
  if (family.tail()) {
    std::vector<MomentIndex> tail_grid = p.grid;
    for (auto& idx : tail_grid) idx.tail = true;
    Partition t = build_greedy_partition(q, family, std::move(tail_grid), epsilon, options);
    const std::size_t offset = p.grid.size();
    p.grid.insert(p.grid.end(), t.grid.begin(), t.grid.end());
    for (auto& c : t.cells) {
      for (auto& m : c.members) m += offset;
      c.representative += offset;
      p.cells.push_back(std::move(c));
    }
    p.accuracy_flag = !p.certified();
  }
  return select_representatives(std::move(p), q, family);
}

}  // namespace iproj
