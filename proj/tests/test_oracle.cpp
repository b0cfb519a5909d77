#include <random>

#include "doctest.h"
#include "iproj/driver.hpp"
#include "iproj/error.hpp"
#include "iproj/oracle.hpp"
#include "support.hpp"

using namespace iproj;

namespace {

const DiscreteMeasure& two_atoms() {
  static const DiscreteMeasure q = DiscreteMeasure::uniform({{0.0}, {1.0}});
  return q;
}

Cdf empirical_cdf(const DiscreteMeasure& q, std::size_t coord) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < q.size(); ++j) pts.emplace_back(q.coord(j, coord), q.weight(j));
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> knots;
  double acc = 0.0;
  for (const auto& [x, w] : pts) {
    acc += w;
    if (!knots.empty() && knots.back().first == x) {
      knots.back().second = std::min(acc, 1.0);
    } else {
      knots.emplace_back(x, std::min(acc, 1.0));
    }
  }
  knots.back().second = 1.0;
  return Cdf(knots);
}

}  // namespace

TEST_CASE("bregman dykstra on the two atom tilt") {
  const auto r = bregman_dykstra(two_atoms(), {{{1.0, -2.0}}});
  CHECK(r.converged);
  CHECK(r.density[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(r.density[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  const auto dup = bregman_dykstra(two_atoms(), {{{1.0, -2.0}}, {{1.0, -2.0}}});
  CHECK(dup.density[0] == r.density[0]);
}

TEST_CASE("bregman dykstra leaves a feasible reference alone") {
  const auto r = bregman_dykstra(two_atoms(), {{{1.0, 0.5}}, {{2.0, -1.0}}});
  CHECK(r.converged);
  CHECK(r.cycles == 1);
  CHECK(r.density == std::vector<double>{1.0, 1.0});
  CHECK(r.kl == 0.0);
}

TEST_CASE("bregman dykstra reports an empty constraint set") {
  const auto r = bregman_dykstra(two_atoms(), {{{-1.0, -2.0}}});
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("single tilt makes a violated constraint bind") {
  std::mt19937_64 rng(201);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto q = testing_support::random_weighted_line(rng, 12);
    std::vector<double> v(q.size());
    for (auto& x : v) x = nd(rng);
    if (integrate(q, v) >= 0.0) {
      for (auto& x : v) x = -x;
    }
    if (std::all_of(v.begin(), v.end(), [](double x) { return x <= 0.0; })) continue;
    const auto r = bregman_dykstra(q, {{v}});
    REQUIRE(r.converged);
    std::vector<double> pv(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) pv[j] = r.density[j] * v[j];
    CHECK(std::abs(integrate(q, pv)) <= 1e-12);
  }
}

TEST_CASE("oracle agrees with the dual scheme on random finite families") {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = testing_support::random_weighted_line(rng, 10 + trial % 20);
    const std::size_t k = 1 + trial % 10;
    // a positive density satisfying every constraint keeps the set nonempty
    std::vector<double> p(q.size());
    for (auto& x : p) x = 0.2 + u(rng);
    std::vector<std::vector<double>> f;
    std::vector<HalfspaceConstraint> cons;
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> v(q.size()), vp(q.size());
      for (auto& x : v) x = nd(rng);
      for (std::size_t j = 0; j < v.size(); ++j) vp[j] = v[j] * p[j];
      const double shift = integrate(q, vp) / integrate(q, p) - 0.05;
      for (auto& x : v) x -= shift;
      cons.push_back({v});
      std::vector<double> fi(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) fi[j] = -v[j];
      f.push_back(fi);
    }
    const auto fam = MomentFamily::custom(q, f);
    ProjectOptions opts;
    opts.schedule = {1e-3};
    const auto res = project(q, fam, opts);
    const auto orc = bregman_dykstra(q, cons);
    REQUIRE(orc.converged);
    CHECK(res.converged);
    CHECK(std::abs(orc.kl + std::log(res.value)) <= 1e-4);
    CHECK(l1_distance(orc.density, res.density, q) <= 1e-6);
  }
}

TEST_CASE("pava invariants against exhaustive monotone fits") {
  std::mt19937_64 rng(203);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 6;
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::round(4 * u(rng)) / 4.0;
      w[i] = 0.5 + u(rng);
    }
    const auto fit = pava(y, w);
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) best += w[i] * (fit[i] - y[i]) * (fit[i] - y[i]);
    for (std::size_t i = 1; i < n; ++i) CHECK(fit[i] >= fit[i - 1] - 1e-15);
    double wy = 0.0, wf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wy += w[i] * y[i];
      wf += w[i] * fit[i];
    }
    CHECK(wf == doctest::Approx(wy).epsilon(1e-12));
    // every nondecreasing sequence on a 1/8 value grid fits no better
    std::vector<int> level(n, 0);
    while (true) {
      double sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = level[i] / 8.0;
        sse += w[i] * (v - y[i]) * (v - y[i]);
      }
      CHECK(best <= sse + 1e-12);
      std::size_t pos = n;
      while (pos > 0 && level[pos - 1] == 8) --pos;
      if (pos == 0) break;
      ++level[pos - 1];
      for (std::size_t i = pos; i < n; ++i) level[i] = level[pos - 1];
    }
  }
}

TEST_CASE("pava closed form examples") {
  const auto q = DiscreteMeasure::uniform({{0.25}, {0.75}});
  {
    const auto r = pava_closed_form(q, Cdf({{0.25, 0.5}, {0.75, 1.0}}));
    CHECK(r.y0[0] == 0.0);
    CHECK(r.y0[1] == 0.0);
  }
  {
    // ratio (2, 0) pools to (1, 1)
    const auto r = pava_closed_form(q, Cdf({{0.25, 1.0}}));
    CHECK(r.ratio == std::vector<double>{2.0, 0.0});
    CHECK(r.fitted == std::vector<double>{1.0, 1.0});
    CHECK(r.y0 == std::vector<double>{0.0, 0.0});
  }
  {
    // nondecreasing ratio is its own fit
    const auto r = pava_closed_form(q, Cdf({{0.25, 0.25}, {0.75, 1.0}}));
    CHECK(r.fitted == r.ratio);
    const double c = 0.25 * std::log(0.5) + 0.75 * std::log(1.5);
    CHECK(r.y0[0] == doctest::Approx(std::log(0.5) - c));
    CHECK(r.y0[1] == doctest::Approx(std::log(1.5) - c));
  }
  {
    const auto q3 = DiscreteMeasure::uniform({{0.2}, {0.5}, {0.8}});
    const auto r = pava_closed_form(q3, Cdf({{0.5, 0.0}, {0.8, 1.0}}));
    CHECK(std::isinf(r.y0[0]));
    CHECK(std::isinf(r.y0[1]));
    const auto p = density_from_dual(q3, r.y0);
    CHECK(p[2] == doctest::Approx(3.0));
  }
  CHECK_THROWS_AS(pava_closed_form(q, Cdf({{0.25, 0.5}})), InputError);
}

TEST_CASE("cyclic descent with feasible marginals stays at zero") {
  std::mt19937_64 rng(204);
  const auto q = testing_support::random_fsd_measure(rng, 20);
  const auto r = cyclic_descent_two_marginals(q, empirical_cdf(q, 0), empirical_cdf(q, 1));
  CHECK(r.converged);
  for (double y : r.y) CHECK(std::abs(y) <= 1e-12);
}

TEST_CASE("cyclic descent with one violated marginal") {
  // product of two five point marginals
  const std::vector<double> levels{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<std::vector<double>> atoms;
  for (double a : levels) {
    for (double b : levels) atoms.push_back({a, b});
  }
  const auto q = DiscreteMeasure::uniform(atoms);
  const auto g1 = empirical_cdf(q, 0);
  // G2 puts less mass low, so X2 must be pushed up
  const Cdf g2({{0.1, 0.05}, {0.3, 0.15}, {0.5, 0.4}, {0.7, 0.7}, {0.9, 1.0}});
  const auto r = cyclic_descent_two_marginals(q, g1, g2);
  CHECK(r.converged);
  for (std::size_t k = 1; k < r.objective.size(); ++k) {
    CHECK(r.objective[k] <= r.objective[k - 1] + 1e-15);
  }
  for (double y : r.y1) CHECK(std::abs(y) <= 1e-9);
  for (std::size_t j = 0; j < q.size(); ++j) {
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (q.coord(j, 1) == q.coord(k, 1)) CHECK(std::abs(r.y[j] - r.y[k]) <= 1e-9);
    }
  }
  // agreement with the primal oracle over both marginal families
  std::vector<HalfspaceConstraint> cons;
  for (double t : levels) {
    std::vector<double> v1(q.size()), v2(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
      v1[j] = g1(t) - (q.coord(j, 0) <= t ? 1.0 : 0.0);
      v2[j] = g2(t) - (q.coord(j, 1) <= t ? 1.0 : 0.0);
    }
    cons.push_back({v1});
    cons.push_back({v2});
  }
  const auto orc = bregman_dykstra(q, cons);
  REQUIRE(orc.converged);
  const auto p = density_from_dual(q, r.y);
  std::vector<double> pv(p.values().begin(), p.values().end());
  CHECK(l1_distance(pv, orc.density, q) <= 1e-6);
}

TEST_CASE("cyclic descent objective never increases on random instances") {
  std::mt19937_64 rng(205);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto q = testing_support::random_fsd_measure(rng, 25);
    const Cdf g1({{0.3, 0.2}, {0.6, 0.5}, {1.0, 1.0}});
    const Cdf g2({{0.2, 0.1}, {0.5, 0.4}, {1.0, 1.0}});
    const auto r = cyclic_descent_two_marginals(q, g1, g2);
    for (std::size_t k = 1; k < r.objective.size(); ++k) {
      CHECK(r.objective[k] <= r.objective[k - 1] + 1e-15);
    }
  }
}
