#include <random>

#include "doctest.h"
#include "iproj/error.hpp"
#include "iproj/moments.hpp"

using namespace iproj;

namespace {

std::vector<double> pt(std::initializer_list<double> x) { return std::vector<double>(x); }

}  // namespace

TEST_CASE("fsd member values") {
  const auto fam = MomentFamily::unconditional_fsd(0.0, 1.0);
  const MomentIndex g{0.5, {}, 0, false};
  CHECK(fam.evaluate(g, pt({0.3, 0.7})) == 1.0);
  CHECK(fam.evaluate(g, pt({0.7, 0.3})) == -1.0);
  CHECK(fam.evaluate(g, pt({0.3, 0.3})) == 0.0);
  CHECK(fam.moment(g, pt({0.3, 0.7})) == -1.0);
  CHECK_THROWS_AS(fam.evaluate({1.5, {}, 0, false}, pt({0.3, 0.7})), InputError);
  CHECK_THROWS_AS(fam.evaluate(g, pt({0.3})), InputError);
}

TEST_CASE("marginal member values") {
  const auto fam = MomentFamily::marginal_given_g(Cdf::uniform01(), 1.0);
  CHECK(fam.evaluate({0.4, {}, 0, false}, pt({0.2})) == doctest::Approx(-0.6));
  CHECK(fam.evaluate({0.4, {}, 0, false}, pt({0.6})) == doctest::Approx(0.4));
}

TEST_CASE("step cdf is right continuous") {
  const Cdf g({{0.3, 0.5}, {0.8, 1.0}});
  CHECK(g(0.29) == 0.0);
  CHECK(g(0.3) == 0.5);
  CHECK(g(0.79) == 0.5);
  CHECK(g(0.8) == 1.0);
  CHECK(g(5.0) == 1.0);
  CHECK_THROWS_AS(Cdf({{0.3, 0.5}, {0.2, 1.0}}), InputError);
  CHECK_THROWS_AS(Cdf({{0.3, 0.5}, {0.4, 0.2}}), InputError);
  const Cdf lin({{0.0, 0.0}, {1.0, 1.0}}, Cdf::Interpolation::Linear);
  CHECK(lin(0.25) == doctest::Approx(0.25));
}

TEST_CASE("family mean on a point mass and under exchangeability") {
  const auto fam = MomentFamily::unconditional_fsd(0.0, 1.0);
  const DiscreteMeasure point({{0.2, 0.6}}, {1.0});
  for (double g : {0.1, 0.3, 0.7}) {
    const MomentIndex idx{g, {}, 0, false};
    CHECK(family_mean(fam, idx, point) == fam.evaluate(idx, point.atom(0)));
  }
  const auto sym = DiscreteMeasure::uniform({{0.1, 0.7}, {0.7, 0.1}, {0.4, 0.9}, {0.9, 0.4}});
  for (double g = 0.0; g <= 1.0; g += 0.05) CHECK(family_mean(fam, {g, {}, 0, false}, sym) == 0.0);
}

TEST_CASE("marginal mean vanishes when G is the empirical cdf") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> atoms;
  std::vector<double> w;
  for (int j = 0; j < 15; ++j) {
    atoms.push_back({u(rng)});
    w.push_back(u(rng) + 0.1);
  }
  const auto q = DiscreteMeasure::normalized(atoms, w);
  // empirical cdf built by direct summation
  std::vector<std::pair<double, double>> knots;
  std::vector<std::size_t> order(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return q.coord(a, 0) < q.coord(b, 0); });
  double acc = 0.0;
  for (auto j : order) {
    acc += q.weight(j);
    knots.emplace_back(q.coord(j, 0), std::min(acc, 1.0));
  }
  const auto fam = MomentFamily::marginal_given_g(Cdf(knots), 1.0);
  for (std::size_t j = 0; j < q.size(); ++j) {
    CHECK(std::abs(family_mean(fam, {q.coord(j, 0), {}, 0, false}, q)) <= 1e-14);
  }
}

TEST_CASE("index grid contents") {
  const auto q = DiscreteMeasure::uniform({{0.2, 0.5}, {0.6, 0.1}});
  const auto fam = MomentFamily::unconditional_fsd(0.0, 1.0);
  const auto grid = gamma_grid(fam, q, 1);
  for (double x : {0.0, 0.1, 0.2, 0.5, 0.6, 1.0}) {
    CHECK(std::find(grid.begin(), grid.end(), x) != grid.end());
  }
  CHECK(grid.size() == 6);

  const auto cq = DiscreteMeasure::uniform({{0.2, 0.5, 0.3}, {0.6, 0.1, 0.8}});
  const auto cfam = MomentFamily::conditional_fsd(0.0, 1.0, 1, 1, 1);
  const auto cgrid = index_grid(cfam, cq, 1);
  CHECK(cgrid.size() == 2 * gamma_grid(cfam, cq, 1).size());

  const auto tail = fam.with_tail({2.0, 1.0});
  const auto tgrid = index_grid(tail, q, 1);
  REQUIRE(tgrid.size() == 12);
  for (std::size_t k = 0; k < tgrid.size(); k += 2) {
    CHECK_FALSE(tgrid[k].tail);
    CHECK(tgrid[k + 1].tail);
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double f = tail.moment(tgrid[k], q.atom(j));
      CHECK(tail.evaluate(tgrid[k + 1], q.atom(j)) == doctest::Approx(2.0 - std::pow(std::abs(f), 2.0)));
      CHECK(tail.evaluate(tgrid[k], q.atom(j)) == -f);
    }
  }
}

TEST_CASE("fsd members are constant between atom coordinates and bounded") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> atoms;
  for (int j = 0; j < 20; ++j) atoms.push_back({u(rng), u(rng)});
  const auto q = DiscreteMeasure::uniform(atoms);
  const auto fam = MomentFamily::unconditional_fsd(0.0, 1.0);
  const auto grid = gamma_grid(fam, q, 8);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const auto left = fam.values({grid[k], {}, 0, false}, q);
    for (int s = 0; s < 5; ++s) {
      const double g = grid[k] + (grid[k + 1] - grid[k]) * u(rng);
      if (g >= grid[k + 1]) continue;
      CHECK(fam.values({g, {}, 0, false}, q) == left);
    }
    for (double v : left) CHECK(std::abs(v) <= 2.0);
  }
}

TEST_CASE("cubes") {
  const auto level1 = cubes_at_level(1, 2);
  CHECK(level1.size() == 4);
  const CubeIndex c{{1}, 1};
  CHECK(c.contains(pt({0.5})));
  CHECK_FALSE(c.contains(pt({0.0})));
  CHECK_FALSE(c.contains(pt({0.51})));
  CHECK(CubeIndex{{3}, 2}.inside(CubeIndex{{2}, 1}));
  CHECK_FALSE(CubeIndex{{2}, 3}.inside(CubeIndex{{1}, 2}));
  CHECK_FALSE(cube_of(pt({0.0}), 1).has_value());
  CHECK(cube_of(pt({0.3}), 2)->a == std::vector<int>{2});

  const auto fam = MomentFamily::conditional_fsd(0.0, 1.0, 1, 1, 2);
  const MomentIndex idx{0.5, CubeIndex{{2}, 1}, 0, false};
  CHECK(fam.evaluate(idx, pt({0.3, 0.7, 0.8})) == 1.0);
  CHECK(fam.evaluate(idx, pt({0.3, 0.7, 0.2})) == 0.0);
  CHECK_THROWS_AS(fam.evaluate({0.5, CubeIndex{{5}, 2}, 0, false}, pt({0.3, 0.7, 0.2})), InputError);
}

TEST_CASE("custom family stores the negated moments") {
  const auto q = DiscreteMeasure::uniform({{0.0}, {1.0}});
  const auto fam = MomentFamily::custom(q, {{-1.0, 2.0}});
  const auto v = fam.values({0.0, {}, 0, false}, q);
  CHECK(v == std::vector<double>{1.0, -2.0});
  CHECK(family_mean(fam, {0.0, {}, 0, false}, q) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(MomentFamily::custom(q, {{1.0}}), InputError);
  CHECK_THROWS_AS(fam.values({0.0, {}, 3, false}, q), InputError);
}
