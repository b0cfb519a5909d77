#include <random>

#include "doctest.h"
#include "iproj/dualsolver.hpp"
#include "iproj/error.hpp"

using namespace iproj;

namespace {

const DiscreteMeasure& two_atoms() {
  static const DiscreteMeasure q = DiscreteMeasure::uniform({{0.0}, {1.0}});
  return q;
}

// member for the moment function f = (-1, 2)
const Reps tilt_reps{{1.0, -2.0}};
const double beta_star = std::log(2.0) / 3.0;
const double value_star = 1.5 * std::pow(2.0, -2.0 / 3.0);

struct Instance {
  DiscreteMeasure q;
  Reps reps;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t n = 5 + static_cast<std::size_t>(u(rng) * 20);
  const std::size_t k = 1 + static_cast<std::size_t>(u(rng) * 6);
  std::vector<std::vector<double>> atoms;
  std::vector<double> w;
  for (std::size_t j = 0; j < n; ++j) {
    atoms.push_back({static_cast<double>(j)});
    w.push_back(0.05 + u(rng));
  }
  auto q = DiscreteMeasure::normalized(atoms, w);
  // shift every member so a random strictly positive density satisfies it
  // strictly; that interior point makes the objective coercive
  std::vector<double> p(n);
  for (auto& x : p) x = 0.2 + u(rng);
  const double z = integrate(q, p);
  for (auto& x : p) x /= z;
  Reps reps(k, std::vector<double>(n));
  for (auto& v : reps) {
    std::vector<double> vp(n);
    for (auto& x : v) x = nd(rng);
    for (std::size_t j = 0; j < n; ++j) vp[j] = v[j] * p[j];
    const double shift = integrate(q, vp) - 0.1 * u(rng) - 0.01;
    for (auto& x : v) x -= shift;
  }
  return {q, reps};
}

}  // namespace

TEST_CASE("objective examples") {
  const auto& q = two_atoms();
  CHECK(objective(q, tilt_reps, {0.0}) == 1.0);
  CHECK(objective(q, tilt_reps, {beta_star}) == doctest::Approx(value_star).epsilon(1e-14));
  CHECK(value_star == doctest::Approx(0.944941).epsilon(1e-6));
  CHECK(objective(q, {{5, 3}, {-1, 7}}, {0.0, 0.0}) == 1.0);
  CHECK_THROWS_AS(objective(q, tilt_reps, {-1.0}), InputError);
  CHECK_THROWS_AS(objective(q, {{1.0}}, {1.0}), InputError);
  CHECK(std::isinf(objective(q, tilt_reps, {1e3})));
}

TEST_CASE("gradient examples") {
  const auto& q = two_atoms();
  const Reps reps{{1.0, -2.0}, {0.3, 0.5}, {0.0, 0.0}};
  const auto g0 = gradient(q, reps, {0.0, 0.0, 0.0});
  CHECK(g0[0] == doctest::Approx(-0.5));
  CHECK(g0[1] == doctest::Approx(0.4));
  CHECK(g0[2] == 0.0);
  CHECK(std::abs(gradient(q, tilt_reps, {beta_star})[0]) <= 1e-15);
  CHECK(gradient(q, reps, {1.0, 2.0, 3.0})[2] == 0.0);
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_instance(rng);
    std::vector<double> beta(inst.reps.size());
    for (auto& b : beta) b = 0.1 + u(rng);
    const auto g = gradient(inst.q, inst.reps, beta);
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) {
      const double h = 1e-6;
      auto bp = beta, bm = beta;
      bp[i] += h;
      bm[i] -= h;
      const double fd =
          (objective(inst.q, inst.reps, bp) - objective(inst.q, inst.reps, bm)) / (2 * h);
      err = std::max(err, std::abs(fd - g[i]));
      norm = std::max(norm, std::abs(g[i]));
    }
    CHECK(err <= 1e-5 * std::max(norm, 1e-3));
  }
}

TEST_CASE("objective is convex along segments") {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = random_instance(rng);
    std::vector<double> a(inst.reps.size()), b(a.size()), m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = 2 * u(rng);
      b[i] = 2 * u(rng);
      m[i] = 0.5 * (a[i] + b[i]);
    }
    const double chord = 0.5 * (objective(inst.q, inst.reps, a) + objective(inst.q, inst.reps, b));
    CHECK(objective(inst.q, inst.reps, m) <= chord + 1e-12);
  }
}

TEST_CASE("solver on the two atom tilt") {
  const auto sol = solve_finite_program(two_atoms(), tilt_reps);
  CHECK(sol.converged);
  CHECK(sol.beta[0] == doctest::Approx(beta_star).epsilon(1e-9));
  CHECK(sol.value == doctest::Approx(value_star).epsilon(1e-12));
  CHECK(sol.alpha == sol.beta[0]);
  CHECK(sol.mu[0] == 1.0);
  const auto p = density_from_dual(two_atoms(), sol.y);
  CHECK(p[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(p[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(duality_gap(two_atoms(), p, sol.value) <= 1e-12);
}

TEST_CASE("solver stays at zero when every member has positive mean") {
  const auto& q = two_atoms();
  const auto sol = solve_finite_program(q, {{1.0, 0.5}, {2.0, -1.0}});
  CHECK(sol.converged);
  CHECK(sol.beta == std::vector<double>{0.0, 0.0});
  CHECK(sol.value == 1.0);
  CHECK(sol.mu == std::vector<double>{0.5, 0.5});
  CHECK(sol.iterations == 0);
}

TEST_CASE("duplicated members give the same y") {
  const auto& q = two_atoms();
  const auto one = solve_finite_program(q, tilt_reps);
  const auto two = solve_finite_program(q, {tilt_reps[0], tilt_reps[0]});
  CHECK(two.converged);
  for (std::size_t j = 0; j < 2; ++j) CHECK(two.y[j] == doctest::Approx(one.y[j]).epsilon(1e-9));
  CHECK(two.value == doctest::Approx(one.value).epsilon(1e-12));
}

TEST_CASE("solution invariants, kkt conditions and monotone trace") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SolverConfig cfg;
  cfg.record_trace = true;
  int converged = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = random_instance(rng);
    const auto sol = solve_finite_program(inst.q, inst.reps, cfg);
    if (!sol.converged) continue;
    ++converged;
    double alpha = 0.0;
    for (double b : sol.beta) {
      CHECK(b >= 0.0);
      alpha += b;
    }
    CHECK(std::abs(sol.alpha - alpha) <= 1e-12);
    const auto y = combine(inst.reps, sol.beta, inst.q.size());
    for (std::size_t j = 0; j < y.size(); ++j) CHECK(std::abs(y[j] - sol.y[j]) <= 1e-10);
    double direct = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) direct += inst.q.weight(j) * std::exp(sol.y[j]);
    CHECK(std::abs(direct - sol.value) <= 1e-10 * sol.value);
    const auto g = gradient(inst.q, inst.reps, sol.beta);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (sol.beta[i] > cfg.grad_tol) CHECK(std::abs(g[i]) <= cfg.grad_tol);
      if (sol.beta[i] == 0.0) CHECK(g[i] >= -cfg.grad_tol);
    }
    for (std::size_t k = 1; k < sol.trace.size(); ++k) {
      CHECK(sol.trace[k] <= sol.trace[k - 1] * (1.0 + 1e-15));
    }
    const auto p = density_from_dual(inst.q, sol.y);
    CHECK(duality_gap(inst.q, p, sol.value) <= 1e-8);
  }
  CHECK(converged == 60);
}

TEST_CASE("y is unique across starting points") {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = random_instance(rng);
    inst.reps.push_back(inst.reps.front());
    std::vector<double> start(inst.reps.size());
    for (auto& b : start) b = 0.5 * u(rng);
    const auto a = solve_finite_program(inst.q, inst.reps);
    const auto b = solve_finite_program(inst.q, inst.reps, {}, start);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (std::size_t j = 0; j < a.y.size(); ++j) CHECK(std::abs(a.y[j] - b.y[j]) <= 1e-6);
  }
}

TEST_CASE("non coercive instance reports divergence") {
  const auto& q = two_atoms();
  const auto sol = solve_finite_program(q, {{-1.0, -2.0}});
  CHECK_FALSE(sol.converged);
  CHECK(sol.diverged);
  CHECK(sol.diagnostic.find("coercive") != std::string::npos);
}

TEST_CASE("density from dual") {
  const auto& q = two_atoms();
  const auto p = density_from_dual(q, {0.0, 0.0});
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 1.0);
  std::mt19937_64 rng(105);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = random_instance(rng);
    std::vector<double> y(inst.q.size()), shifted(y.size());
    const double c = nd(rng) * 100;
    for (std::size_t j = 0; j < y.size(); ++j) {
      y[j] = nd(rng);
      shifted[j] = y[j] + c;
    }
    const auto a = density_from_dual(inst.q, y);
    const auto b = density_from_dual(inst.q, shifted);
    for (std::size_t j = 0; j < y.size(); ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-12 * std::max(1.0, a[j]));
  }
  const double inf = std::numeric_limits<double>::infinity();
  const auto z = density_from_dual(q, {0.0, -inf});
  CHECK(z[0] == 2.0);
  CHECK(z[1] == 0.0);
  CHECK(density_from_dual(q, {800.0, 0.0})[0] == doctest::Approx(2.0));
}

TEST_CASE("duality gap examples") {
  const auto& q = two_atoms();
  CHECK(duality_gap(q, DensityVector::ones(q), 1.0) == 0.0);
  const DensityVector p({4.0 / 3.0, 2.0 / 3.0}, q);
  CHECK(duality_gap(q, p, value_star) <= 1e-6);
  CHECK(duality_gap(q, p, value_star * 1.01) == doctest::Approx(std::log(1.01)).epsilon(1e-6));
  CHECK(std::log(1.01) == doctest::Approx(0.00995).epsilon(1e-3));
}
