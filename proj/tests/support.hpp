#pragma once

#include <random>
#include <vector>

#include "iproj/measure.hpp"

namespace testing_support {

/// Uniform weights, x1 ~ U(0,1), x2 ~ U(0,1)^1.5 (x2 tends to sit below x1).
inline iproj::DiscreteMeasure random_fsd_measure(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> atoms;
  for (std::size_t j = 0; j < n; ++j) atoms.push_back({u(rng), std::pow(u(rng), 1.5)});
  return iproj::DiscreteMeasure::uniform(atoms);
}

inline iproj::DiscreteMeasure random_weighted_line(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> atoms;
  std::vector<double> w;
  for (std::size_t j = 0; j < n; ++j) {
    atoms.push_back({u(rng)});
    w.push_back(0.1 + u(rng));
  }
  return iproj::DiscreteMeasure::normalized(atoms, w);
}

}  // namespace testing_support
