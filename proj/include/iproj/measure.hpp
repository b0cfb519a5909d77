#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace iproj {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Finitely supported probability measure on R^d.
///
/// Atoms are stored row-major. Duplicate atoms are merged at construction
/// (weights summed, first occurrence keeps its position), so every atom is
/// distinct and densities are well defined per atom.
class DiscreteMeasure {
 public:
  /// Weights must be nonnegative and sum to 1 within 1e-12.
  DiscreteMeasure(const std::vector<std::vector<double>>& atoms,
                  const std::vector<double>& weights);

  /// Same as the constructor but rescales any positive total mass to 1.
  static DiscreteMeasure normalized(const std::vector<std::vector<double>>& atoms,
                                    const std::vector<double>& weights);

  /// Uniform weights over the given points.
  static DiscreteMeasure uniform(const std::vector<std::vector<double>>& atoms);

  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return dim_; }

  std::span<const double> atom(std::size_t j) const {
    return {coords_.data() + j * dim_, dim_};
  }
  double coord(std::size_t j, std::size_t k) const { return coords_[j * dim_ + k]; }
  double weight(std::size_t j) const { return weights_[j]; }
  std::span<const double> weights() const { return weights_; }

  /// Coordinate k of every atom.
  std::vector<double> coordinates(std::size_t k) const;

  /// Same atoms, new weights (renormalized). Used for tilted references.
  DiscreteMeasure reweighted(const std::vector<double>& weights) const;

 private:
  DiscreteMeasure() = default;
  void init(const std::vector<std::vector<double>>& atoms, const std::vector<double>& weights,
            bool renormalize);

  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// Q-density p of some P << Q: nonnegative with sum_j p_j q_j = 1.
class DensityVector {
 public:
  /// Validates against q (length, nonnegativity, normalization within 1e-10).
  DensityVector(std::vector<double> values, const DiscreteMeasure& q);

  /// p = 1, i.e. P = Q.
  static DensityVector ones(const DiscreteMeasure& q);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Sum_j f_j q_j, compensated.
double integrate(const DiscreteMeasure& q, std::span<const double> f);

/// m(p) = sum_j q_j p_j log p_j with 0 log 0 = 0 (nats).
double kl_divergence(const DensityVector& p, const DiscreteMeasure& q);

/// ||f - g||_{L1(Q)}.
double l1_distance(std::span<const double> f, std::span<const double> g, const DiscreteMeasure& q);

struct MeasureCsv {
  DiscreteMeasure measure;
  std::vector<std::string> warnings;
};

/// Reads `w, x1, ..., xd` rows (header required). Weights off from 1 by more
/// than 1e-6 are renormalized with a warning.
MeasureCsv read_measure_csv(const std::filesystem::path& path);

void write_measure_csv(const std::filesystem::path& path, const DiscreteMeasure& q);

}  // namespace iproj
