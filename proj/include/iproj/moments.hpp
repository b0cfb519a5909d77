#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iproj/measure.hpp"

namespace iproj {

/// A CDF given by sorted knots (location, cumulative value).
///
/// Step interpolation is right-continuous: G(x) is the value of the last knot
/// at or below x, and 0 before the first knot. Linear interpolation joins the
/// knots and is flat outside them (0 on the left, last value on the right).
class Cdf {
 public:
  enum class Interpolation { Step, Linear };

  Cdf(std::vector<std::pair<double, double>> knots, Interpolation interp = Interpolation::Step);

  /// G(x) = x on [0, 1].
  static Cdf uniform01();

  double operator()(double x) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }
  Interpolation interpolation() const { return interp_; }

 private:
  std::vector<std::pair<double, double>> knots_;
  Interpolation interp_;
};

/// Dyadic hypercube C_{a,r} = prod_u ((a_u - 1)/(2r), a_u/(2r)], a_u in 1..2r.
struct CubeIndex {
  std::vector<int> a;
  int r = 1;

  bool contains(std::span<const double> z) const;
  /// Whether this cube lies inside `outer` (outer.r <= r).
  bool inside(const CubeIndex& outer) const;
  bool operator==(const CubeIndex&) const = default;
};

/// All (2r)^d cubes at level r, lexicographic in a.
std::vector<CubeIndex> cubes_at_level(int r, int dim);

/// The level-r cube containing z, or nullopt when some z_u is outside (0, 1].
std::optional<CubeIndex> cube_of(std::span<const double> z, int r);

/// Index into a family. Which fields matter depends on the family kind:
/// gamma for the interval families, cube additionally for ConditionalFSD,
/// member for Custom. `tail` selects the member K - |f|^{1+delta}.
struct MomentIndex {
  double gamma = 0.0;
  std::optional<CubeIndex> cube;
  std::size_t member = 0;
  bool tail = false;

  bool operator==(const MomentIndex&) const = default;
};

enum class FamilyKind { UnconditionalFSD, ConditionalFSD, MarginalGivenG, Custom };

struct TailConfig {
  double K = 1.0;
  double delta = 1.0;
};

/// An indexed set of moment functions. Members are stored with the sign of
/// the set V: v = -f, so every constraint reads  int v p dQ >= 0.
class MomentFamily {
 public:
  /// v_g(x1, x2) = 1[x1 <= g] - 1[x2 <= g], g in [lo, hi].
  static MomentFamily unconditional_fsd(double lo, double hi);

  /// v_(g, C)(x1, x2, z) = (1[x1 <= g] - 1[x2 <= g]) 1[z in C], cubes at
  /// levels r0..r_max.
  static MomentFamily conditional_fsd(double lo, double hi, int dz, int r0 = 1, int r_max = 1);

  /// v_g(w) = G(g) - 1[w <= g], g in [0, gamma_max].
  static MomentFamily marginal_given_g(Cdf g, double gamma_max);

  /// Finite family of user moment functions f_k given per atom of `q`
  /// (constraint int f_k p dQ <= 0). Stored as v_k = -f_k.
  static MomentFamily custom(const DiscreteMeasure& q, std::vector<std::vector<double>> f);

  MomentFamily with_tail(TailConfig tail) const;

  FamilyKind kind() const { return kind_; }
  double gamma_min() const { return lo_; }
  double gamma_max() const { return hi_; }
  int dz() const { return dz_; }
  int r0() const { return r0_; }
  int r_max() const { return r_max_; }
  const std::optional<Cdf>& cdf() const { return g_; }
  const std::optional<TailConfig>& tail() const { return tail_; }
  std::size_t custom_size() const { return members_.size(); }

  /// Dimension the family's atoms must have.
  std::size_t required_dim() const;

  /// f_index(omega) of the underlying (unsigned) moment function.
  double moment(const MomentIndex& index, std::span<const double> omega) const;

  /// v_index(omega): -f for ordinary members, K - |f|^{1+delta} for tail ones.
  double evaluate(const MomentIndex& index, std::span<const double> omega) const;

  /// Member values at every atom of q.
  std::vector<double> values(const MomentIndex& index, const DiscreteMeasure& q) const;

  /// f_index at every atom of q.
  std::vector<double> moments(const MomentIndex& index, const DiscreteMeasure& q) const;

  void check_compatible(const DiscreteMeasure& q) const;

 private:
  MomentFamily() = default;
  void check_index(const MomentIndex& index) const;
  std::size_t custom_atom(std::span<const double> omega) const;

  FamilyKind kind_ = FamilyKind::Custom;
  double lo_ = 0.0;
  double hi_ = 0.0;
  int dz_ = 0;
  int r0_ = 1;
  int r_max_ = 1;
  std::optional<Cdf> g_;
  std::optional<TailConfig> tail_;
  // Custom: atom coordinates (row-major) and f values per member.
  std::size_t custom_dim_ = 0;
  std::vector<double> custom_atoms_;
  std::vector<std::vector<double>> members_;
};

/// int v_index dQ.
double family_mean(const MomentFamily& family, const MomentIndex& index, const DiscreteMeasure& q);

/// Sorted gamma probe points: a uniform grid of `resolution` steps on
/// [gamma_min, gamma_max] united with every atom coordinate the family
/// thresholds (and the CDF knots for MarginalGivenG) inside the interval.
std::vector<double> gamma_grid(const MomentFamily& family, const DiscreteMeasure& q,
                               std::size_t resolution);

/// Finite probing grid of the index set. For the interval families the
/// members are step functions of gamma that only jump at atom coordinates, so
/// the grid reaches every distinct member. ConditionalFSD crosses the gamma
/// grid with every cube at levels r0..r_max; Custom lists its members. Tail
/// members, when configured, follow each ordinary member.
std::vector<MomentIndex> index_grid(const MomentFamily& family, const DiscreteMeasure& q,
                                    std::size_t resolution);

std::string to_string(FamilyKind kind);

}  // namespace iproj
