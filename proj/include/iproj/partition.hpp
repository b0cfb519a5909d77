#pragma once

#include <cstddef>
#include <vector>

#include "iproj/measure.hpp"
#include "iproj/moments.hpp"

namespace iproj {

struct Cell {
  std::vector<std::size_t> members;  ///< positions in Partition::grid
  std::size_t representative = 0;    ///< position in Partition::grid
  double diameter = 0.0;             ///< max pairwise L1(Q) distance among members
  double bound = 0.0;                ///< mass bound used by the construction (>= diameter)
  double representative_mean = 0.0;  ///< int v_rep dQ
  bool empty_selection = false;      ///< no member had int v dQ <= 0
};

/// A finite decomposition of the index grid into cells of small L1(Q) diameter.
struct Partition {
  std::vector<MomentIndex> grid;
  std::vector<Cell> cells;
  double epsilon = 0.0;

  /// gamma_0 < gamma_1 < ... < gamma_n; cell j covers (gamma_{j-1}, gamma_j]
  /// (the first one [gamma_0, gamma_1]). Empty for Custom families.
  std::vector<double> cut_points;

  /// Conditional families: chosen cube level and the factor sizes n1 x n2.
  int r0 = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  /// Some cell's diameter exceeds epsilon.
  bool accuracy_flag = false;

  std::size_t size() const { return cells.size(); }
  /// Largest certified diameter.
  double achieved_epsilon() const;
  bool certified() const;
  std::vector<std::vector<double>> representative_values(const MomentFamily& family,
                                                         const DiscreteMeasure& q) const;
};

struct PartitionOptions {
  std::size_t resolution = 16;  ///< uniform part of the gamma grid
  unsigned threads = 1;         ///< diameter certification workers
};

/// Unconditional FSD: cells are runs of the sorted gamma grid whose swept
/// marginal mass Q_X1((a, b]) + Q_X2((a, b]) stays within epsilon, which
/// bounds every pairwise distance in the cell. n <= ceil(4 + 2/epsilon).
Partition build_fsd_partition(const DiscreteMeasure& q, const MomentFamily& family, double epsilon,
                              const PartitionOptions& options = {});

/// Smallest r with Q_Z(C_{a,r}) <= epsilon/6 for every a. Throws when a
/// single z value carries more mass than that (no level can split it), or
/// when z leaves [0, 1]^dz.
int choose_cube_level(const DiscreteMeasure& q, int dz, double epsilon);

/// Conditional FSD: gamma runs with swept mass <= 2 epsilon/3 crossed with the
/// (2 r0)^dz cube groups at level r0. Finer levels (multiples of r0 up to the
/// family's r_max) join the group of the r0 cube containing them.
Partition build_conditional_fsd_partition(const DiscreteMeasure& q, const MomentFamily& family,
                                          double epsilon, const PartitionOptions& options = {});

/// Marginal-vs-G family: runs with Q((a, b]) + G(b) - G(a) <= epsilon.
/// Jumps of G larger than epsilon always start a new cell.
Partition build_marginal_partition(const DiscreteMeasure& q, const MomentFamily& family,
                                   double epsilon, const PartitionOptions& options = {});

/// Deterministic greedy clustering for arbitrary families: each member joins
/// the first cell it stays within epsilon of (complete linkage), otherwise
/// opens a new one.
Partition build_greedy_partition(const DiscreteMeasure& q, const MomentFamily& family,
                                 std::vector<MomentIndex> grid, double epsilon,
                                 const PartitionOptions& options = {});

/// Per cell, the member with the smallest int v dQ (ties: smallest grid
/// position). Flags cells where that minimum is positive.
Partition select_representatives(Partition partition, const DiscreteMeasure& q,
                                  const MomentFamily& family);

/// Kind-appropriate builder, greedy cells for tail members, then
/// representative selection.
Partition build_partition(const DiscreteMeasure& q, const MomentFamily& family, double epsilon,
                          const PartitionOptions& options = {});

/// Exact max pairwise L1(Q) distance among the given vectors.
double max_pairwise_distance(const std::vector<std::vector<double>>& vectors,
                             const DiscreteMeasure& q);

}  // namespace iproj
