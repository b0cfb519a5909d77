#pragma once

#include <cstdint>
#include <string>

#include "iproj/measure.hpp"

namespace iproj {

enum class InstanceKind {
  Fsd,             ///< (x1, x2), x2 stochastically smaller, with a share of anchor atoms
  ConditionalFsd,  ///< (x1, x2, z) with z uniform on (0, 1]
  Line,            ///< one dimensional, random weights
};

struct GenerateOptions {
  InstanceKind kind = InstanceKind::Fsd;
  std::size_t atoms = 40;
  std::uint64_t seed = 1;
  /// Fsd and ConditionalFsd: fraction of atoms with x1 in [0, 0.2] and x2 in
  /// [0.8, 1], which keeps the dominance constraint set nonempty.
  double anchor_share = 0.1;
};

/// Reproducible synthetic reference measure.
DiscreteMeasure generate_instance(const GenerateOptions& options);

InstanceKind instance_kind_from_string(const std::string& name);

}  // namespace iproj
