#include "iproj/generate.hpp"

#include <cmath>
#include <random>

#include "iproj/error.hpp"

namespace iproj {

DiscreteMeasure generate_instance(const GenerateOptions& options) {
  if (options.atoms == 0) throw InputError("instance needs at least one atom");
  if (!(options.anchor_share >= 0.0 && options.anchor_share <= 1.0)) {
    throw InputError("anchor_share must lie in [0, 1]");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;
  const auto anchors = static_cast<std::size_t>(std::ceil(options.anchor_share * options.atoms));
  for (std::size_t j = 0; j < options.atoms; ++j) {
    switch (options.kind) {
      case InstanceKind::Fsd:
      case InstanceKind::ConditionalFsd: {
        std::vector<double> a;
        if (j < anchors) {
          a = {0.2 * u(rng), 0.8 + 0.2 * u(rng)};
        } else {
          a = {u(rng), std::pow(u(rng), 1.5)};
        }
        if (options.kind == InstanceKind::ConditionalFsd) a.push_back(1.0 - u(rng));
        atoms.push_back(std::move(a));
        weights.push_back(1.0);
        break;
      }
      case InstanceKind::Line:
        atoms.push_back({u(rng)});
        weights.push_back(0.1 + u(rng));
        break;
    }
  }
  return DiscreteMeasure::normalized(atoms, weights);
}

InstanceKind instance_kind_from_string(const std::string& name) {
  if (name == "fsd") return InstanceKind::Fsd;
  if (name == "conditional_fsd") return InstanceKind::ConditionalFsd;
  if (name == "line") return InstanceKind::Line;
  throw InputError("unknown instance kind '" + name + "' (expected fsd, conditional_fsd or line)");
}

}  // namespace iproj
