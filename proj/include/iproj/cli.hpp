#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iproj/io.hpp"

namespace iproj {

struct RunConfig {
  std::string input;            ///< atoms CSV
  std::string family;           ///< family JSON path
  std::optional<Json> family_doc;  ///< inline family from --config
  std::string output;           ///< empty: stdout
  std::string trace;            ///< stage trace CSV
  double eps0 = 0.5;
  double decay = 0.5;
  int stages = 12;
  std::vector<double> schedule;  ///< explicit schedule, overrides eps0/decay/stages
  double value_tol = 1e-10;
  double grad_tol = 1e-10;
  double binding_tol = 1e-6;
  int max_iter = 50000;
  double beta_cap = 1e3;
  std::size_t resolution = 16;
  std::optional<unsigned> threads;
  std::uint64_t seed = 1;
  double delta = 1.0;
  double epsilon = 0.25;          ///< partition subcommand
  std::string density;           ///< verify: result JSON with a density array
  std::string oracle = "bregman_dykstra";
  int oracle_max_cycles = 200000;
  double tolerance = 1e-4;       ///< compare: allowed |KL gap|
  std::size_t max_atoms = 500;
  std::size_t max_constraints = 200;
  std::string kind = "fsd";      ///< gen
  std::size_t atoms = 40;        ///< gen
  double anchor_share = 0.1;     ///< gen
};

/// Applies the keys of a --config document on top of `config`.
void apply_config_json(const Json& j, RunConfig& config);

/// Entry point of the iproject tool. Returns 0 on success or convergence,
/// 2 when a run does not converge or a check fails, 1 on input errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace iproj
