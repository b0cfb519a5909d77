#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "iproj/driver.hpp"
#include "iproj/moments.hpp"
#include "iproj/oracle.hpp"
#include "iproj/partition.hpp"

namespace iproj {

using Json = nlohmann::json;

/// Parses a JSON file; syntax errors become InputError with line and column.
Json read_json_file(const std::filesystem::path& path);

/// Serializes with sorted keys, two space indentation and every number
/// printed with 17 significant digits (non-finite numbers become null).
std::string dump_json(const Json& j);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Family document:
///   {"kind": "unconditional_fsd", "gamma_min": a, "gamma_max": b}
///   {"kind": "conditional_fsd", "gamma_min": a, "gamma_max": b, "dz": 1, "r0": 1, "r_max": 1}
///   {"kind": "marginal_given_g", "gamma_max": b,
///    "g": "uniform" | {"knots": [[x, G], ...], "interpolation": "step" | "linear"}}
///   {"kind": "custom", "moment_functions": [[f_1(atom_1), ...], ...]}
/// with an optional "tail": {"K": k, "delta": d}. Custom values are listed per
/// atom of q.
MomentFamily family_from_json(const Json& j, const DiscreteMeasure& q);

Cdf cdf_from_json(const Json& j);

Json to_json(const MomentIndex& index, const MomentFamily& family);
Json to_json(const Partition& partition, const MomentFamily& family);
Json to_json(const StageRecord& stage);
Json to_json(const ConstraintCheck& check, const MomentFamily& family,
             const std::vector<MomentIndex>& grid);
Json to_json(const AssumptionReport& report, const MomentFamily& family);
Json to_json(const OracleResult& result);
Json to_json(const ProjectionResult& result, const MomentFamily& family,
             const std::optional<AssumptionReport>& assumptions = std::nullopt);

/// Reads the "density" array of a result document.
std::vector<double> density_from_json(const Json& j);

/// One row per stage: stage, epsilon, cells, representatives, value, log_value,
/// iterations, duality_gap, converged.
std::string stage_trace_csv(const ProjectionResult& result);

}  // namespace iproj
