#include "iproj/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "iproj/error.hpp"

namespace iproj {

namespace {

std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void dump(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(key).dump() + ": ";
        dump(value, indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], indent + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump(j[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_number(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

double number(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("family: missing field '") + key + "'");
  if (!j.at(key).is_number()) throw InputError(std::string("family: '") + key + "' must be a number");
  return j.at(key).get<double>();
}

int integer(const Json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    throw InputError(std::string("family: '") + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": invalid JSON");
  }
}

std::string dump_json(const Json& j) {
  std::string out;
  dump(j, 0, out);
  out += "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

Cdf cdf_from_json(const Json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "uniform") return Cdf::uniform01();
    throw InputError("family: unknown CDF name '" + j.get<std::string>() + "'");
  }
  if (!j.is_object() || !j.contains("knots") || !j.at("knots").is_array()) {
    throw InputError("family: 'g' needs a 'knots' array of [location, value] pairs");
  }
  std::vector<std::pair<double, double>> knots;
  for (const auto& k : j.at("knots")) {
    if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
      throw InputError("family: every knot must be a [location, value] pair of numbers");
    }
    knots.emplace_back(k[0].get<double>(), k[1].get<double>());
  }
  auto interp = Cdf::Interpolation::Step;
  if (j.contains("interpolation")) {
    const auto s = j.at("interpolation").get<std::string>();
    if (s == "linear") {
      interp = Cdf::Interpolation::Linear;
    } else if (s != "step") {
      throw InputError("family: interpolation must be 'step' or 'linear'");
    }
  }
  return Cdf(std::move(knots), interp);
}

MomentFamily family_from_json(const Json& j, const DiscreteMeasure& q) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw InputError("family: expected an object with a string 'kind'");
  }
  const auto kind = j.at("kind").get<std::string>();
  std::optional<MomentFamily> fam;
  if (kind == "unconditional_fsd") {
    fam = MomentFamily::unconditional_fsd(number(j, "gamma_min"), number(j, "gamma_max"));
  } else if (kind == "conditional_fsd") {
    const int r0 = integer(j, "r0", 1);
    fam = MomentFamily::conditional_fsd(number(j, "gamma_min"), number(j, "gamma_max"),
                                        integer(j, "dz", 1), r0, integer(j, "r_max", r0));
  } else if (kind == "marginal_given_g") {
    if (!j.contains("g")) throw InputError("family: missing field 'g'");
    fam = MomentFamily::marginal_given_g(cdf_from_json(j.at("g")), number(j, "gamma_max"));
  } else if (kind == "custom") {
    if (!j.contains("moment_functions") || !j.at("moment_functions").is_array()) {
      throw InputError("family: custom needs a 'moment_functions' array");
    }
    std::vector<std::vector<double>> f;
    for (const auto& row : j.at("moment_functions")) {
      if (!row.is_array()) throw InputError("family: every moment function must be an array");
      std::vector<double> r;
      for (const auto& x : row) {
        if (!x.is_number()) throw InputError("family: moment function values must be numbers");
        r.push_back(x.get<double>());
      }
      f.push_back(std::move(r));
    }
    fam = MomentFamily::custom(q, std::move(f));
  } else {
    throw InputError("family: unknown kind '" + kind +
                     "' (expected unconditional_fsd, conditional_fsd, marginal_given_g or custom)");
  }
  if (j.contains("tail")) {
    const auto& t = j.at("tail");
    fam = fam->with_tail({number(t, "K"), t.contains("delta") ? number(t, "delta") : 1.0});
  }
  fam->check_compatible(q);
  return *fam;
}

Json to_json(const MomentIndex& index, const MomentFamily& family) {
  Json j;
  if (family.kind() == FamilyKind::Custom) {
    j["member"] = index.member;
  } else {
    j["gamma"] = index.gamma;
  }
  if (index.cube) j["cube"] = {{"a", index.cube->a}, {"r", index.cube->r}};
  if (index.tail) j["tail"] = true;
  return j;
}

Json to_json(const Partition& partition, const MomentFamily& family) {
  Json j;
  j["family"] = to_string(family.kind());
  j["epsilon"] = partition.epsilon;
  j["achieved_epsilon"] = partition.achieved_epsilon();
  j["certified"] = partition.certified();
  j["accuracy_flag"] = partition.accuracy_flag;
  j["size"] = partition.size();
  j["cut_points"] = numbers(partition.cut_points);
  if (family.kind() == FamilyKind::ConditionalFSD) {
    j["r0"] = partition.r0;
    j["n1"] = partition.n1;
    j["n2"] = partition.n2;
  }
  Json grid = Json::array();
  for (const auto& idx : partition.grid) grid.push_back(to_json(idx, family));
  j["grid"] = std::move(grid);
  Json cells = Json::array();
  for (const auto& c : partition.cells) {
    Json cj;
    cj["members"] = c.members;
    cj["representative"] = c.representative;
    cj["diameter"] = c.diameter;
    cj["bound"] = c.bound;
    cj["representative_mean"] = c.representative_mean;
    cj["empty_selection"] = c.empty_selection;
    if (family.kind() != FamilyKind::Custom && !c.members.empty()) {
      double lo = partition.grid[c.members.front()].gamma, hi = lo;
      for (auto m : c.members) {
        lo = std::min(lo, partition.grid[m].gamma);
        hi = std::max(hi, partition.grid[m].gamma);
      }
      cj["gamma_range"] = {lo, hi};
    }
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  return j;
}

Json to_json(const StageRecord& s) {
  return {{"epsilon", s.epsilon},
          {"cells", s.cells},
          {"representatives", s.representatives},
          {"achieved_epsilon", s.achieved_epsilon},
          {"empty_selections", s.empty_selections},
          {"value", s.value},
          {"log_value", s.log_value},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"diverged", s.diverged},
          {"duality_gap", s.duality_gap},
          {"diagnostic", s.diagnostic}};
}

Json to_json(const ConstraintCheck& check, const MomentFamily& family,
             const std::vector<MomentIndex>& grid) {
  Json binding = Json::array();
  for (auto i : check.binding) {
    Json b = to_json(grid[i], family);
    b["position"] = i;
    binding.push_back(std::move(b));
  }
  Json j;
  j["max_slack"] = check.max_slack;
  j["argmax"] = to_json(grid.at(check.argmax), family);
  j["binding_set"] = std::move(binding);
  j["grid_size"] = grid.size();
  return j;
}

Json to_json(const AssumptionReport& r, const MomentFamily& family) {
  return {{"laplace_ok", r.laplace_ok},
          {"laplace_index", to_json(r.laplace_index, family)},
          {"laplace_alpha", r.laplace_alpha},
          {"laplace_value", r.laplace_value},
          {"tail_sup", r.tail_sup},
          {"strict_mass", r.strict_mass},
          {"precompact_epsilon", r.precompact_epsilon},
          {"precompact_cells", r.precompact_cells}};
}

Json to_json(const OracleResult& r) {
  return {{"density", numbers(r.density)},
          {"kl", r.kl},
          {"last_change", r.last_change},
          {"cycles", r.cycles},
          {"converged", r.converged},
          {"diagnostic", r.diagnostic}};
}

Json to_json(const ProjectionResult& r, const MomentFamily& family,
             const std::optional<AssumptionReport>& assumptions) {
  Json j;
  j["family"] = to_string(family.kind());
  j["density"] = numbers(r.density);
  j["kl"] = r.kl;
  j["value"] = r.value;
  j["converged"] = r.converged;
  j["stabilized"] = r.stabilized;
  j["diagnostic"] = r.diagnostic;
  j["reported_stage"] = r.reported_stage;
  Json stages = Json::array();
  for (const auto& s : r.stages) stages.push_back(to_json(s));
  j["stages"] = std::move(stages);
  j["constraints"] = to_json(r.check, family, r.grid);
  j["binding_set"] = j["constraints"]["binding_set"];
  j["max_slack"] = r.check.max_slack;
  j["beta"] = numbers(r.solution.beta);
  if (assumptions) j["assumptions"] = to_json(*assumptions, family);
  return j;
}

std::vector<double> density_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("density") || !j.at("density").is_array()) {
    throw InputError("result document has no 'density' array");
  }
  std::vector<double> p;
  for (const auto& x : j.at("density")) {
    if (!x.is_number()) throw InputError("density entries must be numbers");
    p.push_back(x.get<double>());
  }
  return p;
}

std::string stage_trace_csv(const ProjectionResult& result) {
  std::string out = "stage,epsilon,cells,representatives,value,log_value,iterations,duality_gap,converged\n";
  for (std::size_t m = 0; m < result.stages.size(); ++m) {
    const auto& s = result.stages[m];
    out += std::to_string(m) + "," + format_number(s.epsilon) + "," + std::to_string(s.cells) + "," +
           std::to_string(s.representatives) + "," + format_number(s.value) + "," +
           format_number(s.log_value) + "," + std::to_string(s.iterations) + "," +
           format_number(s.duality_gap) + "," + (s.converged ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace iproj
