#include "iproj/cli.hpp"

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "iproj/error.hpp"
#include "iproj/generate.hpp"

namespace iproj {

namespace {

struct Loaded {
  DiscreteMeasure q;
  MomentFamily family;
};

Loaded load(const RunConfig& c, std::ostream& err) {
  if (c.input.empty()) throw InputError("--input is required");
  auto csv = read_measure_csv(c.input);
  for (const auto& w : csv.warnings) err << "warning: " << w << "\n";
  Json doc;
  if (c.family_doc) {
    doc = *c.family_doc;
  } else if (!c.family.empty()) {
    doc = read_json_file(c.family);
  } else {
    throw InputError("--family is required");
  }
  auto fam = family_from_json(doc, csv.measure);
  return {std::move(csv.measure), std::move(fam)};
}

unsigned resolve_threads(const RunConfig& c) {
  if (c.threads) return std::max(1u, *c.threads);
  if (const char* env = std::getenv("IPROJECT_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    throw InputError("IPROJECT_THREADS must be a positive integer");
  }
  return 1;
}

ProjectOptions project_options(const RunConfig& c) {
  ProjectOptions o;
  o.schedule = c.schedule.empty() ? default_schedule(c.eps0, c.decay, c.stages) : c.schedule;
  o.value_tol = c.value_tol;
  o.binding_tol = c.binding_tol;
  if (!(c.grad_tol > 0.0)) throw InputError("grad_tol must be positive");
  o.solver.grad_tol = c.grad_tol;
  o.solver.max_iter = c.max_iter;
  o.solver.beta_cap = c.beta_cap;
  o.partition.resolution = c.resolution;
  o.partition.threads = resolve_threads(c);
  return o;
}

void emit(const RunConfig& c, const Json& j, std::ostream& out) {
  const auto text = dump_json(j);
  if (c.output.empty()) {
    out << text;
  } else {
    write_text(c.output, text);
  }
}

int cmd_project(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto [q, fam] = load(c, err);
  const auto opts = project_options(c);
  const auto r = project(q, fam, opts);
  const auto report = check_assumptions(q, fam, r.grid, c.delta);
  emit(c, to_json(r, fam, report), out);
  if (!c.trace.empty()) write_text(c.trace, stage_trace_csv(r));
  if (!r.converged) err << "not converged: " << r.diagnostic << "\n";
  return r.converged ? 0 : 2;
}

int cmd_partition(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto [q, fam] = load(c, err);
  PartitionOptions po;
  po.resolution = c.resolution;
  po.threads = resolve_threads(c);
  const auto part = build_partition(q, fam, c.epsilon, po);
  emit(c, to_json(part, fam), out);
  return part.certified() ? 0 : 2;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto [q, fam] = load(c, err);
  if (c.density.empty()) throw InputError("--density is required");
  const auto p = density_from_json(read_json_file(c.density));
  const DensityVector dv(p, q);
  const auto grid = index_grid(fam, q, c.resolution);
  const auto check = verify_constraints(p, fam, q, grid, c.binding_tol);
  Json j = to_json(check, fam, grid);
  j["kl"] = kl_divergence(dv, q);
  j["feasible"] = check.max_slack <= c.binding_tol;
  emit(c, j, out);
  return check.max_slack <= c.binding_tol ? 0 : 2;
}

// Oracle density and KL for the instance, by the configured method.
Json run_oracle(const RunConfig& c, const DiscreteMeasure& q, const MomentFamily& fam,
                const std::vector<MomentIndex>& grid, std::vector<double>& density, bool& ok) {
  if (c.oracle == "bregman_dykstra") {
    const auto r = bregman_dykstra(q, constraints_from_grid(fam, q, grid), 1e-13, c.oracle_max_cycles);
    density = r.density;
    ok = r.converged;
    Json j = to_json(r);
    j["method"] = c.oracle;
    return j;
  }
  if (c.oracle == "pava") {
    if (fam.kind() != FamilyKind::MarginalGivenG) {
      throw InputError("the pava oracle needs a marginal_given_g family");
    }
    const auto r = pava_closed_form(q, *fam.cdf());
    const auto p = density_from_dual(q, r.y0);
    density.assign(p.values().begin(), p.values().end());
    ok = true;
    return {{"method", c.oracle},
            {"density", density},
            {"kl", kl_divergence(p, q)},
            {"converged", true}};
  }
  throw InputError("unknown oracle '" + c.oracle + "' (expected bregman_dykstra or pava)");
}

int cmd_oracle(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto [q, fam] = load(c, err);
  const auto opts = project_options(c);
  const auto grid = index_grid(fam, q, c.resolution);
  std::vector<double> od;
  bool ok = false;
  Json j;
  j["oracle"] = run_oracle(c, q, fam, grid, od, ok);
  const auto r = project(q, fam, opts);
  j["scheme"] = {{"kl", r.kl}, {"converged", r.converged}, {"density", r.density}};
  j["kl_gap"] = std::abs(r.kl - j["oracle"]["kl"].get<double>());
  j["l1_distance"] = l1_distance(r.density, od, q);
  emit(c, j, out);
  return ok ? 0 : 2;
}

int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto [q, fam] = load(c, err);
  const auto opts = project_options(c);
  const auto grid = index_grid(fam, q, c.resolution);
  const auto cons = constraints_from_grid(fam, q, grid);
  if (q.size() > c.max_atoms || cons.size() > c.max_constraints) {
    throw InputError("instance too large for the oracle: " + std::to_string(q.size()) +
                     " atoms x " + std::to_string(cons.size()) +
                     " constraints (raise --max-atoms / --max-constraints)");
  }
  const auto orc = bregman_dykstra(q, cons, 1e-13, c.oracle_max_cycles);
  const auto r = project(q, fam, opts);
  const double gap = std::abs(r.kl - orc.kl);
  Json j;
  j["kl_scheme"] = r.kl;
  j["kl_oracle"] = orc.kl;
  j["value_scheme"] = r.value;
  j["value_oracle"] = std::exp(-orc.kl);
  j["kl_gap"] = gap;
  j["value_gap"] = std::abs(r.value - std::exp(-orc.kl));
  j["l1_distance"] = l1_distance(r.density, orc.density, q);
  j["tolerance"] = c.tolerance;
  j["scheme_converged"] = r.converged;
  j["oracle_converged"] = orc.converged;
  j["oracle_cycles"] = orc.cycles;
  j["within_tolerance"] = gap <= c.tolerance;
  emit(c, j, out);
  if (!orc.converged) {
    err << "oracle did not converge: " << orc.diagnostic << "\n";
    return 2;
  }
  return gap <= c.tolerance && r.converged ? 0 : 2;
}

int cmd_gen(const RunConfig& c, std::ostream& out) {
  GenerateOptions g;
  g.kind = instance_kind_from_string(c.kind);
  g.atoms = c.atoms;
  g.seed = c.seed;
  g.anchor_share = c.anchor_share;
  const auto q = generate_instance(g);
  if (c.output.empty()) {
    out << "w";
    for (std::size_t k = 0; k < q.dim(); ++k) out << ",x" << (k + 1);
    out << "\n";
    char buf[40];
    for (std::size_t j = 0; j < q.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", q.weight(j));
      out << buf;
      for (std::size_t k = 0; k < q.dim(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", q.coord(j, k));
        out << "," << buf;
      }
      out << "\n";
    }
  } else {
    write_measure_csv(c.output, q);
  }
  return 0;
}

template <class T>
void take(const Json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

void apply_config_json(const Json& j, RunConfig& c) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  try {
    take(j, "input", c.input);
    if (j.contains("family")) {
      if (j.at("family").is_object()) {
        c.family_doc = j.at("family");
      } else {
        c.family = j.at("family").get<std::string>();
      }
    }
    take(j, "output", c.output);
    take(j, "trace", c.trace);
    take(j, "eps0", c.eps0);
    take(j, "decay", c.decay);
    take(j, "stages", c.stages);
    take(j, "schedule", c.schedule);
    take(j, "value_tol", c.value_tol);
    take(j, "grad_tol", c.grad_tol);
    take(j, "binding_tol", c.binding_tol);
    take(j, "max_iter", c.max_iter);
    take(j, "beta_cap", c.beta_cap);
    take(j, "resolution", c.resolution);
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    take(j, "seed", c.seed);
    take(j, "delta", c.delta);
    take(j, "epsilon", c.epsilon);
    take(j, "density", c.density);
    take(j, "oracle", c.oracle);
    take(j, "oracle_max_cycles", c.oracle_max_cycles);
    take(j, "tolerance", c.tolerance);
    take(j, "max_atoms", c.max_atoms);
    take(j, "max_constraints", c.max_constraints);
    take(j, "kind", c.kind);
    take(j, "atoms", c.atoms);
    take(j, "anchor_share", c.anchor_share);
  } catch (const Json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::string config_path;
  CLI::App app{"I-projections onto moment inequality constraint sets", "iproject"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "iproject 0.1.0");

  auto common = [&](CLI::App* s, bool solver) {
    s->add_option("-i,--input", c.input, "atoms CSV (w,x1,...,xd)");
    s->add_option("-f,--family", c.family, "family JSON");
    s->add_option("-o,--output", c.output, "output path (default stdout)");
    s->add_option("--config", config_path, "JSON config; its keys override flags");
    s->add_option("--resolution", c.resolution, "uniform steps of the gamma grid");
    s->add_option("--binding-tol", c.binding_tol);
    s->add_option("--threads", c.threads, "worker threads (fallback IPROJECT_THREADS, default 1)");
    if (solver) {
      s->add_option("--eps0", c.eps0);
      s->add_option("--decay", c.decay);
      s->add_option("--stages", c.stages);
      s->add_option("--schedule", c.schedule, "explicit decreasing epsilon schedule");
      s->add_option("--value-tol", c.value_tol);
      s->add_option("--grad-tol", c.grad_tol);
      s->add_option("--max-iter", c.max_iter);
      s->add_option("--beta-cap", c.beta_cap);
    }
  };
  auto* project_cmd = app.add_subcommand("project", "run the epsilon schedule");
  common(project_cmd, true);
  project_cmd->add_option("--trace", c.trace, "stage trace CSV");
  project_cmd->add_option("--delta", c.delta, "tail exponent for the assumption report");
  auto* partition_cmd = app.add_subcommand("partition", "build one partition");
  common(partition_cmd, false);
  partition_cmd->add_option("-e,--epsilon", c.epsilon);
  auto* verify_cmd = app.add_subcommand("verify", "check a density against the grid constraints");
  common(verify_cmd, false);
  verify_cmd->add_option("-d,--density", c.density, "result JSON with a density array");
  auto* oracle_cmd = app.add_subcommand("oracle", "run an oracle next to the scheme");
  common(oracle_cmd, true);
  oracle_cmd->add_option("--oracle", c.oracle, "bregman_dykstra or pava");
  oracle_cmd->add_option("--oracle-max-cycles", c.oracle_max_cycles);
  auto* compare_cmd = app.add_subcommand("compare", "scheme against the primal oracle");
  common(compare_cmd, true);
  compare_cmd->add_option("--tolerance", c.tolerance, "allowed KL gap");
  compare_cmd->add_option("--max-atoms", c.max_atoms);
  compare_cmd->add_option("--max-constraints", c.max_constraints);
  compare_cmd->add_option("--oracle-max-cycles", c.oracle_max_cycles);
  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic instance CSV");
  gen_cmd->add_option("-o,--output", c.output);
  gen_cmd->add_option("--config", config_path);
  gen_cmd->add_option("--seed", c.seed);
  gen_cmd->add_option("--kind", c.kind, "fsd, conditional_fsd or line");
  gen_cmd->add_option("--atoms", c.atoms);
  gen_cmd->add_option("--anchor-share", c.anchor_share);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  try {
    if (!config_path.empty()) apply_config_json(read_json_file(config_path), c);
    if (*project_cmd) return cmd_project(c, out, err);
    if (*partition_cmd) return cmd_partition(c, out, err);
    if (*verify_cmd) return cmd_verify(c, out, err);
    if (*oracle_cmd) return cmd_oracle(c, out, err);
    if (*compare_cmd) return cmd_compare(c, out, err);
    return cmd_gen(c, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace iproj
