#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iproj/cli.hpp"
#include "iproj/driver.hpp"
#include "iproj/error.hpp"
#include "iproj/generate.hpp"
#include "iproj/io.hpp"
#include "iproj/oracle.hpp"

namespace py = pybind11;
using namespace iproj;

namespace {

DiscreteMeasure make_measure(const std::vector<std::vector<double>>& atoms,
                             const std::optional<std::vector<double>>& weights) {
  if (!weights) return DiscreteMeasure::uniform(atoms);
  return DiscreteMeasure::normalized(atoms, *weights);
}

std::vector<std::vector<double>> atoms_of(const DiscreteMeasure& q) {
  std::vector<std::vector<double>> out;
  for (std::size_t j = 0; j < q.size(); ++j) out.emplace_back(q.atom(j).begin(), q.atom(j).end());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "I-projections of discrete distributions onto moment inequality sets";
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::class_<DiscreteMeasure>(m, "DiscreteMeasure")
      .def(py::init(&make_measure), py::arg("atoms"), py::arg("weights") = py::none())
      .def_static("from_csv", [](const std::string& path) { return read_measure_csv(path).measure; })
      .def("to_csv", [](const DiscreteMeasure& q, const std::string& path) { write_measure_csv(path, q); })
      .def_property_readonly("size", &DiscreteMeasure::size)
      .def_property_readonly("dim", &DiscreteMeasure::dim)
      .def_property_readonly("atoms", &atoms_of)
      .def_property_readonly("weights", [](const DiscreteMeasure& q) {
        return std::vector<double>(q.weights().begin(), q.weights().end());
      })
      .def("__len__", &DiscreteMeasure::size);

  py::class_<Cdf>(m, "Cdf")
      .def(py::init([](std::vector<std::pair<double, double>> knots, const std::string& interp) {
             if (interp != "step" && interp != "linear") {
               throw InputError("interpolation must be 'step' or 'linear'");
             }
             return Cdf(std::move(knots),
                        interp == "linear" ? Cdf::Interpolation::Linear : Cdf::Interpolation::Step);
           }),
           py::arg("knots"), py::arg("interpolation") = "step")
      .def_static("uniform01", &Cdf::uniform01)
      .def("__call__", &Cdf::operator())
      .def_property_readonly("knots", &Cdf::knots);

  py::class_<MomentIndex>(m, "MomentIndex")
      .def_readonly("gamma", &MomentIndex::gamma)
      .def_readonly("member", &MomentIndex::member)
      .def_readonly("tail", &MomentIndex::tail)
      .def_property_readonly("cube", [](const MomentIndex& i) -> py::object {
        if (!i.cube) return py::none();
        return py::make_tuple(i.cube->a, i.cube->r);
      });

  py::class_<MomentFamily>(m, "MomentFamily")
      .def_static("unconditional_fsd", &MomentFamily::unconditional_fsd, py::arg("gamma_min"),
                  py::arg("gamma_max"))
      .def_static("conditional_fsd", &MomentFamily::conditional_fsd, py::arg("gamma_min"),
                  py::arg("gamma_max"), py::arg("dz"), py::arg("r0") = 1, py::arg("r_max") = 1)
      .def_static("marginal_given_g", &MomentFamily::marginal_given_g, py::arg("g"),
                  py::arg("gamma_max"))
      .def_static("custom", &MomentFamily::custom, py::arg("q"), py::arg("moment_functions"))
      .def_static("from_json",
                  [](const std::string& text, const DiscreteMeasure& q) {
                    return family_from_json(Json::parse(text), q);
                  })
      .def("with_tail",
           [](const MomentFamily& f, double k, double delta) { return f.with_tail({k, delta}); },
           py::arg("K"), py::arg("delta") = 1.0)
      .def_property_readonly("kind", [](const MomentFamily& f) { return to_string(f.kind()); })
      .def("values", &MomentFamily::values)
      .def("grid", [](const MomentFamily& f, const DiscreteMeasure& q, std::size_t resolution) {
        return index_grid(f, q, resolution);
      }, py::arg("q"), py::arg("resolution") = 16);

  py::class_<Cell>(m, "Cell")
      .def_readonly("members", &Cell::members)
      .def_readonly("representative", &Cell::representative)
      .def_readonly("diameter", &Cell::diameter)
      .def_readonly("bound", &Cell::bound)
      .def_readonly("representative_mean", &Cell::representative_mean)
      .def_readonly("empty_selection", &Cell::empty_selection);

  py::class_<Partition>(m, "Partition")
      .def_readonly("grid", &Partition::grid)
      .def_readonly("cells", &Partition::cells)
      .def_readonly("epsilon", &Partition::epsilon)
      .def_readonly("cut_points", &Partition::cut_points)
      .def_readonly("r0", &Partition::r0)
      .def_readonly("n1", &Partition::n1)
      .def_readonly("n2", &Partition::n2)
      .def_readonly("accuracy_flag", &Partition::accuracy_flag)
      .def_property_readonly("achieved_epsilon", &Partition::achieved_epsilon)
      .def_property_readonly("certified", &Partition::certified)
      .def("__len__", &Partition::size);

  m.def("build_partition",
        [](const DiscreteMeasure& q, const MomentFamily& f, double eps, std::size_t resolution,
           unsigned threads) { return build_partition(q, f, eps, {resolution, threads}); },
        py::arg("q"), py::arg("family"), py::arg("epsilon"), py::arg("resolution") = 16,
        py::arg("threads") = 1);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("grad_tol", &SolverConfig::grad_tol)
      .def_readwrite("max_iter", &SolverConfig::max_iter)
      .def_readwrite("beta_cap", &SolverConfig::beta_cap)
      .def_readwrite("record_trace", &SolverConfig::record_trace);

  py::class_<DualSolution>(m, "DualSolution")
      .def_readonly("beta", &DualSolution::beta)
      .def_readonly("alpha", &DualSolution::alpha)
      .def_readonly("mu", &DualSolution::mu)
      .def_readonly("y", &DualSolution::y)
      .def_readonly("value", &DualSolution::value)
      .def_readonly("projected_gradient", &DualSolution::projected_gradient)
      .def_readonly("iterations", &DualSolution::iterations)
      .def_readonly("converged", &DualSolution::converged)
      .def_readonly("diverged", &DualSolution::diverged)
      .def_readonly("diagnostic", &DualSolution::diagnostic)
      .def_readonly("trace", &DualSolution::trace);

  m.def("solve_finite_program",
        [](const DiscreteMeasure& q, const Reps& reps, const SolverConfig& config) {
          return solve_finite_program(q, reps, config);
        },
        py::arg("q"), py::arg("reps"), py::arg("config") = SolverConfig{});
  m.def("density_from_dual", [](const DiscreteMeasure& q, const std::vector<double>& y) {
    const auto p = density_from_dual(q, y);
    return std::vector<double>(p.values().begin(), p.values().end());
  });
  m.def("kl_divergence", [](const std::vector<double>& p, const DiscreteMeasure& q) {
    return kl_divergence(DensityVector(p, q), q);
  });

  py::class_<StageRecord>(m, "StageRecord")
      .def_readonly("epsilon", &StageRecord::epsilon)
      .def_readonly("cells", &StageRecord::cells)
      .def_readonly("representatives", &StageRecord::representatives)
      .def_readonly("value", &StageRecord::value)
      .def_readonly("iterations", &StageRecord::iterations)
      .def_readonly("converged", &StageRecord::converged)
      .def_readonly("diverged", &StageRecord::diverged)
      .def_readonly("duality_gap", &StageRecord::duality_gap)
      .def_readonly("diagnostic", &StageRecord::diagnostic);

  py::class_<ConstraintCheck>(m, "ConstraintCheck")
      .def_readonly("max_slack", &ConstraintCheck::max_slack)
      .def_readonly("argmax", &ConstraintCheck::argmax)
      .def_readonly("binding", &ConstraintCheck::binding)
      .def_readonly("slacks", &ConstraintCheck::slacks);

  py::class_<ProjectionResult>(m, "ProjectionResult")
      .def_readonly("density", &ProjectionResult::density)
      .def_readonly("kl", &ProjectionResult::kl)
      .def_readonly("value", &ProjectionResult::value)
      .def_readonly("stages", &ProjectionResult::stages)
      .def_readonly("stabilized", &ProjectionResult::stabilized)
      .def_readonly("converged", &ProjectionResult::converged)
      .def_readonly("diagnostic", &ProjectionResult::diagnostic)
      .def_readonly("grid", &ProjectionResult::grid)
      .def_readonly("check", &ProjectionResult::check)
      .def_readonly("solution", &ProjectionResult::solution)
      .def_property_readonly("binding_set", [](const ProjectionResult& r) { return r.check.binding; })
      .def_property_readonly("max_slack", [](const ProjectionResult& r) { return r.check.max_slack; });

  m.def("default_schedule", &default_schedule, py::arg("eps0") = 0.5, py::arg("decay") = 0.5,
        py::arg("stages") = 12);
  m.def("project",
        [](const DiscreteMeasure& q, const MomentFamily& f, std::vector<double> schedule,
           double value_tol, double binding_tol, const SolverConfig& solver, std::size_t resolution,
           unsigned threads) {
          ProjectOptions o;
          o.schedule = std::move(schedule);
          o.value_tol = value_tol;
          o.binding_tol = binding_tol;
          o.solver = solver;
          o.partition = {resolution, threads};
          py::gil_scoped_release release;
          return project(q, f, o);
        },
        py::arg("q"), py::arg("family"), py::arg("schedule") = std::vector<double>{},
        py::arg("value_tol") = 1e-10, py::arg("binding_tol") = 1e-6,
        py::arg("solver") = SolverConfig{}, py::arg("resolution") = 16, py::arg("threads") = 1);

  py::class_<AssumptionReport>(m, "AssumptionReport")
      .def_readonly("laplace_ok", &AssumptionReport::laplace_ok)
      .def_readonly("laplace_value", &AssumptionReport::laplace_value)
      .def_readonly("tail_sup", &AssumptionReport::tail_sup)
      .def_readonly("strict_mass", &AssumptionReport::strict_mass)
      .def_readonly("precompact_cells", &AssumptionReport::precompact_cells);
  m.def("check_assumptions",
        [](const DiscreteMeasure& q, const MomentFamily& f, std::size_t resolution, double delta) {
          return check_assumptions(q, f, index_grid(f, q, resolution), delta);
        },
        py::arg("q"), py::arg("family"), py::arg("resolution") = 16, py::arg("delta") = 1.0);
  m.def("verify_constraints",
        [](const std::vector<double>& p, const MomentFamily& f, const DiscreteMeasure& q,
           std::size_t resolution, double binding_tol) {
          return verify_constraints(p, f, q, index_grid(f, q, resolution), binding_tol);
        },
        py::arg("density"), py::arg("family"), py::arg("q"), py::arg("resolution") = 16,
        py::arg("binding_tol") = 1e-6);

  py::class_<CoercivityCheck>(m, "CoercivityCheck")
      .def_readonly("lhs", &CoercivityCheck::lhs)
      .def_readonly("rhs", &CoercivityCheck::rhs)
      .def_readonly("beta", &CoercivityCheck::beta)
      .def_readonly("k", &CoercivityCheck::k)
      .def_property_readonly("holds", &CoercivityCheck::holds);
  m.def("coercivity_bound_check", &coercivity_bound_check, py::arg("q"), py::arg("y_prime"),
        py::arg("alpha"));

  py::class_<OracleResult>(m, "OracleResult")
      .def_readonly("density", &OracleResult::density)
      .def_readonly("kl", &OracleResult::kl)
      .def_readonly("cycles", &OracleResult::cycles)
      .def_readonly("converged", &OracleResult::converged)
      .def_readonly("diagnostic", &OracleResult::diagnostic);
  m.def("bregman_dykstra",
        [](const DiscreteMeasure& q, const std::vector<std::vector<double>>& v, double tol,
           int max_cycles) {
          std::vector<HalfspaceConstraint> cons;
          for (const auto& x : v) cons.push_back({x});
          return bregman_dykstra(q, cons, tol, max_cycles);
        },
        py::arg("q"), py::arg("constraints"), py::arg("tol") = 1e-13,
        py::arg("max_cycles") = 200000);
  m.def("grid_constraints",
        [](const MomentFamily& f, const DiscreteMeasure& q, std::size_t resolution) {
          std::vector<std::vector<double>> out;
          for (auto& c : constraints_from_grid(f, q, index_grid(f, q, resolution))) {
            out.push_back(std::move(c.v));
          }
          return out;
        },
        py::arg("family"), py::arg("q"), py::arg("resolution") = 16);
  m.def("pava", &pava, py::arg("values"), py::arg("weights"));

  py::class_<PavaProjection>(m, "PavaProjection")
      .def_readonly("y0", &PavaProjection::y0)
      .def_readonly("ratio", &PavaProjection::ratio)
      .def_readonly("fitted", &PavaProjection::fitted);
  m.def("pava_closed_form", &pava_closed_form, py::arg("q"), py::arg("g"));

  m.def("generate_instance",
        [](const std::string& kind, std::size_t atoms, std::uint64_t seed, double anchor_share) {
          return generate_instance({instance_kind_from_string(kind), atoms, seed, anchor_share});
        },
        py::arg("kind") = "fsd", py::arg("atoms") = 40, py::arg("seed") = 1,
        py::arg("anchor_share") = 0.1);

  m.def("result_json",
        [](const ProjectionResult& r, const MomentFamily& f) { return dump_json(to_json(r, f)); });
}
