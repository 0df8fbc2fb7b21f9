#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thin_epi/epiperimetric.hpp"
#include "thin_epi/experiments.hpp"
#include "thin_epi/frequency.hpp"

namespace py = pybind11;
using namespace thin_epi;

namespace {

json to_json(const py::handle& obj) {
  py::module_ pyjson = py::module_::import("json");
  return json::parse(pyjson.attr("dumps")(obj).cast<std::string>());
}

py::object from_json(const json& j) {
  py::module_ pyjson = py::module_::import("json");
  return pyjson.attr("loads")(j.dump());
}

Vec3 to_vec3(const std::vector<double>& x) {
  if (x.empty() || x.size() > 3) throw py::value_error("points need 1 to 3 coordinates");
  Vec3 v{0, 0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i];
  return v;
}

py::dict epi_row(const EpiReport& r) {
  py::dict d;
  d["negative_case"] = r.negative_case;
  d["mu"] = r.mu;
  d["w_z"] = r.w_z;
  d["w_zeta"] = r.w_zeta;
  d["bound"] = r.bound;
  d["slack"] = r.slack;
  d["kappa"] = r.kappa;
  d["alpha"] = r.alpha;
  d["delta"] = r.delta;
  d["distance_to_p"] = r.distance_to_p;
  d["admissible"] = r.zeta.ok();
  return d;
}

py::list epi_trials(int m, int n, int trials, unsigned long long seed, bool negative, int resolution) {
  if (resolution <= 0) resolution = n == 1 ? 720 : 64;
  EpiConfig cfg;
  EpiContext ctx = choose_delta(catalog_profile(m, n), build_grid(n, resolution), cfg);
  std::mt19937_64 rng(seed);
  py::list out;
  for (int t = 0; t < trials; ++t) {
    if (negative)
      out.append(epi_row(build_competitor_negative(random_negative_trace(ctx, cfg, rng), ctx, cfg).report));
    else
      out.append(epi_row(verify_epi(random_positive_trace(ctx, cfg, rng), ctx, cfg)));
  }
  return out;
}

py::dict gap(int m, int n, const std::vector<double>& ts) {
  GapReport g = gap_demo(m, n, ts);
  py::dict d;
  d["C"] = g.C;
  d["kappa"] = g.kappa;
  d["all_contradict"] = g.all_contradict;
  d["a1_in_window"] = g.a1_in_window;
  py::list rows;
  for (const auto& r : g.rows) {
    py::dict row;
    row["t"] = r.t;
    row["branch"] = r.branch;
    row["lhs"] = r.lhs;
    row["contradiction"] = r.contradiction;
    rows.append(row);
  }
  d["rows"] = rows;
  return d;
}

// Owns the problem and its solution so that point evaluations stay valid.
struct PySolution {
  ProblemSpec spec;
  GridSolution sol;
};

std::shared_ptr<PySolution> solve(const py::dict& problem) {
  auto s = std::make_shared<PySolution>();
  s->spec = problem_from_json(to_json(problem));
  {
    py::gil_scoped_release release;
    s->sol = solve_thin_obstacle(s->spec);
  }
  return s;
}

py::dict frequency(const PySolution& s, const std::vector<double>& x0, double r_max, double r_min, double mu) {
  Vec3 c = to_vec3(x0);
  FrequencyParams P;
  P.k = s.spec.k;
  P.gamma = s.spec.gamma;
  P.mu = mu;
  FieldSource f = s.spec.obstacle_polynomial ? field_from(reduce_to_zero_obstacle(s.sol, s.spec, c), s.sol)
                                             : field_from(s.sol);
  if (r_min <= 0) r_min = 6.0 * s.sol.h;
  FrequencyProfile prof = truncated_frequency(f, c, P, radii_ladder(r_max, r_min));
  py::dict d;
  d["r"] = prof.radii;
  d["Phi"] = prof.Phi;
  d["H"] = prof.H;
  d["max_violation"] = prof.max_violation;
  auto plateau = frequency_plateau(prof);
  d["plateau"] = plateau ? py::cast(*plateau) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_thin_epi, m) {
  m.doc() = "Epiperimetric and frequency diagnostics for the thin obstacle problem";

  py::register_exception<Error>(m, "ThinEpiError", PyExc_RuntimeError);

  m.def("lambda_of", &lambda_of, py::arg("alpha"), py::arg("n"));
  m.def("kappa_of", &kappa_of, py::arg("alpha"), py::arg("mu"), py::arg("n"));
  m.def("mode_count_ell", &mode_count_ell, py::arg("n"), py::arg("m"));

  py::class_<BlowupProfile>(m, "BlowupProfile")
      .def_readonly("m", &BlowupProfile::m)
      .def_readonly("n", &BlowupProfile::n)
      .def_readonly("scale", &BlowupProfile::scale)
      .def("degree", &BlowupProfile::degree)
      .def("__call__", [](const BlowupProfile& p, const std::vector<double>& x) { return p(to_vec3(x)); })
      .def("to_json", [](const BlowupProfile& p) { return profile_to_json(p); })
      .def("is_admissible", [](const BlowupProfile& p) { return verify_admissible(p).ok(); });
  m.def("catalog_profile", &catalog_profile, py::arg("m"), py::arg("n"));

  m.def(
      "weiss_spectral",
      [](const std::vector<double>& c, int n, double mu, double alpha) {
        int maxdeg = 0, count = 0;
        while (count < static_cast<int>(c.size())) count += half_sphere_multiplicity(n, ++maxdeg);
        BasisPtr b = half_sphere_basis(n, maxdeg);
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        return alpha > 0 ? weiss_raised(v, *b, mu, alpha).value : weiss_spectral(v, *b, mu);
      },
      py::arg("coefficients"), py::arg("n"), py::arg("mu"), py::arg("alpha") = 0.0,
      "W_mu of the alpha-homogeneous extension (alpha = mu when omitted) of sum c_j phi_j in the exact half-sphere basis");

  m.def("epi_check", &epi_trials, py::arg("m"), py::arg("n"), py::arg("trials"), py::arg("seed") = 7,
        py::arg("negative") = false, py::arg("resolution") = 0);
  m.def("gap_demo", &gap, py::arg("m"), py::arg("n"), py::arg("t"));
  m.def("a1_members", &a1_members, py::arg("upper"));

  py::class_<PySolution, std::shared_ptr<PySolution>>(m, "Solution")
      .def_property_readonly("sweeps", [](const PySolution& s) { return s.sol.sweeps; })
      .def_property_readonly("converged", [](const PySolution& s) { return s.sol.converged; })
      .def_property_readonly("complementarity_residual", [](const PySolution& s) { return s.sol.complementarity_residual; })
      .def_property_readonly("h", [](const PySolution& s) { return s.sol.h; })
      .def("value", [](const PySolution& s, const std::vector<double>& x) { return s.sol.value(to_vec3(x)); })
      .def("contact_points",
           [](const PySolution& s) {
             std::vector<std::vector<double>> pts;
             for (const Vec3& x : contact_set(s.sol, 0).contact) pts.push_back({x[0], x[1], x[2]});
             return pts;
           })
      .def("frequency", &frequency, py::arg("x0"), py::arg("r_max") = 0.5, py::arg("r_min") = 0.0, py::arg("mu") = 0.0);
  m.def("solve", &solve, py::arg("problem"), "Solve a thin obstacle problem given as a dict (same schema as the CLI)");

  m.def(
      "run",
      [](const py::dict& config) {
        RunManifest man = run(parse_config(to_json(config)));
        return from_json(man.to_json());
      },
      py::arg("config"), "Run a pipeline and return its manifest");
}
