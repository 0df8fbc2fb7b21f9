#include "thin_epi/experiments.hpp"

#include <Eigen/Core>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "thin_epi/epiperimetric.hpp"
#include "thin_epi/frequency.hpp"
#include "thin_epi/output.hpp"
#include "thin_epi/spectral_convergence.hpp"

#ifndef THIN_EPI_VERSION
#define THIN_EPI_VERSION "0.0.0"
#endif

namespace thin_epi {

namespace fs = std::filesystem;

bool RunManifest::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

json RunManifest::to_json() const {
  json j;
  j["config"] = config;
  j["versions"] = versions;
  j["summary"] = summary;
  j["files"] = json::array();
  for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}});
  j["timings"] = json::object();
  for (const auto& [k, v] : timings) j["timings"][k] = v;
  j["checks"] = json::array();
  for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["passed"] = all_passed();
  return j;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"spectral", "epi-check", "solve",   "frequency",
                                              "blowup",   "stratify",  "gap-demo"};
  return names;
}

std::vector<std::string> required_keys(const std::string& subcommand) {
  if (subcommand == "spectral") return {"m", "n"};
  if (subcommand == "epi-check") return {"m", "n", "trials", "seed"};
  if (subcommand == "solve" || subcommand == "frequency" || subcommand == "stratify") return {"problem"};
  if (subcommand == "blowup") return {"problem", "m"};
  if (subcommand == "gap-demo") return {"m", "n"};
  return {};
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::InvalidArgument, "config must be a JSON object");
  std::vector<std::string> missing;
  for (const char* key : {"subcommand", "output_dir"})
    if (!doc.contains(key)) missing.push_back(key);
  if (doc.contains("subcommand")) {
    const std::string sub = doc["subcommand"].get<std::string>();
    if (std::find(subcommands().begin(), subcommands().end(), sub) == subcommands().end())
      fail(ErrorCode::InvalidArgument, "unknown subcommand '" + sub + "'");
    for (const auto& key : required_keys(sub))
      if (!doc.contains(key)) missing.push_back(key);
  }
  if (!missing.empty()) {
    std::string msg = "config is missing keys:";
    for (const auto& k : missing) msg += " " + k;
    fail(ErrorCode::InvalidArgument, msg);
  }
  RunConfig cfg;
  cfg.subcommand = doc["subcommand"].get<std::string>();
  cfg.output_dir = doc["output_dir"].get<std::string>();
  cfg.cache_dir = doc.value("cache_dir", std::string());
  for (const auto& [k, v] : doc.items())
    if (k != "subcommand" && k != "output_dir" && k != "cache_dir") cfg.params[k] = v;
  return cfg;
}

namespace {

Polynomial polynomial_from_json(const json& terms) {
  require(terms.is_array(), "polynomial terms must be an array of [c, e1, e2, e3]");
  Polynomial p;
  for (const auto& t : terms) {
    require(t.is_array() && t.size() >= 2 && t.size() <= 4, "polynomial term must be [c, e1, e2, e3]");
    Exponent e{0, 0, 0};
    for (std::size_t i = 1; i < t.size(); ++i) e[i - 1] = t[i].get<int>();
    p += Polynomial::monomial(e, t[0].get<double>());
  }
  return p;
}

std::vector<double> doubles(const json& params, const char* key, std::vector<double> fallback) {
  if (!params.contains(key)) return fallback;
  if (params[key].is_number()) return {params[key].get<double>()};
  return params[key].get<std::vector<double>>();
}

Vec3 point_from(const json& params, int n) {
  Vec3 x{0, 0, 0};
  if (!params.contains("x0")) return x;
  auto v = params["x0"].get<std::vector<double>>();
  require(static_cast<int>(v.size()) <= n, "x0 has more coordinates than the thin set");
  for (std::size_t i = 0; i < v.size(); ++i) x[i] = v[i];
  return x;
}

FrequencyParams frequency_params(const json& p) {
  FrequencyParams fp;
  fp.theta = p.value("theta", fp.theta);
  fp.C_phi = p.value("C_phi", fp.C_phi);
  fp.mu = p.value("mu", fp.mu);
  fp.reliable_cells = p.value("reliable_cells", fp.reliable_cells);
  fp.label_tolerance = p.value("label_tolerance", fp.label_tolerance);
  return fp;
}

struct Context {
  const RunConfig& cfg;
  RunManifest& manifest;

  void add_file(const std::string& name, const std::string& content) {
    fs::path path = cfg.output_dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot write " + path.string());
    f << content;
    f.close();
    manifest.files.push_back({name, sha256_file(path)});
  }
  void add_csv(const std::string& name, const CsvTable& t) { add_file(name, t.to_string()); }
  void add_plot(const std::string& csv_name, PlotKind kind) {
    fs::path svg = emit_plot(cfg.output_dir / csv_name, kind);
    manifest.files.push_back({svg.filename().string(), sha256_file(svg)});
  }
  void check(const std::string& name, bool passed, const std::string& detail) {
    manifest.checks.push_back({name, passed, detail});
  }
};

std::string fmt(double x) { return format_double(x); }

struct SolvedField {
  ProblemSpec spec;
  GridSolution sol;
  FieldSource field;
};

SolvedField solve_problem(const json& params, const Vec3& x0) {
  SolvedField s;
  s.spec = problem_from_json(params["problem"]);
  s.sol = solve_thin_obstacle(s.spec);
  if (s.spec.obstacle_polynomial) {
    Reduction red = reduce_to_zero_obstacle(s.sol, s.spec, x0);
    s.field = field_from(red, s.sol);
  } else {
    s.field = field_from(s.sol);
  }
  return s;
}

std::vector<double> ladder_for(const json& params, const FieldSource& f, const Vec3& x0, const FrequencyParams& fp) {
  const double eup = std::exp(std::log(2.0) / 8.0);
  double top = params.value("r_max", 0.5);
  top = std::min(top, (f.reach - norm(x0) - f.grid_h) / eup);
  const double bottom = params.value("r_min", fp.reliable_cells * f.grid_h);
  return radii_ladder(top, bottom, params.value("per_octave", 4));
}

void run_spectral(Context& ctx) {
  const json& p = ctx.cfg.params;
  const int m = p["m"], n = p["n"];
  BlowupProfile prof = catalog_profile(m, n);
  GridPtr grid = build_grid(n, p.value("resolution", n == 1 ? 720 : 64));
  EigenOptions eo;
  eo.cache_dir = ctx.cfg.cache_dir;
  const int count = p.value("count", mode_count_ell(n, m) + 2);
  auto rep = verify_spectral_convergence(grid, prof, doubles(p, "delta", {0.4, 0.2, 0.1, 0.05}), count, eo);
  CsvTable t;
  t.header = {"delta", "masked_nodes", "max_eigenvalue_error", "max_eigenfunction_error"};
  for (int j = 0; j < count; ++j) t.header.push_back("lambda_" + std::to_string(j + 1));
  for (const auto& row : rep.rows) {
    std::vector<double> v{row.delta, static_cast<double>(row.masked_nodes), row.max_eigenvalue_error,
                          row.max_eigenfunction_error};
    for (int j = 0; j < count; ++j) v.push_back(j < static_cast<int>(row.eigenvalues.size()) ? row.eigenvalues[j] : NAN);
    t.add_row(v);
  }
  ctx.add_csv("spectral.csv", t);
  ctx.manifest.summary["flags"] = rep.flags;
  ctx.check("eigenvalue_errors_monotone", rep.monotone, rep.monotone ? "errors shrink as delta decreases" : "errors grow");
}

void run_epi_check(Context& ctx) {
  const json& p = ctx.cfg.params;
  const int m = p["m"], n = p["n"], trials = p["trials"];
  const std::uint64_t seed = p["seed"].get<std::uint64_t>();
  require(trials > 0, "epi-check: trials must be positive");
  EpiConfig ec;
  ec.eps = p.value("eps", ec.eps);
  ec.eta = p.value("eta", ec.eta);
  if (p.contains("delta")) ec.delta_ladder = doubles(p, "delta", {});
  if (p.value("basis", std::string("auto")) == "discrete") ec.basis_mode = BasisMode::Discrete;
  ec.eigen.cache_dir = ctx.cfg.cache_dir;
  const bool negative = p.value("negative", false);
  BlowupProfile prof = catalog_profile(m, n);
  GridPtr grid = build_grid(n, p.value("resolution", n == 1 ? 720 : 64));
  EpiContext ectx = choose_delta(prof, grid, ec);
  std::mt19937_64 rng(seed);

  CsvTable t;
  t.header = {"trial", "negative", "mu", "w_z", "w_zeta", "bound", "slack", "kappa", "alpha", "delta",
              "distance_to_p", "condition", "discrepancy", "admissible"};
  double min_slack = std::numeric_limits<double>::infinity();
  bool admissible = true, alpha_ok = true;
  for (int i = 0; i < trials; ++i) {
    EpiReport r;
    if (negative) {
      SphericalTrace c = random_negative_trace(ectx, ec, rng);
      r = build_competitor_negative(c, ectx, ec).report;
      alpha_ok = alpha_ok && r.alpha > 2.0 * m && r.alpha < 2.0 * m + 1.0;
    } else {
      SphericalTrace c = random_positive_trace(ectx, ec, rng);
      r = verify_epi(c, ectx, ec);
    }
    min_slack = std::min(min_slack, r.slack);
    admissible = admissible && r.zeta.ok();
    t.add_row({static_cast<double>(i), negative ? 1.0 : 0.0, r.mu, r.w_z, r.w_zeta, r.bound, r.slack, r.kappa, r.alpha,
               r.delta, r.distance_to_p, r.condition, r.discrepancy, r.zeta.ok() ? 1.0 : 0.0});
  }
  ctx.add_csv("epi_reports.csv", t);
  ctx.add_plot("epi_reports.csv", PlotKind::Slack);
  ctx.manifest.summary["delta"] = ectx.delta;
  ctx.manifest.summary["ell"] = ectx.ell;
  ctx.manifest.summary["min_slack"] = min_slack;
  ctx.manifest.summary["delta_log"] = ectx.log;
  ctx.check("slack_nonnegative", min_slack >= -1e-8, "min slack " + fmt(min_slack));
  ctx.check("competitors_admissible", admissible, admissible ? "all trials" : "some competitor failed");
  if (negative) ctx.check("alpha_in_range", alpha_ok, "alpha in (2m, 2m+1)");
}

void write_solution(Context& ctx, const GridSolution& sol) {
  CsvTable t;
  t.header = sol.n == 1 ? std::vector<std::string>{"x1", "u", "obstacle", "contact"}
                        : std::vector<std::string>{"x1", "x2", "u", "obstacle", "contact"};
  for (std::size_t i = 0; i < sol.thin_nodes.size(); ++i) {
    const int idx = sol.thin_nodes[i];
    Vec3 x = sol.position(idx);
    std::vector<double> row;
    for (int a = 0; a < sol.n; ++a) row.push_back(x[a]);
    row.push_back(sol.u[idx]);
    row.push_back(sol.obstacle[idx]);
    row.push_back(sol.contact[i] ? 1.0 : 0.0);
    t.add_row(row);
  }
  ctx.add_csv("solution.csv", t);
  ctx.manifest.summary["sweeps"] = sol.sweeps;
  ctx.manifest.summary["laplace_residual"] = sol.laplace_residual;
  ctx.manifest.summary["complementarity_residual"] = sol.complementarity_residual;
  ctx.manifest.summary["min_gap"] = sol.min_gap;
  ctx.check("solver_converged", sol.converged, std::to_string(sol.sweeps) + " sweeps");
  ctx.check("complementarity", sol.complementarity_residual <= 1e-9,
            "residual " + fmt(sol.complementarity_residual));
}

void run_solve(Context& ctx) {
  ProblemSpec spec = problem_from_json(ctx.cfg.params["problem"]);
  auto t0 = std::chrono::steady_clock::now();
  GridSolution sol = solve_thin_obstacle(spec);
  ctx.manifest.timings.emplace_back("solve", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  write_solution(ctx, sol);
}

void run_frequency(Context& ctx) {
  const json& p = ctx.cfg.params;
  const int n = p["problem"].value("n", 1);
  const Vec3 x0 = point_from(p, n);
  SolvedField s = solve_problem(p, x0);
  FrequencyParams fp = frequency_params(p);
  fp.k = s.spec.k;
  fp.gamma = s.spec.gamma;
  auto radii = ladder_for(p, s.field, x0, fp);
  FrequencyProfile prof = truncated_frequency(s.field, x0, fp, radii);
  CsvTable t;
  t.header = {"r", "H", "I", "Phi", "Phi_moments", "truncated", "reliable", "W", "W_tilde"};
  for (std::size_t i = 0; i < radii.size(); ++i)
    t.add_row({radii[i], prof.H[i], prof.I[i], prof.Phi[i], prof.Phi_moments[i], double(prof.truncated[i]),
               double(prof.reliable[i]), fp.mu > 0 ? prof.W[i] : NAN, fp.mu > 0 ? prof.W_tilde[i] : NAN});
  ctx.add_csv("frequency.csv", t);
  ctx.add_plot("frequency.csv", PlotKind::Frequency);
  auto plateau = frequency_plateau(prof);
  ctx.manifest.summary["plateau"] = plateau ? json(*plateau) : json(nullptr);
  ctx.manifest.summary["max_violation"] = prof.max_violation;
  ctx.manifest.summary["violations"] = prof.violations;
  const double tol = p.value("violation_tolerance", 1e-2);
  ctx.check("frequency_monotone", prof.max_violation <= tol, "max violation " + fmt(prof.max_violation));
}

void run_blowup(Context& ctx) {
  const json& p = ctx.cfg.params;
  const int n = p["problem"].value("n", 1);
  const Vec3 x0 = point_from(p, n);
  SolvedField s = solve_problem(p, x0);
  BlowupOptions bo;
  bo.frequency = frequency_params(p);
  bo.frequency.k = s.spec.k;
  bo.frequency.gamma = s.spec.gamma;
  bo.check_label = p.value("check_label", true);
  auto radii = ladder_for(p, s.field, x0, bo.frequency);
  BlowupFit fit = blowup_fit(s.field, x0, p["m"], radii, bo);
  CsvTable t;
  t.header = {"r", "l2_distance", "linf_distance", "fit"};
  for (std::size_t i = 0; i < fit.radii.size(); ++i)
    t.add_row({fit.radii[i], fit.l2_distance[i], fit.linf_distance[i],
               fit.degenerate ? NAN : fit.constant * std::pow(fit.radii[i], fit.exponent)});
  ctx.add_csv("blowup.csv", t);
  if (!fit.degenerate) ctx.add_plot("blowup.csv", PlotKind::Blowup);
  ctx.manifest.summary["exponent"] = fit.degenerate ? json(nullptr) : json(fit.exponent);
  ctx.manifest.summary["exponent_stderr"] = fit.exponent_stderr;
  ctx.manifest.summary["fitted"] = fit.fitted.to_string();
  ctx.manifest.summary["in_catalog"] = fit.in_catalog;
  ctx.manifest.summary["degenerate"] = fit.degenerate;
  ctx.check("positive_exponent", fit.degenerate || fit.exponent > 0,
            fit.degenerate ? "v_r equals p on every radius" : "exponent " + fmt(fit.exponent));
}

void run_stratify(Context& ctx) {
  const json& p = ctx.cfg.params;
  ProblemSpec spec = problem_from_json(p["problem"]);
  GridSolution sol = solve_thin_obstacle(spec);
  FrequencyParams fp = frequency_params(p);
  fp.k = spec.k;
  fp.gamma = spec.gamma;
  auto cands = doubles(p, "candidates", {1.0, 1.5, 2.0, 3.0, 3.5, 4.0, 5.0});
  Stratification st = stratify_contact(sol, spec, cands, fp, p.value("stride", 1), p.value("r_max", 0.5));
  CsvTable t;
  t.header = {"x1", "x2", "plateau", "label"};
  for (std::size_t i = 0; i < st.nodes.size(); ++i)
    t.add_row({fmt(st.nodes[i][0]), fmt(spec.n == 2 ? st.nodes[i][1] : 0.0), fmt(st.plateau[i]), st.label[i]});
  ctx.add_csv("strata.csv", t);
  json fits = json::array();
  for (const auto& f : st.line_fits)
    fits.push_back({{"mu", f.mu}, {"count", f.count}, {"point", f.point}, {"direction", f.direction},
                    {"rms_residual", f.rms_residual}});
  ctx.manifest.summary["line_fits"] = fits;
  ctx.manifest.summary["contact_nodes"] = st.nodes.size();
}

void run_gap_demo(Context& ctx) {
  const json& p = ctx.cfg.params;
  std::vector<double> ts;
  if (p.contains("t")) {
    ts = doubles(p, "t", {});
  } else {
    for (int i = 1; i <= 10; ++i) {
      ts.push_back(-0.01 * i);
      ts.push_back(0.01 * i);
    }
  }
  GapReport g = gap_demo(p["m"], p["n"], ts, p.value("below", 0.1), p.value("above", 0.4));
  CsvTable t;
  t.header = {"t", "branch", "lhs", "required", "first_order", "contradiction"};
  for (const auto& r : g.rows)
    t.add_row({fmt(r.t), r.branch, fmt(r.lhs), fmt(r.required), fmt(r.first_order), r.contradiction ? "1" : "0"});
  ctx.add_csv("gap.csv", t);
  ctx.manifest.summary["C"] = g.C;
  ctx.manifest.summary["kappa"] = g.kappa;
  ctx.check("all_contradict", g.all_contradict, std::to_string(g.rows.size()) + " values of t");
  if (g.n == 1) {
    ctx.manifest.summary["a1_in_window"] = g.a1_in_window;
    ctx.check("a1_window_empty", g.a1_in_window.empty(),
              "nearest members " + (g.a1_nearest_below < 0 ? std::string("none") : fmt(g.a1_nearest_below)) + " and " +
                  fmt(g.a1_nearest_above));
  }
}

}  // namespace

ProblemSpec problem_from_json(const json& problem) {
  require(problem.is_object(), "problem must be a JSON object");
  std::vector<std::string> missing;
  for (const char* key : {"n", "boundary"})
    if (!problem.contains(key)) missing.push_back(key);
  if (!missing.empty()) {
    std::string msg = "problem is missing keys:";
    for (const auto& k : missing) msg += " " + k;
    fail(ErrorCode::InvalidArgument, msg);
  }
  ProblemSpec spec;
  spec.n = problem["n"];
  spec.N = problem.value("N", spec.N);
  spec.k = problem.value("k", spec.k);
  spec.gamma = problem.value("gamma", spec.gamma);
  spec.tol = problem.value("tol", spec.tol);
  spec.omega = problem.value("omega", spec.omega);
  spec.max_sweeps = problem.value("max_sweeps", spec.max_sweeps);
  if (problem.contains("obstacle")) spec.obstacle_polynomial = polynomial_from_json(problem["obstacle"]);

  std::vector<std::pair<double, SphereFn>> terms;
  for (const auto& term : problem["boundary"]) {
    const std::string kind = term.at("kind");
    const double c = term.value("coef", 1.0);
    if (kind == "halfspace") {
      require(spec.n == 1, "halfspace boundary data needs n = 1");
      terms.emplace_back(c, halfspace_2d(term.at("mu")).trace());
    } else if (kind == "profile") {
      terms.emplace_back(c, catalog_profile(term.at("m"), spec.n).trace());
    } else if (kind == "polynomial") {
      terms.emplace_back(c, polynomial_trace(polynomial_from_json(term.at("terms")), spec.n));
    } else if (kind == "obstacle_extension") {
      require(spec.obstacle_polynomial.has_value(), "obstacle_extension needs an obstacle");
      terms.emplace_back(c, polynomial_trace(harmonic_extension(*spec.obstacle_polynomial, spec.n), spec.n));
    } else {
      fail(ErrorCode::InvalidArgument, "unknown boundary term kind '" + kind + "'");
    }
  }
  require(!terms.empty(), "problem boundary has no terms");
  spec.boundary = combine(std::move(terms));
  validate(spec);
  return spec;
}

RunManifest run(const RunConfig& config) {
  RunManifest manifest;
  manifest.config = config.params;
  manifest.config["subcommand"] = config.subcommand;
  manifest.versions = {{"thin_epi", THIN_EPI_VERSION},
                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                     "." + std::to_string(EIGEN_MINOR_VERSION)},
                       {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec || !fs::is_directory(config.output_dir))
    fail(ErrorCode::Io, "output directory is not writable: " + config.output_dir.string());

  Context ctx{config, manifest};
  auto t0 = std::chrono::steady_clock::now();
  try {
    const std::string& s = config.subcommand;
    if (s == "spectral") run_spectral(ctx);
    else if (s == "epi-check") run_epi_check(ctx);
    else if (s == "solve") run_solve(ctx);
    else if (s == "frequency") run_frequency(ctx);
    else if (s == "blowup") run_blowup(ctx);
    else if (s == "stratify") run_stratify(ctx);
    else if (s == "gap-demo") run_gap_demo(ctx);
    else fail(ErrorCode::InvalidArgument, "unknown subcommand '" + s + "'");
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, config.subcommand + ": bad parameter: " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), config.subcommand + ": " + e.what());
  }
  manifest.timings.emplace_back("total", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  std::ofstream f(config.output_dir / "manifest.json");
  if (!f) fail(ErrorCode::Io, "cannot write manifest.json");
  f << manifest.to_json().dump(2) << "\n";
  return manifest;
}

}  // namespace thin_epi
