#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "thin_epi/experiments.hpp"

using thin_epi::json;

namespace {

json load_json(const std::string& text_or_path) {
  if (!text_or_path.empty() && text_or_path.front() == '{') return json::parse(text_or_path);
  std::ifstream f(text_or_path);
  if (!f) throw thin_epi::Error(thin_epi::ErrorCode::Io, "cannot read " + text_or_path);
  return json::parse(f);
}

struct Options {
  std::string config, out, cache_dir, problem, x0;
  int m = -1, n = -1, trials = -1, resolution = -1, N = -1, stride = -1;
  long long seed = -1;
  double eps = -1, eta = -1, r_max = -1, r_min = -1, mu = -1;
  std::vector<double> delta, t, candidates;
  bool negative = false, discrete = false, no_label_check = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Epiperimetric and frequency diagnostics for the thin obstacle problem"};
  app.require_subcommand(1);
  Options o;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : thin_epi::subcommands()) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--config", o.config, "JSON config file; flags override its keys");
    s->add_option("--out", o.out, "output directory (default runs/<subcommand>)");
    s->add_option("--cache-dir", o.cache_dir, "eigenbasis cache directory");
    subs[name] = s;
  }
  for (const char* name : {"spectral", "epi-check", "gap-demo", "blowup"}) subs[name]->add_option("--m", o.m);
  for (const char* name : {"spectral", "epi-check", "gap-demo"}) subs[name]->add_option("--n", o.n);
  for (const char* name : {"spectral", "epi-check"}) {
    subs[name]->add_option("--resolution", o.resolution, "sphere grid resolution");
    subs[name]->add_option("--delta", o.delta, "delta ladder")->delimiter(',');
  }
  auto* epi = subs["epi-check"];
  epi->add_option("--eps", o.eps);
  epi->add_option("--eta", o.eta);
  epi->add_option("--trials", o.trials);
  epi->add_option("--seed", o.seed);
  epi->add_flag("--negative", o.negative, "negative-energy traces");
  epi->add_flag("--discrete", o.discrete, "always use the mesh eigenbasis");
  for (const char* name : {"solve", "frequency", "blowup", "stratify"}) {
    subs[name]->add_option("--problem", o.problem, "problem JSON (inline or file)");
    subs[name]->add_option("--N", o.N, "grid nodes per unit length");
  }
  for (const char* name : {"frequency", "blowup"}) {
    subs[name]->add_option("--x0", o.x0, "center on the thin set, comma separated");
    subs[name]->add_option("--r-max", o.r_max);
    subs[name]->add_option("--r-min", o.r_min);
  }
  subs["frequency"]->add_option("--mu", o.mu, "enables the Weiss columns");
  subs["blowup"]->add_flag("--no-label-check", o.no_label_check);
  subs["stratify"]->add_option("--candidates", o.candidates)->delimiter(',');
  subs["stratify"]->add_option("--stride", o.stride);
  subs["gap-demo"]->add_option("--t", o.t, "values of t")->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    json doc = o.config.empty() ? json::object() : load_json(o.config);
    doc["subcommand"] = sub;
    if (!o.out.empty()) doc["output_dir"] = o.out;
    if (!doc.contains("output_dir")) doc["output_dir"] = "runs/" + sub;
    if (!o.cache_dir.empty()) doc["cache_dir"] = o.cache_dir;
    auto set_int = [&](const char* key, long long v) {
      if (v >= 0) doc[key] = v;
    };
    auto set_double = [&](const char* key, double v) {
      if (v >= 0) doc[key] = v;
    };
    set_int("m", o.m);
    set_int("n", o.n);
    set_int("trials", o.trials);
    set_int("seed", o.seed);
    set_int("resolution", o.resolution);
    set_int("stride", o.stride);
    set_double("eps", o.eps);
    set_double("eta", o.eta);
    set_double("r_max", o.r_max);
    set_double("r_min", o.r_min);
    set_double("mu", o.mu);
    if (!o.delta.empty()) doc["delta"] = o.delta;
    if (!o.t.empty()) doc["t"] = o.t;
    if (!o.candidates.empty()) doc["candidates"] = o.candidates;
    if (o.negative) doc["negative"] = true;
    if (o.discrete) doc["basis"] = "discrete";
    if (o.no_label_check) doc["check_label"] = false;
    if (!o.problem.empty()) doc["problem"] = load_json(o.problem);
    if (o.N > 0 && doc.contains("problem")) doc["problem"]["N"] = o.N;
    if (!o.x0.empty()) {
      std::vector<double> x;
      std::stringstream ss(o.x0);
      std::string part;
      while (std::getline(ss, part, ',')) x.push_back(std::stod(part));
      doc["x0"] = x;
    }

    thin_epi::RunConfig cfg = thin_epi::parse_config(doc);
    thin_epi::RunManifest man = thin_epi::run(cfg);
    for (const auto& c : man.checks)
      std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    std::printf("wrote %zu files and manifest.json to %s\n", man.files.size(), cfg.output_dir.string().c_str());
    return man.all_passed() ? 0 : 1;
  } catch (const thin_epi::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: invalid JSON: %s\n", e.what());
    return 2;
  }
}
