#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <deformed_spectra/algebra.hpp>
#include <deformed_spectra/presets.hpp>

#include "figures.hpp"
#include "output.hpp"

namespace ds = deformed_spectra;
using json = nlohmann::json;
using namespace ds_cli;

namespace {

constexpr int kOk = 0, kUsage = 1, kNumeric = 2, kBroken = 3;

const char* kExitHelp =
    "Exit codes: 0 ok, 1 usage (bad flag, unknown preset or parameter), 2 numeric failure "
    "(solver did not converge, residual breach), 3 broken PT phase (complex tau).\n"
    "DEFORMED_SPECTRA_THREADS caps the worker count.";

struct Common {
  std::string preset;
  std::vector<std::string> params;
  std::string preset_file;
  int grid = 0;  // 0: adaptive refinement
  double tol = 1e-8;
  std::string out;
  std::string format = "csv";
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BrokenPhase : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* app, Common& c, bool with_preset = true) {
  if (with_preset) {
    app->add_option("--preset", c.preset, "built-in preset name (see list-presets)");
    app->add_option("--param", c.params, "override key=value (repeatable)")->take_all();
    app->add_option("--preset-file", c.preset_file, "preset JSON (docs/preset.schema.json)");
    app->add_option("--grid", c.grid, "fixed number of interior grid points (default: refine to --tol)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--tol", c.tol, "relative tolerance")->check(CLI::PositiveNumber);
  }
  app->add_option("--out", c.out, "output path (default stdout)");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json", "svg"}));
}

std::string available(const std::vector<ds::Preset>& cat) {
  std::string s;
  for (const auto& n : ds::preset_names(cat)) s += "  " + n + "\n";
  return s;
}

ds::Preset preset_from_json(const json& j, const std::vector<ds::Preset>& cat) {
  if (j.value("format", "") != "deformed-spectra/preset/1")
    throw UsageError("preset file: format must be \"deformed-spectra/preset/1\"");
  ds::Preset p;
  if (j.contains("base")) {
    const auto* b = ds::find_preset(cat, j.at("base").get<std::string>());
    if (!b) throw UsageError("preset file: unknown base preset '" + j.at("base").get<std::string>() + "'\n" +
                             "available presets:\n" + available(cat));
    p = *b;
  } else if (j.contains("model")) {
    p.kind = ds::model_kind_from(j.at("model").get<std::string>());
  } else {
    throw UsageError("preset file: needs \"base\" or \"model\"");
  }
  if (j.contains("model")) p.kind = ds::model_kind_from(j.at("model").get<std::string>());
  p.name = j.value("name", p.name.empty() ? std::string("custom") : p.name);
  p.description = j.value("description", p.description);
  if (j.contains("params"))
    for (auto& [k, v] : j.at("params").items())
      if (!ds::set_param(p, k, v.get<double>())) throw UsageError("preset file: unknown parameter '" + k + "'");
  if (j.contains("states")) ds::set_param(p, "states", j.at("states").get<double>());
  if (j.contains("length")) ds::set_param(p, "L", j.at("length").get<double>());
  p.flags = ds::preset_regime(p);
  return p;
}

ds::Preset resolve(const Common& c) {
  auto cat = ds::preset_catalog();
  ds::Preset p;
  if (!c.preset_file.empty()) {
    if (!c.preset.empty()) throw UsageError("--preset and --preset-file are exclusive");
    std::string text;
    try {
      text = read_file(c.preset_file);
    } catch (const std::runtime_error& e) {
      throw UsageError(std::string("preset file: ") + e.what());
    }
    try {
      p = preset_from_json(json::parse(text), cat);
    } catch (const json::exception& e) {
      throw UsageError(std::string("preset file: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("preset file: ") + e.what());
    }
  } else {
    if (c.preset.empty()) throw UsageError("a --preset or --preset-file is required\navailable presets:\n" + available(cat));
    const auto* f = ds::find_preset(cat, c.preset);
    if (!f) throw UsageError("unknown preset '" + c.preset + "'\navailable presets:\n" + available(cat));
    p = *f;
  }
  for (const auto& kv : c.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    char* end = nullptr;
    double v = std::strtod(val.c_str(), &end);
    if (val.empty() || *end) throw UsageError("--param " + key + ": not a number '" + val + "'");
    try {
      if (!ds::set_param(p, key, v)) throw UsageError("unknown parameter '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return p;
}

json params_json(const ds::Preset& p) {
  json j;
  j["model"] = ds::to_string(p.kind);
  if (p.kind == ds::ModelKind::dwt) {
    j["a_s"] = p.dwt.a;
    j["b_s"] = p.dwt.b;
    j["c_s"] = p.dwt.c;
    j["d_s"] = p.dwt.d;
  } else {
    const auto& m = p.params;
    j["z"] = m.z;
    j["lambda"] = m.lambda;
    j["mu_m"] = m.mu_m;
    j["mu_0"] = m.mu_0;
    j["mu_p"] = m.mu_p;
    if (p.kind == ds::ModelKind::example2) j["eta"] = m.eta;
  }
  j["states"] = p.states;
  return j;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-")
    std::cout << text;
  else
    write_file(c.out, text);
}

// Table as CSV or as {"format", "columns", "rows"} JSON with numeric cells.
std::string render(const Table& t, const std::string& format, const json& meta = json::object()) {
  if (format == "csv") return t.csv();
  if (format != "json") throw UsageError("this command writes csv or json, not " + format);
  json j = meta;
  j["format"] = t.format;
  j["columns"] = t.header;
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::array();
    for (const auto& cell : r) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (cell.empty())
        row.push_back(nullptr);
      else if (*end == 0 && std::isfinite(v))
        row.push_back(v);
      else
        row.push_back(cell);
    }
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

ds::ConstantMassProblem problem_of(const ds::Preset& p) {
  switch (p.kind) {
    case ds::ModelKind::example1: return ds::example1_potential(p.params);
    case ds::ModelKind::sl2: return ds::sl2_problem(p.params, p.length);
    case ds::ModelKind::example2: return ds::example2_potential(p.params);
    case ds::ModelKind::box: return ds::example2_box_problem(p.params);
    case ds::ModelKind::example3: return ds::example3_problem(p.params, p.length);
    case ds::ModelKind::dwt: return ds::dwt_problem(p.dwt);
  }
  throw std::logic_error("unhandled model");
}

std::vector<std::optional<double>> analytic_levels(const ds::Preset& p) {
  std::vector<std::optional<double>> e(p.states);
  const auto& m = p.params;
  switch (p.kind) {
    case ds::ModelKind::example1:
      if (m.mu_p == 0.0)
        for (int n = 0; n < p.states; ++n) e[n] = ds::example1_spectrum_exact(m, n);
      break;
    case ds::ModelKind::sl2:
      for (int n = 0; n < p.states; ++n) e[n] = ds::sl2_spectrum(m, n);
      break;
    case ds::ModelKind::example2:
      for (int n = 0; n < p.states; ++n) e[n] = ds::example2_spectrum(m, n).real();
      break;
    case ds::ModelKind::box:
      for (int n = 0; n < p.states; ++n) e[n] = ds::example2_box_limit(m, n + 1).epsilon;
      break;
    case ds::ModelKind::example3: break;
    case ds::ModelKind::dwt:
      if (p.flags.symmetric) {
        double order = ds::dwt_order(p.dwt);
        for (int n = 0; n < p.states; ++n) e[n] = ds::dwt_symmetric_spectrum(p.dwt.b, order, n);
      } else if (p.flags.heun_family) {
        auto h = ds::dwt_heun_eigenvalues(p.dwt, p.states);
        for (int n = 0; n < p.states; ++n) e[n] = h[n];
      }
      break;
  }
  return e;
}

void check_phase(const ds::Preset& p) {
  if (p.flags.broken_phase) throw BrokenPhase("broken PT phase: tau^2 = mu0^2 + 2 mu+ mu- < 0 (complex tau)");
}

ds::Spectrum numeric_spectrum(const ds::ConstantMassProblem& prob, int states, const Common& c) {
  if (c.grid > 0) return ds::solve_dirichlet(prob, ds::Grid{c.grid, prob.y_min, prob.y_max}, states);
  return ds::solve_spectrum(prob, states, c.tol);
}

int run_spectrum(const Common& c) {
  auto p = resolve(c);
  check_phase(p);
  auto prob = problem_of(p);
  auto sp = numeric_spectrum(prob, p.states, c);
  auto an = analytic_levels(p);
  Table t;
  t.format = "deformed-spectra/spectrum/1";
  t.header = {"n", "E_analytic", "E_numeric", "abs_err", "rel_err"};
  bool ok = sp.converged;
  for (int n = 0; n < p.states; ++n) {
    double E = sp.entries[n].E;
    ok = ok && std::isfinite(E);
    if (an[n]) {
      double a = *an[n], d = std::abs(E - a);
      t.add({std::to_string(n), num(a), num(E), num(d), num(d / std::max(std::abs(a), 1e-300))});
    } else {
      t.add({std::to_string(n), "", num(E), "", ""});
    }
  }
  json meta;
  meta["preset"] = p.name;
  meta["params"] = params_json(p);
  meta["method"] = sp.method;
  emit(c, render(t, c.format, meta));
  return ok ? kOk : kNumeric;
}

std::vector<double> interior(double a, double b, int n) {
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = a + (b - a) * (i + 0.5) / n;
  return y;
}

int run_potential(const Common& c) {
  auto p = resolve(c);
  check_phase(p);
  auto prob = problem_of(p);
  int n = c.grid > 0 ? c.grid : 200;
  Table t;
  t.format = "deformed-spectra/potential/1";
  t.header = {"y", "U"};
  for (double y : interior(prob.y_min, prob.y_max, n)) t.add({num(y), num(prob.U(y))});
  json meta;
  meta["preset"] = p.name;
  meta["params"] = params_json(p);
  meta["m0"] = prob.m0;
  emit(c, render(t, c.format, meta));
  return kOk;
}

int run_compare(const Common& c) {
  auto p = resolve(c);
  check_phase(p);
  ds::Pipeline pl;
  std::function<double(double)> closed;
  const auto& m = p.params;
  switch (p.kind) {
    case ds::ModelKind::example1:
      pl = ds::example1_pipeline(m);
      closed = ds::example1_potential(m).U;
      break;
    case ds::ModelKind::sl2:
      pl = ds::sl2_pipeline(m);
      closed = ds::sl2_problem(m, p.length).U;
      break;
    case ds::ModelKind::example2:
      pl = ds::example2_pipeline(m);
      closed = ds::example2_potential(m).U;
      break;
    case ds::ModelKind::example3:
      if (m.z == 0.0 || std::isinf(m.z)) throw UsageError("compare needs a finite z > 0");
      pl = ds::example3_pipeline(m);
      closed = [m](double y) { return ds::example3_potential(m, y); };
      break;
    default: throw UsageError(std::string("compare: no pipeline for model ") + ds::to_string(p.kind));
  }
  auto ref = problem_of(p);
  double a = std::max(pl.problem.y_min, ref.y_min), b = std::min(pl.problem.y_max, ref.y_max);
  int n = c.grid > 0 ? c.grid : 200;
  Table t;
  t.format = "deformed-spectra/compare/1";
  t.header = {"y", "U_pipeline", "U_closed", "abs_diff"};
  double worst = 0.0;
  for (double y : interior(a, b, n)) {
    double u1 = pl.problem.U(y), u2 = closed(y), d = std::abs(u1 - u2);
    worst = std::max(worst, d / std::max(1.0, std::abs(u2)));
    t.add({num(y), num(u1), num(u2), num(d)});
  }
  json meta;
  meta["preset"] = p.name;
  meta["params"] = params_json(p);
  meta["max_rel_diff"] = worst;
  emit(c, render(t, c.format, meta));
  std::fprintf(stderr, "max |U_pipeline - U_closed| / max(1, |U_closed|) = %.3e\n", worst);
  return kOk;
}

std::vector<double> parse_z_list(const std::string& s) {
  std::vector<double> z;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "inf" || tok == "infinity") {
      z.push_back(INFINITY);
      continue;
    }
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end || !(v >= 0) || std::isinf(v)) throw UsageError("--z: bad value '" + tok + "'");
    z.push_back(v);
  }
  if (z.empty()) throw UsageError("--z: empty list");
  return z;
}

int run_zscan(const Common& c, const std::string& zlist) {
  auto p = resolve(c);
  auto zs = parse_z_list(zlist);
  if (p.kind == ds::ModelKind::dwt || p.kind == ds::ModelKind::box)
    throw UsageError(std::string("zscan: model ") + ds::to_string(p.kind) + " has no z");
  for (double z : zs)
    if ((z == 0.0 || std::isinf(z)) && p.kind != ds::ModelKind::example3)
      throw UsageError("zscan: the symbolic endpoints 0 and inf are defined for example3 only");
  struct Row {
    std::vector<std::string> cells;
    bool ok = true;
  };
  const int k = p.states;
  auto rows = parallel_map<Row>(zs.size(), [&](size_t i) {
    ds::Preset q = p;
    q.params.z = zs[i];
    q.flags = ds::preset_regime(q);
    Row r;
    auto prob = problem_of(q);
    bool pole = q.kind == ds::ModelKind::example3 ? prob.y_min == 0.0 : true;
    // Barrier at y = 0 for example3; for the trigonometric cells the wall
    // sits at the left end.
    double barrier = pole ? INFINITY : prob.U(0.0);
    double wmin = INFINITY, wy = NAN;
    for (double y : interior(prob.y_min, prob.y_max, 4000)) {
      double u = prob.U(y);
      if (u < wmin) wmin = u, wy = y;
    }
    r.cells = {num(zs[i]), pole ? "1" : "0", num(barrier), num(wmin), num(std::abs(wy))};
    if (q.flags.broken_phase) {
      for (int n = 0; n < k; ++n) r.cells.push_back("");
      r.ok = false;
      return r;
    }
    try {
      auto sp = numeric_spectrum(prob, k, c);
      for (int n = 0; n < k; ++n) r.cells.push_back(num(sp.entries[n].E));
    } catch (const ds::SolverError&) {
      for (int n = 0; n < k; ++n) r.cells.push_back("");
      r.ok = false;
    }
    return r;
  });
  Table t;
  t.format = "deformed-spectra/zscan/1";
  t.header = {"z", "pole", "barrier", "well_min", "well_y"};
  for (int n = 0; n < k; ++n) t.header.push_back("E" + std::to_string(n));
  bool ok = true;
  for (auto& r : rows) {
    t.add(r.cells);
    ok = ok && r.ok;
  }
  json meta;
  meta["preset"] = p.name;
  meta["params"] = params_json(p);
  emit(c, render(t, c.format, meta));
  return ok ? kOk : kNumeric;
}

int run_figure(const Common& c, const std::string& id) {
  const auto& ids = figure_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
    std::string s;
    for (const auto& i : ids) s += " " + i;
    throw UsageError("unknown figure '" + id + "'; known:" + s);
  }
  namespace fs = std::filesystem;
  fs::path dir = c.out.empty() ? fs::path("figures") : fs::path(c.out);
  fs::create_directories(dir);
  Figure f = build_figure(id);
  json man;
  man["format"] = "deformed-spectra/figure/1";
  man["figure"] = f.id;
  man["caption"] = f.caption;
  man["svg"] = f.id + ".svg";
  json panels = json::array();
  std::vector<Panel> plots;
  for (const auto& pn : f.panels) {
    std::string file = f.id + "-" + pn.name + ".csv";
    write_file((dir / file).string(), pn.table.csv());
    json pj;
    pj["name"] = pn.name;
    pj["title"] = pn.plot.title;
    pj["csv"] = file;
    pj["potentials"] = pn.potentials;
    pj["levels"] = pn.levels;
    pj["wavefunctions"] = pn.wavefunctions;
    pj["series"] = pn.series;
    pj["curves"] = pn.plot.curves.size();
    if (!pn.energies.empty()) pj["energies"] = pn.energies;
    panels.push_back(pj);
    plots.push_back(pn.plot);
  }
  man["panels"] = panels;
  write_file((dir / (f.id + ".svg")).string(), svg_render(plots, f.cols));
  write_file((dir / (f.id + ".json")).string(), man.dump(2) + "\n");
  std::printf("%s: %zu panel(s) written to %s\n", f.id.c_str(), f.panels.size(), dir.string().c_str());
  return kOk;
}

int run_verify_algebra(const Common& c, bool fault) {
  struct Named {
    std::string name;
    ds::AlgebraBattery b;
  };
  std::vector<Named> batteries;
  ds::AlgebraBattery d;
  d.options.inject_sign_fault = fault;
  batteries.push_back({"deformed", d});
  ds::AlgebraBattery pt = d;
  pt.pt = true;
  batteries.push_back({"pt-contour", pt});
  ds::AlgebraBattery cl = d;
  cl.z = {0.0};
  batteries.push_back({"classical-z0", cl});
  ds::AlgebraBattery clpt = pt;
  clpt.z = {0.0};
  batteries.push_back({"classical-z0-pt", clpt});
  auto reps = parallel_map<ds::AlgebraReport>(batteries.size(),
                                              [&](size_t i) { return ds::run_algebra_battery(batteries[i].b); });
  const double threshold = 1e-8;
  json j;
  j["format"] = "deformed-spectra/algebra-report/1";
  j["threshold"] = threshold;
  j["inject_fault"] = fault;
  json arr = json::array();
  double mc = 0.0, ms = 0.0;
  for (size_t i = 0; i < reps.size(); ++i) {
    json b;
    b["name"] = batteries[i].name;
    b["z"] = batteries[i].b.z;
    b["lambda"] = batteries[i].b.lambda;
    b["points"] = batteries[i].b.n_points;
    b["test_functions"] = ds::standard_test_functions().size();
    b["max_commutator"] = reps[i].max_commutator;
    b["max_casimir"] = reps[i].max_casimir;
    arr.push_back(b);
    mc = std::max(mc, reps[i].max_commutator);
    ms = std::max(ms, reps[i].max_casimir);
  }
  j["batteries"] = arr;
  j["max_commutator"] = mc;
  j["max_casimir"] = ms;
  bool pass = mc < threshold && ms < threshold;
  j["pass"] = pass;
  emit(c, j.dump(2) + "\n");
  return pass ? kOk : kNumeric;
}

int run_list(const Common& c) {
  auto cat = ds::preset_catalog();
  Table t;
  t.format = "deformed-spectra/presets/1";
  t.header = {"name", "model", "states", "bound", "broken_phase", "closed_form", "description"};
  for (const auto& p : cat) {
    std::string d = p.description;
    std::replace(d.begin(), d.end(), ',', ';');
    t.add({p.name, ds::to_string(p.kind), std::to_string(p.states), p.flags.bound ? "1" : "0",
           p.flags.broken_phase ? "1" : "0", p.flags.closed_form ? "1" : "0", d});
  }
  emit(c, render(t, c.format));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of PT-symmetric Hamiltonians on the non-standard deformation of sl(2,R)"};
  app.footer(kExitHelp);
  app.require_subcommand(1);
  Common c;
  std::string fig_id, zlist = "0,0.25,0.5,1,2,inf";
  bool fault = false;

  auto* spectrum = app.add_subcommand("spectrum", "closed-form vs numeric eigenvalues");
  add_common(spectrum, c);
  auto* potential = app.add_subcommand("potential", "sample the constant-mass potential U(y)");
  add_common(potential, c);
  auto* compare = app.add_subcommand("compare", "pipeline-built U against the closed form");
  add_common(compare, c);
  auto* zscan = app.add_subcommand("zscan", "sweep the deformation parameter");
  add_common(zscan, c);
  zscan->add_option("--z", zlist, "comma-separated z values; 0 and inf select the closed-form limits");
  auto* figure = app.add_subcommand("figure", "write per-panel CSV, an SVG and a JSON manifest into --out DIR");
  figure->add_option("id", fig_id, "f1 f2 f3 f4 f5 f6 f7a f7b")->required();
  figure->add_option("--out", c.out, "output directory (default ./figures)");
  auto* verify = app.add_subcommand("verify-algebra", "commutator and Casimir residual report (JSON)");
  verify->add_option("--out", c.out, "output path (default stdout)");
  verify->add_flag("--inject-fault", fault, "flip the sign of the j- first-derivative coefficient");
  auto* list = app.add_subcommand("list-presets", "list the built-in presets");
  add_common(list, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*spectrum) return run_spectrum(c);
    if (*potential) return run_potential(c);
    if (*compare) return run_compare(c);
    if (*zscan) return run_zscan(c, zlist);
    if (*figure) return run_figure(c, fig_id);
    if (*verify) return run_verify_algebra(c, fault);
    if (*list) return run_list(c);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const BrokenPhase& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBroken;
  } catch (const ds::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumeric;
  }
  return kUsage;
}
