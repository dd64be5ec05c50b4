// One PASS/FAIL line per acceptance criterion.  Exit status is the number of
// failures (0 when everything passes).

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include <deformed_spectra/algebra.hpp>
#include <deformed_spectra/presets.hpp>

#include "../tools/output.hpp"

namespace ds = deformed_spectra;
using json = nlohmann::json;

namespace {

int failures = 0;

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Relative-to-max(1,|ref|) potential difference on n interior points.
double potential_gap(const std::function<double(double)>& a, const std::function<double(double)>& b, double lo,
                     double hi, int n = 200) {
  double e = 0.0;
  for (int i = 1; i <= n; ++i) {
    double y = lo + (hi - lo) * i / (n + 1.0), r = b(y);
    e = std::max(e, std::abs(a(y) - r) / std::max(1.0, std::abs(r)));
  }
  return e;
}

ds::ModelParams params(double z, double lambda, double mm, double m0, double mp) {
  ds::ModelParams p;
  p.z = z;
  p.lambda = lambda;
  p.mu_m = mm;
  p.mu_0 = m0;
  p.mu_p = mp;
  return p;
}

void criterion1() {
  Clock c;
  double worst = 0.0;
  for (bool pt : {false, true}) {
    ds::AlgebraBattery b;
    b.pt = pt;
    auto r = ds::run_algebra_battery(b);
    worst = std::max({worst, r.max_commutator, r.max_casimir});
  }
  double t = c.seconds();
  report(1, "algebra residuals", worst < 1e-8 && t < 5.0,
         fmt("max commutator/Casimir residual %.2e (< 1e-8), both realizations, %.2f s (< 5 s)", worst, t));
}

void criterion2() {
  Clock c;
  auto p = params(1, 2, 1, 2, 0);
  auto sp = ds::refine(ds::example1_potential(p), 4, 1e-8);
  const double want[] = {16, 30, 48, 70};
  double worst = 0.0;
  for (int n = 0; n < 4; ++n) worst = std::max(worst, rel(sp.entries[n].E, want[n]));
  double t = c.seconds();
  report(2, "Example 1 closed spectrum", worst < 1e-5 && t < 30.0,
         fmt("E = %.8f %.8f %.8f %.8f vs {16,30,48,70}, max rel %.2e (< 1e-5), %.2f s", sp.entries[0].E,
             sp.entries[1].E, sp.entries[2].E, sp.entries[3].E, worst, t));
}

void criterion3() {
  auto p = params(0, 0, 1, 0, 1);
  auto sp = ds::refine(ds::sl2_problem(p), 4, 1e-8);
  double worst = 0.0;
  for (int n = 0; n < 4; ++n) worst = std::max(worst, rel(sp.entries[n].E, 2.0 * (n + 1)));
  report(3, "sl(2,R) warm-up", worst < 1e-5, fmt("E_n vs 2(n+1), n=0..3, max rel %.2e (< 1e-5)", worst));
}

void criterion4() {
  auto p1 = params(1, 2, 1, 2, 0);
  auto e1 = ds::example1_pipeline(p1);
  double g1 = potential_gap(e1.problem.U, ds::example1_potential(p1).U, 0.0, M_PI / 2);
  double g3 = 0.0, half = 0.0;
  for (auto p3 : {params(0.25, 1, 1, 1, 1), params(0.4, 1, 1, 1.5, 1), params(0.5, 2, 1.5, 1.5, 0.7)}) {
    auto e3 = ds::example3_pipeline(p3);
    g3 = std::max(g3, potential_gap(e3.problem.U, [&](double y) { return ds::example3_potential(p3, y); }, 0.0, 6.0));
    half = std::max(half, potential_gap(e3.problem.U,
                                        [&](double y) { return ds::example3_potential_half_lambda(p3, y); }, 0.0, 6.0));
  }
  report(4, "PCT pipeline", g1 < 1e-8 && g3 < 1e-8,
         fmt("Example 1 gap %.2e, Example 3 gap %.2e (< 1e-8, 200 interior points); half-lambda variant off by "
             "%.2e (y^2 lambda(lambda+2) coefficient)",
             g1, g3, half));
}

void criterion5() {
  auto p = params(20, 2, 1, 0, 0.5);
  auto p0 = p;
  p0.mu_p = 0.0;
  ds::SolveOptions opt;
  opt.refine.n_cap = 1 << 14;
  auto sp = ds::solve_spectrum(ds::example1_potential(p), 4, 1e-11, opt);
  double worst_series = 0.0;
  bool within = true;
  std::string diffs;
  for (int n = 0; n < 4; ++n) {
    auto e1 = ds::example1_perturbation_e1(p, n);
    double oracle = ds::example1_perturbation_oracle(p, n);
    worst_series = std::max(worst_series, rel(e1.value, oracle));
    double e2 = ds::example1_second_order(p, n);
    double d = sp.entries[n].E - ds::example1_spectrum_exact(p0, n) - e1.value;
    within = within && std::abs(d) <= 5.0 * std::abs(e2);
    diffs += fmt(" %.1e/%.1e", std::abs(d), 5.0 * std::abs(e2));
  }
  report(5, "perturbation series", worst_series < 1e-6 && within,
         fmt("E1 vs quadrature max rel %.2e (< 1e-6); |E - E0 - E1| / 5|E2| per n:%s (solver: %s)", worst_series,
             diffs.c_str(), sp.method.c_str()));
}

void criterion6() {
  auto cat = ds::preset_catalog();
  std::vector<double> zs;
  for (int z = 10; z <= 100; ++z) zs.push_back(z);
  int bad = 0;
  double ratio = 0.0;
  for (const char* name : {"fig4-a", "fig4-b", "fig4-c", "fig4-d"}) {
    const auto* pr = ds::find_preset(cat, name);
    for (int n = 0; n < 4; ++n) {
      auto d = ds::fig4_difference(pr->params, n, zs, -1);
      for (size_t i = 1; i < d.size(); ++i)
        if (!(d[i] < d[i - 1])) ++bad;
      ratio = std::max(ratio, d.back() / d.front());
    }
  }
  report(6, "finite-dimensional convergence", bad == 0,
         fmt("|E_n - E_k^FD| strictly decreasing on z = 10..100 (step 1) for 4 panels x n=0..3: %d violations; "
             "largest d(100)/d(10) = %.4f",
             bad, ratio));
}

void criterion7() {
  auto cat = ds::preset_catalog();
  auto p = ds::find_preset(cat, "example2")->params;
  // (a) eta independence of the pipeline-built potential.
  std::vector<std::function<double(double)>> us;
  double vs_closed = 0.0;
  for (double eta : {0.0, 0.5, 2.0}) {
    auto q = p;
    q.eta = eta;
    us.push_back(ds::example2_pipeline(q).problem.U);
    vs_closed = std::max(vs_closed, potential_gap(us.back(), ds::example2_potential(q).U, 0.0, M_PI / 2));
  }
  double spread = std::max(potential_gap(us[1], us[0], 0.0, M_PI / 2), potential_gap(us[2], us[0], 0.0, M_PI / 2));
  bool a = spread < 1e-10 && vs_closed < 1e-10;
  // (b) closed spectrum vs numeric.
  auto sp = ds::solve_spectrum(ds::example2_potential(p), 4, 1e-9);
  double wb = 0.0;
  for (int n = 0; n < 4; ++n) wb = std::max(wb, rel(sp.entries[n].E, ds::example2_spectrum(p, n).real()));
  bool b = wb < 1e-5;
  // (c) box: O(h^2) on the flat box, Richardson to 1e-8.
  auto box = ds::example2_box_problem(p);
  double wc = 0.0, order = 0.0;
  {
    const int N = 4095;
    auto e1 = ds::solve_dirichlet(box, ds::Grid{N, box.y_min, box.y_max}, 4, false).energies();
    auto e2 = ds::solve_dirichlet(box, ds::Grid{2 * N + 1, box.y_min, box.y_max}, 4, false).energies();
    order = 1e9;
    for (int n = 0; n < 4; ++n) {
      double exact = ds::example2_box_limit(p, n + 1).epsilon;
      double r = (4.0 * e2[n] - e1[n]) / 3.0;
      wc = std::max(wc, std::abs(r - exact) / std::max(1.0, std::abs(exact)));
      order = std::min(order, std::log2(std::abs(e1[n] - exact) / std::abs(e2[n] - exact)));
    }
  }
  bool c = wc < 1e-8 && order > 1.9;
  // (d) closed spectrum equals the upper finite-dimensional branch at k = 2n + lambda + 2.
  double wd = 0.0;
  for (int n = 0; n < 6; ++n) {
    int k = 2 * n + int(p.lambda) + 2;
    wd = std::max(wd, rel(ds::finite_dim_value(ds::FiniteDim::ex2fd, p, k, +1), ds::example2_spectrum(p, n).real()));
  }
  bool d = wd < 1e-13;
  report(7, "Example 2", a && b && c && d,
         fmt("(a) eta spread %.2e, vs closed form %.2e (< 1e-10); (b) max rel %.2e (< 1e-5); (c) Richardson %.2e "
             "(< 1e-8), observed order %.3f; (d) max rel %.2e",
             spread, vs_closed, wb, wc, order, wd));
}

void criterion8() {
  using L = ds::Example3Limit;
  auto text = params(100, 1, 1, 1, 1);
  auto sup = [](const ds::ModelParams& p, L which, double ymin) {
    double e = 0.0;
    for (int i = 0; i < 600; ++i) {
      double y = -3.0 + 6.0 * (i + 0.5) / 600.0;
      if (std::abs(y) < ymin) continue;
      e = std::max(e, std::abs(ds::example3_potential(p, y) - ds::example3_limit(p, y, which)));
    }
    return e;
  };
  double inf_err = 0.0;
  for (double mp : {1.0, 2.0, 0.5}) {
    auto q = text;
    q.mu_p = mp;
    inf_err = std::max(inf_err, sup(q, L::z_to_infinity, 0.0));
  }
  auto fig5 = params(100, 1, 1, 1.5, 1);
  double fig5_err = sup(fig5, L::z_to_infinity, 0.0);
  // z -> 0 on 0.25 <= |y| <= 3: monotone and small.
  bool mono = true;
  double prev = INFINITY, last = 0.0;
  for (double z : {1e-1, 1e-2, 1e-3, 1e-4}) {
    auto q = text;
    q.z = z;
    double e = sup(q, L::z_to_zero, 0.25);
    mono = mono && e < prev;
    prev = last = e;
  }
  // Pole at y = 0 only when mu+ != mu-.
  bool pole_ok = true;
  for (double z : {0.01, 0.1, 0.4, 1.0, 10.0, 100.0}) {
    auto q = text;
    q.z = z;
    pole_ok = pole_ok && std::isfinite(ds::example3_potential(q, 0.0)) && !ds::example3_has_pole(q) &&
              std::abs(ds::example3_potential(q, 1e-7) - ds::example3_potential(q, 0.0)) <
                  1e-6 * std::max(1.0, std::abs(ds::example3_potential(q, 0.0)));
    q.mu_p = 2.0;
    pole_ok = pole_ok && ds::example3_has_pole(q) && ds::example3_potential(q, 1e-7) > 1e6;
  }
  bool ok = inf_err < 1e-2 && mono && last < 1e-2 && pole_ok;
  report(8, "Example 3 limits", ok,
         fmt("z=100 sup|U - U_inf| on |y|<=3: %.2e (< 1e-2, mu0=mu-=1, mu+ in {0.5,1,2}; example3-fig5 couplings mu0=3/2 "
             "give %.2e); z->0 error decreasing to %.2e at z=1e-4; pole only for mu+ != mu-: %s",
             inf_err, fig5_err, last, pole_ok ? "yes" : "no"));
}

void criterion9() {
  auto cat = ds::preset_catalog();
  auto w = ds::find_preset(cat, "dwt-khco3-heun")->dwt;
  auto fd = ds::refine(ds::dwt_problem(w), 5, 1e-9);
  auto hs = ds::dwt_heun_spectrum(w, 5, fd.grid);
  double we = 0.0, wf = 0.0;
  for (int n = 0; n < 5; ++n) {
    we = std::max(we, rel(hs.entries[n].E, fd.entries[n].E));
    for (size_t i = 0; i < hs.entries[n].psi.size(); ++i)
      wf = std::max(wf, std::abs(hs.entries[n].psi[i] - fd.entries[n].psi[i]));
  }
  report(9, "DWT Heun family", we < 1e-4 && wf < 1e-3,
         fmt("KHCO3 (c_s = sqrt d_s) lowest 5: max rel %.2e (< 1e-4), eigenfunction sup-norm %.2e (< 1e-3)", we, wf));
}

void criterion10() {
  auto cat = ds::preset_catalog();
  auto w = ds::find_preset(cat, "dwt-zundel")->dwt;
  double m = ds::dwt_order(w);
  auto fd = ds::refine(ds::dwt_problem(w), 6, 1e-9);
  double we = 0.0;
  for (int n = 0; n < 6; ++n) we = std::max(we, rel(ds::dwt_symmetric_spectrum(w.b, m, n), fd.entries[n].E));
  std::vector<ds::SpheroidalIndex> idx;
  std::vector<ds::SpheroidalSolution> sol;
  for (int n = 0; n < 6; ++n) {
    idx.push_back({m, n, w.b, ds::SpheroidalKind::oblate});
    sol.push_back(ds::spheroidal_solve(idx.back()));
  }
  auto f = [&](int n, double y) { return std::sqrt(std::cos(y)) * ds::spheroidal_eval(idx[n], sol[n], std::sin(y)); };
  double wo = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = ds::integrate([&](double y) { return f(i, y) * f(j, y); }, -M_PI / 2, M_PI / 2, 1e-13);
      wo = std::max(wo, std::abs(v - (i == j ? 1.0 : 0.0)));
    }
  report(10, "DWT symmetric family", we < 1e-4 && wo < 1e-8,
         fmt("Zundel lowest 6: max rel %.2e (< 1e-4); orthonormality defect %.2e (< 1e-8)", we, wo));
}

void criterion11() {
  ds::DwtParams w{0.0, 10.0, 0.0, 3.75};
  ds::HeunSpectrumOptions opt;
  opt.require_family = false;
  auto h = ds::dwt_heun_eigenvalues(w, 5, opt);
  double worst = 0.0;
  for (int n = 0; n < 5; ++n) worst = std::max(worst, rel(h[n], ds::dwt_symmetric_spectrum(10.0, 2.0, n)));
  report(11, "Heun vs spheroidal", worst < 1e-6, fmt("a=c=0, m=2, b=10, lowest 5: max rel %.2e (< 1e-6)", worst));
}

struct Expect {
  const char* id;
  int panels;
  int potentials, levels, wavefunctions, series;  // per panel
};

bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, int& files) {
  namespace fs = std::filesystem;
  files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    auto other = b / e.path().filename();
    if (!fs::exists(other)) return false;
    if (ds_cli::read_file(e.path().string()) != ds_cli::read_file(other.string())) return false;
    ++files;
  }
  return files > 0;
}

void criterion12() {
  namespace fs = std::filesystem;
  const Expect ex[] = {{"f1", 3, 1, 4, 4, 0}, {"f2", 3, 1, 4, 4, 0}, {"f3", 3, 1, 4, 4, 0}, {"f4", 4, 0, 0, 0, 4},
                       {"f5", 1, 4, 0, 0, 0}, {"f6", 4, 1, 4, 4, 0}, {"f7a", 1, 1, 5, 5, 0}, {"f7b", 1, 1, 6, 6, 0}};
  fs::path root = fs::temp_directory_path() / ("ds-accept-" + std::to_string(::getpid()));
  std::string problems;
  double slowest = 0.0;
  for (const auto& e : ex) {
    fs::path d1 = root / "a" / e.id, d2 = root / "b" / e.id;
    Clock c;
    std::string cmd1 = std::string("DEFORMED_SPECTRA_THREADS=1 ") + DS_CLI_PATH + " figure " + e.id + " --out " +
                       d1.string() + " > /dev/null";
    std::string cmd2 = std::string("DEFORMED_SPECTRA_THREADS=4 ") + DS_CLI_PATH + " figure " + e.id + " --out " +
                       d2.string() + " > /dev/null";
    if (std::system(cmd1.c_str()) != 0) {
      problems += std::string(" ") + e.id + ":exit";
      continue;
    }
    slowest = std::max(slowest, c.seconds());
    if (std::system(cmd2.c_str()) != 0) {
      problems += std::string(" ") + e.id + ":exit";
      continue;
    }
    int files = 0;
    if (!same_tree(d1, d2, files)) problems += std::string(" ") + e.id + ":nondeterministic";
    auto man = json::parse(ds_cli::read_file((d1 / (std::string(e.id) + ".json")).string()));
    const auto& panels = man["panels"];
    if (int(panels.size()) != e.panels) problems += std::string(" ") + e.id + ":panels";
    std::string svg = ds_cli::read_file((d1 / (std::string(e.id) + ".svg")).string());
    size_t polylines = 0;
    for (size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) ++polylines;
    size_t curves = 0;
    for (const auto& pj : panels) {
      curves += pj["curves"].get<size_t>();
      if (pj["potentials"] != e.potentials || pj["levels"] != e.levels || pj["wavefunctions"] != e.wavefunctions ||
          pj["series"] != e.series)
        problems += std::string(" ") + e.id + ":" + pj["name"].get<std::string>() + ":counts";
      // Recount from the CSV rather than trusting the manifest.
      auto t = ds_cli::parse_csv(ds_cli::read_file((d1 / pj["csv"].get<std::string>()).string()));
      if (t.format != "deformed-spectra/figure-panel/1" || t.header.size() != 6) problems += " csv-format";
      std::map<std::string, std::map<std::string, std::vector<std::pair<double, double>>>> by;
      for (const auto& r : t.rows) by[r[1]][r[2]].push_back({std::stod(r[3]), std::stod(r[5])});
      auto count = [&](const char* k) { return by.count(k) ? int(by[k].size()) : 0; };
      if (count("potential") != e.potentials || count("level") != e.levels || count("psi") != e.wavefunctions ||
          count("series") != e.series)
        problems += std::string(" ") + e.id + ":" + pj["name"].get<std::string>() + ":csv-counts";
      // Eigenfunctions vanish at both ends of the plotted range (aux = raw psi).
      for (const auto& [tag, pts] : by["psi"]) {
        double amax = 0.0;
        for (auto [x, v] : pts) amax = std::max(amax, std::abs(v));
        double ends = std::max(std::abs(pts.front().second), std::abs(pts.back().second));
        if (!(ends < 1e-3 * amax)) problems += std::string(" ") + e.id + ":" + tag + ":decay";
      }
    }
    if (polylines != curves) problems += std::string(" ") + e.id + ":svg-curves";
  }
  fs::remove_all(root);
  bool ok = problems.empty() && slowest < 60.0;
  report(12, "figure artifacts", ok,
         fmt("f1-f7b: panel/curve/level counts, CSV recount, eigenfunction end decay, byte-identical output at 1 and 4 "
             "threads; slowest %.1f s (< 60 s)%s%s",
             slowest, problems.empty() ? "" : "; problems:", problems.c_str()));
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  const std::vector<std::function<void()>> all{criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
                                               criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};
  for (size_t i = 0; i < all.size(); ++i) {
    try {
      all[i]();
    } catch (const std::exception& e) {
      report(int(i + 1), "exception", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, all.size());
  return failures;
}
