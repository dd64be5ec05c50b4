#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <deformed_spectra/presets.hpp>

#include "output.hpp"

namespace ds_cli {

namespace ds = deformed_spectra;

// Worker count: DEFORMED_SPECTRA_THREADS if set (>= 1), else the hardware.
inline unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* e = std::getenv("DEFORMED_SPECTRA_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(e, &end, 10);
    if (end != e && v >= 1) return unsigned(v);
  }
  return hw;
}

// Runs fn(i) for i in [0, n); results land by index, so output does not
// depend on scheduling.  The first exception is rethrown.
template <class T>
std::vector<T> parallel_map(size_t n, const std::function<T(size_t)>& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> err(n);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i; (i = next++) < n;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  unsigned k = std::min<unsigned>(thread_cap(), unsigned(n));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < k; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

inline const char* kFigureFormat = "deformed-spectra/figure-panel/1";

struct FigPanel {
  std::string name;
  Panel plot;
  Table table;
  int potentials = 0, levels = 0, wavefunctions = 0, series = 0;
  std::vector<double> energies;  // raw units
};

struct Figure {
  std::string id;
  std::string caption;
  int cols = 1;
  std::vector<FigPanel> panels;
};

inline Table figure_table() {
  Table t;
  t.format = kFigureFormat;
  t.header = {"panel", "kind", "series", "x", "y", "aux"};
  return t;
}

struct LevelPanelSpec {
  std::string name, title;
  ds::ConstantMassProblem prob;
  int states = 4;
  double tol = 1e-8;
  double display_scale = 1.0;  // display value = raw * display_scale
  bool mirror = false;         // even extension to y < y_min (y_min = 0)
  int samples = 400;           // per solved interval
};

// Potential, eigenvalue rules and eigenfunctions offset by their level.
inline FigPanel level_panel(const LevelPanelSpec& s) {
  FigPanel fp;
  fp.name = s.name;
  fp.plot.title = s.title;
  fp.table = figure_table();
  auto sp = ds::solve_spectrum(s.prob, s.states, s.tol);
  auto ys = sp.grid.values();
  const size_t stride = std::max<size_t>(1, ys.size() / size_t(s.samples));
  std::vector<size_t> idx;
  for (size_t i = 0; i < ys.size(); i += stride) idx.push_back(i);
  if (idx.back() != ys.size() - 1) idx.push_back(ys.size() - 1);
  const double k = s.display_scale;
  std::vector<double> E;
  for (const auto& e : sp.entries) E.push_back(e.E);
  fp.energies = E;
  double spacing = E.size() > 1 ? (E.back() - E.front()) / double(E.size() - 1) : std::max(1.0, std::abs(E[0]));
  // Display window: from the well bottom to one spacing above the top level.
  double umin = INFINITY;
  for (size_t i : idx) umin = std::min(umin, s.prob.U(ys[i]));
  fp.plot.y_lo = k * std::min(umin, E.front() - 0.5 * spacing);
  fp.plot.y_hi = k * (E.back() + spacing);
  if (k < 0) std::swap(fp.plot.y_lo, fp.plot.y_hi);
  const double x_lo = s.mirror ? -s.prob.y_max : s.prob.y_min;
  fp.plot.x_lo = x_lo;
  fp.plot.x_hi = s.prob.y_max;

  auto emit = [&](const std::string& kind, const std::string& series, double x, double y, double aux) {
    fp.table.add({fp.name, kind, series, num(x), num(y), num(aux)});
  };
  auto sampled = [&](auto&& value) {
    std::vector<std::pair<double, double>> pts;
    if (s.mirror)
      for (auto it = idx.rbegin(); it != idx.rend(); ++it) pts.push_back({-ys[*it], value(*it)});
    for (size_t i : idx) pts.push_back({ys[i], value(i)});
    return pts;
  };

  Curve pot{"U", "solid", 0, {}};
  pot.pts = sampled([&](size_t i) { return k * s.prob.U(ys[i]); });
  for (auto [x, y] : pot.pts) emit("potential", "U", x, y, y / k);
  fp.plot.curves.push_back(pot);
  ++fp.potentials;

  for (size_t n = 0; n < E.size(); ++n) {
    std::string tag = "n=" + std::to_string(n);
    Curve rule{"E" + std::to_string(n), "dotted", 6, {{x_lo, k * E[n]}, {s.prob.y_max, k * E[n]}}};
    for (auto [x, y] : rule.pts) emit("level", tag, x, y, E[n]);
    fp.plot.curves.push_back(rule);
    ++fp.levels;
    const auto& psi = sp.entries[n].psi;
    double amax = 0.0;
    for (double v : psi) amax = std::max(amax, std::abs(v));
    double amp = 0.4 * std::abs(k) * spacing / std::max(amax, 1e-300);
    Curve wf{"psi" + std::to_string(n), "solid", int(1 + n % 5), {}};
    wf.pts = sampled([&](size_t i) { return k * E[n] + amp * psi[i]; });
    for (size_t j = 0; j < wf.pts.size(); ++j) {
      size_t src = s.mirror ? (j < idx.size() ? idx[idx.size() - 1 - j] : idx[j - idx.size()]) : idx[j];
      emit("psi", tag, wf.pts[j].first, wf.pts[j].second, psi[src]);
    }
    fp.plot.curves.push_back(wf);
    ++fp.wavefunctions;
  }
  return fp;
}

inline const ds::Preset& preset_or_throw(const std::vector<ds::Preset>& cat, const std::string& name) {
  const auto* p = ds::find_preset(cat, name);
  if (!p) throw std::logic_error("missing built-in preset " + name);
  return *p;
}

inline Figure figure_example1(const std::string& id, const std::string& fig) {
  auto cat = ds::preset_catalog();
  Figure f;
  f.id = id;
  f.cols = 3;
  const std::vector<std::string> sides{"left", "center", "right"};
  f.panels = parallel_map<FigPanel>(3, [&](size_t i) {
    const auto& p = preset_or_throw(cat, "example1-" + fig + "-" + sides[i]);
    LevelPanelSpec s;
    s.name = sides[i];
    char t[96];
    std::snprintf(t, sizeof t, "mu0=%g, mu+=%g: 2U/(mu- z), 2E/(mu- z)", p.params.mu_0, p.params.mu_p);
    s.title = t;
    s.prob = ds::example1_potential(p.params);
    s.states = 4;
    s.display_scale = 2.0 / (p.params.mu_m * p.params.z);
    s.mirror = true;
    return level_panel(s);
  });
  f.caption = "Example 1 constant-mass potential on the full cell by parity, lowest four levels and eigenfunctions";
  return f;
}

inline std::vector<double> fig4_z_grid() {
  std::vector<double> z;
  for (int i = 10; i <= 100; ++i) z.push_back(double(i));
  return z;
}

inline Figure figure_4() {
  auto cat = ds::preset_catalog();
  Figure f;
  f.id = "f4";
  f.cols = 2;
  const std::vector<std::string> names{"fig4-a", "fig4-b", "fig4-c", "fig4-d"};
  const char* styles[] = {"dotted", "dashed", "dashdot", "longdash"};
  auto zs = fig4_z_grid();
  f.panels = parallel_map<FigPanel>(4, [&](size_t i) {
    const auto& p = preset_or_throw(cat, names[i]);
    FigPanel fp;
    fp.name = names[i].substr(5);
    char t[96];
    std::snprintf(t, sizeof t, "(%s) mu0=%g, mu+=%g: |E_n - E_k^FD|", fp.name.c_str(), p.params.mu_0, p.params.mu_p);
    fp.plot.title = t;
    fp.plot.log_y = true;
    fp.table = figure_table();
    for (int n = 0; n < 4; ++n) {
      auto minus = ds::fig4_difference(p.params, n, zs, -1);
      auto plus = ds::fig4_difference(p.params, n, zs, +1);
      Curve c{"n=" + std::to_string(n), styles[n], 0, {}};
      for (size_t j = 0; j < zs.size(); ++j) {
        c.pts.push_back({zs[j], minus[j]});
        fp.table.add({fp.name, "series", c.label, num(zs[j]), num(minus[j]), num(plus[j])});
      }
      fp.plot.curves.push_back(c);
      ++fp.series;
    }
    return fp;
  });
  f.caption = "|E_n - E_k^FD| against z (lower branch of the finite-dimensional formula, k = 2n + lambda + 2); aux holds "
              "the upper branch";
  return f;
}

inline ds::ModelParams with_z(ds::ModelParams p, double z) {
  p.z = z;
  return p;
}

inline std::string z_label(double z) { return std::isinf(z) ? "z=inf" : "z=" + num(z); }

inline Figure figure_5() {
  auto cat = ds::preset_catalog();
  const auto& p = preset_or_throw(cat, "example3-fig5");
  Figure f;
  f.id = "f5";
  f.cols = 1;
  FigPanel fp;
  fp.name = "main";
  fp.plot.title = "U(y, z), mu0=3/2, mu-=mu+=1";
  fp.table = figure_table();
  fp.plot.y_lo = 0.0;
  fp.plot.y_hi = 12.0;
  const double zs[] = {0.0, 0.4, 0.6, INFINITY};
  const char* styles[] = {"dashed", "solid", "solid", "solid"};
  const int colors[] = {0, 1, 2, 0};
  for (int j = 0; j < 4; ++j) {
    auto prob = ds::example3_problem(with_z(p.params, zs[j]));
    Curve c{z_label(zs[j]), styles[j], colors[j], {}};
    for (int i = 0; i < 600; ++i) {
      double y = -3.0 + 6.0 * (i + 0.5) / 600.0;  // never y = 0
      double u = prob.U(y);
      c.pts.push_back({y, u});
      fp.table.add({fp.name, "potential", c.label, num(y), num(u), num(u)});
    }
    fp.plot.curves.push_back(c);
    ++fp.potentials;
  }
  f.panels.push_back(fp);
  f.caption = "Example 3 potential from the infinite double well (z=0) to the oscillator (z -> inf)";
  return f;
}

inline Figure figure_6() {
  auto cat = ds::preset_catalog();
  const auto& p = preset_or_throw(cat, "example3-text");
  Figure f;
  f.id = "f6";
  f.cols = 2;
  const double zs[] = {0.0, 0.25, 0.5, INFINITY};
  f.panels = parallel_map<FigPanel>(4, [&](size_t i) {
    auto mp = with_z(p.params, zs[i]);
    LevelPanelSpec s;
    s.name = z_label(zs[i]);
    s.title = "U(y), mu0=mu-=mu+=1, " + s.name;
    s.prob = ds::example3_problem(mp, p.length);
    s.mirror = s.prob.y_min == 0.0;
    s.states = 4;
    return level_panel(s);
  });
  f.caption = "Example 3 potential with its lowest four levels and eigenfunctions";
  return f;
}

inline Figure figure_7(bool a) {
  auto cat = ds::preset_catalog();
  const auto& p = preset_or_throw(cat, a ? "dwt-khco3" : "dwt-zundel");
  Figure f;
  f.id = a ? "f7a" : "f7b";
  f.cols = 1;
  LevelPanelSpec s;
  s.name = a ? "khco3" : "zundel";
  s.title = a ? "u(y): a=23, b=360, d=70, c=2 sqrt 35" : "u(y): a=0, b=110^2, d=2(65^2-1/4)";
  s.prob = ds::dwt_problem(p.dwt);
  s.states = p.states;
  f.panels.push_back(level_panel(s));
  f.caption = "Double-well trigonometric potential with its lowest levels and eigenfunctions";
  return f;
}

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"f1", "f2", "f3", "f4", "f5", "f6", "f7a", "f7b"};
  return ids;
}

inline Figure build_figure(const std::string& id) {
  if (id == "f1") return figure_example1(id, "fig1");
  if (id == "f2") return figure_example1(id, "fig2");
  if (id == "f3") return figure_example1(id, "fig3");
  if (id == "f4") return figure_4();
  if (id == "f5") return figure_5();
  if (id == "f6") return figure_6();
  if (id == "f7a") return figure_7(true);
  if (id == "f7b") return figure_7(false);
  throw std::invalid_argument("unknown figure id '" + id + "'");
}

}  // namespace ds_cli
