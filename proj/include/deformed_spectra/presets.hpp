#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "models.hpp"

namespace deformed_spectra {

enum class ModelKind { example1, sl2, example2, box, example3, dwt };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::example1: return "example1";
    case ModelKind::sl2: return "sl2";
    case ModelKind::example2: return "example2";
    case ModelKind::box: return "box";
    case ModelKind::example3: return "example3";
    case ModelKind::dwt: return "dwt";
  }
  return "?";
}

inline ModelKind model_kind_from(const std::string& s) {
  for (auto k : {ModelKind::example1, ModelKind::sl2, ModelKind::example2, ModelKind::box, ModelKind::example3,
                 ModelKind::dwt})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown model '" + s + "'");
}

// What a preset is expected to exercise.  Checked against the parameters by
// preset_regime() so a hand-written preset file cannot silently lie.
struct RegimeFlags {
  bool bound = true;         // alpha, beta > 1 (or a confining DWT/box)
  bool broken_phase = false;  // complex tau
  bool heun_family = false;   // DWT with c_s = sqrt(d_s)
  bool symmetric = false;     // DWT with a_s = c_s = 0
  bool closed_form = false;   // an analytic spectrum exists
};

struct Preset {
  std::string name;
  std::string description;
  ModelKind kind = ModelKind::example1;
  ModelParams params;
  DwtParams dwt;
  int states = 4;
  double length = 8.0;  // half-length of the Example-3 / sl(2) box
  RegimeFlags flags;
};

inline RegimeFlags preset_regime(const Preset& p) {
  RegimeFlags f;
  const auto& m = p.params;
  switch (p.kind) {
    case ModelKind::example1: {
      auto ab = alpha_beta_from(m, Example::example1);
      f.bound = ab.bound;
      f.closed_form = m.mu_p == 0.0;
      break;
    }
    case ModelKind::sl2:
      f.bound = m.mu_0 * m.mu_0 + m.mu_p * m.mu_m > 0;
      f.closed_form = true;
      break;
    case ModelKind::example2: {
      double t2 = m.mu_0 * m.mu_0 + 2.0 * m.mu_p * m.mu_m;
      f.broken_phase = t2 < 0;
      f.bound = !f.broken_phase && alpha_beta_from(m, Example::example2).bound;
      f.closed_form = !f.broken_phase;
      break;
    }
    case ModelKind::box:
      f.broken_phase = m.mu_0 * m.mu_0 + 2.0 * m.mu_p * m.mu_m < 0;
      f.closed_form = !f.broken_phase;
      break;
    case ModelKind::example3:
      f.closed_form = false;
      break;
    case ModelKind::dwt:
      f.heun_family = dwt_is_heun_family(p.dwt);
      f.symmetric = p.dwt.a == 0.0 && p.dwt.c == 0.0;
      f.closed_form = f.heun_family || f.symmetric;
      break;
  }
  return f;
}

namespace detail {
inline Preset make_preset(std::string name, std::string desc, ModelKind kind, ModelParams mp, int states = 4) {
  Preset p;
  p.name = std::move(name);
  p.description = std::move(desc);
  p.kind = kind;
  p.params = mp;
  p.states = states;
  p.flags = preset_regime(p);
  return p;
}

inline Preset make_dwt(std::string name, std::string desc, DwtParams w, int states) {
  Preset p;
  p.name = std::move(name);
  p.description = std::move(desc);
  p.kind = ModelKind::dwt;
  p.dwt = w;
  p.states = states;
  p.flags = preset_regime(p);
  return p;
}

inline ModelParams pt(double z, double lambda, double mm, double m0, double mp, double eta = 0.0) {
  ModelParams p;
  p.z = z;
  p.lambda = lambda;
  p.mu_m = mm;
  p.mu_0 = m0;
  p.mu_p = mp;
  p.eta = eta;
  return p;
}
}  // namespace detail

// Figures 1-3 fix lambda = 2 and mu0 but not z or mu-; energies there are in
// units of mu- z, so mu- = z = 1 loses nothing.
inline std::vector<Preset> preset_catalog() {
  using detail::make_dwt;
  using detail::make_preset;
  using detail::pt;
  std::vector<Preset> c;
  const std::pair<const char*, double> figs[] = {{"fig1", 2.0}, {"fig2", 1.5}, {"fig3", 1.0}};
  const std::pair<const char*, double> panels[] = {{"left", 0.0}, {"center", -26.0}, {"right", 26.0}};
  for (auto [f, mu0] : figs)
    for (auto [side, mup] : panels)
      c.push_back(make_preset(std::string("example1-") + f + "-" + side,
                              "trigonometric Poschl-Teller image, lambda=2, mu0=" + std::to_string(mu0).substr(0, 4) +
                                  ", mu+=" + std::to_string(int(mup)),
                              ModelKind::example1, pt(1, 2, 1, mu0, mup)));
  c.push_back(make_preset("example1-pert", "perturbative regime: lambda=2, z=20, mu-=1, mu0=0, mu+=0.5",
                          ModelKind::example1, pt(20, 2, 1, 0, 0.5)));
  const char* f4[] = {"fig4-a", "fig4-b", "fig4-c", "fig4-d"};
  const double f4m0[] = {0, 0, 2, 2}, f4mp[] = {0.5, 10, 0.5, 10};
  for (int i = 0; i < 4; ++i)
    c.push_back(make_preset(f4[i], "finite-dimensional comparison panel; z is scanned over [10, 100]", ModelKind::example1,
                            pt(10, 2, 1, f4m0[i], f4mp[i])));
  {
    auto p = make_preset("sl2-warmup", "undeformed sl(2,R) limit: harmonic + 1/u^2", ModelKind::sl2, pt(0, 0, 1, 0, 1));
    p.length = 12.0;
    c.push_back(p);
  }
  c.push_back(make_preset("example2", "eta-family, unbroken phase (tau = sqrt 6)", ModelKind::example2,
                          pt(1, 2, 1, 2, 1, 0.5)));
  c.push_back(make_preset("example2-broken", "mu0=0, mu+=-1: complex tau", ModelKind::example2, pt(1, 2, 1, 0, -1)));
  c.push_back(make_preset("box", "eta -> infinity box, tau = 0, mu- = z = 1", ModelKind::box, pt(1, 2, 1, 0, 0)));
  c.push_back(make_preset("example3-fig5", "figure f5 couplings: mu0=3/2, mu-=mu+=1", ModelKind::example3,
                          pt(0.4, 1, 1, 1.5, 1)));
  c.push_back(make_preset("example3-text", "reference couplings: mu0=mu-=mu+=1", ModelKind::example3, pt(0.25, 1, 1, 1, 1)));
  c.push_back(make_dwt("dwt-khco3", "KHCO3: a=23, b=360, d=70, c=2 sqrt 35 (outside the Heun family)",
                       {23.0, 360.0, 2.0 * std::sqrt(35.0), 70.0}, 5));
  c.push_back(make_dwt("dwt-khco3-heun", "KHCO3 a, b, d with c = sqrt d (Heun family)",
                       {23.0, 360.0, std::sqrt(70.0), 70.0}, 5));
  c.push_back(make_dwt("dwt-zundel", "Zundel ion: a=c=0, b=110^2, d=2(65^2-1/4)",
                       {0.0, 110.0 * 110.0, 0.0, 2.0 * (65.0 * 65.0 - 0.25)}, 6));
  c.push_back(make_dwt("dwt-cross", "a=c=0, m=2 (d=3.75), b=10: Heun and spheroidal both apply", {0.0, 10.0, 0.0, 3.75},
                       5));
  return c;
}

inline std::vector<std::string> preset_names(const std::vector<Preset>& cat) {
  std::vector<std::string> n;
  for (const auto& p : cat) n.push_back(p.name);
  return n;
}

inline const Preset* find_preset(const std::vector<Preset>& cat, const std::string& name) {
  for (const auto& p : cat)
    if (p.name == name) return &p;
  return nullptr;
}

// Sets one named parameter; returns false for an unknown key.
inline bool set_param(Preset& p, const std::string& key, double v) {
  auto& m = p.params;
  static const std::map<std::string, double ModelParams::*> mp{
      {"z", &ModelParams::z},       {"lambda", &ModelParams::lambda}, {"mu_m", &ModelParams::mu_m},
      {"mu_0", &ModelParams::mu_0}, {"mu_p", &ModelParams::mu_p},     {"eta", &ModelParams::eta},
      {"g", &ModelParams::g},       {"c1", &ModelParams::c1},         {"c2", &ModelParams::c2},
      {"c3", &ModelParams::c3},     {"c4", &ModelParams::c4},         {"m0", &ModelParams::m0}};
  static const std::map<std::string, double DwtParams::*> dp{
      {"a_s", &DwtParams::a}, {"b_s", &DwtParams::b}, {"c_s", &DwtParams::c}, {"d_s", &DwtParams::d}};
  if (auto it = mp.find(key); it != mp.end()) {
    m.*(it->second) = v;
  } else if (auto jt = dp.find(key); jt != dp.end()) {
    p.dwt.*(jt->second) = v;
  } else if (key == "states") {
    if (v < 1 || v != std::floor(v)) throw std::invalid_argument("states must be a positive integer");
    p.states = int(v);
  } else if (key == "L") {
    if (!(v > 0)) throw std::invalid_argument("L must be positive");
    p.length = v;
  } else {
    return false;
  }
  // Couplings g, c1..c4 feed the DWT parameters.
  if (p.kind == ModelKind::dwt && (key == "g" || key == "z" || key[0] == 'c') && key != "c_s")
    if (m.g != 0.0 && m.z != 0.0) p.dwt = dwt_from_couplings(m.g, m.z, m.c1, m.c2, m.c3, m.c4);
  p.flags = preset_regime(p);
  return true;
}

}  // namespace deformed_spectra
