#include <random>
#include <set>

#include <gtest/gtest.h>

#include <deformed_spectra/models.hpp>
#include <deformed_spectra/presets.hpp>

using namespace deformed_spectra;

namespace {

std::mt19937 rng(4242);

double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

ModelParams params(double z, double lambda, double mm, double m0, double mp, double eta = 0.0) {
  ModelParams p;
  p.z = z;
  p.lambda = lambda;
  p.mu_m = mm;
  p.mu_0 = m0;
  p.mu_p = mp;
  p.eta = eta;
  return p;
}

template <class F, class G>
double gap(F f, G g, double a, double b, int n = 120) {
  double worst = 0.0;
  for (int i = 1; i < n; ++i) {
    double y = a + (b - a) * i / n;
    double ref = g(y);
    worst = std::max(worst, std::abs(f(y) - ref) / std::max(1.0, std::abs(ref)));
  }
  return worst;
}

}  // namespace

TEST(Similarity, GenericWeightConjugatesToPdmForm) {
  for (int trial = 0; trial < 6; ++trial) {
    double z = uniform(0.2, 1.5), lam = uniform(0.0, 3.0);
    auto mm = CoefficientFunction::constant(uniform(0.5, 2.0));
    auto m0 = CoefficientFunction::constant(uniform(-1.0, 2.0));
    auto mp = coeff([c = uniform(-1.0, 1.0)](const Jet& X) { return X * (-I * c); });
    auto H = generic_hamiltonian(mm, m0, mp, z, lam);
    auto G = gamma_generic(mm, m0, z, lam);
    auto h = pdm_from_generic(mm, m0, mp, z, lam);
    for (const auto& f : standard_test_functions())
      for (double x : {0.3, 0.7}) {
        cplx r = similarity_conjugate_residual(H, G, h, f, x / z);
        EXPECT_LT(std::abs(r), 1e-8) << "z=" << z << " lambda=" << lam;
      }
  }
}

TEST(Similarity, DerivedWeightReproducesGenericPdm) {
  auto p = params(0.8, 1.5, 1.2, 0.7, 0.4);
  auto mm = CoefficientFunction::constant(p.mu_m), m0 = CoefficientFunction::constant(p.mu_0);
  auto mp = coeff([c = p.mu_p](const Jet& X) { return X * (-I * c); });
  auto H = generic_hamiltonian(mm, m0, mp, p.z, p.lambda);
  auto derived = pdm_from_operator(H), closed = pdm_from_generic(mm, m0, mp, p.z, p.lambda);
  for (double x : {0.2, 0.5, 1.1}) {
    EXPECT_LT(std::abs(derived.mass.eval(x) - closed.mass.eval(x)), 1e-10 * std::abs(closed.mass.eval(x)));
    EXPECT_LT(std::abs(derived.potential.eval(x) - closed.potential.eval(x)),
              1e-8 * std::max(1.0, std::abs(closed.potential.eval(x))));
  }
}

TEST(Pipeline, Example1MatchesClosedPotentialAtRandomCouplings) {
  for (int trial = 0; trial < 4; ++trial) {
    auto p = params(uniform(0.5, 3.0), uniform(0.5, 3.0), uniform(0.5, 2.0), uniform(0.5, 3.0), uniform(0.0, 2.0));
    auto pl = example1_pipeline(p);
    EXPECT_LT(gap(pl.problem.U, example1_potential(p).U, 0.05, M_PI / 2 - 0.05), 1e-8)
        << "z=" << p.z << " lambda=" << p.lambda << " mu0=" << p.mu_0 << " mu+=" << p.mu_p;
  }
}

TEST(Pipeline, Sl2MatchesClosedPotential) {
  auto p = params(0, 0.5, 1.3, 0.8, 0.6);
  EXPECT_LT(gap(sl2_pipeline(p).problem.U, sl2_problem(p).U, 0.2, 5.0), 1e-8);
}

TEST(Pipeline, Example3MatchesCorrectedPotential) {
  for (int trial = 0; trial < 3; ++trial) {
    auto p = params(uniform(0.2, 1.5), uniform(0.5, 2.5), uniform(0.5, 2.0), uniform(0.5, 2.0), uniform(0.3, 2.0));
    auto pl = example3_pipeline(p);
    EXPECT_LT(gap(pl.problem.U, [&](double y) { return example3_potential(p, y); }, 0.1, 5.0), 1e-8)
        << "z=" << p.z << " lambda=" << p.lambda;
  }
}

TEST(Example1, EigenfunctionsAreOrthonormal) {
  auto p = params(1.0, 2.0, 1.0, 1.5, 0.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = integrate([&](double y) { return example1_eigenfunction(p, i, y) * example1_eigenfunction(p, j, y); },
                           0.0, M_PI / 2, 1e-13);
      EXPECT_NEAR(v, i == j ? 1.0 : 0.0, 1e-10);
    }
}

TEST(Example1, EigenfunctionsSolveTheEquation) {
  auto p = params(0.7, 1.0, 1.4, 2.0, 0.0);
  auto prob = example1_potential(p);
  const double h = 1e-4;
  for (int n = 0; n < 4; ++n) {
    double E = example1_spectrum_exact(p, n);
    for (double y : {0.3, 0.8, 1.2}) {
      double f = example1_eigenfunction(p, n, y);
      double d2 = (example1_eigenfunction(p, n, y + h) - 2 * f + example1_eigenfunction(p, n, y - h)) / (h * h);
      double res = -d2 / (2.0 * prob.m0) + (prob.U(y) - E) * f;
      EXPECT_NEAR(res, 0.0, 1e-4 * std::max(1.0, E));
    }
  }
}

TEST(Example1, ClosedSpectrumMatchesNumericAtRandomCouplings) {
  for (int trial = 0; trial < 4; ++trial) {
    auto p = params(uniform(0.5, 2.0), uniform(0.5, 3.0), uniform(0.5, 2.0), uniform(0.0, 3.0), 0.0);
    auto sp = solve_spectrum(example1_potential(p), 4, 1e-9);
    for (int n = 0; n < 4; ++n) {
      EXPECT_NEAR(sp.entries[n].E / example1_spectrum_exact(p, n), 1.0, 1e-7);
      EXPECT_NEAR(example1_spectrum_lambda_form(p, n) / example1_spectrum_exact(p, n), 1.0, 1e-13);
    }
  }
}

TEST(Example1, FirstOrderSeriesMatchesQuadratureOracle) {
  for (int trial = 0; trial < 5; ++trial) {
    auto p = params(uniform(5.0, 40.0), 2.0, 1.0, uniform(0.0, 2.0), uniform(0.1, 5.0));
    int n = trial % 4;
    EXPECT_NEAR(example1_perturbation_e1(p, n).value / example1_perturbation_oracle(p, n), 1.0, 1e-6)
        << "z=" << p.z << " n=" << n;
  }
}

TEST(Example1, FirstOrderShiftIsLinearInMuPlus) {
  auto p = params(15.0, 2.0, 1.0, 1.0, 1.0), q = p;
  q.mu_p = 3.0;
  for (int n = 0; n < 3; ++n)
    EXPECT_NEAR(example1_perturbation_e1(q, n).value / example1_perturbation_e1(p, n).value, 3.0, 1e-8);
}

TEST(FiniteDim, SelectionRuleByParity) {
  // Odd d: k = 0, 2, .., d-1, giving d levels.  Even d: k = 1, 3, .., d+1,
  // two levels more than d.
  auto p = params(1.0, 2.0, 1.0, 1.0, 0.5);
  for (int d = 1; d < 12; ++d) {
    auto k = finite_dim_k_values(d);
    EXPECT_EQ(k.front(), d % 2 ? 0 : 1);
    EXPECT_EQ(k.back(), d % 2 ? d - 1 : d + 1);
    for (auto w : {FiniteDim::ek, FiniteDim::ekfd1, FiniteDim::ex2fd})
      EXPECT_EQ(int(finite_dim_eigenvalues(w, p, d).size()), d % 2 ? d : d + 2) << "d=" << d;
  }
  auto e = finite_dim_eigenvalues(FiniteDim::ek, p, 3);
  EXPECT_EQ(e, (std::vector<double>{0.0, 2.0 + 2.0, 2.0 - 2.0}));
  EXPECT_THROW(finite_dim_k_values(0), std::invalid_argument);
}

TEST(FiniteDim, Example2IsTheUpperBranch) {
  for (int trial = 0; trial < 5; ++trial) {
    auto p = params(uniform(0.3, 2.0), 2.0, uniform(0.5, 2.0), uniform(0.0, 2.0), uniform(0.0, 2.0));
    for (int n = 0; n < 5; ++n) {
      int k = 2 * n + 4;
      EXPECT_NEAR(finite_dim_value(FiniteDim::ex2fd, p, k, +1) / example2_spectrum(p, n).real(), 1.0, 1e-13);
    }
  }
}

TEST(FiniteDim, Fig4DifferenceShrinksWithZ) {
  auto p = params(10, 2, 1, 2, 0.5);
  for (int n = 0; n < 3; ++n) {
    auto d = fig4_difference(p, n, {10, 30, 60, 100});
    for (size_t i = 1; i < d.size(); ++i) EXPECT_LT(d[i], d[i - 1]);
  }
}

TEST(Example2, PotentialIsIndependentOfEta) {
  auto p = params(1, 2, 1, 2, 1);
  auto U0 = example2_pipeline(p).problem.U;
  for (double eta : {0.3, 1.5}) {
    p.eta = eta;
    EXPECT_LT(gap(example2_pipeline(p).problem.U, U0, 0.05, M_PI / 2 - 0.05), 1e-9);
    EXPECT_LT(gap(example2_pipeline_closed_form(p).problem.U, U0, 0.05, M_PI / 2 - 0.05), 1e-9);
  }
}

TEST(Example2, BrokenPhaseIsRejected) {
  auto p = params(1, 2, 1, 0, -1);
  EXPECT_THROW(alpha_beta_from(p, Example::example2), std::domain_error);
  EXPECT_NE(example2_spectrum(p, 0).imag(), 0.0);
}

TEST(Example2, BoxLevelsAndAmplitude) {
  auto p = params(1, 2, 1, 0, 0);
  auto box = example2_box_problem(p);
  auto sp = refine(box, 4, 1e-10);
  for (int n = 0; n < 4; ++n) {
    auto b = example2_box_limit(p, n + 1);
    EXPECT_NEAR(sp.entries[n].E, b.epsilon, 1e-8);
    double nrm = integrate([&](double y) { return std::pow(b.amplitude * std::sin((n + 1) * y), 2); }, 0.0, M_PI);
    EXPECT_NEAR(nrm, 1.0, 1e-13);
  }
  EXPECT_THROW(example2_box_limit(p, 0), std::invalid_argument);
}

TEST(Example3, LimitsAndPole) {
  auto p = params(1e-3, 1, 1, 1, 1);
  for (double y : {0.5, 1.0, 2.0})
    EXPECT_NEAR(example3_potential(p, y) / example3_limit(p, y, Example3Limit::z_to_zero), 1.0, 1e-3);
  EXPECT_FALSE(example3_has_pole(p));
  p.mu_p = 2.0;
  EXPECT_TRUE(example3_has_pole(p));
  EXPECT_EQ(example3_problem(p).y_min, 0.0);
  p.mu_p = 1.0;
  EXPECT_LT(example3_problem(p).y_min, 0.0);
}

TEST(Dwt, SymmetricFamilyMatchesNumeric) {
  DwtParams w{0.0, 10.0, 0.0, 3.75};
  auto sp = solve_spectrum(dwt_problem(w), 4, 1e-9);
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(sp.entries[n].E / dwt_symmetric_spectrum(10.0, dwt_order(w), n), 1.0, 1e-6);
}

TEST(Dwt, HeunFamilyMatchesNumeric) {
  DwtParams w{5.0, 40.0, std::sqrt(12.0), 12.0};
  ASSERT_TRUE(dwt_is_heun_family(w));
  auto ev = dwt_heun_eigenvalues(w, 4);
  auto sp = solve_spectrum(dwt_problem(w), 4, 1e-9);
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(ev[n] / sp.entries[n].E, 1.0, 1e-6);
}

TEST(Dwt, CouplingsMapToShapeParameters) {
  auto w = dwt_from_couplings(2.0, 0.5, 1.0, 2.0, 3.0, 4.0);
  EXPECT_DOUBLE_EQ(w.a, 2.0);
  EXPECT_DOUBLE_EQ(w.d, 8.0);
}

TEST(Presets, CatalogIsConsistent) {
  auto cat = preset_catalog();
  auto names = preset_names(cat);
  std::set<std::string> unique(names.begin(), names.end());
  EXPECT_EQ(unique.size(), names.size());
  for (const auto& p : cat) {
    auto f = preset_regime(p);
    EXPECT_EQ(f.bound, p.flags.bound) << p.name;
    EXPECT_EQ(f.broken_phase, p.flags.broken_phase) << p.name;
    EXPECT_EQ(f.heun_family, p.flags.heun_family) << p.name;
    EXPECT_EQ(f.symmetric, p.flags.symmetric) << p.name;
  }
  EXPECT_TRUE(find_preset(cat, "example2-broken")->flags.broken_phase);
  EXPECT_TRUE(find_preset(cat, "dwt-khco3-heun")->flags.heun_family);
  EXPECT_FALSE(find_preset(cat, "dwt-khco3")->flags.heun_family);
  EXPECT_TRUE(find_preset(cat, "dwt-zundel")->flags.symmetric);
  EXPECT_EQ(find_preset(cat, "nope"), nullptr);
}

TEST(Presets, SetParamUpdatesFlags) {
  auto cat = preset_catalog();
  Preset p = *find_preset(cat, "example2");
  EXPECT_FALSE(set_param(p, "nonsense", 1.0));
  EXPECT_TRUE(set_param(p, "mu_0", 0.0));
  EXPECT_TRUE(set_param(p, "mu_p", -1.0));
  EXPECT_TRUE(p.flags.broken_phase);
  EXPECT_THROW(set_param(p, "states", 2.5), std::invalid_argument);
  EXPECT_THROW(set_param(p, "L", -1.0), std::invalid_argument);
  Preset d = *find_preset(cat, "dwt-cross");
  EXPECT_TRUE(set_param(d, "a_s", 3.0));
  EXPECT_FALSE(d.flags.symmetric);
}
