#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qes/spectra.hpp"

using namespace qes;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
SolverConfig quick(int starts) {
  SolverConfig cfg;
  cfg.starts = starts;
  return cfg;
}
}  // namespace

TEST_CASE("enumerate_levels: h2 n=0 contains the bare oscillator level", "[spectra]") {
  H2Spec s{1.0, 0, 0};
  auto rep = enumerate_levels(s, H4Mode::fixed_couplings, quick(400));
  REQUIRE(rep.model_id == "h2");
  REQUIRE(rep.real_count() == 2);
  bool found = false;
  for (const auto& b : rep.branches)
    if (std::abs(b.params.nu.real()) < 1e-10) {
      found = true;
      REQUIRE_THAT(b.params.energy.real(), WithinAbs(1.5, 1e-10));
      REQUIRE(b.flags.nu_admissible);
      REQUIRE(b.flags.normalizable);
    }
  REQUIRE(found);
  REQUIRE(rep.energy_formula_max_delta <= 1e-9);
}

TEST_CASE("enumerate_levels: h2 n=2 reproduces the three tabulated levels", "[spectra]") {
  H2Spec s{0.1, 1, 2};
  auto rep = enumerate_levels(s, H4Mode::fixed_couplings, quick(2500));
  std::vector<double> Es;
  for (const auto& b : rep.branches)
    if (b.flags.real_energy) Es.push_back(b.params.energy.real());
  REQUIRE(std::is_sorted(Es.begin(), Es.end()));
  for (double expect : {-5.00847, -2.93886, 1.88151}) {
    double best = 1e9;
    for (double e : Es) best = std::min(best, std::abs(e - expect));
    REQUIRE(best <= 1e-4);
  }
  // the fourth real branch carries nu > 1/2 and is flagged inadmissible
  int inadmissible = 0;
  for (const auto& b : rep.branches)
    if (b.flags.real_energy && !b.flags.nu_admissible) inadmissible++;
  REQUIRE(inadmissible == 1);
  REQUIRE(rep.energy_formula_max_delta <= 1e-9);
  REQUIRE(rep.max_residual <= 1e-10);
}

TEST_CASE("enumerate_levels: h2 n=1 cross-checks against the elimination route",
          "[spectra]") {
  H2Spec s{0.1, 3, 1};
  auto rep = enumerate_levels(s, H4Mode::fixed_couplings, quick(2000));
  REQUIRE(rep.crosscheck_max_delta >= 0.0);
  REQUIRE(rep.crosscheck_max_delta <= 1e-8);
}

TEST_CASE("enumerate_levels: h4 table mode reference row l=5", "[spectra]") {
  H4Spec s{0.1, 0.0, 5, 0};
  auto rep = enumerate_levels(s, H4Mode::table_mode, quick(2500));
  bool found = false;
  for (const auto& b : rep.branches) {
    if (!b.flags.real_energy) continue;
    if (std::abs(b.params.rho.real() - (-0.61608)) < 1e-4 &&
        std::abs(b.params.kappa.real() - (-4.00181)) < 1e-4 &&
        std::abs(b.params.nu.real() - 0.08194) < 1e-4 &&
        std::abs(b.params.energy.real() - (-3.95976)) < 1e-4)
      found = true;
  }
  REQUIRE(found);
  REQUIRE(rep.energy_formula_max_delta <= 1e-9);
}

TEST_CASE("flags are re-derivable pure predicates of the stored fields", "[spectra]") {
  H2Spec s{0.1, 1, 2};
  auto rep = enumerate_levels(s, H4Mode::fixed_couplings, quick(1500));
  for (const auto& b : rep.branches) {
    REQUIRE(b.flags.nu_admissible ==
            (b.params.nu.imag() == 0.0 && b.params.nu.real() <= 0.5));
    REQUIRE(b.flags.roots_real == b.params.roots_real());
    bool pole_clear = true;
    for (const auto& z : b.params.roots)
      for (double p : {0.0, -0.5})
        if (std::abs(z - p) <= 1e-8) pole_clear = false;
    REQUIRE(b.flags.pole_clear == pole_clear);
  }
}

TEST_CASE("normalize: Gaussian moment and re-integration", "[spectra]") {
  // nu=0, l=0, n=0, omega=1: int_0^inf r^2 exp(-r^2) dr = sqrt(pi)/4
  H2Spec s{1.0, 0, 0};
  BranchParams b;
  b.nu = 0.0;
  b.g = 0.0;
  b.energy = 1.5;
  auto N = normalize(s, b, 12.0, 1e-10);
  REQUIRE(N.has_value());
  REQUIRE_THAT(*N, WithinRel(std::sqrt(4.0 / std::sqrt(M_PI)), 1e-8));

  // re-integration of |N Psi|^2 gives 1 within the quadrature tolerance
  auto wf = BranchWavefunction::make(ModelSpec{s}, b);
  double total = 0.0;
  int M = 200000;
  double rmax = 12.0, h = rmax / M;
  for (int i = 0; i < M; ++i) {
    double r = (i + 0.5) * h;
    double v = (*N) * wf.psi(r);
    total += v * v * h;
  }
  REQUIRE_THAT(total, WithinAbs(1.0, 1e-6));

  // invariance under r_max doubling once the tail test passes
  auto N2 = normalize(s, b, 24.0, 1e-10);
  REQUIRE_THAT(*N2, WithinRel(*N, 1e-9));
}

TEST_CASE("normalize: reference branch is normalizable", "[spectra]") {
  H2Spec s{0.1, 1, 1};
  BranchParams b;
  b.nu = 0.0765844575555532;
  b.g = b.nu * (1.0 - b.nu);
  b.energy = 1.4714612109245784;
  b.roots = {cplx(6.160040299519886, 0.0)};
  auto N = normalize(s, b, 20.0, 1e-10);
  REQUIRE(N.has_value());
  REQUIRE(*N > 0.0);
}

TEST_CASE("complex sector: (gamma, n, l) = (1, 1, 1) has no real branch", "[spectra]") {
  H4Spec s{1.0, 0.0, 1, 1};
  auto rep = enumerate_levels(s, H4Mode::table_mode, quick(6000));
  REQUIRE_FALSE(rep.has_real_branch());
  REQUIRE(rep.branches.size() >= 1);  // complex branches exist and are reported
  // complex branches sorted after real ones, by real part
  for (std::size_t i = 1; i < rep.branches.size(); ++i)
    REQUIRE(rep.branches[i - 1].params.energy.real() <=
            rep.branches[i].params.energy.real() + 1e-12);
}

TEST_CASE("scan_parameters: minimal scan and consistency with single-point runs",
          "[spectra]") {
  H4Spec tmpl{1.0, 0.0, 1, 0};
  auto grid = scan_parameters(tmpl, 1.0, 4.0, 2, quick(800));
  REQUIRE(grid.samples.size() == 2);
  REQUIRE(grid.samples[0].gamma < grid.samples[1].gamma);
  for (const auto& smp : grid.samples) {
    REQUIRE(smp.solved);
    H4Spec one = tmpl;
    one.gamma = smp.gamma;
    auto rep = enumerate_levels(one, H4Mode::table_mode, quick(800));
    REQUIRE(rep.real_count() == smp.real_count);
  }
  REQUIRE_THROWS_AS(scan_parameters(tmpl, 1.0, 4.0, 1, quick(10)), std::domain_error);
  REQUIRE_THROWS_AS(scan_parameters(tmpl, -1.0, 4.0, 4, quick(10)), std::domain_error);
}
