#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qes/models.hpp"

using namespace qes;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("spec validation", "[models]") {
  REQUIRE_THROWS_AS((H2Spec{-1.0, 0, 0}).validate(), std::domain_error);
  REQUIRE_THROWS_AS((H2Spec{1.0, -2, 0}).validate(), std::domain_error);
  REQUIRE_THROWS_AS((H4Spec{0.0, 0.0, 0, 0}).validate(), std::domain_error);
  REQUIRE_NOTHROW((H2Spec{0.1, -1, 2}).validate());
}

TEST_CASE("potential_h2 basics", "[models]") {
  REQUIRE_THROWS_AS(potential_h2(0.0, 1.0, 0.5), std::domain_error);
  REQUIRE_THROWS_AS(potential_h2(-1.0, 1.0, 0.5), std::domain_error);
  for (double r : {0.3, 1.0, 2.5})
    REQUIRE_THAT(potential_h2(r, 0.7, 0.0), WithinRel(0.5 * 0.7 * r * r, 1e-15));
  // r -> 0+ limit is 2g
  REQUIRE_THAT(potential_h2(1e-9, 1.0, 0.37), WithinAbs(2 * 0.37, 1e-8));
  // spot value at r=1: omega/2 - 2g/9
  double nu = 0.07658, g = nu * (1 - nu);
  REQUIRE_THAT(potential_h2(1.0, 0.1, g), WithinRel(0.05 - 2 * g / 9.0, 1e-12));
}

TEST_CASE("potential_h4 basics", "[models]") {
  REQUIRE_THROWS_AS(potential_h4(0.0, 1.0, 0.0, 0.0, 0.1), std::domain_error);
  for (double r : {0.4, 1.3})
    REQUIRE_THAT(potential_h4(r, 0.2, -0.3, 0.7, 0.0),
                 WithinRel(0.5 * (0.2 * std::pow(r, 6) - 0.3 * std::pow(r, 4) + 0.7 * r * r),
                           1e-14));
  // r -> 0+ limit is g
  REQUIRE_THAT(potential_h4(1e-10, 1.0, 0.0, 0.0, 0.29), WithinAbs(0.29, 1e-8));
  // finite spot value with the l=1 reference parameters
  double nu = 0.03143, g = nu * (1 - nu);
  REQUIRE(std::isfinite(potential_h4(1.0, 0.1, -0.40708, -1.87883, g)));
}

TEST_CASE("ode_system_h2 coefficients", "[models]") {
  H2Spec s{0.1, 1, 1};
  auto t = ode_system_h2(s);
  REQUIRE(t.P.coeffs == std::vector<double>{0, 2, 4});
  REQUIRE(t.Q.size() == 3);
  REQUIRE(t.W.size() == 2);

  double sq = std::sqrt(0.1);
  std::vector<cplx> at(t.unknowns.size(), 0.0);
  // direct transcription at (nu, E) = (0.3, 0.7)
  std::size_t inu = 0, iE = 0;
  for (std::size_t i = 0; i < t.unknowns.size(); ++i) {
    if (t.unknowns[i] == "nu") inu = i;
    if (t.unknowns[i] == "E") iE = i;
  }
  at[inu] = 0.3;
  at[iE] = 0.7;
  double nu = 0.3, E = 0.7, g = nu * (1 - nu), l = 1;
  REQUIRE_THAT(t.Q[0].eval(std::span<const cplx>(at)).real(), WithinRel(2 * l + 3, 1e-14));
  REQUIRE_THAT(t.Q[1].eval(std::span<const cplx>(at)).real(),
               WithinRel(4 * l - 2 * sq + 8 * nu + 3, 1e-14));
  REQUIRE_THAT(t.Q[2].eval(std::span<const cplx>(at)).real(), WithinRel(-4 * sq, 1e-14));
  REQUIRE_THAT(t.W[1].eval(std::span<const cplx>(at)).real(),
               WithinRel(2 * E - sq * (4 * nu + 2 * l + 3), 1e-14));
  REQUIRE_THAT(t.W[0].eval(std::span<const cplx>(at)).real(),
               WithinRel(4 * nu * (l + 1) - 0.5 * sq * (l + 1.5) + 0.5 * E - 2 * g, 1e-13));

  // nu = 0, E = sqrt(w)(l + 3/2): the linear-in-z coefficient of W vanishes
  at[inu] = 0.0;
  at[iE] = sq * (l + 1.5);
  REQUIRE_THAT(t.W[1].eval(std::span<const cplx>(at)).real(), WithinAbs(0.0, 1e-15));
}

TEST_CASE("ode_system_h4 coefficients", "[models]") {
  H4Spec s{0.1, -0.40708, 1, 0};
  auto t = ode_system_h4(s, true);
  double sg = std::sqrt(0.1);
  REQUIRE(t.P.coeffs == std::vector<double>{0, 3, 12, 4});
  REQUIRE(t.Q.size() == 5);
  REQUIRE(t.W.size() == 4);

  std::vector<cplx> at(t.unknowns.size(), 0.0);
  std::size_t inu = 0, iE = 0, ik = 0, ir = 0;
  for (std::size_t i = 0; i < t.unknowns.size(); ++i) {
    if (t.unknowns[i] == "nu") inu = i;
    if (t.unknowns[i] == "E") iE = i;
    if (t.unknowns[i] == "kappa") ik = i;
    if (t.unknowns[i] == "rho") ir = i;
  }
  // leading and constant coefficients of Q
  at[inu] = 0.2;
  at[ir] = -0.5;
  REQUIRE_THAT(t.Q[4].eval(std::span<const cplx>(at)).real(), WithinRel(-4 * sg, 1e-14));
  REQUIRE_THAT(t.Q[0].eval(std::span<const cplx>(at)).real(), WithinRel(3 * (1 + 1.5), 1e-14));
  REQUIRE_THAT(t.Q[3].eval(std::span<const cplx>(at)).real(),
               WithinRel(-(12 * sg + 2 * (-0.5) / sg), 1e-14));

  // at the l=1 reference branch all four W coefficients vanish (n=0 closure)
  at[inu] = 0.031430048202993555;
  at[iE] = -0.5068321629680669;
  at[ik] = -1.8788308483316531;
  at[ir] = -0.4070753960722693;
  for (int k = 0; k < 4; ++k)
    REQUIRE_THAT(t.W[k].eval(std::span<const cplx>(at)).real(), WithinAbs(0.0, 1e-11));
}

TEST_CASE("g = nu(1-nu) round trip", "[models][property]") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(-10.0, 0.5);
  for (int t = 0; t < 1000; ++t) {
    double nu = uni(rng);
    double g = nu * (1 - nu);
    double back = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * g));
    REQUIRE_THAT(back, WithinAbs(nu, 1e-12 * (1 + std::abs(nu))));
  }
}

TEST_CASE("wavefunction closed forms", "[models]") {
  // n=0, nu=0: Psi = r^(l+1) exp(-sq/2 r^2) up to the H^nu = 1 factor
  H2Spec s{0.25, 2, 0};
  BranchParams b;
  b.nu = 0.0;
  b.g = 0.0;
  b.energy = std::sqrt(0.25) * (2 + 1.5);
  double sq = 0.5;
  for (double r : {0.2, 1.0, 3.0})
    REQUIRE_THAT(wavefunction(s, b, r),
                 WithinRel(std::pow(r, 3) * std::exp(-0.5 * sq * r * r), 1e-13));
  // r -> 0+ limit vanishes for l >= 0
  REQUIRE(std::abs(wavefunction(s, b, 1e-8)) < 1e-20);
  REQUIRE_THROWS_AS(wavefunction(s, b, 0.0), std::domain_error);

  // node at sqrt(z1) for a positive real root
  H2Spec s1{0.1, 1, 1};
  BranchParams b1;
  b1.nu = 0.0765844575555532;
  b1.g = b1.nu * (1.0 - b1.nu);
  b1.energy = 1.4714612109245784;
  b1.roots = {cplx(6.160040299519886, 0.0)};
  double rn = std::sqrt(6.160040299519886);
  REQUIRE(wavefunction(s1, b1, rn - 1e-3) * wavefunction(s1, b1, rn + 1e-3) < 0.0);

  // conjugate pairs fold into a real quadratic factor
  BranchParams bc;
  bc.nu = 0.1;
  bc.g = bc.nu * (1.0 - bc.nu);
  bc.energy = 1.0;
  bc.roots = {cplx(0.5, 0.7), cplx(0.5, -0.7)};
  H2Spec s2{0.1, 1, 2};
  double v = wavefunction(s2, bc, 1.3);
  double z = 1.3 * 1.3;
  double quad = (z - 0.5) * (z - 0.5) + 0.49;
  REQUIRE_THAT(v / quad,
               WithinRel(std::pow(1.3, 2) * std::pow(eval(pseudo_hermite(2), 1.3), 0.1) *
                             std::exp(-std::sqrt(0.1) / 2 * z) / 1.0,
                         1e-12));
  // unpaired complex roots are rejected
  BranchParams bad = bc;
  bad.roots = {cplx(0.5, 0.7), cplx(0.4, -0.7)};
  REQUIRE_THROWS_AS(wavefunction(s2, bad, 1.0), std::domain_error);
}

TEST_CASE("reconstruct_potential: bare oscillator for the g=0 branch", "[models]") {
  H2Spec s{0.3, 1, 0};
  BranchParams b;
  b.nu = 0.0;
  b.g = 0.0;
  b.energy = std::sqrt(0.3) * (1 + 1.5);
  std::vector<double> grid;
  for (double r = 0.1; r <= 10.0; r += 0.17) grid.push_back(r);
  auto rec = reconstruct_potential(s, b, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(rec.valid[i]);
    REQUIRE_THAT(rec.values[i], WithinRel(0.5 * 0.3 * grid[i] * grid[i], 1e-10));
  }
}

TEST_CASE("reconstruct_potential: exactly solvable full-line point", "[models]") {
  // at (omega, g) = (1, -2), nu = -1, l = -1, E = -3/2 the closed-form state
  // (2r^2+1)^{-1} e^{-r^2/2} is a textbook eigenfunction of the printed
  // potential; the reconstruction must reproduce that potential pointwise
  H2Spec s{1.0, -1, 0};
  BranchParams b;
  b.nu = -1.0;
  b.g = -2.0;
  b.energy = -1.5;
  std::vector<double> grid;
  for (double r = 0.05; r <= 8.0; r += 0.11) grid.push_back(r);
  auto rec = reconstruct_potential(s, b, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(rec.valid[i]);
    REQUIRE_THAT(rec.values[i], WithinAbs(potential_h2(grid[i], 1.0, -2.0), 1e-12));
  }
}

TEST_CASE("reconstruct_potential deviates from the printed rational term on table branches",
          "[models]") {
  // The solved branches are eigenpairs of their reconstructed potentials; the
  // printed closed-form potential differs from the reconstruction away from
  // g = 0 (documented transcription inconsistency, see README). The deviation
  // is O(1) on the first reference row.
  H2Spec s{0.1, 1, 1};
  BranchParams b;
  b.nu = 0.0765844575555532;
  b.g = b.nu * (1.0 - b.nu);
  b.energy = 1.4714612109245784;
  b.roots = {cplx(6.160040299519886, 0.0)};
  std::vector<double> grid;
  for (double r = 0.1; r <= 10.0; r += 0.1) grid.push_back(r);
  auto rec = reconstruct_potential(s, b, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!rec.valid[i]) continue;
    worst = std::max(worst, std::abs(rec.values[i] - potential_h2(grid[i], 0.1, b.g.real())));
  }
  REQUIRE(worst > 1.0);
}

TEST_CASE("reconstruct_potential flags node points", "[models]") {
  H2Spec s{0.1, 1, 1};
  BranchParams b;
  b.nu = 0.0765844575555532;
  b.g = b.nu * (1.0 - b.nu);
  b.energy = 1.4714612109245784;
  double z1 = 6.160040299519886;
  b.roots = {cplx(z1, 0.0)};
  std::vector<double> grid = {1.0, std::sqrt(z1), 3.0};
  auto rec = reconstruct_potential(s, b, grid);
  REQUIRE(rec.valid[0]);
  REQUIRE_FALSE(rec.valid[1]);
  REQUIRE(rec.valid[2]);
}
