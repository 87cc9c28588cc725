#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qes/poly.hpp"

using namespace qes;

TEST_CASE("pseudo-Hermite low members", "[poly]") {
  auto h2 = pseudo_hermite(2);
  REQUIRE(h2.coeffs == std::vector<double>{2, 0, 4});
  auto h4 = pseudo_hermite(4);
  REQUIRE(h4.coeffs == std::vector<double>{12, 0, 48, 0, 16});
  auto h6 = pseudo_hermite(6);
  REQUIRE(h6.coeffs == std::vector<double>{120, 0, 720, 0, 480, 0, 64});

  REQUIRE_THROWS_AS(pseudo_hermite(3), std::domain_error);
  REQUIRE_THROWS_AS(pseudo_hermite(0), std::domain_error);
  REQUIRE_THROWS_AS(pseudo_hermite(-2), std::domain_error);
}

TEST_CASE("pseudo-Hermite matches direct summation and stays positive", "[poly]") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> uni(0.0, 5.0);
  for (int m : {2, 4, 6, 8, 10}) {
    auto H = pseudo_hermite(m);
    REQUIRE(H.coeffs[m] == std::pow(2.0, m));
    for (int k = 0; k <= m; ++k) {
      if (k % 2 == 1)
        REQUIRE(H.coeffs[k] == 0.0);
      else
        REQUIRE(H.coeffs[k] > 0.0);
    }
    for (int t = 0; t < 20; ++t) {
      double r = uni(rng);
      double direct = 0.0;
      for (int p = 0; p <= m / 2; ++p) {
        double term = 1.0;
        for (int i = 1; i <= m; ++i) term *= i;
        for (int i = 1; i <= p; ++i) term /= i;
        for (int i = 1; i <= m - 2 * p; ++i) term /= i;
        direct += term * std::pow(2.0 * r, m - 2 * p);
      }
      REQUIRE_THAT(eval(H, r), Catch::Matchers::WithinRel(direct, 1e-12));
    }
  }
  // positivity on a sampled grid
  auto H = pseudo_hermite(6);
  double mn = 1e300;
  for (double r = 0.0; r <= 20.0; r += 0.05) mn = std::min(mn, eval(H, r));
  REQUIRE(mn > 0.0);
}

TEST_CASE("eval and derivative basics", "[poly]") {
  Poly p({2, 0, 4});
  REQUIRE(eval(p, 0.0) == 2.0);
  REQUIRE(eval(p, 1.0) == 6.0);
  REQUIRE(eval(pseudo_hermite(4), 1.0) == 76.0);

  REQUIRE(derivative(p).coeffs == std::vector<double>{0, 8});
  REQUIRE(derivative(Poly({0, 8})).coeffs == std::vector<double>{8});
  REQUIRE(mul(Poly({0, 1}), Poly({0, 1})).coeffs == std::vector<double>{0, 0, 1});

  // zero polynomial representation and structural trimming
  REQUIRE(Poly({0.0, 0.0, 0.0}).coeffs == std::vector<double>{0});
  REQUIRE(sub(p, p).coeffs == std::vector<double>{0});
  REQUIRE(Poly({1.0, 0.0}).degree() == 0);
}

TEST_CASE("differentiation is linear", "[poly]") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> coef(-9, 9);
  std::uniform_int_distribution<int> deg(0, 8);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> pc(deg(rng) + 1), qc(deg(rng) + 1);
    for (auto& c : pc) c = coef(rng);
    for (auto& c : qc) c = coef(rng);
    double a = coef(rng), b = coef(rng);
    Poly p(pc), q(qc);
    Poly lhs = derivative(add(scale(p, a), scale(q, b)));
    Poly rhs = add(scale(derivative(p), a), scale(derivative(q), b));
    REQUIRE(lhs.coeffs == rhs.coeffs);
  }
}

TEST_CASE("all_roots on simple factorizations", "[poly]") {
  auto rs = all_roots(Poly({-1, 0, 1}));
  REQUIRE(rs.real_roots.size() == 2);
  REQUIRE_THAT(rs.real_roots[0], Catch::Matchers::WithinAbs(-1.0, 1e-12));
  REQUIRE_THAT(rs.real_roots[1], Catch::Matchers::WithinAbs(1.0, 1e-12));

  rs = all_roots(Poly({1, 0, 1}));
  REQUIRE(rs.real_roots.empty());
  REQUIRE(rs.complex_pairs.size() == 1);
  REQUIRE_THAT(rs.complex_pairs[0].first, Catch::Matchers::WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(rs.complex_pairs[0].second, Catch::Matchers::WithinAbs(1.0, 1e-12));

  REQUIRE_THROWS_AS(all_roots(Poly({3.0})), std::domain_error);
}

TEST_CASE("all_roots residual bound on random polynomials", "[poly][property]") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> coef(-10.0, 10.0);
  std::uniform_int_distribution<int> deg(1, 8);
  for (int t = 0; t < 1000; ++t) {
    int n = deg(rng);
    std::vector<double> c(n + 1);
    for (auto& v : c) v = coef(rng);
    if (std::abs(c[n]) < 0.1) c[n] = c[n] < 0 ? -1.0 : 1.0;
    Poly p(c);
    if (p.degree() < 1) continue;
    auto rs = all_roots(p);
    REQUIRE(rs.real_roots.size() + 2 * rs.complex_pairs.size() ==
            static_cast<std::size_t>(p.degree()));
    REQUIRE(rs.residual_bound <= 1e-10);
  }
}

TEST_CASE("all_roots quartic used by the n=1 reduction", "[poly]") {
  // z-quadratic at l=1, omega=0.1, nu as in the first reference row: the
  // larger real root back-substitutes into the constraint with small residual
  double l = 1, sq = std::sqrt(0.1), nu = 0.0765844575555532;
  Poly p({-(2 * l + 3), -(4 * l - 2 * sq + 8 * nu + 3), 4 * sq});
  auto rs = all_roots(p);
  REQUIRE(rs.real_roots.size() == 2);
  double z1 = rs.real_roots.back();
  REQUIRE_THAT(z1, Catch::Matchers::WithinAbs(6.160040299519886, 1e-9));
  // constraint: nu^2 + nu (2l + sq/2 + 5) = 2 sq z1 - (2l - sq/2 + 3/2)
  double lhs = nu * nu + nu * (2 * l + sq / 2 + 5);
  double rhs = 2 * sq * z1 - (2 * l - sq / 2 + 1.5);
  REQUIRE_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-6));
}
