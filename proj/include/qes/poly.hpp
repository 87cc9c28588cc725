#pragma once
// Dense univariate real polynomials: arithmetic, pseudo-Hermite construction,
// and a companion-matrix root finder (balanced Hessenberg + shifted QR with
// Newton polishing).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qes {

using cplx = std::complex<double>;

struct Poly {
  // coeffs[k] multiplies z^k. Trailing structural zeros are trimmed; the zero
  // polynomial is represented as {0}. No epsilon trimming: degree changes must
  // be explicit.
  std::vector<double> coeffs{0.0};

  Poly() = default;
  explicit Poly(std::vector<double> c) : coeffs(std::move(c)) { trim(); }

  static Poly constant(double c) { return Poly({c}); }
  static Poly variable() { return Poly({0.0, 1.0}); }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool is_zero() const { return coeffs.size() == 1 && coeffs[0] == 0.0; }
  double coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(coeffs.size())) ? coeffs[k] : 0.0;
  }

  void trim() {
    while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
    if (coeffs.empty()) coeffs.push_back(0.0);
  }
};

inline double eval(const Poly& p, double x) {
  double y = 0.0;
  for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) y = y * x + *it;
  return y;
}

inline cplx eval(const Poly& p, cplx x) {
  cplx y = 0.0;
  for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) y = y * x + *it;
  return y;
}

inline Poly derivative(const Poly& p) {
  if (p.degree() == 0) return Poly();
  std::vector<double> d(p.coeffs.size() - 1);
  for (std::size_t k = 1; k < p.coeffs.size(); ++k)
    d[k - 1] = p.coeffs[k] * static_cast<double>(k);
  return Poly(std::move(d));
}

inline Poly add(const Poly& p, const Poly& q) {
  std::vector<double> c(std::max(p.coeffs.size(), q.coeffs.size()), 0.0);
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) c[k] += p.coeffs[k];
  for (std::size_t k = 0; k < q.coeffs.size(); ++k) c[k] += q.coeffs[k];
  return Poly(std::move(c));
}

inline Poly sub(const Poly& p, const Poly& q) {
  std::vector<double> c(std::max(p.coeffs.size(), q.coeffs.size()), 0.0);
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) c[k] += p.coeffs[k];
  for (std::size_t k = 0; k < q.coeffs.size(); ++k) c[k] -= q.coeffs[k];
  return Poly(std::move(c));
}

inline Poly mul(const Poly& p, const Poly& q) {
  if (p.is_zero() || q.is_zero()) return Poly();
  std::vector<double> c(p.coeffs.size() + q.coeffs.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.coeffs.size(); ++i)
    for (std::size_t j = 0; j < q.coeffs.size(); ++j) c[i + j] += p.coeffs[i] * q.coeffs[j];
  return Poly(std::move(c));
}

inline Poly scale(const Poly& p, double c) {
  std::vector<double> s(p.coeffs);
  for (double& v : s) v *= c;
  return Poly(std::move(s));
}

// H_m(r) = m! sum_{p=0}^{m/2} (2r)^{m-2p} / (p! (m-2p)!), m even >= 2.
// Even powers only, all coefficients strictly positive, leading coefficient 2^m.
inline Poly pseudo_hermite(int m) {
  if (m < 2 || m % 2 != 0)
    throw std::domain_error("pseudo_hermite: m must be a positive even integer");
  std::vector<double> c(static_cast<std::size_t>(m) + 1, 0.0);
  for (int p = 0; p <= m / 2; ++p) {
    int k = m - 2 * p;
    // m! / (p! k!) * 2^k, accumulated multiplicatively to stay exact in doubles
    double t = std::pow(2.0, k);
    for (int i = 1; i <= m; ++i) t *= i;
    for (int i = 1; i <= p; ++i) t /= i;
    for (int i = 1; i <= k; ++i) t /= i;
    c[k] = t;
  }
  return Poly(std::move(c));
}

struct RootSet {
  std::vector<double> real_roots;
  std::vector<std::pair<double, double>> complex_pairs;  // (re, im), im > 0
  double residual_bound = 0.0;  // max |p(root)| / (maxcoeff * max(1,|root|)^deg)
};

namespace detail {

// Parlett-Reinsch balancing of a dense matrix (in place).
inline void balance(std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  const double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(a[j][i]);
          r += std::abs(a[i][j]);
        }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0, s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        for (int j = 0; j < n; ++j) a[i][j] /= f;
        for (int j = 0; j < n; ++j) a[j][i] *= f;
      }
    }
  }
}

// Eigenvalues of an upper-Hessenberg complex matrix by single-shift QR with
// Wilkinson shifts and Givens rotations. Sizes here are tiny (degree <= ~10).
inline std::vector<cplx> hessenberg_qr_eigen(std::vector<std::vector<cplx>> h) {
  const int n = static_cast<int>(h.size());
  std::vector<cplx> eig(n);
  int hi = n - 1;
  int iter_total = 0;
  const int max_total = 200 * n;
  while (hi >= 0) {
    if (hi == 0) {
      eig[0] = h[0][0];
      break;
    }
    // deflation scan
    int lo = hi;
    while (lo > 0) {
      double off = std::abs(h[lo][lo - 1]);
      double diag = std::abs(h[lo - 1][lo - 1]) + std::abs(h[lo][lo]);
      if (off <= 1e-16 * (diag + 1e-300)) {
        h[lo][lo - 1] = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      eig[hi] = h[hi][hi];
      --hi;
      continue;
    }
    if (++iter_total > max_total)
      throw std::runtime_error("all_roots: QR iteration failed to converge");

    // Wilkinson shift from the trailing 2x2 of the active block
    cplx a = h[hi - 1][hi - 1], b = h[hi - 1][hi], c = h[hi][hi - 1], d = h[hi][hi];
    cplx tr = a + d, det = a * d - b * c;
    cplx disc = std::sqrt(tr * tr - 4.0 * det);
    cplx l1 = (tr + disc) / 2.0, l2 = (tr - disc) / 2.0;
    cplx shift = (std::abs(l1 - d) < std::abs(l2 - d)) ? l1 : l2;
    // occasional exceptional shift against stagnation
    if (iter_total % 31 == 0) shift = cplx(std::abs(h[hi][hi - 1]), std::abs(h[hi][hi]));

    for (int i = lo; i <= hi; ++i) h[i][i] -= shift;
    // QR by Givens on the Hessenberg band, then RQ
    std::vector<cplx> cs(hi), sn(hi);
    for (int k = lo; k < hi; ++k) {
      cplx x = h[k][k], y = h[k + 1][k];
      double norm = std::hypot(std::abs(x), std::abs(y));
      if (norm == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
        continue;
      }
      cs[k] = x / norm;
      sn[k] = y / norm;
      for (int j = k; j <= hi; ++j) {
        cplx t1 = h[k][j], t2 = h[k + 1][j];
        h[k][j] = std::conj(cs[k]) * t1 + std::conj(sn[k]) * t2;
        h[k + 1][j] = -sn[k] * t1 + cs[k] * t2;
      }
    }
    for (int k = lo; k < hi; ++k) {
      for (int i = lo; i <= std::min(k + 2, hi); ++i) {
        cplx t1 = h[i][k], t2 = h[i][k + 1];
        h[i][k] = t1 * cs[k] + t2 * sn[k];
        h[i][k + 1] = -t1 * std::conj(sn[k]) + t2 * std::conj(cs[k]);
      }
    }
    for (int i = lo; i <= hi; ++i) h[i][i] += shift;
  }
  return eig;
}

inline cplx newton_polish(const Poly& p, const Poly& dp, cplx x, int iters = 60) {
  cplx best = x;
  double best_abs = std::abs(eval(p, x));
  for (int i = 0; i < iters; ++i) {
    cplx f = eval(p, x), df = eval(dp, x);
    if (std::abs(df) == 0.0) break;
    cplx step = f / df;
    x -= step;
    double ax = std::abs(eval(p, x));
    if (ax < best_abs) {
      best_abs = ax;
      best = x;
    }
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
  }
  return best;
}

}  // namespace detail

// All roots of p via balanced companion matrix + shifted QR, polished by
// Newton iteration. Real/complex classification: |im| <= 1e-8 (1 + |re|),
// with near-real roots re-polished on the real axis first.
inline RootSet all_roots(const Poly& p) {
  const int n = p.degree();
  if (n < 1) throw std::domain_error("all_roots: degree must be >= 1");
  if (p.coeffs[n] == 0.0) throw std::domain_error("all_roots: leading coefficient is zero");

  std::vector<cplx> raw;
  if (n == 1) {
    raw.push_back(cplx(-p.coeffs[0] / p.coeffs[1], 0.0));
  } else if (n == 2) {
    double a = p.coeffs[2], b = p.coeffs[1], c = p.coeffs[0];
    cplx disc = std::sqrt(cplx(b * b - 4.0 * a * c, 0.0));
    // stable quadratic formula
    cplx q = -0.5 * (b + (b >= 0.0 ? disc : -disc));
    raw.push_back(q / a);
    raw.push_back(std::abs(q) > 0.0 ? c / q : cplx(0.0, 0.0));
  } else {
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (int i = 1; i < n; ++i) a[i][i - 1] = 1.0;
    for (int i = 0; i < n; ++i) a[i][n - 1] = -p.coeffs[i] / p.coeffs[n];
    detail::balance(a);
    std::vector<std::vector<cplx>> h(n, std::vector<cplx>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h[i][j] = a[i][j];
    raw = detail::hessenberg_qr_eigen(std::move(h));
  }

  const Poly dp = derivative(p);
  double maxc = 0.0;
  for (double c : p.coeffs) maxc = std::max(maxc, std::abs(c));

  RootSet rs;
  std::vector<cplx> complex_roots;
  double worst = 0.0;
  for (cplx r : raw) {
    r = detail::newton_polish(p, dp, r);
    if (std::abs(r.imag()) <= 1e-8 * (1.0 + std::abs(r.real()))) {
      // polish on the real axis before classifying
      cplx rr = detail::newton_polish(p, dp, cplx(r.real(), 0.0));
      r = cplx(rr.real(), 0.0);
      rs.real_roots.push_back(r.real());
    } else {
      complex_roots.push_back(r);
    }
    double sc = maxc * std::pow(std::max(1.0, std::abs(r)), n);
    worst = std::max(worst, std::abs(eval(p, r)) / sc);
  }

  // pair conjugates: keep im > 0 representatives, matching each against the
  // nearest conjugate partner
  std::vector<cplx> up, down;
  for (cplx r : complex_roots) (r.imag() > 0 ? up : down).push_back(r);
  std::sort(up.begin(), up.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  for (cplx r : up) rs.complex_pairs.emplace_back(r.real(), r.imag());
  // odd leftovers (should not happen for real polynomials) are forced real
  if (up.size() * 2 != complex_roots.size()) {
    rs.real_roots.clear();
    rs.complex_pairs.clear();
    std::sort(complex_roots.begin(), complex_roots.end(), [](cplx a, cplx b) {
      return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
    });
    for (cplx r : raw)
      if (std::abs(r.imag()) <= 1e-8 * (1.0 + std::abs(r.real())))
        rs.real_roots.push_back(r.real());
    std::size_t need = (raw.size() - rs.real_roots.size()) / 2;
    for (std::size_t i = 0; i < need && i < complex_roots.size(); ++i) {
      cplx r = complex_roots[complex_roots.size() - 1 - i];
      rs.complex_pairs.emplace_back(r.real(), std::abs(r.imag()));
    }
  }
  std::sort(rs.real_roots.begin(), rs.real_roots.end());
  rs.residual_bound = worst;
  return rs;
}

}  // namespace qes
