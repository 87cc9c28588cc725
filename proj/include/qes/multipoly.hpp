#pragma once
// Sparse multivariate polynomials over a named, ordered unknown list.
// Exponent vectors are kept in a canonical ordered map so iteration (and
// hence serialization and solver assembly) is deterministic.

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qes {

using cplx = std::complex<double>;

struct MultiPoly {
  std::vector<std::string> unknowns;           // ordered
  std::map<std::vector<int>, double> terms;    // exponent vector -> coefficient

  MultiPoly() = default;
  explicit MultiPoly(std::vector<std::string> names) : unknowns(std::move(names)) {}

  static MultiPoly constant(std::vector<std::string> names, double c) {
    MultiPoly p(std::move(names));
    if (c != 0.0) p.terms[std::vector<int>(p.unknowns.size(), 0)] = c;
    return p;
  }

  static MultiPoly var(std::vector<std::string> names, const std::string& name) {
    MultiPoly p(std::move(names));
    std::vector<int> e(p.unknowns.size(), 0);
    e[p.index_of(name)] = 1;
    p.terms[std::move(e)] = 1.0;
    return p;
  }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < unknowns.size(); ++i)
      if (unknowns[i] == name) return i;
    throw std::invalid_argument("MultiPoly: unknown name '" + name + "'");
  }

  bool is_zero() const { return terms.empty(); }

  int total_degree() const {
    int d = 0;
    for (const auto& [e, c] : terms) {
      int s = 0;
      for (int k : e) s += k;
      d = std::max(d, s);
    }
    return d;
  }

  void add_term(const std::vector<int>& e, double c) {
    if (c == 0.0) return;
    auto it = terms.find(e);
    if (it == terms.end()) {
      terms.emplace(e, c);
    } else {
      it->second += c;
      if (it->second == 0.0) terms.erase(it);
    }
  }

  MultiPoly& operator+=(const MultiPoly& o) {
    for (const auto& [e, c] : o.terms) add_term(e, c);
    return *this;
  }
  MultiPoly& operator-=(const MultiPoly& o) {
    for (const auto& [e, c] : o.terms) add_term(e, -c);
    return *this;
  }
  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }

  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    MultiPoly r(a.unknowns);
    std::vector<int> e(a.unknowns.size());
    for (const auto& [ea, ca] : a.terms)
      for (const auto& [eb, cb] : b.terms) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    return r;
  }

  friend MultiPoly operator*(double s, const MultiPoly& a) {
    MultiPoly r(a.unknowns);
    if (s == 0.0) return r;
    for (const auto& [e, c] : a.terms) r.terms[e] = s * c;
    return r;
  }

  MultiPoly derivative(std::size_t var) const {
    MultiPoly r(unknowns);
    for (const auto& [e, c] : terms) {
      if (e[var] == 0) continue;
      std::vector<int> d(e);
      d[var] -= 1;
      r.add_term(d, c * e[var]);
    }
    return r;
  }

  // substitute unknown -> numeric value, keeping the unknown list (its
  // exponent becomes 0 everywhere)
  MultiPoly substituted(std::size_t var, double value) const {
    MultiPoly r(unknowns);
    for (const auto& [e, c] : terms) {
      double f = c;
      for (int k = 0; k < e[var]; ++k) f *= value;
      std::vector<int> d(e);
      d[var] = 0;
      r.add_term(d, f);
    }
    return r;
  }

  template <typename T>
  T eval(std::span<const T> x) const {
    T y{};
    for (const auto& [e, c] : terms) {
      T t{c};
      for (std::size_t i = 0; i < e.size(); ++i)
        for (int k = 0; k < e[i]; ++k) t *= x[i];
      y += t;
    }
    return y;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [e, c] : terms) m = std::max(m, std::abs(c));
    return m;
  }

  // sum of |coef| * prod max(1,|x_i|)^e_i, a robust scale for relative residuals
  double scale_at(std::span<const cplx> x) const {
    double s = 0.0;
    for (const auto& [e, c] : terms) {
      double t = std::abs(c);
      for (std::size_t i = 0; i < e.size(); ++i) {
        double b = std::max(1.0, std::abs(x[i]));
        for (int k = 0; k < e[i]; ++k) t *= b;
      }
      s += t;
    }
    return s;
  }
};

// Flattened form for fast repeated evaluation inside Newton loops.
struct CompiledPoly {
  struct Term {
    double c;
    std::vector<std::pair<std::uint8_t, std::uint8_t>> factors;  // (var, exp)
  };
  std::vector<Term> terms;

  static CompiledPoly compile(const MultiPoly& p) {
    CompiledPoly cp;
    for (const auto& [e, c] : p.terms) {
      Term t;
      t.c = c;
      for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i] > 0) t.factors.emplace_back(static_cast<std::uint8_t>(i),
                                             static_cast<std::uint8_t>(e[i]));
      cp.terms.push_back(std::move(t));
    }
    return cp;
  }

  template <typename T>
  T eval(std::span<const T> x) const {
    T y{};
    for (const auto& t : terms) {
      T v{t.c};
      for (auto [i, e] : t.factors) {
        T b = x[i];
        for (int k = 1; k < e; ++k) b *= x[i];
        v *= b;
      }
      y += v;
    }
    return y;
  }
};

}  // namespace qes
