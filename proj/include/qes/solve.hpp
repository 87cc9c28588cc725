#pragma once
// Enumeration of all solutions of the generated algebraic systems: quasi-random
// multi-start damped Newton over the complex field, with closed-form univariate
// elimination for the H2 n=1 configuration. Deterministic by construction: the
// start sequence is a fixed Halton sequence and the merge step is
// order-insensitive with a deterministic tie-break.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qes/bethe.hpp"
#include "qes/models.hpp"
#include "qes/multipoly.hpp"
#include "qes/poly.hpp"

namespace qes {

struct SolverConfig {
  int starts = 20000;
  std::map<std::string, std::pair<double, double>> box;  // per-unknown overrides
  double newton_tol = 1e-12;
  double dedup_tol = 1e-8;
  int max_newton_iters = 200;
  int threads = 0;  // 0 = QES_THREADS env or hardware concurrency

  static std::pair<double, double> default_box(const std::string& name) {
    if (name.starts_with("z")) return {-50.0, 50.0};
    if (name == "nu") return {-40.0, 0.5};
    if (name == "E") return {-100.0, 100.0};
    if (name == "kappa") return {-100.0, 10.0};
    if (name == "rho") return {-20.0, 20.0};
    return {-50.0, 50.0};
  }

  std::pair<double, double> box_for(const std::string& name) const {
    auto it = box.find(name);
    if (it != box.end()) return it->second;
    // a bare "z" override applies to every root unknown
    if (name.starts_with("z")) {
      auto zit = box.find("z");
      if (zit != box.end()) return zit->second;
    }
    return default_box(name);
  }

  void validate() const {
    if (starts < 1) throw std::domain_error("SolverConfig: starts must be >= 1");
    if (!(dedup_tol > newton_tol))
      throw std::domain_error("SolverConfig: dedup_tol must exceed newton_tol");
  }

  int effective_threads() const {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("QES_THREADS")) {
      int t = std::atoi(env);
      if (t > 0) return t;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
  }
};

struct RawSolution {
  std::vector<cplx> values;   // aligned with system unknowns
  double residual_inf = 0.0;  // max_i |eq_i| / scale_i, re-evaluated after polish
  bool is_real = false;       // all imaginary parts <= 1e-8 (1 + |re|)
  bool singular = false;      // Jacobian numerically singular at the solution
};

struct SolverStats {
  long starts = 0;
  long converged = 0;
  long diverged = 0;
  long deduped = 0;
  long singular = 0;
  long pole_rejected = 0;
  long filter_rejected = 0;
};

namespace detail {

inline double halton(unsigned long long index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr int kHaltonBases[16] = {2,  3,  5,  7,  11, 13, 17, 19,
                                  23, 29, 31, 37, 41, 43, 47, 53};

// Equations and Jacobian flattened into power-table form: per evaluation point
// the powers x_v^e (e <= 8) are tabulated once and every term is a coefficient
// times table lookups.
struct CompiledSystem {
  struct Term {
    double c;
    int row;                 // equation index, or jacobian slot n + i*n + j
    std::uint8_t nf;         // number of factors
    std::array<std::uint8_t, 6> var;
    std::array<std::uint8_t, 6> exp;
  };
  std::vector<Term> eq_terms, jac_terms;
  std::vector<Term> scale_terms;  // |coef| copies of eq_terms, for residual scaling
  std::size_t n = 0;
  int max_exp = 1;

  static void flatten(const MultiPoly& p, int row, int& max_exp, std::vector<Term>& out) {
    for (const auto& [e, c] : p.terms) {
      Term t;
      t.c = c;
      t.row = row;
      t.nf = 0;
      for (std::size_t v = 0; v < e.size(); ++v)
        if (e[v] > 0) {
          t.var[t.nf] = static_cast<std::uint8_t>(v);
          t.exp[t.nf] = static_cast<std::uint8_t>(e[v]);
          max_exp = std::max(max_exp, e[v]);
          ++t.nf;
        }
      out.push_back(t);
    }
  }

  static CompiledSystem compile(const AlgebraicSystem& sys) {
    CompiledSystem cs;
    cs.n = sys.unknowns.size();
    for (std::size_t i = 0; i < sys.equations.size(); ++i) {
      const auto& eq = sys.equations[i];
      flatten(eq, static_cast<int>(i), cs.max_exp, cs.eq_terms);
      for (std::size_t j = 0; j < cs.n; ++j)
        flatten(eq.derivative(j), static_cast<int>(cs.n + i * cs.n + j), cs.max_exp,
                cs.jac_terms);
    }
    cs.scale_terms = cs.eq_terms;
    for (auto& t : cs.scale_terms) t.c = std::abs(t.c);
    return cs;
  }

  void pow_table(std::span<const cplx> x, std::vector<cplx>& tab) const {
    tab.assign(n * (max_exp + 1), cplx(1.0, 0.0));
    for (std::size_t v = 0; v < n; ++v)
      for (int e = 1; e <= max_exp; ++e) tab[v * (max_exp + 1) + e] = tab[v * (max_exp + 1) + e - 1] * x[v];
  }

  void eval(std::span<const cplx> x, std::vector<cplx>& F, std::vector<cplx>& tab) const {
    pow_table(x, tab);
    F.assign(n, cplx(0.0, 0.0));
    for (const auto& t : eq_terms) {
      cplx v{t.c, 0.0};
      for (int f = 0; f < t.nf; ++f) v *= tab[t.var[f] * (max_exp + 1) + t.exp[f]];
      F[t.row] += v;
    }
  }

  // F and J together (J stored row-major after the F block in out)
  void eval_full(std::span<const cplx> x, std::vector<cplx>& out,
                 std::vector<cplx>& tab) const {
    pow_table(x, tab);
    out.assign(n + n * n, cplx(0.0, 0.0));
    for (const auto& t : eq_terms) {
      cplx v{t.c, 0.0};
      for (int f = 0; f < t.nf; ++f) v *= tab[t.var[f] * (max_exp + 1) + t.exp[f]];
      out[t.row] += v;
    }
    for (const auto& t : jac_terms) {
      cplx v{t.c, 0.0};
      for (int f = 0; f < t.nf; ++f) v *= tab[t.var[f] * (max_exp + 1) + t.exp[f]];
      out[t.row] += v;
    }
  }

  // scale_i(x) = sum |coef| prod max(1, |x_v|)^e, a robust relative measure
  double residual_inf(std::span<const cplx> x, const std::vector<cplx>& F) const {
    std::vector<double> tab(n * (max_exp + 1), 1.0);
    for (std::size_t v = 0; v < n; ++v) {
      double b = std::max(1.0, std::abs(x[v]));
      for (int e = 1; e <= max_exp; ++e) tab[v * (max_exp + 1) + e] = tab[v * (max_exp + 1) + e - 1] * b;
    }
    std::vector<double> S(n, 0.0);
    for (const auto& t : scale_terms) {
      double v = t.c;
      for (int f = 0; f < t.nf; ++f) v *= tab[t.var[f] * (max_exp + 1) + t.exp[f]];
      S[t.row] += v;
    }
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      r = std::max(r, std::abs(F[i]) / (S[i] > 0.0 ? S[i] : 1.0));
    return r;
  }
};

// complex LU with partial pivoting; returns false when numerically singular
inline bool lu_solve(std::vector<std::vector<cplx>>& a, std::vector<cplx>& b) {
  const std::size_t n = a.size();
  double scale = 0.0;
  for (auto& row : a)
    for (auto& v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a[k][k]);
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > best) {
        best = std::abs(a[i][k]);
        piv = i;
      }
    if (best <= 1e-14 * scale) return false;
    if (piv != k) {
      std::swap(a[piv], a[k]);
      std::swap(b[piv], b[k]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      cplx m = a[i][k] / a[k][k];
      a[i][k] = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] -= m * a[k][j];
      b[i] -= m * b[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    cplx s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * b[j];
    b[i] = s / a[i][i];
  }
  return true;
}

struct NewtonOutcome {
  bool converged = false;
  bool singular = false;
  double residual = 0.0;
};

// damped Newton with Armijo backtracking on |F|^2; `exploring` enables an
// early bail-out for multistart sweeps (a start still far off after many
// iterations is abandoned rather than run to the hard cap)
inline NewtonOutcome newton(const CompiledSystem& cs, std::vector<cplx>& x, double tol,
                            int max_iters, bool exploring = false) {
  NewtonOutcome out;
  const std::size_t n = cs.n;
  std::vector<cplx> buf, Ft, step, tab;
  std::vector<cplx> xt(n);
  std::vector<std::vector<cplx>> J(n, std::vector<cplx>(n));
  cs.eval_full(x, buf, tab);
  double phi = 0.0;
  for (std::size_t i = 0; i < n; ++i) phi += std::norm(buf[i]);
  if (!std::isfinite(phi)) return out;

  for (int it = 0; it < max_iters; ++it) {
    std::vector<cplx> F(buf.begin(), buf.begin() + n);
    out.residual = cs.residual_inf(x, F);
    if (out.residual <= tol) {
      out.converged = true;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) J[i][j] = buf[n + i * n + j];
      std::vector<cplx> probe(n, cplx(1.0, 0.0));
      out.singular = !lu_solve(J, probe);
      return out;
    }
    if (exploring && it >= 60 && out.residual > 1e-6) return out;

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) J[i][j] = buf[n + i * n + j];
    step = F;
    for (auto& v : step) v = -v;
    if (!lu_solve(J, step)) return out;  // singular mid-iteration: give up

    double t = 1.0;
    bool accepted = false;
    for (int bs = 0; bs < 14; ++bs, t *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) xt[j] = x[j] + t * step[j];
      cs.eval(xt, Ft, tab);
      double phit = 0.0;
      for (auto& v : Ft) phit += std::norm(v);
      if (std::isfinite(phit) && phit <= (1.0 - 1e-4 * t) * phi) {
        x = xt;
        phi = phit;
        accepted = true;
        break;
      }
    }
    if (!accepted) return out;
    double xmax = 0.0;
    for (auto& v : x) xmax = std::max(xmax, std::abs(v));
    if (!std::isfinite(xmax) || xmax > 1e10) return out;
    cs.eval_full(x, buf, tab);
  }
  std::vector<cplx> F(buf.begin(), buf.begin() + n);
  out.residual = cs.residual_inf(x, F);
  out.converged = out.residual <= tol;
  return out;
}

inline bool nearly_real(const std::vector<cplx>& x) {
  for (const auto& v : x)
    if (std::abs(v.imag()) > 1e-8 * (1.0 + std::abs(v.real()))) return false;
  return true;
}

// canonical ordering of the z-block (root-permutation symmetry)
inline std::vector<cplx> canonical(const AlgebraicSystem& sys, std::vector<cplx> x) {
  std::size_t nz = 0;
  while (nz < sys.unknowns.size() && sys.unknowns[nz].starts_with("z")) ++nz;
  std::sort(x.begin(), x.begin() + nz, [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return x;
}

inline bool close_rel(const std::vector<cplx>& a, const std::vector<cplx>& b, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol * (1.0 + std::max(std::abs(a[i]), std::abs(b[i]))))
      return false;
  return true;
}

inline bool lex_less(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
  }
  return false;
}

}  // namespace detail

// Polish a candidate to newton_tol; divergence is reported in stats and the
// candidate discarded.
inline std::optional<RawSolution> polish(const AlgebraicSystem& sys, const SolverConfig& cfg,
                                         std::vector<cplx> start,
                                         SolverStats* stats = nullptr) {
  auto cs = detail::CompiledSystem::compile(sys);
  auto out = detail::newton(cs, start, cfg.newton_tol, cfg.max_newton_iters);
  if (!out.converged) {
    if (stats) stats->diverged++;
    return std::nullopt;
  }
  RawSolution s;
  s.values = std::move(start);
  s.residual_inf = out.residual;
  s.singular = out.singular;
  if (detail::nearly_real(s.values)) {
    for (auto& v : s.values) v = cplx(v.real(), 0.0);
    s.is_real = true;
  }
  return s;
}

// Enumerate solutions: quasi-random multi-start (half the starts carry
// imaginary seeds), Newton polish, pole-distance filtering, held-out filter
// conditions, permutation-aware dedup and conjugate completion.
inline std::vector<RawSolution> solve_system(const AlgebraicSystem& sys,
                                             const SolverConfig& cfg,
                                             SolverStats* stats_out = nullptr) {
  cfg.validate();
  sys.check_square();
  const std::size_t n = sys.unknowns.size();
  auto cs = detail::CompiledSystem::compile(sys);
  SolverStats stats;
  stats.starts = cfg.starts;

  std::vector<std::pair<double, double>> boxes;
  for (const auto& u : sys.unknowns) boxes.push_back(cfg.box_for(u));

  const int nthreads = std::max(1, std::min(cfg.effective_threads(), cfg.starts));
  std::vector<std::vector<RawSolution>> found(nthreads);
  std::vector<std::pair<long, long>> counts(nthreads, {0, 0});  // converged, diverged

  auto worker = [&](int tid, int lo, int hi) {
    std::vector<cplx> x(n);
    for (int s = lo; s < hi; ++s) {
      for (std::size_t j = 0; j < n; ++j) {
        double u = detail::halton(static_cast<unsigned long long>(s) + 1,
                                  detail::kHaltonBases[j % 16]);
        double re = boxes[j].first + u * (boxes[j].second - boxes[j].first);
        double im = 0.0;
        if (s % 2 == 1) {
          double v = detail::halton(static_cast<unsigned long long>(s) + 1,
                                    detail::kHaltonBases[(j + n) % 16]);
          im = (v - 0.5) * 0.5 * (boxes[j].second - boxes[j].first);
        }
        x[j] = cplx(re, im);
      }
      auto xx = x;
      auto out = detail::newton(cs, xx, cfg.newton_tol, cfg.max_newton_iters, true);
      if (!out.converged) {
        counts[tid].second++;
        continue;
      }
      counts[tid].first++;
      RawSolution sol;
      sol.values = std::move(xx);
      sol.residual_inf = out.residual;
      sol.singular = out.singular;
      if (detail::nearly_real(sol.values)) {
        for (auto& v : sol.values) v = cplx(v.real(), 0.0);
        sol.is_real = true;
      }
      found[tid].push_back(std::move(sol));
    }
  };

  if (nthreads == 1) {
    worker(0, 0, cfg.starts);
  } else {
    std::vector<std::thread> pool;
    int chunk = (cfg.starts + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back(worker, t, t * chunk, std::min((t + 1) * chunk, cfg.starts));
    for (auto& th : pool) th.join();
  }

  std::vector<RawSolution> all;
  for (int t = 0; t < nthreads; ++t) {
    stats.converged += counts[t].first;
    stats.diverged += counts[t].second;
    for (auto& s : found[t]) all.push_back(std::move(s));
  }

  // canonicalize the z-block, then filter
  std::vector<RawSolution> kept;
  for (auto& s : all) {
    s.values = detail::canonical(sys, std::move(s.values));
    bool pole_ok = true;
    for (std::size_t j = 0; j < n && pole_ok; ++j) {
      if (!sys.unknowns[j].starts_with("z")) continue;
      for (double p : sys.z_poles)
        if (std::abs(s.values[j] - p) <= 1e-8) {
          pole_ok = false;
          break;
        }
    }
    if (!pole_ok) {
      stats.pole_rejected++;
      continue;
    }
    bool filter_ok = true;
    for (const auto& f : sys.post_filters) {
      double sc = f.scale_at(std::span<const cplx>(s.values));
      if (sc == 0.0) sc = 1.0;
      if (std::abs(f.eval(std::span<const cplx>(s.values))) / sc > 1e-10) {
        filter_ok = false;
        break;
      }
    }
    if (!filter_ok) {
      stats.filter_rejected++;
      continue;
    }
    kept.push_back(std::move(s));
  }

  // deterministic dedup: sort lexicographically, then merge close vectors,
  // keeping the smallest-residual representative
  std::sort(kept.begin(), kept.end(), [](const RawSolution& a, const RawSolution& b) {
    return detail::lex_less(a.values, b.values);
  });
  std::vector<RawSolution> unique;
  for (auto& s : kept) {
    bool merged = false;
    for (auto& u : unique) {
      if (detail::close_rel(u.values, s.values, cfg.dedup_tol)) {
        stats.deduped++;
        if (s.residual_inf < u.residual_inf ||
            (s.residual_inf == u.residual_inf && detail::lex_less(s.values, u.values)))
          u = s;
        merged = true;
        break;
      }
    }
    if (!merged) unique.push_back(std::move(s));
  }

  // conjugate completion: the systems have real coefficients, so conjugates of
  // complex solutions are solutions; add any the multistart missed
  std::vector<RawSolution> conj_added;
  for (const auto& s : unique) {
    if (s.is_real) continue;
    std::vector<cplx> c(s.values);
    for (auto& v : c) v = std::conj(v);
    c = detail::canonical(sys, std::move(c));
    bool present = false;
    for (const auto& u : unique)
      if (detail::close_rel(u.values, c, cfg.dedup_tol)) {
        present = true;
        break;
      }
    for (const auto& u : conj_added)
      if (detail::close_rel(u.values, c, cfg.dedup_tol)) {
        present = true;
        break;
      }
    if (!present) {
      auto out = detail::newton(cs, c, cfg.newton_tol, cfg.max_newton_iters);
      if (out.converged) {
        RawSolution sc2;
        sc2.values = detail::canonical(sys, std::move(c));
        sc2.residual_inf = out.residual;
        sc2.singular = out.singular;
        conj_added.push_back(std::move(sc2));
      }
    }
  }
  for (auto& s : conj_added) unique.push_back(std::move(s));
  std::sort(unique.begin(), unique.end(), [](const RawSolution& a, const RawSolution& b) {
    return detail::lex_less(a.values, b.values);
  });
  for (auto& s : unique) stats.singular += s.singular ? 1 : 0;

  if (stats_out) *stats_out = stats;
  return unique;
}

// Merge solutions whose unknown vectors differ by <= tol in relative max-norm
// (root permutations already canonicalized); smallest residual wins.
inline std::vector<RawSolution> dedup(const AlgebraicSystem& sys,
                                      std::vector<RawSolution> sols, double tol) {
  for (auto& s : sols) s.values = detail::canonical(sys, std::move(s.values));
  std::sort(sols.begin(), sols.end(), [](const RawSolution& a, const RawSolution& b) {
    return detail::lex_less(a.values, b.values);
  });
  std::vector<RawSolution> unique;
  for (auto& s : sols) {
    bool merged = false;
    for (auto& u : unique)
      if (detail::close_rel(u.values, s.values, tol)) {
        if (s.residual_inf < u.residual_inf ||
            (s.residual_inf == u.residual_inf && detail::lex_less(s.values, u.values)))
          u = s;
        merged = true;
        break;
      }
    if (!merged) unique.push_back(std::move(s));
  }
  return unique;
}

// Closed-form route for H2 n=1: squaring the +- relation once gives a quartic
// in nu; spurious roots are rejected by back-substituting into the unsquared
// relation, and z1, E are recovered from the constraint and energy rows.
struct H2N1Branch {
  double nu, z1, energy;
};

struct H2N1Reduction {
  Poly nu_quartic;
  std::vector<H2N1Branch> branches;
};

inline H2N1Reduction reduce_h2_n1(int ell, double omega) {
  if (!(omega > 0.0)) throw std::domain_error("reduce_h2_n1: omega must be > 0");
  const double sq = std::sqrt(omega);
  const double l = ell;
  Poly A({l + 0.75, 2 * l + sq / 2 + 3, 1.0});
  Poly B({4 * l - 2 * sq + 3, 8.0});
  Poly quart = sub(mul(A, A), scale(add(mul(B, B), Poly::constant(16 * (2 * l + 3) * sq)),
                                   1.0 / 16.0));
  H2N1Reduction red;
  red.nu_quartic = quart;
  RootSet roots = all_roots(quart);
  for (double nu : roots.real_roots) {
    double lhs = nu * nu + nu * (2 * l + sq / 2 + 3);
    double D = std::pow(4 * l - 2 * sq + 8 * nu + 3, 2) + 16 * (2 * l + 3) * sq;
    if (D < 0.0) continue;
    double sD = std::sqrt(D);
    double rp = -l - 0.75 + 0.25 * sD, rm = -l - 0.75 - 0.25 * sD;
    if (std::min(std::abs(lhs - rp), std::abs(lhs - rm)) > 1e-9 * (1.0 + std::abs(lhs)))
      continue;  // spurious root introduced by squaring
    double z1 = (nu * nu + nu * (2 * l + sq / 2 + 5) + (2 * l - sq / 2 + 1.5)) / (2 * sq);
    double E = sq * (2 * nu + l + 3.5);
    red.branches.push_back({nu, z1, E});
  }
  std::sort(red.branches.begin(), red.branches.end(),
            [](const H2N1Branch& a, const H2N1Branch& b) { return a.nu < b.nu; });
  return red;
}

}  // namespace qes
