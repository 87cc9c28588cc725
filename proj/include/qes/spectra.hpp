#pragma once
// Physical spectral reports: branch assembly and flagging, wavefunction
// normalization, and coupling-plane scans. Nothing is silently filtered;
// physicality is reported as flags.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qes/bethe.hpp"
#include "qes/models.hpp"
#include "qes/solve.hpp"

namespace qes {

struct BranchFlags {
  bool real_energy = false;
  bool nu_admissible = false;  // nu <= 1/2 (and real)
  bool roots_real = false;
  bool pole_clear = false;
  bool normalizable = false;
  bool degenerate_pair = false;  // shares its energy with another branch (|dE| <= 1e-6)
  bool singular_jacobian = false;
};

struct SpectrumBranch {
  BranchParams params;
  BranchFlags flags;
};

struct SpectrumReport {
  std::string model_id;  // "h2" | "h4"
  double omega = 0.0, gamma = 0.0, rho_fixed = 0.0;
  bool table_mode = false;
  int ell = 0, n = 0;
  std::vector<SpectrumBranch> branches;  // real first (by E), then complex (by Re E)
  SolverStats stats;
  double max_residual = 0.0;
  double energy_formula_max_delta = 0.0;  // closed-form E vs solved E
  double crosscheck_max_delta = -1.0;     // h2 n=1 elimination route, -1 if not run
  bool solver_failed = false;

  bool has_real_branch() const {
    for (const auto& b : branches)
      if (b.flags.real_energy) return true;
    return false;
  }
  std::size_t real_count() const {
    std::size_t c = 0;
    for (const auto& b : branches) c += b.flags.real_energy ? 1 : 0;
    return c;
  }
};

// Normalization constant N with int_0^rmax |N Psi|^2 dr = 1, by adaptive
// Simpson quadrature; rmax is extended until the tail is below quad_tol.
// Returns nullopt when the tail refuses to decay (non-normalizable).
namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, std::abs(whole) * tol + 1e-300, 48);
}

}  // namespace detail

inline std::optional<double> normalize(const ModelSpec& model, const BranchParams& branch,
                                       double r_max, double quad_tol = 1e-10) {
  auto wf = BranchWavefunction::make(model, branch);
  auto dens = [&](double r) {
    if (r <= 0.0) r = 1e-12;
    double p = wf.psi(r);
    return p * p;
  };
  double total = detail::integrate(dens, 1e-12, r_max, quad_tol);
  for (int ext = 0; ext < 12; ++ext) {
    double tail = detail::integrate(dens, r_max, 1.5 * r_max, quad_tol);
    if (tail <= quad_tol * std::max(total, 1e-300)) {
      if (!(total > 0.0) || !std::isfinite(total)) return std::nullopt;
      return 1.0 / std::sqrt(total);
    }
    total += tail;
    r_max *= 1.5;
  }
  return std::nullopt;  // tail never passed the decay test
}

namespace detail {

inline cplx value_of(const AlgebraicSystem& sys, const RawSolution& s, const std::string& u) {
  for (std::size_t i = 0; i < sys.unknowns.size(); ++i)
    if (sys.unknowns[i] == u) return s.values[i];
  return cplx(0.0, 0.0);
}

}  // namespace detail

// Full pipeline for one configuration: build the system, enumerate solutions,
// recompute energies from the closed-form expressions, flag and sort.
inline SpectrumReport enumerate_levels(const ModelSpec& model, H4Mode mode,
                                       const SolverConfig& cfg) {
  SpectrumReport rep;
  const bool is_h2 = std::holds_alternative<H2Spec>(model);
  rep.model_id = is_h2 ? "h2" : "h4";
  rep.table_mode = (mode == H4Mode::table_mode) && !is_h2;
  rep.ell = model_ell(model);
  rep.n = model_n(model);
  if (is_h2)
    rep.omega = std::get<H2Spec>(model).omega;
  else {
    rep.gamma = std::get<H4Spec>(model).gamma;
    rep.rho_fixed = std::get<H4Spec>(model).rho;
  }

  AlgebraicSystem sys = build_system(model, mode);
  auto sols = solve_system(sys, cfg, &rep.stats);
  rep.solver_failed = (rep.stats.converged == 0);

  for (const auto& s : sols) {
    BranchParams b;
    b.nu = detail::value_of(sys, s, "nu");
    b.energy = detail::value_of(sys, s, "E");
    b.g = b.nu * (1.0 - b.nu);
    b.residual = s.residual_inf;
    for (int i = 1; i <= rep.n; ++i)
      b.roots.push_back(detail::value_of(sys, s, "z" + std::to_string(i)));
    if (!is_h2) {
      b.kappa = detail::value_of(sys, s, "kappa");
      b.rho = rep.table_mode ? detail::value_of(sys, s, "rho") : cplx(rep.rho_fixed, 0.0);
    }
    rep.max_residual = std::max(rep.max_residual, s.residual_inf);

    // energies must agree with the closed-form expression rebuilt from the
    // other unknowns
    cplx Ec = is_h2 ? closed_form_energy_h2(std::get<H2Spec>(model), b.nu)
                    : closed_form_energy_h4(std::get<H4Spec>(model), b.nu, b.kappa, b.rho,
                                            b.roots);
    rep.energy_formula_max_delta =
        std::max(rep.energy_formula_max_delta, std::abs(Ec - b.energy));

    SpectrumBranch sb;
    sb.params = std::move(b);
    sb.flags.real_energy = sb.params.energy_real() && s.is_real;
    sb.flags.nu_admissible = sb.params.nu_real() && sb.params.nu.real() <= 0.5;
    sb.flags.roots_real = sb.params.roots_real();
    sb.flags.singular_jacobian = s.singular;
    sb.flags.pole_clear = true;
    for (const auto& z : sb.params.roots)
      for (double p : sys.z_poles)
        if (std::abs(z - p) <= 1e-8) sb.flags.pole_clear = false;
    if (s.is_real) {
      auto N = normalize(model, sb.params, is_h2 ? 20.0 : 10.0, 1e-8);
      sb.flags.normalizable = N.has_value();
    }
    rep.branches.push_back(std::move(sb));
  }

  // cross-check the closed-form elimination route where it exists
  if (is_h2 && rep.n == 1) {
    const auto& s2 = std::get<H2Spec>(model);
    auto red = reduce_h2_n1(s2.ell, s2.omega);
    rep.crosscheck_max_delta = 0.0;
    std::vector<const SpectrumBranch*> real_branches;
    for (const auto& b : rep.branches)
      if (b.flags.real_energy) real_branches.push_back(&b);
    if (real_branches.size() != red.branches.size()) {
      rep.crosscheck_max_delta = std::numeric_limits<double>::infinity();
    } else {
      for (const auto& rb : red.branches) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto* b : real_branches) {
          double d = std::abs(b->params.nu.real() - rb.nu);
          d = std::max(d, std::abs(b->params.energy.real() - rb.energy));
          d = std::max(d, std::abs(b->params.roots[0].real() - rb.z1));
          best = std::min(best, d);
        }
        rep.crosscheck_max_delta = std::max(rep.crosscheck_max_delta, best);
      }
    }
  }

  // sort: real branches by energy ascending, complex after by real part
  std::stable_sort(rep.branches.begin(), rep.branches.end(),
                   [](const SpectrumBranch& a, const SpectrumBranch& b) {
                     bool ra = a.flags.real_energy, rb = b.flags.real_energy;
                     if (ra != rb) return ra;
                     if (a.params.energy.real() != b.params.energy.real())
                       return a.params.energy.real() < b.params.energy.real();
                     return a.params.energy.imag() < b.params.energy.imag();
                   });

  // coincident-energy tagging among real branches
  for (std::size_t i = 0; i < rep.branches.size(); ++i)
    for (std::size_t j = i + 1; j < rep.branches.size(); ++j) {
      if (!rep.branches[i].flags.real_energy || !rep.branches[j].flags.real_energy) continue;
      if (std::abs(rep.branches[i].params.energy.real() -
                   rep.branches[j].params.energy.real()) <= 1e-6) {
        rep.branches[i].flags.degenerate_pair = true;
        rep.branches[j].flags.degenerate_pair = true;
      }
    }
  return rep;
}

// One sample of a coupling scan.
struct ScanSample {
  double gamma = 0.0;
  bool solved = false;
  std::size_t real_count = 0;
  std::size_t complex_count = 0;
  // real solutions as (rho, nu, E); complex ones as (rho, nu, E) with
  // nonzero imaginary parts
  std::vector<std::array<cplx, 3>> solutions;
};

struct ScanGrid {
  int n = 0, ell = 0;
  std::vector<ScanSample> samples;  // strictly increasing in gamma
};

// Log-uniform scan over gamma in table mode; per-sample failures are recorded
// and the scan continues.
inline ScanGrid scan_parameters(const H4Spec& tmpl, double gamma_lo, double gamma_hi,
                                int samples, const SolverConfig& cfg) {
  if (samples < 2) throw std::domain_error("scan_parameters: need at least 2 samples");
  if (!(gamma_lo > 0.0) || !(gamma_hi > gamma_lo))
    throw std::domain_error("scan_parameters: bad gamma range");
  ScanGrid grid;
  grid.n = tmpl.n;
  grid.ell = tmpl.ell;
  for (int k = 0; k < samples; ++k) {
    double t = static_cast<double>(k) / (samples - 1);
    double gamma = std::exp(std::log(gamma_lo) + t * (std::log(gamma_hi) - std::log(gamma_lo)));
    ScanSample sample;
    sample.gamma = gamma;
    H4Spec spec = tmpl;
    spec.gamma = gamma;
    try {
      auto rep = enumerate_levels(spec, H4Mode::table_mode, cfg);
      sample.solved = !rep.solver_failed;
      for (const auto& b : rep.branches) {
        sample.solutions.push_back({b.params.rho, b.params.nu, b.params.energy});
        if (b.flags.real_energy)
          sample.real_count++;
        else
          sample.complex_count++;
      }
    } catch (const std::exception&) {
      sample.solved = false;
    }
    grid.samples.push_back(std::move(sample));
  }
  return grid;
}

}  // namespace qes
