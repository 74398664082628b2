#pragma once

// Gaussian wave packets transmitted through a compact-support profile.
//
// For an initial packet confined to x < 0, the exact solution beyond the
// profile (x > L) is
//
//   psi(x, t) = (2 pi)^{-1/2} int dk phi(k) t(k) e^{i(kx - hbar k^2 t / 2m)}
//             + sum_b <b|psi_0> b(x) e^{-i E_b t / hbar},
//
// where the integral runs over the whole real k axis, t(-k) = t(k)^* carries
// the left-moving components, and the sum runs over bound states. The free
// packet is the same integral with t = 1.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "invis/error.hpp"
#include "invis/parallel.hpp"
#include "invis/poles.hpp"
#include "invis/scatter.hpp"
#include "invis/units.hpp"

namespace invis {

struct GaussianSpec {
  double sigma_nm = 0.5;
  double x0_nm = -5.0;
  double E0_eV = 0.06;

  void validate() const {
    if (!(sigma_nm > 0.0)) throw ValidationError("gaussian: sigma must be positive");
    if (!(x0_nm < 0.0)) throw ValidationError("gaussian: x0 must be negative");
    if (!(E0_eV > 0.0)) throw ValidationError("gaussian: E0 must be positive");
  }
  /// |x0| / (2 sigma) > 1 keeps the initial tail away from the profile.
  [[nodiscard]] bool tail_condition() const { return std::abs(x0_nm) / (2.0 * sigma_nm) > 1.0; }
  /// Fraction of the initial norm lying in x > 0.
  [[nodiscard]] double tail_leak() const {
    return 0.5 * std::erfc(std::abs(x0_nm) / (std::sqrt(2.0) * sigma_nm));
  }
};

/// phi(k) = (2 sigma^2 / pi)^{1/4} exp(-sigma^2 (k - k0)^2) exp(-i (k - k0) x0), unit norm.
class MomentumProfile {
public:
  MomentumProfile(const GaussianSpec& g, const PhysicalParams& p)
      : sigma_(g.sigma_nm), x0_(g.x0_nm), k0_(k_of_E(g.E0_eV, p)),
        norm_(std::pow(2.0 * g.sigma_nm * g.sigma_nm / kPi, 0.25)) {
    g.validate();
  }

  [[nodiscard]] cplx operator()(double k) const {
    const double q = k - k0_;
    return norm_ * std::exp(-sigma_ * sigma_ * q * q) * std::polar(1.0, -q * x0_);
  }
  [[nodiscard]] double k0() const { return k0_; }
  /// Standard deviation of |phi|^2.
  [[nodiscard]] double width() const { return 1.0 / (2.0 * sigma_); }
  /// Fraction of the norm carried by k < 0.
  [[nodiscard]] double negative_fraction() const {
    return 0.5 * std::erfc(k0_ / (std::sqrt(2.0) * width()));
  }

private:
  double sigma_, x0_, k0_, norm_;
};

inline MomentumProfile momentum_profile(const GaussianSpec& g, const PhysicalParams& p) {
  return MomentumProfile(g, p);
}

/// Closed-form free evolution of the Gaussian.
inline cplx free_gaussian(const GaussianSpec& g, const PhysicalParams& p, double x, double t_fs) {
  const double k0 = k_of_E(g.E0_eV, p);
  const double beta = 0.5 * p.hbar_over_m() * t_fs;  // hbar t / 2m, nm^2
  const cplx a{g.sigma_nm * g.sigma_nm, beta};
  const double d = x - g.x0_nm - 2.0 * beta * k0;
  const double pref = std::pow(2.0 * g.sigma_nm * g.sigma_nm / kPi, 0.25) / std::sqrt(2.0 * kPi);
  return pref * std::sqrt(kPi / a) * std::exp(-d * d / (4.0 * a)) *
         std::polar(1.0, k0 * x - beta * k0 * k0);
}

struct PacketTrace {
  double x_nm = 0.0;
  double t0_fs = 0.0;  ///< (x - x0) / v0
  std::vector<double> t_fs;
  std::vector<cplx> psi;
  std::vector<cplx> psi_free;
  std::vector<double> xi;        ///< Re(psi_free^* psi)
  std::vector<double> rho_free;  ///< |psi_free|^2
  std::vector<double> abs_psi_sq;
  // diagnostics
  double tail_leak = 0.0;
  double negative_k_fraction = 0.0;
  int bound_states = 0;
  int quadrature_nodes = 0;
  double self_convergence = 0.0;  ///< max |xi_N - xi_2N| / max rho_free
  std::vector<std::string> warnings;

  [[nodiscard]] std::vector<double> t_over_t0() const {
    std::vector<double> out(t_fs.size());
    for (std::size_t i = 0; i < t_fs.size(); ++i) out[i] = t_fs[i] / t0_fs;
    return out;
  }
};

struct PacketOptions {
  double k_half_width_sigmas = 8.0;  ///< integrate over k0 +- this many widths 1/(2 sigma)
  double max_phase_per_panel = 12.0; ///< radians of oscillation per 20-point panel
  double convergence_tol = 1e-6;     ///< relative to peak rho_free
  int max_doublings = 4;
  bool include_bound_states = true;
};

namespace detail {

struct Node {
  double k;
  double w;
};

/// 20-point Gauss-Legendre nodes on the panels defined by sorted edges.
inline std::vector<Node> gauss_nodes(std::span<const double> edges) {
  using G = boost::math::quadrature::gauss<double, 20>;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  std::vector<Node> nodes;
  nodes.reserve(edges.size() * 20);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double c = 0.5 * (edges[i] + edges[i + 1]), h = 0.5 * (edges[i + 1] - edges[i]);
    for (std::size_t j = 0; j < a.size(); ++j) {
      nodes.push_back({c - h * a[j], h * w[j]});
      if (a[j] != 0.0) nodes.push_back({c + h * a[j], h * w[j]});
    }
  }
  return nodes;
}

/// Uniform panels over [lo, hi] plus geometric grading toward k = 0, where
/// near-threshold poles make t(k) vary on scales far below the panel width.
inline std::vector<double> panel_edges(double lo, double hi, int n_uniform) {
  std::vector<double> e;
  for (int i = 0; i <= n_uniform; ++i) e.push_back(lo + (hi - lo) * i / n_uniform);
  if (lo < 0.0 && hi > 0.0) {
    const double h = (hi - lo) / n_uniform;
    e.push_back(0.0);
    for (double s = h / 2.0; s > 1e-9; s /= 2.0) {
      e.push_back(s);
      e.push_back(-s);
    }
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

struct BoundTerm {
  double gamma;
  cplx amplitude_at_L;  ///< <b|psi0> b(L)
  double energy;        ///< E_b < 0
};

/// Normalized bound state b(x) with b = e^{gamma x} for x < 0; returns its
/// overlap with the initial Gaussian times b(L).
inline BoundTerm bound_term(const PotentialProfile& profile, const Pole& pole, const GaussianSpec& g,
                            const PhysicalParams& p) {
  using boost::math::quadrature::gauss_kronrod;
  const double gamma = pole.gamma;
  const double h2m = p.hbar2_over_2m();
  const auto sl = profile.slices();
  double psi = 1.0, dpsi = gamma, interior = 0.0;
  for (const auto& s : sl) {
    const cplx qsq = detail::qsq_of(cplx{0.0, gamma}, s.height_eV, h2m);
    auto f = [&](double y) {
      const auto b = detail::slice_block(qsq, y);
      const double v = (b.c * psi + b.s * dpsi).real();
      return v * v;
    };
    double err = 0.0;
    interior += gauss_kronrod<double, 15>::integrate(f, 0.0, s.width_nm, 15, 1e-10, &err);
    const auto b = detail::slice_block(qsq, s.width_nm);
    const double np = (b.c * psi + b.s * dpsi).real();
    const double nd = (b.q * psi + b.c * dpsi).real();
    psi = np;
    dpsi = nd;
  }
  const double norm2 = 0.5 / gamma + interior + psi * psi * 0.5 / gamma;
  // <b|psi0> with b ~ e^{gamma x} over the packet's support (x < 0).
  const double k0 = k_of_E(g.E0_eV, p);
  const cplx z{gamma, k0};
  const double A = std::pow(2.0 * kPi * g.sigma_nm * g.sigma_nm, -0.25);
  const cplx overlap = A * 2.0 * g.sigma_nm * std::sqrt(kPi) *
                       std::exp(z * g.x0_nm + g.sigma_nm * g.sigma_nm * z * z);
  return {gamma, overlap * psi / norm2, -h2m * gamma * gamma};
}

}  // namespace detail

/// psi(x, t) and psi_free(x, t) at a fixed x beyond the profile.
inline PacketTrace evolve_transmitted(const PotentialProfile& profile, const GaussianSpec& g,
                                      double x_nm, std::span<const double> t_grid,
                                      const PacketOptions& opt = {}) {
  g.validate();
  const auto& p = profile.params();
  if (!(x_nm >= profile.length())) throw ValidationError("evolve_transmitted: x must lie beyond L");
  if (t_grid.empty()) throw ValidationError("evolve_transmitted: empty time grid");
  const MomentumProfile phi(g, p);
  PacketTrace tr;
  tr.x_nm = x_nm;
  tr.t0_fs = (x_nm - g.x0_nm) / velocity_of_k(phi.k0(), p);
  tr.t_fs.assign(t_grid.begin(), t_grid.end());
  tr.tail_leak = g.tail_leak();
  tr.negative_k_fraction = phi.negative_fraction();
  if (!g.tail_condition()) {
    tr.warnings.push_back("initial packet tail reaches the profile: |x0|/(2 sigma) <= 1, leak = " +
                          std::to_string(tr.tail_leak));
  }

  const double klo = phi.k0() - opt.k_half_width_sigmas * phi.width();
  const double khi = phi.k0() + opt.k_half_width_sigmas * phi.width();
  double tmax = 0.0;
  for (double t : t_grid) tmax = std::max(tmax, std::abs(t));
  const double beta_max = 0.5 * p.hbar_over_m() * tmax;
  const double rate = std::abs(x_nm - g.x0_nm) + 2.0 * beta_max * std::max(std::abs(klo), std::abs(khi));
  const int base_panels =
      std::max(16, static_cast<int>(std::ceil(rate * (khi - klo) / opt.max_phase_per_panel)));

  std::vector<detail::BoundTerm> bound;
  if (opt.include_bound_states) {
    for (const auto& b : bound_states(profile)) bound.push_back(detail::bound_term(profile, b, g, p));
  }
  tr.bound_states = static_cast<int>(bound.size());

  const std::size_t nt = t_grid.size();
  auto integrate = [&](int panels, std::vector<cplx>& psi, std::vector<cplx>& psi_f) {
    const auto edges = detail::panel_edges(klo, khi, panels);
    const auto nodes = detail::gauss_nodes(edges);
    std::vector<cplx> a(nodes.size()), af(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
      const double k = nodes[i].k;
      const cplx base = nodes[i].w * phi(k) * std::polar(1.0, k * x_nm) / std::sqrt(2.0 * kPi);
      af[i] = base;
      a[i] = base * solve_k(profile, cplx{k}).t;
    });
    psi.assign(nt, cplx{0.0});
    psi_f.assign(nt, cplx{0.0});
    // Times are processed in blocks; within a uniformly spaced block the phase
    // e^{-i beta k^2} advances by a fixed factor, so one polar() per node per
    // block suffices.
    constexpr std::size_t kBlock = 32;
    const std::size_t nblocks = (nt + kBlock - 1) / kBlock;
    parallel_for(nblocks, [&](std::size_t b) {
      const std::size_t j0 = b * kBlock, j1 = std::min(nt, j0 + kBlock);
      const double dt = j1 - j0 > 1 ? t_grid[j0 + 1] - t_grid[j0] : 0.0;
      bool uniform = true;
      for (std::size_t j = j0 + 1; j < j1; ++j)
        uniform = uniform && std::abs(t_grid[j] - t_grid[j - 1] - dt) <= 1e-12 * std::abs(t_grid[j]);
      const double half_hm = 0.5 * p.hbar_over_m();
      const double beta0 = half_hm * t_grid[j0], dbeta = half_hm * dt;
      std::vector<cplx> s(j1 - j0), sf(j1 - j0);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double k2 = nodes[i].k * nodes[i].k;
        if (uniform) {
          cplx ph = std::polar(1.0, -beta0 * k2);
          const cplx step = std::polar(1.0, -dbeta * k2);
          for (std::size_t j = j0; j < j1; ++j) {
            s[j - j0] += a[i] * ph;
            sf[j - j0] += af[i] * ph;
            ph *= step;
          }
        } else {
          for (std::size_t j = j0; j < j1; ++j) {
            const cplx ph = std::polar(1.0, -half_hm * t_grid[j] * k2);
            s[j - j0] += a[i] * ph;
            sf[j - j0] += af[i] * ph;
          }
        }
      }
      for (std::size_t j = j0; j < j1; ++j) {
        for (const auto& bt : bound) {
          s[j - j0] += bt.amplitude_at_L * std::exp(-bt.gamma * (x_nm - profile.length())) *
                       std::polar(1.0, -bt.energy * t_grid[j] / p.hbar);
        }
        psi[j] = s[j - j0];
        psi_f[j] = sf[j - j0];
      }
    });
    return static_cast<int>(nodes.size());
  };

  std::vector<cplx> psi, psi_f, psi2, psi_f2;
  int panels = base_panels;
  tr.quadrature_nodes = integrate(panels, psi, psi_f);
  bool converged = false;
  for (int d = 0; d < opt.max_doublings; ++d) {
    panels *= 2;
    const int nodes = integrate(panels, psi2, psi_f2);
    double peak = 0.0, diff = 0.0;
    for (std::size_t j = 0; j < nt; ++j) {
      peak = std::max(peak, std::norm(psi_f2[j]));
      const double xi1 = (std::conj(psi_f[j]) * psi[j]).real();
      const double xi2 = (std::conj(psi_f2[j]) * psi2[j]).real();
      diff = std::max(diff, std::abs(xi1 - xi2));
    }
    tr.self_convergence = peak > 0.0 ? diff / peak : diff;
    psi.swap(psi2);
    psi_f.swap(psi_f2);
    tr.quadrature_nodes = nodes;
    if (tr.self_convergence < opt.convergence_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("evolve_transmitted: k quadrature did not converge (change " +
                           std::to_string(tr.self_convergence) + " of peak)");
  }

  tr.psi = std::move(psi);
  tr.psi_free = std::move(psi_f);
  tr.xi.resize(nt);
  tr.rho_free.resize(nt);
  tr.abs_psi_sq.resize(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    tr.xi[j] = (std::conj(tr.psi_free[j]) * tr.psi[j]).real();
    tr.rho_free[j] = std::norm(tr.psi_free[j]);
    tr.abs_psi_sq[j] = std::norm(tr.psi[j]);
  }
  return tr;
}

/// max_t |xi - rho_free| / max_t rho_free.
inline double invisibility_score(const PacketTrace& tr) {
  double peak = 0.0, dev = 0.0;
  for (std::size_t j = 0; j < tr.xi.size(); ++j) {
    peak = std::max(peak, tr.rho_free[j]);
    dev = std::max(dev, std::abs(tr.xi[j] - tr.rho_free[j]));
  }
  if (!(peak > 0.0)) throw DomainError("invisibility_score: free density vanishes on the grid");
  return dev / peak;
}

}  // namespace invis
