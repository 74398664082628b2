#pragma once

// Dwell time tau_d = (1/J0) int_0^L |psi|^2 dx, J0 = hbar k / m, and its split
//
//   tau_d / tau_0 = T + (T theta' + R phi') / L + sqrt(R) sin(phi) / (k L),
//
// with tau_0 = L / J0 and primes denoting d/dk. The products T theta' and
// R phi' are evaluated as Im(t^* t') and Im(r^* r'), and sqrt(R) sin(phi) as
// Im r, so no phase unwrapping is needed and R -> 0 stays regular.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <span>
#include <vector>

#include "invis/error.hpp"
#include "invis/parallel.hpp"
#include "invis/scatter.hpp"
#include "invis/units.hpp"

namespace invis {

struct DwellComponents {
  double T_term = 0.0;
  double transmission_time_term = 0.0;  ///< T theta' / L
  double reflection_time_term = 0.0;    ///< R phi' / L
  double interference_term = 0.0;       ///< sqrt(R) sin(phi) / (k L)

  [[nodiscard]] double sum() const {
    return T_term + transmission_time_term + reflection_time_term + interference_term;
  }
};

struct DwellReport {
  double E_eV = 0.0;
  double tau_d_fs = 0.0;
  double tau_0_fs = 0.0;
  double ratio = 0.0;  ///< tau_d / tau_0
  DwellComponents components{};
  double theta_dot = 0.0;  ///< d theta / dk, nm
  double phi_dot = 0.0;    ///< d phi / dk, nm (NaN when R == 0)
};

struct DwellOptions {
  double relative_tol = 1e-8;   ///< quadrature
  double step_fraction = 1e-6;  ///< finite-difference step dk = step_fraction * k
};

/// int_0^L |psi(x)|^2 dx by adaptive Gauss-Kronrod, slice by slice.
inline double interior_density(const StationaryState& st, const PotentialProfile& profile,
                               double relative_tol = 1e-8) {
  using boost::math::quadrature::gauss_kronrod;
  const auto sl = profile.slices();
  double total = 0.0;
  for (std::size_t j = 0; j < sl.size(); ++j) {
    auto f = [&](double s) { return std::norm(st.psi_in_slice(j, s)); };
    double err = 0.0;
    total += gauss_kronrod<double, 15>::integrate(f, 0.0, sl[j].width_nm, 15, relative_tol, &err);
  }
  return total;
}

namespace detail {

struct AmplitudeDerivatives {
  cplx t, r, dt, dr;
};

inline AmplitudeDerivatives amplitude_derivatives(const PotentialProfile& profile, double k,
                                                  double h) {
  auto central = [&](double step) {
    const auto p = solve_k(profile, cplx{k + step});
    const auto m = solve_k(profile, cplx{k - step});
    return std::pair{(p.t - m.t) / (2.0 * step), (p.r - m.r) / (2.0 * step)};
  };
  const auto s0 = solve_k(profile, cplx{k});
  const auto [dt1, dr1] = central(h);
  const auto [dt2, dr2] = central(2.0 * h);
  return {s0.t, s0.r, (4.0 * dt1 - dt2) / 3.0, (4.0 * dr1 - dr2) / 3.0};
}

inline bool derivatives_consistent(const AmplitudeDerivatives& a, const AmplitudeDerivatives& b) {
  auto close = [](cplx x, cplx y) { return std::abs(x - y) <= 1e-3 * (std::abs(x) + std::abs(y)) + 1e-9; };
  return close(a.dt, b.dt) && close(a.dr, b.dr);
}

}  // namespace detail

/// Right-hand side of the dwell-time identity from amplitudes and their k-derivatives.
inline DwellReport dwell_decomposition(const PotentialProfile& profile, double energy_eV,
                                       const DwellOptions& opt = {}) {
  if (!(energy_eV > 0.0)) throw DomainError("dwell_decomposition: energy must be positive");
  const auto& p = profile.params();
  const double k = k_of_E(energy_eV, p);
  const double L = profile.length();
  double h = opt.step_fraction * k;
  auto d = detail::amplitude_derivatives(profile, k, h);
  // Step-robustness check; widen the stencil once if the estimate is unstable.
  if (!detail::derivatives_consistent(d, detail::amplitude_derivatives(profile, k, 0.5 * h))) {
    h *= 10.0;
    d = detail::amplitude_derivatives(profile, k, h);
    if (!detail::derivatives_consistent(d, detail::amplitude_derivatives(profile, k, 0.5 * h))) {
      throw ConvergenceError("dwell_decomposition: unstable phase derivative at E = " +
                             std::to_string(energy_eV));
    }
  }
  DwellReport rep;
  rep.E_eV = energy_eV;
  const double T = std::norm(d.t), R = std::norm(d.r);
  const double t_im = (std::conj(d.t) * d.dt).imag();  // T theta'
  const double r_im = (std::conj(d.r) * d.dr).imag();  // R phi'
  rep.components = {T, t_im / L, r_im / L, d.r.imag() / (k * L)};
  rep.theta_dot = T > 0.0 ? t_im / T : std::nan("");
  rep.phi_dot = R > 0.0 ? r_im / R : std::nan("");
  rep.ratio = rep.components.sum();
  rep.tau_0_fs = L / velocity_of_k(k, p);
  rep.tau_d_fs = rep.ratio * rep.tau_0_fs;
  return rep;
}

/// Dwell time from the interior probability integral. Components are filled
/// from the derivative form so the two can be compared.
inline DwellReport dwell_time(const PotentialProfile& profile, double energy_eV,
                              const DwellOptions& opt = {}) {
  DwellReport rep = dwell_decomposition(profile, energy_eV, opt);
  const StationaryState st(profile, energy_eV);
  const double integral = interior_density(st, profile, opt.relative_tol);
  const double v = velocity_of_k(st.k(), profile.params());
  rep.tau_d_fs = integral / v;
  rep.ratio = integral / profile.length();
  return rep;
}

inline std::vector<DwellReport> dwell_curve(const PotentialProfile& profile,
                                            std::span<const double> energies,
                                            const DwellOptions& opt = {}) {
  std::vector<DwellReport> out(energies.size());
  parallel_for(energies.size(), [&](std::size_t i) { out[i] = dwell_time(profile, energies[i], opt); });
  return out;
}

}  // namespace invis
