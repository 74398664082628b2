#pragma once

// Transmission models built from poles, plus closed forms.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "invis/error.hpp"
#include "invis/poles.hpp"
#include "invis/scatter.hpp"
#include "invis/units.hpp"

namespace invis {

namespace detail {

/// Terms of the pole sum: every imaginary-axis pole once, and the first
/// n_resonant fourth-quadrant poles together with their partners -k^*.
inline std::vector<Pole> expansion_terms(const PoleSet& set, int n_resonant) {
  if (n_resonant < 0) throw ValidationError("t_expansion: N must be non-negative");
  std::vector<Pole> terms;
  int used = 0;
  for (const auto& p : set.poles) {
    if (p.kind != PoleKind::resonant) {
      terms.push_back(p);
    } else if (used < n_resonant) {
      terms.push_back(p);
      terms.push_back(partner(p));
      ++used;
    }
  }
  if (used < n_resonant) {
    throw ValidationError("t_expansion: pole set holds " + std::to_string(used) +
                          " resonant poles, " + std::to_string(n_resonant) + " requested");
  }
  return terms;
}

}  // namespace detail

/// t(k) = 2ik sum_n r_n e^{-i k_n L} / (k - k_n), truncated at |n| <= N.
inline cplx t_expansion(const PoleSet& set, double k, int n_resonant) {
  if (!(k > 0.0)) throw DomainError("t_expansion: k must be positive");
  const cplx i{0.0, 1.0};
  cplx sum{0.0};
  for (const auto& p : detail::expansion_terms(set, n_resonant)) {
    const cplx den = k - p.k;
    if (std::abs(den) < 1e-14) throw DomainError("t_expansion: k sits on a pole");
    sum += p.residue * std::exp(-i * p.k * set.L) / den;
  }
  return 2.0 * i * k * sum;
}

/// Vectorized form; the pole terms are prepared once.
inline std::vector<cplx> t_expansion(const PoleSet& set, std::span<const double> ks, int n_resonant) {
  const auto terms = detail::expansion_terms(set, n_resonant);
  const cplx i{0.0, 1.0};
  std::vector<cplx> coef;
  coef.reserve(terms.size());
  for (const auto& p : terms) coef.push_back(p.residue * std::exp(-i * p.k * set.L));
  std::vector<cplx> out(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    if (!(ks[j] > 0.0)) throw DomainError("t_expansion: k must be positive");
    cplx sum{0.0};
    for (std::size_t n = 0; n < terms.size(); ++n) sum += coef[n] / (ks[j] - terms[n].k);
    out[j] = 2.0 * i * ks[j] * sum;
  }
  return out;
}

/// G+(0, L; 0), the zero-energy limit of t(k) / (2ik).
inline cplx zero_energy_green(const PotentialProfile& profile) {
  const StateMatrix P = state_matrix(profile, cplx{0.0});
  return -1.0 / P(1, 0);
}

/// Pole sum with the k = 0 value subtracted term by term:
///   t / (2ik) = G+(0,L;0) + sum_n c_n [1/(k - k_n) + 1/k_n].
/// Same infinite series as t_expansion, but the truncation error falls off
/// like 1/N^2 instead of 1/N. Needs one exact input, G+(0, L; 0).
inline cplx t_expansion_subtracted(const PoleSet& set, double k, int n_resonant, cplx g0) {
  if (!(k > 0.0)) throw DomainError("t_expansion_subtracted: k must be positive");
  const cplx i{0.0, 1.0};
  cplx sum = g0;
  for (const auto& p : detail::expansion_terms(set, n_resonant)) {
    const cplx c = p.residue * std::exp(-i * p.k * set.L);
    sum += c * (1.0 / (k - p.k) + 1.0 / p.k);
  }
  return 2.0 * i * k * sum;
}

/// Transmission governed by a single imaginary pole k_q = i gamma_q near threshold.
struct OnePoleModel {
  double gamma_q = 0.0;  ///< nm^-1, signed (> 0 bound, < 0 antibound)
  double E_q = 0.0;      ///< eV, (hbar^2 / 2m) gamma_q^2

  static OnePoleModel from_gamma(double gamma, const PhysicalParams& p) {
    return {gamma, p.hbar2_over_2m() * gamma * gamma};
  }
};

struct OnePoleAmplitude {
  cplx t{};
  double theta_approx = 0.0;  ///< gamma_q / k
};

/// t = 1 / (1 - i gamma_q / k); the zero-transmission limit at k = 0.
inline OnePoleAmplitude t_single_pole(const OnePoleModel& model, double k) {
  if (k < 0.0) throw DomainError("t_single_pole: k must be non-negative");
  if (k == 0.0) return {cplx{0.0}, 0.0};
  return {1.0 / cplx(1.0, -model.gamma_q / k), model.gamma_q / k};
}

/// T = 1 / (1 + E_q / E).
inline double T_single_pole(double energy_eV, double E_q) {
  if (!(energy_eV > 0.0)) throw DomainError("T_single_pole: energy must be positive");
  if (E_q < 0.0) throw DomainError("T_single_pole: E_q must be non-negative");
  return 1.0 / (1.0 + E_q / energy_eV);
}

/// eta = 8 m s d^2 / hbar^2 with the signed strength s.
inline double pt_eta(double strength_eV, double d_nm, const PhysicalParams& p) {
  return 4.0 * strength_eV * d_nm * d_nm / p.hbar2_over_2m();
}

/// |t|^2 for an untruncated Poschl-Teller term s / cosh^2(x / d). The phase of t
/// is not modeled.
inline double T_pt_analytic(double strength_eV, double d_nm, const PhysicalParams& p, double k) {
  if (!(d_nm > 0.0)) throw ValidationError("T_pt_analytic: d must be positive");
  if (k == 0.0) return 0.0;
  const double eta = pt_eta(strength_eV, d_nm, p);
  // cos of a possibly imaginary argument (cosh for tall barriers); real either way.
  const cplx c = std::cos((kPi / 2.0) * std::sqrt(cplx(1.0 - eta, 0.0)));
  const double cc = std::norm(c);
  const double x = kPi * std::abs(k) * d_nm;
  // sinh^2 / (sinh^2 + cos^2), arranged to stay finite for large x.
  if (x > 20.0) {
    const double s = 4.0 * std::exp(-2.0 * x);  // ~ 1 / sinh^2
    return 1.0 / (1.0 + cc * s / std::pow(1.0 - std::exp(-2.0 * x), 2));
  }
  const double sh = std::sinh(x);
  return sh * sh / (sh * sh + cc);
}

/// sinh(pi k d) / (sinh(pi k d) + i cos[(pi/2) sqrt(1 - eta)]) with the phase
/// factor e^{i phi} set to 1; only |t| is meaningful. Poles sit at the zeros of
/// the denominator, so k may be complex.
inline cplx t_pt_analytic(double strength_eV, double d_nm, const PhysicalParams& p, cplx k) {
  if (!(d_nm > 0.0)) throw ValidationError("t_pt_analytic: d must be positive");
  const double eta = pt_eta(strength_eV, d_nm, p);
  const double c = std::cos((kPi / 2.0) * std::sqrt(cplx(1.0 - eta, 0.0))).real();
  const cplx sh = std::sinh(kPi * k * d_nm);
  return sh / (sh + cplx{0.0, c});
}

inline double E_q_of_pole(const Pole& pole, const PhysicalParams& p) {
  if (!pole.on_imaginary_axis()) throw DomainError("E_q_of_pole: pole is not on the imaginary axis");
  return p.hbar2_over_2m() * pole.gamma * pole.gamma;
}

struct ModelRow {
  double E_eV = 0.0;
  double T_exact = 0.0;
  double T_expansion = 0.0;  ///< NaN when no pole set was supplied
  double T_single_pole = 0.0;
};

/// Exact, N-pole and one-pole transmission side by side.
inline std::vector<ModelRow> model_comparison(const PotentialProfile& profile,
                                              std::span<const double> energies, double E_q,
                                              const PoleSet* poles = nullptr, int n_resonant = 0) {
  std::vector<ModelRow> rows(energies.size());
  const auto& p = profile.params();
  parallel_for(energies.size(), [&](std::size_t i) {
    const double E = energies[i];
    rows[i].E_eV = E;
    rows[i].T_exact = amplitudes(profile, E).T;
    rows[i].T_single_pole = T_single_pole(E, E_q);
    rows[i].T_expansion = poles ? std::norm(t_expansion(*poles, k_of_E(E, p), n_resonant))
                                : std::nan("");
  });
  return rows;
}

}  // namespace invis
