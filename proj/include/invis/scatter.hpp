#pragma once

// Coherent 1D scattering through a piecewise-constant profile.
//
// The propagator works on the state vector (psi, psi') rather than on
// plane-wave coefficients. Each slice contributes
//
//     [ cos(qw)        sin(qw)/q ]
//     [ -q sin(qw)     cos(qw)   ],   q^2 = k^2 - V (2m / hbar^2),
//
// whose entries are entire functions of q^2. The product is therefore an
// entire function of k with no branch cuts, has unit determinant, and is
// well defined at k = 0 and wherever q = 0 inside a slice.
//
// With unit incidence from the left, psi(x<0) = e^{ikx} + r e^{-ikx} and
// psi(x>L) = t e^{ikx}. Writing P for the state propagator over [0, L],
//
//     F(k) = k (P11 + P22) - i k^2 P12 + i P21,
//     t(k) = 2k e^{-ikL} / F(k),
//     r(k) = [k (P22 - P11) - i k^2 P12 - i P21] / F(k).
//
// F is entire; its zeros are the poles of t.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "invis/error.hpp"
#include "invis/parallel.hpp"
#include "invis/potential.hpp"
#include "invis/units.hpp"

namespace invis {

/// Complex number carried as mantissa * 2^exponent, for values that overflow
/// a double at large |Im k| L.
struct ScaledComplex {
  cplx mantissa{};
  std::int64_t exponent = 0;

  [[nodiscard]] cplx value() const {
    return std::ldexp(1.0, static_cast<int>(exponent)) * mantissa;
  }
  /// mantissa * 2^(exponent - reference_exponent)
  [[nodiscard]] cplx relative_to(std::int64_t reference_exponent) const {
    return std::ldexp(1.0, static_cast<int>(exponent - reference_exponent)) * mantissa;
  }
  [[nodiscard]] double log_abs() const {
    return std::log(std::abs(mantissa)) + static_cast<double>(exponent) * std::log(2.0);
  }
};

/// 2x2 propagator of (psi, psi') across [0, L]; true value = m * 2^exponent.
struct StateMatrix {
  std::array<cplx, 4> m{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{1.0}};  // row-major
  std::int64_t exponent = 0;

  [[nodiscard]] cplx operator()(int row, int col) const {
    return std::ldexp(1.0, static_cast<int>(exponent)) * m[static_cast<std::size_t>(2 * row + col)];
  }
  [[nodiscard]] cplx determinant() const {
    return std::ldexp(1.0, static_cast<int>(2 * exponent)) * (m[0] * m[3] - m[1] * m[2]);
  }
};

/// Plane-wave transfer matrix: (A, B) at x = 0^- to (C, D) at x = L^+, with
/// psi = A e^{ikx} + B e^{-ikx} on the left and C e^{ikx} + D e^{-ikx} on the right.
struct TransferMatrix {
  std::array<cplx, 4> m{};  // row-major, already scaled
  cplx k{};

  [[nodiscard]] cplx operator()(int row, int col) const {
    return m[static_cast<std::size_t>(2 * row + col)];
  }
  [[nodiscard]] cplx determinant() const { return m[0] * m[3] - m[1] * m[2]; }
};

struct ScatteringSolution {
  cplx k{};
  cplx t{};
  cplx r{};
  double T = 0.0;
  double R = 0.0;
  double theta = 0.0;  ///< arg t (principal value unless unwrapped by a sweep)
  double phi = 0.0;    ///< arg r
};

namespace detail {

struct SliceBlock {
  cplx c, s, q;  // cos(qw), sin(qw)/q, -q sin(qw)
};

/// Slice propagator for q^2 = qsq over width w, with the q -> 0 limit by series.
inline SliceBlock slice_block(cplx qsq, double w) {
  const cplx z = qsq * (w * w);
  if (std::abs(z) < 1e-3) {
    const cplx c = 1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0 + z * z * z * z / 40320.0;
    const cplx sinc = 1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0 + z * z * z * z / 362880.0;
    const cplx s = w * sinc;
    return {c, s, -qsq * s};
  }
  const cplx q = std::sqrt(qsq);
  const cplx sn = std::sin(q * w);
  return {std::cos(q * w), sn / q, -q * sn};
}

inline void renormalize(std::array<cplx, 4>& m, std::int64_t& exponent) {
  double big = 0.0;
  for (const auto& v : m) big = std::max(big, std::max(std::abs(v.real()), std::abs(v.imag())));
  if (big == 0.0 || !std::isfinite(big)) return;
  int e = 0;
  std::frexp(big, &e);
  if (e == 0) return;
  for (auto& v : m) v = cplx(std::ldexp(v.real(), -e), std::ldexp(v.imag(), -e));
  exponent += e;
}

inline cplx qsq_of(cplx k, double height, double h2m) { return k * k - height / h2m; }

}  // namespace detail

/// (psi, psi') propagator across the whole profile; renormalized after each slice.
inline StateMatrix state_matrix(const PotentialProfile& profile, cplx k) {
  const double h2m = profile.params().hbar2_over_2m();
  StateMatrix out;
  auto& a = out.m;
  for (const auto& sl : profile.slices()) {
    const auto b = detail::slice_block(detail::qsq_of(k, sl.height_eV, h2m), sl.width_nm);
    // new = B * old
    const std::array<cplx, 4> next{b.c * a[0] + b.s * a[2], b.c * a[1] + b.s * a[3],
                                   b.q * a[0] + b.c * a[2], b.q * a[1] + b.c * a[3]};
    a = next;
    detail::renormalize(a, out.exponent);
  }
  return out;
}

/// Plane-wave transfer matrix. Requires k != 0 (the plane-wave basis degenerates there;
/// use state_matrix for the k -> 0 limit).
inline TransferMatrix transfer_matrix(const PotentialProfile& profile, cplx k) {
  if (k == cplx{0.0}) throw DomainError("transfer_matrix: plane-wave basis undefined at k = 0");
  const StateMatrix P = state_matrix(profile, k);
  const double L = profile.length();
  const cplx ik{0.0, 1.0};
  const cplx p11 = P(0, 0), p12 = P(0, 1), p21 = P(1, 0), p22 = P(1, 1);
  // S(x) maps (A, B) -> (psi, psi'); result = S(L)^{-1} P S(0).
  const cplx e_p = std::exp(ik * k * L), e_m = std::exp(-ik * k * L);
  // P S(0) columns: A-column (1, ik), B-column (1, -ik)
  const cplx ua = p11 + ik * k * p12, va = p21 + ik * k * p22;
  const cplx ub = p11 - ik * k * p12, vb = p21 - ik * k * p22;
  // S(L)^{-1} (u, v) = ( e^{-ikL}(u + v/(ik))/2 , e^{ikL}(u - v/(ik))/2 )
  TransferMatrix tm;
  tm.k = k;
  tm.m = {e_m * (ua + va / (ik * k)) / 2.0, e_m * (ub + vb / (ik * k)) / 2.0,
          e_p * (ua - va / (ik * k)) / 2.0, e_p * (ub - vb / (ik * k)) / 2.0};
  return tm;
}

namespace detail {

/// Scales (u, v) by a power of two so the larger component is O(1).
inline void renormalize(cplx& u, cplx& v, std::int64_t& exponent) {
  const double big = std::max({std::abs(u.real()), std::abs(u.imag()), std::abs(v.real()), std::abs(v.imag())});
  if (big == 0.0 || !std::isfinite(big)) return;
  int e = 0;
  std::frexp(big, &e);
  u = cplx(std::ldexp(u.real(), -e), std::ldexp(u.imag(), -e));
  v = cplx(std::ldexp(v.real(), -e), std::ldexp(v.imag(), -e));
  exponent += e;
}

/// Right-to-left sweep of the outgoing solution e^{ik(x-L)}, returning
/// F = k psi(0) - i psi'(0). Inside each slice the solution is carried as
/// plane-wave amplitudes (a, b) of e^{+-iqx}; growth then stays on the
/// diagonal and the two modes mix only through interface reflections, which
/// keeps F accurate deep in the lower half plane where the (psi, psi')
/// product loses everything to cancellation. Slices with |q| w tiny are
/// crossed with the entire (psi, psi') block instead.
inline ScaledComplex outgoing_sweep(const PotentialProfile& profile, cplx k) {
  const double h2m = profile.params().hbar2_over_2m();
  const auto sl = profile.slices();
  const cplx i{0.0, 1.0};
  constexpr double kLn2 = 0.69314718055994530942;
  bool amp = k != cplx{0.0};
  cplx q_cur = k;
  cplx u = 1.0, v = 0.0;  // amp: (a, b); otherwise (psi, psi')
  std::int64_t ex = 0;
  for (std::size_t n = sl.size(); n-- > 0;) {
    const cplx qsq = qsq_of(k, sl[n].height_eV, h2m);
    const double w = sl[n].width_nm;
    const cplx q = std::sqrt(qsq);
    if (std::abs(q) * w < 1e-4) {
      if (amp) {
        const cplx psi = u + v, dpsi = i * q_cur * (u - v);
        u = psi;
        v = dpsi;
        amp = false;
      }
      const auto b = slice_block(qsq, -w);
      const cplx nu = b.c * u + b.s * v, nv = b.q * u + b.c * v;
      u = nu;
      v = nv;
    } else {
      cplx a, bb;
      if (amp) {
        const cplx r = q_cur / q;
        a = 0.5 * ((1.0 + r) * u + (1.0 - r) * v);
        bb = 0.5 * ((1.0 - r) * u + (1.0 + r) * v);
      } else {
        a = 0.5 * (u + v / (i * q));
        bb = 0.5 * (u - v / (i * q));
      }
      // a e^{-iqw}, b e^{iqw}, with the growth e^{+-g} split off as a power of two.
      const double g = q.imag() * w;
      const double nshift = std::floor(g / kLn2);
      const double ph = q.real() * w;
      u = a * std::exp(g - nshift * kLn2) * std::polar(1.0, -ph);
      v = bb * std::exp(-g - nshift * kLn2) * std::polar(1.0, ph);
      ex += static_cast<std::int64_t>(nshift);
      q_cur = q;
      amp = true;
    }
    renormalize(u, v, ex);
  }
  const cplx F = amp ? (k + q_cur) * u + (k - q_cur) * v : k * u - i * v;
  return {F, ex};
}

}  // namespace detail

/// F(k) = 2k e^{-ikL} / t(k): entire, its zeros are the poles of t.
inline ScaledComplex pole_function(const PotentialProfile& profile, cplx k) {
  return detail::outgoing_sweep(profile, k);
}

/// Solution at an arbitrary complex wavenumber (entire-plane continuation).
inline ScatteringSolution solve_k(const PotentialProfile& profile, cplx k) {
  const StateMatrix P = state_matrix(profile, k);
  const cplx i{0.0, 1.0};
  const auto& a = P.m;
  const cplx F = k * (a[0] + a[3]) - i * k * k * a[1] + i * a[2];
  const cplx N = k * (a[3] - a[0]) - i * k * k * a[1] - i * a[2];
  ScatteringSolution s;
  s.k = k;
  const double scale = std::ldexp(1.0, static_cast<int>(-P.exponent));
  s.t = 2.0 * k * std::exp(-i * k * profile.length()) / F * scale;
  s.r = N / F;
  s.T = std::norm(s.t);
  s.R = std::norm(s.r);
  s.theta = std::arg(s.t);
  s.phi = std::arg(s.r);
  return s;
}

inline cplx transmission_amplitude(const PotentialProfile& profile, cplx k) {
  return solve_k(profile, k).t;
}

/// 1/t(k) = F(k) e^{ikL} / (2k).
inline cplx inverse_transmission(const PotentialProfile& profile, cplx k) {
  const auto F = pole_function(profile, k);
  return F.value() * std::exp(cplx{0.0, 1.0} * k * profile.length()) / (2.0 * k);
}

/// Scattering at real energy E > 0.
inline ScatteringSolution amplitudes(const PotentialProfile& profile, double energy_eV) {
  if (!(energy_eV > 0.0)) throw DomainError("amplitudes: energy must be positive");
  return solve_k(profile, cplx{k_of_E(energy_eV, profile.params()), 0.0});
}

/// Stationary scattering state for unit incidence from the left.
class StationaryState {
public:
  StationaryState(const PotentialProfile& profile, double energy_eV)
      : profile_(&profile), sol_(amplitudes(profile, energy_eV)) {
    k_ = sol_.k.real();
    const double h2m = profile.params().hbar2_over_2m();
    const auto sl = profile.slices();
    const std::size_t n = sl.size();
    psi_.resize(n + 1);
    dpsi_.resize(n + 1);
    blocks_.reserve(n);
    for (const auto& s : sl) blocks_.push_back(detail::qsq_of(cplx{k_}, s.height_eV, h2m));
    // Right-to-left sweep from the known outgoing wave; stable under barriers.
    const cplx i{0.0, 1.0};
    const cplx out = sol_.t * std::exp(i * k_ * profile.length());
    psi_[n] = out;
    dpsi_[n] = i * k_ * out;
    for (std::size_t j = n; j-- > 0;) {
      const auto b = detail::slice_block(blocks_[j], sl[j].width_nm);
      psi_[j] = b.c * psi_[j + 1] - b.s * dpsi_[j + 1];
      dpsi_[j] = -b.q * psi_[j + 1] + b.c * dpsi_[j + 1];
    }
  }

  [[nodiscard]] const ScatteringSolution& solution() const { return sol_; }
  [[nodiscard]] double k() const { return k_; }

  [[nodiscard]] cplx psi(double x) const { return eval(x).first; }
  [[nodiscard]] cplx dpsi(double x) const { return eval(x).second; }

  /// psi inside slice j at local offset (0 <= offset <= width_j).
  [[nodiscard]] cplx psi_in_slice(std::size_t j, double offset) const {
    const auto b = detail::slice_block(blocks_[j], offset);
    return b.c * psi_[j] + b.s * dpsi_[j];
  }

  /// psi at the slice edges x_0 = 0 ... x_n = L.
  [[nodiscard]] std::span<const cplx> edge_values() const { return psi_; }

private:
  [[nodiscard]] std::pair<cplx, cplx> eval(double x) const {
    const cplx i{0.0, 1.0};
    const double L = profile_->length();
    if (x <= 0.0) {
      const cplx a = std::exp(i * k_ * x), b = sol_.r * std::exp(-i * k_ * x);
      return {a + b, i * k_ * (a - b)};
    }
    if (x >= L) {
      const cplx a = sol_.t * std::exp(i * k_ * x);
      return {a, i * k_ * a};
    }
    const std::size_t j = profile_->slice_index(x);
    const auto b = detail::slice_block(blocks_[j], x - profile_->edges()[j]);
    return {b.c * psi_[j] + b.s * dpsi_[j], b.q * psi_[j] + b.c * dpsi_[j]};
  }

  const PotentialProfile* profile_;
  ScatteringSolution sol_;
  double k_ = 0.0;
  std::vector<cplx> blocks_;  // q^2 per slice
  std::vector<cplx> psi_, dpsi_;
};

/// psi(x) at each requested point, unit incidence from the left.
inline std::vector<cplx> wavefunction(const PotentialProfile& profile, double energy_eV,
                                      std::span<const double> xs) {
  const StationaryState st(profile, energy_eV);
  std::vector<cplx> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(st.psi(x));
  return out;
}

/// Removes 2 pi jumps along a sequence of phases (grid-order dependent).
inline void unwrap_phases(std::span<double> phases) {
  for (std::size_t i = 1; i < phases.size(); ++i) {
    double d = phases[i] - phases[i - 1];
    while (d > kPi) {
      phases[i] -= 2.0 * kPi;
      d -= 2.0 * kPi;
    }
    while (d < -kPi) {
      phases[i] += 2.0 * kPi;
      d += 2.0 * kPi;
    }
  }
}

struct CurveRow {
  double E_eV = 0.0;
  double T = 0.0;
  double theta_rad = 0.0;
};

inline std::vector<CurveRow> transmission_curve(const PotentialProfile& profile,
                                                std::span<const double> energies) {
  for (double e : energies) {
    if (!(e > 0.0)) throw DomainError("transmission_curve: energies must be positive");
  }
  std::vector<CurveRow> rows(energies.size());
  parallel_for(energies.size(), [&](std::size_t i) {
    const auto s = amplitudes(profile, energies[i]);
    rows[i] = {energies[i], s.T, s.theta};
  });
  std::vector<double> th(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) th[i] = rows[i].theta_rad;
  unwrap_phases(th);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].theta_rad = th[i];
  return rows;
}

/// n points from lo to hi inclusive, linear or logarithmic.
inline std::vector<double> make_grid(double lo, double hi, int n, bool log_spaced) {
  if (n < 1) throw ValidationError("grid needs at least one point");
  if (log_spaced && !(lo > 0.0 && hi > 0.0)) {
    throw ValidationError("log grid needs positive bounds");
  }
  std::vector<double> g(static_cast<std::size_t>(n));
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    g[static_cast<std::size_t>(i)] =
        log_spaced ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
  }
  g.back() = hi;
  return g;
}

}  // namespace invis
