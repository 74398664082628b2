#pragma once

// Unit conventions: energies in eV, lengths in nm, times in fs.
// The effective mass enters only through hbar^2/2m = kHbar2Over2Me / mass_ratio.

#include <cmath>
#include <complex>
#include <string>

#include "invis/error.hpp"

namespace invis {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// hbar^2 / (2 m_e) in eV nm^2 (CODATA-derived).
inline constexpr double kHbar2Over2Me = 0.0380998;
/// hbar in eV fs.
inline constexpr double kHbar = 0.6582119569;

struct PhysicalParams {
  double mass_ratio = 0.067;  ///< m / m_e
  double hbar2_over_2me = kHbar2Over2Me;
  double hbar = kHbar;

  PhysicalParams() = default;
  explicit PhysicalParams(double m_ratio) : mass_ratio(m_ratio) { validate(); }

  void validate() const {
    if (!(mass_ratio > 0.0) || !std::isfinite(mass_ratio)) {
      throw ValidationError("mass_ratio must be positive, got " + std::to_string(mass_ratio));
    }
  }

  /// hbar^2 / 2m in eV nm^2.
  [[nodiscard]] double hbar2_over_2m() const { return hbar2_over_2me / mass_ratio; }

  /// hbar / m in nm^2 / fs.
  [[nodiscard]] double hbar_over_m() const { return 2.0 * hbar2_over_2m() / hbar; }

  bool operator==(const PhysicalParams&) const = default;
};

/// Wavenumber (nm^-1) of a free particle with kinetic energy E (eV).
inline double k_of_E(double energy_eV, const PhysicalParams& p) {
  if (energy_eV < 0.0 || std::isnan(energy_eV)) {
    throw DomainError("k_of_E: energy must be non-negative");
  }
  return std::sqrt(energy_eV / p.hbar2_over_2m());
}

inline double E_of_k(double k, const PhysicalParams& p) { return p.hbar2_over_2m() * k * k; }

/// Complex energy of a complex wavenumber; used for pole energies.
inline cplx E_of_k(cplx k, const PhysicalParams& p) { return p.hbar2_over_2m() * k * k; }

/// Group velocity hbar k / m in nm/fs.
inline double velocity_of_k(double k, const PhysicalParams& p) { return p.hbar_over_m() * k; }

}  // namespace invis
