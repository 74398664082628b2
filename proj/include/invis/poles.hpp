#pragma once

// Poles of the transmission amplitude in the complex k plane.
//
// Poles are the zeros of the entire function F(k) (see scatter.hpp); with
// t = 2k e^{-ikL} / F the residue of the outgoing Green's function
// G+(0, L; k) = 1 / (i F(k)) at a pole is
//
//     r_n = 1 / (i F'(k_n)),
//
// which is the same quantity as res_t e^{i k_n L} / (2 i k_n).
//
// Poles come in pairs k_{-n} = -k_n^*. Only the fourth quadrant and the
// imaginary axis are stored; partners are generated on demand.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "invis/error.hpp"
#include "invis/parallel.hpp"
#include "invis/potential.hpp"
#include "invis/scatter.hpp"
#include "invis/units.hpp"

namespace invis {

enum class PoleKind { bound, antibound, resonant };

inline const char* to_string(PoleKind k) {
  switch (k) {
    case PoleKind::bound: return "bound";
    case PoleKind::antibound: return "antibound";
    case PoleKind::resonant: return "resonant";
  }
  return "?";
}

struct Pole {
  cplx k{};
  PoleKind kind = PoleKind::resonant;
  cplx residue{};  ///< r_n of G+(0, L; k)
  cplx E{};        ///< (hbar^2 / 2m) k^2
  double gamma = 0.0;  ///< Im k; meaningful for imaginary-axis poles
  int iterations = 0;
  bool converged = false;
  double uncertainty = 0.0;  ///< |F / F'| at k: the Newton step still pending, nm^-1
  double residual = 0.0;     ///< |1/t(k)|
  std::string note;

  [[nodiscard]] bool on_imaginary_axis() const { return kind != PoleKind::resonant; }
};

struct KRegion {
  double re_min = 0.0, re_max = 0.0;
  double im_min = 0.0, im_max = 0.0;

  [[nodiscard]] bool contains(cplx k) const {
    return k.real() >= re_min && k.real() <= re_max && k.imag() >= im_min && k.imag() <= im_max;
  }
};

struct NewtonOptions {
  int max_iter = 100;
  double step_tol = 1e-12;   ///< |dk| tolerance, relative to max(1, |k|)
  double value_tol = 1e-13;  ///< |1/t| tolerance
  int stall_iter = 15;       ///< give up after this many iterations without a new minimum of |F|
};

namespace detail {

/// Central-difference derivative of F with one Richardson step, on a common scale.
struct FAndDerivative {
  cplx f;
  cplx df;
  std::int64_t exponent;
};

/// With richardson = false only the plain central difference is formed, which
/// is enough to steer Newton; residues use the extrapolated value.
inline FAndDerivative f_and_derivative(const PotentialProfile& profile, cplx k, bool richardson = true) {
  const ScaledComplex f0 = pole_function(profile, k);
  const double h = 1e-4 / std::max(profile.length(), 1e-3);
  auto diff = [&](double step) {
    const auto fp = pole_function(profile, k + step);
    const auto fm = pole_function(profile, k - step);
    return (fp.relative_to(f0.exponent) - fm.relative_to(f0.exponent)) / (2.0 * step);
  };
  const cplx d1 = diff(h);
  if (!richardson) return {f0.mantissa, d1, f0.exponent};
  const cplx d2 = diff(0.5 * h);
  return {f0.mantissa, (4.0 * d2 - d1) / 3.0, f0.exponent};
}

/// log |1/t| = log |F| - Im(k) L - log |2k|.
inline double log_inverse_t(const FAndDerivative& fd, cplx k, double L) {
  return std::log(std::abs(fd.f)) + static_cast<double>(fd.exponent) * std::log(2.0) - k.imag() * L -
         std::log(2.0 * std::abs(k));
}

inline bool near_axis(cplx k) { return std::abs(k.real()) <= 1e-9 * std::max(1.0, std::abs(k)); }

/// h(g) = F(i g) / i, real on the imaginary axis. Returned with its scale exponent.
inline std::pair<double, std::int64_t> axis_function(const PotentialProfile& profile, double g) {
  const auto F = pole_function(profile, cplx{0.0, g});
  return {F.mantissa.imag(), F.exponent};
}

inline double axis_value(const PotentialProfile& profile, double g) {
  const auto [v, e] = axis_function(profile, g);
  return std::ldexp(v, static_cast<int>(e));
}

inline double axis_derivative(const PotentialProfile& profile, double g) {
  const double h = 1e-4 / std::max(profile.length(), 1e-3);
  auto diff = [&](double s) {
    return (axis_value(profile, g + s) - axis_value(profile, g - s)) / (2.0 * s);
  };
  return (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
}

inline Pole make_pole(const PotentialProfile& profile, cplx k, cplx dF_true) {
  Pole p;
  p.k = k;
  p.residue = cplx{0.0, -1.0} / dF_true;
  p.E = E_of_k(k, profile.params());
  p.gamma = k.imag();
  if (near_axis(k)) {
    p.k = cplx{0.0, k.imag()};
    p.kind = k.imag() > 0.0 ? PoleKind::bound : PoleKind::antibound;
    p.residue = cplx{0.0, p.residue.imag()};
    p.E = E_of_k(p.k, profile.params());
  } else {
    p.kind = PoleKind::resonant;
  }
  return p;
}

}  // namespace detail

/// Pole on the imaginary axis from a real root gamma of F(i gamma).
inline Pole axis_pole(const PotentialProfile& profile, double gamma) {
  // F'(i g) = h'(g) with h(g) = F(i g) / i.
  const double d = detail::axis_derivative(profile, gamma);
  Pole p = detail::make_pole(profile, cplx{0.0, gamma}, cplx{d, 0.0});
  p.uncertainty = d != 0.0 ? std::abs(detail::axis_value(profile, gamma) / d) : 0.0;
  p.residual = gamma != 0.0 ? std::abs(inverse_transmission(profile, p.k)) : 0.0;
  return p;
}

/// Newton-Raphson on F (equivalently on 1/t) from a seed.
/// With bounds given, iterates that leave the box (padded by one step cap)
/// are abandoned.
inline Pole refine_pole(const PotentialProfile& profile, cplx seed, const NewtonOptions& opt = {},
                        const KRegion* bounds = nullptr) {
  const double L = profile.length();
  const double max_step = 2.0 * kPi / L;
  cplx k = seed;
  int it = 0;
  bool ok = false;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (; it < opt.max_iter; ++it) {
    const auto fd = detail::f_and_derivative(profile, k, false);
    if (fd.df == cplx{0.0}) break;
    // |1/t| alone is not a pole test: for smooth profiles it is tiny over whole
    // regions of the lower half plane. Require the pending step to be small too.
    if (k != cplx{0.0} && detail::log_inverse_t(fd, k, L) < std::log(opt.value_tol) &&
        std::abs(fd.f / fd.df) < 1e-6 * std::max(1.0, std::abs(k))) {
      ok = true;
      break;
    }
    const double mag = std::log(std::abs(fd.f)) + static_cast<double>(fd.exponent) * std::log(2.0);
    if (mag < best) {
      best = mag;
      since_best = 0;
    } else if (++since_best > opt.stall_iter) {
      break;
    }
    if (bounds && !KRegion{bounds->re_min - max_step, bounds->re_max + max_step,
                           bounds->im_min - max_step, bounds->im_max + max_step}
                        .contains(k)) {
      break;
    }
    cplx dk = fd.f / fd.df;
    if (std::abs(dk) > max_step) dk *= max_step / std::abs(dk);
    k -= dk;
    if (std::abs(dk) < opt.step_tol * std::max(1.0, std::abs(k))) {
      ok = true;
      ++it;
      break;
    }
  }
  const auto fd = detail::f_and_derivative(profile, k);
  Pole p = detail::make_pole(profile, k, std::ldexp(1.0, static_cast<int>(fd.exponent)) * fd.df);
  p.uncertainty = fd.df != cplx{0.0} ? std::abs(fd.f / fd.df) : std::numeric_limits<double>::infinity();
  p.residual = k != cplx{0.0} ? std::exp(detail::log_inverse_t(fd, k, L)) : 0.0;
  p.iterations = it;
  p.converged = ok;
  if (!ok) p.note = "no convergence after " + std::to_string(it) + " iterations";
  if (ok && std::abs(k) < 1e-10) {
    p.converged = false;
    p.note = "converged to k = 0 (rejected)";
    return p;
  }
  if (ok && p.kind != PoleKind::resonant) {
    // Polish on the axis, where F(i g) / i is real.
    double g = p.k.imag();
    for (int j = 0; j < 5; ++j) {
      const double d = detail::axis_derivative(profile, g);
      if (d == 0.0) break;
      const double step = detail::axis_value(profile, g) / d;
      g -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(g))) break;
    }
    Pole q = axis_pole(profile, g);
    q.iterations = p.iterations;
    q.converged = true;
    return q;
  }
  return p;
}

/// The partner pole -k^* with residue -r^* (k_{-n} = -k_n^*, r_{-n} = -r_n^*).
inline Pole partner(const Pole& p) {
  Pole q = p;
  q.k = -std::conj(p.k);
  q.residue = -std::conj(p.residue);
  q.E = std::conj(p.E);
  return q;
}

/// Rectangle in the k plane (nm^-1).
/// Default search window for the first n poles: 0 <= Re(kL) <= (n + 2) pi,
/// -40 <= Im(kL), extended above the real axis far enough to hold every bound state.
inline KRegion default_region(const PotentialProfile& profile, int n_poles) {
  const double L = profile.length();
  const double h2m = profile.params().hbar2_over_2m();
  KRegion r;
  r.re_min = 0.0;
  r.re_max = (n_poles + 2) * kPi / L;
  r.im_min = -40.0 / L;
  const double kmax_bound = std::sqrt(profile.max_depth() / h2m);
  r.im_max = kmax_bound > 0.0 ? 1.01 * kmax_bound + 1e-6 : 0.0;
  return r;
}

struct PoleSearchOptions {
  int seeds_per_spacing = 6;       ///< seeds per pi/L along Re k
  double merge_radius = 1e-9;      ///< nm^-1, scaled by max(1, |k|)
  int max_refinements = 3;         ///< seed-density doublings when the count disagrees
  NewtonOptions newton{};
};

struct PoleSet {
  std::vector<Pole> poles;  ///< fourth quadrant + imaginary axis, sorted by |Re k| then |Im k|
  double L = 0.0;
  KRegion region{};
  int requested = 0;
  int winding_count = -1;  ///< zeros of F counted over the mirrored region; -1 if not run
  int counted_found = 0;   ///< the same count reconstructed from the stored poles
  bool complete = false;
  std::string diagnostics;

  [[nodiscard]] std::vector<Pole> resonant() const {
    std::vector<Pole> out;
    for (const auto& p : poles) {
      if (p.kind == PoleKind::resonant) out.push_back(p);
    }
    return out;
  }
  [[nodiscard]] std::vector<Pole> imaginary() const {
    std::vector<Pole> out;
    for (const auto& p : poles) {
      if (p.kind != PoleKind::resonant) out.push_back(p);
    }
    return out;
  }
};

namespace detail {

inline void sort_poles(std::vector<Pole>& v) {
  std::sort(v.begin(), v.end(), [](const Pole& a, const Pole& b) {
    const double ra = std::abs(a.k.real()), rb = std::abs(b.k.real());
    if (ra != rb) return ra < rb;
    return std::abs(a.k.imag()) < std::abs(b.k.imag());
  });
}

/// Two results are the same pole when closer than the merge radius or than
/// their combined position uncertainty; the better-resolved one is kept.
inline void merge_into(std::vector<Pole>& acc, const Pole& p, double radius) {
  for (auto& q : acc) {
    const double r = std::max(radius * std::max(1.0, std::abs(p.k)), 10.0 * (p.uncertainty + q.uncertainty));
    if (std::abs(q.k - p.k) < r) {
      if (p.uncertainty < q.uncertainty) q = p;
      return;
    }
  }
  acc.push_back(p);
}

/// Change of arg F along a straight segment, subdivided until every step
/// turns the phase by less than pi/4. Returns nullopt if a zero of F sits on
/// (or extremely close to) the segment.
inline std::optional<double> phase_change(const PotentialProfile& profile, cplx a, cplx b,
                                          double base_step) {
  const double len = std::abs(b - a);
  if (len == 0.0) return 0.0;
  const double min_step = base_step * 1e-6;
  double s = 0.0, step = std::min(base_step, len);
  double total = 0.0;
  double prev = std::arg(pole_function(profile, a).mantissa);
  while (s < len) {
    const double h = std::min(step, len - s);
    const cplx z = a + (b - a) * ((s + h) / len);
    const auto F = pole_function(profile, z);
    if (F.mantissa == cplx{0.0}) return std::nullopt;
    const double cur = std::arg(F.mantissa);
    double d = cur - prev;
    while (d > kPi) d -= 2.0 * kPi;
    while (d < -kPi) d += 2.0 * kPi;
    if (std::abs(d) > kPi / 4.0 && h > min_step) {
      step = 0.5 * h;
      continue;
    }
    if (std::abs(d) > kPi / 4.0) return std::nullopt;
    total += d;
    prev = cur;
    s += h;
    if (std::abs(d) < kPi / 16.0) step = std::min(2.0 * step, base_step);
  }
  return total;
}

/// Zeros of F inside the rectangle, via the argument principle.
inline std::optional<int> winding_number(const PotentialProfile& profile, const KRegion& r) {
  const double base = kPi / profile.length() / 8.0;
  const cplx c0{r.re_min, r.im_min}, c1{r.re_max, r.im_min}, c2{r.re_max, r.im_max},
      c3{r.re_min, r.im_max};
  double total = 0.0;
  for (auto [a, b] : {std::pair{c0, c1}, std::pair{c1, c2}, std::pair{c2, c3}, std::pair{c3, c0}}) {
    const auto d = phase_change(profile, a, b, base);
    if (!d) return std::nullopt;
    total += *d;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

/// Sign-change scan of F(i g) / i over g in [g_lo, g_hi] on a log-spaced grid
/// around zero, refined by bisection. Returns every root found, unordered.
inline std::vector<double> axis_roots(const PotentialProfile& profile, double g_lo, double g_hi,
                                      int per_decade = 200, double g_min = 1e-12) {
  std::vector<double> grid;
  auto push_side = [&](double limit, double sign) {
    if (limit <= g_min) return;
    const int n = std::max(2, static_cast<int>(std::ceil(per_decade * std::log10(limit / g_min))));
    for (int i = 0; i <= n; ++i) {
      grid.push_back(sign * g_min * std::pow(limit / g_min, static_cast<double>(i) / n));
    }
  };
  push_side(-g_lo, -1.0);
  grid.push_back(0.0);
  push_side(g_hi, +1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> vals(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const auto [v, e] = axis_function(profile, grid[i]);
    (void)e;
    vals[i] = v;  // scale factor is positive, so the sign is exact
  });

  auto sign_at = [&](double g) { return axis_function(profile, g).first; };
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double a = grid[i], b = grid[i + 1];
    double fa = vals[i], fb = vals[i + 1];
    if (fa == 0.0) {
      if (a != 0.0) roots.push_back(a);
      continue;
    }
    if ((fa < 0.0) == (fb < 0.0) || fb == 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (m == a || m == b) break;
      const double fm = sign_at(m);
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

}  // namespace detail

/// Imaginary-axis pole closest to threshold, searched over |gamma| < gamma_max.
inline std::optional<Pole> threshold_pole(const PotentialProfile& profile, double gamma_max = 10.0) {
  auto roots = detail::axis_roots(profile, -gamma_max, gamma_max);
  if (roots.empty()) return std::nullopt;
  const double g = *std::min_element(roots.begin(), roots.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  Pole p = axis_pole(profile, g);
  p.converged = true;
  return p;
}

/// Every bound state (poles on the positive imaginary axis).
inline std::vector<Pole> bound_states(const PotentialProfile& profile) {
  const double kmax = std::sqrt(profile.max_depth() / profile.params().hbar2_over_2m());
  std::vector<Pole> out;
  if (kmax == 0.0) return out;
  for (double g : detail::axis_roots(profile, 0.0, 1.01 * kmax + 1e-6)) {
    if (g > 0.0) out.push_back(axis_pole(profile, g));
  }
  std::sort(out.begin(), out.end(), [](const Pole& a, const Pole& b) { return a.gamma < b.gamma; });
  return out;
}

/// Grid-seeded Newton search inside a region of the closed lower half plane
/// (plus the imaginary axis), cross-checked by an argument-principle count.
inline PoleSet find_poles(const PotentialProfile& profile, const KRegion& region,
                          const PoleSearchOptions& opt = {}, int requested = 0) {
  if (region.re_max <= region.re_min || region.im_max <= region.im_min) {
    throw ValidationError("find_poles: empty region");
  }
  if (region.re_min < 0.0) throw ValidationError("find_poles: region must satisfy Re k >= 0");
  const double L = profile.length();
  PoleSet set;
  set.L = L;
  set.region = region;
  set.requested = requested;
  if (profile.is_free()) {
    // F = 2k e^{-ikL}: its only zero is the excluded k = 0.
    set.winding_count = 0;
    set.complete = true;
    return set;
  }

  std::vector<Pole> found;
  // Imaginary-axis poles by sign scanning.
  if (region.re_min == 0.0) {
    for (double g : detail::axis_roots(profile, region.im_min, region.im_max, 100, 1e-12)) {
      if (g >= region.im_min && g <= region.im_max) {
        Pole p = axis_pole(profile, g);
        p.converged = true;
        detail::merge_into(found, p, opt.merge_radius);
      }
    }
  }

  const double spacing = kPi / L;
  int density = opt.seeds_per_spacing;
  for (int pass = 0; pass <= opt.max_refinements; ++pass) {
    const double dre = spacing / density;
    const double dim = spacing * 6.0 / density;
    const int nre = std::max(1, static_cast<int>(std::ceil((region.re_max - region.re_min) / dre)));
    const double im_top = std::min(region.im_max, 0.0);
    const int nim = std::max(2, static_cast<int>(std::ceil((im_top - region.im_min) / dim)) + 1);
    std::vector<cplx> seeds;
    seeds.reserve(static_cast<std::size_t>(nre) * static_cast<std::size_t>(nim));
    for (int i = 0; i < nre; ++i) {
      const double re = region.re_min + (i + 0.5) * dre;
      for (int j = 0; j < nim; ++j) {
        const double im = im_top - (j + 0.25) * (im_top - region.im_min) / nim;
        seeds.emplace_back(re, im);
      }
    }
    std::vector<Pole> results(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) { results[i] = refine_pole(profile, seeds[i], opt.newton, &region); });
    for (const auto& p : results) {
      if (!p.converged) continue;
      if (p.kind == PoleKind::resonant && p.k.real() < 0.0) continue;
      if (!region.contains(p.k)) continue;
      detail::merge_into(found, p, opt.merge_radius);
    }

    // Count over the mirrored rectangle so imaginary-axis poles lie inside.
    KRegion mirrored = region;
    mirrored.re_min = -region.re_max;
    const auto w = detail::winding_number(profile, mirrored);
    int reconstructed = 0;
    for (const auto& p : found) reconstructed += p.kind == PoleKind::resonant ? 2 : 1;
    set.counted_found = reconstructed;
    if (w) {
      set.winding_count = *w;
      set.complete = *w == reconstructed;
    } else {
      set.winding_count = -1;
      set.complete = false;
    }
    if (set.complete || !w) break;
    density *= 2;
  }

  detail::sort_poles(found);
  set.poles = std::move(found);
  if (!set.complete) {
    std::ostringstream os;
    os << "incomplete pole search: argument principle counts " << set.winding_count
       << " zeros (mirrored region), stored poles account for " << set.counted_found;
    set.diagnostics = os.str();
  }
  return set;
}

/// First n_poles resonant poles plus the imaginary-axis poles in the default window.
inline PoleSet find_poles(const PotentialProfile& profile, int n_poles,
                          const PoleSearchOptions& opt = {}) {
  return find_poles(profile, default_region(profile, n_poles), opt, n_poles);
}

/// Thin rectangular barrier: gamma_a ~ -m V0 L / hbar^2.
inline double thin_barrier_estimate(double V0_eV, double L_nm, const PhysicalParams& p) {
  return -V0_eV * L_nm / (2.0 * p.hbar2_over_2m());
}

/// Thin Poschl-Teller barrier: gamma_a ~ -2 m V0 d / hbar^2 (the rectangular estimate with L -> 2d).
inline double thin_pt_estimate(double V0_eV, double d_nm, const PhysicalParams& p) {
  return thin_barrier_estimate(V0_eV, 2.0 * d_nm, p);
}

}  // namespace invis
