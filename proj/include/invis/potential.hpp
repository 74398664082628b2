#pragma once

// Piecewise-constant potential profiles of compact support [0, L].
//
// Every profile, including smooth ones such as truncated Poschl-Teller
// composites, is stored as an ordered list of constant-height slices. This
// is the only representation the scattering code needs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "invis/error.hpp"
#include "invis/units.hpp"

namespace invis {

struct Slice {
  double width_nm = 0.0;
  double height_eV = 0.0;  ///< positive = barrier, negative = well

  bool operator==(const Slice&) const = default;
};

/// One Poschl-Teller term strength / cosh^2((x - center) / d).
struct PTTerm {
  double center_nm = 0.0;
  double strength_eV = 0.0;  ///< sign-carrying: V0 > 0 for a barrier, -U0 for a well
  double d_nm = 0.0;

  [[nodiscard]] double operator()(double x) const {
    const double c = std::cosh((x - center_nm) / d_nm);
    return strength_eV / (c * c);
  }
};

class PotentialProfile {
public:
  PotentialProfile(std::vector<Slice> slices, PhysicalParams params, std::string label = {})
      : slices_(std::move(slices)), params_(params), label_(std::move(label)) {
    if (slices_.empty()) throw ValidationError("potential profile needs at least one slice");
    for (const auto& s : slices_) {
      if (!(s.width_nm > 0.0) || !std::isfinite(s.width_nm)) {
        throw ValidationError("slice width must be positive and finite");
      }
      if (!std::isfinite(s.height_eV)) throw ValidationError("slice height must be finite");
    }
    params_.validate();
    edges_.reserve(slices_.size() + 1);
    edges_.push_back(0.0);
    double x = 0.0;
    for (const auto& s : slices_) {
      x += s.width_nm;
      edges_.push_back(x);
    }
    length_ = x;
  }

  [[nodiscard]] std::span<const Slice> slices() const { return slices_; }
  [[nodiscard]] double length() const { return length_; }
  [[nodiscard]] const PhysicalParams& params() const { return params_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  /// Slice boundaries x_0 = 0 < x_1 < ... < x_n = L.
  [[nodiscard]] std::span<const double> edges() const { return edges_; }

  /// Same geometry, different effective mass.
  [[nodiscard]] PotentialProfile with_params(const PhysicalParams& p) const {
    return PotentialProfile(slices_, p, label_);
  }

  [[nodiscard]] PotentialProfile with_label(std::string label) const {
    return PotentialProfile(slices_, params_, std::move(label));
  }

  /// V(x); zero outside [0, L].
  [[nodiscard]] double evaluate(double x) const {
    if (x < 0.0 || x > length_) return 0.0;
    return slices_[slice_index(x)].height_eV;
  }

  /// Index of the slice containing x (clamped to the support).
  [[nodiscard]] std::size_t slice_index(double x) const {
    auto it = std::upper_bound(edges_.begin() + 1, edges_.end() - 1, x);
    return static_cast<std::size_t>(it - (edges_.begin() + 1));
  }

  [[nodiscard]] double max_height() const {
    double m = 0.0;
    for (const auto& s : slices_) m = std::max(m, s.height_eV);
    return m;
  }

  [[nodiscard]] double max_depth() const {
    double m = 0.0;
    for (const auto& s : slices_) m = std::max(m, -s.height_eV);
    return m;
  }

  [[nodiscard]] double max_abs_height() const { return std::max(max_height(), max_depth()); }

  [[nodiscard]] bool is_free() const {
    return std::all_of(slices_.begin(), slices_.end(),
                       [](const Slice& s) { return s.height_eV == 0.0; });
  }

private:
  std::vector<Slice> slices_;
  std::vector<double> edges_;
  double length_ = 0.0;
  PhysicalParams params_;
  std::string label_;
};

namespace detail {

inline std::string describe_layout(std::span<const Slice> layout) {
  std::ostringstream os;
  os << "rect[";
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (i) os << ',';
    os << layout[i].width_nm << "nm@" << layout[i].height_eV << "eV";
  }
  os << ']';
  return os.str();
}

}  // namespace detail

inline PotentialProfile build_rect(std::span<const Slice> layout, const PhysicalParams& p = {}) {
  if (layout.empty()) throw ValidationError("build_rect: empty layout");
  return PotentialProfile(std::vector<Slice>(layout.begin(), layout.end()), p,
                          detail::describe_layout(layout));
}

inline PotentialProfile build_rect(std::initializer_list<Slice> layout,
                                   const PhysicalParams& p = {}) {
  return build_rect(std::span<const Slice>(layout.begin(), layout.size()), p);
}

/// Replaces the height of the interior slices (all but the first and last)
/// of one unit in a chain. For a BWB unit this is its well.
struct WellOverride {
  std::size_t unit_index = 0;
  double height_eV = 0.0;
};

/// unit + (spacer + unit) x (count - 1); spacers sit at V = 0.
inline PotentialProfile build_chain(const PotentialProfile& unit, int count, double spacing_nm,
                                    std::span<const WellOverride> overrides = {}) {
  if (count < 1) throw ValidationError("build_chain: count must be >= 1");
  if (!(spacing_nm >= 0.0) || !std::isfinite(spacing_nm)) {
    throw ValidationError("build_chain: spacing must be non-negative");
  }
  for (const auto& o : overrides) {
    if (o.unit_index >= static_cast<std::size_t>(count)) {
      throw ValidationError("build_chain: override unit index " + std::to_string(o.unit_index) +
                            " out of range for count " + std::to_string(count));
    }
  }
  const auto u = unit.slices();
  std::vector<Slice> out;
  out.reserve(static_cast<std::size_t>(count) * (u.size() + 1));
  for (int i = 0; i < count; ++i) {
    if (i > 0 && spacing_nm > 0.0) out.push_back({spacing_nm, 0.0});
    const std::size_t start = out.size();
    out.insert(out.end(), u.begin(), u.end());
    for (const auto& o : overrides) {
      if (o.unit_index != static_cast<std::size_t>(i)) continue;
      for (std::size_t j = 1; j + 1 < u.size(); ++j) out[start + j].height_eV = o.height_eV;
    }
  }
  std::ostringstream label;
  label << count << "x(" << unit.label() << ")/h=" << spacing_nm;
  return PotentialProfile(std::move(out), unit.params(), label.str());
}

/// Uniform slicing of a continuous profile; each slice takes V at its midpoint.
inline PotentialProfile slice_continuous(const std::function<double(double)>& V, double x0,
                                         double x1, int n_slices, const PhysicalParams& p = {},
                                         std::string label = "sliced") {
  if (n_slices < 1) throw ValidationError("slice_continuous: n_slices must be >= 1");
  if (!(x1 > x0)) throw ValidationError("slice_continuous: empty support");
  const double w = (x1 - x0) / n_slices;
  std::vector<Slice> out(static_cast<std::size_t>(n_slices));
  for (int i = 0; i < n_slices; ++i) {
    out[static_cast<std::size_t>(i)] = {w, V(x0 + (i + 0.5) * w)};
  }
  return PotentialProfile(std::move(out), p, std::move(label));
}

inline constexpr double kDefaultPTCutoff = 1e-6;
inline constexpr int kDefaultPTSlices = 2000;

/// Support of a Poschl-Teller composite: the interval outside of which the
/// summed tail magnitude sum_i |s_i| / cosh^2 stays below cutoff_eps * max|s_i|.
inline std::pair<double, double> pt_support(std::span<const PTTerm> terms, double cutoff_eps) {
  if (terms.empty()) throw ValidationError("pt composite: no terms");
  if (!(cutoff_eps > 0.0 && cutoff_eps < 1.0)) {
    throw ValidationError("pt composite: cutoff_eps must lie in (0, 1)");
  }
  double vmax = 0.0;
  for (const auto& t : terms) {
    if (!(t.d_nm > 0.0)) throw ValidationError("pt composite: d must be positive");
    vmax = std::max(vmax, std::abs(t.strength_eV));
  }
  if (vmax == 0.0) throw ValidationError("pt composite: cutoff produces empty support");
  const double threshold = cutoff_eps * vmax;
  auto envelope = [&](double x) {
    double s = 0.0;
    for (const auto& t : terms) s += std::abs(t(x));
    return s;
  };
  double cmin = terms.front().center_nm, cmax = cmin;
  for (const auto& t : terms) {
    cmin = std::min(cmin, t.center_nm);
    cmax = std::max(cmax, t.center_nm);
  }
  // Envelope is monotone outside [cmin, cmax]; bracket then bisect on each side.
  auto edge = [&](double from, double dir) {
    double step = 0.0;
    for (const auto& t : terms) step = std::max(step, t.d_nm);
    double inner = from, outer = from + dir * step;
    while (envelope(outer) >= threshold) {
      inner = outer;
      outer += dir * step;
    }
    if (envelope(inner) < threshold) return inner;
    for (int i = 0; i < 200 && std::abs(outer - inner) > 1e-15 * (1.0 + std::abs(inner)); ++i) {
      const double mid = 0.5 * (inner + outer);
      (envelope(mid) >= threshold ? inner : outer) = mid;
    }
    return outer;
  };
  const double lo = edge(cmin, -1.0);
  const double hi = edge(cmax, +1.0);
  if (!(hi > lo)) throw ValidationError("pt composite: cutoff produces empty support");
  return {lo, hi};
}

/// Truncated, shifted and sliced sum of Poschl-Teller terms.
inline PotentialProfile build_pt_composite(std::span<const PTTerm> terms,
                                           double cutoff_eps = kDefaultPTCutoff,
                                           int n_slices = kDefaultPTSlices,
                                           const PhysicalParams& p = {}) {
  const auto [lo, hi] = pt_support(terms, cutoff_eps);
  std::vector<PTTerm> owned(terms.begin(), terms.end());
  auto V = [owned](double x) {
    double s = 0.0;
    for (const auto& t : owned) s += t(x);
    return s;
  };
  std::ostringstream label;
  label << "pt[" << terms.size() << " terms, eps=" << cutoff_eps << ", n=" << n_slices << ']';
  return slice_continuous([&](double x) { return V(x + lo); }, 0.0, hi - lo, n_slices, p,
                          label.str());
}

inline PotentialProfile build_pt_composite(std::initializer_list<PTTerm> terms,
                                           double cutoff_eps = kDefaultPTCutoff,
                                           int n_slices = kDefaultPTSlices,
                                           const PhysicalParams& p = {}) {
  return build_pt_composite(std::span<const PTTerm>(terms.begin(), terms.size()), cutoff_eps,
                            n_slices, p);
}

}  // namespace invis
