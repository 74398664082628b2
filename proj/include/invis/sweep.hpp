#pragma once

// Transmission contours over (parameter, E) and invisibility windows.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "invis/error.hpp"
#include "invis/parallel.hpp"
#include "invis/potential.hpp"
#include "invis/presets.hpp"
#include "invis/scatter.hpp"

namespace invis {

enum class SweepAxis { height, mass_ratio, width_scale };

inline std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::height: return "V_eV";
    case SweepAxis::mass_ratio: return "mass_ratio";
    case SweepAxis::width_scale: return "width_scale";
  }
  return "?";
}

inline SweepAxis parse_axis(std::string_view s) {
  if (s == "V" || s == "height") return SweepAxis::height;
  if (s == "mass" || s == "mass_ratio") return SweepAxis::mass_ratio;
  if (s == "width" || s == "width_scale") return SweepAxis::width_scale;
  throw ValidationError("unknown sweep axis '" + std::string(s) + "'");
}

struct SweepSpec {
  std::string family = "2bwb";  ///< "2bwb" or "2bsb"
  SweepAxis axis = SweepAxis::height;
  std::vector<double> axis_grid;
  std::vector<double> E_grid;  ///< eV
  double T_floor = 0.5;        ///< rows below this are still stored; used by plotting only

  void validate() const {
    if (family != "2bwb" && family != "2bsb")
      throw ValidationError("sweep: family must be 2bwb or 2bsb");
    if (axis_grid.empty() || E_grid.empty()) throw ValidationError("sweep: grids must be nonempty");
    auto monotone = [](const std::vector<double>& g) {
      return std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
    };
    if (!monotone(axis_grid) || !monotone(E_grid))
      throw ValidationError("sweep: grids must be strictly increasing");
    if (!(E_grid.front() > 0.0)) throw ValidationError("sweep: energies must be positive");
    if (axis != SweepAxis::height && !(axis_grid.front() > 0.0))
      throw ValidationError("sweep: mass and width axes must be positive");
  }
};

struct ContourRow {
  double axis_value;
  double E_eV;
  double T;
};

struct ContourTable {
  SweepAxis axis = SweepAxis::height;
  std::vector<double> axis_grid;
  std::vector<double> E_grid;
  std::vector<ContourRow> rows;  ///< axis-major

  [[nodiscard]] const ContourRow& at(std::size_t ia, std::size_t ie) const {
    return rows[ia * E_grid.size() + ie];
  }
};

/// Profile of the family at one axis value. On the height axis the barrier
/// heights and well depths all equal |V|; V < 0 inverts them.
inline PotentialProfile sweep_profile(const SweepSpec& spec, double a) {
  using namespace presets;
  const double well = spec.family == "2bwb" ? 1.0 : 0.0;
  double V = kHeight, scale = 1.0;
  PhysicalParams p{kMassRatio};
  switch (spec.axis) {
    case SweepAxis::height: V = a; break;
    case SweepAxis::mass_ratio: p.mass_ratio = a; break;
    case SweepAxis::width_scale: scale = a; break;
  }
  const auto unit = bwb(V, well * V, kBarrierWidth * scale, kWellWidth * scale, p);
  return build_chain(unit, 2, kSpacing * scale);
}

inline ContourTable transmission_contour(const SweepSpec& spec) {
  spec.validate();
  ContourTable table{spec.axis, spec.axis_grid, spec.E_grid, {}};
  const std::size_t ne = spec.E_grid.size();
  table.rows.resize(spec.axis_grid.size() * ne);
  parallel_for(spec.axis_grid.size(), [&](std::size_t ia) {
    const auto prof = sweep_profile(spec, spec.axis_grid[ia]);
    for (std::size_t ie = 0; ie < ne; ++ie) {
      table.rows[ia * ne + ie] = {spec.axis_grid[ia], spec.E_grid[ie], amplitudes(prof, spec.E_grid[ie]).T};
    }
  });
  return table;
}

struct WindowInterval {
  double lo;
  double hi;
  [[nodiscard]] bool contains(double a) const { return a >= lo && a <= hi; }
};

/// Minimum of T over the band for each axis value.
inline std::vector<double> band_minimum(const ContourTable& table, double E_lo, double E_hi) {
  if (!(E_lo <= E_hi)) throw ValidationError("invisibility_window: empty band");
  if (E_lo < table.E_grid.front() || E_hi > table.E_grid.back())
    throw ValidationError("invisibility_window: band outside the table's energy range");
  const std::size_t ne = table.E_grid.size();
  std::vector<double> out(table.axis_grid.size(), 2.0);
  for (std::size_t ia = 0; ia < table.axis_grid.size(); ++ia)
    for (std::size_t ie = 0; ie < ne; ++ie) {
      const auto& r = table.rows[ia * ne + ie];
      if (r.E_eV >= E_lo && r.E_eV <= E_hi) out[ia] = std::min(out[ia], r.T);
    }
  return out;
}

/// Maximal runs of axis grid values whose band minimum is at least T_min.
inline std::vector<WindowInterval> invisibility_window(const ContourTable& table, double E_lo,
                                                       double E_hi, double T_min = 0.99) {
  const auto mins = band_minimum(table, E_lo, E_hi);
  std::vector<WindowInterval> out;
  bool open = false;
  for (std::size_t ia = 0; ia < mins.size(); ++ia) {
    const double a = table.axis_grid[ia];
    if (mins[ia] >= T_min) {
      if (!open) out.push_back({a, a});
      out.back().hi = a;
      open = true;
    } else {
      open = false;
    }
  }
  return out;
}

inline bool window_contains(const std::vector<WindowInterval>& w, double a) {
  return std::any_of(w.begin(), w.end(), [a](const WindowInterval& i) { return i.contains(a); });
}

}  // namespace invis
