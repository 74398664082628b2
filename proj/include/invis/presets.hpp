#pragma once

// Named systems. Rectangular multibarrier presets use b = 0.4 nm, w = 0.8 nm,
// h = 0.8 nm, V0 = |U0| = 0.12 eV and m/m_e = 0.067 unless stated otherwise.

#include <algorithm>
#include <array>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "invis/error.hpp"
#include "invis/potential.hpp"

namespace invis::presets {

inline constexpr double kBarrierWidth = 0.4;
inline constexpr double kWellWidth = 0.8;
inline constexpr double kSpacing = 0.8;
inline constexpr double kHeight = 0.12;
inline constexpr double kMassRatio = 0.067;
inline constexpr double k5BWBInnerWell = -0.113;

/// Barrier-well-barrier unit with heights (V, -U, V).
inline PotentialProfile bwb(double V = kHeight, double U = kHeight, double b = kBarrierWidth,
                            double w = kWellWidth, const PhysicalParams& p = PhysicalParams{kMassRatio}) {
  return build_rect({{b, V}, {w, -U}, {b, V}}, p);
}

/// Two BWB units separated by h. Negative V gives the mirrored well system 2WBW.
inline PotentialProfile two_bwb(double V = kHeight, const PhysicalParams& p = PhysicalParams{kMassRatio},
                                double width_scale = 1.0) {
  return build_chain(bwb(V, V, kBarrierWidth * width_scale, kWellWidth * width_scale, p), 2,
                     kSpacing * width_scale)
      .with_label(V >= 0 ? "2bwb" : "2wbw");
}

inline PotentialProfile two_bsb(const PhysicalParams& p = PhysicalParams{kMassRatio}) {
  return build_chain(bwb(kHeight, 0.0, kBarrierWidth, kWellWidth, p), 2, kSpacing).with_label("2bsb");
}

/// Five BWB units; the wells of the 2nd and 4th units sit at -0.113 eV.
inline PotentialProfile five_bwb(const PhysicalParams& p = PhysicalParams{kMassRatio}) {
  const std::array<WellOverride, 2> ov{{{1, k5BWBInnerWell}, {3, k5BWBInnerWell}}};
  return build_chain(bwb(kHeight, kHeight, kBarrierWidth, kWellWidth, p), 5, kSpacing, ov)
      .with_label("5bwb");
}

/// Two 5BWB systems separated by h; L = 23.2 nm.
inline PotentialProfile ten_bwb(const PhysicalParams& p = PhysicalParams{kMassRatio}) {
  return build_chain(five_bwb(p), 2, kSpacing).with_label("10bwb");
}

/// Double barrier with V0 = 0.2 eV, U0 = 0 and w = 2b (b = 4.0 or 0.4 nm).
inline PotentialProfile fig1_double_barrier(double b,
                                            const PhysicalParams& p = PhysicalParams{kMassRatio}) {
  std::ostringstream label;
  label << "fig1-b" << b;
  return bwb(0.2, 0.0, b, 2.0 * b, p).with_label(label.str());
}

inline PotentialProfile single_barrier(double V = kHeight, double b = kBarrierWidth,
                                       const PhysicalParams& p = PhysicalParams{kMassRatio}) {
  return build_rect({{b, V}}, p).with_label("barrier");
}

inline PotentialProfile free_region(double L = 1.0,
                                    const PhysicalParams& p = PhysicalParams{kMassRatio}) {
  return build_rect({{L, 0.0}}, p).with_label("free");
}

// Quadruple-barrier Poschl-Teller composite: barrier / well / barrier, a gap,
// then the same again. Term widths d_b = 0.0709 nm and d_w = 0.1399 nm. The
// barrier-to-well pitch is tuned (samples/tune_pt.cpp) so that the antibound
// pole sits at E_q ~ 6.19e-10 eV; E_q is insensitive to the gap.
inline constexpr double kPTBarrierD = 0.0709;
inline constexpr double kPTWellD = 0.1399;
inline constexpr double kPTPitch = 0.6107; ///< barrier-to-well center distance
inline constexpr double kPTGap = 0.8;    ///< distance from 3rd to 4th barrier center

inline std::vector<PTTerm> pt_quadruple_terms(double pitch = kPTPitch, double gap = kPTGap,
                                              double V = kHeight) {
  std::vector<PTTerm> t;
  const double second = 2.0 * pitch + gap;
  for (double origin : {0.0, second}) {
    t.push_back({origin, V, kPTBarrierD});
    t.push_back({origin + pitch, -V, kPTWellD});
    t.push_back({origin + 2.0 * pitch, V, kPTBarrierD});
  }
  return t;
}

inline PotentialProfile pt_quadruple(double cutoff_eps = kDefaultPTCutoff,
                                     int n_slices = kDefaultPTSlices,
                                     const PhysicalParams& p = PhysicalParams{kMassRatio}) {
  const auto terms = pt_quadruple_terms();
  return build_pt_composite(terms, cutoff_eps, n_slices, p).with_label("pt4");
}

struct PresetInfo {
  std::string_view name;
  std::string_view description;
};

inline constexpr std::array<PresetInfo, 11> kPresets{{
    {"free", "V = 0 on [0, 1] nm"},
    {"barrier", "single rectangular barrier, b = 0.4 nm, V0 = 0.12 eV"},
    {"bwb", "barrier-well-barrier, b = 0.4, w = 0.8 nm, V0 = |U0| = 0.12 eV"},
    {"2bwb", "two BWB units, h = 0.8 nm (L = 4.0 nm)"},
    {"2wbw", "2BWB with all heights inverted (quadruple well)"},
    {"5bwb", "five BWB units, wells 2 and 4 at -0.113 eV (L = 11.2 nm)"},
    {"10bwb", "two 5BWB systems, h = 0.8 nm (L = 23.2 nm)"},
    {"2bsb", "2BWB with zero well depth"},
    {"fig1-b4", "double barrier V0 = 0.2 eV, U0 = 0, b = 4.0 nm, w = 8.0 nm"},
    {"fig1-b0.4", "double barrier V0 = 0.2 eV, U0 = 0, b = 0.4 nm, w = 0.8 nm"},
    {"pt4", "quadruple-barrier Poschl-Teller composite, d_b = 0.0709, d_w = 0.1399 nm"},
}};

inline PotentialProfile by_name(std::string_view name,
                                const PhysicalParams& p = PhysicalParams{kMassRatio}) {
  if (name == "free") return free_region(1.0, p);
  if (name == "barrier") return single_barrier(kHeight, kBarrierWidth, p);
  if (name == "bwb") return bwb(kHeight, kHeight, kBarrierWidth, kWellWidth, p).with_label("bwb");
  if (name == "2bwb") return two_bwb(kHeight, p);
  if (name == "2wbw") return two_bwb(-kHeight, p);
  if (name == "5bwb") return five_bwb(p);
  if (name == "10bwb") return ten_bwb(p);
  if (name == "2bsb") return two_bsb(p);
  if (name == "fig1-b4") return fig1_double_barrier(4.0, p);
  if (name == "fig1-b0.4") return fig1_double_barrier(0.4, p);
  if (name == "pt4") return pt_quadruple(kDefaultPTCutoff, kDefaultPTSlices, p);
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

/// Reference height used to express energies as E / V0 for a preset.
inline double reference_height(std::string_view name) {
  if (name == "fig1-b4" || name == "fig1-b0.4") return 0.2;
  return kHeight;
}

}  // namespace invis::presets
