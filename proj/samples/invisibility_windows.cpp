// Invisibility windows of the 2BWB family along the height and mass axes.

#include <cstdio>

#include "invis/sweep.hpp"

int main() {
  using namespace invis;
  const double V0 = presets::kHeight;
  for (auto axis : {SweepAxis::height, SweepAxis::mass_ratio}) {
    SweepSpec s;
    s.axis = axis;
    s.axis_grid = axis == SweepAxis::height ? make_grid(-0.3, 0.3, 200, false) : make_grid(0.01, 1.0, 200, true);
    s.E_grid = make_grid(1e-4, 0.3, 200, true);
    const auto table = transmission_contour(s);
    std::printf("%s:", std::string(to_string(axis)).c_str());
    for (const auto& w : invisibility_window(table, 0.05 * V0, V0, 0.99)) std::printf(" [%.4g, %.4g]", w.lo, w.hi);
    std::printf("\n");
  }
}
