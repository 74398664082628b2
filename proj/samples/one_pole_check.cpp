// Exact T(E) against the single threshold-pole model 1 / (1 + E_q / E).

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "invis/expansion.hpp"
#include "invis/poles.hpp"
#include "invis/presets.hpp"
#include "invis/scatter.hpp"

int main() {
  using namespace invis;
  const auto E = make_grid(1e-7, 0.24, 600, true);
  std::printf("%-6s %12s %12s %14s\n", "system", "gamma_nm", "E_q_eV", "max|dT|");
  for (const char* name : {"2bwb", "5bwb", "10bwb", "2bsb", "pt4"}) {
    const auto prof = presets::by_name(name);
    const auto q = threshold_pole(prof);
    if (!q) continue;
    const double Eq = E_q_of_pole(*q, prof.params());
    double worst = 0.0;
    for (const auto& r : model_comparison(prof, E, Eq)) worst = std::max(worst, std::abs(r.T_exact - r.T_single_pole));
    std::printf("%-6s %12.5e %12.4e %14.3e\n", name, q->gamma, Eq, worst);
  }
}
