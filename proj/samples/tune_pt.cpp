// Tunes the barrier-to-well pitch of the quadruple-barrier Poschl-Teller
// composite so its threshold pole sits at a target E_q.
//
//   sample_tune_pt [target_eV] [gap_nm]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "invis/expansion.hpp"
#include "invis/poles.hpp"
#include "invis/presets.hpp"

using namespace invis;

static const PhysicalParams kParams{presets::kMassRatio};

// Signed threshold-pole position; NaN when there is none.
static double gamma_of(double pitch, double gap) {
  const auto terms = presets::pt_quadruple_terms(pitch, gap);
  const auto prof = build_pt_composite(terms, kDefaultPTCutoff, kDefaultPTSlices, kParams);
  const auto q = threshold_pole(prof);
  return q ? q->gamma : NAN;
}

int main(int argc, char** argv) {
  const double target = argc > 1 ? std::atof(argv[1]) : 6.19e-10;
  const double gap = argc > 2 ? std::atof(argv[2]) : presets::kPTGap;
  // Antibound target: gamma = -sqrt(E_q / (hbar^2 / 2m)).
  const double g_target = -std::sqrt(target / kParams.hbar2_over_2m());
  auto f = [&](double p) { return gamma_of(p, gap) - g_target; };

  double lo = 0.40, flo = f(lo), hi = lo;
  for (double p = 0.405; p <= 0.90; p += 0.005) {
    const double fp = f(p);
    if ((flo < 0) != (fp < 0)) {
      hi = p;
      break;
    }
    lo = p, flo = fp;
  }
  if (hi == lo) {
    std::fprintf(stderr, "no sign change of gamma - gamma_target for pitch in [0.40, 0.90]\n");
    return 1;
  }
  for (int i = 0; i < 50; ++i) {
    const double m = 0.5 * (lo + hi), fm = f(m);
    if ((flo < 0) == (fm < 0)) lo = m, flo = fm;
    else hi = m;
  }
  const double pitch = 0.5 * (lo + hi), g = gamma_of(pitch, gap);
  std::printf("gap    = %.4f nm\npitch  = %.6f nm\ngamma  = %.6e nm^-1\nE_q    = %.4e eV (target %.4e)\n",
              gap, pitch, g, kParams.hbar2_over_2m() * g * g, target);
}
