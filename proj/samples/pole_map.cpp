// Pole positions in the beta = kL plane for the multibarrier presets.
//
//   sample_pole_map [n_poles]

#include <cstdio>
#include <cstdlib>

#include "invis/poles.hpp"
#include "invis/presets.hpp"

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 12;
  std::printf("system,re_beta,im_beta,kind\n");
  for (const char* name : {"bwb", "2bwb", "5bwb", "pt4"}) {
    const auto prof = invis::presets::by_name(name);
    const auto set = invis::find_poles(prof, n);
    if (!set.complete) std::fprintf(stderr, "%s: %s\n", name, set.diagnostics.c_str());
    for (const auto& p : set.poles) {
      std::printf("%s,%.10g,%.10g,%s\n", name, p.k.real() * set.L, p.k.imag() * set.L, invis::to_string(p.kind));
    }
  }
}
