#pragma once

// Command-line front end. Every subcommand produces one table written as CSV
// or JSON; failures print a one-line JSON error on stderr.
//
// Exit codes: 0 success, 1 internal error, 2 invalid input, 3 non-convergence.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "invis/config.hpp"
#include "invis/error.hpp"
#include "invis/expansion.hpp"
#include "invis/io.hpp"
#include "invis/packet.hpp"
#include "invis/poles.hpp"
#include "invis/potential.hpp"
#include "invis/presets.hpp"
#include "invis/scatter.hpp"
#include "invis/sweep.hpp"
#include "invis/times.hpp"

namespace invis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNoConvergence = 3;

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct Common {
  std::string preset;
  std::string config_path;
  double mass_ratio = kUnset;
  std::string format = "csv";
  std::string output;
};

struct System {
  PotentialProfile profile;
  std::string name;
  double V0 = presets::kHeight;  ///< reference height for E / V0 columns
};

namespace detail {

inline bool is_set(double v) { return !std::isnan(v); }

inline void add_common(CLI::App* sub, Common& c, bool needs_system) {
  if (needs_system) {
    sub->add_option("-p,--preset", c.preset, "built-in system (see `presets`)");
    sub->add_option("--mass", c.mass_ratio, "effective mass m/m_e (default 0.067)");
  }
  sub->add_option("-c,--config", c.config_path, "JSON run configuration; flags override it");
  sub->add_option("-f,--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("-o,--output", c.output, "output file (default stdout)");
}

/// Copies config "options" into the subcommand's flags that were not given.
inline void apply_options(CLI::App* sub, const nlohmann::json& options) {
  std::vector<std::string> issues;
  for (const auto& [key, value] : options.items()) {
    if (key == "config" || key == "output" || key == "format" || key == "preset" || key == "mass") {
      issues.push_back("config.options." + key + ": set this at top level or on the command line");
      continue;
    }
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) {
      issues.push_back("config.options." + key + ": unknown option for '" + sub->get_name() + "'");
      continue;
    }
    if (opt->count() > 0) continue;
    std::string text;
    if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
    else if (value.is_number_integer()) text = std::to_string(value.get<long long>());
    else if (value.is_number()) text = io::format_number(value.get<double>());
    else if (value.is_string()) text = value.get<std::string>();
    else {
      issues.push_back("config.options." + key + ": expected a scalar");
      continue;
    }
    try {
      opt->add_result(text);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      issues.push_back("config.options." + key + ": " + e.what());
    }
  }
  if (!issues.empty()) {
    std::string msg = "invalid configuration";
    for (const auto& i : issues) msg += "\n  " + i;
    throw ValidationError(msg);
  }
}

inline System resolve_system(const Common& c, const config::RunConfig& cfg) {
  const double m = is_set(c.mass_ratio) ? c.mass_ratio : cfg.mass_ratio.value_or(presets::kMassRatio);
  const PhysicalParams p(m);
  if (!c.preset.empty() || cfg.preset) {
    const std::string name = !c.preset.empty() ? c.preset : *cfg.preset;
    return {presets::by_name(name, p), name, presets::reference_height(name)};
  }
  if (cfg.potential) {
    auto prof = config::build_potential(*cfg.potential, p);
    const double v0 = prof.is_free() ? 1.0 : prof.max_abs_height();
    std::string name = prof.label();
    return {std::move(prof), std::move(name), v0};
  }
  throw ValidationError("no system given: use --preset or a config with \"preset\" or \"potential\"");
}

inline void describe(io::Table& t, const System& s) {
  t.add_meta("system", s.name);
  t.add_meta("profile", s.profile.label());
  t.add_meta("L_nm", s.profile.length());
  t.add_meta("mass_ratio", s.profile.params().mass_ratio);
  t.add_meta("V0_eV", s.V0);
}

inline std::vector<double> energy_grid(double lo, double hi, int n, bool log) {
  if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("energy range must satisfy 0 < emin <= emax");
  if (n < 1) throw ValidationError("points must be >= 1");
  return make_grid(lo, hi, n, log);
}

inline io::Json pole_json(const Pole& p) {
  return io::Json{{"re_k_nm", p.k.real()}, {"im_k_nm", p.k.imag()}, {"kind", to_string(p.kind)}};
}

}  // namespace detail

// ---------------------------------------------------------------- transmit

struct TransmitArgs {
  double emin = 1e-4, emax = 0.24;
  int points = 400;
  bool log = false;
  bool model = false;
  int expansion = 0;
};

inline io::Table transmit(const System& s, const TransmitArgs& a, std::ostream& err) {
  const auto E = detail::energy_grid(a.emin, a.emax, a.points, a.log);
  const auto& p = s.profile.params();
  io::Table t;
  t.kind = "transmission";
  t.columns = {"E_eV", "E_over_V0", "T", "theta_rad"};
  detail::describe(t, s);

  std::optional<double> Eq;
  if (a.model) {
    const auto q = threshold_pole(s.profile);
    if (!q) throw ConvergenceError("transmit --model: no imaginary-axis pole found near threshold");
    Eq = E_q_of_pole(*q, p);
    t.columns.push_back("T_single_pole");
    t.add_meta("threshold_pole", detail::pole_json(*q));
    t.add_meta("E_q_eV", *Eq);
  }
  std::optional<PoleSet> set;
  if (a.expansion > 0) {
    set = find_poles(s.profile, a.expansion);
    if (!set->complete) err << "warning: " << set->diagnostics << '\n';
    t.columns.push_back("T_expansion_" + std::to_string(a.expansion));
    t.add_meta("expansion_N", a.expansion);
    t.add_meta("pole_search_complete", set->complete);
  }

  const auto curve = transmission_curve(s.profile, E);
  std::vector<double> Texp;
  if (set) {
    std::vector<double> ks(E.size());
    for (std::size_t i = 0; i < E.size(); ++i) ks[i] = k_of_E(E[i], p);
    for (const auto& v : t_expansion(*set, ks, a.expansion)) Texp.push_back(std::norm(v));
  }
  for (std::size_t i = 0; i < E.size(); ++i) {
    std::vector<io::Cell> row{E[i], E[i] / s.V0, curve[i].T, curve[i].theta_rad};
    if (Eq) row.emplace_back(T_single_pole(E[i], *Eq));
    if (set) row.emplace_back(Texp[i]);
    t.add_row(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------- poles

struct PolesArgs {
  int n = 20;
  bool threshold_only = false;
  double gamma_max = 10.0;
  std::string beta_out;
};

inline io::Table poles_table(const std::vector<Pole>& poles, const PhysicalParams& p, double L) {
  io::Table t;
  t.kind = "poles";
  t.columns = {"re_k_nm", "im_k_nm", "kind", "re_residue", "im_residue", "E_eV", "im_E_eV", "re_beta", "im_beta"};
  for (const auto& q : poles) {
    const cplx E = E_of_k(q.k, p);
    t.add_row({q.k.real(), q.k.imag(), std::string(to_string(q.kind)), q.residue.real(), q.residue.imag(),
               E.real(), E.imag(), q.k.real() * L, q.k.imag() * L});
  }
  return t;
}

/// beta = kL for every pole and its partner -k^*, the full pole map.
inline io::Table beta_table(const PoleSet& set, const System& s) {
  io::Table t;
  t.kind = "pole-map";
  t.columns = {"re_beta", "im_beta", "kind"};
  detail::describe(t, s);
  for (const auto& q : set.poles) {
    t.add_row({q.k.real() * set.L, q.k.imag() * set.L, std::string(to_string(q.kind))});
  }
  for (const auto& q : set.poles) {
    if (q.kind != PoleKind::resonant) continue;
    const auto m = partner(q);
    t.add_row({m.k.real() * set.L, m.k.imag() * set.L, std::string(to_string(m.kind))});
  }
  return t;
}

/// Returns the table and whether the search is complete.
inline std::pair<io::Table, bool> poles(const System& s, const PolesArgs& a, io::Format fmt) {
  const auto& p = s.profile.params();
  if (a.threshold_only) {
    const auto q = threshold_pole(s.profile, a.gamma_max);
    if (!q) throw ConvergenceError("no imaginary-axis pole with |gamma| < " + io::format_number(a.gamma_max));
    auto t = poles_table({*q}, p, s.profile.length());
    t.kind = "threshold-pole";
    detail::describe(t, s);
    t.add_meta("gamma_nm", q->gamma);
    t.add_meta("E_q_eV", E_q_of_pole(*q, p));
    return {t, true};
  }
  if (a.n < 1) throw ValidationError("poles: --n must be >= 1");
  const auto set = find_poles(s.profile, a.n);
  auto t = poles_table(set.poles, p, set.L);
  detail::describe(t, s);
  t.add_meta("requested", a.n);
  t.add_meta("winding_count", set.winding_count);
  t.add_meta("counted_found", set.counted_found);
  t.add_meta("complete", set.complete);
  if (!set.complete) t.add_meta("diagnostics", set.diagnostics);
  if (!a.beta_out.empty()) {
    std::ofstream os(a.beta_out);
    if (!os) throw ValidationError("cannot open '" + a.beta_out + "' for writing");
    io::write(beta_table(set, s), fmt, os);
  }
  return {t, set.complete};
}

// ---------------------------------------------------------------- dwell

struct DwellArgs {
  double emin = 0.012, emax = 0.12;
  int points = 200;
  bool log = false;
};

inline io::Table dwell(const System& s, const DwellArgs& a) {
  const auto E = detail::energy_grid(a.emin, a.emax, a.points, a.log);
  const auto reps = dwell_curve(s.profile, E);
  io::Table t;
  t.kind = "dwell";
  t.columns = {"E_eV", "E_over_V0", "tau_d_fs", "tau_0_fs", "ratio", "ratio_identity", "T_term",
               "transmission_time_term", "reflection_time_term", "interference_term", "identity_residual"};
  detail::describe(t, s);
  for (const auto& r : reps) {
    const double id = r.components.sum();
    t.add_row({r.E_eV, r.E_eV / s.V0, r.tau_d_fs, r.tau_0_fs, r.ratio, id, r.components.T_term,
               r.components.transmission_time_term, r.components.reflection_time_term,
               r.components.interference_term, id - r.ratio});
  }
  return t;
}

// ---------------------------------------------------------------- packet

struct PacketArgs {
  GaussianSpec gauss{};
  double x = 100.0;
  double tmin = 0.01, tmax = 3.0;  ///< units of t0
  int points = 300;
  bool no_bound_states = false;
};

inline io::Table packet(const System& s, const PacketArgs& a, std::ostream& err) {
  a.gauss.validate();
  if (a.points < 2) throw ValidationError("packet: --points must be >= 2");
  if (!(a.tmax > a.tmin)) throw ValidationError("packet: need tmax > tmin");
  const auto& p = s.profile.params();
  const MomentumProfile phi(a.gauss, p);
  const double t0 = (a.x - a.gauss.x0_nm) / velocity_of_k(phi.k0(), p);
  const auto grid = make_grid(a.tmin * t0, a.tmax * t0, a.points, false);
  PacketOptions opt;
  opt.include_bound_states = !a.no_bound_states;
  const auto tr = evolve_transmitted(s.profile, a.gauss, a.x, grid, opt);
  for (const auto& w : tr.warnings) err << "warning: " << w << '\n';

  io::Table t;
  t.kind = "packet";
  t.columns = {"t_over_t0", "t_fs", "xi", "rho_free", "abs_psi_sq"};
  detail::describe(t, s);
  t.add_meta("sigma_nm", a.gauss.sigma_nm);
  t.add_meta("x0_nm", a.gauss.x0_nm);
  t.add_meta("E0_eV", a.gauss.E0_eV);
  t.add_meta("x_nm", a.x);
  t.add_meta("t0_fs", tr.t0_fs);
  t.add_meta("invisibility_score", invisibility_score(tr));
  t.add_meta("bound_states", tr.bound_states);
  t.add_meta("negative_k_fraction", tr.negative_k_fraction);
  t.add_meta("tail_leak", tr.tail_leak);
  t.add_meta("quadrature_nodes", tr.quadrature_nodes);
  t.add_meta("self_convergence", tr.self_convergence);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    t.add_row({grid[j] / tr.t0_fs, grid[j], tr.xi[j], tr.rho_free[j], tr.abs_psi_sq[j]});
  }
  return t;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string family = "2bwb";
  std::string axis = "V";
  double amin = kUnset, amax = kUnset;
  int apoints = 200;
  bool alog = false;
  double emin = 1e-4, emax = 0.3;
  int epoints = 200;
  bool elinear = false;
  double band_lo = 0.05 * presets::kHeight, band_hi = presets::kHeight;
  double t_min = 0.99;
  double t_floor = 0.5;
};

inline io::Table sweep(const SweepArgs& a) {
  SweepSpec spec;
  spec.family = a.family;
  spec.axis = parse_axis(a.axis);
  double lo = a.amin, hi = a.amax;
  bool log = a.alog;
  switch (spec.axis) {
    case SweepAxis::height:
      if (!detail::is_set(lo)) lo = -0.3;
      if (!detail::is_set(hi)) hi = 0.3;
      break;
    case SweepAxis::mass_ratio:
      if (!detail::is_set(lo)) lo = 0.01;
      if (!detail::is_set(hi)) hi = 1.0;
      log = log || (!detail::is_set(a.amin) && !detail::is_set(a.amax));
      break;
    case SweepAxis::width_scale:
      if (!detail::is_set(lo)) lo = 0.5;
      if (!detail::is_set(hi)) hi = 2.0;
      break;
  }
  if (!(hi > lo) || a.apoints < 2) throw ValidationError("sweep: need amax > amin and apoints >= 2");
  if (!(a.t_floor >= 0.0 && a.t_floor <= 1.0)) throw ValidationError("sweep: --t-floor must lie in [0, 1]");
  spec.axis_grid = make_grid(lo, hi, a.apoints, log);
  spec.E_grid = detail::energy_grid(a.emin, a.emax, a.epoints, !a.elinear);
  spec.T_floor = a.t_floor;
  const auto table = transmission_contour(spec);
  const auto windows = invisibility_window(table, a.band_lo, a.band_hi, a.t_min);

  io::Table t;
  t.kind = "contour";
  const bool mass = spec.axis == SweepAxis::mass_ratio;
  t.columns = {std::string(to_string(spec.axis))};
  if (mass) t.columns.emplace_back("log10_mass_ratio");
  t.columns.insert(t.columns.end(), {"E_eV", "E_over_V0", "T"});
  t.add_meta("family", a.family);
  t.add_meta("axis", std::string(to_string(spec.axis)));
  t.add_meta("band_eV", io::Json::array({a.band_lo, a.band_hi}));
  t.add_meta("T_min", a.t_min);
  t.add_meta("T_floor", a.t_floor);
  io::Json w = io::Json::array();
  for (const auto& i : windows) w.push_back(io::Json::array({i.lo, i.hi}));
  t.add_meta("windows", w);
  const double V0 = presets::kHeight;
  for (const auto& r : table.rows) {
    std::vector<io::Cell> row{r.axis_value};
    if (mass) row.emplace_back(std::log10(r.axis_value));
    // On the height axis E is scaled by the fixed reference 0.12 eV, not by the swept V.
    row.insert(row.end(), {r.E_eV, r.E_eV / V0, r.T});
    t.add_row(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------- profile, presets

inline io::Table profile(const System& s, int points) {
  if (points < 2) throw ValidationError("profile: --points must be >= 2");
  const double L = s.profile.length(), pad = 0.1 * L;
  io::Table t;
  t.kind = "profile";
  t.columns = {"x_nm", "V_eV"};
  detail::describe(t, s);
  for (double x : make_grid(-pad, L + pad, points, false)) t.add_row({x, s.profile.evaluate(x)});
  return t;
}

inline io::Table presets_table() {
  io::Table t;
  t.kind = "presets";
  t.columns = {"name", "L_nm", "slices", "V0_eV", "description"};
  for (const auto& info : presets::kPresets) {
    const auto prof = presets::by_name(info.name);
    t.add_row({std::string(info.name), prof.length(), static_cast<double>(prof.slices().size()),
               presets::reference_height(info.name), "\"" + std::string(info.description) + "\""});
  }
  return t;
}

// ---------------------------------------------------------------- entry point

inline void report_error(std::ostream& err, std::string_view kind, const std::string& message) {
  err << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Transmission, complex poles, dwell times and wave packets for 1D invisible systems"};
  app.name("invis");
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "invis 1.0");

  Common common;
  TransmitArgs ta;
  PolesArgs pa;
  DwellArgs da;
  PacketArgs ka;
  SweepArgs sa;
  int profile_points = 2000;

  auto* st = app.add_subcommand("transmit", "T(E) and theta(E), optionally with pole-model columns");
  detail::add_common(st, common, true);
  st->add_option("--emin", ta.emin, "lowest energy, eV");
  st->add_option("--emax", ta.emax, "highest energy, eV");
  st->add_option("--points", ta.points, "number of energies");
  st->add_flag("--log", ta.log, "log-spaced energies");
  st->add_flag("--model", ta.model, "add the one-pole column 1/(1 + E_q/E)");
  st->add_option("--expansion", ta.expansion, "add the N-pole expansion column (N resonant poles)");

  auto* sp = app.add_subcommand("poles", "complex poles of t(k) and their residues");
  detail::add_common(sp, common, true);
  sp->add_option("-n,--n", pa.n, "number of resonant poles to find");
  sp->add_flag("--threshold-only", pa.threshold_only, "only the imaginary pole nearest k = 0");
  sp->add_option("--gamma-max", pa.gamma_max, "threshold search range |gamma| < gamma_max, nm^-1");
  sp->add_option("--beta-out", pa.beta_out, "also write the beta = kL pole map here");

  auto* sd = app.add_subcommand("dwell", "dwell time by integration and by the amplitude identity");
  detail::add_common(sd, common, true);
  sd->add_option("--emin", da.emin, "lowest energy, eV");
  sd->add_option("--emax", da.emax, "highest energy, eV");
  sd->add_option("--points", da.points, "number of energies");
  sd->add_flag("--log", da.log, "log-spaced energies");

  auto* sk = app.add_subcommand("packet", "transmitted Gaussian packet versus free evolution at fixed x");
  detail::add_common(sk, common, true);
  sk->add_option("--sigma", ka.gauss.sigma_nm, "packet width, nm");
  sk->add_option("--x0", ka.gauss.x0_nm, "initial center, nm (< 0)");
  sk->add_option("--e0", ka.gauss.E0_eV, "mean energy, eV");
  sk->add_option("--x", ka.x, "observation point, nm (>= L)");
  sk->add_option("--tmin", ka.tmin, "first time, units of t0");
  sk->add_option("--tmax", ka.tmax, "last time, units of t0");
  sk->add_option("--points", ka.points, "number of times");
  sk->add_flag("--no-bound-states", ka.no_bound_states, "drop bound-state terms (diagnostic)");

  auto* sw = app.add_subcommand("sweep", "transmission contour over a parameter and invisibility windows");
  detail::add_common(sw, common, false);
  sw->add_option("--family", sa.family, "2bwb or 2bsb")->check(CLI::IsMember({"2bwb", "2bsb"}));
  sw->add_option("--axis", sa.axis, "V, mass or width")->check(CLI::IsMember({"V", "mass", "width"}));
  sw->add_option("--amin", sa.amin, "axis start (default per axis)");
  sw->add_option("--amax", sa.amax, "axis end (default per axis)");
  sw->add_option("--apoints", sa.apoints, "axis points");
  sw->add_flag("--alog", sa.alog, "log-spaced axis (default for mass)");
  sw->add_option("--emin", sa.emin, "lowest energy, eV");
  sw->add_option("--emax", sa.emax, "highest energy, eV");
  sw->add_option("--epoints", sa.epoints, "energy points");
  sw->add_flag("--elinear", sa.elinear, "linear energy grid (default log)");
  sw->add_option("--band-lo", sa.band_lo, "window band start, eV");
  sw->add_option("--band-hi", sa.band_hi, "window band end, eV");
  sw->add_option("--t-min", sa.t_min, "window threshold on min T over the band");
  sw->add_option("--t-floor", sa.t_floor, "lowest T shown on contour plots");

  auto* sf = app.add_subcommand("profile", "V(x) sampled on a grid");
  detail::add_common(sf, common, true);
  sf->add_option("--points", profile_points, "number of samples");

  auto* sl = app.add_subcommand("presets", "list built-in systems");
  detail::add_common(sl, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitInvalid;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    config::RunConfig cfg;
    if (!common.config_path.empty()) {
      cfg = config::load(common.config_path);
      detail::apply_options(sub, cfg.options);
    }
    const auto fmt = io::parse_format(common.format);
    const std::string name = sub->get_name();
    io::Table table;
    int code = kExitOk;
    if (name == "transmit") table = transmit(detail::resolve_system(common, cfg), ta, err);
    else if (name == "poles") {
      auto [t, complete] = poles(detail::resolve_system(common, cfg), pa, fmt);
      table = std::move(t);
      if (!complete) {
        report_error(err, "convergence", "pole search incomplete; see the diagnostics field");
        code = kExitNoConvergence;
      }
    } else if (name == "dwell") table = dwell(detail::resolve_system(common, cfg), da);
    else if (name == "packet") table = packet(detail::resolve_system(common, cfg), ka, err);
    else if (name == "sweep") table = sweep(sa);
    else if (name == "profile") table = profile(detail::resolve_system(common, cfg), profile_points);
    else table = presets_table();

    if (common.output.empty()) {
      io::write(table, fmt, out);
    } else {
      std::ofstream os(common.output);
      if (!os) throw ValidationError("cannot open '" + common.output + "' for writing");
      io::write(table, fmt, os);
    }
    return code;
  } catch (const ValidationError& e) {
    report_error(err, "validation", e.what());
    return kExitInvalid;
  } catch (const DomainError& e) {
    report_error(err, "domain", e.what());
    return kExitInvalid;
  } catch (const ConvergenceError& e) {
    report_error(err, "convergence", e.what());
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return kExitInternal;
  }
}

}  // namespace invis::cli
