#pragma once

// JSON run configuration.
//
//   {
//     "mass_ratio": 0.067,
//     "preset": "2bwb",                       // or
//     "potential": {"builder": "rect", "slices": [{"width_nm": 0.4, "height_eV": 0.12}, ...]},
//     "options": {"emin": 1e-8, "log": true}  // subcommand flags; command-line flags win
//   }
//
// Builders: rect {slices}; chain {unit, count, spacing_nm, overrides:[{unit_index, height_eV}]}
// where unit is itself a potential object; pt {terms:[{center_nm, strength_eV, d_nm}],
// cutoff_eps, n_slices}. Unknown keys anywhere are rejected.

#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "invis/error.hpp"
#include "invis/potential.hpp"
#include "invis/presets.hpp"
#include "invis/units.hpp"

namespace invis::config {

using Json = nlohmann::json;

struct RunConfig {
  std::optional<double> mass_ratio;
  std::optional<std::string> preset;
  std::optional<Json> potential;
  Json options = Json::object();
};

namespace detail {

/// Collects every problem before failing so the user sees a full report.
class Report {
public:
  void add(const std::string& path, const std::string& what) { issues_.push_back(path + ": " + what); }
  [[nodiscard]] bool ok() const { return issues_.empty(); }
  void raise() const {
    if (ok()) return;
    std::ostringstream os;
    os << "invalid configuration (" << issues_.size() << " issue" << (issues_.size() > 1 ? "s" : "")
       << ")";
    for (const auto& i : issues_) os << "\n  " << i;
    throw ValidationError(os.str());
  }

private:
  std::vector<std::string> issues_;
};

inline bool check_keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed,
                       Report& rep) {
  if (!j.is_object()) {
    rep.add(path, "expected an object");
    return false;
  }
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || k == a;
    if (!known) rep.add(path + "." + k, "unknown key");
  }
  return true;
}

inline std::optional<double> number(const Json& j, const std::string& key, const std::string& path,
                                    Report& rep, bool required = true) {
  if (!j.contains(key)) {
    if (required) rep.add(path + "." + key, "missing");
    return std::nullopt;
  }
  if (!j[key].is_number()) {
    rep.add(path + "." + key, "expected a number");
    return std::nullopt;
  }
  return j[key].get<double>();
}

inline std::optional<PotentialProfile> build(const Json& j, const std::string& path,
                                             const PhysicalParams& p, Report& rep);

inline std::vector<Slice> slices(const Json& j, const std::string& path, Report& rep) {
  std::vector<Slice> out;
  if (!j.is_array() || j.empty()) {
    rep.add(path, "expected a nonempty array");
    return out;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string sp = path + "[" + std::to_string(i) + "]";
    if (!check_keys(j[i], sp, {"width_nm", "height_eV"}, rep)) continue;
    const auto w = number(j[i], "width_nm", sp, rep);
    const auto h = number(j[i], "height_eV", sp, rep);
    if (w && !(*w > 0.0)) rep.add(sp + ".width_nm", "must be positive");
    if (w && h) out.push_back({*w, *h});
  }
  return out;
}

inline std::optional<PotentialProfile> build_rect_cfg(const Json& j, const std::string& path,
                                                      const PhysicalParams& p, Report& rep) {
  check_keys(j, path, {"builder", "slices", "label"}, rep);
  if (!j.contains("slices")) {
    rep.add(path + ".slices", "missing");
    return std::nullopt;
  }
  const auto s = slices(j["slices"], path + ".slices", rep);
  if (!rep.ok()) return std::nullopt;
  return build_rect(s, p).with_label(j.value("label", std::string("rect")));
}

inline std::optional<PotentialProfile> build_chain_cfg(const Json& j, const std::string& path,
                                                       const PhysicalParams& p, Report& rep) {
  check_keys(j, path, {"builder", "unit", "count", "spacing_nm", "overrides", "label"}, rep);
  std::optional<PotentialProfile> unit;
  if (!j.contains("unit")) rep.add(path + ".unit", "missing");
  else unit = build(j["unit"], path + ".unit", p, rep);
  const auto count = number(j, "count", path, rep);
  const auto spacing = number(j, "spacing_nm", path, rep);
  if (count && (*count < 1 || *count != static_cast<int>(*count))) rep.add(path + ".count", "must be a positive integer");
  if (spacing && !(*spacing >= 0.0)) rep.add(path + ".spacing_nm", "must be non-negative");
  std::vector<WellOverride> ov;
  if (j.contains("overrides")) {
    const auto& o = j["overrides"];
    if (!o.is_array()) rep.add(path + ".overrides", "expected an array");
    else
      for (std::size_t i = 0; i < o.size(); ++i) {
        const std::string op = path + ".overrides[" + std::to_string(i) + "]";
        if (!check_keys(o[i], op, {"unit_index", "height_eV"}, rep)) continue;
        const auto ui = number(o[i], "unit_index", op, rep);
        const auto h = number(o[i], "height_eV", op, rep);
        if (ui && (*ui < 0 || *ui != static_cast<int>(*ui))) rep.add(op + ".unit_index", "must be a non-negative integer");
        else if (ui && count && *ui >= *count) rep.add(op + ".unit_index", "out of range for count");
        if (ui && h) ov.push_back({static_cast<std::size_t>(*ui), *h});
      }
  }
  if (!rep.ok() || !unit) return std::nullopt;
  auto out = build_chain(*unit, static_cast<int>(*count), *spacing, ov);
  return j.contains("label") ? out.with_label(j["label"].get<std::string>()) : out;
}

inline std::optional<PotentialProfile> build_pt_cfg(const Json& j, const std::string& path,
                                                    const PhysicalParams& p, Report& rep) {
  check_keys(j, path, {"builder", "terms", "cutoff_eps", "n_slices", "label"}, rep);
  std::vector<PTTerm> terms;
  if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty()) {
    rep.add(path + ".terms", "expected a nonempty array");
  } else {
    const auto& t = j["terms"];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string tp = path + ".terms[" + std::to_string(i) + "]";
      if (!check_keys(t[i], tp, {"center_nm", "strength_eV", "d_nm"}, rep)) continue;
      const auto c = number(t[i], "center_nm", tp, rep);
      const auto s = number(t[i], "strength_eV", tp, rep);
      const auto d = number(t[i], "d_nm", tp, rep);
      if (d && !(*d > 0.0)) rep.add(tp + ".d_nm", "must be positive");
      if (c && s && d) terms.push_back({*c, *s, *d});
    }
  }
  const double eps = number(j, "cutoff_eps", path, rep, false).value_or(kDefaultPTCutoff);
  const double n = number(j, "n_slices", path, rep, false).value_or(kDefaultPTSlices);
  if (!(eps > 0.0 && eps < 1.0)) rep.add(path + ".cutoff_eps", "must lie in (0, 1)");
  if (n < 1 || n != static_cast<int>(n)) rep.add(path + ".n_slices", "must be a positive integer");
  if (!rep.ok()) return std::nullopt;
  auto out = build_pt_composite(terms, eps, static_cast<int>(n), p);
  return j.contains("label") ? out.with_label(j["label"].get<std::string>()) : out;
}

inline std::optional<PotentialProfile> build(const Json& j, const std::string& path,
                                             const PhysicalParams& p, Report& rep) {
  if (!j.is_object() || !j.contains("builder") || !j["builder"].is_string()) {
    rep.add(path + ".builder", "missing (rect, chain or pt)");
    return std::nullopt;
  }
  const auto b = j["builder"].get<std::string>();
  if (j.contains("label") && !j["label"].is_string()) {
    rep.add(path + ".label", "expected a string");
    return std::nullopt;
  }
  try {
    if (b == "rect") return build_rect_cfg(j, path, p, rep);
    if (b == "chain") return build_chain_cfg(j, path, p, rep);
    if (b == "pt") return build_pt_cfg(j, path, p, rep);
  } catch (const ValidationError& e) {
    rep.add(path, e.what());
    return std::nullopt;
  }
  rep.add(path + ".builder", "unknown builder '" + b + "'");
  return std::nullopt;
}

}  // namespace detail

inline RunConfig parse(const Json& j) {
  detail::Report rep;
  RunConfig cfg;
  if (!detail::check_keys(j, "config", {"mass_ratio", "preset", "potential", "options"}, rep)) rep.raise();
  if (j.contains("mass_ratio")) {
    cfg.mass_ratio = detail::number(j, "mass_ratio", "config", rep);
    if (cfg.mass_ratio && !(*cfg.mass_ratio > 0.0)) rep.add("config.mass_ratio", "must be positive");
  }
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) rep.add("config.preset", "expected a string");
    else cfg.preset = j["preset"].get<std::string>();
  }
  if (j.contains("potential")) cfg.potential = j["potential"];
  if (cfg.preset && cfg.potential) rep.add("config", "give either preset or potential, not both");
  if (j.contains("options")) {
    if (!j["options"].is_object()) rep.add("config.options", "expected an object");
    else cfg.options = j["options"];
  }
  // Build once so potential errors surface before any computation.
  if (cfg.potential && rep.ok()) {
    detail::build(*cfg.potential, "config.potential", PhysicalParams(cfg.mass_ratio.value_or(presets::kMassRatio)), rep);
  }
  rep.raise();
  return cfg;
}

inline RunConfig parse_text(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse(j);
}

inline RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

inline PotentialProfile build_potential(const Json& j, const PhysicalParams& p) {
  detail::Report rep;
  auto out = detail::build(j, "potential", p, rep);
  rep.raise();
  return *out;
}

}  // namespace invis::config
