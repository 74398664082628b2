#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "invis/cli.hpp"
#include "invis/config.hpp"
#include "invis/io.hpp"

using namespace invis;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "invis");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("invis_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

// Data rows of a CSV table (comment lines and header dropped).
std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::vector<std::string>* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (!seen_header) {
      seen_header = true;
      if (header) *header = cells;
      continue;
    }
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  ADD_FAILURE() << "missing column " << name;
  return 0;
}

}  // namespace

TEST(Cli, FreeTransmissionIsOne) {
  const auto r = invoke({"transmit", "--preset", "free"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> h;
  const auto rows = csv_rows(r.out, &h);
  ASSERT_EQ(rows.size(), 400u);
  const auto iT = column(h, "T");
  for (const auto& row : rows) EXPECT_EQ(std::stod(row[iT]), 1.0);
}

TEST(Cli, SchemaHeader) {
  const auto r = invoke({"transmit", "--preset", "free", "--points", "3"});
  EXPECT_EQ(r.out.rfind("# invis-table/1 transmission\n", 0), 0u);
  std::vector<std::string> h;
  csv_rows(r.out, &h);
  EXPECT_EQ(h, (std::vector<std::string>{"E_eV", "E_over_V0", "T", "theta_rad"}));
}

TEST(Cli, TwoBwbHalfTransmissionCrossing) {
  const auto r = invoke({"transmit", "--preset", "2bwb", "--emin", "1e-8", "--emax", "0.24", "--points", "400", "--log"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> h;
  const auto rows = csv_rows(r.out, &h);
  const auto iE = column(h, "E_eV"), iT = column(h, "T");
  double cross = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t0 = std::stod(rows[i - 1][iT]), t1 = std::stod(rows[i][iT]);
    if (t0 < 0.5 && t1 >= 0.5) cross = std::sqrt(std::stod(rows[i - 1][iE]) * std::stod(rows[i][iE]));
  }
  EXPECT_NEAR(cross, 8.68e-6, 0.05 * 8.68e-6);
}

TEST(Cli, TenBwbThresholdPole) {
  const auto r = invoke({"poles", "--preset", "10bwb", "--threshold-only"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> h;
  const auto rows = csv_rows(r.out, &h);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0][column(h, "kind")], "antibound");
  EXPECT_NEAR(std::stod(rows[0][column(h, "im_k_nm")]), -1.09118e-3, 1e-5);
}

TEST(Cli, JsonMirror) {
  const auto r = invoke({"transmit", "--preset", "2bwb", "--points", "5", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], "invis-table/1");
  EXPECT_EQ(j["kind"], "transmission");
  ASSERT_EQ(j["rows"].size(), 5u);
  const auto c = invoke({"transmit", "--preset", "2bwb", "--points", "5"});
  const auto rows = csv_rows(c.out);
  // CSV carries 15 significant digits, JSON the full double
  EXPECT_NEAR(j["rows"][2]["T"].get<double>(), std::stod(rows[2][2]), 1e-14);
}

TEST(Cli, Deterministic) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"transmit", "--preset", "5bwb", "--model", "--log", "--emin", "1e-7"},
        std::vector<std::string>{"poles", "--preset", "2bwb", "-n", "10"},
        std::vector<std::string>{"dwell", "--preset", "10bwb", "--points", "30"},
        std::vector<std::string>{"sweep", "--apoints", "9", "--epoints", "20"}}) {
    const auto a = invoke(args), b = invoke(args);
    EXPECT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out) << args[0];
  }
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(invoke({"transmit", "--preset", "nope"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"transmit", "--preset", "2bwb", "--emin", "-1"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"transmit", "--preset", "2bwb", "--bogus"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"transmit", "--preset", "2bwb", "-f", "xml"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"--help"}).code, 0);
  EXPECT_EQ(invoke({"--version"}).code, 0);
  const auto r = invoke({"transmit", "--preset", "nope"});
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["error"], "validation");
}

TEST(Cli, ConfigPotential) {
  const auto path = write_temp("rect.json", R"({
    "potential": {"builder": "rect", "slices": [{"width_nm": 0.4, "height_eV": 0.12}]},
    "options": {"points": 7}
  })");
  const auto r = invoke({"transmit", "--config", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(csv_rows(r.out).size(), 7u);
  // the same barrier as the preset
  const auto p = invoke({"transmit", "--preset", "barrier", "--points", "7"});
  EXPECT_EQ(csv_rows(r.out), csv_rows(p.out));
}

TEST(Cli, FlagsBeatConfigOptions) {
  const auto path = write_temp("opts.json", R"({"preset": "2bwb", "options": {"points": 7, "log": true, "emin": 1e-6}})");
  const auto r = invoke({"transmit", "--config", path, "--points", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(std::stod(rows[0][0]), 1e-6, 1e-18);
}

TEST(Cli, ConfigRejections) {
  const std::vector<std::string> bad{
      R"({"preset": "2bwb", "colour": 1})",
      R"({"preset": "2bwb", "potential": {"builder": "rect", "slices": [{"width_nm": 1, "height_eV": 0}]}})",
      R"({"potential": {"builder": "rect", "slices": [{"width_nm": -1, "height_eV": 0.1}]}})",
      R"({"potential": {"builder": "rect", "slices": [{"width_nm": 1, "height": 0.1}]}})",
      R"({"potential": {"builder": "hex"}})",
      R"({"potential": {"builder": "chain", "unit": {"builder": "rect", "slices": [{"width_nm": 1, "height_eV": 0.1}]}, "count": 0, "spacing_nm": 1}})",
      R"({"potential": {"builder": "pt", "terms": [{"center_nm": 0, "strength_eV": 0.1, "d_nm": 0}]}})",
      R"({"mass_ratio": -1, "preset": "2bwb"})",
      R"({"preset": "2bwb", "options": {"nonsense": 1}})",
      R"({"preset": "2bwb", "options": {"output": "x.csv"}})",
      R"(not json)",
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const auto path = write_temp("bad" + std::to_string(i) + ".json", bad[i]);
    const auto r = invoke({"transmit", "--config", path, "--points", "3"});
    EXPECT_EQ(r.code, cli::kExitInvalid) << bad[i];
    EXPECT_TRUE(r.out.empty()) << bad[i];
  }
  EXPECT_EQ(invoke({"transmit", "--config", "/nonexistent/cfg.json"}).code, cli::kExitInvalid);
}

TEST(Cli, ConfigReportListsEveryIssue) {
  try {
    config::parse_text(R"({"potential": {"builder": "rect", "slices": [{"width_nm": -1, "height_eV": 0.1}, {"w": 1}]}, "x": 2})");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("config.x"), std::string::npos) << m;
  }
  try {
    config::parse_text(R"({"potential": {"builder": "rect", "slices": [{"width_nm": -1, "height_eV": 0.1}, {"w": 1}]}})");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("slices[0].width_nm"), std::string::npos) << m;
    EXPECT_NE(m.find("slices[1].w"), std::string::npos) << m;
  }
}

TEST(Cli, ChainAndPtBuilders) {
  const auto chain = config::parse_text(R"({"potential": {"builder": "chain",
      "unit": {"builder": "rect", "slices": [{"width_nm": 0.4, "height_eV": 0.12}, {"width_nm": 0.8, "height_eV": -0.12}, {"width_nm": 0.4, "height_eV": 0.12}]},
      "count": 5, "spacing_nm": 0.8, "overrides": [{"unit_index": 1, "height_eV": -0.113}, {"unit_index": 3, "height_eV": -0.113}]}})");
  const auto p = config::build_potential(*chain.potential, PhysicalParams{0.067});
  const auto ref = presets::five_bwb();
  ASSERT_EQ(p.slices().size(), ref.slices().size());
  for (std::size_t i = 0; i < p.slices().size(); ++i) EXPECT_EQ(p.slices()[i], ref.slices()[i]);
  const auto pt = config::parse_text(R"({"potential": {"builder": "pt", "terms": [{"center_nm": 0, "strength_eV": 0.12, "d_nm": 0.0709}], "cutoff_eps": 1e-8, "n_slices": 500}})");
  EXPECT_EQ(config::build_potential(*pt.potential, PhysicalParams{0.067}).slices().size(), 500u);
}

TEST(Cli, PolesIncludeBetaMap) {
  const auto path = (std::filesystem::temp_directory_path() / "invis_test_beta.csv").string();
  const auto r = invoke({"poles", "--preset", "2bwb", "-n", "8", "--beta-out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<std::string> h;
  const auto rows = csv_rows(ss.str(), &h);
  EXPECT_FALSE(rows.empty());
  column(h, "re_beta");
  column(h, "im_beta");
}

TEST(Cli, OtherSubcommands) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"dwell", "--preset", "2bwb", "--points", "5"},
        std::vector<std::string>{"packet", "--preset", "2bwb", "--points", "20"},
        std::vector<std::string>{"profile", "--preset", "pt4", "--points", "50"},
        std::vector<std::string>{"presets"},
        std::vector<std::string>{"sweep", "--axis", "mass", "--apoints", "5", "--epoints", "10"},
        std::vector<std::string>{"transmit", "--preset", "fig1-b4", "--points", "20", "--expansion", "20"}}) {
    const auto r = invoke(args);
    EXPECT_EQ(r.code, 0) << args[0] << ": " << r.err;
    EXPECT_FALSE(csv_rows(r.out).empty()) << args[0];
  }
}

TEST(Cli, IoFormatting) {
  EXPECT_EQ(io::format_number(0.5), "0.5");
  EXPECT_EQ(io::format_number(std::nan("")), "nan");
  EXPECT_EQ(io::format_number(-INFINITY), "-inf");
  io::Table t{"demo", {"a", "b"}, {}, {}};
  EXPECT_THROW(t.add_row({1.0}), std::logic_error);
  t.add_row({1.0, std::string("x")});
  t.add_row({std::nan(""), 2.0});
  const auto j = io::to_json(t);
  EXPECT_TRUE(j["rows"][1]["a"].is_null());
  EXPECT_EQ(j["rows"][0]["b"], "x");
  EXPECT_THROW(io::parse_format("xml"), ValidationError);
}
