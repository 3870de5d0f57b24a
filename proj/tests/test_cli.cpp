#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "json.hpp"
#include "twogamma/cli.hpp"
#include "twogamma/config.hpp"
#include "twogamma/output.hpp"
#include "twogamma/twophoton.hpp"
#include "twogamma/version.hpp"
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace twogamma;
namespace fs = std::filesystem;

namespace {

struct Run {
  int rc;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "twogamma");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  return {rc, o.str(), e.str()};
}

std::string scratch(const std::string &name) {
  const auto p = fs::temp_directory_path() / ("twogamma_test_" + name);
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string &s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string &s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string c; std::getline(in, c, ',');)
    v.push_back(c);
  return v;
}

} // namespace

//==============================================================================
TEST_CASE("config: defaults, unknown keys, dotted overrides") {
  const auto def = config_from_json(default_config_json());
  CHECK(def.Z == std::vector<int>{92});
  CHECK(def.L_max == 5);
  CHECK(def.theta_points == 181);
  CHECK_THROWS_AS(config_from_json(R"({"Z": 92, "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"basis": {"splines": 3}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"transition": "1s2s 9X9"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"y": 0.0})"), ConfigError);
  const auto c = apply_overrides(
      "{}", {{"basis.n_splines", "120"},
             {"truncation.modes", "full,dipole"},
             {"transition", "1S0,3P0"},
             {"Z", "[54,79]"}});
  CHECK(c.basis.n_splines == 120);
  CHECK(c.modes.size() == 2);
  CHECK(c.transitions == std::vector<std::string>{"1S0", "3P0"});
  CHECK(c.Z == std::vector<int>{54, 79});
  CHECK_THROWS_AS(apply_overrides("{}", {{"basis.bogus", "1"}}), ConfigError);
  const auto keys = config_keys();
  CHECK(std::find(keys.begin(), keys.end(), "basis.n_splines") != keys.end());
  // round trip
  const auto back = config_from_json(config_to_json(c));
  CHECK(back.basis.n_splines == 120);
  CHECK(back.Z == c.Z);
}

TEST_CASE("theta grid") {
  RunConfig c;
  c.theta_points = 1;
  CHECK(c.theta_grid_deg() == std::vector<double>{90.0});
  c.theta_points = 7;
  const auto g = c.theta_grid_deg();
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 180.0);
  CHECK(g[1] == 30.0);
}

TEST_CASE("correlate: figure recipe gives six curves at y = 0.5") {
  const auto dir = scratch("fig1");
  const auto r = cli({"correlate", "--config",
                      std::string(TWOGAMMA_SOURCE_DIR) + "/figures/fig1.json",
                      "--y", "0.5", "--out-dir", dir});
  REQUIRE(r.rc == 0);
  CHECK(lines(r.out).size() == 6);
  int csv = 0;
  for (const auto &e : fs::directory_iterator(dir))
    csv += e.path().extension() == ".csv";
  CHECK(csv == 6);
  // dipole curves are mirror symmetric, full ones backward-shifted
  for (int Z : {54, 79, 92}) {
    const auto stem = dir + "/W_Z" + std::to_string(Z) + "_1s2s-1S0_y0.5_";
    const auto d = lines(slurp(stem + "dipole.csv"));
    const auto f = lines(slurp(stem + "full.csv"));
    REQUIRE(d.size() == 182);
    CHECK(d[0] == "theta_deg,W_absolute,W_normalized_at_90deg");
    const double d0 = std::stod(split(d[1])[1]), d180 = std::stod(split(d[181])[1]);
    const double f0 = std::stod(split(f[1])[1]), f180 = std::stod(split(f[181])[1]);
    CHECK(std::abs(d0 - d180) <= 1e-10 * d0);
    CHECK(f180 > f0);
    CHECK(std::stod(split(f[91])[2]) == 1.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("correlate: single-point grid, sidecar provenance, formats") {
  const auto dir = scratch("single");
  const auto r = cli({"correlate", "--Z", "54", "--transition", "1s2s 3S1",
                      "--y", "0.3", "--theta-points", "1", "--out-dir", dir});
  REQUIRE(r.rc == 0);
  const auto stem = dir + "/W_Z54_1s2s-3S1_y0.3_full";
  const auto rows = lines(slurp(stem + ".csv"));
  REQUIRE(rows.size() == 2);
  const auto cols = split(rows[1]);
  REQUIRE(cols.size() == 3);
  CHECK(cols[0] == "90");
  CHECK(cols[2] == "1");
  const auto side = nlohmann::json::parse(slurp(stem + ".json"));
  CHECK(side["version"] == version);
  CHECK(side["transition"]["Z"] == 54);
  CHECK(side.contains("basis"));
  CHECK(side.contains("config"));
  CHECK(side.contains("diagnostics"));
  // 17 significant digits, LF only
  const auto all = slurp(stem + ".csv");
  CHECK(all.find('\r') == std::string::npos);
  CHECK(format_g17(0.1) == "0.10000000000000001");

  const auto j = cli({"correlate", "--Z", "54", "--transition", "1s2s 3S1",
                      "--y", "0.3", "--theta-points", "5", "--format", "json",
                      "--out-dir", dir + "/json"});
  REQUIRE(j.rc == 0);
  const auto doc = nlohmann::json::parse(slurp(dir + "/json/W_Z54_1s2s-3S1_y0.3_full.json"));
  CHECK(doc["data"].size() == 5);
  CHECK(doc["data"][2][2] == 1.0);
  CHECK(doc["columns"][0] == "theta_deg");
  fs::remove_all(dir);
}

TEST_CASE("correlate: config errors leave no output") {
  const auto dir = scratch("bad");
  auto r = cli({"correlate", "--transition", "1s2s 9X9", "--out-dir", dir});
  CHECK(r.rc == exit_config);
  CHECK_FALSE(fs::exists(dir));
  CHECK(r.out.empty());
  CHECK(r.err.find("config error") != std::string::npos);
  CHECK(cli({"correlate", "--bogus", "1"}).rc == exit_config);
  CHECK(cli({"correlate", "--y", "1.5", "--out-dir", dir}).rc == exit_config);
  CHECK(cli({"correlate", "--config", "/nonexistent.json"}).rc == exit_config);
  CHECK(cli({"frobnicate"}).rc == exit_config);
  CHECK_FALSE(fs::exists(dir));
  CHECK(cli({"--help"}).rc == exit_ok);
}

TEST_CASE("correlate: byte-identical output for identical input") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const std::vector<std::string> args{"correlate", "--Z", "79", "--transition",
                                      "1s2p 3P0", "--y", "0.1",
                                      "--theta-points", "37"};
  auto aa = args, bb = args;
  aa.insert(aa.end(), {"--out-dir", a});
  bb.insert(bb.end(), {"--out-dir", b});
  REQUIRE(cli(aa).rc == 0);
  REQUIRE(cli(bb).rc == 0);
  const std::string f = "/W_Z79_1s2p-3P0_y0.1_full.csv";
  CHECK(slurp(a + f) == slurp(b + f));
  CHECK_FALSE(slurp(a + f).empty());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("correlate: cascade pole gives the pole exit code") {
  Truncation dip;
  dip.dipole_only = true;
  TwoPhotonEngine e(parse_transition("3s1/2", 10), BasisParams{}, dip);
  const double y = (e.initial().energy - e.spectrum(1).bound(2).energy) /
                   e.transition_energy();
  const auto dir = scratch("pole");
  const auto r = cli({"correlate", "--Z", "10", "--transition", "3s1/2",
                      "--dipole-only", "--y", format_g17(y), "--out-dir", dir});
  CHECK(r.rc == exit_pole);
  CHECK(r.err.find("kappa = 1") != std::string::npos);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("correlate: convergence check") {
  const auto dir = scratch("conv");
  auto r = cli({"correlate", "--Z", "54", "--theta-points", "7",
                "--convergence.check", "true", "--out-dir", dir});
  REQUIRE(r.rc == 0);
  const auto side = nlohmann::json::parse(
      slurp(dir + "/W_Z54_1s2s-1S0_y0.5_full.json"));
  CHECK(side.contains("convergence"));
  fs::remove_all(dir);
  // impossible tolerance -> convergence failure, nothing written
  r = cli({"correlate", "--Z", "54", "--theta-points", "7",
           "--convergence.check", "true", "--convergence.tol_basis", "1e-16",
           "--convergence.tol_lmax", "1e-16", "--out-dir", dir});
  CHECK(r.rc == exit_convergence);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("spectrum-check") {
  const auto dir = scratch("spec");
  auto r = cli({"spectrum-check", "--out-dir", dir});
  CHECK(r.rc == 0);
  CHECK(r.out.find("spectrum-check: PASS") != std::string::npos);
  CHECK(r.out.find("kappa range |kappa| <= 6") != std::string::npos);
  CHECK(r.out.find("kappa=+6") != std::string::npos);
  CHECK(r.out.find("kappa=-6") != std::string::npos);
  CHECK(fs::exists(dir + "/spectrum_check.json"));

  r = cli({"spectrum-check", "--splines", "8", "--out-dir", dir});
  CHECK(r.rc == exit_convergence);
  CHECK(r.out.find("under-resolved") != std::string::npos);
  CHECK(r.out.find("n_splines = 8") != std::string::npos);

  r = cli({"spectrum-check", "--splines", "10", "--out-dir", dir});
  CHECK(r.rc == exit_convergence);
  CHECK(r.out.find("E_err=") != std::string::npos);
  CHECK(r.out.find("FAIL") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("rate") {
  const auto dir = scratch("rate");
  auto r = cli({"rate", "--Z", "1", "--transition", "2s1/2", "--dipole-only",
                "--out-dir", dir});
  REQUIRE(r.rc == 0);
  const auto pos = r.out.find("total rate = ");
  REQUIRE(pos != std::string::npos);
  const double w = std::stod(r.out.substr(pos + 13));
  CHECK(w == doctest::Approx(8.229).epsilon(0.01));

  r = cli({"rate", "--Z", "92", "--transition", "1s2s 3S1", "--dipole-only",
           "--out-dir", dir});
  REQUIRE(r.rc == 0);
  const auto rows = lines(slurp(dir + "/rate_Z92_1s2s-3S1_dipole.csv"));
  REQUIRE(rows.size() == 26);
  CHECK(rows[0] == "y,dW_dy,weight");
  bool mid = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = split(rows[i]);
    if (std::stod(c[0]) == 0.5) {
      mid = true;
      CHECK(std::stod(c[1]) == 0.0);
    }
    const auto m = split(rows[rows.size() - i]);
    CHECK(std::stod(c[1]) == doctest::Approx(std::stod(m[1])).epsilon(1e-10));
  }
  CHECK(mid);
  fs::remove_all(dir);
}
