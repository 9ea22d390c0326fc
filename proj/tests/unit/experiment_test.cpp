#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "siir/experiment/commands.hpp"
#include "siir/experiment/config.hpp"
#include "siir/experiment/table.hpp"

using namespace siir::experiment;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string first_data_line(const std::string& csv) {
  for (const auto& l : lines(csv))
    if (!l.empty() && l[0] != '#') return l;
  return {};
}

std::string error_of(const std::string& json) {
  try {
    parse_config(json);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("empty config yields defaults") { CHECK(parse_config("{}") == ExperimentConfig{}); }

TEST_CASE("presets load and round-trip through serialization") {
  for (const char* name : {"fig3", "fig4", "fig5", "fig6", "fig6_0db", "fig7", "fim", "fsll"}) {
    CAPTURE(name);
    const auto cfg = load_preset(name);
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }
  CHECK_THROWS_AS(load_preset("no_such_preset"), ConfigError);
}

TEST_CASE("config errors name the offending field") {
  CHECK(error_of(R"({"scene": {"bogus": 1}})").find("scene.bogus") != std::string::npos);
  CHECK(error_of(R"({"geometry": {"elements": 1}})").find("geometry.elements") != std::string::npos);
  CHECK(error_of(R"({"geometry": {"spacing_wavelengths": 0.7}})").find("geometry.spacing") != std::string::npos);
  CHECK(error_of(R"({"output": {"format": "xml"}})").find("output.format") != std::string::npos);
  CHECK(error_of(R"({"method": {"name": "capon2"}})").find("method.name") != std::string::npos);
  CHECK(error_of(R"({"scene": {"targets": [{"theta_deg": 190}]}})").find("theta") != std::string::npos);
  CHECK(!error_of("{").empty());
}

TEST_CASE("column sets per command") {
  CHECK(columns_for("sweep") ==
        std::vector<std::string>{"snr_db", "method", "retransmissions", "rmse_deg", "trials", "seed", "error"});
  CHECK(columns_for("pattern") == std::vector<std::string>{"beamformer", "theta_deg", "psi", "magnitude_db", "clamped"});
  CHECK(columns_for("fsll") == std::vector<std::string>{"elements", "fsll_fir_db", "fsll_array_db",
                                                        "fsll_closed_form_db", "delta_per_doubling_db"});
  CHECK(columns_for("estimate") == std::vector<std::string>{"theta_deg", "power_db"});
  CHECK(columns_for("fim") ==
        std::vector<std::string>{"psi_offset", "j_psipsi", "j_psiphi", "j_phiphi", "fd_rel_err", "pole"});
  CHECK_THROWS_AS(columns_for("plot"), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(fixed(-0.00001, 4) == "0.0000");
  CHECK(fixed(1.23456, 2) == "1.23");
  CHECK(std::stod(sci(0.1)) == 0.1);
}

TEST_CASE("table writer: csv and jsonl framing") {
  std::ostringstream csv;
  {
    TableWriter w(csv, Format::csv, {"a", "b"});
    w.meta("k", "v");
    w.row({Cell::num("1"), Cell::str("x")});
    w.finish();
  }
  CHECK(lines(csv.str()) == std::vector<std::string>{"# k=v", "a,b", "1,x", "# status=complete"});

  std::ostringstream broken;
  {
    TableWriter w(broken, Format::csv, {"a"});
    w.row({Cell::num("1")});
  }
  CHECK(lines(broken.str()).back() == "# status=incomplete");

  std::ostringstream jl;
  {
    TableWriter w(jl, Format::jsonl, {"a", "b"});
    w.meta("k", "v");
    w.row({Cell::num("1.5"), Cell::str("x")});
    w.row({Cell::num(""), Cell::str("")});
    w.finish();
  }
  const auto ls = lines(jl.str());
  REQUIRE(ls.size() >= 3);
  bool saw_row = false;
  for (const auto& l : ls) {
    const auto j = nlohmann::json::parse(l);
    if (j.contains("a") && j["a"].is_number()) {
      CHECK(j["a"].get<double>() == 1.5);
      CHECK(j["b"] == "x");
      saw_row = true;
    }
  }
  CHECK(saw_row);
}

TEST_CASE("pattern command header and summary metadata") {
  std::ostringstream out;
  run_command("pattern", load_preset("fig3"), out, Format::csv, {1});
  const std::string s = out.str();
  CHECK(first_data_line(s) == "beamformer,theta_deg,psi,magnitude_db,clamped");
  CHECK(s.find("# array.hpbw_rad=") != std::string::npos);
  CHECK(lines(s).back() == "# status=complete");
}

TEST_CASE("sweep output is independent of the thread count") {
  auto cfg = parse_config(R"({
    "geometry": {"elements": 6},
    "scene": {"targets": [{"theta_deg": 60}, {"theta_deg": 110}], "snapshots": 16, "seed": 4},
    "method": {"params": {"grid_points": 360, "loop_gain": 1}},
    "sweep": {"methods": ["alg1", "alg2", "mvdr", "music", "esprit"], "snr_db": [0, 10], "retransmissions": [0, 2],
              "monte_carlo": 6}
  })");
  std::ostringstream a, b;
  run_command("sweep", cfg, a, Format::csv, {1});
  run_command("sweep", cfg, b, Format::csv, {3});
  CHECK(a.str() == b.str());
  CHECK(first_data_line(a.str()) == "snr_db,method,retransmissions,rmse_deg,trials,seed,error");
}

TEST_CASE("thread resolution prefers the flag") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(std::nullopt) >= 1);
}
