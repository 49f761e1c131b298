#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sublin/app.hpp"
#include "sublin/errors.hpp"

using namespace sublin;
using app::json;

namespace {

app::RunResult run(const std::string& sub, const std::string& text, app::RunOptions o = {}) {
  return app::run(sub, app::parse_config(text), o);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("malformed JSON names line and column") {
  try {
    app::parse_config("{\n  \"a\": 1,\n  oops\n}");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("column 3") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(run("simulate", R"({"schema_version": 1, "n_steps": 10, "n_paths": 10})"), ConfigError);
  CHECK_THROWS_AS(run("simulate", R"({"schema_version": 2, "seed": 1, "n_steps": 10, "n_paths": 10})"), ConfigError);
  CHECK_THROWS_AS(run("simulate", R"({"seed": 1, "n_steps": 10, "n_paths": 10})"), ConfigError);
  CHECK_THROWS_AS(run("simulate", R"({"schema_version": 1, "seed": 1, "n_steps": 10, "n_paths": 10, "colour": 3})"),
                  ConfigError);
  CHECK_THROWS_AS(run("simulate", R"({"schema_version": 1, "seed": -1, "n_steps": 10, "n_paths": 10})"), ConfigError);
  CHECK_THROWS_AS(run("simulate", R"({"schema_version": 1, "seed": 1, "n_steps": "ten", "n_paths": 10})"),
                  ConfigError);
  CHECK_THROWS_AS(run("simulate", R"({"schema_version": 1, "seed": 1, "n_steps": 10, "n_paths": 10,
                                     "family": {"base": "cauchy"}})"),
                  ConfigError);
  CHECK_THROWS_AS(run("simulate", R"({"schema_version": 1, "seed": 1, "n_steps": 10, "n_paths": 10,
                                     "policies": {"custom": [{"kind": "oracle"}]}})"),
                  ConfigError);
  CHECK_THROWS_AS(run("simulate", R"({"schema_version": 1, "seed": 1, "n_steps": 10, "n_paths": 10,
                                     "policies": {"standard": false}})"),
                  ConfigError);
  CHECK_THROWS_AS(run("dance", R"({"schema_version": 1})"), ConfigError);
  CHECK_THROWS_AS(run("verify-ineq", R"({"schema_version": 1, "bound": "kolmogorov"})"), ConfigError);
}

TEST_CASE("eval-gnormal") {
  const auto r = run("eval-gnormal", R"({"schema_version": 1, "phi_tag": "sq", "sigma_lower_sq": 0.25,
                                        "sigma_upper_sq": 1, "tree_depth": 50})");
  CHECK(r.exit_code == 0);
  CHECK(r.summary["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.summary["tree_value"].get<double>() == doctest::Approx(1.0));
  CHECK(r.summary["effective_config"]["resolution"].get<int>() > 0);
}

TEST_CASE("outputs and round trip") {
  const auto dir = (std::filesystem::temp_directory_path() / "sublin_app_test").string();
  std::filesystem::remove_all(dir);
  app::RunOptions o;
  o.output_dir = dir;
  const std::string cfg = R"({"schema_version": 1, "seed": 9, "n_steps": 50, "n_paths": 200,
      "family": {"base": "gaussian", "sigma_lower_sq": 0.5, "sigma_upper_sq": 1},
      "policies": {"standard": {"threshold_levels": [0], "abs_threshold_levels": [], "mixture_probs": []},
                   "custom": [{"kind": "scripted", "name": "alt", "script": [[0.5, 0], [1, 0]]},
                              {"kind": "randomized", "prob_high": 0.3}]},
      "checkpoints": [10, 50]})";
  SUBCASE("scripted policy too short is a config error") { CHECK_THROWS_AS(run("simulate", cfg, o), ConfigError); }
  const std::string ok = R"({"schema_version": 1, "seed": 9, "n_steps": 50, "n_paths": 200,
      "family": {"base": "gaussian", "sigma_lower_sq": 0.5, "sigma_upper_sq": 1},
      "policies": {"standard": {"threshold_levels": [0], "abs_threshold_levels": [], "mixture_probs": []},
                   "custom": [{"kind": "randomized", "prob_high": 0.3}]},
      "checkpoints": [10, 50]})";
  const auto a = run("simulate", ok, o);
  CHECK(a.exit_code == 0);
  CHECK(std::filesystem::exists(dir + "/simulate_paths.csv"));
  CHECK(std::filesystem::exists(dir + "/simulate_summary.json"));
  const auto csv = slurp(dir + "/simulate_paths.csv");
  CHECK(csv.rfind("policy,path,final_sum", 0) == 0);
  // re-running the emitted effective config reproduces the summary
  app::RunOptions quiet;
  quiet.workers = 3;
  const auto b = app::run("simulate", a.summary["effective_config"], quiet);
  CHECK(b.summary.dump() == a.summary.dump());
  CHECK(a.summary["effective_config"]["family"]["cap"].is_null());
  std::filesystem::remove_all(dir);
}

TEST_CASE("config output_dir") {
  const auto dir = (std::filesystem::temp_directory_path() / "sublin_app_out").string();
  std::filesystem::remove_all(dir);
  const auto r = run("solve-gheat", R"({"schema_version": 1, "phi_tag": "tanh", "sigma_lower_sq": 0.25,
      "sigma_upper_sq": 1, "nx": 201, "rows": 5, "output_dir": ")" + dir + "\"}");
  CHECK(std::filesystem::exists(dir + "/gheat_surface.csv"));
  CHECK(std::filesystem::exists(dir + "/gheat_final_profile.dat"));
  CHECK(r.summary["scheme_params"]["nx"].get<int>() == 201);
  CHECK(r.summary["value_at_origin"].get<double>() == doctest::Approx(0.0554).epsilon(0.02));
  std::filesystem::remove_all(dir);
}

TEST_CASE("verify-ineq exit codes") {
  const std::string base = R"({"schema_version": 1, "seed": 2, "bound": "chebyshev", "n": 50, "n_paths": 2000,
      "family": {"base": "two_point", "sigma_lower_sq": 0.25, "sigma_upper_sq": 1}, "x_grid": [1, 2])";
  CHECK(run("verify-ineq", base + ", \"constant\": 3}").exit_code == 0);
  CHECK(run("verify-ineq", base + ", \"constant\": 0.0001}").exit_code == 1);
  // the frozen constant is looked up when none is given
  const auto r = run("verify-ineq", base + "}");
  CHECK(r.summary["effective_config"]["constant"]["2"].get<double>() > 1.0);
  CHECK(r.exit_code == 0);
}

TEST_CASE("calibrated constants are frozen") {
  const auto& c = app::calibrated_constants();
  for (const char* bound : {"fuk-nagaev", "chebyshev", "rosenthal-choquet", "rosenthal-moment"}) {
    CAPTURE(bound);
    REQUIRE(c.contains(bound));
    for (const char* fam : {"two_point", "truncated_gaussian", "student_t"}) CHECK(c[bound].contains(fam));
  }
  const double c2 = c["fuk-nagaev"]["two_point"]["2"].get<double>();
  CHECK(c2 >= 1.0);
  CHECK(c["chebyshev"]["two_point"]["2"].get<double>() == doctest::Approx(c2 + 4 / std::exp(1.0)));
}

TEST_CASE("choquet subcommand") {
  const auto r = run("choquet", R"({"schema_version": 1, "phi": "abs", "set": {"members": [
      {"atoms": [[-1, 0.5], [1, 0.5]]}, {"atoms": [[-2, 0.5], [2, 0.5]]}]}})");
  CHECK(r.summary["choquet_upper"].get<double>() == doctest::Approx(2.0));
  CHECK(r.summary["choquet_lower"].get<double>() == doctest::Approx(1.0));
  CHECK(r.summary["sublinear"].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("check-moment and run-lil exit codes") {
  CHECK(run("check-moment", R"({"schema_version": 1, "family": {"base": "pareto", "tail_index": 2}})").exit_code == 0);
  const auto lil = run("run-lil", R"({"schema_version": 1, "seed": 1, "n_max": 2000, "n_paths": 5})");
  CHECK((lil.exit_code == 0 || lil.exit_code == 1));
  CHECK(lil.summary["band_ok"].get<bool>() == (lil.exit_code == 0));
  CHECK_THROWS_AS(run("run-lil", R"({"schema_version": 1, "seed": 1, "schedule": "fibonacci"})"), ConfigError);
}

TEST_CASE("subcommand list") {
  const auto subs = app::subcommands();
  CHECK(subs.size() == 10);
  CHECK(std::find(subs.begin(), subs.end(), "selftest") != subs.end());
}
