// Command-line front end. Talks to the library only through the C interface.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sublin/sublin_c.h"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string config_path;
  std::string out;
  unsigned workers = 1;
  bool json_only = false;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

int status_exit(sublin_status s) {
  switch (s) {
    case SUBLIN_OK: return kExitOk;
    case SUBLIN_ERR_CONFIG:
    case SUBLIN_ERR_DOMAIN:
    case SUBLIN_ERR_ARGUMENT: return kExitConfig;
    default: return kExitFailed;
  }
}

void print_human(const std::string& sub, const json& s) {
  if (sub == "eval-gnormal") {
    std::printf("E[%s] = %.10g\n", s["phi"].get<std::string>().c_str(), s["value"].get<double>());
    if (s.contains("tree_value")) std::printf("lattice value = %.10g\n", s["tree_value"].get<double>());
    std::printf("maximal value = %.10g\n", s["maximal_value"].get<double>());
  } else if (sub == "solve-gheat") {
    std::printf("u(1, 0) = %.10g\n", s["value_at_origin"].get<double>());
  } else if (sub == "verify-ineq") {
    std::printf("%-10s %-14s %-14s %-12s %s\n", "dominated", "analytic", "empirical", "se", "inputs");
    for (const auto& c : s["cells"]) {
      std::printf("%-10s %-14.6g %-14.6g %-12.4g %s\n", c["dominated"].get<bool>() ? "yes" : "NO",
                  c["analytic_value"].get<double>(), c["empirical_estimate"].get<double>(),
                  c["standard_error"].get<double>(), c["inputs"].get<std::string>().c_str());
    }
    std::printf("all dominated: %s\n", s["all_dominated"].get<bool>() ? "true" : "false");
  } else if (sub == "selftest") {
    for (const auto& c : s["criteria"]) {
      std::printf("criterion %2d %s  %s  (%.1f s)  %s\n", c["id"].get<int>(), c["passed"].get<bool>() ? "PASS" : "FAIL",
                  c["title"].get<std::string>().c_str(), c["seconds"].get<double>(),
                  c["detail"].get<std::string>().c_str());
    }
  } else {
    json brief = s;
    brief.erase("effective_config");
    std::cout << brief.dump(2) << '\n';
  }
}

int run(const std::string& sub, const json& config, const Common& c, bool quick) {
  std::string out = c.out;
  if (out.empty()) {
    if (const char* env = std::getenv("SUBLIN_OUTPUT_DIR")) out = env;
  }
  int exit_code = 0;
  char* summary = nullptr;
  const auto st = sublin_run(sub.c_str(), config.dump().c_str(), out.c_str(), c.workers, quick ? 1 : 0, &exit_code,
                             &summary);
  if (st != SUBLIN_OK) {
    std::cerr << "sublin " << sub << ": " << sublin_last_error() << '\n';
    return status_exit(st);
  }
  const json s = json::parse(summary);
  sublin_string_free(summary);
  if (c.json_only) {
    std::cout << s.dump(2) << '\n';
  } else {
    print_human(sub, s);
  }
  return exit_code;
}

json load_config(const Common& c) {
  if (c.config_path.empty()) return json::object();
  const std::string text = read_file(c.config_path);
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    // let the library report line and column
    int code = 0;
    sublin_run("choquet", text.c_str(), "", 1, 0, &code, nullptr);
    throw std::runtime_error(std::string(c.config_path) + ": " + sublin_last_error());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-linear expectation toolkit"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out, "output directory (default: $SUBLIN_OUTPUT_DIR, else no files)");
  app.add_option("--workers", common.workers, "worker threads; results do not depend on it")
      ->check(CLI::Range(1u, 256u));
  app.add_flag("--json", common.json_only, "print the full JSON summary");

  std::string phi;
  double sigma_lo = -1.0;
  double sigma_hi = -1.0;
  std::size_t tree_depth = 0;
  std::size_t nx = 801;
  std::string bound;
  bool quick = false;
  std::vector<int> criteria;

  for (size_t i = 0; i < sublin_subcommand_count(); ++i) {
    const std::string name = sublin_subcommand_name(i);
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", common.config_path, "JSON config file");
    if (name == "eval-gnormal" || name == "solve-gheat") {
      sub->add_option("--phi", phi, "test function tag");
      sub->add_option("--sigma-lo", sigma_lo, "lower volatility (not squared)");
      sub->add_option("--sigma-hi", sigma_hi, "upper volatility (not squared)");
    }
    if (name == "eval-gnormal") sub->add_option("--tree-depth", tree_depth, "also evaluate the control lattice");
    if (name == "solve-gheat") sub->add_option("--nx", nx, "grid nodes");
    if (name == "verify-ineq") sub->add_option("--bound", bound, "bound name");
    if (name == "selftest") {
      sub->add_flag("--quick", quick, "axioms, G-normal oracles and a reduced Kolmogorov run");
      sub->add_option("--criteria", criteria, "criterion ids to run")->delimiter(',');
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return kExitOk;
    std::cerr << app.help();
    return kExitConfig;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    json config = load_config(common);
    if (!config.is_object()) throw std::runtime_error("config must be a JSON object");
    if (common.config_path.empty()) config["schema_version"] = 1;
    if (sub == "eval-gnormal" || sub == "solve-gheat") {
      if (!phi.empty()) config["phi_tag"] = phi;
      if (sigma_lo >= 0.0) config["sigma_lower_sq"] = sigma_lo * sigma_lo;
      if (sigma_hi >= 0.0) config["sigma_upper_sq"] = sigma_hi * sigma_hi;
      if (tree_depth > 0) config["tree_depth"] = tree_depth;
      if (sub == "solve-gheat" && !config.contains("nx")) config["nx"] = nx;
    }
    if (sub == "verify-ineq" && !bound.empty()) config["bound"] = bound;
    if (sub == "selftest" && !criteria.empty()) config["criteria"] = criteria;
    return run(sub, config, common, quick);
  } catch (const std::exception& e) {
    std::cerr << "sublin " << sub << ": " << e.what() << '\n';
    return kExitConfig;
  }
}
