#include "sublin/app.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "digest.hpp"
#include "sublin/acceptance.hpp"
#include "sublin/adversarial.hpp"
#include "sublin/errors.hpp"
#include "sublin/gnormal.hpp"
#include "sublin/inequality.hpp"
#include "sublin/limits.hpp"
#include "sublin/scenario.hpp"

extern const char* const kSublinCalibratedJson;

namespace sublin::app {

namespace {

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }

  template <class T>
  T get(const std::string& k, const T& fallback) {
    seen_.insert(k);
    T v = has(k) ? convert<T>(k) : fallback;
    eff_[k] = v;
    return v;
  }

  template <class T>
  T need(const std::string& k) {
    seen_.insert(k);
    if (!has(k)) throw ConfigError(where_ + ": missing required field '" + k + "'");
    T v = convert<T>(k);
    eff_[k] = v;
    return v;
  }

  /// Raw access; the caller records the effective value itself.
  const json* raw(const std::string& k) {
    seen_.insert(k);
    return has(k) ? &j_.at(k) : nullptr;
  }

  void effective(const std::string& k, json v) { eff_[k] = std::move(v); }

  json finish() {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(where_ + ": unknown field '" + item.key() + "'");
    }
    return eff_;
  }

 private:
  template <class T>
  T convert(const std::string& k) const {
    const json& v = j_.at(k);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where_ + ": field '" + k + "' must be true or false");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(where_ + ": field '" + k + "' must be a nonnegative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where_ + ": field '" + k + "' must be an integer");
    }
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + ": field '" + k + "' has the wrong type");
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
  json eff_ = json::object();
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_safe(std::string tag) {
  for (char& c : tag) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  return tag;
}

class Output {
 public:
  Output(const RunOptions& o, RunResult& r) : dir_(o.output_dir), result_(r) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }
  void write(const std::string& name, const std::string& content) {
    if (dir_.empty()) return;
    const auto path = std::filesystem::path(dir_) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << content;
    result_.files.push_back(path.string());
  }
  void finish(const json& summary, const std::string& stem) {
    result_.summary = summary;
    write(stem + "_summary.json", summary.dump(2) + "\n");
  }

 private:
  std::string dir_;
  RunResult& result_;
};

void check_schema(Reader& r) {
  const int v = r.need<int>("schema_version");
  if (v != kSchemaVersion) {
    throw ConfigError("schema_version " + std::to_string(v) + " does not match this build (" +
                      std::to_string(kSchemaVersion) + ")");
  }
}

sim::StepFamily parse_family(const json* j, json& eff, const gnormal::GParams& defaults) {
  const json empty = json::object();
  Reader r(j ? *j : empty, "family");
  sim::StepFamily f;
  f.base = sim::parse_base(r.get<std::string>("base", "two_point"));
  f.bounds.sigma_lower_sq = r.get("sigma_lower_sq", defaults.sigma_lower_sq);
  f.bounds.sigma_upper_sq = r.get("sigma_upper_sq", defaults.sigma_upper_sq);
  f.bounds.mu_lower = r.get("mu_lower", defaults.mu_lower);
  f.bounds.mu_upper = r.get("mu_upper", defaults.mu_upper);
  f.trunc_level = r.get("trunc_level", f.trunc_level);
  f.dof = r.get("dof", f.dof);
  f.tail_index = r.get("tail_index", f.tail_index);
  if (const json* cap = r.raw("cap")) {
    if (!cap->is_number()) throw ConfigError("family: field 'cap' must be a number or null");
    f.cap = cap->get<double>();
    r.effective("cap", *f.cap);
  } else {
    r.effective("cap", nullptr);
  }
  f.coupling = sim::parse_coupling(r.get<std::string>("coupling", "independent"));
  eff = r.finish();
  f.validate();
  return f;
}

sim::StepChoice parse_choice(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(where + ": expected [variance, mean]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json choice_json(const sim::StepChoice& c) { return json::array({c.variance, c.mean}); }

sim::AdversaryPolicy parse_policy(const json& j, const sim::GParams& bounds, json& eff) {
  Reader r(j, "policy");
  const auto kind = r.need<std::string>("kind");
  const double mean0 = std::clamp(0.0, bounds.mu_lower, bounds.mu_upper);
  const sim::StepChoice high_default{bounds.sigma_upper_sq, mean0};
  const sim::StepChoice low_default{bounds.sigma_lower_sq, mean0};
  const auto choice = [&](const std::string& key, sim::StepChoice fallback) {
    const json* v = r.raw(key);
    const auto c = v ? parse_choice(*v, "policy." + key) : fallback;
    r.effective(key, choice_json(c));
    return c;
  };
  sim::AdversaryPolicy p;
  if (kind == "constant") {
    p.name = r.get<std::string>("name", "const_custom");
    const double variance = r.get("variance", bounds.sigma_upper_sq);
    const double mean = r.get("mean", mean0);
    p.rule = sim::ConstantRule{{variance, mean}};
  } else if (kind == "threshold") {
    p.name = r.get<std::string>("name", "threshold_custom");
    sim::ThresholdRule t;
    t.level = r.get("level", 0.0);
    t.on_abs = r.get("on_abs", false);
    t.high_when_above = r.get("high_when_above", true);
    t.high = choice("high", high_default);
    t.low = choice("low", low_default);
    p.rule = t;
  } else if (kind == "randomized") {
    p.name = r.get<std::string>("name", "mix_custom");
    sim::RandomizedRule m;
    m.prob_high = r.get("prob_high", 0.5);
    if (!(m.prob_high >= 0.0 && m.prob_high <= 1.0)) throw ConfigError("policy: prob_high must lie in [0, 1]");
    m.high = choice("high", high_default);
    m.low = choice("low", low_default);
    p.rule = m;
  } else if (kind == "scripted") {
    p.name = r.get<std::string>("name", "scripted");
    const json* s = r.raw("script");
    if (!s || !s->is_array()) throw ConfigError("policy: scripted policies need a 'script' array");
    sim::ScriptedRule sr;
    json es = json::array();
    for (const auto& e : *s) {
      sr.script.push_back(parse_choice(e, "policy.script"));
      es.push_back(e);
    }
    r.effective("script", es);
    p.rule = sr;
  } else if (kind == "feedback") {
    const auto tag = r.need<std::string>("phi");
    const auto fb = sim::feedback_policy(make_test_function(tag), bounds);
    p.name = r.get<std::string>("name", fb.name);
    p.rule = fb.rule;
  } else {
    throw ConfigError("policy: unknown kind '" + kind + "'");
  }
  r.effective("kind", kind);
  p.rng_stream_id = r.get<std::uint64_t>("stream", 1);
  if (p.rng_stream_id == 0) throw ConfigError("policy: stream 0 is reserved for the step noise");
  eff = r.finish();
  return p;
}

std::vector<sim::AdversaryPolicy> parse_policies(const json* j, const json& fallback, const sim::GParams& bounds,
                                                 json& eff) {
  Reader r(j ? *j : fallback, "policies");
  std::vector<sim::AdversaryPolicy> out;
  if (const json* s = r.raw("standard")) {
    sim::PolicyFamilyOptions o;
    bool use = true;
    if (s->is_boolean()) {
      use = s->get<bool>();
      r.effective("standard", use);
    } else {
      Reader sr(*s, "policies.standard");
      o.constants = sr.get("constants", o.constants);
      o.threshold_levels = sr.get("threshold_levels", o.threshold_levels);
      o.abs_threshold_levels = sr.get("abs_threshold_levels", o.abs_threshold_levels);
      o.mixture_probs = sr.get("mixture_probs", o.mixture_probs);
      o.vary_mean = sr.get("vary_mean", o.vary_mean);
      r.effective("standard", sr.finish());
    }
    if (use) out = sim::standard_policy_family(bounds, o);
  } else {
    r.effective("standard", false);
  }
  const auto tags = r.get<std::vector<std::string>>("feedback", {});
  for (const auto& t : tags) out.push_back(sim::feedback_policy(make_test_function(t), bounds));
  json custom = json::array();
  if (const json* c = r.raw("custom")) {
    if (!c->is_array()) throw ConfigError("policies: 'custom' must be an array");
    for (const auto& pj : *c) {
      json pe;
      out.push_back(parse_policy(pj, bounds, pe));
      custom.push_back(pe);
    }
  }
  r.effective("custom", custom);
  eff = r.finish();
  if (out.empty()) throw ConfigError("policies: the policy family is empty");
  std::set<std::string> names;
  for (const auto& p : out) {
    if (!names.insert(p.name).second) throw ConfigError("policies: duplicate policy name '" + p.name + "'");
  }
  return out;
}

std::vector<TestFunction> parse_phis(Reader& r, const std::string& key, const std::vector<std::string>& fallback) {
  const auto tags = r.get<std::vector<std::string>>(key, fallback);
  if (tags.empty()) throw ConfigError("'" + key + "' must not be empty");
  std::vector<TestFunction> out;
  for (const auto& t : tags) out.push_back(make_test_function(t));
  return out;
}

// ---------------------------------------------------------------- solve-gheat

RunResult run_solve(const json& config, const RunOptions& options) {
  RunResult res;
  Reader r(config, "config");
  check_schema(r);
  const auto phi = make_test_function(r.need<std::string>("phi_tag"));
  const auto params = gnormal::GParams::variance(r.need<double>("sigma_lower_sq"), r.need<double>("sigma_upper_sq"));
  params.validate();
  const double t = r.get("t_horizon", 1.0);
  if (!(t > 0.0)) throw ConfigError("t_horizon must be positive");
  const auto nx = r.get<std::size_t>("nx", 801);
  const double half = r.get("half_width", gnormal::truncation_half_width(phi, params, t));
  auto grid = gnormal::stable_grid(params, -half, half, nx, t);
  grid.nt = r.get<std::size_t>("nt", grid.nt);
  const auto rows = r.get<std::size_t>("rows", 101);
  if (rows < 2) throw ConfigError("rows must be >= 2");
  json eff = r.finish();

  gnormal::SolveOptions so;
  so.store_every = std::max<std::size_t>(1, grid.nt / (rows - 1));
  const auto sol = gnormal::solve_g_heat(phi, params, grid, so);

  Output out(options, res);
  std::ostringstream csv;
  csv << "t,x,u\n";
  for (std::size_t k = 0; k < sol.time_indices.size(); ++k) {
    const auto row = sol.row(k);
    for (std::size_t i = 0; i < grid.nx; ++i) csv << fmt(sol.time(k)) << ',' << fmt(grid.x(i)) << ',' << fmt(row[i]) << '\n';
  }
  out.write("gheat_surface.csv", csv.str());
  std::ostringstream plot;
  const auto last = sol.final_row();
  for (std::size_t i = 0; i < grid.nx; ++i) plot << fmt(grid.x(i)) << ' ' << fmt(last[i]) << '\n';
  out.write("gheat_final_profile.dat", plot.str());

  json s;
  s["value_at_origin"] = sol.value_at_origin();
  s["scheme_params"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"nx", grid.nx},      {"nt", grid.nt},
                        {"dx", grid.dx()},     {"dt", grid.dt()},     {"t_horizon", t},     {"stability_margin", gnormal::kStabilityMargin},
                        {"rows_stored", sol.time_indices.size()}};
  s["effective_config"] = eff;
  out.finish(s, "gheat");
  return res;
}

// ---------------------------------------------------------------- eval-gnormal

RunResult run_eval(const json& config, const RunOptions& options) {
  RunResult res;
  Reader r(config, "config");
  check_schema(r);
  const auto phi = make_test_function(r.need<std::string>("phi_tag"));
  gnormal::GParams params;
  params.sigma_lower_sq = r.need<double>("sigma_lower_sq");
  params.sigma_upper_sq = r.need<double>("sigma_upper_sq");
  params.mu_lower = r.get("mu_lower", 0.0);
  params.mu_upper = r.get("mu_upper", 0.0);
  params.validate();
  const auto resolution = r.get<std::size_t>("resolution", gnormal::kDefaultResolution);
  const auto depth = r.get<std::size_t>("tree_depth", 0);
  json eff = r.finish();

  json s;
  s["phi"] = phi.tag;
  s["value"] = gnormal::gnormal_expect(phi, gnormal::GParams::variance(params.sigma_lower_sq, params.sigma_upper_sq),
                                       resolution);
  if (depth > 0) s["tree_value"] = gnormal::control_tree_value(phi, params, depth);
  s["maximal_value"] = gnormal::maximal_expect(phi, params);
  s["effective_config"] = eff;
  Output out(options, res);
  out.finish(s, "gnormal");
  return res;
}

// ---------------------------------------------------------------- simulate

RunResult run_simulate(const json& config, const RunOptions& options) {
  RunResult res;
  Reader r(config, "config");
  check_schema(r);
  const auto seed = r.need<std::uint64_t>("seed");
  json fam_eff;
  const auto family = parse_family(r.raw("family"), fam_eff, gnormal::GParams::variance(1.0, 1.0));
  r.effective("family", fam_eff);
  json pol_eff;
  const auto policies = parse_policies(r.raw("policies"), json{{"standard", true}}, family.bounds, pol_eff);
  r.effective("policies", pol_eff);
  const auto n_steps = r.need<std::size_t>("n_steps");
  const auto n_paths = r.need<std::size_t>("n_paths");
  const auto cps = r.get<std::vector<std::size_t>>("checkpoints", {});
  const double moment_p = r.get("moment_p", 3.0);
  json eff = r.finish();

  sim::SimOptions so;
  so.checkpoints = cps;
  so.workers = options.workers;
  so.moment_p = moment_p;
  const auto batches = sim::simulate_family(family, policies, n_steps, n_paths, seed, so);

  Output out(options, res);
  std::ostringstream paths;
  paths << "policy,path,final_sum,max_step,max_sum,min_sum,max_abs_sum,policy_b\n";
  std::ostringstream cp;
  cp << "policy,n,mean_sum,mean_sq_sum\n";
  json per = json::array();
  Digest d;
  for (std::size_t k = 0; k < batches.size(); ++k) {
    const auto& b = batches[k];
    double mean = 0.0;
    double sq = 0.0;
    double abs_max = 0.0;
    for (std::size_t i = 0; i < b.n_paths; ++i) {
      const auto& s = b.summaries[i];
      paths << b.policy_name << ',' << i << ',' << fmt(s.final_sum) << ',' << fmt(s.max_step) << ','
            << fmt(s.max_sum) << ',' << fmt(s.min_sum) << ',' << fmt(s.max_abs_sum) << ',' << fmt(s.policy_b)
            << '\n';
      mean += s.final_sum;
      sq += s.final_sum * s.final_sum;
      abs_max += s.max_abs_sum;
    }
    const double n = static_cast<double>(b.n_paths);
    mean /= n;
    sq /= n;
    abs_max /= n;
    for (std::size_t c = 0; c < b.checkpoints.size(); ++c) {
      double m1 = 0.0;
      double m2 = 0.0;
      for (std::size_t i = 0; i < b.n_paths; ++i) {
        m1 += b.checkpoint(i, c);
        m2 += b.checkpoint(i, c) * b.checkpoint(i, c);
      }
      cp << b.policy_name << ',' << b.checkpoints[c] << ',' << fmt(m1 / n) << ',' << fmt(m2 / n) << '\n';
      d.add(m1);
      d.add(m2);
    }
    d.add(mean);
    d.add(sq);
    d.add(abs_max);
    per.push_back({{"policy", b.policy_name},
                   {"kind", policies[k].kind()},
                   {"mean_final_sum", mean},
                   {"mean_sq_final_sum", sq},
                   {"mean_max_abs_sum", abs_max}});
  }
  out.write("simulate_paths.csv", paths.str());
  if (!cps.empty()) out.write("simulate_checkpoints.csv", cp.str());

  json s;
  s["n_steps"] = n_steps;
  s["n_paths"] = n_paths;
  s["b_n"] = batches.front().b_n;
  s["m_np"] = batches.front().m_np;
  s["policies"] = per;
  s["digest"] = hex(d.value());
  s["effective_config"] = eff;
  out.finish(s, "simulate");
  return res;
}

// ---------------------------------------------------------------- verify-ineq

std::string p_key(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

double lookup_constant(const std::string& bound, const std::string& base, double p) {
  const auto& c = calibrated_constants();
  const auto key = p_key(p);
  if (c.contains(bound) && c[bound].contains(base) && c[bound][base].contains(key)) {
    return c[bound][base][key].get<double>();
  }
  throw ConfigError("no calibrated constant for bound '" + bound + "', family '" + base + "', p = " + key +
                    "; set 'constant' in the config");
}

bool needs_constant(const std::string& bound) {
  return bound == "fuk-nagaev" || bound == "chebyshev" || bound == "rosenthal-choquet" || bound == "rosenthal-moment";
}

RunResult run_verify(const json& config, const RunOptions& options) {
  RunResult res;
  Reader r(config, "config");
  check_schema(r);
  const auto bound = r.need<std::string>("bound");
  ineq::VerifyConfig v;
  v.seed = r.need<std::uint64_t>("seed");
  json fam_eff;
  v.family = parse_family(r.raw("family"), fam_eff, gnormal::GParams::variance(1.0, 1.0));
  v.family_tag = sim::to_string(v.family.base);
  r.effective("family", fam_eff);
  json pol_eff;
  v.policies = parse_policies(r.raw("policies"), json{{"standard", true}}, v.family.bounds, pol_eff);
  r.effective("policies", pol_eff);
  v.n = r.get<std::size_t>("n", 1000);
  v.n_paths = r.get<std::size_t>("n_paths", 100000);
  v.x_grid = r.get<std::vector<double>>("x_grid", {1.0, 1.5, 2.0, 2.5, 3.0});
  v.y_grid = r.get<std::vector<double>>("y_grid", {});
  v.deltas = r.get<std::vector<double>>("deltas", {1.0});
  v.p_list = r.get<std::vector<double>>("p_list", {2.0});
  v.epsilon = r.get("epsilon", 0.5);
  v.n_list = r.get<std::vector<std::size_t>>("n_list", {10000, 100000});
  v.se_slack = r.get("se_slack", 3.0);
  v.min_paths_warning = r.get<std::size_t>("min_paths_warning", 1000);
  v.workers = options.workers;
  if (v.deltas.empty()) throw ConfigError("deltas must not be empty");

  // one verification per p when the constant depends on p
  std::vector<std::pair<std::vector<double>, double>> runs;
  const json* cj = r.raw("constant");
  json c_eff;
  if (!needs_constant(bound)) {
    const double c = cj && cj->is_number() ? cj->get<double>() : 1.0;
    runs.push_back({v.p_list, c});
    c_eff = c;
  } else if (cj && cj->is_number()) {
    runs.push_back({v.p_list, cj->get<double>()});
    c_eff = cj->get<double>();
  } else {
    c_eff = json::object();
    for (double p : v.p_list) {
      const auto key = p_key(p);
      const double c = cj && cj->is_object() && cj->contains(key) ? cj->at(key).get<double>()
                                                                  : lookup_constant(bound, v.family_tag, p);
      runs.push_back({{p}, c});
      c_eff[key] = c;
    }
  }
  r.effective("constant", c_eff);
  json eff = r.finish();

  ineq::BoundVerification all{bound, {}};
  for (const auto& [ps, c] : runs) {
    auto vc = v;
    vc.p_list = ps;
    vc.constant = c;
    auto part = ineq::verify_bound(bound, vc);
    all.cells.insert(all.cells.end(), part.cells.begin(), part.cells.end());
  }

  Output out(options, res);
  std::ostringstream csv;
  csv << "bound,inputs,analytic_value,empirical_estimate,standard_error,dominated,warning\n";
  json cells = json::array();
  Digest d;
  for (const auto& c : all.cells) {
    csv << c.bound_name << ",\"" << c.inputs << "\"," << fmt(c.analytic_value) << ',' << fmt(c.empirical_estimate)
        << ',' << fmt(c.standard_error) << ',' << (c.dominated ? "true" : "false") << ",\"" << c.warning << "\"\n";
    cells.push_back({{"bound_name", c.bound_name},
                     {"inputs", c.inputs},
                     {"analytic_value", c.analytic_value},
                     {"empirical_estimate", c.empirical_estimate},
                     {"standard_error", c.standard_error},
                     {"dominated", c.dominated},
                     {"warning", c.warning}});
    d.add(c.analytic_value);
    d.add(c.empirical_estimate);
    d.add(c.standard_error);
  }
  out.write("verify_" + file_safe(bound) + ".csv", csv.str());
  json s;
  s["bound"] = bound;
  s["all_dominated"] = all.all_dominated();
  s["cells"] = cells;
  s["digest"] = hex(d.value());
  s["effective_config"] = eff;
  out.finish(s, "verify_" + file_safe(bound));
  res.exit_code = all.all_dominated() ? 0 : 1;
  return res;
}

// ---------------------------------------------------------------- run-clt / run-wlln

json table_json(const limits::ConvergenceTable& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    rows.push_back({{"n", row.n},
                    {"estimate", row.estimate},
                    {"standard_error", row.standard_error},
                    {"policy", row.policy},
                    {"error", row.error}});
  }
  return {{"phi", t.phi_tag}, {"reference", t.reference}, {"rows", rows}, {"monotone", t.monotone},
          {"final_error", t.final_error}};
}

RunResult run_limit(const std::string& which, const json& config, const RunOptions& options) {
  RunResult res;
  const bool clt = which == "clt";
  Reader r(config, "config");
  check_schema(r);
  limits::LimitConfig c;
  c.seed = r.need<std::uint64_t>("seed");
  json fam_eff;
  c.family = parse_family(r.raw("family"), fam_eff,
                          clt ? gnormal::GParams::variance(0.25, 1.0) : gnormal::GParams{1.0, 1.0, -1.0, 1.0});
  r.effective("family", fam_eff);
  const auto phis = parse_phis(r, "phis",
                               clt ? std::vector<std::string>{"clip:1", "tanh", "small_ball:1", "call_spread:1", "butterfly:1"}
                                   : std::vector<std::string>{"identity", "neg_abs", "tanh"});
  json fallback;
  if (clt) {
    json tags = json::array();
    for (const auto& p : phis) tags.push_back(p.tag);
    fallback = {{"standard", true}, {"feedback", tags}};
  } else {
    fallback = {{"standard", {{"vary_mean", true}}}};
  }
  json pol_eff;
  c.policies = parse_policies(r.raw("policies"), fallback, c.family.bounds, pol_eff);
  r.effective("policies", pol_eff);
  c.n_list = r.get<std::vector<std::size_t>>("n_list", {100, 1000, 10000});
  c.n_paths = r.get<std::size_t>("n_paths", clt ? 10000 : 4000);
  c.pde_resolution = r.get<std::size_t>("pde_resolution", gnormal::kDefaultResolution);
  const double tolerance = r.get("tolerance", clt ? 0.03 : 0.05);
  json eff = r.finish();
  c.workers = options.workers;

  const auto tables = clt ? limits::clt_experiment(phis, c) : limits::wlln_experiment(phis, c);

  Output out(options, res);
  std::ostringstream csv;
  csv << "phi,n,estimate,standard_error,policy,reference,error\n";
  json jt = json::array();
  bool passed = true;
  Digest d;
  for (const auto& t : tables) {
    std::ostringstream plot;
    for (const auto& row : t.rows) {
      csv << t.phi_tag << ',' << row.n << ',' << fmt(row.estimate) << ',' << fmt(row.standard_error) << ','
          << row.policy << ',' << fmt(row.reference) << ',' << fmt(row.error) << '\n';
      plot << row.n << ' ' << fmt(row.error) << ' ' << fmt(row.standard_error) << '\n';
      d.add(row.estimate);
      d.add(row.standard_error);
    }
    out.write(which + "_" + file_safe(t.phi_tag) + ".dat", plot.str());
    jt.push_back(table_json(t));
    passed = passed && t.monotone && t.final_error <= tolerance;
  }
  out.write(which + "_table.csv", csv.str());
  json s;
  s["tables"] = jt;
  s["tolerance"] = tolerance;
  s["passed"] = passed;
  s["digest"] = hex(d.value());
  s["effective_config"] = eff;
  out.finish(s, which);
  res.exit_code = passed ? 0 : 1;
  return res;
}

// ---------------------------------------------------------------- run-lil

RunResult run_lil(const json& config, const RunOptions& options) {
  RunResult res;
  Reader r(config, "config");
  check_schema(r);
  limits::LilConfig c;
  c.seed = r.need<std::uint64_t>("seed");
  json fam_eff;
  c.family = parse_family(r.raw("family"), fam_eff, gnormal::GParams::variance(1.0, 1.0));
  r.effective("family", fam_eff);
  const json fallback = {{"kind", "constant"}, {"name", "const_high"}, {"variance", c.family.bounds.sigma_upper_sq},
                         {"mean", 0.0}};
  const json* pj = r.raw("policy");
  json pol_eff;
  c.policy = parse_policy(pj ? *pj : fallback, c.family.bounds, pol_eff);
  r.effective("policy", pol_eff);
  c.n_max = r.get<std::size_t>("n_max", c.n_max);
  c.n_paths = r.get<std::size_t>("n_paths", c.n_paths);
  const auto schedule = r.get<std::string>("schedule", "geometric");
  c.ratio = r.get("ratio", c.ratio);
  if (schedule == "power") {
    c.checkpoints = limits::power_checkpoints(c.n_max);
  } else if (schedule != "geometric") {
    throw ConfigError("schedule must be 'geometric' or 'power'");
  }
  c.running_from = r.get<std::size_t>("running_from", c.running_from);
  c.band = r.get("band", c.band);
  c.bin_width = r.get("bin_width", c.bin_width);
  c.band_low = r.get("band_low", c.band_low);
  c.band_high = r.get("band_high", c.band_high);
  c.hard_cap = r.get("hard_cap", c.hard_cap);
  json eff = r.finish();
  c.workers = options.workers;

  const auto lr = limits::lil_experiment(c);
  const auto& tr = lr.trace;
  const std::size_t m = tr.checkpoints.size();

  Output out(options, res);
  std::ostringstream trace;
  trace << "path,n,a_n,ratio\n";
  for (std::size_t p = 0; p < tr.n_paths; ++p) {
    for (std::size_t k = 0; k < m; ++k) {
      trace << p << ',' << tr.checkpoints[k] << ',' << fmt(tr.a_n[k]) << ',' << fmt(tr.ratio(p, k)) << '\n';
    }
  }
  out.write("lil_trace.csv", trace.str());
  std::ostringstream running;
  running << "path,running_max,running_min\n";
  for (std::size_t p = 0; p < tr.n_paths; ++p) {
    running << p << ',' << fmt(tr.running_max[p]) << ',' << fmt(tr.running_min[p]) << '\n';
  }
  out.write("lil_running.csv", running.str());
  std::ostringstream cluster;
  cluster << "bin_low,bin_high,visits\n";
  for (std::size_t i = 0; i < lr.cluster.visits.size(); ++i) {
    const double lo = lr.cluster.bin_origin + static_cast<double>(i) * lr.cluster.bin_width;
    cluster << fmt(lo) << ',' << fmt(lo + lr.cluster.bin_width) << ',' << lr.cluster.visits[i] << '\n';
  }
  out.write("lil_cluster.csv", cluster.str());
  std::ostringstream env;
  for (std::size_t k = 0; k < m; ++k) {
    double hi = -INFINITY;
    double lo = INFINITY;
    for (std::size_t p = 0; p < tr.n_paths; ++p) {
      hi = std::max(hi, tr.ratio(p, k));
      lo = std::min(lo, tr.ratio(p, k));
    }
    env << tr.checkpoints[k] << ' ' << fmt(lo) << ' ' << fmt(hi) << '\n';
  }
  out.write("lil_envelope.dat", env.str());

  Digest d;
  d.add(tr.ratios);
  json s;
  s["checkpoints"] = m;
  s["fraction_in_band"] = lr.fraction_in_band;
  s["overall_max"] = lr.overall_max;
  s["band_ok"] = lr.band_ok;
  s["cluster"] = {{"liminf", lr.cluster.liminf},          {"limsup", lr.cluster.limsup},
                  {"outer", lr.cluster.outer},            {"inner", lr.cluster.inner},
                  {"within_outer", lr.cluster.within_outer}, {"covers_inner", lr.cluster.covers_inner}};
  s["note"] = "banded desk-scale check of an asymptotic statement";
  s["digest"] = hex(d.value());
  s["effective_config"] = eff;
  out.finish(s, "lil");
  res.exit_code = lr.band_ok ? 0 : 1;
  return res;
}

// ---------------------------------------------------------------- check-moment

RunResult run_moment(const json& config, const RunOptions& options) {
  RunResult res;
  Reader r(config, "config");
  check_schema(r);
  json fam_eff;
  const auto family = parse_family(r.raw("family"), fam_eff, gnormal::GParams::variance(1.0, 1.0));
  r.effective("family", fam_eff);
  limits::MomentCheckOptions o;
  o.deltas = r.get("deltas", o.deltas);
  o.series_decades = r.get("series_decades", o.series_decades);
  o.integral_decades = r.get("integral_decades", o.integral_decades);
  o.p = r.get("p", o.p);
  o.divergence_ratio = r.get("divergence_ratio", o.divergence_ratio);
  json eff = r.finish();

  const auto rep = limits::choquet_moment_check(family, o);
  Output out(options, res);
  std::ostringstream csv;
  csv << "delta,side,decade,increment\n";
  json rows = json::array();
  for (const auto& row : rep.rows) {
    const auto dump = [&](const char* side, const std::vector<double>& inc) {
      for (std::size_t j = 0; j < inc.size(); ++j) csv << fmt(row.delta) << ',' << side << ',' << j << ',' << fmt(inc[j]) << '\n';
    };
    dump("series", row.series_increments);
    dump("integral", row.integral_increments);
    dump("power_series", row.power_increments);
    rows.push_back({{"delta", row.delta},
                    {"series_convergent", row.series_convergent},
                    {"integral_convergent", row.integral_convergent},
                    {"power_series_convergent", row.power_convergent}});
  }
  out.write("moment_increments.csv", csv.str());
  json s;
  s["family"] = rep.family;
  s["tail_note"] = rep.tail_note;
  s["satisfied"] = rep.satisfied;
  s["consistent"] = rep.consistent;
  s["rows"] = rows;
  s["effective_config"] = eff;
  out.finish(s, "moment");
  res.exit_code = rep.consistent ? 0 : 1;
  return res;
}

// ---------------------------------------------------------------- choquet

RunResult run_choquet(const json& config, const RunOptions& options) {
  RunResult res;
  Reader r(config, "config");
  check_schema(r);
  const json* sj = r.raw("set");
  if (!sj) throw ConfigError("config: missing required field 'set'");
  const auto set = scenario::scenario_set_from_json(sj->dump());
  r.effective("set", json::parse(scenario::to_json(set)));
  const auto phi = make_test_function(r.get<std::string>("phi", "identity"));
  json eff = r.finish();

  const auto f = [&](scenario::Point x) { return phi(x[0]); };
  json s;
  s["phi"] = phi.tag;
  s["sublinear"] = scenario::sublinear_expect(set, f);
  s["conjugate"] = scenario::conjugate_expect(set, f);
  s["choquet_upper"] = scenario::choquet_integral(set, scenario::CapacityKind::upper, f);
  s["choquet_lower"] = scenario::choquet_integral(set, scenario::CapacityKind::lower, f);
  s["argmax_member"] = scenario::argmax_member(set, f);
  s["effective_config"] = eff;
  Output out(options, res);
  out.finish(s, "choquet");
  return res;
}

// ---------------------------------------------------------------- selftest

RunResult run_selftest(const json& config, const RunOptions& options) {
  RunResult res;
  Reader r(config, "config");
  check_schema(r);
  acceptance::SuiteOptions so;
  so.criteria = r.get<std::vector<int>>("criteria", {});
  so.quick = r.get("quick", options.quick);
  so.workers = options.workers;
  json eff = r.finish();
  const auto results = acceptance::run_suite(so);
  json rows = json::array();
  bool ok = true;
  for (const auto& c : results) {
    rows.push_back({{"id", c.id}, {"title", c.title}, {"passed", c.passed}, {"detail", c.detail}, {"seconds", c.seconds}});
    ok = ok && c.passed;
  }
  json s;
  s["criteria"] = rows;
  s["passed"] = ok;
  s["effective_config"] = eff;
  Output out(options, res);
  out.finish(s, "selftest");
  res.exit_code = ok ? 0 : 1;
  return res;
}

}  // namespace

std::vector<std::string> subcommands() {
  return {"solve-gheat", "eval-gnormal", "simulate", "verify-ineq", "run-clt",
          "run-wlln",    "run-lil",      "check-moment", "choquet", "selftest"};
}

json parse_config(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
}

RunResult run(const std::string& sub, const json& config_in, const RunOptions& options_in) {
  // an output_dir inside the config applies when the caller did not pick one
  json config = config_in;
  RunOptions options = options_in;
  if (config.is_object() && config.contains("output_dir")) {
    if (!config["output_dir"].is_string()) throw ConfigError("config: field 'output_dir' must be a string");
    if (options.output_dir.empty()) options.output_dir = config["output_dir"].get<std::string>();
    config.erase("output_dir");
  }
  if (sub == "solve-gheat") return run_solve(config, options);
  if (sub == "eval-gnormal") return run_eval(config, options);
  if (sub == "simulate") return run_simulate(config, options);
  if (sub == "verify-ineq") return run_verify(config, options);
  if (sub == "run-clt") return run_limit("clt", config, options);
  if (sub == "run-wlln") return run_limit("wlln", config, options);
  if (sub == "run-lil") return run_lil(config, options);
  if (sub == "check-moment") return run_moment(config, options);
  if (sub == "choquet") return run_choquet(config, options);
  if (sub == "selftest") return run_selftest(config, options);
  throw ConfigError("unknown subcommand '" + sub + "'");
}

const json& calibrated_constants() {
  static const json c = json::parse(kSublinCalibratedJson);
  return c;
}

}  // namespace sublin::app
