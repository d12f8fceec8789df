// regen-bounds: convergence bounds for renewal overshoot processes and their
// Monte Carlo verification.
//
//   regen-bounds bound    --dist JSON [--ell N] [--b X] [--theta auto|X] ...
//   regen-bounds simulate --dist JSON --seed S [--t X | --t-grid LIST] [--paths N]
//   regen-bounds couple   --dist JSON --seed S [--b X] [--b-prime X] [--traces N]
//   regen-bounds verify   --dist JSON --seed S [--ell N] [--t-grid LIST] [--paths N]
//   regen-bounds verify   --matrix standard --seed S
//   regen-bounds verify   --check marginals --dist JSON --seed S --b X --b-prime X
//
// Exit codes: 0 success, 1 configuration error, 2 mathematical precondition
// failure, 3 verification failure.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "regen/regen.hpp"

namespace {

using nlohmann::json;
using namespace regen;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitMath = 2;
constexpr int kExitVerify = 3;

// Raw command-line values; empty optionals fall back to the config file.
struct Flags {
  std::optional<std::string> dist;
  std::optional<std::string> config;
  std::optional<int> ell;
  std::optional<double> b;
  std::optional<double> b_prime;
  std::optional<std::string> theta;
  std::optional<double> theta_max;
  std::optional<std::string> optimize;
  std::optional<std::string> alpha;
  bool strict_series = false;
  bool exponential = false;
  std::optional<std::string> t_grid;
  std::optional<double> t;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> traces;
  std::optional<std::size_t> bins;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::optional<std::string> out;
  std::optional<std::string> csv;
  std::optional<std::string> traces_out;
  std::optional<double> inject_bound_scale;
  bool shared_first_gap = false;
  bool skip_residual_branch = false;
  bool epochs = false;
  std::optional<std::string> matrix;
  std::optional<std::string> check;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Flag values first, then the JSON config file, then defaults.
class Settings {
 public:
  Settings(const Flags& f, json file) : f_(f), file_(std::move(file)) {}

  const Flags& flags() const { return f_; }

  template <class T>
  std::optional<T> from_file(const char* key) const {
    if (!file_.contains(key)) return std::nullopt;
    try {
      return file_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(key, std::string("config entry has the wrong type"));
    }
  }

  template <class T>
  std::optional<T> get(const std::optional<T>& flag, const char* key) const {
    if (flag) return flag;
    return from_file<T>(key);
  }

  template <class T>
  T get(const std::optional<T>& flag, const char* key, T fallback) const {
    auto v = get(flag, key);
    return v ? *v : fallback;
  }

  bool get_bool(bool flag, const char* key) const {
    if (flag) return true;
    return from_file<bool>(key).value_or(false);
  }

  LifetimeModel model() const {
    if (f_.dist) {
      json spec;
      try {
        spec = json::parse(*f_.dist);
      } catch (const json::exception& e) {
        throw ConfigError("dist", std::string("not valid JSON: ") + e.what());
      }
      return model_from_json(spec);
    }
    if (file_.contains("dist")) return model_from_json(file_.at("dist"));
    throw ConfigError("dist", "a distribution is required (--dist or \"dist\" in the config file)");
  }

  std::uint64_t seed() const {
    auto s = get(f_.seed, "seed");
    if (!s) throw ConfigError("seed", "a seed is required for this command");
    return *s;
  }

  unsigned jobs() const {
    if (auto j = get(f_.jobs, "jobs")) {
      if (*j == 0) throw ConfigError("jobs", "must be at least 1");
      return *j;
    }
    if (const char* env = std::getenv("REGEN_BOUNDS_JOBS")) {
      try {
        const long v = std::stol(env);
        if (v >= 1) return static_cast<unsigned>(v);
      } catch (const std::exception&) {
      }
      throw ConfigError("REGEN_BOUNDS_JOBS", "must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
  }

  /// "auto" (or absent) means optimize.
  std::optional<double> theta() const {
    if (f_.theta) return parse_auto(*f_.theta, "theta");
    if (!file_.contains("theta")) return std::nullopt;
    const json& v = file_.at("theta");
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_auto(v.get<std::string>(), "theta");
    throw ConfigError("theta", "must be a number or \"auto\"");
  }

  std::optional<double> alpha() const {
    if (f_.alpha) return parse_auto(*f_.alpha, "alpha");
    if (!file_.contains("alpha")) return std::nullopt;
    const json& v = file_.at("alpha");
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_auto(v.get<std::string>(), "alpha");
    throw ConfigError("alpha", "must be a number or \"auto\"");
  }

  std::optional<std::vector<double>> t_grid() const {
    std::vector<double> g;
    if (f_.t_grid) {
      std::stringstream ss(*f_.t_grid);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          std::size_t used = 0;
          g.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          throw ConfigError("t-grid", "expected a comma-separated list of numbers");
        }
      }
    } else if (file_.contains("t-grid")) {
      try {
        g = file_.at("t-grid").get<std::vector<double>>();
      } catch (const json::exception&) {
        throw ConfigError("t-grid", "expected an array of numbers");
      }
    } else {
      return std::nullopt;
    }
    if (g.empty()) throw ConfigError("t-grid", "must not be empty");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(g[i] >= 0.0) || !std::isfinite(g[i])) throw ConfigError("t-grid", "times must be finite and >= 0");
      if (i > 0 && !(g[i] > g[i - 1])) throw ConfigError("t-grid", "must be strictly increasing");
    }
    return g;
  }

  std::size_t count(const std::optional<std::size_t>& flag, const char* key, std::size_t fallback) const {
    const std::size_t n = get(flag, key, fallback);
    if (n < 1) throw ConfigError(key, "must be at least 1");
    return n;
  }

  int ell() const {
    const int l = get(f_.ell, "ell", 1);
    if (l < 1) throw ConfigError("ell", "must be a positive integer");
    return l;
  }

 private:
  static std::optional<double> parse_auto(const std::string& s, const char* field) {
    if (s == "auto") return std::nullopt;
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(field, "expected a number or \"auto\"");
    }
  }

  const Flags& f_;
  json file_;
};

// Writes text to a file, or to stdout when no path is given.
void emit(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream os(*path, std::ios::binary);
  if (!os) throw ConfigError("out", "cannot open " + *path + " for writing");
  os << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

double resolve_theta(const Settings& s, const LifetimeModel& model) {
  if (auto th = s.theta()) return *th;
  const double tmax = s.get(s.flags().theta_max, "theta-max", default_theta_max(model));
  return optimize_theta(model, tmax).theta;
}

double default_horizon(const LifetimeModel& model) { return 1e4 * model.mean(); }

// ---------------------------------------------------------------------------

int cmd_bound(const Settings& s) {
  const LifetimeModel model = s.model();
  BoundRequest req;
  req.ell = s.ell();
  req.b = s.get(s.flags().b, "b", 0.0);
  req.b_prime = s.get(s.flags().b_prime, "b-prime", 0.0);
  req.theta = s.theta();
  req.theta_max = s.get(s.flags().theta_max, "theta-max");
  req.strict_series = s.get_bool(s.flags().strict_series, "strict-series");
  const std::string objective = s.get(s.flags().optimize, "optimize", std::string("kappa"));
  if (objective == "kappa") {
    req.objective = ThetaObjective::kappa;
  } else if (objective == "upsilon") {
    req.objective = ThetaObjective::upsilon;
  } else {
    throw ConfigError("optimize", "must be kappa or upsilon");
  }
  if (auto g = s.t_grid()) req.curve_times = *g;

  const BoundReport rep = compute_bound_report(model, req);
  json out = to_json(rep);
  out["dist"] = to_json(model);
  out["strict_series"] = req.strict_series;

  // The exponential bound is reported when available; requesting it
  // explicitly (--exponential or --alpha) makes unavailability an error.
  const std::optional<double> alpha_flag = s.alpha();
  const bool required = s.get_bool(s.flags().exponential, "exponential") || alpha_flag.has_value();
  std::vector<double> times;
  for (const auto& [t, v] : rep.curve) times.push_back(t);
  try {
    const double alpha = alpha_flag ? *alpha_flag : default_alpha(model);
    if (!(alpha > 0.0)) throw DivergenceError("E exp(alpha xi) is infinite for every alpha > 0");
    const ExpBoundReport ex = exponential_rate(model, req.b, req.b_prime, rep.params, alpha);
    out["exponential"] = to_json(ex, times);
    out["exponential"]["available"] = true;
  } catch (const Error& e) {
    if (required) throw;
    out["exponential"] = {{"available", false}, {"error", e.code()}, {"message", e.what()}};
  }
  emit(s.get(s.flags().out, "out"), dump(out));
  return kExitOk;
}

int cmd_simulate(const Settings& s) {
  const LifetimeModel model = s.model();
  const MonteCarlo mc{s.seed(), s.jobs()};
  const double b = s.get(s.flags().b, "b", 0.0);
  const std::size_t n = s.count(s.flags().paths, "paths", 1000);
  std::vector<double> times;
  if (auto g = s.t_grid()) {
    times = *g;
  } else if (auto t = s.get(s.flags().t, "t")) {
    if (!(*t >= 0.0) || !std::isfinite(*t)) throw ConfigError("t", "must be finite and >= 0");
    times = {*t};
  } else {
    throw ConfigError("t", "a time (--t) or a grid (--t-grid) is required");
  }

  std::ostringstream os;
  if (s.get_bool(s.flags().epochs, "epochs")) {
    const double horizon = times.back();
    if (!(horizon > 0.0)) throw ConfigError("t", "the horizon for epoch output must be positive");
    std::vector<RenewalPath> paths(n);
    parallel_for(n, mc.jobs, [&](std::size_t i) {
      UniformStream stream = mc.substream(StreamTag::renewal, i);
      paths[i] = simulate_renewal(model, b, horizon, stream);
    });
    write_paths_csv(os, paths);
  } else {
    const auto rows = overshoot_samples(model, b, times, n, mc);
    os << "path_id,t,overshoot\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < times.size(); ++j) {
        os << i << ',' << format_double(times[j]) << ',' << format_double(rows[i][j]) << '\n';
      }
    }
  }
  emit(s.get(s.flags().out, "out"), os.str());
  return kExitOk;
}

int cmd_couple(const Settings& s) {
  const LifetimeModel model = s.model();
  const MonteCarlo mc{s.seed(), s.jobs()};
  const double b = s.get(s.flags().b, "b", 0.0);
  const double b_prime = s.get(s.flags().b_prime, "b-prime", 0.0);
  const std::size_t n = s.count(s.flags().traces, "traces", 10000);
  const double horizon = s.get(s.flags().horizon, "horizon", default_horizon(model));
  CouplingOptions opt;
  opt.shared_first_gap = s.get_bool(s.flags().shared_first_gap, "shared-first-gap");
  opt.skip_residual_branch = s.get_bool(s.flags().skip_residual_branch, "skip-residual-branch");

  const double theta = resolve_theta(s, model);
  const BoundParameters params = success_prob(model, theta);
  const auto samples = coupling_time_samples(model, b, b_prime, theta, n, horizon, mc, opt);

  if (auto path = s.get(s.flags().traces_out, "traces-out")) {
    std::ostringstream os;
    write_traces_jsonl(os, samples);
    emit(path, os.str());
  }

  std::vector<double> finite;
  double attempts = 0.0;
  std::size_t censored = 0;
  for (const auto& x : samples) {
    attempts += static_cast<double>(x.n_attempts);
    if (x.censored) {
      ++censored;
    } else {
      finite.push_back(x.tau);
    }
  }
  std::sort(finite.begin(), finite.end());
  json summary = {{"dist", to_json(model)},
                  {"b", b},
                  {"b_prime", b_prime},
                  {"theta", theta},
                  {"varkappa", params.varkappa},
                  {"seed", mc.seed},
                  {"traces", n},
                  {"horizon", horizon},
                  {"censor_rate", static_cast<double>(censored) / static_cast<double>(n)},
                  {"mean_attempts", attempts / static_cast<double>(n)}};
  if (!finite.empty()) {
    double sum = 0.0;
    for (double t : finite) sum += t;
    summary["tau_mean"] = sum / static_cast<double>(finite.size());
    const std::size_t m = finite.size();
    summary["tau_median"] = m % 2 == 1 ? finite[m / 2] : 0.5 * (finite[m / 2 - 1] + finite[m / 2]);
  } else {
    summary["tau_mean"] = nullptr;
    summary["tau_median"] = nullptr;
  }
  try {
    summary["upsilon_ell1"] = upsilon_terms(model, 1, b, b_prime, params).value();
  } catch (const Error&) {
    summary["upsilon_ell1"] = nullptr;
  }
  emit(s.get(s.flags().out, "out"), dump(summary));
  return kExitOk;
}

// One cell of a polynomial verification run.
struct Cell {
  std::string name;
  LifetimeModel model;
  double b;
  int ell;
};

json run_cell(const Cell& c, const std::vector<double>& grid, std::size_t paths, const MonteCarlo& mc,
              const PolynomialCheckOptions& opt, std::ostringstream& csv, bool& pass) {
  json j = {{"dist", c.name}, {"b", c.b}, {"ell", c.ell}};
  try {
    const VerificationReport r = verify_polynomial_bound(c.model, c.b, c.ell, grid, paths, mc, opt);
    j.update(to_json(r));
    pass = pass && r.pass;
    for (const auto& x : r.records) {
      csv << c.name << ',' << format_double(c.b) << ',' << c.ell << ',' << format_double(x.t) << ','
          << format_double(x.tv_hat) << ',' << format_double(x.band) << ',' << format_double(x.bound) << ','
          << (x.pass ? "true" : "false") << '\n';
    }
  } catch (const Error& e) {
    j["pass"] = false;
    j["error"] = e.code();
    j["message"] = e.what();
    pass = false;
  }
  return j;
}

int cmd_verify_polynomial(const Settings& s) {
  const MonteCarlo mc{s.seed(), s.jobs()};
  PolynomialCheckOptions opt;
  opt.n_bins = s.count(s.flags().bins, "bins", 50);
  opt.bound_scale = s.get(s.flags().inject_bound_scale, "inject-bound-scale", 1.0);
  if (!(opt.bound_scale > 0.0)) throw ConfigError("inject-bound-scale", "must be positive");
  opt.strict_series = s.get_bool(s.flags().strict_series, "strict-series");
  opt.theta = s.theta();
  opt.theta_max = s.get(s.flags().theta_max, "theta-max");
  const std::size_t paths = s.count(s.flags().paths, "paths", 100000);

  const auto matrix = s.get(s.flags().matrix, "matrix");
  std::ostringstream csv;
  bool pass = true;
  json out;
  if (matrix) {
    if (*matrix != "standard") throw ConfigError("matrix", "only \"standard\" is defined");
    if (opt.theta) throw ConfigError("theta", "the standard matrix optimizes theta per cell");
    csv << "dist,b,ell,t,tv_hat,band,bound,pass\n";
    json cells = json::array();
    for (const auto& nm : standard_matrix()) {
      const double xi = lorden_xi(nm.model);
      std::vector<double> grid;
      for (double k : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) grid.push_back(k * nm.model.mean());
      for (double b : {0.0, 2.0 * xi}) {
        for (int ell : {1, 2}) {
          cells.push_back(run_cell({nm.name, nm.model, b, ell}, grid, paths, mc, opt, csv, pass));
        }
      }
    }
    out = {{"matrix", "standard"}, {"seed", mc.seed}, {"paths", paths}, {"bins", opt.n_bins},
           {"bound_scale", opt.bound_scale}, {"cells", cells}};
  } else {
    const LifetimeModel model = s.model();
    const double b = s.get(s.flags().b, "b", 0.0);
    std::vector<double> grid;
    if (auto g = s.t_grid()) {
      grid = *g;
    } else {
      for (double k : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) grid.push_back(k * model.mean());
    }
    if (grid.front() <= 0.0) throw ConfigError("t-grid", "times must be positive");
    const VerificationReport r = verify_polynomial_bound(model, b, s.ell(), grid, paths, mc, opt);
    pass = r.pass;
    out = to_json(r);
    write_report_csv(csv, r);
  }
  out["pass"] = pass;
  emit(s.get(s.flags().out, "out"), dump(out));
  if (auto path = s.get(s.flags().csv, "csv")) emit(path, csv.str());
  return pass ? kExitOk : kExitVerify;
}

int cmd_verify_marginals(const Settings& s) {
  const LifetimeModel model = s.model();
  const MonteCarlo mc{s.seed(), s.jobs()};
  const double b = s.get(s.flags().b, "b", 0.0);
  const double b_prime = s.get(s.flags().b_prime, "b-prime", 0.0);
  const std::size_t n = s.count(s.flags().traces, "traces", 100000);
  const auto grid = s.t_grid().value_or(std::vector<double>{1.0, 5.0, 20.0});
  CouplingOptions opt;
  opt.shared_first_gap = s.get_bool(s.flags().shared_first_gap, "shared-first-gap");
  opt.skip_residual_branch = s.get_bool(s.flags().skip_residual_branch, "skip-residual-branch");
  const double theta = resolve_theta(s, model);

  const MarginalReport r = verify_coupling_marginals(model, b, b_prime, theta, grid, n, mc, opt);
  json rows = json::array();
  for (const auto& x : r.records) {
    rows.push_back({{"t", x.t},
                    {"ks_first", x.ks_first},
                    {"ks_second", x.ks_second},
                    {"critical", x.critical},
                    {"pass", x.pass}});
  }
  const json out = {{"check", "marginals"},
                    {"dist", to_json(model)},
                    {"b", b},
                    {"b_prime", b_prime},
                    {"theta", theta},
                    {"traces", n},
                    {"seed", mc.seed},
                    {"skip_residual_branch", opt.skip_residual_branch},
                    {"censor_rate", r.censor_rate},
                    {"records", rows},
                    {"pass", r.pass}};
  emit(s.get(s.flags().out, "out"), dump(out));
  if (auto path = s.get(s.flags().csv, "csv")) {
    std::ostringstream csv;
    csv << "t,ks_first,ks_second,critical,pass\n";
    for (const auto& x : r.records) {
      csv << format_double(x.t) << ',' << format_double(x.ks_first) << ',' << format_double(x.ks_second) << ','
          << format_double(x.critical) << ',' << (x.pass ? "true" : "false") << '\n';
    }
    emit(path, csv.str());
  }
  return r.pass ? kExitOk : kExitVerify;
}

int cmd_verify(const Settings& s) {
  const std::string check = s.get(s.flags().check, "check", std::string("polynomial"));
  if (check == "polynomial") return cmd_verify_polynomial(s);
  if (check == "marginals") return cmd_verify_marginals(s);
  throw ConfigError("check", "must be polynomial or marginals");
}

json load_config(const std::optional<std::string>& path) {
  if (!path) return json::object();
  std::ifstream is(*path);
  if (!is) throw ConfigError("config", "cannot read " + *path);
  try {
    json j = json::parse(is);
    if (!j.is_object()) throw ConfigError("config", "the config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
}

int fail(int code, const json& body) {
  std::cerr << body.dump() << "\n";
  return code;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--dist", f.dist, "Distribution spec as JSON, e.g. {\"family\":\"exponential\",\"rate\":1}");
  sub->add_option("--config", f.config, "JSON file with default values for any flag");
  sub->add_option("--b", f.b, "Initial overshoot (age) of the first process");
  sub->add_option("--seed", f.seed, "Master seed (64-bit)");
  sub->add_option("--jobs", f.jobs, "Worker threads (default: REGEN_BOUNDS_JOBS or hardware concurrency)");
  sub->add_option("--out", f.out, "Write the main output here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupling-based convergence bounds for renewal overshoot processes"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* bound = app.add_subcommand("bound", "Compute the polynomial (and exponential) rate bounds");
  add_common(bound, f);
  bound->add_option("--ell", f.ell, "Polynomial order");
  bound->add_option("--b-prime", f.b_prime, "Initial overshoot of the second process");
  bound->add_option("--theta", f.theta, "Overshoot threshold, or auto");
  bound->add_option("--theta-max", f.theta_max, "Upper end of the threshold search");
  bound->add_option("--optimize", f.optimize, "Threshold objective: kappa or upsilon");
  bound->add_option("--alpha", f.alpha, "Exponential moment abscissa, or auto");
  bound->add_flag("--strict-series", f.strict_series, "Use the power max(2, ell) in the attempt series");
  bound->add_flag("--exponential", f.exponential, "Fail when the exponential bound is unavailable");
  bound->add_option("--t-grid", f.t_grid, "Comma-separated times for the sampled rate curve");

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate overshoots of a renewal process");
  add_common(simulate, f);
  simulate->add_option("--t", f.t, "Observation time");
  simulate->add_option("--t-grid", f.t_grid, "Comma-separated observation times");
  simulate->add_option("--paths", f.paths, "Number of paths");
  simulate->add_flag("--epochs", f.epochs, "Emit renewal epochs up to the last time instead of overshoots");

  CLI::App* couple = app.add_subcommand("couple", "Run the parallel coupling and summarize coupling times");
  add_common(couple, f);
  couple->add_option("--b-prime", f.b_prime, "Initial overshoot of the second process");
  couple->add_option("--theta", f.theta, "Overshoot threshold, or auto");
  couple->add_option("--theta-max", f.theta_max, "Upper end of the threshold search");
  couple->add_option("--traces", f.traces, "Number of coupling traces");
  couple->add_option("--horizon", f.horizon, "Censoring horizon (default 1e4 mean lifetimes)");
  couple->add_option("--traces-out", f.traces_out, "Write one JSON line per trace to this file");
  couple->add_flag("--shared-first-gap", f.shared_first_gap, "Draw both first gaps from one uniform");
  couple->add_flag("--skip-residual-branch", f.skip_residual_branch, "Debug fault: skip residual-lifetime draws");

  CLI::App* verify = app.add_subcommand("verify", "Check the analytic bounds against Monte Carlo estimates");
  add_common(verify, f);
  verify->add_option("--check", f.check, "polynomial (default) or marginals");
  verify->add_option("--ell", f.ell, "Polynomial order");
  verify->add_option("--b-prime", f.b_prime, "Initial overshoot of the second process (marginals)");
  verify->add_option("--theta", f.theta, "Overshoot threshold, or auto");
  verify->add_option("--theta-max", f.theta_max, "Upper end of the threshold search");
  verify->add_option("--t-grid", f.t_grid, "Comma-separated check times");
  verify->add_option("--paths", f.paths, "Paths per histogram");
  verify->add_option("--traces", f.traces, "Coupling traces (marginals)");
  verify->add_option("--bins", f.bins, "Histogram bins");
  verify->add_option("--csv", f.csv, "Write the per-time records as CSV");
  verify->add_option("--inject-bound-scale", f.inject_bound_scale, "Self-test: multiply the bound by this factor");
  verify->add_option("--matrix", f.matrix, "Run a predefined matrix (standard)");
  verify->add_flag("--strict-series", f.strict_series, "Use the power max(2, ell) in the attempt series");
  verify->add_flag("--shared-first-gap", f.shared_first_gap, "Draw both first gaps from one uniform (marginals)");
  verify->add_flag("--skip-residual-branch", f.skip_residual_branch, "Debug fault: skip residual-lifetime draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    const Settings s(f, load_config(f.config));
    if (*bound) return cmd_bound(s);
    if (*simulate) return cmd_simulate(s);
    if (*couple) return cmd_couple(s);
    return cmd_verify(s);
  } catch (const ConfigError& e) {
    return fail(kExitConfig, {{"error", "invalid-config"}, {"field", e.field()}, {"message", e.what()}});
  } catch (const InvalidParameter& e) {
    return fail(kExitConfig, {{"error", "invalid-parameter"}, {"field", e.field()}, {"message", e.what()}});
  } catch (const Error& e) {
    return fail(kExitMath, {{"error", e.code()}, {"message", e.what()}});
  } catch (const std::exception& e) {
    return fail(kExitMath, {{"error", "internal"}, {"message", e.what()}});
  }
}
