#include "deou/asymptotics.hpp"
#include "deou/estimate.hpp"
#include "deou/path_io.hpp"
#include "deou/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  deou::ModelParams params{2.0, 1.0, 1.0, 0.6, 1.2, 1.6};
  std::uint64_t seed = 1;
  std::size_t n = 3000;
  double h = 0.02;
  double x0 = 0.0;
  std::optional<std::size_t> burn_in;
  std::optional<std::size_t> bandwidth;
  bool prewhiten = true;
  std::size_t grid = 2001;
  double level = 0.95;
  std::vector<std::size_t> n_values{50, 100, 200, 300, 400, 500, 600, 1000, 2000, 3000};
  std::size_t seeds = 20;
  std::size_t threads = 0;
  std::string input;
  std::string out;
  std::optional<std::array<double, 3>> f;
};

// ---------------------------------------------------------------------------
// config <-> json

json params_json(const deou::ModelParams& m) {
  return json{{"theta", m.theta}, {"sigma", m.sigma}, {"lambda", m.lambda},
              {"p", m.p},         {"eta", m.eta},     {"phi", m.phi}};
}

template <class T>
json nullable(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// Output paths are left out: they do not influence any result.
json config_json(const RunConfig& c) {
  json j;
  j["params"] = params_json(c.params);
  j["seed"] = c.seed;
  j["n"] = c.n;
  j["h"] = c.h;
  j["x0"] = c.x0;
  j["burn_in"] = nullable(c.burn_in);
  j["bandwidth"] = nullable(c.bandwidth);
  j["prewhiten"] = c.prewhiten;
  j["grid"] = c.grid;
  j["level"] = c.level;
  j["n_values"] = c.n_values;
  j["seeds"] = c.seeds;
  j["input"] = c.input;
  j["f"] = c.f ? json{{"f1", (*c.f)[0]}, {"f2", (*c.f)[1]}, {"f3", (*c.f)[2]}} : json(nullptr);
  return j;
}

[[noreturn]] void bad_field(const std::string& name, const std::string& why) {
  throw InputError("config field '" + name + "': " + why);
}

double get_number(const json& j, const std::string& name) {
  if (!j.is_number()) bad_field(name, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad_field(name, "must be finite");
  return v;
}

std::uint64_t get_count(const json& j, const std::string& name) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    bad_field(name, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

void read_params(const json& j, deou::ModelParams& m) {
  if (!j.is_object()) bad_field("params", "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string name = "params." + key;
    if (key == "theta") m.theta = get_number(value, name);
    else if (key == "sigma") m.sigma = get_number(value, name);
    else if (key == "lambda") m.lambda = get_number(value, name);
    else if (key == "p") m.p = get_number(value, name);
    else if (key == "eta") m.eta = get_number(value, name);
    else if (key == "phi") m.phi = get_number(value, name);
    else bad_field(name, "unknown field");
  }
}

void read_config(const json& j, RunConfig& c) {
  if (!j.is_object()) throw InputError("config: top level must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "params") {
      read_params(v, c.params);
    } else if (key == "seed") {
      c.seed = get_count(v, key);
    } else if (key == "n") {
      c.n = get_count(v, key);
    } else if (key == "h") {
      c.h = get_number(v, key);
    } else if (key == "x0") {
      c.x0 = get_number(v, key);
    } else if (key == "burn_in") {
      c.burn_in = v.is_null() ? std::nullopt : std::optional<std::size_t>(get_count(v, key));
    } else if (key == "bandwidth") {
      c.bandwidth = v.is_null() ? std::nullopt : std::optional<std::size_t>(get_count(v, key));
    } else if (key == "prewhiten") {
      if (!v.is_boolean()) bad_field(key, "expected true or false");
      c.prewhiten = v.get<bool>();
    } else if (key == "grid") {
      c.grid = get_count(v, key);
    } else if (key == "level") {
      c.level = get_number(v, key);
    } else if (key == "n_values") {
      if (!v.is_array()) bad_field(key, "expected an array of integers");
      c.n_values.clear();
      for (const auto& e : v) c.n_values.push_back(get_count(e, key));
    } else if (key == "seeds") {
      c.seeds = get_count(v, key);
    } else if (key == "threads") {
      c.threads = get_count(v, key);
    } else if (key == "input") {
      if (!v.is_string()) bad_field(key, "expected a string");
      c.input = v.get<std::string>();
    } else if (key == "out") {
      if (!v.is_string()) bad_field(key, "expected a string");
      c.out = v.get<std::string>();
    } else if (key == "f") {
      if (v.is_null()) {
        c.f.reset();
        continue;
      }
      if (!v.is_object() || !v.contains("f1") || !v.contains("f2") || !v.contains("f3") || v.size() != 3)
        bad_field(key, "expected an object with f1, f2, f3");
      c.f = std::array<double, 3>{get_number(v["f1"], "f.f1"), get_number(v["f2"], "f.f2"),
                                  get_number(v["f3"], "f.f3")};
    } else {
      bad_field(key, "unknown field");
    }
  }
}

RunConfig load_config(const std::string& file) {
  RunConfig c;
  if (file.empty()) return c;
  std::ifstream in(file);
  if (!in) throw InputError("cannot open config file '" + file + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config file '" + file + "' is not valid JSON: " + e.what());
  }
  read_config(j, c);
  return c;
}

void check_params(const deou::ModelParams& m) {
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config field 'params': ") + e.what());
  }
}

void check_h(const RunConfig& c) {
  if (!(c.h > 0.0)) bad_field("h", "must be > 0");
}

void check_grid(const RunConfig& c) {
  if (c.grid < 3) bad_field("grid", "must be at least 3");
}

void check_level(const RunConfig& c) {
  if (!(c.level > 0.0 && c.level < 1.0)) bad_field("level", "must lie in (0, 1)");
}

json provenance(const RunConfig& c, const std::string& subcommand) {
  return json{{"tool", "deou"},
              {"version", DEOU_VERSION},
              {"subcommand", subcommand},
              {"seed", c.seed},
              {"config", config_json(c)}};
}

// ---------------------------------------------------------------------------
// output

void write_output(const std::string& target, const std::string& content) {
  if (target.empty() || target == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + target + "' for writing");
  out << content;
  if (!out) throw InputError("failed writing '" + target + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json matrix_json(const deou::Matrix4& m) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json interval_json(const deou::Interval& iv) {
  return json{{"estimate", iv.estimate}, {"lower", iv.lower},   {"upper", iv.upper},
              {"std_error", iv.std_error}, {"valid", iv.valid}};
}

json error_json(const deou::EstimationError& e) {
  json j{{"name", deou::to_string(e.kind())}, {"stage", e.stage()}, {"message", e.what()}};
  if (!e.roots().empty()) j["roots"] = e.roots();
  return j;
}

deou::SamplePath load_path(const std::string& file) {
  if (file.empty()) throw InputError("no input CSV given");
  std::ifstream in(file);
  if (!in) throw InputError("cannot open input '" + file + "'");
  try {
    return deou::read_path_csv(in);
  } catch (const deou::PathFormatError& e) {
    throw InputError(file + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_simulate(const RunConfig& c) {
  check_params(c.params);
  check_h(c);
  if (c.n < 2) bad_field("n", "must be at least 2");

  deou::SimulationOptions o;
  o.x0 = c.x0;
  o.h = c.h;
  o.n = c.n;
  o.seed = c.seed;
  o.burn_in = c.burn_in;
  const auto path = deou::simulate_path(c.params, o);

  std::ostringstream csv;
  deou::write_path_csv(path, csv);
  write_output(c.out, csv.str());

  if (!c.out.empty() && c.out != "-") {
    json meta;
    meta["params"] = params_json(c.params);
    meta["seed"] = path.seed;
    meta["stream"] = path.stream;
    meta["h"] = path.h;
    meta["n"] = path.size();
    meta["burn_in"] = path.burn_in;
    meta["x0"] = path.x0;
    meta["provenance"] = provenance(c, "simulate");
    write_output(std::filesystem::path(c.out).replace_extension(".meta.json").string(), dump(meta));
  }
  return kExitOk;
}

int cmd_estimate(const RunConfig& c) {
  check_level(c);
  check_grid(c);
  const auto path = load_path(c.input);

  json doc;
  doc["status"] = "ok";
  doc["input"] = json{{"file", c.input}, {"n", path.size()}, {"h", path.h}};

  deou::EstimationResult r;
  try {
    r = deou::estimate_all(path, {c.grid, false});
  } catch (const deou::EstimationError& e) {
    doc["status"] = "error";
    doc["error"] = error_json(e);
    doc["provenance"] = provenance(c, "estimate");
    write_output(c.out, dump(doc));
    std::cerr << "estimation failed: " << deou::to_string(e.kind()) << " at stage '" << e.stage()
              << "': " << e.what() << "\n";
    return kExitEstimation;
  }

  doc["estimates"] = json{{"theta", r.theta_hat}, {"p", r.p_hat},     {"rho", r.rho_hat},
                          {"xi", r.xi_hat},       {"eta", r.eta_hat}, {"phi", r.phi_hat}};

  int code = kExitOk;
  try {
    const auto cov = deou::estimate_covariance(path, r, {c.bandwidth, c.prewhiten});
    const auto ci = deou::confidence_intervals(r, cov, c.level);
    doc["covariance"] = json{{"order", {"p", "rho", "xi", "theta"}},
                             {"A", matrix_json(cov.A)},
                             {"Sigma", matrix_json(cov.Sigma)},
                             {"bandwidth", cov.bandwidth},
                             {"n", cov.n},
                             {"prewhitened", cov.prewhitened},
                             {"min_eigen_A", cov.min_eigen_A},
                             {"min_eigen_Sigma", cov.min_eigen_Sigma},
                             {"psd_A", cov.psd_A},
                             {"psd_Sigma", cov.psd_Sigma}};
    doc["bandwidth"] = cov.bandwidth;
    doc["intervals"] = json{{"level", ci.level},
                            {"p", interval_json(ci.p)},
                            {"rho", interval_json(ci.rho)},
                            {"xi", interval_json(ci.xi)},
                            {"theta", interval_json(ci.theta)},
                            {"eta", interval_json(ci.eta)},
                            {"phi", interval_json(ci.phi)},
                            {"psd_violation", ci.psd_violation}};
  } catch (const deou::AsymptoticsError& e) {
    doc["status"] = "error";
    doc["error"] = json{{"name", e.name()}, {"stage", "covariance"}, {"message", e.what()}};
    std::cerr << "covariance failed: " << e.name() << ": " << e.what() << "\n";
    code = kExitEstimation;
  }

  doc["diagnostics"] = json{
      {"moments",
       {{"mu1", r.moments.mu1}, {"mu2", r.moments.mu2}, {"mu3", r.moments.mu3}, {"mu4", r.moments.mu4},
        {"n_used", r.moments.n_used}}},
      {"f", {{"f1", r.f.f1}, {"f2", r.f.f2}, {"f3", r.f.f3}}},
      {"discriminant", r.f.discriminant()},
      {"sign_change_count", r.sign_change_count},
      {"derivative_sign_changes", r.derivative_sign_changes},
      {"p_bracket", {r.bracket_lo, r.bracket_hi}},
      {"grid", c.grid}};
  doc["provenance"] = provenance(c, "estimate");
  write_output(c.out, dump(doc));
  return code;
}

struct Cell {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double p = 0, eta = 0, phi = 0, theta = 0;
};

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

int cmd_experiment(const RunConfig& c) {
  check_params(c.params);
  check_h(c);
  check_grid(c);
  if (c.n_values.empty()) bad_field("n_values", "must not be empty");
  for (auto n : c.n_values)
    if (n < 2) bad_field("n_values", "every N must be at least 2");
  if (c.seeds == 0) bad_field("seeds", "must be at least 1");

  std::vector<Cell> cells;
  for (auto n : c.n_values)
    for (std::size_t k = 0; k < c.seeds; ++k) {
      Cell cell;
      cell.n = n;
      cell.seed = c.seed + k;
      cells.push_back(cell);
    }

  // Stream id = N keeps a cell's draws independent of the order of n_values.
  auto run = [&](Cell& cell) {
    deou::SimulationOptions o;
    o.x0 = c.x0;
    o.h = c.h;
    o.n = cell.n;
    o.seed = cell.seed;
    o.stream = cell.n;
    o.burn_in = c.burn_in;
    try {
      const auto r = deou::estimate_all(deou::simulate_path(c.params, o), {c.grid, false});
      cell.ok = true;
      cell.p = r.p_hat;
      cell.eta = r.eta_hat;
      cell.phi = r.phi_hat;
      cell.theta = r.theta_hat;
    } catch (const deou::EstimationError& e) {
      cell.error = deou::to_string(e.kind());
    }
  };

  std::size_t workers = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cells.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) run(cells[i]);
    });
  }
  for (auto& t : pool) t.join();

  using deou::format_double;
  std::ostringstream csv;
  csv << "kind,N,T,seed,n_ok,error,p,eta,phi,theta\n";
  for (const auto& cell : cells) {
    csv << "cell," << cell.n << ',' << format_double(static_cast<double>(cell.n) * c.h) << ',' << cell.seed << ','
        << (cell.ok ? 1 : 0) << ',' << cell.error;
    if (cell.ok) {
      csv << ',' << format_double(cell.p) << ',' << format_double(cell.eta) << ',' << format_double(cell.phi)
          << ',' << format_double(cell.theta) << '\n';
    } else {
      csv << ",,,,\n";
    }
  }
  for (auto n : c.n_values) {
    std::array<std::vector<double>, 4> est;
    for (const auto& cell : cells) {
      if (cell.n != n || !cell.ok) continue;
      est[0].push_back(cell.p);
      est[1].push_back(cell.eta);
      est[2].push_back(cell.phi);
      est[3].push_back(cell.theta);
    }
    const std::string head = "," + std::to_string(n) + "," + format_double(static_cast<double>(n) * c.h) + ",," +
                             std::to_string(est[0].size()) + ",";
    csv << "median" << head;
    for (const auto& e : est) csv << ',' << (e.empty() ? "" : format_double(quantile(e, 0.5)));
    csv << "\niqr" << head;
    for (const auto& e : est) csv << ',' << (e.empty() ? "" : format_double(quantile(e, 0.75) - quantile(e, 0.25)));
    csv << '\n';
  }
  write_output(c.out, csv.str());
  return kExitOk;
}

int cmd_gcurve(const RunConfig& c) {
  check_grid(c);
  deou::FVector f;
  try {
    if (c.f) {
      f = {(*c.f)[0], (*c.f)[1], (*c.f)[2], std::nan("")};
    } else {
      const auto path = load_path(c.input);
      const auto m = deou::empirical_moments(path);
      f = deou::compute_f(m, deou::estimate_theta(m));
    }
    const auto curve = deou::g_curve(f, c.grid);
    std::vector<double> g;
    std::ostringstream csv;
    csv << "p,g,dg\n";
    for (const auto& pt : curve) {
      g.push_back(pt.g);
      csv << deou::format_double(pt.p) << ',' << deou::format_double(pt.g) << ',' << deou::format_double(pt.dg)
          << '\n';
    }
    write_output(c.out, csv.str());
    const auto count = deou::sign_change_brackets(g).size();
    std::ostream& report = (c.out.empty() || c.out == "-") ? std::cerr : std::cout;
    report << "sign_change_count=" << count << "\n";
    if (count == 1) report << "p_hat=" << deou::format_double(deou::solve_p(f, c.grid).p_hat) << "\n";
  } catch (const deou::EstimationError& e) {
    std::cerr << "error: " << deou::to_string(e.kind()) << " at stage '" << e.stage() << "': " << e.what() << "\n";
    return kExitEstimation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-exponential Ornstein-Uhlenbeck toolkit"};
  app.set_version_flag("--version", std::string(DEOU_VERSION));
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  struct Flags {
    std::string config, out, input;
    std::uint64_t seed = 0;
    double level = 0, h = 0;
    std::size_t bandwidth = 0, grid = 0, n = 0, burn_in = 0, seeds = 0, threads = 0;
    std::vector<std::size_t> n_values;
    double f1 = 0, f2 = 0, f3 = 0;
    bool no_prewhiten = false;
  } fl;

  struct Opts {
    CLI::Option *seed = nullptr, *out = nullptr, *level = nullptr, *bandwidth = nullptr, *grid = nullptr,
                *n = nullptr, *h = nullptr, *burn_in = nullptr, *seeds = nullptr, *n_values = nullptr,
                *threads = nullptr, *input = nullptr, *f1 = nullptr, *f2 = nullptr, *f3 = nullptr,
                *no_prewhiten = nullptr;
  };
  std::map<std::string, Opts> opts;

  auto add_common = [&](CLI::App* sub) {
    Opts& o = opts[sub->get_name()];
    sub->add_option("--config", fl.config, "JSON run configuration");
    o.seed = sub->add_option("--seed", fl.seed, "RNG seed");
    o.out = sub->add_option("--out", fl.out, "output file (default stdout)");
    o.level = sub->add_option("--level", fl.level, "confidence level");
    o.bandwidth = sub->add_option("--bandwidth", fl.bandwidth, "long-run covariance lag truncation");
    o.grid = sub->add_option("--grid", fl.grid, "number of grid points for the p scan");
    return &o;
  };

  auto* sim = app.add_subcommand("simulate", "simulate a sample path");
  auto* est = app.add_subcommand("estimate", "estimate parameters from a t,x CSV");
  auto* xp = app.add_subcommand("experiment", "convergence experiment over N and seeds");
  auto* gc = app.add_subcommand("gcurve", "export the root function g(p)");
  for (auto* sub : {sim, est, xp, gc}) add_common(sub);
  for (auto* sub : {sim, xp}) {
    Opts& o = opts[sub->get_name()];
    o.n = sub->add_option("--n", fl.n, "number of observations");
    o.h = sub->add_option("--h", fl.h, "sampling interval");
    o.burn_in = sub->add_option("--burn-in", fl.burn_in, "discarded initial steps");
  }
  opts["experiment"].seeds = xp->add_option("--seeds", fl.seeds, "seeds per N");
  opts["experiment"].n_values = xp->add_option("--n-values", fl.n_values, "list of N")->delimiter(',');
  opts["experiment"].threads = xp->add_option("--threads", fl.threads, "worker threads (0 = all cores)");
  for (auto* sub : {est, gc}) {
    Opts& o = opts[sub->get_name()];
    o.input = sub->add_option("input", fl.input, "input CSV with columns t,x");
  }
  for (auto* sub : {est, xp}) opts[sub->get_name()].no_prewhiten = sub->add_flag("--no-prewhiten", fl.no_prewhiten,
                                                                                  "plain Bartlett sums");
  opts["gcurve"].f1 = gc->add_option("--f1", fl.f1);
  opts["gcurve"].f2 = gc->add_option("--f2", fl.f2);
  opts["gcurve"].f3 = gc->add_option("--f3", fl.f3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Opts& o = opts[chosen->get_name()];
  auto given = [](const CLI::Option* opt) { return opt && opt->count() > 0; };

  try {
    RunConfig c = load_config(fl.config);
    if (given(o.seed)) c.seed = fl.seed;
    if (given(o.out)) c.out = fl.out;
    if (given(o.level)) c.level = fl.level;
    if (given(o.bandwidth)) c.bandwidth = fl.bandwidth;
    if (given(o.grid)) c.grid = fl.grid;
    if (given(o.n)) c.n = fl.n;
    if (given(o.h)) c.h = fl.h;
    if (given(o.burn_in)) c.burn_in = fl.burn_in;
    if (given(o.seeds)) c.seeds = fl.seeds;
    if (given(o.n_values)) c.n_values = fl.n_values;
    if (given(o.threads)) c.threads = fl.threads;
    if (given(o.input)) c.input = fl.input;
    if (given(o.no_prewhiten)) c.prewhiten = false;
    const int nf = given(o.f1) + given(o.f2) + given(o.f3);
    if (nf == 3) {
      c.f = std::array<double, 3>{fl.f1, fl.f2, fl.f3};
    } else if (nf != 0) {
      throw InputError("--f1, --f2 and --f3 must be given together");
    }

    const std::string name = chosen->get_name();
    if (name == "simulate") return cmd_simulate(c);
    if (name == "estimate") return cmd_estimate(c);
    if (name == "experiment") return cmd_experiment(c);
    return cmd_gcurve(c);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
}
