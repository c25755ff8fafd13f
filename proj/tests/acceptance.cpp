// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: deou_acceptance <path-to-deou-cli> <scratch-dir>

#include "deou/asymptotics.hpp"
#include "deou/estimate.hpp"
#include "deou/model.hpp"
#include "deou/path_io.hpp"
#include "deou/simulate.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace deou;
using deou::testing::kReferenceH;
using deou::testing::reference_params;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome exact_inversion() {
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> theta(0.5, 5.0), p(0.1, 0.9), rate(0.5, 5.0), th(0.005, 0.5);
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < 200; ++i) {
    const ModelParams m{theta(gen), 1.0, 1.0, p(gen), rate(gen), rate(gen)};
    const double h = th(gen) / m.theta;
    const auto a = analytic_moments(m, h);
    try {
      const auto r = estimate_from_moments({a.m1, a.m2, a.m3, a.m4, 1000, h});
      worst = std::max({worst, std::fabs(r.theta_hat - m.theta), std::fabs(r.p_hat - m.p),
                        std::fabs(r.eta_hat - m.eta), std::fabs(r.phi_hat - m.phi)});
    } catch (const EstimationError&) {
      ++failures;
    }
  }
  return {failures == 0 && worst <= 1e-8,
          "max abs error " + fmt("%.3g", worst) + ", failures " + std::to_string(failures)};
}

Outcome transition_law() {
  const auto m = reference_params();
  const double h = kReferenceH;
  const auto mom = analytic_moments(m, h);
  const double decay = std::exp(-m.theta * h);
  const double mean_ref = mom.m1 * (1.0 - decay);
  const double var_ref = (mom.m2 - mom.m1 * mom.m1) * (1.0 - decay * decay);

  const std::size_t reps = 1000000;
  Rng rng(424242, 9);
  std::vector<double> z(reps);
  for (auto& v : z) v = draw_transition_jump_sum(m, h, rng);
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(reps);
  double c2 = 0.0, c4 = 0.0;
  for (double v : z) {
    const double d = (v - mean) * (v - mean);
    c2 += d;
    c4 += d * d;
  }
  c2 /= static_cast<double>(reps);
  c4 /= static_cast<double>(reps);
  const double se_mean = std::sqrt(c2 / static_cast<double>(reps));
  const double se_var = std::sqrt((c4 - c2 * c2) / static_cast<double>(reps));
  const double zm = (mean - mean_ref) / se_mean;
  const double zv = (c2 - var_ref) / se_var;
  return {std::fabs(zm) <= 4.0 && std::fabs(zv) <= 4.0,
          "mean z " + fmt("%.2f", zm) + ", variance z " + fmt("%.2f", zv)};
}

Outcome ergodic_cf() {
  const auto m = reference_params();
  SimulationOptions o;
  o.h = kReferenceH;
  o.n = 100000;
  o.seed = 31;
  const auto path = simulate_path(m, o);
  double worst = 0.0;
  for (double u : {0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(empirical_char_fn(path, u) - stationary_char_fn(m, u)));
  const double joint = std::abs(empirical_joint_char_fn(path, 1.0, 1.0) - joint_char_fn(m, 1.0, 1.0, kReferenceH));
  return {worst < 0.02 && joint < 0.02, "marginal max " + fmt("%.4f", worst) + ", joint " + fmt("%.4f", joint)};
}

// Same cells as `deou-cli experiment` with its defaults: seeds 1..20, stream N.
Outcome reference_medians() {
  const auto m = reference_params();
  const std::size_t n = 3000;
  std::vector<EstimationResult> res(20);
  std::vector<int> ok(20, 0);
  parallel_for(20, [&](std::size_t k) {
    SimulationOptions o;
    o.h = kReferenceH;
    o.n = n;
    o.seed = 1 + k;
    o.stream = n;
    try {
      res[k] = estimate_all(simulate_path(m, o));
      ok[k] = 1;
    } catch (const EstimationError&) {
    }
  });
  std::vector<double> p, eta, phi, theta;
  for (std::size_t k = 0; k < 20; ++k) {
    if (!ok[k]) continue;
    p.push_back(res[k].p_hat);
    eta.push_back(res[k].eta_hat);
    phi.push_back(res[k].phi_hat);
    theta.push_back(res[k].theta_hat);
  }
  if (p.empty()) return {false, "every cell failed"};
  const double mp = median(p), me = median(eta), mf = median(phi), mt = median(theta);
  const bool pass = p.size() == 20 && mp > 0.55 && mp < 0.65 && me > 1.1 && me < 1.3 && mf > 1.45 && mf < 1.75 &&
                    mt > 1.9 && mt < 2.1;
  return {pass, "medians p " + fmt("%.4f", mp) + ", eta " + fmt("%.4f", me) + ", phi " + fmt("%.4f", mf) +
                    ", theta " + fmt("%.4f", mt) + " over " + std::to_string(p.size()) + " cells"};
}

Outcome jacobians() {
  using namespace deou::testing;
  std::mt19937_64 gen(77);
  double worst_h = 0.0, worst_t = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto m = random_params(gen);
    const double h = std::uniform_real_distribution<double>(0.005, 0.5)(gen) / m.theta;
    const auto t = estimation_target(m);
    const Matrix4 fd_h = fd_jacobian([h](const Vector4& x) { return h_map(vec_target(x), h); }, target_vec(t));
    const auto mom = analytic_moments(m, h);
    const Matrix4 fd_t = fd_jacobian([h](const Vector4& x) { return tilde_h_map(vec_moments(x, h)); }, moment_vec(mom));
    worst_h = std::max(worst_h, max_rel_error(jacobian_h(t, h), fd_h));
    worst_t = std::max(worst_t, max_rel_error(jacobian_tilde_h(mom), fd_t));
  }
  return {worst_h <= 1e-6 && worst_t <= 1e-6,
          "max relative error grad h " + fmt("%.3g", worst_h) + ", grad tilde h " + fmt("%.3g", worst_t)};
}

Outcome coverage() {
  const auto m = reference_params();
  const std::size_t reps = 500;
  const double m1 = analytic_moments(m, kReferenceH).m1;
  std::vector<int> covered(reps, 0), ok(reps, 0);
  std::vector<double> z(reps, 0.0);
  parallel_for(reps, [&](std::size_t r) {
    SimulationOptions o;
    o.h = kReferenceH;
    o.n = 10000;
    o.seed = 500;
    o.stream = r;
    const auto path = simulate_path(m, o);
    try {
      const auto est = estimate_all(path);
      const auto cov = estimate_covariance(path, est);
      const auto ci = confidence_intervals(est, cov, 0.95);
      covered[r] = ci.theta.valid && ci.theta.lower <= m.theta && m.theta <= ci.theta.upper;
      z[r] = std::sqrt(static_cast<double>(cov.n)) * (est.moments.mu1 - m1) / std::sqrt(cov.A(0, 0));
      ok[r] = 1;
    } catch (const std::exception&) {
    }
  });
  std::size_t n_ok = 0, n_cov = 0;
  std::vector<double> zs;
  for (std::size_t r = 0; r < reps; ++r) {
    n_cov += static_cast<std::size_t>(covered[r]);
    if (ok[r]) {
      ++n_ok;
      zs.push_back(z[r]);
    }
  }
  const double rate = static_cast<double>(n_cov) / static_cast<double>(reps);

  // Jarque-Bera on the standardized first-moment statistic.
  const double k = static_cast<double>(zs.size());
  double mean = 0.0;
  for (double v : zs) mean += v;
  mean /= k;
  double c2 = 0.0, c3 = 0.0, c4 = 0.0;
  for (double v : zs) {
    const double d = v - mean;
    c2 += d * d;
    c3 += d * d * d;
    c4 += d * d * d * d;
  }
  c2 /= k;
  c3 /= k;
  c4 /= k;
  const double skew = c3 / std::pow(c2, 1.5);
  const double kurt = c4 / (c2 * c2);
  const double jb = k / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  const double jb_crit = -2.0 * std::log(0.01);  // chi-square(2) upper 1% point
  return {rate >= 0.91 && rate <= 0.99 && jb < jb_crit,
          "theta coverage " + fmt("%.3f", rate) + " (" + std::to_string(n_ok) + " fits), mu1 z: mean " +
              fmt("%.3f", mean) + ", sd " + fmt("%.3f", std::sqrt(c2)) + ", Jarque-Bera " + fmt("%.2f", jb) +
              " vs " + fmt("%.2f", jb_crit)};
}

Outcome root_solver() {
  const auto a = analytic_moments(reference_params(), kReferenceH);
  const EmpiricalMoments em{a.m1, a.m2, a.m3, a.m4, 1000, kReferenceH};
  const auto f = compute_f(em, estimate_theta(em));
  const auto sol = solve_p(f);
  const double err = std::fabs(sol.p_hat - 0.6);
  int no_root = 0;
  for (double f3 : {2000.0, -2000.0}) {
    try {
      solve_p(FVector{0.0, 1.0, f3, 1.0});
    } catch (const EstimationError& e) {
      no_root += e.kind() == EstimationErrorKind::NoRoot;
    }
  }
  return {sol.sign_change_count == 1 && err <= 1e-8 && no_root == 2,
          "sign changes " + std::to_string(sol.sign_change_count) + ", |p - 0.6| " + fmt("%.3g", err) +
              ", NoRoot raised " + std::to_string(no_root) + "/2"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const std::string& cli, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const std::string d = dir.string() + "/";
  int rc = 0;
  for (const char* tag : {"1", "2"}) {
    const std::string t = tag;
    rc |= run("simulate --seed 5 --out \"" + d + "run" + t + ".csv\"");
    rc |= run("estimate \"" + d + "run1.csv\" --out \"" + d + "est" + t + ".json\"");
  }
  if (rc != 0) return {false, "deou-cli returned a nonzero exit code"};
  const bool csv = slurp(dir / "run1.csv") == slurp(dir / "run2.csv") && !slurp(dir / "run1.csv").empty();
  const bool meta = slurp(dir / "run1.meta.json") == slurp(dir / "run2.meta.json");
  const bool json = slurp(dir / "est1.json") == slurp(dir / "est2.json") && !slurp(dir / "est1.json").empty();
  return {csv && meta && json, std::string("csv ") + (csv ? "identical" : "differs") + ", metadata " +
                                   (meta ? "identical" : "differs") + ", estimate json " +
                                   (json ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: deou_acceptance <deou-cli> <scratch-dir>\n";
    return 2;
  }
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::string cli = argv[1];
  const std::filesystem::path dir = argv[2];
  const std::vector<Criterion> criteria{
      {"exact inversion of analytic moments", 10, exact_inversion},
      {"one-step transition law", 30, transition_law},
      {"ergodic characteristic functions", 10, ergodic_cf},
      {"20-seed medians at N = 3000", 120, reference_medians},
      {"Jacobians against finite differences", 10, jacobians},
      {"theta coverage and mu1 normality", 600, coverage},
      {"root solver guarantees", 10, root_solver},
      {"byte-identical CLI outputs", 60, [&] { return determinism(cli, dir); }},
  };

  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::printf("%s %d %s: %s; %.1f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", index, c.name,
                out.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
