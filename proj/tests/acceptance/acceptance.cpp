// Acceptance checks, one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include "pinvbench/cli.hpp"

#include "sketchpinv/analysis.hpp"
#include "sketchpinv/io.hpp"
#include "sketchpinv/solvers.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

namespace sp = sketchpinv;
using testkit::Index;
using testkit::Mat;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// C1 -------------------------------------------------------------------------

Verdict penrose_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(2024);
  std::uniform_int_distribution<int> dim(1, 50);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index m = dim(g), n = dim(g);
    const Index full = std::min(m, n);
    const Index ranks[3] = {1, std::max<Index>(1, full / 2), full};
    const Mat A = testkit::random_rank(m, n, ranks[t % 3], g);
    const Mat P = sp::pinv_exact(A);
    const double scale = A.norm();
    const double errs[6] = {
        (A * P * A - A).norm(),
        (P * A * P - P).norm(),
        ((A * P).transpose() - A * P).norm(),
        ((P * A).transpose() - P * A).norm(),
        (A.transpose() - P * A * A.transpose()).norm(),
        (A.transpose() - A.transpose() * A * P).norm(),
    };
    for (double e : errs) worst = std::max(worst, e / scale);
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-10 && elapsed < 5.0,
          "max relative identity error " + fmt("%.2e", worst) + ", " + fmt("%.2f", elapsed) + " s"};
}

// C2 -------------------------------------------------------------------------

Verdict one_step_exactness() {
  std::mt19937_64 g(7);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Index m = 10 + t, n = 5 + t % 11;
    const Index r = 1 + t % (std::min(m, n) - 1);  // rank deficient
    const Mat A = testkit::random_rank(m, n, r, g);
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    const Mat want = testkit::cod_pinv(A);
    const Mat X1 = sp::satax_step(A, sp::init_satax(A), sp::SketchSample::subset(all));
    worst = std::max(worst, (X1 - want).norm() / want.norm());

    const Index k = 4 + t % 9;
    const Mat S = testkit::random_symmetric(k, 1 + t % (k - 1), g);
    std::vector<Index> allk(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) allk[static_cast<std::size_t>(i)] = i;
    const Mat wants = testkit::cod_pinv(S);
    const Mat Y1 = sp::saxas_step(S, sp::init_saxas(S), sp::SketchSample::subset(allk));
    worst = std::max(worst, (Y1 - wants).norm() / wants.norm());
  }
  return {worst <= 1e-8, "max relative error after one step " + fmt("%.2e", worst)};
}

// C3 + C4 ----------------------------------------------------------------------

struct RateOutcome {
  Verdict rate;
  Verdict invariants;
};

RateOutcome rate_and_invariants() {
  const auto t0 = Clock::now();
  const Index m = 30, n = 20, tau = 5;
  const Mat A = sp::gen_gaussian_rank_r(m, n, 10, 0);
  const Mat P = sp::pinv_exact(A);
  const double rho = sp::satax_rate_exact(A, sp::DiscreteSketchDistribution::uniform_batches(n, tau)).rho_exact;
  const Mat Pi = testkit::projector_onto(A.transpose());  // Range(A^T A) = Range(A^T)
  const Mat X0 = sp::init_satax(A);
  const double e0 = (X0 - P).squaredNorm();

  const int trials = 200;
  const int checkpoints[3] = {10, 50, 100};
  double mean[3] = {0, 0, 0};
  bool monotone = true, in_range = true;
  for (int t = 0; t < trials; ++t) {
    sp::Rng rng(sp::split_seed(0, static_cast<std::uint64_t>(t)));
    Mat X = X0;
    double err = (X - P).norm();
    for (int k = 1; k <= 100; ++k) {
      X = sp::satax_step(A, X, sp::sample_uniform_batch(n, tau, rng));
      const double next = (X - P).norm();
      if (next > err * (1.0 + 1e-12) + 1e-15) monotone = false;
      if ((X - Pi * X).norm() > 1e-10 * std::max(1.0, X.norm())) in_range = false;
      err = next;
      for (int c = 0; c < 3; ++c)
        if (k == checkpoints[c]) mean[c] += next * next / trials;
    }
  }
  bool rate_ok = true;
  std::string detail = "rho=" + fmt("%.6f", rho);
  for (int c = 0; c < 3; ++c) {
    const double bound = 1.5 * std::pow(rho, checkpoints[c]) * e0;
    rate_ok = rate_ok && mean[c] <= bound;
    detail += ", k=" + std::to_string(checkpoints[c]) + ": " + fmt("%.3e", mean[c]) + " <= " + fmt("%.3e", bound);
  }
  const double elapsed = seconds_since(t0);
  detail += ", " + fmt("%.1f", elapsed) + " s";

  // SAXAS trials on a symmetric instance of the same size.
  const Mat S = sp::gen_sym_rank_r(n, 10, 0);
  const Mat PS = sp::pinv_exact(S);
  const Mat PiS = testkit::projector_onto(S);
  bool s_monotone = true, s_sym = true, s_awa = true;
  for (int t = 0; t < trials; ++t) {
    sp::Rng rng(sp::split_seed(1, static_cast<std::uint64_t>(t)));
    Mat X = sp::init_saxas(S);
    double err = (X - PS).norm();
    for (int k = 1; k <= 100; ++k) {
      const auto sk = t % 2 == 0 ? sp::sample_uniform_batch(n, tau, rng)
                                 : sp::sample_batch_with_replacement(n, tau, std::nullopt, rng);
      X = sp::saxas_step(S, X, sk);
      const double next = (X - PS).norm();
      if (next > err * (1.0 + 1e-12) + 1e-15) s_monotone = false;
      if ((X - X.transpose()).norm() > 1e-10) s_sym = false;
      const Mat R = X - PS;
      if ((R - PiS * R * PiS).norm() > 1e-10) s_awa = false;
      err = next;
    }
  }
  Verdict inv{monotone && in_range && s_monotone && s_sym && s_awa,
              std::string("satax monotone=") + (monotone ? "yes" : "no") + " range=" + (in_range ? "yes" : "no") +
                  "; saxas monotone=" + (s_monotone ? "yes" : "no") + " symmetric=" + (s_sym ? "yes" : "no") +
                  " AWA=" + (s_awa ? "yes" : "no")};
  return {{rate_ok && elapsed < 60.0, detail}, inv};
}

// C5 -------------------------------------------------------------------------

Verdict rate_bound_ordering() {
  std::mt19937_64 g(5);
  double worst_slack = -1.0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 2 + t % 9;
    const Index m = n + 3;
    const Mat A = testkit::random_rank(m, n, 1 + t % n, g);
    const Mat G = A.transpose() * A;
    const auto d = sp::convenient_probabilities(0.5 * (G + G.transpose()), sp::DiscreteSketchDistribution::singletons(n).samples());
    const double exact = sp::satax_rate_exact(A, d).rho_exact;
    const double bound = sp::satax_rate_bound(A, d.stacked());
    worst_slack = std::max(worst_slack, exact - bound);
  }
  return {worst_slack <= 1e-10, "max(rho_exact - rho_bound) = " + fmt("%.2e", worst_slack)};
}

// C6 -------------------------------------------------------------------------

Verdict saxas_rep_certification() {
  std::mt19937_64 g(6);
  bool ok = true;
  std::string detail;
  for (Index n = 2; n <= 4; ++n) {
    const auto pairs = sp::DiscreteSketchDistribution::batches_with_replacement(n, 2);
    const Index rank = testkit::cod_rank(sp::kron_sketch_stack(pairs.samples(), n));
    const Mat A = testkit::random_symmetric(n, n, g);
    const bool single = sp::saxas_convergence_certificate(A, sp::DiscreteSketchDistribution::batches_with_replacement(n, 1).samples());
    ok = ok && rank == n * n && !single && sp::saxas_convergence_certificate(A, pairs.samples());
    detail += "n=" + std::to_string(n) + ": rank " + std::to_string(rank) + "/" + std::to_string(n * n) +
              ", tau=1 certified=" + (single ? "true" : "false") + "; ";
  }
  return {ok, detail};
}

// C7 -------------------------------------------------------------------------

Verdict newton_schulz_quadratic() {
  std::mt19937_64 g(77);
  std::uniform_real_distribution<double> spec(1.0, 100.0);
  double worst = 0.0;
  int pairs = 0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 2 + t % 19;
    Eigen::VectorXd d(n);
    for (Index i = 0; i < n; ++i) d(i) = spec(g);
    d(0) = 1.0;
    d(n - 1) = 100.0;
    const Mat A = t % 2 == 0 ? Mat(d.asDiagonal())
                             : Mat(testkit::random_orthogonal(n, g) * d.asDiagonal() * testkit::random_orthogonal(n, g).transpose());
    sp::SolverConfig cfg;
    cfg.method = sp::Method::NewtonSchulz;
    cfg.tol_residual = 1e-15;
    cfg.max_iters = 200;
    const auto res = sp::run(A, cfg);
    const double nA = A.norm();
    for (std::size_t k = 0; k + 1 < res.trace.size(); ++k) {
      const double rk = res.trace[k].residual, rk1 = res.trace[k + 1].residual;
      if (rk / nA >= 0.1 || rk1 / nA < 1e-11) continue;
      worst = std::max(worst, rk1 / (rk * rk));
      ++pairs;
    }
  }
  return {pairs > 0 && worst <= 10.0,
          "max r_{k+1}/r_k^2 = " + fmt("%.3g", worst) + " over " + std::to_string(pairs) + " pairs"};
}

// C8 -------------------------------------------------------------------------

Verdict projection_method() {
  const Index m = 20, n = 12, tau = 3;
  const Index budget = 50 * n / tau;
  int reached = 0;
  Index slowest = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mat A = sp::gen_gaussian_rank_r(m, n, 8, seed);
    sp::SolverConfig cfg;
    cfg.method = sp::Method::ProjectUni;
    cfg.tau = tau;
    cfg.seed = seed;
    cfg.max_iters = budget;
    cfg.trace_every = 1;
    cfg.tol_residual = 1e-300;
    const auto res = sp::run(A, cfg, sp::range_projector(A));
    for (const auto& row : res.trace) {
      if (row.error_to_oracle && *row.error_to_oracle < 1e-6) {
        ++reached;
        slowest = std::max(slowest, row.iteration);
        break;
      }
    }
  }
  return {reached == 10, std::to_string(reached) + "/10 seeds below 1e-6 within " + std::to_string(budget) +
                             " iterations (slowest " + std::to_string(slowest) + ")"};
}

// C9 / C10 ---------------------------------------------------------------------

/// Model flops at the first traced row whose relative residual is <= target,
/// or +inf when never reached.
double flops_to_reach(const sp::RunResult& r, double target, double normA) {
  for (const auto& row : r.trace)
    if (row.residual <= target * normA) return static_cast<double>(row.flops);
  return std::numeric_limits<double>::infinity();
}

sp::RunResult solve(const Mat& A, sp::Method method, std::uint64_t seed, double tol, Index max_iters) {
  sp::SolverConfig cfg;
  cfg.method = method;
  cfg.tau = 5;
  cfg.seed = seed;
  cfg.tol_residual = tol;
  cfg.max_iters = max_iters;
  cfg.trace_every = 1;
  return sp::run(A, cfg);
}

Verdict flop_comparison(const Mat& A, const sp::RunResult& ns) {
  const auto t0 = Clock::now();
  const double nA = A.norm();
  std::vector<double> satax_lo, satax_hi;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = solve(A, sp::Method::SataxUni, seed, 1e-8, 20000);
    satax_lo.push_back(flops_to_reach(r, 1e-2, nA));
    satax_hi.push_back(flops_to_reach(r, 1e-8, nA));
  }
  const double ns_lo = flops_to_reach(ns, 1e-2, nA), ns_hi = flops_to_reach(ns, 1e-8, nA);
  const double s_lo = median(satax_lo), s_hi = median(satax_hi);
  const double elapsed = seconds_since(t0);
  return {s_lo < ns_lo && ns_hi < s_hi && elapsed < 600.0,
          "to 1e-2: satax " + fmt("%.4g", s_lo) + " vs ns " + fmt("%.4g", ns_lo) + " flops; to 1e-8: ns " +
              fmt("%.4g", ns_hi) + " vs satax " + fmt("%.4g", s_hi) + " flops; " + fmt("%.1f", elapsed) + " s"};
}

Verdict hybrid_dominance(const Mat& A, const sp::RunResult& ns) {
  const double nA = A.norm();
  std::vector<double> hybrid;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    hybrid.push_back(flops_to_reach(solve(A, sp::Method::NsSatax, seed, 1e-6, 2000), 1e-6, nA));
  }
  const double h = median(hybrid), n = flops_to_reach(ns, 1e-6, nA);
  return {h <= n, "to 1e-6: ns-satax " + fmt("%.4g", h) + " vs ns " + fmt("%.4g", n) + " flops"};
}

// C11 ------------------------------------------------------------------------

std::string strip_time_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), "time_s");
  if (it == header.end()) return csv;  // not a trace
  const std::size_t col = static_cast<std::size_t>(it - header.begin());
  in.clear();
  in.seekg(0);
  while (std::getline(in, line)) {
    std::size_t start = 0;
    for (std::size_t c = 0; c < col; ++c) start = line.find(',', start) + 1;
    const std::size_t end = line.find(',', start);
    out += line.substr(0, start) + (end == std::string::npos ? "" : line.substr(end + 1)) + '\n';
  }
  return out;
}

Verdict cli_determinism() {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string tall = (dir / "acceptance_tall.mtx").string();
  const std::string eye = (dir / "acceptance_eye.mtx").string();
  sp::write_matrix_market(tall, sp::gen_gaussian_rank_r(10, 5, 5, 1));
  sp::write_matrix_market(eye, Mat::Identity(2, 2));

  const std::vector<std::vector<std::string>> examples{
      {"run", "--method", "ns", "--gen", "gaussian:m=4,n=4,r=4", "--tol", "1e-8"},
      {"run", "--method", "satax_uni", "--tau", "999999", "--matrix", tall},
      {"run", "--method", "saxas_rep", "--tau", "1", "--gen", "sym:n=4,r=4"},
      {"certify", "--matrix", eye, "--dist", "singletons", "--rate", "satax"},
      {"certify", "--matrix", eye, "--dist", "full", "--rate", "satax", "--json"},
      {"certify", "--gen", "sym:n=3,r=3", "--dist", "rep:tau=2", "--rate", "saxas"},
      {"compare", "--methods", "satax_uni,satax_ada", "--tau", "2", "--gen", "gaussian:m=20,n=8,r=5", "--seed", "3"},
      {"compare", "--methods", "ns-satax,ns", "--tau", "5", "--gen", "gaussian:m=500,n=20,r=15", "--oracle", "on"},
  };
  int same = 0;
  for (const auto& args : examples) {
    std::ostringstream o1, e1, o2, e2;
    const int c1 = pinvbench::run_cli(args, o1, e1);
    const int c2 = pinvbench::run_cli(args, o2, e2);
    if (c1 == c2 && strip_time_column(o1.str()) == strip_time_column(o2.str()) && e1.str() == e2.str()) ++same;
  }
  std::filesystem::remove(tall);
  std::filesystem::remove(eye);
  return {same == static_cast<int>(examples.size()),
          std::to_string(same) + "/" + std::to_string(examples.size()) + " CLI examples byte-identical"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const Verdict& v) {
    std::cout << "criterion " << id << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << name << ": " << v.detail
              << std::endl;
    if (!v.pass) ++failures;
  };
  auto guarded = [](const std::function<Verdict()>& f) -> Verdict {
    try {
      return f();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "Penrose identities", guarded(penrose_suite));
  report(2, "one-step exactness", guarded(one_step_exactness));
  RateOutcome ro;
  try {
    ro = rate_and_invariants();
  } catch (const std::exception& e) {
    ro.rate = ro.invariants = {false, std::string("exception: ") + e.what()};
  }
  report(3, "expected linear rate", ro.rate);
  report(4, "monotonicity and invariance", ro.invariants);
  report(5, "rate bound ordering", guarded(rate_bound_ordering));
  report(6, "with-replacement certification", guarded(saxas_rep_certification));
  report(7, "Newton-Schulz quadratic phase", guarded(newton_schulz_quadratic));
  report(8, "range projection method", guarded(projection_method));

  const Mat tall = sp::gen_gaussian_rank_r(2000, 25, 20, 0);
  sp::RunResult ns;
  std::string ns_error;
  try {
    ns = solve(tall, sp::Method::NewtonSchulz, 0, 1e-8, 500);
  } catch (const std::exception& e) {
    ns_error = e.what();
  }
  if (ns_error.empty()) {
    report(9, "flop comparison with Newton-Schulz", guarded([&] { return flop_comparison(tall, ns); }));
    report(10, "hybrid reaches 1e-6 first", guarded([&] { return hybrid_dominance(tall, ns); }));
  } else {
    report(9, "flop comparison with Newton-Schulz", {false, "exception: " + ns_error});
    report(10, "hybrid reaches 1e-6 first", {false, "exception: " + ns_error});
  }
  report(11, "CLI determinism", guarded(cli_determinism));

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
