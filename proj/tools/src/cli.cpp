#include "pinvbench/cli.hpp"

#include "sketchpinv/analysis.hpp"
#include "sketchpinv/flops.hpp"
#include "sketchpinv/io.hpp"
#include "sketchpinv/linalg.hpp"
#include "sketchpinv/random.hpp"
#include "sketchpinv/sketching.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string_view>

namespace pinvbench {

namespace sp = sketchpinv;

namespace {

constexpr std::string_view kTimingNote =
    "time_s covers solver work only: residual and oracle-error evaluation and all I/O are excluded.\n"
    "flops follow the closed-form model printed by --explain-flops.";

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct MatrixSource {
  std::string matrix;
  std::string gen;
};

void add_source_options(CLI::App& cmd, MatrixSource& src) {
  cmd.add_option("--matrix", src.matrix, "Matrix Market or LIBSVM file");
  cmd.add_option("--gen", src.gen, "generator, e.g. gaussian:m=500,n=20,r=15 | sym:n=25,r=6 | gram:path=FILE");
}

sp::DenseMatrix load_matrix(const MatrixSource& src) {
  if (src.matrix.empty() == src.gen.empty()) throw std::invalid_argument("exactly one of --matrix or --gen is required");
  if (!src.matrix.empty()) return sp::read_matrix_file(src.matrix);
  return sp::generate(sp::parse_generator_spec(src.gen));
}

sp::Method method_or_throw(const std::string& name) {
  const auto m = sp::parse_method(name);
  if (!m) throw std::invalid_argument("unknown method '" + name + "'");
  return *m;
}

/// Target of ||X_k - target||_F in the err_oracle column.
sp::DenseMatrix oracle_for(sp::Method method, const sp::DenseMatrix& A) {
  return method == sp::Method::ProjectUni ? sp::range_projector(A) : sp::pinv_exact(A);
}

struct SolveOptions {
  sp::Index tau = 1;
  std::uint64_t seed = 0;
  sp::Index max_iters = 1000;
  double tol = 1e-8;
  std::string oracle = "off";
  sp::Index trace_every = 0;
  std::string out;
};

void add_solve_options(CLI::App& cmd, SolveOptions& o) {
  cmd.add_option("--tau", o.tau, "sketch size")->capture_default_str();
  cmd.add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  cmd.add_option("--max-iters", o.max_iters, "iteration budget")->capture_default_str();
  cmd.add_option("--tol", o.tol, "stop when ||AXA - A||_F <= tol * ||A||_F")->capture_default_str();
  cmd.add_option("--oracle", o.oracle, "also report ||X_k - A^+||_F (AA^+ for project)")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  cmd.add_option("--trace-every", o.trace_every, "residual cadence; 0 = ceil(dim/tau), 1 for ns")
      ->capture_default_str();
  cmd.add_option("--out", o.out, "write the CSV here instead of stdout");
}

sp::SolverConfig make_config(sp::Method method, const SolveOptions& o, std::uint64_t seed) {
  sp::SolverConfig cfg;
  cfg.method = method;
  cfg.tau = o.tau;
  cfg.seed = seed;
  cfg.max_iters = o.max_iters;
  cfg.tol_residual = o.tol;
  cfg.trace_every = o.trace_every;
  return cfg;
}

sp::RunResult solve(const sp::DenseMatrix& A, const sp::SolverConfig& cfg, bool with_oracle) {
  if (with_oracle) return sp::run(A, cfg, oracle_for(cfg.method, A));
  return sp::run(A, cfg);
}

/// Writes to `path`, or to `fallback` when the path is empty.
template <typename F>
void with_output(const std::string& path, std::ostream& fallback, F&& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  body(file);
}

int cmd_run(const MatrixSource& src, const std::string& method_name, const SolveOptions& o, std::ostream& out,
            std::ostream& err) {
  const sp::DenseMatrix A = load_matrix(src);
  const sp::SolverConfig cfg = make_config(method_or_throw(method_name), o, o.seed);
  sp::validate(cfg, A);
  const bool with_oracle = o.oracle == "on";
  const sp::RunResult res = solve(A, cfg, with_oracle);
  with_output(o.out, out, [&](std::ostream& s) { write_trace_csv(s, res.trace, with_oracle); });
  switch (res.stop) {
    case sp::StopReason::ToleranceReached:
      return 0;
    case sp::StopReason::MaxIterations:
      return 2;
    case sp::StopReason::Diverged:
      err << "error: " << res.diagnostic << '\n';
      return 1;
  }
  return 1;
}

int cmd_compare(const MatrixSource& src, const std::vector<std::string>& names, const SolveOptions& o,
                std::ostream& out, std::ostream& err) {
  if (names.empty()) throw std::invalid_argument("--methods needs at least one method");
  const sp::DenseMatrix A = load_matrix(src);
  std::vector<sp::SolverConfig> configs;
  for (const auto& name : names) {
    const sp::Method m = method_or_throw(name);
    // The stream index is the method's own id, so a method's trace does not
    // depend on which other methods are listed.
    configs.push_back(make_config(m, o, sp::split_seed(o.seed, static_cast<std::uint64_t>(m))));
    sp::validate(configs.back(), A);
  }
  const bool with_oracle = o.oracle == "on";
  std::vector<sp::RunResult> results;
  for (const auto& cfg : configs) results.push_back(solve(A, cfg, with_oracle));

  with_output(o.out, out, [&](std::ostream& s) {
    for (std::size_t i = 0; i < results.size(); ++i) {
      write_trace_csv(s, results[i].trace, with_oracle, std::string(sp::method_name(configs[i].method)), i == 0);
    }
  });
  int code = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].stop == sp::StopReason::Diverged) {
      err << "error: " << sp::method_name(configs[i].method) << ": " << results[i].diagnostic << '\n';
      code = 1;
    } else if (results[i].stop == sp::StopReason::MaxIterations && code == 0) {
      code = 2;
    }
  }
  return code;
}

struct DistSpec {
  enum class Kind { Uniform, Rep, Singletons, Full } kind = Kind::Singletons;
  sp::Index tau = 1;
};

DistSpec parse_dist(const std::string& text) {
  DistSpec d;
  if (text == "singletons") {
    d.kind = DistSpec::Kind::Singletons;
    return d;
  }
  if (text == "full") {
    d.kind = DistSpec::Kind::Full;
    return d;
  }
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if ((kind != "uniform" && kind != "rep") || colon == std::string::npos ||
      text.compare(colon + 1, 4, "tau=") != 0) {
    throw std::invalid_argument("--dist must be uniform:tau=K, rep:tau=K, singletons or full");
  }
  d.kind = kind == "uniform" ? DistSpec::Kind::Uniform : DistSpec::Kind::Rep;
  const std::string value = text.substr(colon + 5);
  long long tau = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), tau);
  if (ec != std::errc() || ptr != value.data() + value.size() || tau < 1) {
    throw std::invalid_argument("--dist: tau must be a positive integer");
  }
  d.tau = static_cast<sp::Index>(tau);
  return d;
}

sp::DiscreteSketchDistribution build_distribution(const DistSpec& d, sp::Index n) {
  switch (d.kind) {
    case DistSpec::Kind::Singletons:
      return sp::DiscreteSketchDistribution::singletons(n);
    case DistSpec::Kind::Full:
      return sp::DiscreteSketchDistribution::full_identity(n);
    case DistSpec::Kind::Uniform:
      if (d.tau > n) {
        throw std::invalid_argument("tau exceeds dimension (tau=" + std::to_string(d.tau) + ", n=" + std::to_string(n) + ")");
      }
      return sp::DiscreteSketchDistribution::uniform_batches(n, d.tau);
    case DistSpec::Kind::Rep:
      return sp::DiscreteSketchDistribution::batches_with_replacement(n, d.tau);
  }
  throw std::logic_error("unreachable distribution kind");
}

void check_cap(const sp::DenseMatrix& A, sp::Index cap) {
  if (A.rows() > cap || A.cols() > cap) {
    throw std::invalid_argument("analysis cap exceeded: dimensions are limited to <= " + std::to_string(cap) +
                                ", got " + std::to_string(A.rows()) + " x " + std::to_string(A.cols()));
  }
}

int cmd_certify(const MatrixSource& src, const std::string& dist_text, const std::string& rate,
                const std::string& probs, bool json, std::ostream& out) {
  const sp::DenseMatrix A = load_matrix(src);
  const DistSpec spec = parse_dist(dist_text);
  const bool saxas = rate == "saxas";
  if (saxas && probs == "convenient") throw std::invalid_argument("--probs convenient applies to --rate satax only");
  check_cap(A, saxas ? sp::kKroneckerCap : sp::analysis_cap());

  sp::DiscreteSketchDistribution dist = build_distribution(spec, A.cols());
  sp::RateReport report;
  if (saxas) {
    report = sp::saxas_rate_bound(A, dist);
  } else {
    if (probs == "convenient") {
      const sp::DenseMatrix G = A.transpose() * A;
      dist = sp::convenient_probabilities(G, dist.samples());
      report = sp::satax_rate_exact(A, dist);
      report.rho_bound = sp::satax_rate_bound(A, dist.stacked());
    } else {
      report = sp::satax_rate_exact(A, dist);
    }
  }

  if (json) {
    nlohmann::ordered_json j;
    j["rate"] = rate;
    j["dist"] = dist_text;
    j["probs"] = probs;
    j["outcomes"] = dist.size();
    j["rho_exact"] = report.rho_exact;
    j["rho_unclamped"] = report.rho_unclamped;
    j["rho_bound"] = report.rho_bound ? nlohmann::ordered_json(*report.rho_bound) : nlohmann::ordered_json(nullptr);
    j["certified"] = report.certified;
    j["spectrum_note"] = report.spectrum_note;
    out << j.dump(2) << '\n';
  } else {
    out << "rate=" << rate << '\n'
        << "dist=" << dist_text << '\n'
        << "probs=" << probs << '\n'
        << "outcomes=" << dist.size() << '\n'
        << "rho_exact=" << format_double(report.rho_exact) << '\n'
        << "rho_unclamped=" << format_double(report.rho_unclamped) << '\n'
        << "rho_bound=" << (report.rho_bound ? format_double(*report.rho_bound) : std::string("n/a")) << '\n'
        << "certified=" << (report.certified ? "true" : "false") << '\n'
        << "spectrum_note=" << report.spectrum_note << '\n';
  }
  return 0;
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<sp::IterTrace>& trace, bool with_oracle,
                     const std::string& method, bool header) {
  const bool prefixed = !method.empty();
  if (header) {
    if (prefixed) out << "method,";
    out << "iter,phase,time_s,flops,residual";
    if (with_oracle) out << ",err_oracle";
    out << '\n';
  }
  for (const auto& t : trace) {
    if (prefixed) out << method << ',';
    out << t.iteration << ',' << t.phase << ',' << format_double(t.elapsed_s) << ',' << t.flops << ','
        << format_double(t.residual);
    if (with_oracle) out << ',' << (t.error_to_oracle ? format_double(*t.error_to_oracle) : std::string());
    out << '\n';
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sketch-and-project pseudoinverse benchmarks"};
  app.footer(std::string(kTimingNote));
  bool explain_flops = false;
  app.add_flag("--explain-flops", explain_flops, "print the flop model and exit");
  app.require_subcommand(0, 1);

  MatrixSource run_src;
  SolveOptions run_opts;
  std::string run_method;
  CLI::App* run = app.add_subcommand("run", "run one method and print its residual trace as CSV");
  add_source_options(*run, run_src);
  run->add_option("--method", run_method,
                  "satax_uni|satax_ada|saxas_uni|saxas_ada|saxas_rep|project|sax|xa|ns|ns-satax")
      ->required();
  add_solve_options(*run, run_opts);
  run->footer(std::string(kTimingNote));

  MatrixSource cert_src;
  std::string cert_dist;
  std::string cert_rate = "satax";
  std::string cert_probs = "uniform";
  bool cert_json = false;
  CLI::App* certify = app.add_subcommand("certify", "evaluate the theoretical convergence rate");
  add_source_options(*certify, cert_src);
  certify->add_option("--dist", cert_dist, "uniform:tau=K | rep:tau=K | singletons | full")->required();
  certify->add_option("--rate", cert_rate, "satax | saxas")
      ->check(CLI::IsMember({"satax", "saxas"}))
      ->capture_default_str();
  certify->add_option("--probs", cert_probs, "uniform | convenient (satax only)")
      ->check(CLI::IsMember({"uniform", "convenient"}))
      ->capture_default_str();
  certify->add_flag("--json", cert_json, "machine-readable output");

  MatrixSource cmp_src;
  SolveOptions cmp_opts;
  std::vector<std::string> cmp_methods;
  CLI::App* compare = app.add_subcommand("compare", "run several methods on one matrix; long-format CSV");
  add_source_options(*compare, cmp_src);
  compare->add_option("--methods", cmp_methods, "comma-separated method list")->delimiter(',')->required();
  add_solve_options(*compare, cmp_opts);
  compare->footer(std::string(kTimingNote) +
                  "\nMethod k is seeded with split_seed(seed, id(k)), id being its position in the run --method list.");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (explain_flops) {
      out << sp::flops::explain();
      return 0;
    }
    if (run->parsed()) return cmd_run(run_src, run_method, run_opts, out, err);
    if (certify->parsed()) return cmd_certify(cert_src, cert_dist, cert_rate, cert_probs, cert_json, out);
    if (compare->parsed()) return cmd_compare(cmp_src, cmp_methods, cmp_opts, out, err);
    err << app.help();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pinvbench
