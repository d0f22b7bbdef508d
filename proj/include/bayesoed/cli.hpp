#pragma once

// Command-line front end.  run_cli() is the whole program; tools/bayesoed.cpp
// only forwards argv.  Exit codes: 0 success, 2 validation failure,
// 3 numerical failure, 4 usage error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bayesoed/consistency.hpp"
#include "bayesoed/design.hpp"
#include "bayesoed/eig.hpp"
#include "bayesoed/errors.hpp"
#include "bayesoed/inverse_problem.hpp"
#include "bayesoed/io/generate.hpp"
#include "bayesoed/io/matrix_market.hpp"
#include "bayesoed/io/problem_io.hpp"
#include "bayesoed/io/report.hpp"
#include "bayesoed/lowrank.hpp"

namespace bayesoed::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kNumerical = 3, kUsage = 4 };

namespace detail {

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline io::ProblemInfo problem_info(const io::LoadedProblem& lp) {
  return {lp.descriptor.name, io::to_string(lp.descriptor.kind), lp.descriptor.n, lp.descriptor.q};
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out << text;
}

/// Report to stdout, or report.json under out_dir.
inline void emit_report(const io::Report& r, const std::optional<std::filesystem::path>& out_dir,
                        std::ostream& out) {
  const std::string text = io::to_json(r).dump(2) + "\n";
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_text(*out_dir / "report.json", text);
    out << "wrote " << (*out_dir / "report.json").string() << "\n";
  } else {
    out << text;
  }
}

inline std::string spectrum_csv(const std::vector<double>& spectrum) {
  std::ostringstream os;
  os << "index,eigenvalue,eig_truncated,truncation_error\n";
  double cumulative = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    cumulative += 0.5 * std::log1p(spectrum[i]);
    os << (i + 1) << "," << format_double(spectrum[i]) << "," << format_double(cumulative) << ","
       << format_double(truncation_error(spectrum, i + 1)) << "\n";
  }
  return os.str();
}

inline std::string design_trace_csv(const io::DesignSummary& d, const std::vector<std::string>& labels) {
  std::ostringstream os;
  os << "step,added,removed,criterion,added_label\n";
  for (const auto& s : d.trace) {
    os << s.step << "," << (s.added ? std::to_string(*s.added) : "") << ","
       << (s.removed ? std::to_string(*s.removed) : "") << "," << format_double(s.criterion) << ",";
    if (s.added && *s.added < labels.size()) os << csv_field(labels[*s.added]);
    os << "\n";
  }
  return os.str();
}

}  // namespace detail

struct Options {
  std::string problem;
  std::string pool;
  std::string data;
  std::string out;
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::optional<std::size_t> rank;
  std::optional<double> tail_tol;
  bool randomized = false;
  std::size_t oversampling = 8;
  std::size_t power_iterations = 1;
  bool rank_one = false;
  unsigned workers = 0;
  // generate
  std::string kind = "random";
  std::string name;
  std::string as = "pool";
  long n = 4;
  long q = 6;
  std::optional<double> noise_std;
  double width = 0.05;
  double length_scale = 0.1;
  std::vector<double> stations;
};

namespace detail {

inline std::optional<std::filesystem::path> out_dir(const Options& o) {
  if (o.out.empty()) return std::nullopt;
  return std::filesystem::path(o.out);
}

inline McConfig mc_config(const Options& o) { return {o.seed, o.mc_samples, o.workers}; }

inline int cmd_eig(const Options& o, std::ostream& out) {
  Stopwatch total;
  const auto lp = io::load_problem(o.problem);
  const auto p = lp.problem();
  io::Report r;
  r.command = "eig";
  r.problem = problem_info(lp);
  r.seed = o.seed;
  std::optional<McConfig> mc;
  if (o.mc_samples > 0) mc = mc_config(o);
  r.eig = eig_report(p, mc);
  r.timings_ms["total"] = total.elapsed_ms();
  emit_report(r, out_dir(o), out);
  return kOk;
}

inline int cmd_posterior(const Options& o, std::ostream& out) {
  Stopwatch total;
  const auto lp = io::load_problem(o.problem);
  const auto p = lp.problem();
  Vector y;
  if (!o.data.empty()) {
    const Matrix m = io::read_matrix_market(o.data);
    if (m.cols() != 1 || m.rows() != p.q()) {
      std::ostringstream os;
      os << "expected a " << p.q() << "x1 data vector, file holds " << m.rows() << "x" << m.cols();
      throw io::LoadError(o.data, 0, os.str());
    }
    y = m.col(0);
  } else {
    y = synthesize_observation(p, o.seed, 0).y;
  }
  const GaussianMeasure post = posterior(p, y);
  io::Report r;
  r.command = "posterior";
  r.problem = problem_info(lp);
  r.seed = o.seed;
  io::PosteriorSummary ps;
  ps.data.assign(y.data(), y.data() + y.size());
  ps.mean.assign(post.mean().data(), post.mean().data() + post.mean().size());
  const Vector var = post.cov().matrix().diagonal();
  ps.variances.assign(var.data(), var.data() + var.size());
  r.posterior = ps;
  r.eig = eig_report(p);
  r.timings_ms["total"] = total.elapsed_ms();
  if (const auto dir = out_dir(o)) {
    std::filesystem::create_directories(*dir);
    io::write_matrix_market(*dir / "posterior_mean.mtx", post.mean(), "posterior mean");
    io::write_matrix_market(*dir / "posterior_cov.mtx", post.cov().matrix(), "posterior covariance");
  }
  emit_report(r, out_dir(o), out);
  return kOk;
}

inline int cmd_design(const std::string& method, const Options& o, std::ostream& out) {
  Stopwatch total;
  const auto lp = io::load_problem(o.pool);
  const auto* pool = std::get_if<CandidatePool>(&lp.value);
  if (!pool) throw ValidationError(o.pool + ": design commands need a descriptor of kind \"pool\"");

  DesignResult result{Design::none(pool->size()), 0.0, {}};
  if (method == "greedy") {
    result = greedy(*pool, o.budget, GreedyOptions{o.rank_one});
  } else if (method == "exchange") {
    const DesignResult start = greedy(*pool, o.budget, GreedyOptions{o.rank_one});
    result = exchange(*pool, start.design);
  } else {
    result = exhaustive(*pool, o.budget);
  }

  io::Report r;
  r.command = "design " + method;
  r.problem = problem_info(lp);
  r.seed = o.seed;
  io::DesignSummary ds;
  ds.method = method;
  ds.budget = o.budget;
  ds.selected = result.design.indices();
  for (auto i : ds.selected)
    if (i < pool->labels().size()) ds.labels.push_back(pool->labels()[i]);
  ds.criterion = result.criterion;
  ds.trace = result.trace;
  r.design = ds;
  r.timings_ms["total"] = total.elapsed_ms();
  if (const auto dir = out_dir(o)) {
    std::filesystem::create_directories(*dir);
    write_text(*dir / "design_trace.csv", design_trace_csv(ds, pool->labels()));
  }
  emit_report(r, out_dir(o), out);
  return kOk;
}

inline int cmd_spectrum(const Options& o, std::ostream& out) {
  Stopwatch total;
  const auto lp = io::load_problem(o.problem);
  const auto p = lp.problem();
  const HessianBundle b = hessian_bundle(p);
  io::SpectrumSummary s;
  s.randomized = o.randomized;
  if (o.randomized) {
    if (!o.rank) throw ValidationError("--randomized needs --rank");
    const auto n = static_cast<std::size_t>(p.n());
    RandomizedOptions ro{std::min(o.oversampling, n - std::min(n, *o.rank)), o.power_iterations, o.seed};
    const LowRankHessian lr = randomized_spectrum(b.h_tilde, *o.rank, ro);
    s.eigenvalues = lr.eigenvalues;
    s.rank = lr.rank();
    s.eig_truncated = eig_from_lowrank(lr);
  } else {
    s.eigenvalues = full_spectrum(b.h_tilde);
    TruncationPolicy policy = RankPolicy{s.eigenvalues.size()};
    if (o.tail_tol) policy = TailTolerancePolicy{*o.tail_tol};
    if (o.rank) policy = RankPolicy{*o.rank};
    const LowRankHessian lr = truncated_spectrum(b.h_tilde, policy);
    s.rank = lr.rank();
    s.eig_truncated = eig_from_lowrank(lr);
    s.truncation_error = truncation_error(s.eigenvalues, s.rank);
  }
  io::Report r;
  r.command = "spectrum";
  r.problem = problem_info(lp);
  r.seed = o.seed;
  r.eig = eig_report(p);
  r.spectrum = s;
  r.timings_ms["total"] = total.elapsed_ms();
  if (const auto dir = out_dir(o)) {
    std::filesystem::create_directories(*dir);
    write_text(*dir / "spectrum.csv", spectrum_csv(s.eigenvalues));
  }
  emit_report(r, out_dir(o), out);
  return kOk;
}

inline int cmd_generate(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw ValidationError("generate needs --out DIR");
  io::GenerateParams gp;
  gp.kind = io::parse_generator_kind(o.kind);
  gp.n = o.n;
  gp.q = o.q;
  gp.seed = o.seed;
  gp.noise_std = o.noise_std;
  gp.kernel_width = o.width;
  gp.length_scale = o.length_scale;
  gp.stations = o.stations;
  const CandidatePool pool = io::generate(gp);
  const std::string name = o.name.empty() ? o.kind : o.name;
  std::filesystem::path descriptor;
  if (o.as == "pool") {
    descriptor = io::save_pool(o.out, name, pool);
  } else if (o.as == "problem") {
    descriptor = io::save_problem(o.out, name, restrict(pool, Design::all(pool.size())));
  } else {
    throw ValidationError("--as must be pool or problem");
  }
  out << descriptor.string() << "\n";
  return kOk;
}

inline int cmd_validate(const Options& o, std::ostream& out) {
  Stopwatch total;
  const auto lp = io::load_problem(o.problem);
  const auto p = lp.problem();
  io::Report r;
  r.command = "validate";
  r.problem = problem_info(lp);
  r.seed = o.seed;
  r.checks = run_consistency_checks(p, mc_config(o));
  r.eig = eig_report(p);
  r.timings_ms["total"] = total.elapsed_ms();
  bool all = true;
  for (const auto& c : r.checks) {
    all = all && c.passed;
    out << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  value=" << format_double(c.value)
        << " reference=" << format_double(c.reference) << " tolerance=" << format_double(c.tolerance) << "\n";
  }
  if (const auto dir = out_dir(o)) {
    std::filesystem::create_directories(*dir);
    write_text(*dir / "report.json", io::to_json(r).dump(2) + "\n");
  }
  out << (all ? "all identities hold" : "identity check FAILED") << "\n";
  return all ? kOk : kValidation;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Expected information gain and Bayesian D-optimal design for linear-Gaussian inverse problems",
               "bayesoed"};
  app.require_subcommand(1);

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Random seed")->capture_default_str(); };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output directory"); };

  auto* eig = app.add_subcommand("eig", "EIG by closed form, log-det form and Monte Carlo");
  eig->add_option("--problem", o.problem, "Problem descriptor")->required();
  eig->add_option("--mc-samples", o.mc_samples, "Monte Carlo samples (0 skips)")->capture_default_str();
  eig->add_option("--workers", o.workers, "Monte Carlo worker threads (0 = all cores)");
  add_seed(eig);
  add_out(eig);

  auto* post = app.add_subcommand("posterior", "Posterior mean and covariance");
  post->add_option("--problem", o.problem, "Problem descriptor")->required();
  post->add_option("--data", o.data, "Data vector (Matrix Market, q x 1); synthesized from --seed if absent");
  add_seed(post);
  add_out(post);

  auto* design = app.add_subcommand("design", "Sensor selection");
  design->require_subcommand(1);
  std::string method;
  for (const char* m : {"greedy", "exchange", "exhaustive"}) {
    auto* sub = design->add_subcommand(m, std::string(m) + " selection");
    sub->add_option("--pool", o.pool, "Candidate pool descriptor")->required();
    sub->add_option("--budget", o.budget, "Number of sensors to select")->required();
    sub->add_flag("--rank-one", o.rank_one, "Greedy scoring by rank-one updates");
    add_seed(sub);
    add_out(sub);
    sub->callback([&method, m] { method = m; });
  }

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues of the prior-preconditioned Hessian");
  spectrum->add_option("--problem", o.problem, "Problem descriptor")->required();
  auto* rank_opt = spectrum->add_option("--rank", o.rank, "Keep the top R eigenpairs");
  spectrum->add_option("--tail-tol", o.tail_tol, "Keep the fewest eigenpairs with discarded tail <= TAU")
      ->excludes(rank_opt);
  spectrum->add_flag("--randomized", o.randomized, "Randomized range finder instead of dense eigensolver");
  spectrum->add_option("--oversampling", o.oversampling)->capture_default_str();
  spectrum->add_option("--power-iterations", o.power_iterations)->capture_default_str();
  add_seed(spectrum);
  add_out(spectrum);

  auto* gen = app.add_subcommand("generate", "Write a synthetic problem");
  gen->add_option("kind", o.kind, "random | deconvolution-1d")
      ->check(CLI::IsMember({"random", "deconvolution-1d"}))
      ->capture_default_str();
  gen->add_option("--n", o.n, "Parameter dimension")->capture_default_str();
  gen->add_option("--q", o.q, "Number of observations / candidates")->capture_default_str();
  gen->add_option("--noise-std", o.noise_std, "Noise standard deviation");
  gen->add_option("--width", o.width, "Blur kernel width (deconvolution-1d)")->capture_default_str();
  gen->add_option("--length-scale", o.length_scale, "Prior length scale (deconvolution-1d)")->capture_default_str();
  gen->add_option("--stations", o.stations, "Station locations in [0,1] (deconvolution-1d)")->delimiter(',');
  gen->add_option("--name", o.name, "Descriptor name (defaults to the kind)");
  gen->add_option("--as", o.as, "Write a pool (diagonal noise) or a full problem")
      ->check(CLI::IsMember({"pool", "problem"}))
      ->capture_default_str();
  add_seed(gen);
  add_out(gen);

  auto* validate = app.add_subcommand("validate", "Run the identity and Monte Carlo consistency battery");
  validate->add_option("--problem", o.problem, "Problem descriptor")->required();
  validate->add_option("--mc-samples", o.mc_samples, "Monte Carlo samples")->capture_default_str();
  validate->add_option("--workers", o.workers, "Monte Carlo worker threads (0 = all cores)");
  add_seed(validate);
  add_out(validate);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (eig->parsed()) {
      if (o.mc_samples == 1) throw ValidationError("--mc-samples must be 0 or at least 2");
      return detail::cmd_eig(o, out);
    }
    if (post->parsed()) return detail::cmd_posterior(o, out);
    if (design->parsed()) return detail::cmd_design(method, o, out);
    if (spectrum->parsed()) return detail::cmd_spectrum(o, out);
    if (gen->parsed()) return detail::cmd_generate(o, out);
    if (validate->parsed()) return detail::cmd_validate(o, out);
  } catch (const io::LoadError& e) {
    err << (e.numerical() ? "numerical error: " : "validation error: ") << e.what() << "\n";
    return e.numerical() ? kNumerical : kValidation;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace bayesoed::cli
