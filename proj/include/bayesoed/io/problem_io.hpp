#pragma once

// Problem descriptors: a small JSON document that names the problem, declares
// its dimensions and points at Matrix Market files by relative path.
//
//   {
//     "format": "bayesoed-problem/1",
//     "kind": "problem",            // or "pool"
//     "name": "scalar",
//     "n": 1, "q": 1,
//     "forward": "forward.mtx",     // problem: F (q x n)
//     "noise_cov": "noise_cov.mtx", // problem: Gnoise (q x q)
//     "rows": "rows.mtx",           // pool: candidate rows (q x n)
//     "noise_variances": "var.mtx", // pool: q x 1
//     "prior_cov": "prior_cov.mtx", // n x n
//     "prior_mean": "prior_mean.mtx", // optional n x 1, zero if absent
//     "labels": ["s0", "s1"]        // optional, pool only
//   }

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bayesoed/design.hpp"
#include "bayesoed/errors.hpp"
#include "bayesoed/gaussian.hpp"
#include "bayesoed/inverse_problem.hpp"
#include "bayesoed/io/matrix_market.hpp"

namespace bayesoed::io {

inline constexpr const char* kDescriptorFormat = "bayesoed-problem/1";

enum class ProblemKind { kProblem, kPool };

inline const char* to_string(ProblemKind k) { return k == ProblemKind::kPool ? "pool" : "problem"; }

struct ProblemDescriptor {
  std::string name;
  ProblemKind kind = ProblemKind::kProblem;
  long n = 0;
  long q = 0;
  std::string forward;          // F or candidate rows
  std::string noise;            // noise covariance or variance vector
  std::string prior_cov;
  std::optional<std::string> prior_mean;
  std::vector<std::string> labels;
};

struct LoadedProblem {
  ProblemDescriptor descriptor;
  std::variant<BayesLinearProblem, CandidatePool> value;

  bool is_pool() const { return std::holds_alternative<CandidatePool>(value); }

  /// The inverse problem itself; a pool is read with every candidate selected.
  BayesLinearProblem problem() const {
    if (const auto* pool = std::get_if<CandidatePool>(&value)) return restrict(*pool, Design::all(pool->size()));
    return std::get<BayesLinearProblem>(value);
  }
};

inline ProblemDescriptor parse_descriptor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, 0, "cannot open descriptor");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(path, 0, std::string("descriptor parse error: ") + e.what());
  }
  if (!j.is_object()) throw LoadError(path, 0, "descriptor must be a JSON object");

  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw LoadError(path, 0, std::string("descriptor is missing '") + key + "'");
    return j.at(key);
  };
  auto text = [&](const char* key) {
    const auto& v = field(key);
    if (!v.is_string()) throw LoadError(path, 0, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
  };
  auto dimension = [&](const char* key) {
    const auto& v = field(key);
    if (!v.is_number_integer() || v.get<long>() < 1)
      throw LoadError(path, 0, std::string("'") + key + "' must be a positive integer");
    return v.get<long>();
  };

  if (j.contains("format") && j.at("format") != kDescriptorFormat)
    throw LoadError(path, 0, "unsupported descriptor format " + j.at("format").dump());

  ProblemDescriptor d;
  d.name = j.value("name", path.stem().string());
  const std::string kind = text("kind");
  if (kind == "problem") d.kind = ProblemKind::kProblem;
  else if (kind == "pool") d.kind = ProblemKind::kPool;
  else throw LoadError(path, 0, "'kind' must be \"problem\" or \"pool\", got \"" + kind + "\"");
  d.n = dimension("n");
  d.q = dimension("q");
  if (d.kind == ProblemKind::kProblem) {
    d.forward = text("forward");
    d.noise = text("noise_cov");
  } else {
    d.forward = text("rows");
    d.noise = text("noise_variances");
  }
  d.prior_cov = text("prior_cov");
  if (j.contains("prior_mean")) d.prior_mean = text("prior_mean");
  if (j.contains("labels")) {
    const auto& l = j.at("labels");
    if (!l.is_array()) throw LoadError(path, 0, "'labels' must be an array of strings");
    for (const auto& s : l) {
      if (!s.is_string()) throw LoadError(path, 0, "'labels' must be an array of strings");
      d.labels.push_back(s.get<std::string>());
    }
    if (static_cast<long>(d.labels.size()) != d.q) throw LoadError(path, 0, "'labels' length differs from q");
  }
  return d;
}

namespace detail {

inline Matrix load_sized(const std::filesystem::path& file, long rows, long cols) {
  if (!std::filesystem::exists(file)) throw LoadError(file, 0, "file does not exist");
  Matrix m = read_matrix_market(file);
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "expected a " << rows << "x" << cols << " matrix, file holds " << m.rows() << "x" << m.cols();
    throw LoadError(file, 0, os.str());
  }
  return m;
}

inline SpdMatrix load_spd(const std::filesystem::path& file, long dim) {
  const Matrix m = load_sized(file, dim, dim);
  try {
    return SpdMatrix(m);
  } catch (const NumericalError& e) {
    throw LoadError(file, 0, e.what(), true);
  } catch (const ValidationError& e) {
    throw LoadError(file, 0, e.what());
  }
}

}  // namespace detail

/// Load and fully validate the problem or pool a descriptor points at.
inline LoadedProblem load_problem(const std::filesystem::path& descriptor_path) {
  ProblemDescriptor d = parse_descriptor(descriptor_path);
  const auto base = descriptor_path.parent_path();
  auto resolve = [&](const std::string& rel) { return base / rel; };

  const SpdMatrix prior_cov = detail::load_spd(resolve(d.prior_cov), d.n);
  Vector prior_mean = Vector::Zero(d.n);
  if (d.prior_mean) prior_mean = detail::load_sized(resolve(*d.prior_mean), d.n, 1).col(0);
  GaussianMeasure prior(prior_mean, prior_cov);

  const auto forward_file = resolve(d.forward);
  const auto noise_file = resolve(d.noise);
  Matrix f = detail::load_sized(forward_file, d.q, d.n);

  if (d.kind == ProblemKind::kProblem) {
    SpdMatrix noise = detail::load_spd(noise_file, d.q);
    BayesLinearProblem p(ForwardModel(std::move(f)), std::move(noise), std::move(prior));
    return {std::move(d), std::move(p)};
  }
  const Vector variances = detail::load_sized(noise_file, d.q, 1).col(0);
  for (Eigen::Index i = 0; i < variances.size(); ++i) {
    if (!(variances(i) > 0.0)) {
      std::ostringstream os;
      os << "noise variance at row " << (i + 1) << " is not positive";
      throw LoadError(noise_file, 0, os.str());
    }
  }
  auto labels = d.labels;
  CandidatePool pool(std::move(f), variances, std::move(prior), std::move(labels));
  return {std::move(d), std::move(pool)};
}

namespace detail {

inline nlohmann::json descriptor_json(const ProblemDescriptor& d) {
  nlohmann::json j;
  j["format"] = kDescriptorFormat;
  j["kind"] = to_string(d.kind);
  j["name"] = d.name;
  j["n"] = d.n;
  j["q"] = d.q;
  if (d.kind == ProblemKind::kProblem) {
    j["forward"] = d.forward;
    j["noise_cov"] = d.noise;
  } else {
    j["rows"] = d.forward;
    j["noise_variances"] = d.noise;
  }
  j["prior_cov"] = d.prior_cov;
  if (d.prior_mean) j["prior_mean"] = *d.prior_mean;
  if (!d.labels.empty()) j["labels"] = d.labels;
  return j;
}

inline std::filesystem::path write_descriptor(const std::filesystem::path& dir, const ProblemDescriptor& d) {
  const auto path = dir / (d.name + ".json");
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out << descriptor_json(d).dump(2) << "\n";
  return path;
}

inline void write_prior(const std::filesystem::path& dir, ProblemDescriptor& d, const GaussianMeasure& prior) {
  d.prior_cov = d.name + ".prior_cov.mtx";
  write_matrix_market(dir / d.prior_cov, prior.cov().matrix(), "prior covariance");
  if (!prior.mean().isZero(0.0)) {
    d.prior_mean = d.name + ".prior_mean.mtx";
    write_matrix_market(dir / *d.prior_mean, prior.mean(), "prior mean");
  }
}

}  // namespace detail

/// Write the problem's matrices and its descriptor into dir; returns the descriptor path.
inline std::filesystem::path save_problem(const std::filesystem::path& dir, const std::string& name,
                                          const BayesLinearProblem& p) {
  std::filesystem::create_directories(dir);
  ProblemDescriptor d;
  d.name = name;
  d.kind = ProblemKind::kProblem;
  d.n = static_cast<long>(p.n());
  d.q = static_cast<long>(p.q());
  d.forward = name + ".forward.mtx";
  d.noise = name + ".noise_cov.mtx";
  write_matrix_market(dir / d.forward, p.f(), "forward map F");
  write_matrix_market(dir / d.noise, p.noise_cov().matrix(), "noise covariance");
  detail::write_prior(dir, d, p.prior());
  return detail::write_descriptor(dir, d);
}

inline std::filesystem::path save_pool(const std::filesystem::path& dir, const std::string& name,
                                       const CandidatePool& pool) {
  std::filesystem::create_directories(dir);
  ProblemDescriptor d;
  d.name = name;
  d.kind = ProblemKind::kPool;
  d.n = static_cast<long>(pool.n());
  d.q = static_cast<long>(pool.size());
  d.forward = name + ".rows.mtx";
  d.noise = name + ".noise_variances.mtx";
  d.labels = pool.labels();
  write_matrix_market(dir / d.forward, pool.rows(), "candidate observation rows");
  write_matrix_market(dir / d.noise, pool.noise_variances(), "candidate noise variances");
  detail::write_prior(dir, d, pool.prior());
  return detail::write_descriptor(dir, d);
}

}  // namespace bayesoed::io
