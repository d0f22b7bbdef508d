#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bayesoed/consistency.hpp"
#include "bayesoed/design.hpp"
#include "bayesoed/eig.hpp"
#include "bayesoed/errors.hpp"

namespace bayesoed::io {

inline constexpr const char* kReportFormat = "bayesoed-report/1";

struct ProblemInfo {
  std::string name;
  std::string kind;
  long n = 0;
  long q = 0;
  bool operator==(const ProblemInfo&) const = default;
};

struct PosteriorSummary {
  std::vector<double> data;
  std::vector<double> mean;
  std::vector<double> variances;
  bool operator==(const PosteriorSummary&) const = default;
};

struct DesignSummary {
  std::string method;
  std::size_t budget = 0;
  std::vector<std::size_t> selected;
  std::vector<std::string> labels;
  double criterion = 0.0;
  std::vector<DesignStep> trace;
  bool operator==(const DesignSummary&) const = default;
};

struct SpectrumSummary {
  std::vector<double> eigenvalues;  // full dense spectrum, or the randomized estimates
  std::size_t rank = 0;
  double eig_truncated = 0.0;
  std::optional<double> truncation_error;
  bool randomized = false;
  bool operator==(const SpectrumSummary&) const = default;
};

struct Report {
  std::string command;
  ProblemInfo problem;
  std::uint64_t seed = 0;
  std::optional<EigReport> eig;
  std::optional<PosteriorSummary> posterior;
  std::optional<DesignSummary> design;
  std::optional<SpectrumSummary> spectrum;
  std::vector<IdentityCheck> checks;
  std::map<std::string, double> timings_ms;
};

inline bool operator==(const Report& a, const Report& b) {
  return a.command == b.command && a.problem == b.problem && a.seed == b.seed && a.eig == b.eig &&
         a.posterior == b.posterior && a.design == b.design && a.spectrum == b.spectrum && a.checks == b.checks &&
         a.timings_ms == b.timings_ms;
}

namespace detail {

inline double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("report: non-finite value in ") + what);
  return v;
}

inline nlohmann::json finite_list(const std::vector<double>& v, const char* what) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(finite(x, what));
  return a;
}

template <typename T>
std::optional<T> opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace detail

/// Serialize; timings are left out when include_timings is false so that
/// reruns with the same inputs compare byte-for-byte.
inline nlohmann::json to_json(const Report& r, bool include_timings = true) {
  using detail::finite;
  nlohmann::json j;
  j["format"] = kReportFormat;
  j["command"] = r.command;
  j["problem"] = {{"name", r.problem.name}, {"kind", r.problem.kind}, {"n", r.problem.n}, {"q", r.problem.q}};
  j["seed"] = r.seed;
  if (r.eig) {
    nlohmann::json e;
    e["closed_form"] = finite(r.eig->closed_form, "eig.closed_form");
    e["logdet_form"] = finite(r.eig->logdet_form, "eig.logdet_form");
    if (r.eig->mc_estimate) e["mc_estimate"] = finite(*r.eig->mc_estimate, "eig.mc_estimate");
    if (r.eig->mc_std_error) e["mc_std_error"] = finite(*r.eig->mc_std_error, "eig.mc_std_error");
    if (r.eig->mc_samples) e["mc_samples"] = *r.eig->mc_samples;
    j["eig"] = e;
  }
  if (r.posterior) {
    j["posterior"] = {{"data", detail::finite_list(r.posterior->data, "posterior.data")},
                      {"mean", detail::finite_list(r.posterior->mean, "posterior.mean")},
                      {"variances", detail::finite_list(r.posterior->variances, "posterior.variances")}};
  }
  if (r.design) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : r.design->trace) {
      nlohmann::json t = {{"step", s.step}, {"criterion", finite(s.criterion, "design.trace")}};
      if (s.added) t["added"] = *s.added;
      if (s.removed) t["removed"] = *s.removed;
      trace.push_back(t);
    }
    j["design"] = {{"method", r.design->method},
                   {"budget", r.design->budget},
                   {"selected", r.design->selected},
                   {"labels", r.design->labels},
                   {"criterion", finite(r.design->criterion, "design.criterion")},
                   {"trace", trace}};
  }
  if (r.spectrum) {
    nlohmann::json s = {{"eigenvalues", detail::finite_list(r.spectrum->eigenvalues, "spectrum")},
                        {"rank", r.spectrum->rank},
                        {"eig_truncated", finite(r.spectrum->eig_truncated, "spectrum.eig_truncated")},
                        {"randomized", r.spectrum->randomized}};
    if (r.spectrum->truncation_error)
      s["truncation_error"] = finite(*r.spectrum->truncation_error, "spectrum.truncation_error");
    j["spectrum"] = s;
  }
  if (!r.checks.empty()) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) {
      checks.push_back({{"name", c.name},
                        {"value", finite(c.value, "checks.value")},
                        {"reference", finite(c.reference, "checks.reference")},
                        {"tolerance", finite(c.tolerance, "checks.tolerance")},
                        {"passed", c.passed}});
    }
    j["checks"] = checks;
  }
  if (include_timings) j["timings_ms"] = r.timings_ms;
  return j;
}

inline Report report_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kReportFormat) throw ValidationError("report: unsupported format");
  Report r;
  r.command = j.at("command").get<std::string>();
  const auto& p = j.at("problem");
  r.problem = {p.at("name").get<std::string>(), p.at("kind").get<std::string>(), p.at("n").get<long>(),
               p.at("q").get<long>()};
  r.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("eig")) {
    const auto& e = j.at("eig");
    EigReport er;
    er.closed_form = e.at("closed_form").get<double>();
    er.logdet_form = e.at("logdet_form").get<double>();
    er.mc_estimate = detail::opt<double>(e, "mc_estimate");
    er.mc_std_error = detail::opt<double>(e, "mc_std_error");
    er.mc_samples = detail::opt<std::size_t>(e, "mc_samples");
    r.eig = er;
  }
  if (j.contains("posterior")) {
    const auto& ps = j.at("posterior");
    r.posterior = PosteriorSummary{ps.at("data").get<std::vector<double>>(), ps.at("mean").get<std::vector<double>>(),
                                   ps.at("variances").get<std::vector<double>>()};
  }
  if (j.contains("design")) {
    const auto& d = j.at("design");
    DesignSummary ds;
    ds.method = d.at("method").get<std::string>();
    ds.budget = d.at("budget").get<std::size_t>();
    ds.selected = d.at("selected").get<std::vector<std::size_t>>();
    ds.labels = d.at("labels").get<std::vector<std::string>>();
    ds.criterion = d.at("criterion").get<double>();
    for (const auto& t : d.at("trace")) {
      ds.trace.push_back({t.at("step").get<std::size_t>(), detail::opt<std::size_t>(t, "added"),
                          detail::opt<std::size_t>(t, "removed"), t.at("criterion").get<double>()});
    }
    r.design = ds;
  }
  if (j.contains("spectrum")) {
    const auto& s = j.at("spectrum");
    r.spectrum = SpectrumSummary{s.at("eigenvalues").get<std::vector<double>>(), s.at("rank").get<std::size_t>(),
                                 s.at("eig_truncated").get<double>(), detail::opt<double>(s, "truncation_error"),
                                 s.at("randomized").get<bool>()};
  }
  if (j.contains("checks")) {
    for (const auto& c : j.at("checks")) {
      r.checks.push_back({c.at("name").get<std::string>(), c.at("value").get<double>(),
                          c.at("reference").get<double>(), c.at("tolerance").get<double>(),
                          c.at("passed").get<bool>()});
    }
  }
  if (j.contains("timings_ms")) r.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
  return r;
}

}  // namespace bayesoed::io
