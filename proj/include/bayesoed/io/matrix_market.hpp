#pragma once

// Dense Matrix Market ("array") reader and writer.
//
// Values are written column-major with 17 significant digits, which is enough
// for every double to round-trip exactly through strtod/from_chars.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "bayesoed/errors.hpp"
#include "bayesoed/spd_matrix.hpp"

namespace bayesoed::io {

/// Error tied to a file and (when known) a line in it.
class LoadError : public ValidationError {
 public:
  LoadError(const std::filesystem::path& file, std::size_t line, const std::string& what, bool numerical = false)
      : ValidationError(format(file, line, what)), file_(file), line_(line), numerical_(numerical) {}

  const std::filesystem::path& file() const { return file_; }
  std::size_t line() const { return line_; }
  /// True when the file parsed but its contents failed a factorization (e.g. not SPD).
  bool numerical() const { return numerical_; }

 private:
  static std::string format(const std::filesystem::path& file, std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << file.string();
    if (line > 0) os << ":" << line;
    os << ": " << what;
    return os.str();
  }

  std::filesystem::path file_;
  std::size_t line_;
  bool numerical_;
};

namespace detail {

inline std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

inline Matrix read_matrix_market(std::istream& in, const std::filesystem::path& name) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw LoadError(name, 0, "empty file");
  ++lineno;
  std::istringstream header(detail::lowercase(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix") throw LoadError(name, lineno, "missing %%MatrixMarket matrix banner");
  if (format != "array") throw LoadError(name, lineno, "only dense 'array' format is supported, got '" + format + "'");
  if (field != "real" && field != "double" && field != "integer")
    throw LoadError(name, lineno, "unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw LoadError(name, lineno, "unsupported symmetry '" + symmetry + "'");
  const bool symmetric = symmetry == "symmetric";

  long rows = -1, cols = -1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '%') continue;
    std::istringstream dims{std::string(t)};
    if (!(dims >> rows >> cols) || rows < 1 || cols < 1) throw LoadError(name, lineno, "invalid size line");
    std::string extra;
    if (dims >> extra) throw LoadError(name, lineno, "size line must contain exactly two integers");
    break;
  }
  if (rows < 1) throw LoadError(name, lineno, "missing size line");
  if (symmetric && rows != cols) throw LoadError(name, lineno, "symmetric matrix must be square");

  Matrix m = Matrix::Zero(rows, cols);
  // Column-major order; symmetric storage lists the lower triangle only.
  long r = 0, c = 0;
  auto advance = [&] {
    ++r;
    if (r == rows) {
      ++c;
      r = symmetric ? c : 0;
    }
  };
  const long expected = symmetric ? rows * (rows + 1) / 2 : rows * cols;
  long seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '%') continue;
    while (!t.empty()) {
      const auto end = t.find_first_of(" \t");
      const auto token = t.substr(0, end);
      if (seen == expected) throw LoadError(name, lineno, "more values than the declared size");
      double v = 0.0;
      const auto* first = token.data();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size())
        throw LoadError(name, lineno, "cannot parse value '" + std::string(token) + "'");
      if (!std::isfinite(v)) throw LoadError(name, lineno, "non-finite value");
      m(r, c) = v;
      if (symmetric) m(c, r) = v;
      advance();
      ++seen;
      t = end == std::string_view::npos ? std::string_view{} : detail::trim(t.substr(end));
    }
  }
  if (seen != expected) {
    std::ostringstream os;
    os << "expected " << expected << " values, found " << seen;
    throw LoadError(name, lineno, os.str());
  }
  return m;
}

inline Matrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, 0, "cannot open file");
  return read_matrix_market(in, path);
}

inline void write_matrix_market(std::ostream& out, const Matrix& m, std::string_view comment = {}) {
  out << "%%MatrixMarket matrix array real general\n";
  if (!comment.empty()) out << "% " << comment << "\n";
  out << m.rows() << " " << m.cols() << "\n";
  char buf[32];
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out << buf << "\n";
    }
  }
}

inline void write_matrix_market(const std::filesystem::path& path, const Matrix& m, std::string_view comment = {}) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  write_matrix_market(out, m, comment);
  if (!out) throw ValidationError("failed writing " + path.string());
}

}  // namespace bayesoed::io
