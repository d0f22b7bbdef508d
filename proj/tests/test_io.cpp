#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "bayesoed/io/generate.hpp"
#include "bayesoed/io/matrix_market.hpp"
#include "bayesoed/io/problem_io.hpp"
#include "bayesoed/io/report.hpp"
#include "test_support.hpp"

namespace bayesoed::io {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("bayesoed_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

Matrix read_string(const std::string& text) {
  std::istringstream in(text);
  return read_matrix_market(in, "inline.mtx");
}

TEST(MatrixMarket, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> exponent(-300.0, 300.0);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m(1 + trial % 5, 1 + trial % 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng) * std::pow(10.0, exponent(rng));
    m(0, 0) = std::numeric_limits<double>::denorm_min();
    std::ostringstream os;
    write_matrix_market(os, m, "round trip");
    const Matrix back = read_string(os.str());
    ASSERT_EQ(back.rows(), m.rows());
    ASSERT_EQ(back.cols(), m.cols());
    for (Eigen::Index i = 0; i < m.size(); ++i) EXPECT_EQ(back.data()[i], m.data()[i]);
  }
}

TEST(MatrixMarket, ColumnMajorAndSymmetricStorage) {
  const Matrix m = read_string("%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n2\n3\n4\n");
  EXPECT_EQ(m(1, 0), 2.0);
  EXPECT_EQ(m(0, 1), 3.0);
  const Matrix s = read_string("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n4\n");
  EXPECT_EQ(s(0, 1), 2.0);
  EXPECT_EQ(s(1, 0), 2.0);
  EXPECT_EQ(s(1, 1), 4.0);
}

TEST(MatrixMarket, ErrorsCarryLocation) {
  EXPECT_THROW(read_string(""), LoadError);
  EXPECT_THROW(read_string("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n"), LoadError);
  EXPECT_THROW(read_string("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n"), LoadError);
  EXPECT_THROW(read_string("%%MatrixMarket matrix array real general\n1 1\n1\n2\n"), LoadError);
  try {
    read_string("%%MatrixMarket matrix array real general\n2 1\n1.5\nabc\n");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("inline.mtx:4"), std::string::npos);
  }
  EXPECT_THROW(read_matrix_market("/nonexistent/file.mtx"), LoadError);
}

void write_scalar_problem(const fs::path& dir, double prior_var) {
  const std::string one = "%%MatrixMarket matrix array real general\n1 1\n1\n";
  write_file(dir / "F.mtx", one);
  write_file(dir / "noise.mtx", one);
  write_file(dir / "prior.mtx",
             "%%MatrixMarket matrix array real general\n1 1\n" + std::to_string(prior_var) + "\n");
  write_file(dir / "scalar.json", R"({"kind": "problem", "name": "scalar", "n": 1, "q": 1,
    "forward": "F.mtx", "noise_cov": "noise.mtx", "prior_cov": "prior.mtx"})");
}

TEST(LoadProblem, ScalarDescriptor) {
  TempDir dir;
  write_scalar_problem(dir.path(), 1.0);
  const auto lp = load_problem(dir.path() / "scalar.json");
  EXPECT_FALSE(lp.is_pool());
  EXPECT_EQ(lp.descriptor.name, "scalar");
  EXPECT_NEAR(eig_logdet_form(lp.problem()), 0.5 * std::log(2.0), 1e-15);
}

TEST(LoadProblem, NonSpdPriorNamesFile) {
  TempDir dir;
  write_scalar_problem(dir.path(), 1.0);
  write_file(dir.path() / "prior.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n-1\n");
  write_file(dir.path() / "bad.json", R"({"kind": "problem", "n": 2, "q": 1,
    "forward": "F2.mtx", "noise_cov": "noise.mtx", "prior_cov": "prior.mtx"})");
  write_file(dir.path() / "F2.mtx", "%%MatrixMarket matrix array real general\n1 2\n1\n1\n");
  try {
    load_problem(dir.path() / "bad.json");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.file().filename(), "prior.mtx");
    EXPECT_TRUE(e.numerical());
  }
}

TEST(LoadProblem, ValidationErrors) {
  TempDir dir;
  write_scalar_problem(dir.path(), 1.0);
  write_file(dir.path() / "missing.json", R"({"kind": "problem", "n": 1, "q": 1,
    "forward": "nope.mtx", "noise_cov": "noise.mtx", "prior_cov": "prior.mtx"})");
  EXPECT_THROW(load_problem(dir.path() / "missing.json"), LoadError);
  write_file(dir.path() / "dims.json", R"({"kind": "problem", "n": 2, "q": 1,
    "forward": "F.mtx", "noise_cov": "noise.mtx", "prior_cov": "prior.mtx"})");
  EXPECT_THROW(load_problem(dir.path() / "dims.json"), LoadError);
  write_file(dir.path() / "syntax.json", "{\"kind\": ");
  EXPECT_THROW(load_problem(dir.path() / "syntax.json"), LoadError);
  write_file(dir.path() / "kind.json", R"({"kind": "other", "n": 1, "q": 1})");
  EXPECT_THROW(load_problem(dir.path() / "kind.json"), LoadError);
  EXPECT_THROW(load_problem(dir.path() / "absent.json"), LoadError);
}

TEST(SaveLoad, GeneratedProblemRoundTrip) {
  TempDir dir;
  for (auto kind : {GeneratorKind::kRandom, GeneratorKind::kDeconvolution1d}) {
    GenerateParams gp;
    gp.kind = kind;
    gp.n = 7;
    gp.q = 5;
    gp.seed = 3;
    const auto pool = generate(gp);
    const auto full = restrict(pool, Design::all(pool.size()));

    const auto as_pool = load_problem(save_pool(dir.path(), "pool", pool));
    ASSERT_TRUE(as_pool.is_pool());
    const auto& reloaded = std::get<CandidatePool>(as_pool.value);
    EXPECT_EQ(reloaded.rows(), pool.rows());
    EXPECT_EQ(reloaded.noise_variances(), pool.noise_variances());
    EXPECT_EQ(reloaded.prior().cov().matrix(), pool.prior().cov().matrix());
    EXPECT_EQ(reloaded.labels(), pool.labels());
    EXPECT_NEAR(eig_logdet_form(as_pool.problem()), eig_logdet_form(full), 1e-12);

    const auto as_problem = load_problem(save_problem(dir.path(), "problem", full));
    EXPECT_EQ(as_problem.problem().f(), full.f());
    EXPECT_EQ(as_problem.problem().noise_cov().matrix(), full.noise_cov().matrix());
    EXPECT_NEAR(eig_logdet_form(as_problem.problem()), eig_logdet_form(full), 1e-12);
  }
}

TEST(SaveLoad, NonzeroPriorMeanPreserved) {
  TempDir dir;
  testing::Rng rng(4);
  const auto p = testing::random_problem(rng, 3, 2, /*centered=*/false);
  const auto back = load_problem(save_problem(dir.path(), "shifted", p)).problem();
  EXPECT_EQ(back.prior().mean(), p.prior().mean());
}

TEST(Generate, ScalarRandomAndValidation) {
  GenerateParams gp;
  gp.n = 1;
  gp.q = 1;
  const auto pool = generate(gp);
  EXPECT_EQ(pool.size(), 1u);
  EXPECT_EQ(pool.noise_variances()(0), 1.0);
  EXPECT_GT(eig_logdet_form(restrict(pool, Design::all(1))), 0.0);

  gp.n = 0;
  EXPECT_THROW(generate(gp), ValidationError);
  gp.n = 3;
  gp.kind = GeneratorKind::kDeconvolution1d;
  gp.kernel_width = 0.0;
  EXPECT_THROW(generate(gp), ValidationError);
  EXPECT_THROW(parse_generator_kind("sparse"), ValidationError);
}

TEST(Generate, DuplicateStationsGiveIdenticalRows) {
  GenerateParams gp;
  gp.kind = GeneratorKind::kDeconvolution1d;
  gp.n = 20;
  gp.q = 3;
  gp.stations = {0.3, 0.3, 0.7};
  const auto pool = generate(gp);
  EXPECT_EQ(pool.rows().row(0), pool.rows().row(1));
  EXPECT_NE(pool.rows().row(0), pool.rows().row(2));
  const auto g = greedy(pool, 2);
  EXPECT_FALSE(g.design.selected(0) && g.design.selected(1));
}

TEST(Generate, DeterministicInSeed) {
  GenerateParams gp;
  gp.seed = 9;
  EXPECT_EQ(generate(gp).rows(), generate(gp).rows());
  GenerateParams other = gp;
  other.seed = 10;
  EXPECT_NE(generate(gp).rows(), generate(other).rows());
}

TEST(Report, JsonRoundTrip) {
  Report r;
  r.command = "design greedy";
  r.problem = {"p", "pool", 4, 6};
  r.seed = 7;
  r.eig = EigReport{0.1 + 0.2, 0.30000000000000004, 0.29, 0.01, 1000};
  r.design = DesignSummary{"greedy", 2, {1, 4}, {"a", "b"}, 1.0 / 3.0,
                           {{1, 4, std::nullopt, 0.25}, {2, 1, std::nullopt, 1.0 / 3.0}}};
  r.spectrum = SpectrumSummary{{3.0, 1.0 / 7.0}, 2, 0.7, 0.0, false};
  r.posterior = PosteriorSummary{{2.0}, {1.0}, {0.5}};
  r.checks = {{"identity", 1.0, 1.0, 1e-10, true}};
  r.timings_ms["total"] = 12.5;
  const auto text = to_json(r).dump();
  const Report back = report_from_json(nlohmann::json::parse(text));
  EXPECT_TRUE(back == r);
  EXPECT_EQ(to_json(back).dump(), text);
  EXPECT_FALSE(to_json(r, false).contains("timings_ms"));
}

TEST(Report, RejectsNonFinite) {
  Report r;
  r.eig = EigReport{std::numeric_limits<double>::quiet_NaN(), 0.0, {}, {}, {}};
  EXPECT_THROW(to_json(r), NumericalError);
}

}  // namespace
}  // namespace bayesoed::io
