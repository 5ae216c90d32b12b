#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "frolov/frolov.hpp"

using namespace frolov;
namespace fs = std::filesystem;

namespace {

std::string slurp(fs::path const& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(std::string const& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

/// Runs each test inside its own scratch directory (manifests land in cwd).
class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    old_ = fs::current_path();
    dir_ = fs::temp_directory_path() /
           ("frolov_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    fs::current_path(dir_);
  }
  void TearDown() override {
    fs::current_path(old_);
    fs::remove_all(dir_);
  }

  int run(std::vector<std::string> const& args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  fs::path old_, dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST(Io, NumberFormat) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(256), "256");
  EXPECT_EQ(format_number(infinity), "inf");
  for (double x : {1.0 / 3, 2.0 / 7 * 1e-300, 6.02214076e23, -0.0})
    EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Io, CsvRows) {
  std::ostringstream s;
  csv_writer csv(s, {"a", "b", "c"});
  csv.row(1, 0.5, std::string("x"));
  EXPECT_EQ(s.str(), "a,b,c\n1,0.5,x\n");
  EXPECT_THROW(csv.row(1, 2), domain_error);
}

TEST(Io, LatticeJsonRoundTrip) {
  for (auto [d, kind] : {std::pair{2u, generator_kind::standard}, {3u, generator_kind::standard},
                         {5u, generator_kind::standard}, {4u, generator_kind::chebyshev}}) {
    auto const poly = build_polynomial({d, kind, {}});
    auto const lat = assemble_lattice(poly, 4096);
    auto const text = lattice_json(poly, lat).dump();
    auto const back = lattice_from_json(json::parse(text));
    EXPECT_EQ(back.primal_basis.dim(), d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        EXPECT_EQ(back.primal_basis(i, j), lat.primal_basis(i, j));
        EXPECT_EQ(back.dual_basis(i, j), lat.dual_basis(i, j));
      }
    auto const res = check_lattice(back);
    EXPECT_LE(res.primal_det, 1e-10);
    EXPECT_LE(res.dual_det, 1e-10);
    EXPECT_LE(res.biorthogonality, 1e-10);
  }
}

TEST_F(Cli, GenJson) {
  ASSERT_EQ(run({"gen", "--dim", "2", "--kind", "standard", "--n", "1024", "--emit", "json"}), 0);
  auto const j = json::parse(out_.str());
  EXPECT_EQ(j["coefficients"], json({"2", "-4", "1"}));
  EXPECT_NEAR(j["roots"][0]["value"].get<double>(), 2 - std::numbers::sqrt2, 1e-12);
  EXPECT_NEAR(j["roots"][1]["value"].get<double>(), 2 + std::numbers::sqrt2, 1e-12);
  EXPECT_NEAR(j["det_T_tilde"].get<double>(), 2 * std::numbers::sqrt2, 1e-12);
  EXPECT_EQ(j["T_n"].size(), 2u);
  EXPECT_TRUE(fs::exists("manifest.json"));
  ASSERT_EQ(run({"gen", "--dim", "4", "--kind", "chebyshev"}), 0);
  EXPECT_TRUE(json::parse(out_.str()).contains("root_convention"));
}

TEST_F(Cli, PointsScalar) {
  ASSERT_EQ(run({"points", "--dim", "1", "--kind", "standard", "--n", "5"}), 0);
  auto const l = lines(out_.str());
  ASSERT_EQ(l.size(), 6u);
  EXPECT_EQ(l[0], "l_1,x_1");
  EXPECT_EQ(l[2], "1,0.20000000000000001");
  EXPECT_EQ(out_.str().find('\r'), std::string::npos);
}

TEST_F(Cli, PointsStreamSameRows) {
  ASSERT_EQ(run({"points", "--dim", "2", "--n", "500", "--out", "sorted.csv"}), 0);
  ASSERT_EQ(run({"points", "--dim", "2", "--n", "500", "--stream", "--out", "streamed.csv"}), 0);
  auto a = lines(slurp("sorted.csv")), b = lines(slurp("streamed.csv"));
  EXPECT_EQ(a.front(), b.front());
  std::sort(a.begin() + 1, a.end());
  std::sort(b.begin() + 1, b.end());
  EXPECT_EQ(a, b);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run({"gen", "--dim", "2", "--bogus"}), 1);
  EXPECT_FALSE(err_.str().empty());
  EXPECT_EQ(run({"nosuch"}), 1);
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"gen", "--dim", "3", "--kind", "chebyshev"}), 1);
  EXPECT_EQ(run({"study", "--dim", "2", "--fn", "nosuch", "--nmin", "256", "--nmax", "1024"}), 1);
  EXPECT_EQ(run({"points", "--dim", "2", "--n", "1e9", "--budget", "1000"}), 2);
  EXPECT_EQ(run({"fool", "--dim", "2", "--s", "0.5", "--p", "0.5", "--variant", "g3"}), 1);
  EXPECT_EQ(run({"dual", "--dim", "2", "--n", "1024", "--radius", "1", "--mmax", "0"}), 1);
}

TEST_F(Cli, HelpPerSubcommand) {
  for (std::string sub : {"gen", "points", "dual", "fns", "study", "fool", "replay"}) {
    EXPECT_EQ(run({sub, "--help"}), 0) << sub;
    EXPECT_NE(out_.str().find("Usage"), std::string::npos) << sub;
  }
}

TEST_F(Cli, FunctionList) {
  ASSERT_EQ(run({"fns", "--list"}), 0);
  for (auto const& name : list_functions()) EXPECT_NE(out_.str().find(name), std::string::npos);
}

TEST_F(Cli, DualReport) {
  ASSERT_EQ(run({"dual", "--dim", "2", "--n", "1024", "--mmax", "12", "--out", "report.json"}), 0);
  auto const j = read_json_file("report.json");
  ASSERT_TRUE(j["z_counts"].is_array());
  EXPECT_EQ(j["z_counts"].size(), 91u);  // |m|_1 <= 12 in N_0^2
  EXPECT_TRUE(j["z_counts"][0].contains("m"));
  EXPECT_TRUE(j["z_counts"][0].contains("count"));
  EXPECT_GE(j["min_norm_product"].get<double>(), j["norm_product_bound"].get<double>() * (1 - 1e-8));
  EXPECT_DOUBLE_EQ(j["fitted_c"].get<double>(), 2.0);
}

TEST_F(Cli, StudyAndReplayAreByteIdentical) {
  fs::create_directories("a");
  fs::create_directories("b");
  ASSERT_EQ(run({"study", "--dim", "2", "--fn", "hat", "--nmin", "256", "--nmax", "16384", "--ratio", "2", "--out",
                 "a/study.csv"}),
            0);
  auto const csv = lines(slurp("a/study.csv"));
  EXPECT_EQ(csv.front(), "n,count,value,reference,abs_error");
  EXPECT_EQ(csv.size(), 8u);
  auto const fit = read_json_file("a/study.fit.json");
  EXPECT_EQ(fit["predicted"]["main_rate"].get<double>(), 2.0);
  EXPECT_TRUE(fit["fitted"].is_object());
  auto const manifest = read_json_file("a/manifest.json");
  EXPECT_EQ(manifest["version"], std::string(library_version));
  EXPECT_TRUE(manifest["policies"].contains("membership"));
  EXPECT_TRUE(manifest["policies"].contains("ordering"));

  ASSERT_EQ(run({"replay", "--manifest", "a/manifest.json", "--out", "b/study.csv"}), 0);
  EXPECT_EQ(slurp("a/study.csv"), slurp("b/study.csv"));
  EXPECT_EQ(slurp("a/study.fit.json"), slurp("b/study.fit.json"));
}

TEST_F(Cli, PointsReplayIsByteIdentical) {
  fs::create_directories("a");
  fs::create_directories("b");
  ASSERT_EQ(run({"--threads", "3", "points", "--dim", "3", "--n", "3000", "--out", "a/p.csv"}), 0);
  ASSERT_EQ(run({"replay", "--manifest", "a/manifest.json", "--out", "b/p.csv"}), 0);
  EXPECT_EQ(slurp("a/p.csv"), slurp("b/p.csv"));
}

TEST_F(Cli, FoolingCsv) {
  ASSERT_EQ(run({"fool", "--dim", "2", "--s", "2", "--p", "1", "--theta", "inf", "--scale", "B", "--variant", "g1",
                 "--nmin", "64", "--nmax", "1024", "--out", "fool.csv"}),
            0);
  auto const rows = lines(slurp("fool.csv"));
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream r(rows[i]);
    std::vector<std::string> cells;
    for (std::string c; std::getline(r, c, ',');) cells.push_back(c);
    EXPECT_EQ(cells[4], "0");
  }
  EXPECT_EQ(read_json_file("fool.fit.json")["all_quadratures_zero"], true);
  ASSERT_EQ(run({"replay", "--manifest", "manifest.json", "--out", "again.csv"}), 0);
  EXPECT_EQ(slurp("fool.csv"), slurp("again.csv"));
}
