#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rdest/cli_io.hpp"

namespace rdest {
namespace {

namespace fs = std::filesystem;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "rdest");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rdest_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kSquare = std::string(RDEST_DATA_DIR) + "/meshes/square2.mesh";

TEST(Cli, VerifyOnTwoTriangleSquare) {
  const fs::path out = scratch("verify");
  const Invocation r = invoke({"verify", "--mesh", kSquare, "--kappa", "1", "--out", out.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(out / "verify.json"));
  EXPECT_TRUE(j["pass"].get<bool>());
  for (const auto& c : j["checks"]) {
    if (c["name"].get<std::string>().rfind("biorthogonality", 0) == 0) EXPECT_LT(c["measured"].get<double>(), 1e-11);
  }
}

TEST(Cli, MissingMeshExitsWithUsageCode) {
  const Invocation r = invoke({"solve", "--mesh", "/no/such/file.mesh", "--out", scratch("missing").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/no/such/file.mesh"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"adapt", "--theta-mark", "1.5", "--out", scratch("u1").string()}).code, 2);
  EXPECT_EQ(invoke({"solve", "--kappa", "-1", "--out", scratch("u2").string()}).code, 2);
  EXPECT_EQ(invoke({"solve", "--preset", "nope", "--out", scratch("u3").string()}).code, 2);
  EXPECT_EQ(invoke({"solve", "--quad-degree", "99", "--out", scratch("u4").string()}).code, 2);
  EXPECT_EQ(invoke({"solve", "--kappa", "abc"}).code, 2);
}

TEST(Cli, SolveWritesSolutionAndSummary) {
  const fs::path out = scratch("solve");
  const Invocation r = invoke({"solve", "--grid", "3", "--kappa", "2", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  // Criss-cross n x n: (n-1)^2 interior grid points plus n^2 cell centres.
  EXPECT_EQ(j["dofs"].get<int>(), 2 * 2 + 3 * 3);
  EXPECT_GT(j["true_error"].get<double>(), 0.0);
  EXPECT_EQ(slurp(out / "solution.csv").rfind("vertex_id,x,y,u\n", 0), 0u);
}

TEST(Cli, EstimateIsDeterministic) {
  const fs::path a = scratch("est_a");
  const fs::path b = scratch("est_b");
  ASSERT_EQ(invoke({"estimate", "--grid", "3", "--kappa", "100", "--out", a.string()}).code, 0);
  ASSERT_EQ(invoke({"estimate", "--grid", "3", "--kappa", "100", "--out", b.string()}).code, 0);
  const std::string csv = slurp(a / "indicators.csv");
  EXPECT_EQ(csv, slurp(b / "indicators.csv"));
  EXPECT_EQ(csv.rfind("vertex_id,x,y,E,osc,n_elements_in_star\n", 0), 0u);
  const auto j = nlohmann::json::parse(slurp(a / "summary.json"));
  for (const char* key : {"estimator", "oscillation", "true_error", "effectivity", "quad_degree", "theta_histogram"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Cli, StudyCsvHasOneTrajectoryPerKappa) {
  const fs::path out = scratch("study");
  const Invocation r = invoke({"study", "--preset", "sinsin", "--kappas", "1,100,10000", "--max-dof", "60", "--out",
                        out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(out / "study.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "kappa,iteration,dofs,estimator,oscillation,error,effectivity");
  std::set<std::string> kappas;
  while (std::getline(csv, line)) kappas.insert(line.substr(0, line.find(',')));
  EXPECT_EQ(kappas.size(), 3u);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path out = scratch("config");
  fs::create_directories(out);
  const fs::path cfg = out / "run.ini";
  std::ofstream(cfg) << "kappa=5\npreset=sinsin\ngrid=2\nmax-dof=40\n";
  const Invocation r = invoke({"adapt", "--config", cfg.string(), "--kappa", "7", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out / "run_report.csv");
  std::istringstream lines(csv);
  std::string header;
  std::string first;
  std::getline(lines, header);
  std::getline(lines, first);
  // Column 9 is kappa: the flag wins over the file.
  std::istringstream cells(first);
  std::string cell;
  for (int i = 0; i < 9; ++i) std::getline(cells, cell, ',');
  EXPECT_EQ(cell, "7");
  EXPECT_TRUE(fs::exists(out / "final.mesh"));
}

}  // namespace
}  // namespace rdest
