#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" HILBEXT_CLI "\" " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

class Cli : public ::testing::Test {
protected:
  fs::path dir = fs::path(HILBEXT_TEST_TMP) / "cli";

  void SetUp() override { fs::create_directories(dir); }

  std::string path(const std::string& name) const { return "\"" + (dir / name).string() + "\""; }

  fs::path build(const std::string& name, const std::string& args) {
    const auto out = dir / name;
    const auto r = run("build " + args + " -o \"" + out.string() + "\"");
    EXPECT_EQ(r.code, 0) << args;
    return out;
  }
};

TEST_F(Cli, ClassifiesWindingExample) {
  build("w3.json", "disk-wk --k 3");
  const auto r = run("classify " + path("w3.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["type"], "extension");
  EXPECT_EQ(j["invariant"]["kind"], "finite");
  EXPECT_EQ(j["invariant"]["windings"], json::array({3}));
  EXPECT_EQ(j["levels"].size(), 3u);
  for (const auto& level : j["levels"]) EXPECT_EQ(level["invariant"]["windings"], json::array({3}));
  EXPECT_FALSE(j.contains("wall_time_s"));
}

TEST_F(Cli, ClassifiesSplitExample) {
  build("split.json", "split");
  const auto r = run("classify " + path("split.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["invariant"]["windings"], json::array({0}));
}

TEST_F(Cli, ClassifiesOperators) {
  build("shift.json", "operator --symbol-power 1");
  auto r = run("classify " + path("shift.json"));
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["type"], "operator");
  EXPECT_EQ(j["index"], -1);
  EXPECT_EQ(j["symbol_winding"], 1);

  build("perturbed.json", "operator --symbol-power 3 --perturb-rank 2 --perturb-dim 5 --seed 7");
  r = run("classify " + path("perturbed.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["index"], -3);

  build("infinite.json", "operator --symbol-power 2 --defect infinite");
  r = run("classify " + path("infinite.json"));
  ASSERT_EQ(r.code, 0);
  j = json::parse(r.out);
  EXPECT_EQ(j["invariant"]["kind"], "infinite");
  EXPECT_FALSE(j.contains("index"));
}

TEST_F(Cli, WritesPerLevelCsv) {
  build("w2.json", "disk-wk --k=-2 --angular 32");
  const auto csv = dir / "w2.csv";
  const auto r = run("classify " + path("w2.json") + " --tower-depth 4 --csv \"" + csv.string() + "\"");
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(slurp(csv));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "level,radius,cycle,winding");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "-2");
  }
  EXPECT_EQ(rows, 4);
}

TEST_F(Cli, OutputIsDeterministic) {
  build("det.json", "disk-wk --k 1");
  const auto a = run("classify " + path("det.json"));
  const auto b = run("classify " + path("det.json"));
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto va = run("verify " + path("det.json") + " --suite all --trials 10 --seed 3");
  const auto vb = run("verify " + path("det.json") + " --suite all --trials 10 --seed 3");
  ASSERT_EQ(va.code, 0);
  EXPECT_EQ(va.out, vb.out);
  build("det2.json", "disk-wk --k 1");
  EXPECT_EQ(slurp(dir / "det.json"), slurp(dir / "det2.json"));
}

TEST_F(Cli, VerifySuitesPass) {
  build("v.json", "disk-wk --k 2");
  const auto r = run("verify " + path("v.json") + " --suite all --trials 20");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  std::set<std::string> names;
  for (const auto& c : j["checks"]) {
    names.insert(c["name"].get<std::string>());
    EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
  }
  for (const char* n : {"inclusion_morphism", "busby_morphism", "quotient_morphism", "isometry_roundtrip", "exactness",
                        "fullness"})
    EXPECT_TRUE(names.count(n)) << n;

  build("op.json", "operator --symbol-power 2");
  const auto op = run("verify " + path("op.json") + " --trials 10");
  ASSERT_EQ(op.code, 0) << op.out;
  EXPECT_TRUE(json::parse(op.out)["passed"].get<bool>());
}

TEST_F(Cli, CorruptedStoredBusbyFieldFailsWithCounterexample) {
  const auto file = build("stored.json", "disk-wk --k 1 --embed-busby");
  ASSERT_EQ(run("verify " + path("stored.json") + " --suite morphism").code, 0);
  auto doc = json::parse(slurp(file));
  doc["busby"]["values"]["5"] = json::parse("[[[1.5, 0.0]]]");
  spit(dir / "corrupt.json", doc.dump());
  const auto r = run("verify " + path("corrupt.json") + " --suite morphism");
  EXPECT_EQ(r.code, 1);
  const auto j = json::parse(r.out);
  EXPECT_FALSE(j["passed"].get<bool>());
  bool found = false;
  for (const auto& c : j["checks"])
    if (c["name"] == "stored_busby_morphism") {
      found = true;
      EXPECT_FALSE(c["passed"].get<bool>());
      EXPECT_EQ(c["counterexample"]["vertex"], 5);
    }
  EXPECT_TRUE(found);
}

TEST_F(Cli, UndersampledSymbolIsAnInvariantError) {
  spit(dir / "coarse.json", R"({"type":"operator","symbol":[[1,0],[-1,0]],"infinite_defect":false})");
  EXPECT_EQ(run("classify " + path("coarse.json")).code, 2);
  EXPECT_EQ(run("build disk-wk --k 7 --angular 8 --radial 2").code, 2);
}

TEST_F(Cli, InputErrors) {
  EXPECT_EQ(run("classify " + path("missing.json")).code, 3);
  spit(dir / "garbage.json", "{not json");
  EXPECT_EQ(run("classify " + path("garbage.json")).code, 3);
  spit(dir / "unknown.json", R"({"type":"banana"})");
  EXPECT_EQ(run("classify " + path("unknown.json")).code, 3);
  EXPECT_EQ(run("frobnicate").code, 3);
  EXPECT_EQ(run("build disk-wk --angular 2").code, 3);
}

TEST_F(Cli, ToleranceFromEnvironment) {
  build("tol.json", "disk-wk --k 1");
  const auto r = run("classify " + path("tol.json"), "HILBMOD_TOL=1e-7");
  ASSERT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(json::parse(r.out)["tolerances"]["algebraic"].get<double>(), 1e-7);
  EXPECT_EQ(run("classify " + path("tol.json"), "HILBMOD_TOL=abc").code, 3);
}

TEST_F(Cli, PrettyAndTimingOptions) {
  build("p.json", "disk-wk --k 1");
  const auto pretty = run("classify " + path("p.json") + " --pretty");
  ASSERT_EQ(pretty.code, 0);
  EXPECT_NE(pretty.out.find("invariant"), std::string::npos);
  const auto timed = run("classify " + path("p.json") + " --timing");
  ASSERT_EQ(timed.code, 0);
  EXPECT_GE(json::parse(timed.out)["wall_time_s"].get<double>(), 0.0);
}
