#include <gtest/gtest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const std::string kCorpus = SNAPSEED_CORPUS;
const std::string kCli = SNAPSEED_CLI;
const std::string kHost = SNAPSEED_EXTERN_HOST;

struct Run {
  int code = -1;
  std::string out;
};

// `prefix` goes before the binary: environment assignments or a pipe.
Run run(const std::string &args, const std::string &prefix = "") {
  std::string cmd = prefix + (prefix.empty() ? "" : " ") + kCli + " " + args + " 2>/dev/null";
  Run r;
  FILE *p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
protected:
  static inline fs::path dir;

  static void SetUpTestSuite() {
    dir = fs::path(SNAPSEED_TMP) / "cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (std::string name : {"location_service", "task_manager"}) {
      auto r = run("init --prog " + prog(name) + " --apps " + apps() + " --config " + kCorpus +
                   "/configs/sys_default.json --out " + snap(name));
      ASSERT_EQ(r.code, 0) << name;
    }
  }

  static std::string prog(const std::string &n) { return kCorpus + "/" + n + ".gasm"; }
  static std::string apps() { return kCorpus + "/apps.json"; }
  static std::string snap(const std::string &n) { return (dir / (n + ".snap.json")).string(); }
  static std::string common(const std::string &n) {
    return "--prog " + prog(n) + " --snap " + snap(n) + " --apps " + apps();
  }
};

} // namespace

TEST_F(Cli, MissingFileIsAnError) {
  EXPECT_EQ(run("asm " + (dir / "nope.gasm").string()).code, 2);
  EXPECT_EQ(run("explore " + common("location_service") + " --ep noSuchMethod").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, SyntaxErrorExitsTwo) {
  auto bad = dir / "bad.gasm";
  std::ofstream(bad) << "entry A.main\nclass A\n  method main() static\n    bogus\n";
  EXPECT_EQ(run("asm " + bad.string()).code, 2);
}

TEST_F(Cli, InitIsDeterministic) {
  auto again = dir / "again.snap.json";
  ASSERT_EQ(run("init --prog " + prog("location_service") + " --apps " + apps() + " --config " + kCorpus +
                "/configs/sys_default.json --out " + again.string())
                .code,
            0);
  EXPECT_EQ(slurp(again), slurp(snap("location_service")));
}

TEST_F(Cli, ExploreRerunsAreByteIdentical) {
  auto args = "explore " + common("location_service") + " --ep getProviders --format structured";
  auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(run(args + " --seed 7").out, run(args, "SNAPSEED_SEED=7").out);
  auto doc = nlohmann::json::parse(a.out);
  EXPECT_FALSE(doc["paths"].empty());
}

TEST_F(Cli, InconsistentVerdictExitsOne) {
  auto r = run("ispe " + common("location_service") +
               " --ep1 getAllProviders --ep2 getProviders --target LocationService.collectProviderNames:sensitive");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("inconsistent"), std::string::npos) << r.out;
  auto same = run("ispe " + common("location_service") +
                  " --ep1 getProviders --ep2 getProviders --target LocationService.collectProviderNames:sensitive");
  EXPECT_EQ(same.code, 0);
}

TEST_F(Cli, EmittedManifestsReplayOnTheirOwn) {
  auto drv = kCorpus + "/drivers/task_start_activity.json";
  EXPECT_EQ(run("prop-check " + common("task_manager") + " --driver " + drv + " --property 'ret == 101'").code, 1);
  EXPECT_EQ(run("prop-check " + common("task_manager") + " --driver " + drv + " --property false").code, 0);
  auto out = dir / "manifests.json";
  ASSERT_EQ(run("emit-exploits " + common("task_manager") + " --driver " + drv +
                " --property 'ret == 101' --format structured --out " + out.string())
                .code,
            0);
  auto ms = nlohmann::json::parse(slurp(out));
  ASSERT_FALSE(ms.empty());
  nlohmann::json legal = nlohmann::json::array();
  for (const auto &m : ms)
    if (m["legality"].get<bool>()) legal.push_back(m);
  ASSERT_FALSE(legal.empty());
  auto legal_file = dir / "legal.json";
  std::ofstream(legal_file) << legal.dump();
  auto r = run("replay --manifest " + legal_file.string() + " --format structured");
  ASSERT_EQ(r.code, 0) << r.out;
  for (const auto &e : nlohmann::json::parse(r.out)) {
    EXPECT_TRUE(e["trace-match"].get<bool>());
    EXPECT_EQ(e["ret"], "101");
  }
}

TEST_F(Cli, SnapshotDiffAgainstItselfIsClean) {
  auto r = run("snap-diff --prog " + prog("location_service") + " --snap " + snap("location_service") + " --snap " +
               snap("location_service") + " --apps " + apps() + " --ep getProviders");
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, CompareUcseIsReproducibleWithoutTimings) {
  auto args = "compare-ucse " + common("location_service") + " --ep getAllProviders --states 200 --format structured";
  auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, DelegatedExternNeedsAHost) {
  auto base = "explore " + common("location_service") + " --ep getMaxProviders --format structured";
  EXPECT_EQ(run(base).code, 2);
  auto r = run(base + " --extern-host '" + kHost + " " + kCorpus + "/host_table.json'");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"ret\": \"4\""), std::string::npos) << r.out;
}

TEST_F(Cli, QueryAnswersTheHeader) {
  auto r = run("query --snap " + snap("location_service"), "echo '{\"op\":\"header\"}' |");
  ASSERT_EQ(r.code, 0);
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["skeleton_uid"], 10054);
}
