#include "snapseed/analyses.hpp"
#include "snapseed/snapshot.hpp"

#include <gtest/gtest.h>

using namespace snapseed;

namespace {

const std::string kCorpus = SNAPSEED_CORPUS;

struct Fixture {
  AppRegistry apps = AppRegistry::from_file(kCorpus + "/apps.json");
  Program program;
  SnapshotIndex index;

  explicit Fixture(const std::string &name, const std::string &config = "sys_default.json")
      : program(assemble_file(kCorpus + "/" + name + ".gasm")),
        index(SnapshotIndex::load(dump_snapshot(
            program, run_init(program, sys_config_from_file(kCorpus + "/configs/" + config), apps), apps))) {}

  ExploreOptions opts() const {
    ExploreOptions o;
    o.domains = registry_domains(apps);
    return o;
  }
};

std::set<std::string> statuses(const ExploreResult &r) {
  std::set<std::string> s;
  for (const auto &p : r.paths) s.insert(p.status);
  return s;
}

} // namespace

TEST(Telecom, BothLineNumberCallsNeedTheSamePermissions) {
  Fixture f("telecom");
  auto a = auto_driver(f.program, f.index, "getLine1Number");
  auto b = auto_driver(f.program, f.index, "getLine1NumberForDisplay");
  auto v = check_ispe(f.program, f.index, a, b, f.program.parse_locator("TelecomService.readLine1:sensitive"), f.opts(),
                      &f.apps);
  EXPECT_FALSE(v.inconsistent) << verdict_text(v);
  ASSERT_FALSE(v.first.paths.empty());
  const std::set<std::string> both{"android.permission.READ_PHONE_STATE", "android.permission.CALL_PHONE"};
  for (const auto &p : v.first.paths) EXPECT_EQ(p.perms.perms, both) << p.pc;
  for (const auto &p : v.second.paths) EXPECT_EQ(p.perms.perms, both) << p.pc;
}

TEST(Telecom, CallStateIsUnconditional) {
  Fixture f("telecom");
  auto r = explore(f.program, f.index, auto_driver(f.program, f.index, "getCallState"), f.opts());
  ASSERT_EQ(r.paths.size(), 1u);
  EXPECT_EQ(r.paths[0].pc.canonical(), "true");
}

TEST(Dispatch, UcseForksOverEveryShape) {
  Fixture f("dispatch");
  auto d = auto_driver(f.program, f.index, "measure");
  auto o = f.opts();
  o.budget.max_states = 400;
  auto seeded = explore(f.program, f.index, d, o);
  EXPECT_FALSE(seeded.metrics.budget_exhausted);
  EXPECT_EQ(seeded.metrics.dispatch_forks, 0u);
  o.mode = ExploreMode::Ucse;
  auto ucse = explore(f.program, f.index, d, o);
  EXPECT_GE(ucse.metrics.max_dispatch_arms, 5u);
  EXPECT_TRUE(ucse.metrics.budget_exhausted);
  EXPECT_LE(seeded.metrics.states, ucse.metrics.states);
}

TEST(Wifi, HandlerAndStateMachinePathsComplete) {
  Fixture f("wifi");
  auto r = explore(f.program, f.index, auto_driver(f.program, f.index, "setWifiEnabled"), f.opts());
  EXPECT_FALSE(r.metrics.budget_exhausted);
  EXPECT_EQ(statuses(r), std::set<std::string>{"returned"});
  EXPECT_GE(r.paths.size(), 2u);
}

TEST(Wifi, ScanNeedsFineLocation) {
  Fixture f("wifi");
  auto r = explore(f.program, f.index, auto_driver(f.program, f.index, "startScan"), f.opts());
  bool denied = false, allowed = false;
  for (const auto &p : r.paths) {
    ASSERT_TRUE(p.ret);
    if ((*p.ret)->op == ExprOp::IntConst && (*p.ret)->value == -1) denied = true;
    else allowed = true;
  }
  EXPECT_TRUE(denied);
  EXPECT_TRUE(allowed);
}

TEST(TaskManager, CalendarAffinityJoinsTheCalendarTask) {
  Fixture f("task_manager");
  auto d = load_driver_file(kCorpus + "/drivers/task_start_activity.json", f.program);
  auto paths = check_property(f.program, f.index, d, parse_property("ret == 101"), f.opts());
  ASSERT_FALSE(paths.empty());
  for (const auto &p : paths) {
    bool affinity = false;
    for (const auto &v : p.vars) affinity |= v.label == "ActivityInfo.taskAffinity" || v.label == "ActivityInfo.packageName";
    EXPECT_TRUE(affinity) << p.pc.canonical();
  }
  auto none = check_property(f.program, f.index, d, parse_property("ret == 100"), f.opts());
  for (const auto &p : none) EXPECT_NE(p.status, "guest-trap");
}

TEST(TaskManager, ManifestsRoundTripThroughJson) {
  Fixture f("task_manager");
  auto d = load_driver_file(kCorpus + "/drivers/task_start_activity.json", f.program);
  auto paths = check_property(f.program, f.index, d, parse_property("ret == 101"), f.opts());
  auto ms = emit_exploits(paths, d, f.apps);
  ASSERT_FALSE(ms.empty());
  for (const auto &m : ms) {
    auto back = manifest_from_json(to_json(m));
    EXPECT_EQ(to_json(back), to_json(m));
    EXPECT_EQ(m.legality, m.violations.empty());
  }
}

TEST(TaintLab, OnlyIdentityKeyedReadsAreInputs) {
  Fixture f("taint_lab");
  const std::set<std::string> keyed{"readOwnEntry", "readByUid",  "readByPackage", "readConfig",
                                    "readQuota",    "readSlot",   "readMixed"};
  for (const auto &m : f.program.interface_methods()) {
    auto r = explore(f.program, f.index, auto_driver(f.program, f.index, m), f.opts());
    std::size_t entries = 0;
    for (const auto &p : r.paths) entries += p.inventory.size();
    const auto name = m.substr(m.rfind('.') + 1);
    if (keyed.count(name)) EXPECT_GT(entries, 0u) << m;
    else EXPECT_EQ(entries, 0u) << m;
  }
}

TEST(Variants, ConfigChangesTheSnapshotButNotTheConditions) {
  Fixture a("wifi"), b("wifi", "sys_variant3.json");
  EXPECT_NE(a.index.fingerprint(), b.index.fingerprint());
  auto d = auto_driver(a.program, a.index, "getChannelCount");
  auto rep = snapshot_consistency(a.program, {&a.index, &b.index}, d, a.opts());
  EXPECT_TRUE(rep.equal) << consistency_text(rep);
}
