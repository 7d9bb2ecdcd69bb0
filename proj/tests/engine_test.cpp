#include "snapseed/engine.hpp"
#include "snapseed/snapshot.hpp"

#include <gtest/gtest.h>

using namespace snapseed;

namespace {

const std::string kCorpus = SNAPSEED_CORPUS;

class Location : public ::testing::Test {
protected:
  Program program = assemble_file(kCorpus + "/location_service.gasm");
  AppRegistry apps = AppRegistry::from_file(kCorpus + "/apps.json");
  SnapshotIndex index = SnapshotIndex::load(
      dump_snapshot(program, run_init(program, sys_config_from_file(kCorpus + "/configs/sys_default.json"), apps), apps));
};

bool mentions(const PathReport &r, const std::string &needle) {
  for (const auto &c : r.pc.readable())
    if (c.find(needle) != std::string::npos) return true;
  return false;
}

} // namespace

TEST(Taint, UidSurvivesModAndSub) {
  auto uid = std::make_shared<TaintLabel>(TaintLabel{true, false, "10054"});
  auto a = propagate_taint(Opcode::Mod, uid, nullptr, 100000, 10054);
  ASSERT_TRUE(a);
  auto b = propagate_taint(Opcode::Sub, a, nullptr, 10000, 54);
  ASSERT_TRUE(b);
  EXPECT_EQ(b->derivation, "10054 -> mod 100000 -> 10054 -> -10000 -> 54");
  EXPECT_FALSE(propagate_taint(Opcode::Add, uid, nullptr, 1, 10055));
  EXPECT_FALSE(propagate_taint(Opcode::Mul, uid, nullptr, 2, 20108));
  EXPECT_FALSE(propagate_taint(Opcode::Sub, nullptr, nullptr, 1, 0));
}

TEST_F(Location, UncheckedEntrypointHasOneTruePath) {
  auto d = auto_driver(program, index, "getAllProviders");
  auto r = explore(program, index, d, {});
  ASSERT_EQ(r.paths.size(), 1u);
  EXPECT_EQ(r.paths[0].status, "returned");
  EXPECT_EQ(r.paths[0].pc.canonical(), "true");
  EXPECT_EQ(r.paths[0].ret_text, R"(["gps", "network", "passive", "fused"])");
  EXPECT_TRUE(r.paths[0].inventory.empty());
}

TEST_F(Location, CheckedEntrypointNeedsFineLocation) {
  auto d = auto_driver(program, index, "getProviders");
  ExploreOptions o;
  o.target = program.parse_locator("LocationService.collectProviderNames:sensitive");
  auto r = explore(program, index, d, o);
  std::size_t reached = 0;
  for (const auto &p : r.paths) {
    if (p.status != "reached-target") continue;
    ++reached;
    EXPECT_TRUE(mentions(p, "android.permission.ACCESS_FINE_LOCATION")) << p.pc.canonical();
  }
  EXPECT_GT(reached, 0u);
  EXPECT_GT(r.metrics.pruned, 0u);
}

TEST_F(Location, InventoryRecordsTheUidChain) {
  auto d = auto_driver(program, index, "getProviders");
  auto r = explore(program, index, d, {});
  ASSERT_FALSE(r.paths.empty());
  bool found = false;
  for (const auto &p : r.paths)
    for (const auto &e : p.inventory)
      if (e.op == "list.get" && e.derivation == "10054 -> mod 100000 -> 10054 -> -10000 -> 54") {
        found = true;
        EXPECT_EQ(e.index, "54");
        EXPECT_FALSE(e.vars.empty());
      }
  EXPECT_TRUE(found);
}

TEST_F(Location, InvariantsHoldUnderShuffledExploration) {
  auto d = auto_driver(program, index, "getProviders");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ExploreOptions o;
    o.check_invariants = true;
    o.shuffle = true;
    o.seed = seed;
    auto r = explore(program, index, d, o);
    EXPECT_TRUE(r.metrics.invariant_violations.empty()) << r.metrics.invariant_violations.front();
    EXPECT_GT(r.metrics.migrations, 0u);
  }
}

TEST_F(Location, ModelsReplayToTheSameTrace) {
  auto d = auto_driver(program, index, "getProviders");
  auto r = explore(program, index, d, {});
  ASSERT_GT(r.paths.size(), 2u);
  for (const auto &p : r.paths) {
    ReplayRequest req{&program, &index, &d};
    req.bindings = bindings_for(p, p.model);
    auto out = replay(req);
    EXPECT_EQ(trace_text(out.trace), trace_text(p.trace)) << p.pc.canonical();
    EXPECT_EQ(out.status, p.status);
  }
}

TEST_F(Location, UcseExhaustsItsBudget) {
  auto d = auto_driver(program, index, "getAllProviders");
  ExploreOptions o;
  o.mode = ExploreMode::Ucse;
  o.budget.max_states = 200;
  auto r = explore(program, index, d, o);
  EXPECT_TRUE(r.metrics.budget_exhausted);
  auto seeded = explore(program, index, d, {});
  EXPECT_LE(seeded.metrics.states, r.metrics.states);
}

TEST(EngineSemantics, SymbolicDivisorForksATrap) {
  auto p = assemble(R"(
entry M.main
class M singleton
  method main() static
    return
  method f(x:int) : int interface
    const 100
    load 1
    div
    return
)");
  AppRegistry apps;
  apps.apps.push_back({10054, "a", {}, true});
  HeapState h;
  h.roots["m"] = h.alloc(CObject{"M", {}});
  auto index = SnapshotIndex::load(dump_snapshot(p, h, apps));
  TestDriver d{"m", "M", "f", {ParamSpec{}}, {}};
  d.params[0].type = Type::make(Type::Kind::Int);
  auto r = explore(p, index, d, {});
  ASSERT_EQ(r.paths.size(), 2u);
  std::set<std::string> statuses;
  for (const auto &path : r.paths) statuses.insert(path.status);
  EXPECT_TRUE(statuses.count("guest-trap"));
  EXPECT_TRUE(statuses.count("returned"));
}
