#include "snapseed/driver.hpp"
#include "snapseed/extern_host.hpp"
#include "snapseed/snapshot.hpp"
#include "snapseed/vm.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace snapseed;

namespace {

const std::string kCorpus = SNAPSEED_CORPUS;

struct Fixture {
  Program program = assemble_file(kCorpus + "/location_service.gasm");
  AppRegistry apps = AppRegistry::from_file(kCorpus + "/apps.json");
  SysConfig config = sys_config_from_file(kCorpus + "/configs/sys_default.json");
};

HeapId field_ref(const HeapState &h, const Program &p, HeapId obj, const std::string &name) {
  const auto &o = h.object(obj);
  return o.fields[*p.field_slot(o.cls, name)].id;
}

// Independent reachability walk over the raw cell variants.
std::size_t count_live_objects(const HeapState &h) {
  std::set<HeapId> seen;
  std::vector<HeapId> work;
  for (const auto &[n, id] : h.roots) work.push_back(id);
  for (const auto &[c, st] : h.classes)
    for (const auto &v : st.statics)
      if (v.is_ref()) work.push_back(v.id);
  std::size_t objects = 0;
  while (!work.empty()) {
    auto id = work.back();
    work.pop_back();
    if (!seen.insert(id).second) continue;
    const auto &cell = h.cell(id);
    auto push = [&](const CValue &v) {
      if (v.is_ref()) work.push_back(v.id);
    };
    if (const auto *o = std::get_if<CObject>(&cell)) {
      ++objects;
      for (const auto &v : o->fields) push(v);
    } else if (const auto *a = std::get_if<CArray>(&cell)) {
      for (const auto &v : a->values) push(v);
    } else if (const auto *c = std::get_if<CCollection>(&cell)) {
      for (const auto &v : c->items) push(v);
      for (const auto &[k, v] : c->entries) push(v);
    }
  }
  return objects;
}

} // namespace

TEST(RunInit, SkeletonOccupiesItsUidSlot) {
  Fixture f;
  auto heap = run_init(f.program, f.config, f.apps);
  ASSERT_TRUE(heap.roots.count("LocationService"));
  auto pms = heap.roots.at("PackageManagerService");
  const auto &users = heap.collection(field_ref(heap, f.program, pms, "mUserIds"));
  ASSERT_EQ(users.items.size(), 55u);
  const auto &skel = users.items[10054 % 100000 - 10000];
  ASSERT_TRUE(skel.is_ref());
  const auto &ps = heap.object(skel.id);
  EXPECT_EQ(heap.string(ps.fields[0].id).text, "com.example.skeleton");
  EXPECT_EQ(ps.fields[1].num, 10054);
}

TEST(RunInit, EmptyBodyLeavesNoRoots) {
  auto p = assemble("entry M.main\nclass M\n  static x:int = 7\n  method main() static\n    return\n");
  AppRegistry apps;
  apps.apps.push_back({10054, "a", {}, true});
  auto heap = run_init(p, {}, apps);
  EXPECT_TRUE(heap.roots.empty());
  EXPECT_TRUE(heap.cells.empty());
  EXPECT_EQ(heap.classes.at("M").statics.at(0).num, 7);
}

TEST(RunInit, DuplicateUidsRejected) {
  Fixture f;
  f.apps.apps[1].uid = f.apps.apps[0].uid;
  try {
    run_init(f.program, f.config, f.apps);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Registry);
  }
}

TEST(RunInit, TrapIsFatal) {
  auto p = assemble("entry M.main\nclass M\n  method main() static\n    const 1\n    const 0\n    div\n    pop\n    return\n");
  AppRegistry apps;
  apps.apps.push_back({10054, "a", {}, true});
  try {
    run_init(p, {}, apps);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::GuestTrap);
    EXPECT_NE(std::string(e.what()).find("M.main@2"), std::string::npos);
  }
}

TEST(Snapshot, DumpIsDeterministicAndComplete) {
  Fixture f;
  auto h1 = run_init(f.program, f.config, f.apps);
  auto h2 = run_init(f.program, f.config, f.apps);
  auto d1 = snapshot_text(dump_snapshot(f.program, h1, f.apps));
  auto d2 = snapshot_text(dump_snapshot(f.program, h2, f.apps));
  EXPECT_EQ(d1, d2);
  auto index = SnapshotIndex::load_text(d1);
  EXPECT_EQ(index.skeleton_uid(), 10054);
  EXPECT_EQ(index.object_count(), count_live_objects(h1));
}

TEST(Snapshot, LoadReproducesReachableHeap) {
  Fixture f;
  auto h = run_init(f.program, f.config, f.apps);
  auto index = SnapshotIndex::load(dump_snapshot(f.program, h, f.apps));
  for (auto id : h.live_ids()) EXPECT_EQ(index.heap().cell(id), h.cell(id)) << id;
  EXPECT_EQ(index.heap().roots, h.roots);
}

TEST(Snapshot, NonAppDataDoesNotMoveSkeleton) {
  Fixture f;
  for (int i = 0; i < 5; ++i) {
    auto config = sys_config_from_file(kCorpus + "/configs/sys_variant" + std::to_string(i) + ".json");
    auto h = run_init(f.program, config, f.apps);
    auto pms = h.roots.at("PackageManagerService");
    const auto &users = h.collection(field_ref(h, f.program, pms, "mUserIds"));
    EXPECT_EQ(h.object(users.items[54].id).fields[1].num, 10054);
  }
}

class ReplayTest : public ::testing::Test {
protected:
  Fixture f;
  SnapshotIndex index = SnapshotIndex::load(dump_snapshot(f.program, run_init(f.program, f.config, f.apps), f.apps));

  HeapId skeleton_perms() {
    const auto &h = index.heap();
    auto pms = index.find_root("PackageManagerService");
    const auto &users = h.collection(field_ref(h, f.program, pms, "mUserIds"));
    return field_ref(h, f.program, users.items[54].id, "grantedPermissions");
  }
};

TEST_F(ReplayTest, ConstantlyTruePathNeedsNoModel) {
  auto driver = auto_driver(f.program, index, "getAllProviders");
  ReplayRequest req{&f.program, &index, &driver};
  auto a = replay(req);
  auto b = replay(req);
  EXPECT_EQ(a.status, "returned");
  EXPECT_EQ(a.trace, b.trace);
  const auto &names = a.heap.collection(a.ret->id);
  EXPECT_EQ(names.items.size(), 4u);
}

TEST_F(ReplayTest, PermissionDecidesTheCheck) {
  auto driver = auto_driver(f.program, index, "getProviders");
  auto arr = skeleton_perms();
  ReplayRequest req{&f.program, &index, &driver};
  req.bindings["param0"] = ModelValue::of_null(true);
  req.bindings["param1"] = ModelValue::of_int(1);
  req.bindings["obj#" + std::to_string(arr) + "[0]"] = ModelValue::of_str("android.permission.ACCESS_FINE_LOCATION");
  req.bindings["obj#" + std::to_string(arr) + "[1]"] = ModelValue::of_str("x");
  req.target = f.program.parse_locator("LocationService.collectProviderNames:sensitive");
  auto granted = replay(req);
  EXPECT_EQ(granted.status, "reached-target");

  req.registry = &f.apps;
  req.overlay["permissions"] = {"android.permission.INTERNET"};
  auto denied = replay(req);
  EXPECT_EQ(denied.status, "guest-trap");
  EXPECT_NE(denied.trap.find("SecurityException"), std::string::npos);
  ASSERT_FALSE(denied.trace.empty());
  // Both runs agree up to the first permission comparison, then diverge.
  std::size_t common = 0;
  while (common < granted.trace.size() && common < denied.trace.size() &&
         granted.trace[common] == denied.trace[common])
    ++common;
  ASSERT_LT(common, granted.trace.size());
  EXPECT_EQ(granted.trace[common].method, "PackageManagerService.checkUidPermission");
}

TEST_F(ReplayTest, CriteriaAccuracyTraps) {
  auto driver = auto_driver(f.program, index, "getProviders");
  auto arr = skeleton_perms();
  ReplayRequest req{&f.program, &index, &driver};
  req.bindings["param0"] = ModelValue::of_null(false);
  req.bindings["param0.accuracy"] = ModelValue::of_int(3);
  req.bindings["param1"] = ModelValue::of_int(0);
  req.bindings["obj#" + std::to_string(arr) + "[0]"] = ModelValue::of_str("android.permission.ACCESS_FINE_LOCATION");
  auto r = replay(req);
  EXPECT_EQ(r.status, "guest-trap");
  EXPECT_NE(r.trap.find("IllegalArgumentException"), std::string::npos);
}

TEST_F(ReplayTest, UnboundParameterIsAnError) {
  auto driver = auto_driver(f.program, index, "getProviders");
  ReplayRequest req{&f.program, &index, &driver};
  EXPECT_THROW(replay(req), Error);
}

TEST_F(ReplayTest, DelegatedExternUsesHost) {
  auto driver = auto_driver(f.program, index, "getMaxProviders");
  TableExternHost host(nlohmann::json{{"SystemProperties.native_get_long", 5}});
  ReplayRequest req{&f.program, &index, &driver};
  req.host = &host;
  auto r = replay(req);
  ASSERT_TRUE(r.ret);
  EXPECT_EQ(r.ret->num, 5);
  req.host = nullptr;
  EXPECT_THROW(replay(req), Error);
}

TEST(Messages, HandlerAndStateMachineSendsAreSynchronous) {
  auto p = assemble(R"(
entry M.main
class Handler handler
  method sendMessage(what:int)
    return
  method handleMessage(what:int)
    return
class MyHandler extends Handler
  field last:int
  method handleMessage(what:int)
    load 0
    load 1
    putfield MyHandler.last
    return
class State
  method processMessage(what:int)
    return
class Busy extends State
  static hits:int
  method processMessage(what:int)
    load 1
    putstatic Busy.hits
    return
class StateInfo
  field state:ref<State>
class SmHandler
  field mStateStack:arr<StateInfo>
  field mStateStackTopIndex:int
class StateMachine statemachine
  field mSmHandler:ref<SmHandler>
  method sendMessage(what:int)
    return
class M
  static h:ref<MyHandler>
  method main() static locals=3
    new MyHandler
    dup
    putstatic M.h
    const 9
    invokevirtual Handler.sendMessage
    new SmHandler
    store 0
    load 0
    const 3
    newarray StateInfo
    putfield SmHandler.mStateStack
    load 0
    const 1
    putfield SmHandler.mStateStackTopIndex
    new StateInfo
    store 1
    load 1
    new Busy
    putfield StateInfo.state
    load 0
    getfield SmHandler.mStateStack
    const 1
    load 1
    aastore
    new StateMachine
    store 2
    load 2
    load 0
    putfield StateMachine.mSmHandler
    load 2
    const 4
    invokevirtual StateMachine.sendMessage
    return
)");
  AppRegistry apps;
  apps.apps.push_back({10054, "a", {}, true});
  auto h = run_init(p, {}, apps);
  auto handler = h.classes.at("M").statics[0].id;
  EXPECT_EQ(h.object(handler).fields[0].num, 9);
  EXPECT_EQ(h.classes.at("Busy").statics[0].num, 4);
}
