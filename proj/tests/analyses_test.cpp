#include "snapseed/analyses.hpp"
#include "snapseed/snapshot.hpp"

#include <gtest/gtest.h>

using namespace snapseed;

namespace {

const std::string kCorpus = SNAPSEED_CORPUS;
const std::string kFine = "android.permission.ACCESS_FINE_LOCATION";

SnapshotIndex snapshot_for(const Program &p, const AppRegistry &apps, const std::string &config) {
  return SnapshotIndex::load(dump_snapshot(p, run_init(p, sys_config_from_file(kCorpus + "/configs/" + config), apps), apps));
}

class LocationChecks : public ::testing::Test {
protected:
  Program program = assemble_file(kCorpus + "/location_service.gasm");
  AppRegistry apps = AppRegistry::from_file(kCorpus + "/apps.json");
  SnapshotIndex index = snapshot_for(program, apps, "sys_default.json");
  StmtLocator sensitive = program.parse_locator("LocationService.collectProviderNames:sensitive");

  ExploreOptions opts() const {
    ExploreOptions o;
    o.domains = registry_domains(apps);
    return o;
  }
};

PathReport report_with(std::vector<ExprRef> conjuncts, std::vector<VarInfo> vars) {
  PathReport r;
  r.pc.conjuncts = std::move(conjuncts);
  r.vars = std::move(vars);
  return r;
}

} // namespace

TEST(Permissions, ExtractsEqualitiesOnPermissionElements) {
  auto p0 = mk_var(1, Sort::Str, "obj#5[0]");
  auto p1 = mk_var(2, Sort::Str, "obj#5[1]");
  auto other = mk_var(3, Sort::Int, "param0");
  auto r = report_with({mk_not(mk_str_eq(p0, mk_str("A"))), mk_str_eq(p1, mk_str("A")), mk_str_eq(mk_str("B"), p0),
                        mk_binary(ExprOp::Gt, other, mk_int(2))},
                       {{1, Sort::Str, "PackageSetting.grantedPermissions[0]", "obj#5[0]", {}},
                        {2, Sort::Str, "PackageSetting.grantedPermissions[1]", "obj#5[1]", {}},
                        {3, Sort::Int, "param0", "param0", {}}});
  auto s = extract_permissions(r, nullptr);
  EXPECT_EQ(s.perms, (std::set<std::string>{"A", "B"}));
  EXPECT_TRUE(s.unrecognized.empty());

  auto odd = report_with({mk_str_eq(p0, p1)}, r.vars);
  auto t = extract_permissions(odd, nullptr);
  EXPECT_TRUE(t.perms.empty());
  ASSERT_EQ(t.unrecognized.size(), 1u);
}

TEST(Properties, ParsesComparisons) {
  PathReport r;
  r.ret = mk_int(101);
  EXPECT_TRUE(evaluate_pred(parse_property("ret == 101")(r), {}));
  EXPECT_FALSE(evaluate_pred(parse_property("ret != 101")(r), {}));
  EXPECT_TRUE(evaluate_pred(parse_property("ret >= 0x10")(r), {}));
  EXPECT_FALSE(evaluate_pred(parse_property("false")(r), {}));
  EXPECT_THROW(parse_property("ret ~ 3"), Error);
  EXPECT_THROW(parse_property("retval == 3"), Error);
}

TEST(Legality, DuplicatePackageAndOutOfDomainValues) {
  auto apps = AppRegistry::from_file(kCorpus + "/apps.json");
  EXPECT_TRUE(legality_violations({{"package", {"com.example.skeleton"}}}, apps).empty());
  EXPECT_EQ(legality_violations({{"package", {"com.android.calendar"}}}, apps).size(), 1u);
  EXPECT_EQ(legality_violations({{"launch-mode", {"sideways"}}}, apps).size(), 1u);
  EXPECT_TRUE(legality_violations({{"launch-mode", {"singleTask"}}, {"task-affinity", {"android.task.calendar"}}}, apps)
                  .empty());
}

TEST_F(LocationChecks, IspeVerdictIsInconsistent) {
  auto a = auto_driver(program, index, "getAllProviders");
  auto b = auto_driver(program, index, "getProviders");
  for (unsigned jobs : {1u, 2u}) {
    auto v = check_ispe(program, index, a, b, sensitive, opts(), &apps, jobs);
    EXPECT_TRUE(v.inconsistent);
    ASSERT_TRUE(v.witness);
    EXPECT_TRUE(v.first.unconditional);
    ASSERT_EQ(v.first.paths.size(), 1u);
    EXPECT_TRUE(v.first.paths[0].perms.perms.empty());
    ASSERT_FALSE(v.second.paths.empty());
    EXPECT_FALSE(v.second.unconditional);
    for (const auto &p : v.second.paths) EXPECT_EQ(p.perms.perms, std::set<std::string>{kFine}) << p.pc;
  }
}

TEST_F(LocationChecks, SameEntrypointTwiceIsConsistent) {
  auto b = auto_driver(program, index, "getProviders");
  auto v = check_ispe(program, index, b, b, sensitive, opts(), &apps);
  EXPECT_FALSE(v.inconsistent);
  EXPECT_FALSE(v.witness);
}

TEST_F(LocationChecks, UnreachableEntrypointIsRejected) {
  auto a = auto_driver(program, index, "getAllProviders");
  auto c = auto_driver(program, index, "getDeviceCount");
  EXPECT_THROW(check_ispe(program, index, a, c, sensitive, opts(), &apps), Error);
}

TEST_F(LocationChecks, ConstantPropertiesSelectAllOrNothing) {
  auto d = auto_driver(program, index, "getProviders");
  auto all = explore(program, index, d, opts());
  std::size_t returned = 0;
  for (const auto &p : all.paths) returned += p.status == "returned";
  EXPECT_EQ(check_property(program, index, d, parse_property("true"), opts()).size(), returned);
  EXPECT_TRUE(check_property(program, index, d, parse_property("false"), opts()).empty());
}

TEST_F(LocationChecks, EmittedManifestsAreLegalAndReplay) {
  auto d = auto_driver(program, index, "getProviders");
  auto r = explore(program, index, d, opts());
  auto ms = emit_exploits(r.paths, d, apps, {});
  ASSERT_GE(ms.size(), r.paths.size());
  std::size_t with_perm = 0;
  for (const auto &m : ms) {
    EXPECT_TRUE(m.legality) << manifest_text(m);
    auto it = m.overlay.find("permissions");
    if (it != m.overlay.end() && std::count(it->second.begin(), it->second.end(), kFine)) ++with_perm;
    auto back = manifest_from_json(nlohmann::json::parse(to_json(m).dump()));
    EXPECT_EQ(to_json(back), to_json(m));
    ReplayRequest req{&program, &index, &d};
    req.bindings = back.bindings;
    req.overlay = back.overlay;
    req.registry = &apps;
    auto out = replay(req);
    EXPECT_EQ(trace_text(out.trace), trace_text(m.trace)) << manifest_text(m);
    EXPECT_EQ(out.status == "guest-trap", m.status == "guest-trap");
  }
  EXPECT_GT(with_perm, 0u);
}

TEST_F(LocationChecks, UnconditionalPathGivesEmptyOverlay) {
  auto d = auto_driver(program, index, "getAllProviders");
  auto ms = emit_exploits(explore(program, index, d, opts()).paths, d, apps, {});
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_TRUE(ms[0].overlay.empty());
  EXPECT_TRUE(ms[0].params.empty());
  EXPECT_TRUE(ms[0].legality);
  EXPECT_EQ(ms[0].pc, "true");
}

TEST_F(LocationChecks, PerturbedSnapshotsAgree) {
  std::vector<SnapshotIndex> snaps;
  for (int i = 0; i < 3; ++i) snaps.push_back(snapshot_for(program, apps, "sys_variant" + std::to_string(i) + ".json"));
  std::vector<const SnapshotIndex *> ptrs{&index};
  for (const auto &s : snaps) ptrs.push_back(&s);
  auto d = auto_driver(program, index, "getProviders");
  auto rep = snapshot_consistency(program, ptrs, d, opts(), 2);
  EXPECT_TRUE(rep.equal) << consistency_text(rep);
  auto self = snapshot_consistency(program, {&index}, d, opts());
  EXPECT_TRUE(self.equal);
}

TEST_F(LocationChecks, AlteredPermissionDiverges) {
  auto altered = apps;
  for (auto &a : altered.apps)
    if (a.skeleton) a.manifest["permissions"].push_back(kFine);
  auto other = snapshot_for(program, altered, "sys_default.json");
  auto d = auto_driver(program, index, "getProviders");
  auto rep = snapshot_consistency(program, {&index, &other}, d, opts());
  EXPECT_FALSE(rep.equal);
  EXPECT_FALSE(rep.diffs.empty());
}

TEST_F(LocationChecks, UcseComparisonOnEqualBudgets) {
  auto d = auto_driver(program, index, "getAllProviders");
  auto o = opts();
  o.budget.max_states = 300;
  auto c = compare_ucse(program, index, d, o);
  EXPECT_FALSE(c.seeded.metrics.budget_exhausted);
  EXPECT_TRUE(c.ucse.metrics.budget_exhausted);
  EXPECT_LE(c.seeded.metrics.states, c.ucse.metrics.states);
  EXPECT_EQ(to_json(c, false).dump(), to_json(compare_ucse(program, index, d, o), false).dump());
}
