// Acceptance run over the corpus. One PASS/FAIL line per criterion; exit
// status 1 when any criterion fails.

#include "snapseed/analyses.hpp"
#include "snapseed/extern_host.hpp"
#include "snapseed/snapshot.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <sstream>

using namespace snapseed;

namespace {

const std::string kCorpus = SNAPSEED_CORPUS;
const std::string kFine = "android.permission.ACCESS_FINE_LOCATION";
const std::string kChain = "10054 -> mod 100000 -> 10054 -> -10000 -> 54";
const std::vector<std::string> kPrograms{"location_service", "task_manager", "taint_lab",
                                         "telecom",          "wifi",         "dispatch"};

// Wall-clock limits per criterion, seconds.
constexpr double kLimit[10] = {0, 60, 30, 30, 10, 30, 30, 60, 60, 120};
constexpr int kRandomRuns = 1000;
constexpr int kFlagBits = 12;
constexpr int kPerturbed = 5;
constexpr std::uint64_t kUcseStates = 400;
constexpr std::uint64_t kMinArms = 5;
constexpr int kRandomPcs = 10000;

struct Fixture {
  std::string name;
  Program program;
  SnapshotIndex index;
};

struct Corpus {
  AppRegistry apps = AppRegistry::from_file(kCorpus + "/apps.json");
  std::unique_ptr<TableExternHost> host = TableExternHost::from_file(kCorpus + "/host_table.json");
  std::vector<Fixture> fixtures;

  Corpus() {
    for (const auto &n : kPrograms) {
      auto p = assemble_file(kCorpus + "/" + n + ".gasm");
      auto idx = snapshot(p, "sys_default.json", apps);
      fixtures.push_back({n, std::move(p), std::move(idx)});
    }
  }

  SnapshotIndex snapshot(const Program &p, const std::string &config, const AppRegistry &reg) const {
    auto heap = run_init(p, sys_config_from_file(kCorpus + "/configs/" + config), reg, host.get());
    return SnapshotIndex::load(dump_snapshot(p, heap, reg));
  }

  const Fixture &get(const std::string &name) const {
    for (const auto &f : fixtures)
      if (f.name == name) return f;
    throw std::runtime_error("no fixture " + name);
  }

  ExploreOptions opts() const {
    ExploreOptions o;
    o.domains = registry_domains(apps);
    o.host = host.get();
    return o;
  }

  // Every (fixture, entrypoint) pair, task manager with its crafted driver.
  std::vector<std::pair<const Fixture *, TestDriver>> drivers() const {
    std::vector<std::pair<const Fixture *, TestDriver>> out;
    for (const auto &f : fixtures)
      for (const auto &m : f.program.interface_methods()) out.emplace_back(&f, auto_driver(f.program, f.index, m));
    const auto &tm = get("task_manager");
    out.emplace_back(&tm, load_driver_file(kCorpus + "/drivers/task_start_activity.json", tm.program));
    return out;
  }
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string join(const std::vector<std::string> &xs) {
  std::string s;
  for (const auto &x : xs) s += (s.empty() ? "" : "; ") + x;
  return s;
}

// Criterion 1: randomized exploration orders never break heap invariants.
Outcome randomized_invariants(const Corpus &c) {
  auto ds = c.drivers();
  std::size_t violations = 0, paths = 0;
  std::string first;
  for (int i = 0; i < kRandomRuns; ++i) {
    const auto &[f, d] = ds[i % ds.size()];
    auto o = c.opts();
    o.check_invariants = true;
    o.shuffle = true;
    o.seed = static_cast<std::uint64_t>(i);
    if (i % 4 == 3) {
      o.mode = ExploreMode::Ucse;
      o.budget.max_states = 150;
    }
    auto r = explore(f->program, f->index, d, o);
    paths += r.paths.size();
    violations += r.metrics.invariant_violations.size();
    if (first.empty() && !r.metrics.invariant_violations.empty()) first = r.metrics.invariant_violations.front();
  }
  std::ostringstream s;
  s << kRandomRuns << " runs, " << paths << " paths, " << violations << " violations";
  if (!first.empty()) s << " (" << first << ")";
  return {violations == 0, s.str()};
}

// Criterion 2: legal manifests replay to the trace of their report.
Outcome manifests_replay(const Corpus &c) {
  std::size_t legal = 0, mismatched = 0;
  std::vector<std::string> bad;
  for (const auto &[f, d] : c.drivers()) {
    auto r = explore(f->program, f->index, d, c.opts());
    for (const auto &m : emit_exploits(r.paths, d, c.apps)) {
      if (!m.legality) continue;
      ++legal;
      ReplayRequest req{&f->program, &f->index, &d};
      req.bindings = m.bindings;
      req.overlay = m.overlay;
      req.registry = &c.apps;
      req.host = c.host.get();
      auto out = replay(req);
      bool ok = trace_text(out.trace) == trace_text(m.trace) && (out.status == "guest-trap") == (m.status == "guest-trap");
      if (!ok) {
        ++mismatched;
        if (bad.size() < 3) bad.push_back(f->name + "." + d.entrypoint + " path " + std::to_string(m.path_id));
      }
    }
  }
  std::ostringstream s;
  s << legal << " legal manifests, " << mismatched << " mismatches";
  if (!bad.empty()) s << " (" << join(bad) << ")";
  return {legal > 0 && mismatched == 0, s.str()};
}

// Criterion 3: permission-check consistency on the location service, with
// the feasible paths cross-checked by concrete enumeration.
Outcome location_ispe(const Corpus &c) {
  const auto &f = c.get("location_service");
  auto target = f.program.parse_locator("LocationService.collectProviderNames:sensitive");
  auto all = auto_driver(f.program, f.index, "getAllProviders");
  auto some = auto_driver(f.program, f.index, "getProviders");
  auto v = check_ispe(f.program, f.index, all, some, target, c.opts(), &c.apps, 2);
  std::vector<std::string> fails;
  if (v.first.paths.size() != 1 || v.first.paths[0].pc != "true") fails.push_back("getAllProviders not one true path");
  if (!v.inconsistent) fails.push_back("verdict consistent");

  auto o = c.opts();
  o.target = target;
  auto sym = explore(f.program, f.index, some, o);
  static const std::regex fine_conjunct("^\\(.* == \"" + kFine + "\"\\)$");
  std::set<std::string> sym_traces;
  for (const auto &p : sym.paths) {
    if (p.status != "reached-target") continue;
    sym_traces.insert(trace_text(p.trace));
    bool has = false;
    for (const auto &cj : p.pc.readable()) has |= std::regex_match(cj, fine_conjunct);
    if (!has) fails.push_back("no FINE conjunct on " + p.pc.canonical());
  }

  // Brute force: the skeleton's granted-permission array in the snapshot.
  HeapId perms = kNullId;
  const auto slot_pkg = f.program.field_slot("PackageSetting", "packageName");
  const auto slot_perm = f.program.field_slot("PackageSetting", "grantedPermissions");
  for (const auto &[id, cell] : f.index.heap().cells) {
    const auto *obj = std::get_if<CObject>(&cell);
    if (!obj || obj->cls != "PackageSetting") continue;
    const auto &pkg = obj->fields[*slot_pkg];
    if (pkg.is_ref() && f.index.get_string(pkg.id) == f.index.skeleton_package()) perms = obj->fields[*slot_perm].id;
  }
  if (perms == kNullId) return {false, "skeleton permissions not found"};
  const std::size_t n = f.index.get_array(perms).values.size();
  const auto &atoms = c.apps.key_domains.at("permissions");

  std::set<std::string> conc_traces;
  std::size_t runs = 0, unmatched = 0;
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= atoms.size();
  for (int crit = -1; crit <= 3; ++crit)
    for (int enabled = 0; enabled <= 1; ++enabled)
      for (std::size_t k = 0; k < combos; ++k) {
        Bindings b;
        b["param0"] = ModelValue::of_null(crit < 0);
        if (crit >= 0) b["param0.accuracy"] = ModelValue::of_int(crit);
        b["param1"] = ModelValue::of_int(enabled);
        for (std::size_t i = 0, rest = k; i < n; ++i, rest /= atoms.size())
          b["obj#" + std::to_string(perms) + "[" + std::to_string(i) + "]"] = ModelValue::of_str(atoms[rest % atoms.size()]);
        ReplayRequest req{&f.program, &f.index, &some};
        req.bindings = b;
        req.target = target;
        auto out = replay(req);
        ++runs;
        if (out.status == "reached-target") conc_traces.insert(trace_text(out.trace));
        // Reaching inputs are admitted by exactly one feasible path with the
        // same trace; other inputs by none (unreachable arms are pruned).
        std::size_t admits = 0;
        bool agrees = true;
        for (const auto &p : sym.paths) {
          if (p.status != "reached-target") continue;
          Model m;
          for (const auto &vi : p.vars)
            if (auto it = b.find(vi.locator); it != b.end()) m[vi.id] = it->second;
          bool holds = true;
          try {
            for (const auto &cj : p.pc.conjuncts) holds = holds && evaluate_pred(cj, m);
          } catch (const Error &) {
            agrees = holds = false; // the path reads an input the enumeration left unbound
          }
          if (!holds) continue;
          ++admits;
          agrees = agrees && trace_text(p.trace) == trace_text(out.trace);
        }
        const std::size_t want = out.status == "reached-target" ? 1 : 0;
        if (admits != want || !agrees) ++unmatched;
      }
  if (sym_traces != conc_traces) fails.push_back("feasible traces differ from enumeration");
  if (unmatched) fails.push_back(std::to_string(unmatched) + " inputs without a matching path");
  std::ostringstream s;
  s << "second side " << v.second.paths.size() << " feasible paths, " << runs << " concrete runs, "
    << conc_traces.size() << " feasible traces";
  if (!fails.empty()) s << "; " << join(fails);
  return {fails.empty() && !sym_traces.empty(), s.str()};
}

std::string strip_quotes(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

// Criterion 4: tainted element reads match the accesses that concretely
// land on data owned by the caller.
Outcome taint_precision(const Corpus &c) {
  const auto &f = c.get("taint_lab");
  const auto uid = f.index.skeleton_uid();
  const auto owner_slot = f.program.field_slot("Entry", "ownerUid");
  std::size_t fp = 0, fn = 0, positives = 0;
  bool chain = false;
  std::vector<std::string> bad;
  for (const auto &ep : f.program.interface_methods()) {
    auto d = auto_driver(f.program, f.index, ep);
    auto r = explore(f.program, f.index, d, c.opts());
    std::set<std::string> found, truth;
    for (const auto &p : r.paths) {
      for (const auto &e : p.inventory) {
        found.insert(e.op + " " + e.container + " " + strip_quotes(e.index));
        chain |= e.derivation == kChain;
      }
      // Ground truth from an unbound replay: the snapshot's own data.
      ReplayRequest req{&f.program, &f.index, &d};
      for (const auto &[k, val] : bindings_for(p, p.model))
        if (k.rfind("param", 0) == 0) req.bindings[k] = val;
      auto out = replay(req);
      for (const auto &a : out.accesses) {
        bool owned = false;
        if (a.element.kind == CValue::Kind::Int) owned = a.element.num == uid;
        else if (a.element.is_ref() && owner_slot) {
          const auto *obj = std::get_if<CObject>(&out.heap.cell(a.element.id));
          owned = obj && obj->cls == "Entry" && obj->fields[*owner_slot].num == uid;
        }
        if (owned) truth.insert(a.op + " obj#" + std::to_string(a.container) + " " + strip_quotes(a.index));
      }
    }
    positives += truth.size();
    for (const auto &x : found)
      if (!truth.count(x)) ++fp, bad.push_back(ep + " false positive " + x);
    for (const auto &x : truth)
      if (!found.count(x)) ++fn, bad.push_back(ep + " missed " + x);
  }
  std::ostringstream s;
  s << positives << " owned accesses, " << fp << " false positives, " << fn << " false negatives, uid chain "
    << (chain ? "seen" : "missing");
  if (!bad.empty()) s << " (" << join(bad) << ")";
  return {fp == 0 && fn == 0 && chain && positives > 0, s.str()};
}

const Fixture *task_fixture(const Corpus &c, TestDriver &d) {
  const auto &f = c.get("task_manager");
  d = load_driver_file(kCorpus + "/drivers/task_start_activity.json", f.program);
  return &f;
}

// Criterion 5: the new-document flag conjunct and a brute-force check of
// the solver over sampled flag values.
Outcome task_flags(const Corpus &c) {
  TestDriver d;
  const auto *f = task_fixture(c, d);
  auto paths = check_property(f->program, f->index, d, parse_property("ret == 101"), c.opts());
  static const std::regex flag_conjunct(
      R"(^\(+\w+ & 0x7F7FFFFF\) \| 0x10000000\).*& 0x80000\) != 0x80000\)$)");
  const PathReport *hit = nullptr;
  ExprRef conj;
  for (const auto &p : paths) {
    auto text = p.pc.readable();
    for (std::size_t i = 0; i < text.size() && !hit; ++i)
      if (std::regex_match(text[i], flag_conjunct)) hit = &p, conj = p.pc.conjuncts[i];
  }
  if (!hit) return {false, std::to_string(paths.size()) + " augmented-sat paths, none with the flag conjunct"};
  bool model_ok = true;
  for (const auto &cj : hit->pc.conjuncts) model_ok = model_ok && evaluate_pred(cj, hit->model);

  std::map<std::uint32_t, ExprRef> fv;
  collect_vars(conj, fv);
  const std::uint32_t flags = fv.begin()->first;
  const auto flag_var = fv.begin()->second;
  const int bits[kFlagBits] = {0, 3, 11, 18, 19, 20, 23, 24, 27, 28, 30, 31};
  std::size_t disagree = 0, sat = 0;
  for (std::uint32_t k = 0; k < (1u << kFlagBits); ++k) {
    std::uint32_t v = 0;
    for (int b = 0; b < kFlagBits; ++b)
      if (k >> b & 1u) v |= 1u << bits[b];
    Model m = hit->model;
    m[flags] = ModelValue::of_int(static_cast<std::int32_t>(v));
    bool brute = true;
    for (const auto &cj : hit->pc.conjuncts) brute = brute && evaluate_pred(cj, m);
    // Pin the other inputs to the model so both sides ask the same question.
    PathCondition q = hit->pc;
    for (const auto &[id, var] : hit->pc.vars()) {
      if (id == flags || !hit->model.count(id)) continue;
      const auto &mv = hit->model.at(id);
      if (var->sort == Sort::Str) q.conjuncts.push_back(mk_str_eq(var, mk_str(mv.text)));
      else if (var->sort == Sort::Ref) q.conjuncts.push_back(mv.is_null ? mk_is_null(var) : mk_not(mk_is_null(var)));
      else q.conjuncts.push_back(mk_binary(ExprOp::Eq, as_int(var), mk_int(mv.num)));
    }
    q.conjuncts.push_back(mk_binary(ExprOp::Eq, flag_var, mk_int(static_cast<std::int32_t>(v))));
    auto o = check_sat(q);
    sat += brute;
    if ((o.result == SatResult::Sat) != brute || o.result == SatResult::Unknown) ++disagree;
  }
  std::ostringstream s;
  s << paths.size() << " augmented-sat paths, model " << (model_ok ? "satisfies" : "violates") << " pc, "
    << (1u << kFlagBits) << " flag values (" << sat << " sat), " << disagree << " disagreements";
  return {model_ok && disagree == 0 && sat > 0, s.str()};
}

// Criterion 6: legality of emitted manifests and the terminal heap of their
// replays.
Outcome task_hijack(const Corpus &c) {
  TestDriver d;
  const auto *f = task_fixture(c, d);
  const std::string victim = "com.android.calendar";
  std::vector<std::string> fails;
  if (legality_violations({{"package", {victim}}}, c.apps).empty()) fails.push_back("victim package accepted");

  auto paths = check_property(f->program, f->index, d, parse_property("ret == 101"), c.opts());
  auto ms = emit_exploits(paths, d, c.apps);
  std::size_t legal = 0, illegal_victim = 0, planted = 0;
  const auto &prog = f->program;
  for (const auto &m : ms) {
    auto pkg = m.overlay.find("package");
    bool is_victim = pkg != m.overlay.end() && !pkg->second.empty() && pkg->second[0] != c.apps.skeleton().package &&
                     c.apps.find_package(pkg->second[0]);
    if (is_victim && m.legality) fails.push_back("legal manifest reuses " + pkg->second[0]);
    if (is_victim) ++illegal_victim;
    if (!m.legality) continue;
    ++legal;
    ReplayRequest req{&prog, &f->index, &d};
    req.bindings = m.bindings;
    req.overlay = m.overlay;
    req.registry = &c.apps;
    auto out = replay(req);
    if (!out.ret || out.ret->num != 101) {
      fails.push_back("path " + std::to_string(m.path_id) + " returned other than 101");
      continue;
    }
    // The calendar's task must now hold a record from the caller.
    bool found = false;
    const auto root = *prog.field_slot("TaskRecord", "rootPackage");
    const auto acts = *prog.field_slot("TaskRecord", "activities");
    const auto rec_pkg = *prog.field_slot("ActivityRecord", "packageName");
    for (const auto &[id, cell] : out.heap.cells) {
      const auto *t = std::get_if<CObject>(&cell);
      if (!t || t->cls != "TaskRecord" || !t->fields[root].is_ref()) continue;
      if (out.heap.string(t->fields[root].id).text != victim) continue;
      for (const auto &a : out.heap.collection(t->fields[acts].id).items) {
        const auto &rec = out.heap.object(a.id);
        const auto &p = rec.fields[rec_pkg];
        found |= p.is_ref() && out.heap.string(p.id).text == c.apps.skeleton().package;
      }
    }
    if (found) ++planted;
    else fails.push_back("path " + std::to_string(m.path_id) + " left the calendar task untouched");
  }
  std::ostringstream s;
  s << ms.size() << " manifests, " << legal << " legal, " << illegal_victim << " reuse a victim package, " << planted
    << " plant a record in the calendar task";
  if (!fails.empty()) s << "; " << join(fails);
  return {fails.empty() && legal > 0 && illegal_victim > 0 && planted == legal, s.str()};
}

// Criterion 7: perturbed system configurations leave the condition sets
// unchanged.
Outcome perturbed_snapshots(const Corpus &c) {
  std::size_t checked = 0;
  std::vector<std::string> bad;
  for (const auto &f : c.fixtures) {
    std::vector<SnapshotIndex> snaps;
    for (int i = 0; i < kPerturbed; ++i)
      snaps.push_back(c.snapshot(f.program, "sys_variant" + std::to_string(i) + ".json", c.apps));
    std::vector<const SnapshotIndex *> ptrs;
    for (const auto &s : snaps) ptrs.push_back(&s);
    for (const auto &m : f.program.interface_methods()) {
      auto d = auto_driver(f.program, f.index, m);
      auto rep = snapshot_consistency(f.program, ptrs, d, c.opts(), 1);
      ++checked;
      if (!rep.equal) bad.push_back(m + ": " + join(rep.diffs));
    }
  }
  std::ostringstream s;
  s << checked << " entrypoints over " << kPerturbed << " snapshots, " << bad.size() << " divergent";
  if (!bad.empty()) s << " (" << join(bad) << ")";
  return {bad.empty(), s.str()};
}

// Criterion 8: seeded exploration against unconstrained lazy init.
Outcome seeded_vs_ucse(const Corpus &c) {
  std::vector<std::string> fails;
  std::size_t compared = 0;
  std::uint64_t arms = 0;
  bool dispatch_ok = false;
  for (const auto &[f, d] : c.drivers()) {
    auto o = c.opts();
    o.budget.max_states = kUcseStates;
    auto cmp = compare_ucse(f->program, f->index, d, o);
    ++compared;
    if (cmp.seeded.metrics.states > cmp.ucse.metrics.states)
      fails.push_back(f->name + "." + d.entrypoint + " seeded " + std::to_string(cmp.seeded.metrics.states) + " > " +
                      std::to_string(cmp.ucse.metrics.states));
    if (f->name == "dispatch" && d.entrypoint == "measure") {
      arms = cmp.ucse.metrics.max_dispatch_arms;
      dispatch_ok = arms >= kMinArms && cmp.ucse.metrics.budget_exhausted && !cmp.seeded.metrics.budget_exhausted;
    }
  }
  if (!dispatch_ok) fails.push_back("dispatch fixture did not separate the modes");
  std::ostringstream s;
  s << compared << " entrypoints at " << kUcseStates << " states, dispatch fork " << arms << " arms";
  if (!fails.empty()) s << "; " << join(fails);
  return {fails.empty(), s.str()};
}

// Random path conditions over small explicit domains.
class PcGen {
public:
  explicit PcGen(std::uint64_t seed) : rng_(seed) {}

  PathCondition next() {
    vars_.clear();
    const int nvars = pick(1, 3);
    for (int i = 0; i < nvars; ++i) {
      auto id = static_cast<std::uint32_t>(i + 1);
      switch (pick(0, 4)) {
      case 0: case 1: vars_.push_back(mk_var(id, Sort::Int, "i" + std::to_string(i), VarDomain::range(-6, 6))); break;
      case 2: vars_.push_back(mk_var(id, Sort::Bool, "b" + std::to_string(i), VarDomain::boolean())); break;
      case 3: {
        VarDomain dom;
        dom.strs = {"", "a", "b", "ab"};
        vars_.push_back(mk_var(id, Sort::Str, "s" + std::to_string(i), dom));
        break;
      }
      default: vars_.push_back(mk_var(id, Sort::Ref, "r" + std::to_string(i)));
      }
    }
    PathCondition pc;
    const int n = pick(1, 4);
    for (int i = 0; i < n; ++i) pc.conjuncts.push_back(pred(2));
    return pc;
  }

  ExplicitDomains domains(const PathCondition &pc) const {
    ExplicitDomains out;
    for (const auto &[id, v] : pc.vars()) out[id] = explicit_domain(*v, {}, 1u << 12);
    return out;
  }

private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  ExprRef var_of(Sort s) {
    std::vector<ExprRef> c;
    for (const auto &v : vars_)
      if (v->sort == s) c.push_back(v);
    if (c.empty()) return nullptr;
    return c[pick(0, static_cast<int>(c.size()) - 1)];
  }

  ExprRef int_term(int depth) {
    if (depth == 0 || pick(0, 2) == 0) {
      auto v = pick(0, 3) ? var_of(Sort::Int) : nullptr;
      if (!v && pick(0, 1)) v = var_of(Sort::Bool) ? mk_bool_to_int(var_of(Sort::Bool)) : nullptr;
      return v ? v : mk_int(pick(-8, 8));
    }
    static const ExprOp ops[] = {ExprOp::Add,    ExprOp::Sub,   ExprOp::Mul,    ExprOp::Div, ExprOp::Mod,
                                 ExprOp::BitAnd, ExprOp::BitOr, ExprOp::BitXor, ExprOp::Shl, ExprOp::Shr};
    auto op = ops[pick(0, 9)];
    auto b = op == ExprOp::Shl || op == ExprOp::Shr ? mk_int(pick(0, 3)) : int_term(depth - 1);
    return mk_binary(op, int_term(depth - 1), b);
  }

  ExprRef str_term(int depth) {
    static const char *lits[] = {"", "a", "b", "ab", "ba", "c"};
    if (depth == 0 || pick(0, 2)) {
      auto v = pick(0, 2) ? var_of(Sort::Str) : nullptr;
      return v ? v : mk_str(lits[pick(0, 5)]);
    }
    return mk_concat(str_term(depth - 1), str_term(depth - 1));
  }

  ExprRef pred(int depth) {
    switch (pick(0, depth > 0 ? 6 : 3)) {
    case 0: {
      static const ExprOp cmps[] = {ExprOp::Eq, ExprOp::Ne, ExprOp::Lt, ExprOp::Le, ExprOp::Gt, ExprOp::Ge};
      return mk_binary(cmps[pick(0, 5)], int_term(2), int_term(2));
    }
    case 1: return mk_str_eq(str_term(1), str_term(1));
    case 2: {
      auto r = var_of(Sort::Ref);
      return r ? mk_is_null(r) : mk_binary(ExprOp::Eq, int_term(1), mk_int(pick(-2, 2)));
    }
    case 3: {
      auto b = var_of(Sort::Bool);
      return b ? b : mk_binary(ExprOp::Ne, int_term(2), mk_int(0));
    }
    case 4: return mk_not(pred(depth - 1));
    case 5: return mk_or(pred(depth - 1), pred(depth - 1));
    default: return mk_and(pred(depth - 1), pred(depth - 1));
    }
  }

  std::mt19937_64 rng_;
  std::vector<ExprRef> vars_;
};

// Criterion 9: the solver against exhaustive enumeration.
Outcome solver_vs_brute_force(const Corpus &) {
  PcGen gen(20261019);
  std::size_t disagree = 0, unknown = 0, sat = 0;
  std::string first;
  for (int i = 0; i < kRandomPcs; ++i) {
    auto pc = gen.next();
    auto models = brute_force(pc, gen.domains(pc), 1u << 20, 1);
    SolverOptions so;
    so.seed = static_cast<std::uint64_t>(i);
    auto o = check_sat(pc, so);
    bool ok;
    if (o.result == SatResult::Unknown) {
      ++unknown;
      ok = false;
    } else if (o.result == SatResult::Sat) {
      ok = !models.empty();
      for (const auto &cj : pc.conjuncts) ok = ok && evaluate_pred(cj, o.model);
    } else {
      ok = models.empty();
    }
    sat += !models.empty();
    if (!ok) {
      ++disagree;
      if (first.empty()) first = pc.canonical() + " solver " + to_string(o.result);
    }
  }
  std::ostringstream s;
  s << kRandomPcs << " conditions (" << sat << " sat), " << disagree << " disagreements, " << unknown << " unknown";
  if (!first.empty()) s << " (first: " << first << ")";
  return {disagree == 0, s.str()};
}

} // namespace

int main() {
  const std::vector<std::function<Outcome(const Corpus &)>> checks{
      randomized_invariants, manifests_replay, location_ispe,        taint_precision,      task_flags,
      task_hijack,           perturbed_snapshots, seeded_vs_ucse, solver_vs_brute_force};
  Corpus corpus;
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = checks[i](corpus);
    } catch (const std::exception &e) {
      out = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = out.pass && secs < kLimit[n];
    failed += !pass;
    std::printf("criterion %d: %s  %.2fs (limit %.0fs)  %s\n", n, pass ? "PASS" : "FAIL", secs, kLimit[n],
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
