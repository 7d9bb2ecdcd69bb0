//===-- analyses.cpp - Checkers built on exploration ----------------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/analyses.hpp"

#include "snapseed/snapshot.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <sstream>

namespace snapseed {

using nlohmann::json;

namespace {

bool is_permission_label(const std::string &label, const AppRegistry *registry) {
  if (registry) {
    auto key = registry->manifest_key_for(label);
    return key && *key == "permissions";
  }
  auto dot = label.rfind('.');
  std::string field = dot == std::string::npos ? label : label.substr(dot + 1);
  std::transform(field.begin(), field.end(), field.begin(), [](unsigned char c) { return std::tolower(c); });
  return field.find("permission") != std::string::npos;
}

// "C.f[3]" -> 3; nothing for unindexed labels.
std::optional<std::size_t> label_index(const std::string &label) {
  if (label.empty() || label.back() != ']') return std::nullopt;
  auto open = label.rfind('[');
  if (open == std::string::npos) return std::nullopt;
  auto digits = label.substr(open + 1, label.size() - open - 2);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
  return static_cast<std::size_t>(std::stoul(digits));
}

std::string value_text(const ModelValue &v) {
  switch (v.sort) {
  case Sort::Str: return v.text;
  case Sort::Int: return std::to_string(v.num);
  case Sort::Bool: return v.num ? "true" : "false";
  case Sort::Ref: return v.is_null ? "null" : "non-null";
  }
  return "";
}

bool satisfies(const PathCondition &pc, const Model &model) {
  try {
    for (const auto &c : pc.conjuncts)
      if (!evaluate_pred(c, model)) return false;
    return true;
  } catch (const Error &) {
    return false;
  }
}

template <class F> auto run_pair(unsigned jobs, F a, F b) {
  if (jobs > 1) {
    auto fa = std::async(std::launch::async, a);
    auto rb = b();
    return std::make_pair(fa.get(), std::move(rb));
  }
  auto ra = a();
  return std::make_pair(std::move(ra), b());
}

IspeSide ispe_side(const ExploreResult &r, const std::string &entrypoint, const AppRegistry *registry) {
  IspeSide side;
  side.entrypoint = entrypoint;
  side.metrics = r.metrics;
  for (const auto &p : r.paths) {
    if (p.status != "reached-target") continue;
    side.paths.push_back({p.id, extract_permissions(p, registry), p.pc.canonical(), p.trace});
  }
  side.unconditional = side.paths.size() == 1 && side.paths[0].pc == "true";
  if (side.paths.empty()) side.note = "no feasible path reaches the statement";
  else if (r.metrics.budget_exhausted) side.note = "budget exhausted; paths may be missing";
  return side;
}

// A path of `a` whose set differs from every path of `b`.
std::optional<std::pair<std::uint32_t, std::uint32_t>> find_witness(const IspeSide &a, const IspeSide &b) {
  for (const auto &p : a.paths) {
    bool matched = false;
    for (const auto &q : b.paths) matched = matched || p.perms == q.perms;
    if (!matched) {
      if (b.paths.empty()) return std::nullopt;
      return std::make_pair(p.path_id, b.paths.front().path_id);
    }
  }
  return std::nullopt;
}

bool any_unmatched(const IspeSide &a, const IspeSide &b) {
  for (const auto &p : a.paths) {
    bool matched = false;
    for (const auto &q : b.paths) matched = matched || p.perms == q.perms;
    if (!matched) return true;
  }
  return false;
}

} // namespace

PermissionSet extract_permissions(const PathReport &report, const AppRegistry *registry) {
  std::set<std::uint32_t> perm_vars;
  for (const auto &v : report.vars)
    if (is_permission_label(v.label, registry)) perm_vars.insert(v.id);
  PermissionSet out;
  for (const auto &c : report.pc.conjuncts) {
    std::map<std::uint32_t, ExprRef> vars;
    collect_vars(c, vars);
    bool touches = false;
    for (const auto &[id, e] : vars) touches = touches || perm_vars.count(id);
    if (!touches) continue;
    if (c->op == ExprOp::StrEq && c->kids.size() == 2) {
      const auto &a = c->kids[0];
      const auto &b = c->kids[1];
      if (a->op == ExprOp::Var && b->op == ExprOp::StrConst && perm_vars.count(a->var)) {
        out.perms.insert(b->text);
        continue;
      }
      if (b->op == ExprOp::Var && a->op == ExprOp::StrConst && perm_vars.count(b->var)) {
        out.perms.insert(a->text);
        continue;
      }
    }
    // A failed element comparison grants nothing.
    if (c->op == ExprOp::Not && c->kids.size() == 1 && c->kids[0]->op == ExprOp::StrEq) continue;
    out.unrecognized.push_back(render_expr(c));
  }
  return out;
}

IspeVerdict check_ispe(const Program &program, const SnapshotIndex &index, const TestDriver &first,
                       const TestDriver &second, const StmtLocator &sensitive, const ExploreOptions &opts,
                       const AppRegistry *registry, unsigned jobs) {
  auto reachable = call_graph_reachable(program, sensitive);
  for (const auto *d : {&first, &second}) {
    auto name = driver_method(program, *d).qualified();
    bool ok = false;
    for (const auto &r : reachable) ok = ok || r.method == name;
    if (!ok) throw Error(ErrorKind::Driver, "entrypoint " + name + " cannot reach " + sensitive.str());
  }
  ExploreOptions o = opts;
  o.target = sensitive;
  auto [ra, rb] = run_pair(jobs, std::function<ExploreResult()>([&] { return explore(program, index, first, o); }),
                           std::function<ExploreResult()>([&] { return explore(program, index, second, o); }));
  IspeVerdict v;
  v.sensitive = sensitive.str();
  v.first = ispe_side(ra, driver_method(program, first).qualified(), registry);
  v.second = ispe_side(rb, driver_method(program, second).qualified(), registry);
  v.inconsistent = any_unmatched(v.first, v.second) || any_unmatched(v.second, v.first);
  if (v.inconsistent) {
    v.witness = find_witness(v.first, v.second);
    if (!v.witness) {
      if (auto w = find_witness(v.second, v.first)) v.witness = std::make_pair(w->second, w->first);
    }
  }
  return v;
}

std::vector<PathReport> check_property(const Program &program, const SnapshotIndex &index, const TestDriver &driver,
                                       const PropertyBuilder &property, ExploreOptions opts) {
  opts.property = property;
  auto r = explore(program, index, driver, opts);
  std::vector<PathReport> out;
  for (auto &p : r.paths)
    if (p.status == "returned") out.push_back(std::move(p));
  return out;
}

PropertyBuilder parse_property(const std::string &text) {
  std::istringstream in(text);
  std::string head, op, rhs, extra;
  in >> head;
  if (head == "true" || head == "false") {
    if (in >> extra) throw Error(ErrorKind::Usage, "trailing text in property '" + text + "'");
    bool v = head == "true";
    return [v](const PathReport &) { return mk_bool(v); };
  }
  if (head != "ret" || !(in >> op >> rhs) || (in >> extra))
    throw Error(ErrorKind::Usage, "property must be true, false or 'ret <op> <int>': '" + text + "'");
  static const std::map<std::string, ExprOp> ops{{"==", ExprOp::Eq}, {"!=", ExprOp::Ne}, {"<", ExprOp::Lt},
                                                 {"<=", ExprOp::Le}, {">", ExprOp::Gt}, {">=", ExprOp::Ge}};
  auto it = ops.find(op);
  if (it == ops.end()) throw Error(ErrorKind::Usage, "unknown comparison '" + op + "'");
  std::int32_t n = 0;
  try {
    std::size_t used = 0;
    long long v = std::stoll(rhs, &used, 0);
    if (used != rhs.size() || v < INT32_MIN || v > INT32_MAX) throw std::out_of_range("");
    n = static_cast<std::int32_t>(v);
  } catch (const std::exception &) {
    throw Error(ErrorKind::Usage, "bad integer '" + rhs + "' in property");
  }
  ExprOp cmp = it->second;
  return [cmp, n](const PathReport &r) -> ExprRef {
    if (!r.ret) return mk_bool(false);
    return mk_binary(cmp, as_int(*r.ret), mk_int(n));
  };
}

std::map<std::string, VarDomain> registry_domains(const AppRegistry &registry) {
  std::map<std::string, VarDomain> out;
  for (const auto &[label, key] : registry.manifest_keys) {
    auto it = registry.key_domains.find(key);
    if (it == registry.key_domains.end()) continue;
    VarDomain d;
    d.strs = it->second;
    out[label] = d;
  }
  return out;
}

std::vector<std::string> legality_violations(const Manifest &overlay, const AppRegistry &registry) {
  std::vector<std::string> out;
  const auto &self = registry.skeleton();
  for (const auto &[key, values] : overlay) {
    auto dom = registry.key_domains.find(key);
    for (const auto &v : values) {
      if (key == "package") {
        const auto *other = registry.find_package(v);
        if (other && other->uid != self.uid)
          out.push_back("package '" + v + "' duplicates installed app uid " + std::to_string(other->uid));
        if (v.empty()) out.push_back("package is empty");
      }
      if (dom != registry.key_domains.end() && std::find(dom->second.begin(), dom->second.end(), v) == dom->second.end())
        out.push_back(key + " value '" + v + "' is outside its domain");
    }
  }
  return out;
}

std::vector<ExploitManifest> emit_exploits(const std::vector<PathReport> &reports, const TestDriver &driver,
                                           const AppRegistry &registry, const EmitOptions &opts) {
  SolverOptions so;
  so.step_budget = opts.solver_steps;
  for (const auto &a : registry.apps) so.string_universe.push_back(a.package);
  for (const auto &[key, dom] : registry.key_domains)
    so.string_universe.insert(so.string_universe.end(), dom.begin(), dom.end());
  std::sort(so.string_universe.begin(), so.string_universe.end());
  so.string_universe.erase(std::unique(so.string_universe.begin(), so.string_universe.end()), so.string_universe.end());

  const auto &self = registry.skeleton();
  std::vector<ExploitManifest> out;
  for (const auto &report : reports) {
    if (report.status == "budget-exhausted") continue;
    auto pc_vars = report.pc.vars();
    std::vector<Model> models;
    if (satisfies(report.pc, report.model)) {
      models.push_back(report.model);
    } else {
      so.seed = opts.seed;
      auto o = check_sat(report.pc, so);
      if (o.result != SatResult::Sat || !satisfies(report.pc, o.model))
        throw Error(ErrorKind::Solver, "path " + std::to_string(report.id) + " has no model (" +
                                           to_string(o.result) + ")");
      models.push_back(std::move(o.model));
    }
    PathCondition blocked = report.pc;
    while (models.size() < opts.model_cap && !pc_vars.empty()) {
      blocked.conjuncts.push_back(blocking_clause(pc_vars, models.back()));
      so.seed = opts.seed * 1000003u + report.id * 131u + models.size();
      auto o = check_sat(blocked, so);
      if (o.result != SatResult::Sat || !satisfies(report.pc, o.model)) break;
      models.push_back(std::move(o.model));
    }

    for (std::size_t k = 0; k < models.size(); ++k) {
      ExploitManifest m;
      m.service = driver.service;
      m.entrypoint = driver.cls + "." + driver.entrypoint;
      m.driver = driver.to_json();
      m.path_id = report.id;
      m.model_index = static_cast<std::uint32_t>(k);
      m.status = report.status;
      m.pc = report.pc.canonical();
      m.trace = report.trace;
      m.bindings = bindings_for(report, models[k]);

      // Unconstrained config inputs keep the skeleton's own value when it is
      // legal, else the first legal one.
      for (const auto &v : report.vars) {
        if (pc_vars.count(v.id)) continue;
        auto key = registry.manifest_key_for(v.label);
        if (!key) continue;
        auto &b = m.bindings[v.locator];
        if (b.sort != Sort::Str) continue;
        std::string own;
        if (*key == "package") {
          own = self.package;
        } else if (auto it = self.manifest.find(*key); it != self.manifest.end() && !it->second.empty()) {
          auto i = label_index(v.label).value_or(0);
          own = i < it->second.size() ? it->second[i] : "";
        }
        auto dom = registry.key_domains.find(*key);
        bool bounded = dom != registry.key_domains.end() && !dom->second.empty();
        auto legal = [&](const std::string &s) {
          return !s.empty() && (!bounded || std::count(dom->second.begin(), dom->second.end(), s));
        };
        if (legal(own)) b = ModelValue::of_str(own);
        else if (bounded) b = ModelValue::of_str(dom->second.front());
      }

      for (const auto &[loc, val] : m.bindings)
        if (loc.rfind("param", 0) == 0) m.params[loc] = val;

      std::map<std::string, std::map<std::size_t, std::string>> indexed;
      for (const auto &v : report.vars) {
        auto key = registry.manifest_key_for(v.label);
        if (!key) continue;
        auto it = m.bindings.find(v.locator);
        if (it == m.bindings.end() || it->second.sort == Sort::Ref) continue;
        auto text = value_text(it->second);
        if (auto i = label_index(v.label)) indexed[*key][*i] = text;
        else if (!m.overlay.count(*key)) m.overlay[*key] = {text};
      }
      for (const auto &[key, elems] : indexed) {
        std::vector<std::string> vals;
        auto base = self.manifest.find(key);
        std::size_t n = elems.rbegin()->first + 1;
        for (std::size_t i = 0; i < n; ++i) {
          auto e = elems.find(i);
          if (e != elems.end()) vals.push_back(e->second);
          else if (base != self.manifest.end() && i < base->second.size()) vals.push_back(base->second[i]);
          else vals.push_back("");
        }
        m.overlay[key] = std::move(vals);
      }
      m.violations = legality_violations(m.overlay, registry);
      m.legality = m.violations.empty();
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::set<std::string> condition_set(const ExploreResult &r) {
  std::set<std::string> out;
  for (const auto &p : r.paths) out.insert(p.status + ": " + p.pc.canonical());
  return out;
}

ConsistencyReport snapshot_consistency(const Program &program, const std::vector<const SnapshotIndex *> &snapshots,
                                       const TestDriver &driver, const ExploreOptions &opts, unsigned jobs) {
  if (snapshots.empty()) throw Error(ErrorKind::Usage, "no snapshots to compare");
  ConsistencyReport rep;
  rep.conditions.resize(snapshots.size());
  auto one = [&](std::size_t i) { return condition_set(explore(program, *snapshots[i], driver, opts)); };
  const std::size_t batch = std::max(1u, jobs);
  for (std::size_t lo = 0; lo < snapshots.size(); lo += batch) {
    std::size_t hi = std::min(snapshots.size(), lo + batch);
    if (hi - lo == 1) {
      rep.conditions[lo] = one(lo);
      continue;
    }
    std::vector<std::future<std::set<std::string>>> fs;
    for (std::size_t i = lo; i < hi; ++i) fs.push_back(std::async(std::launch::async, one, i));
    for (std::size_t i = lo; i < hi; ++i) rep.conditions[i] = fs[i - lo].get();
  }
  const auto &base = rep.conditions.front();
  for (std::size_t i = 1; i < rep.conditions.size(); ++i) {
    const auto &cur = rep.conditions[i];
    for (const auto &c : base)
      if (!cur.count(c)) rep.diffs.push_back("snapshot " + std::to_string(i) + " lacks " + c);
    for (const auto &c : cur)
      if (!base.count(c)) rep.diffs.push_back("snapshot " + std::to_string(i) + " adds " + c);
  }
  rep.equal = rep.diffs.empty();
  return rep;
}

UcseComparison compare_ucse(const Program &program, const SnapshotIndex &index, const TestDriver &driver,
                            const ExploreOptions &opts) {
  auto run = [&](ExploreMode mode) {
    ExploreOptions o = opts;
    o.mode = mode;
    auto t0 = std::chrono::steady_clock::now();
    auto r = explore(program, index, driver, o);
    auto t1 = std::chrono::steady_clock::now();
    return ModeRun{r.metrics, std::chrono::duration<double, std::milli>(t1 - t0).count()};
  };
  return {run(ExploreMode::Seeded), run(ExploreMode::Ucse)};
}

// --- structured forms -----------------------------------------------------------------

json to_json(const ModelValue &v) {
  switch (v.sort) {
  case Sort::Int: return v.num;
  case Sort::Bool: return v.num != 0;
  case Sort::Str: return v.text;
  case Sort::Ref: return json{{"null", v.is_null}};
  }
  return nullptr;
}

ModelValue model_value_from_json(const json &j) {
  if (j.is_boolean()) {
    ModelValue m = ModelValue::of_int(j.get<bool>() ? 1 : 0);
    m.sort = Sort::Bool;
    return m;
  }
  if (j.is_number_integer()) return ModelValue::of_int(j.get<std::int32_t>());
  if (j.is_string()) return ModelValue::of_str(j.get<std::string>());
  if (j.is_object() && j.contains("null")) return ModelValue::of_null(j.at("null").get<bool>());
  throw Error(ErrorKind::Usage, "bad model value " + j.dump());
}

json to_json(const BranchTrace &t) {
  json out = json::array();
  for (const auto &b : t) out.push_back({{"method", b.method}, {"pc", b.pc}, {"taken", b.taken}});
  return out;
}

BranchTrace trace_from_json(const json &j) {
  BranchTrace t;
  for (const auto &e : j) t.push_back({e.at("method").get<std::string>(), e.at("pc").get<std::uint32_t>(),
                                       e.at("taken").get<bool>()});
  return t;
}

json to_json(const ExploreMetrics &m) {
  return {{"states", m.states},
          {"paths", m.paths},
          {"dispatch_forks", m.dispatch_forks},
          {"max_dispatch_arms", m.max_dispatch_arms},
          {"pruned", m.pruned},
          {"solver_calls", m.solver_calls},
          {"unknowns", m.unknowns},
          {"migrations", m.migrations},
          {"budget_exhausted", m.budget_exhausted},
          {"invariant_violations", m.invariant_violations}};
}

json to_json(const PathReport &r) {
  json j;
  j["id"] = r.id;
  j["status"] = r.status;
  if (!r.detail.empty()) j["detail"] = r.detail;
  j["pc"] = r.pc.canonical();
  j["conjuncts"] = r.pc.readable();
  if (!r.ret_text.empty()) j["ret"] = r.ret_text;
  j["trace"] = to_json(r.trace);
  json inputs = json::object();
  for (const auto &[loc, v] : bindings_for(r, r.model)) inputs[loc] = to_json(v);
  j["inputs"] = inputs;
  json vars = json::array();
  for (const auto &v : r.vars) vars.push_back({{"label", v.label}, {"locator", v.locator}});
  j["vars"] = vars;
  json inv = json::array();
  for (const auto &e : r.inventory) {
    json vs = json::array();
    for (auto id : e.vars)
      for (const auto &v : r.vars)
        if (v.id == id) vs.push_back(v.locator);
    inv.push_back({{"op", e.op}, {"container", e.container}, {"index", e.index}, {"derivation", e.derivation},
                   {"vars", vs}});
  }
  j["inventory"] = inv;
  json mig = json::array();
  for (const auto &e : r.migration)
    mig.push_back({{"parent", e.parent}, {"via", e.via}, {"conc", e.conc}, {"sym", e.sym}});
  j["migration"] = mig;
  return j;
}

namespace {
json side_json(const IspeSide &s) {
  json paths = json::array();
  for (const auto &p : s.paths)
    paths.push_back({{"path", p.path_id}, {"pc", p.pc}, {"permissions", p.perms.perms},
                     {"unrecognized", p.perms.unrecognized}});
  json j{{"entrypoint", s.entrypoint}, {"paths", paths}, {"unconditional", s.unconditional},
         {"metrics", to_json(s.metrics)}};
  if (!s.note.empty()) j["note"] = s.note;
  return j;
}
} // namespace

json to_json(const IspeVerdict &v) {
  json j{{"sensitive", v.sensitive}, {"first", side_json(v.first)}, {"second", side_json(v.second)},
         {"inconsistent", v.inconsistent}};
  j["witness"] = v.witness ? json::array({v.witness->first, v.witness->second}) : json(nullptr);
  return j;
}

json to_json(const ExploitManifest &m) {
  json params = json::object(), bindings = json::object();
  for (const auto &[k, v] : m.params) params[k] = to_json(v);
  for (const auto &[k, v] : m.bindings) bindings[k] = to_json(v);
  return {{"service", m.service},   {"entrypoint", m.entrypoint}, {"driver", m.driver},
          {"params", params},       {"bindings", bindings},       {"overlay", m.overlay},
          {"path", m.path_id},      {"model", m.model_index},     {"status", m.status},
          {"pc", m.pc},             {"trace", to_json(m.trace)},  {"legality", m.legality},
          {"violations", m.violations}};
}

ExploitManifest manifest_from_json(const json &j) {
  try {
    ExploitManifest m;
    m.service = j.at("service").get<std::string>();
    m.entrypoint = j.at("entrypoint").get<std::string>();
    m.driver = j.at("driver");
    for (const auto &[k, v] : j.at("params").items()) m.params[k] = model_value_from_json(v);
    for (const auto &[k, v] : j.at("bindings").items()) m.bindings[k] = model_value_from_json(v);
    m.overlay = j.at("overlay").get<Manifest>();
    m.path_id = j.at("path").get<std::uint32_t>();
    m.model_index = j.value("model", 0u);
    m.status = j.at("status").get<std::string>();
    m.pc = j.at("pc").get<std::string>();
    m.trace = trace_from_json(j.at("trace"));
    m.legality = j.at("legality").get<bool>();
    m.violations = j.value("violations", std::vector<std::string>{});
    return m;
  } catch (const json::exception &e) {
    throw Error(ErrorKind::Usage, std::string("malformed manifest: ") + e.what());
  }
}

json to_json(const ConsistencyReport &r) {
  json sets = json::array();
  for (const auto &s : r.conditions) sets.push_back(s);
  return {{"equal", r.equal}, {"conditions", sets}, {"diffs", r.diffs}};
}

json to_json(const UcseComparison &c, bool timings) {
  auto mode = [&](const ModeRun &m) {
    json j = to_json(m.metrics);
    if (timings) j["wall_ms"] = m.wall_ms;
    return j;
  };
  return {{"seeded", mode(c.seeded)}, {"ucse", mode(c.ucse)}};
}

// --- text forms -------------------------------------------------------------------------

std::string path_text(const PathReport &r) {
  std::ostringstream o;
  o << "path " << r.id << " [" << r.status << "]";
  if (!r.detail.empty()) o << " " << r.detail;
  if (!r.ret_text.empty()) o << " ret=" << r.ret_text;
  o << "\n  pc: " << r.pc.canonical() << "\n";
  for (const auto &e : r.inventory)
    o << "  input: " << e.op << " " << e.container << "[" << e.index << "] via " << e.derivation << "\n";
  for (const auto &[loc, v] : bindings_for(r, r.model)) o << "  " << loc << " = " << v.str() << "\n";
  return o.str();
}

namespace {
void side_text(std::ostringstream &o, const IspeSide &s) {
  o << s.entrypoint << ": " << s.paths.size() << " feasible path(s)";
  if (s.unconditional) o << " ---";
  if (!s.note.empty()) o << " (" << s.note << ")";
  o << "\n";
  for (const auto &p : s.paths) {
    o << "  path " << p.path_id << " {";
    bool first = true;
    for (const auto &perm : p.perms.perms) {
      o << (first ? "" : ", ") << perm;
      first = false;
    }
    o << "}\n";
    for (const auto &u : p.perms.unrecognized) o << "    unrecognized: " << u << "\n";
  }
}
} // namespace

std::string verdict_text(const IspeVerdict &v) {
  std::ostringstream o;
  o << "sensitive " << v.sensitive << "\n";
  side_text(o, v.first);
  side_text(o, v.second);
  o << "verdict: " << (v.inconsistent ? "inconsistent" : "consistent");
  if (v.witness) o << " (witness paths " << v.witness->first << " vs " << v.witness->second << ")";
  o << "\n";
  return o.str();
}

std::string manifest_text(const ExploitManifest &m) {
  std::ostringstream o;
  o << m.entrypoint << " path " << m.path_id << " model " << m.model_index << " "
    << (m.legality ? "legal" : "illegal") << "\n  pc: " << m.pc << "\n";
  for (const auto &[k, v] : m.params) o << "  " << k << " = " << v.str() << "\n";
  for (const auto &[k, vals] : m.overlay) {
    o << "  " << k << ":";
    for (const auto &v : vals) o << " " << v;
    o << "\n";
  }
  for (const auto &v : m.violations) o << "  violation: " << v << "\n";
  return o.str();
}

std::string consistency_text(const ConsistencyReport &r) {
  std::ostringstream o;
  o << (r.equal ? "equal" : "divergent") << " across " << r.conditions.size() << " snapshot(s)\n";
  for (std::size_t i = 0; i < r.conditions.size(); ++i)
    o << "  snapshot " << i << ": " << r.conditions[i].size() << " condition(s)\n";
  for (const auto &d : r.diffs) o << "  " << d << "\n";
  return o.str();
}

std::string comparison_text(const UcseComparison &c, bool timings) {
  std::ostringstream o;
  auto line = [&](const char *name, const ModeRun &m) {
    o << name << ": states=" << m.metrics.states << " paths=" << m.metrics.paths
      << " dispatch-forks=" << m.metrics.dispatch_forks << " max-arms=" << m.metrics.max_dispatch_arms
      << " budget-exhausted=" << (m.metrics.budget_exhausted ? "yes" : "no");
    if (timings) o << " wall-ms=" << static_cast<long long>(m.wall_ms);
    o << "\n";
  };
  line("seeded", c.seeded);
  line("ucse", c.ucse);
  return o.str();
}

} // namespace snapseed
