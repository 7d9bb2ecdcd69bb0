// snapseed: command-line front end.
//
// Exit codes: 0 ok, 1 findings (inconsistent verdict, property paths,
// divergent snapshots, replay mismatch), 2 errors.

#include "snapseed/analyses.hpp"
#include "snapseed/extern_host.hpp"
#include "snapseed/snapshot.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>

using namespace snapseed;
using nlohmann::json;

namespace {

struct Common {
  std::string prog;
  std::string snap;
  std::string apps;
  std::string ep;
  std::string mode = "seeded";
  std::string target;
  std::string out;
  std::string format = "text";
  std::string extern_host;
  std::uint64_t depth = Budget{}.max_depth;
  std::uint64_t states = Budget{}.max_states;
  std::uint64_t solver_steps = Budget{}.solver_steps;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool seed_given = false;
};

struct Loaded {
  Program program;
  std::optional<SnapshotIndex> index;
  std::optional<AppRegistry> apps;
  std::unique_ptr<ExternHost> host;
};

void add_io(CLI::App *cmd, Common &c) {
  cmd->add_option("--out", c.out, "Write the report here instead of stdout");
  cmd->add_option("--format", c.format, "text or structured")->check(CLI::IsMember({"text", "structured"}));
}

void add_exploration(CLI::App *cmd, Common &c, bool need_ep) {
  cmd->add_option("--prog", c.prog, "Program assembly")->required()->check(CLI::ExistingFile);
  cmd->add_option("--snap", c.snap, "Snapshot document")->required()->check(CLI::ExistingFile);
  cmd->add_option("--apps", c.apps, "App registry")->check(CLI::ExistingFile);
  if (need_ep) cmd->add_option("--ep,--driver", c.ep, "Entrypoint name or driver file")->required();
  cmd->add_option("--mode", c.mode, "seeded or ucse")->check(CLI::IsMember({"seeded", "ucse"}));
  cmd->add_option("--depth", c.depth, "Instructions per path");
  cmd->add_option("--states", c.states, "States per exploration");
  cmd->add_option("--solver-steps", c.solver_steps, "Solver steps per query");
  cmd->add_option("--seed", c.seed, "Seed (SNAPSEED_SEED when absent)");
  cmd->add_option("--extern-host", c.extern_host, "Command serving delegated externs");
  cmd->add_option("--jobs", c.jobs, "Parallel explorations")->check(CLI::PositiveNumber);
  add_io(cmd, c);
}

std::uint64_t effective_seed(const Common &c) {
  if (c.seed_given) return c.seed;
  if (const char *env = std::getenv("SNAPSEED_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception &) {
      throw Error(ErrorKind::Usage, "SNAPSEED_SEED must be an unsigned integer");
    }
  }
  return 0;
}

Loaded load(const Common &c) {
  Loaded l{assemble_file(c.prog), std::nullopt, std::nullopt, nullptr};
  if (!c.snap.empty()) {
    l.index = SnapshotIndex::load_file(c.snap);
    l.index->check_compatible(l.program);
  }
  if (!c.apps.empty()) l.apps = AppRegistry::from_file(c.apps);
  if (!c.extern_host.empty()) l.host = std::make_unique<ProcessExternHost>(c.extern_host);
  return l;
}

TestDriver driver_for(const Loaded &l, const std::string &ep) {
  if (ep.size() > 5 && ep.ends_with(".json") && std::filesystem::exists(ep)) return load_driver_file(ep, l.program);
  return auto_driver(l.program, *l.index, ep);
}

ExploreOptions options_for(const Common &c, const Loaded &l) {
  ExploreOptions o;
  o.mode = c.mode == "ucse" ? ExploreMode::Ucse : ExploreMode::Seeded;
  o.budget.max_depth = c.depth;
  o.budget.max_states = c.states;
  o.budget.solver_steps = c.solver_steps;
  o.seed = effective_seed(c);
  if (!c.target.empty()) o.target = l.program.parse_locator(c.target);
  if (l.apps) o.domains = registry_domains(*l.apps);
  o.host = l.host.get();
  return o;
}

void emit(const Common &c, const std::string &text) {
  if (c.out.empty()) std::cout << text;
  else write_text_file(c.out, text);
}

void emit(const Common &c, const json &doc, const std::string &text) {
  emit(c, c.format == "structured" ? doc.dump(2) + "\n" : text);
}

std::string ret_text(const ReplayResult &r) {
  if (!r.ret) return "";
  const auto &v = *r.ret;
  if (v.kind == CValue::Kind::Int) return std::to_string(v.num);
  if (v.kind == CValue::Kind::Null) return "null";
  if (const auto *s = std::get_if<CString>(&r.heap.cell(v.id))) return json(s->text).dump();
  return "#" + std::to_string(v.id);
}

std::string absolute(const std::string &p) { return p.empty() ? p : std::filesystem::absolute(p).string(); }

int cmd_asm(const std::string &file, const Common &c) {
  emit(c, render(assemble_file(file)));
  return 0;
}

int cmd_init(const Common &c, const std::string &config) {
  auto program = assemble_file(c.prog);
  auto apps = AppRegistry::from_file(c.apps);
  SysConfig sys = config.empty() ? SysConfig{} : sys_config_from_file(config);
  std::unique_ptr<ExternHost> host;
  if (!c.extern_host.empty()) host = std::make_unique<ProcessExternHost>(c.extern_host);
  auto heap = run_init(program, sys, apps, host.get());
  emit(c, snapshot_text(dump_snapshot(program, heap, apps)));
  return 0;
}

int cmd_explore(const Common &c) {
  auto l = load(c);
  auto d = driver_for(l, c.ep);
  auto r = explore(l.program, *l.index, d, options_for(c, l));
  json doc{{"entrypoint", driver_method(l.program, d).qualified()},
           {"mode", c.mode},
           {"metrics", to_json(r.metrics)}};
  doc["paths"] = json::array();
  std::string text = doc["entrypoint"].get<std::string>() + " (" + c.mode + "): " + std::to_string(r.paths.size()) +
                     " path(s), " + std::to_string(r.metrics.states) + " state(s)" +
                     (r.metrics.budget_exhausted ? ", budget exhausted" : "") + "\n";
  for (const auto &p : r.paths) {
    doc["paths"].push_back(to_json(p));
    text += path_text(p);
  }
  emit(c, doc, text);
  return 0;
}

int cmd_ispe(const Common &c, const std::string &ep1, const std::string &ep2) {
  auto l = load(c);
  auto a = driver_for(l, ep1);
  auto b = driver_for(l, ep2);
  auto v = check_ispe(l.program, *l.index, a, b, l.program.parse_locator(c.target), options_for(c, l),
                      l.apps ? &*l.apps : nullptr, c.jobs);
  emit(c, to_json(v), verdict_text(v));
  return v.inconsistent ? 1 : 0;
}

int cmd_prop_check(const Common &c, const std::string &property) {
  auto l = load(c);
  auto d = driver_for(l, c.ep);
  auto paths = check_property(l.program, *l.index, d, parse_property(property), options_for(c, l));
  json doc{{"entrypoint", driver_method(l.program, d).qualified()}, {"property", property}};
  doc["paths"] = json::array();
  std::string text = std::to_string(paths.size()) + " path(s) satisfy " + property + "\n";
  for (const auto &p : paths) {
    doc["paths"].push_back(to_json(p));
    text += path_text(p);
  }
  emit(c, doc, text);
  return paths.empty() ? 0 : 1;
}

int cmd_emit(const Common &c, const std::string &property, std::size_t cap) {
  auto l = load(c);
  if (!l.apps) throw Error(ErrorKind::Usage, "emit-exploits needs --apps");
  auto d = driver_for(l, c.ep);
  auto opts = options_for(c, l);
  std::vector<PathReport> reports;
  if (!property.empty()) {
    reports = check_property(l.program, *l.index, d, parse_property(property), opts);
  } else {
    for (auto &p : explore(l.program, *l.index, d, opts).paths)
      if (p.status != "budget-exhausted") reports.push_back(std::move(p));
  }
  EmitOptions eo;
  eo.model_cap = cap;
  eo.seed = opts.seed;
  eo.solver_steps = c.solver_steps;
  auto ms = emit_exploits(reports, d, *l.apps, eo);
  json doc = json::array();
  std::string text;
  for (const auto &m : ms) {
    auto j = to_json(m);
    j["files"] = {{"program", absolute(c.prog)}, {"snapshot", absolute(c.snap)}, {"apps", absolute(c.apps)}};
    if (!property.empty()) j["property"] = property;
    doc.push_back(j);
    text += manifest_text(m);
  }
  emit(c, doc, text);
  return 0;
}

int cmd_replay(Common c, const std::string &manifest_path) {
  json doc;
  try {
    doc = json::parse(read_text_file(manifest_path));
  } catch (const json::exception &e) {
    throw Error(ErrorKind::Usage, std::string("malformed manifest file: ") + e.what());
  }
  if (!doc.is_array()) doc = json::array({doc});
  if (doc.empty()) throw Error(ErrorKind::Usage, "manifest file is empty");
  const auto &files = doc[0].value("files", json::object());
  if (c.prog.empty()) c.prog = files.value("program", "");
  if (c.snap.empty()) c.snap = files.value("snapshot", "");
  if (c.apps.empty()) c.apps = files.value("apps", "");
  if (c.prog.empty() || c.snap.empty()) throw Error(ErrorKind::Usage, "replay needs --prog and --snap");
  auto l = load(c);
  bool all = true;
  json out = json::array();
  std::string text;
  for (const auto &j : doc) {
    auto m = manifest_from_json(j);
    auto d = parse_driver(m.driver, l.program);
    ReplayRequest req{&l.program, &*l.index, &d};
    req.bindings = m.bindings;
    req.overlay = m.overlay;
    req.registry = l.apps ? &*l.apps : nullptr;
    req.host = l.host.get();
    auto r = replay(req);
    bool match = r.trace == m.trace;
    all = all && match;
    json e{{"path", m.path_id}, {"model", m.model_index}, {"trace-match", match}, {"status", r.status}};
    if (!r.trap.empty()) e["trap"] = r.trap;
    if (r.ret) e["ret"] = ret_text(r);
    out.push_back(e);
    text += "path " + std::to_string(m.path_id) + " model " + std::to_string(m.model_index) +
            ": trace-match=" + (match ? "true" : "false") + " status=" + r.status +
            (r.ret ? " ret=" + ret_text(r) : "") + "\n";
  }
  emit(c, out, text);
  return all ? 0 : 1;
}

int cmd_snap_diff(const Common &c, const std::vector<std::string> &snaps) {
  Common base = c;
  base.snap = snaps.front();
  auto l = load(base);
  std::vector<SnapshotIndex> owned;
  owned.reserve(snaps.size());
  for (const auto &s : snaps) {
    owned.push_back(SnapshotIndex::load_file(s));
    owned.back().check_compatible(l.program);
  }
  std::vector<const SnapshotIndex *> ptrs;
  for (const auto &s : owned) ptrs.push_back(&s);
  auto d = driver_for(l, c.ep);
  auto rep = snapshot_consistency(l.program, ptrs, d, options_for(c, l), c.jobs);
  emit(c, to_json(rep), consistency_text(rep));
  return rep.equal ? 0 : 1;
}

int cmd_compare(const Common &c, bool timings) {
  auto l = load(c);
  auto d = driver_for(l, c.ep);
  auto cmp = compare_ucse(l.program, *l.index, d, options_for(c, l));
  emit(c, to_json(cmp, timings), comparison_text(cmp, timings));
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Snapshot-seeded symbolic execution"};
  app.require_subcommand(1);
  Common c;

  std::string asm_file;
  auto *asm_cmd = app.add_subcommand("asm", "Assemble and print the canonical form");
  asm_cmd->add_option("file", asm_file)->required()->check(CLI::ExistingFile);
  add_io(asm_cmd, c);

  std::string config;
  auto *init = app.add_subcommand("init", "Run initialization and dump a snapshot");
  init->add_option("--prog", c.prog)->required()->check(CLI::ExistingFile);
  init->add_option("--apps", c.apps)->required()->check(CLI::ExistingFile);
  init->add_option("--config", config, "System configuration")->check(CLI::ExistingFile);
  init->add_option("--extern-host", c.extern_host);
  add_io(init, c);

  auto *exp = app.add_subcommand("explore", "Explore one entrypoint");
  add_exploration(exp, c, true);
  exp->add_option("--target", c.target, "Statement locator");

  std::string ep1, ep2;
  auto *ispe = app.add_subcommand("ispe", "Compare permissions of two entrypoints reaching a statement");
  add_exploration(ispe, c, false);
  ispe->add_option("--ep1", ep1)->required();
  ispe->add_option("--ep2", ep2)->required();
  ispe->add_option("--target", c.target, "Sensitive statement")->required();

  std::string property;
  auto *prop = app.add_subcommand("prop-check", "Paths whose terminal state can satisfy a property");
  add_exploration(prop, c, true);
  prop->add_option("--property", property, "true, false or 'ret <op> N'")->required();

  std::size_t cap = 4;
  auto *emit_cmd = app.add_subcommand("emit-exploits", "Solve paths into exploit manifests");
  add_exploration(emit_cmd, c, true);
  emit_cmd->add_option("--property", property, "Restrict to paths satisfying this property");
  emit_cmd->add_option("--target", c.target, "Statement locator");
  emit_cmd->add_option("--cap", cap, "Models per path")->check(CLI::PositiveNumber);

  std::string manifest;
  auto *rep = app.add_subcommand("replay", "Replay manifests concretely");
  rep->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  rep->add_option("--prog", c.prog)->check(CLI::ExistingFile);
  rep->add_option("--snap", c.snap)->check(CLI::ExistingFile);
  rep->add_option("--apps", c.apps)->check(CLI::ExistingFile);
  rep->add_option("--extern-host", c.extern_host);
  add_io(rep, c);

  std::vector<std::string> snaps;
  auto *diff = app.add_subcommand("snap-diff", "Compare path conditions across snapshots");
  diff->add_option("--prog", c.prog)->required()->check(CLI::ExistingFile);
  diff->add_option("--snap", snaps, "Snapshot (repeat)")->required()->check(CLI::ExistingFile);
  diff->add_option("--apps", c.apps)->check(CLI::ExistingFile);
  diff->add_option("--ep,--driver", c.ep)->required();
  diff->add_option("--mode", c.mode)->check(CLI::IsMember({"seeded", "ucse"}));
  diff->add_option("--depth", c.depth);
  diff->add_option("--states", c.states);
  diff->add_option("--solver-steps", c.solver_steps);
  diff->add_option("--seed", c.seed);
  diff->add_option("--extern-host", c.extern_host);
  diff->add_option("--jobs", c.jobs)->check(CLI::PositiveNumber);
  add_io(diff, c);

  bool timings = false;
  auto *cmp = app.add_subcommand("compare-ucse", "Seeded versus under-constrained exploration");
  add_exploration(cmp, c, true);
  cmp->add_flag("--timings", timings, "Include wall time (not reproducible)");

  auto *query = app.add_subcommand("query", "Answer snapshot queries on stdin, one JSON object per line");
  query->add_option("--snap", c.snap)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }
  for (auto *sub : app.get_subcommands())
    for (auto *opt : sub->get_options())
      if (opt->get_name() == "--seed" && opt->count() > 0) c.seed_given = true;

  try {
    if (*asm_cmd) return cmd_asm(asm_file, c);
    if (*init) return cmd_init(c, config);
    if (*exp) return cmd_explore(c);
    if (*ispe) return cmd_ispe(c, ep1, ep2);
    if (*prop) return cmd_prop_check(c, property);
    if (*emit_cmd) return cmd_emit(c, property, cap);
    if (*rep) return cmd_replay(c, manifest);
    if (*diff) return cmd_snap_diff(c, snaps);
    if (*cmp) return cmd_compare(c, timings);
    if (*query) {
      serve_queries(SnapshotIndex::load_file(c.snap), std::cin, std::cout);
      return 0;
    }
  } catch (const SyntaxError &e) {
    std::cerr << "error (syntax): " << e.what() << "\n";
    return 2;
  } catch (const Error &e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
