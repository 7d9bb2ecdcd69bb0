//===-- analyses.hpp - Checkers built on exploration ------------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
//
// Permission-consistency checking across entrypoints, terminal-state
// property checks, exploit manifest emission with legality filtering,
// cross-snapshot consistency, and the comparison against UCSE.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/engine.hpp"
#include "snapseed/registry.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace snapseed {

/// Permissions a path requires: atoms equated with a skeleton permission
/// element. Conjuncts over permission elements of any other shape are kept
/// verbatim in `unrecognized`.
struct PermissionSet {
  std::set<std::string> perms;
  std::vector<std::string> unrecognized;
  friend bool operator==(const PermissionSet &a, const PermissionSet &b) { return a.perms == b.perms; }
};

/// `registry` may be null; permission elements are then recognized by a
/// label whose field name contains "permission".
PermissionSet extract_permissions(const PathReport &report, const AppRegistry *registry);

struct IspePath {
  std::uint32_t path_id = 0;
  PermissionSet perms;
  std::string pc;
  BranchTrace trace;
};

struct IspeSide {
  std::string entrypoint;
  std::vector<IspePath> paths; // feasible paths reaching the statement
  /// Exactly one feasible path with a constantly-true condition.
  bool unconditional = false;
  std::string note;
  ExploreMetrics metrics;
};

struct IspeVerdict {
  std::string sensitive;
  IspeSide first;
  IspeSide second;
  bool inconsistent = false;
  std::optional<std::pair<std::uint32_t, std::uint32_t>> witness;
};

/// Throws Error(Driver) when an entrypoint cannot statically reach the
/// statement.
IspeVerdict check_ispe(const Program &program, const SnapshotIndex &index, const TestDriver &first,
                       const TestDriver &second, const StmtLocator &sensitive, const ExploreOptions &opts,
                       const AppRegistry *registry = nullptr, unsigned jobs = 1);

/// Returned paths whose condition stays satisfiable with `property`
/// conjoined at the terminal state.
std::vector<PathReport> check_property(const Program &program, const SnapshotIndex &index, const TestDriver &driver,
                                       const PropertyBuilder &property, ExploreOptions opts);

/// Parses "true", "false" or "ret <op> <int>" with op one of == != < <= > >=.
PropertyBuilder parse_property(const std::string &text);

struct ExploitManifest {
  std::string service;
  std::string entrypoint;
  nlohmann::json driver;
  Bindings params;   // entrypoint parameters
  Bindings bindings; // every symbolic input, by locator
  Manifest overlay;  // skeleton app configuration
  std::uint32_t path_id = 0;
  std::uint32_t model_index = 0;
  std::string status;
  std::string pc;
  BranchTrace trace;
  bool legality = true;
  std::vector<std::string> violations;
};

struct EmitOptions {
  std::size_t model_cap = 4;
  std::uint64_t seed = 0;
  std::uint64_t solver_steps = 500'000;
};

/// Throws Error(Solver) for a report whose condition cannot be solved.
std::vector<ExploitManifest> emit_exploits(const std::vector<PathReport> &reports, const TestDriver &driver,
                                           const AppRegistry &registry, const EmitOptions &opts = {});

/// Variable domains from the registry's manifest-key table, keyed by label.
std::map<std::string, VarDomain> registry_domains(const AppRegistry &registry);

/// Why `overlay` is illegal for the skeleton; empty when legal.
std::vector<std::string> legality_violations(const Manifest &overlay, const AppRegistry &registry);

struct ConsistencyReport {
  std::vector<std::set<std::string>> conditions; // per snapshot
  bool equal = true;
  std::vector<std::string> diffs;
};

/// Path-condition set of one exploration: "status: canonical pc" per path.
std::set<std::string> condition_set(const ExploreResult &r);

ConsistencyReport snapshot_consistency(const Program &program, const std::vector<const SnapshotIndex *> &snapshots,
                                       const TestDriver &driver, const ExploreOptions &opts, unsigned jobs = 1);

struct ModeRun {
  ExploreMetrics metrics;
  double wall_ms = 0;
};

struct UcseComparison {
  ModeRun seeded;
  ModeRun ucse;
};

UcseComparison compare_ucse(const Program &program, const SnapshotIndex &index, const TestDriver &driver,
                            const ExploreOptions &opts);

// Structured forms.
nlohmann::json to_json(const ModelValue &v);
ModelValue model_value_from_json(const nlohmann::json &j);
nlohmann::json to_json(const BranchTrace &t);
BranchTrace trace_from_json(const nlohmann::json &j);
nlohmann::json to_json(const ExploreMetrics &m);
nlohmann::json to_json(const PathReport &r);
nlohmann::json to_json(const IspeVerdict &v);
nlohmann::json to_json(const ExploitManifest &m);
ExploitManifest manifest_from_json(const nlohmann::json &j);
nlohmann::json to_json(const ConsistencyReport &r);
nlohmann::json to_json(const UcseComparison &c, bool timings);

// Text forms.
std::string path_text(const PathReport &r);
std::string verdict_text(const IspeVerdict &v);
std::string manifest_text(const ExploitManifest &m);
std::string consistency_text(const ConsistencyReport &r);
std::string comparison_text(const UcseComparison &c, bool timings);

} // namespace snapseed
