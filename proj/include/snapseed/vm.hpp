//===-- vm.hpp - Concrete interpreter ---------------------------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
//
// Runs the initialization phase to build the heap that gets snapshotted,
// and replays an entrypoint on a restored snapshot with solved inputs.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/driver.hpp"
#include "snapseed/heap.hpp"
#include "snapseed/registry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace snapseed {

class ExternHost;
class SnapshotIndex;

struct BranchRecord {
  std::string method; // qualified
  std::uint32_t pc = 0;
  bool taken = false;
  friend bool operator==(const BranchRecord &, const BranchRecord &) = default;
};
using BranchTrace = std::vector<BranchRecord>;

std::string trace_text(const BranchTrace &trace);

/// Runs `program.entry_method` concretely. Traps are fatal (Error GuestTrap).
HeapState run_init(const Program &program, const SysConfig &config, const AppRegistry &apps,
                   ExternHost *host = nullptr);

/// One container read observed during replay.
struct AccessRecord {
  std::string op; // aaload, iaload, list.get, map.get, sparse.get
  HeapId container = kNullId;
  std::string index; // index or key as text
  CValue element;
};

struct ReplayRequest {
  const Program *program = nullptr;
  const SnapshotIndex *snapshot = nullptr;
  const TestDriver *driver = nullptr;
  Bindings bindings;
  /// App-config overrides for the skeleton, applied after bindings.
  Manifest overlay;
  /// Needed for overlays: maps field labels to manifest keys.
  const AppRegistry *registry = nullptr;
  std::optional<StmtLocator> target;
  ExternHost *host = nullptr;
  std::uint64_t max_steps = 10'000'000;
};

struct ReplayResult {
  BranchTrace trace;
  std::string status; // returned, reached-target, guest-trap
  std::string trap;
  std::optional<CValue> ret;
  HeapState heap;
  std::vector<AccessRecord> accesses;
};

/// Throws Error(Solver) when a symbolic parameter the run needs is unbound.
ReplayResult replay(const ReplayRequest &req);

/// Objects of the snapshot holding the skeleton's package or uid.
std::vector<HeapId> skeleton_objects(const SnapshotIndex &index);

} // namespace snapseed
