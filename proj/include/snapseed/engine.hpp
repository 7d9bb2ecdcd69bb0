//===-- engine.hpp - Symbolic interpreter and slim tainting -----*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
//
// Explores an entrypoint depth-first starting from a snapshot. Heap data
// migrates lazily from the concrete snapshot into the symbolic heap on
// first read; conc2sym keeps that translation one-to-one per path. Values
// derived from the skeleton's uid or package name carry taint labels, and
// container reads keyed by such values turn the element into symbolic
// input.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/driver.hpp"
#include "snapseed/expr.hpp"
#include "snapseed/heap.hpp"
#include "snapseed/solver.hpp"
#include "snapseed/vm.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace snapseed {

class ExternHost;
class SnapshotIndex;

struct TaintLabel {
  bool uid = false; // derived from the skeleton uid
  bool pkg = false; // derived from the skeleton package name
  std::string derivation;
  friend bool operator==(const TaintLabel &, const TaintLabel &) = default;
};
using TaintRef = std::shared_ptr<const TaintLabel>;

/// Taint of `op` applied to operands with labels `a` and `b`. Only mod and
/// sub keep uid labels; every other arithmetic opcode strips them.
TaintRef propagate_taint(Opcode op, const TaintRef &a, const TaintRef &b, std::int32_t rhs, std::int32_t result);

struct SemValue {
  enum class Kind : std::uint8_t { Int, Null, Ref, Sym };
  Kind kind = Kind::Null;
  std::int32_t num = 0;
  HeapId ref = kNullId; // symbolic-world id, or concrete id in snapshot slots
  ExprRef expr;         // Sym: Int-sorted expression
  TaintRef taint;

  static SemValue of_int(std::int32_t v, TaintRef t = nullptr) { return {Kind::Int, v, kNullId, nullptr, std::move(t)}; }
  static SemValue null() { return {}; }
  static SemValue of_ref(HeapId id, TaintRef t = nullptr) {
    return id == kNullId ? null() : SemValue{Kind::Ref, 0, id, nullptr, std::move(t)};
  }
  static SemValue sym(ExprRef e);
  bool is_ref() const { return kind == Kind::Ref; }
  bool is_int() const { return kind == Kind::Int || kind == Kind::Sym; }
  ExprRef as_expr() const { return kind == Kind::Sym ? expr : mk_int(num); }
};

struct Slot {
  SemValue v;
  bool snapshot_ref = false; // v.ref is a concrete-world id awaiting migration
  bool semi = false;         // symbolize the pointee on its next read
  bool lazy = false;         // materialize a fresh input on first read
};

struct CellMeta {
  HeapId conc = kNullId; // origin in the snapshot, 0 when created on the path
  bool handled = false;  // symbolicHandled
  bool lazy = false;
  bool exact = true;     // dynamic type known
  std::string label;     // field the cell was first reached through
  std::string loc;       // locator text of the cell
};

struct SymObject {
  CellMeta meta;
  std::string cls;
  std::vector<Slot> fields;
};
struct SymArray {
  CellMeta meta;
  Type elem;
  std::vector<Slot> values; // with sym_len: the prefix known to be in bounds
  ExprRef sym_len;          // lazily initialized arrays of unknown length
};
struct SymString {
  CellMeta meta;
  ExprRef text; // StrConst when concrete
};
struct SymCollection {
  CellMeta meta;
  Type::Kind kind = Type::Kind::List;
  Type key;
  Type elem;
  std::vector<Slot> items; // with sym_len: the prefix known to be in bounds
  std::vector<std::pair<KeyAtom, Slot>> entries; // sorted by key
  ExprRef sym_len;
};
using SymCell = std::variant<SymObject, SymArray, SymString, SymCollection>;

struct VarInfo {
  std::uint32_t id = 0;
  Sort sort = Sort::Int;
  std::string label;   // e.g. "PackageSetting.grantedPermissions[0]"
  std::string locator; // where replay writes the value
  VarDomain domain;
};

struct InventoryEntry {
  std::string op;        // aaload, iaload, list.get, map.get, sparse.get, bootstrap
  std::string container; // locator of the container
  std::string index;     // index or key text
  std::vector<std::uint32_t> vars;
  std::string derivation; // taint history of the index or key
  HeapId element_conc = kNullId;
};

struct MigrationEdge {
  std::string parent; // "driver", "class C", or the parent's locator
  std::string via;    // getfield C.f, getstatic C.f, aaload, list.get, map.get, initClass
  HeapId conc = kNullId;
  HeapId sym = kNullId;
};

struct Frame {
  const MethodDef *method = nullptr;
  std::uint32_t pc = 0;
  std::vector<SemValue> locals;
  std::vector<SemValue> stack;
  bool reexec = false; // class initializer: caller re-executes its instruction
};

struct ClassSlots {
  bool initialized = false;
  std::vector<Slot> statics;
};

struct SymState {
  std::vector<Frame> frames;
  std::vector<std::shared_ptr<SymCell>> heap{nullptr}; // index 0 is null
  std::map<std::string, ClassSlots> classes;
  std::map<HeapId, HeapId> conc2sym;
  std::map<HeapId, HeapId> sym2conc;
  std::map<HeapId, std::uint32_t> migrations; // per concrete id, for audits
  std::map<std::string, HeapId> pool;         // literal pool
  PathCondition pc;
  BranchTrace trace;
  std::vector<MigrationEdge> migration;
  std::vector<InventoryEntry> inventory;
  std::vector<VarInfo> vars;
  std::map<std::string, std::int32_t> extern_calls;
  Model model;       // satisfies pc when model_valid
  bool model_valid = true;
  std::uint64_t steps = 0;
  std::uint64_t allocations = 0;
  std::optional<SemValue> ret;

  const SymCell &cell(HeapId id) const { return *heap.at(id); }
  SymCell &mut(HeapId id);
  HeapId alloc(SymCell c);
};

/// Deterministic digest over the whole state.
std::uint64_t state_fingerprint(const SymState &s);
/// Empty when conc2sym, the migration audit and snapshotRef slots are
/// consistent; otherwise a description of the first violation.
std::string check_state_invariants(const SymState &s, const SnapshotIndex &index);

enum class ExploreMode : std::uint8_t { Seeded, Ucse };
const char *to_string(ExploreMode m);

struct Budget {
  std::uint64_t max_depth = 200'000; // instructions per path
  std::uint64_t max_states = 20'000;
  std::uint64_t solver_steps = 500'000;
  std::uint32_t max_call_depth = 256;
};

struct PathReport {
  std::uint32_t id = 0;
  std::string status; // returned, reached-target, guest-trap, budget-exhausted
  std::string detail;
  PathCondition pc;
  BranchTrace trace;
  std::vector<MigrationEdge> migration;
  std::vector<InventoryEntry> inventory;
  std::vector<VarInfo> vars;
  Model model;
  std::optional<ExprRef> ret; // integer results
  std::string ret_text;       // rendering of any result
};

struct ExploreMetrics {
  std::uint64_t states = 0;
  std::uint64_t paths = 0;
  std::uint64_t dispatch_forks = 0;
  std::uint64_t max_dispatch_arms = 0;
  std::uint64_t pruned = 0;
  std::uint64_t solver_calls = 0;
  std::uint64_t unknowns = 0;
  std::uint64_t migrations = 0;
  bool budget_exhausted = false;
  std::vector<std::string> invariant_violations;
};

/// Terminal-state constraint conjoined before the final check.
using PropertyBuilder = std::function<ExprRef(const PathReport &)>;

struct ExploreOptions {
  ExploreMode mode = ExploreMode::Seeded;
  Budget budget;
  std::optional<StmtLocator> target;
  PropertyBuilder property;
  std::uint64_t seed = 0;
  /// Domains by variable label, merged under the driver's own.
  std::map<std::string, VarDomain> domains;
  std::int32_t max_lazy_length = 3;
  ExternHost *host = nullptr;
  /// Audit invariants after every migration and backtrack (slow).
  bool check_invariants = false;
  /// Explore fork arms in a seeded random order.
  bool shuffle = false;
};

struct ExploreResult {
  std::vector<PathReport> paths;
  ExploreMetrics metrics;
};

ExploreResult explore(const Program &program, const SnapshotIndex &index, const TestDriver &driver,
                      const ExploreOptions &opts);

/// Value for every symbolic input of `report`: the solver model extended
/// with domain defaults for variables the path never constrained.
Bindings bindings_for(const PathReport &report, const Model &model);

} // namespace snapseed
