//===-- isa.hpp - Guest bytecode language -----------------------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
//
// The guest is a small JVM-like stack machine: classes with single
// inheritance, instance and static fields, virtual dispatch, heap strings,
// arrays, and collections exposed as interceptable intrinsics. Programs are
// written in a line-oriented assembly and are immutable once assembled.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/common.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace snapseed {

struct Type {
  enum class Kind : std::uint8_t { Void, Int, Bool, Str, Ref, Arr, List, Map, Sparse };

  Kind kind = Kind::Void;
  std::string cls;                  // Ref
  std::shared_ptr<const Type> elem; // Arr, List, Map (value), Sparse
  std::shared_ptr<const Type> key;  // Map

  static Type make(Kind k) { Type t; t.kind = k; return t; }
  static Type ref(std::string cls);
  static Type container(Kind k, Type elem);
  static Type map(Type key, Type value);

  /// Parses `int`, `bool`, `str`, `void`, `ref<C>`, `arr<T>`, `list<T>`,
  /// `map<K,V>`, `sparse<T>`; a bare identifier is shorthand for `ref<C>`.
  static Type parse(std::string_view text);
  std::string str() const;

  /// int, bool and str: values that become plain symbolic variables.
  bool is_scalar() const {
    return kind == Kind::Int || kind == Kind::Bool || kind == Kind::Str;
  }
  bool is_numeric() const { return kind == Kind::Int || kind == Kind::Bool; }
  bool is_heap_ref() const {
    return kind == Kind::Ref || kind == Kind::Arr || kind == Kind::List ||
           kind == Kind::Map || kind == Kind::Sparse || kind == Kind::Str;
  }

  friend bool operator==(const Type &a, const Type &b);
};

enum class Opcode : std::uint8_t {
  Const, Load, Store, Dup, Pop, Swap,
  Add, Sub, Mul, Div, Mod, And, Or, Xor, Shl, Shr,
  IfEq, IfNe, IfLt, IfGe, IfGt, IfLe,
  IfICmpEq, IfICmpNe, IfICmpLt, IfICmpGe, IfICmpGt, IfICmpLe,
  IfNull, IfNonNull, IfACmpEq, IfACmpNe,
  Goto,
  New, GetField, PutField, GetStatic, PutStatic,
  NewArray, AALoad, AAStore, IALoad, IAStore, ArrayLength,
  InvokeVirtual, InvokeStatic, InvokeSpecial, InvokeIntrinsic,
  Return, SConcat, SEquals, Throw,
};

const char *opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(std::string_view name);
bool is_branch(Opcode op);
bool is_binary_arith(Opcode op);

enum class Intrinsic : std::uint8_t {
  ListNew, ListAdd, ListGet, ListSet, ListLen,
  MapNew, MapPut, MapGet, MapContains,
  SparseNew, SparsePut, SparseGet,
  SysAppCount, SysAppUid, SysAppPackage, SysAppMeta, SysAppMetaCount,
  SysAppMetaAt, SysIsSkeleton, SysConfig, SysConfigInt, SysConfigCount,
  SysConfigAt, SysAddService,
};

struct IntrinsicInfo {
  Intrinsic id;
  const char *name;
  std::uint8_t pops;
  bool pushes;
};

const IntrinsicInfo &intrinsic_info(Intrinsic id);
std::optional<Intrinsic> intrinsic_from_name(std::string_view name);

/// Literal operand of `const` and of static field initializers.
struct ConstValue {
  enum class Kind : std::uint8_t { Int, Bool, Str, Null };
  Kind kind = Kind::Int;
  std::int32_t num = 0;
  std::string text;

  std::string str() const;
  friend bool operator==(const ConstValue &, const ConstValue &) = default;
};

struct Instruction {
  Opcode op = Opcode::Return;
  ConstValue constant;           // Const
  std::int32_t local = 0;        // Load, Store
  std::string label_ref;         // branches
  std::uint32_t target = 0;      // resolved branch target
  std::string owner;             // New, field access, invokes
  std::string member;            // field or method name
  Type type;                     // NewArray element type
  Intrinsic intrinsic = Intrinsic::ListNew;
  std::vector<std::string> labels; // labels bound to this pc
  int line = 0;

  // Filled in by the resolver.
  std::string decl_class;  // class declaring the accessed field
  std::int32_t slot = -1;  // field slot in layout / statics
  bool is_extern = false;  // invokestatic of an extern declaration

  friend bool operator==(const Instruction &a, const Instruction &b);
};

struct Param {
  std::string name;
  Type type;
  friend bool operator==(const Param &, const Param &) = default;
};

struct MethodDef {
  std::string name;
  std::string owner;
  std::vector<Param> params;
  Type ret;
  std::uint32_t locals = 0;
  std::vector<Instruction> body;
  bool is_static = false;
  bool is_virtual = true;
  bool is_interface = false;

  std::string qualified() const { return owner + "." + name; }
  /// Locals occupied by the receiver and parameters.
  std::uint32_t arg_slots() const {
    return static_cast<std::uint32_t>(params.size()) + (is_static ? 0 : 1);
  }
  std::optional<std::uint32_t> find_label(std::string_view label) const;

  friend bool operator==(const MethodDef &, const MethodDef &) = default;
};

struct FieldDef {
  std::string name;
  Type type;
  std::optional<ConstValue> init; // statics only
  friend bool operator==(const FieldDef &, const FieldDef &) = default;
};

struct ClassDef {
  std::string name;
  std::string super; // empty when none
  std::vector<FieldDef> static_fields;
  std::vector<FieldDef> instance_fields;
  std::vector<MethodDef> methods;
  bool singleton = false;
  bool handler = false;      // message handler base: sendMessage -> handleMessage
  bool statemachine = false; // state machine base: sendMessage -> current state

  const MethodDef *find_method(std::string_view name) const;
  friend bool operator==(const ClassDef &, const ClassDef &) = default;
};

enum class ExternPolicy : std::uint8_t { ModelUid, ModelPackage, SymbolicReturn, Ignore, Delegate };

const char *policy_name(ExternPolicy p);
std::optional<ExternPolicy> policy_from_name(std::string_view name);

struct ExternDecl {
  std::string name; // qualified, e.g. Binder.getCallingUid
  std::vector<Param> params;
  Type ret;
  ExternPolicy policy = ExternPolicy::Ignore;
  friend bool operator==(const ExternDecl &, const ExternDecl &) = default;
};

/// A statement: one instruction of one method.
struct StmtLocator {
  std::string method; // qualified
  std::uint32_t pc = 0;

  std::string str() const { return method + "@" + std::to_string(pc); }
  friend auto operator<=>(const StmtLocator &, const StmtLocator &) = default;
};

class Program {
public:
  std::vector<ClassDef> classes;
  std::string entry_method;
  std::vector<ExternDecl> externs;

  /// Builds lookup tables. Called by the assembler; required after manual
  /// construction.
  void index();

  const ClassDef *find_class(std::string_view name) const;
  const ClassDef &get_class(std::string_view name) const;
  const MethodDef *find_method(std::string_view qualified) const;
  const MethodDef &get_method(std::string_view qualified) const;
  const ExternDecl *find_extern(std::string_view qualified) const;

  std::set<std::string> interface_methods() const;

  /// Instance layout with inherited fields first.
  std::vector<FieldDef> instance_layout(std::string_view cls) const;
  std::optional<std::uint32_t> field_slot(std::string_view cls, std::string_view field) const;
  /// Declaring class and slot of a static field visible from `cls`.
  std::optional<std::pair<std::string, std::uint32_t>>
  static_slot(std::string_view cls, std::string_view field) const;

  bool is_subclass(std::string_view sub, std::string_view base) const;
  /// `base` and all classes deriving from it, sorted by name.
  std::vector<std::string> subclasses_of(std::string_view base) const;
  /// Superclass chain starting at `cls` (inclusive).
  std::vector<std::string> ancestry(std::string_view cls) const;
  bool is_handler_class(std::string_view cls) const;
  bool is_statemachine_class(std::string_view cls) const;

  /// Every string literal appearing in the program, sorted.
  std::set<std::string> string_literals() const;

  /// Parses `Class.method:label` or `Class.method@pc`.
  StmtLocator parse_locator(std::string_view text) const;

  friend bool operator==(const Program &a, const Program &b) {
    return a.classes == b.classes && a.entry_method == b.entry_method &&
           a.externs == b.externs;
  }

private:
  std::map<std::string, std::size_t, std::less<>> class_index_;
  std::map<std::string, std::size_t, std::less<>> extern_index_;
};

/// Assembles, resolves and verifies a program. Throws SyntaxError or Error.
Program assemble(std::string_view text);
Program assemble_file(const std::string &path);
/// Canonical assembly text; assemble(render(p)) == p.
std::string render(const Program &program);

/// Walks the class→super chain and returns the first matching method.
const MethodDef &resolve_dispatch(const Program &program, std::string_view cls,
                                  std::string_view method);

/// Stack pops/pushes of an instruction inside `method`.
std::pair<int, int> stack_effect(const Program &program, const Instruction &ins);

/// All methods a call instruction may transfer to: invokevirtual expands to
/// every override in subclasses of the static owner, and message sends to
/// handlers or state machines expand to their receivers.
std::vector<std::string> static_callees(const Program &program, const Instruction &ins);

class CallGraph {
public:
  explicit CallGraph(const Program &program);

  const std::set<std::string> &callees(const std::string &method) const;
  /// Shortest call distance from every method that can reach `method`.
  std::map<std::string, int> distances_to(const std::string &method) const;

private:
  std::map<std::string, std::set<std::string>> edges_;
  std::map<std::string, std::set<std::string>> reverse_;
};

struct RankedEntrypoint {
  std::string method;
  int distance = 0;
  friend bool operator==(const RankedEntrypoint &, const RankedEntrypoint &) = default;
};

/// Interface methods from which `target` is statically reachable, nearest
/// first (ties by name).
std::vector<RankedEntrypoint> call_graph_reachable(const Program &program,
                                                   const StmtLocator &target);

} // namespace snapseed
