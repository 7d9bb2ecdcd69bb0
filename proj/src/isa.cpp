//===-- isa.cpp - Guest program model and call graph ----------------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/isa.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>

namespace snapseed {

const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Syntax: return "syntax";
  case ErrorKind::Resolution: return "resolution";
  case ErrorKind::Verification: return "verification";
  case ErrorKind::Registry: return "registry";
  case ErrorKind::GuestTrap: return "guest-trap";
  case ErrorKind::Snapshot: return "snapshot";
  case ErrorKind::Driver: return "driver";
  case ErrorKind::Extern: return "extern";
  case ErrorKind::Solver: return "solver";
  case ErrorKind::Usage: return "usage";
  case ErrorKind::Io: return "io";
  }
  return "unknown";
}

//===----------------------------------------------------------------------===//
// Types
//===----------------------------------------------------------------------===//

Type Type::ref(std::string cls) {
  Type t;
  t.kind = Kind::Ref;
  t.cls = std::move(cls);
  return t;
}

Type Type::container(Kind k, Type elem) {
  Type t;
  t.kind = k;
  t.elem = std::make_shared<const Type>(std::move(elem));
  return t;
}

Type Type::map(Type key, Type value) {
  Type t;
  t.kind = Kind::Map;
  t.key = std::make_shared<const Type>(std::move(key));
  t.elem = std::make_shared<const Type>(std::move(value));
  return t;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '$'))
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
  });
}

// Splits "A,B" at the top-level comma.
std::pair<std::string_view, std::string_view> split_pair(std::string_view s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '<') ++depth;
    else if (s[i] == '>') --depth;
    else if (s[i] == ',' && depth == 0) return {s.substr(0, i), s.substr(i + 1)};
  }
  return {s, {}};
}

} // namespace

Type Type::parse(std::string_view text) {
  text = trim(text);
  auto fail = [&]() -> Type {
    throw Error(ErrorKind::Syntax, "malformed type '" + std::string(text) + "'");
  };
  if (text == "int") return make(Kind::Int);
  if (text == "bool") return make(Kind::Bool);
  if (text == "str") return make(Kind::Str);
  if (text == "void") return make(Kind::Void);
  auto open = text.find('<');
  if (open == std::string_view::npos) {
    if (!is_identifier(text)) return fail();
    return ref(std::string(text));
  }
  if (text.back() != '>') return fail();
  std::string_view head = text.substr(0, open);
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  if (head == "ref") {
    inner = trim(inner);
    if (!is_identifier(inner)) return fail();
    return ref(std::string(inner));
  }
  if (head == "arr") return container(Kind::Arr, parse(inner));
  if (head == "list") return container(Kind::List, parse(inner));
  if (head == "sparse") return container(Kind::Sparse, parse(inner));
  if (head == "map") {
    auto [k, v] = split_pair(inner);
    if (v.empty()) return fail();
    return map(parse(k), parse(v));
  }
  return fail();
}

std::string Type::str() const {
  switch (kind) {
  case Kind::Void: return "void";
  case Kind::Int: return "int";
  case Kind::Bool: return "bool";
  case Kind::Str: return "str";
  case Kind::Ref: return "ref<" + cls + ">";
  case Kind::Arr: return "arr<" + elem->str() + ">";
  case Kind::List: return "list<" + elem->str() + ">";
  case Kind::Sparse: return "sparse<" + elem->str() + ">";
  case Kind::Map: return "map<" + key->str() + "," + elem->str() + ">";
  }
  return "?";
}

bool operator==(const Type &a, const Type &b) {
  if (a.kind != b.kind || a.cls != b.cls) return false;
  auto same = [](const std::shared_ptr<const Type> &x, const std::shared_ptr<const Type> &y) {
    if (!x || !y) return !x && !y;
    return *x == *y;
  };
  return same(a.elem, b.elem) && same(a.key, b.key);
}

//===----------------------------------------------------------------------===//
// Opcode and intrinsic tables
//===----------------------------------------------------------------------===//

namespace {

struct OpName {
  Opcode op;
  const char *name;
};

constexpr std::array kOpNames = {
    OpName{Opcode::Const, "const"},         OpName{Opcode::Load, "load"},
    OpName{Opcode::Store, "store"},         OpName{Opcode::Dup, "dup"},
    OpName{Opcode::Pop, "pop"},             OpName{Opcode::Swap, "swap"},
    OpName{Opcode::Add, "add"},             OpName{Opcode::Sub, "sub"},
    OpName{Opcode::Mul, "mul"},             OpName{Opcode::Div, "div"},
    OpName{Opcode::Mod, "mod"},             OpName{Opcode::And, "and"},
    OpName{Opcode::Or, "or"},               OpName{Opcode::Xor, "xor"},
    OpName{Opcode::Shl, "shl"},             OpName{Opcode::Shr, "shr"},
    OpName{Opcode::IfEq, "ifeq"},           OpName{Opcode::IfNe, "ifne"},
    OpName{Opcode::IfLt, "iflt"},           OpName{Opcode::IfGe, "ifge"},
    OpName{Opcode::IfGt, "ifgt"},           OpName{Opcode::IfLe, "ifle"},
    OpName{Opcode::IfICmpEq, "if_icmpeq"},  OpName{Opcode::IfICmpNe, "if_icmpne"},
    OpName{Opcode::IfICmpLt, "if_icmplt"},  OpName{Opcode::IfICmpGe, "if_icmpge"},
    OpName{Opcode::IfICmpGt, "if_icmpgt"},  OpName{Opcode::IfICmpLe, "if_icmple"},
    OpName{Opcode::IfNull, "ifnull"},       OpName{Opcode::IfNonNull, "ifnonnull"},
    OpName{Opcode::IfACmpEq, "if_acmpeq"},  OpName{Opcode::IfACmpNe, "if_acmpne"},
    OpName{Opcode::Goto, "goto"},           OpName{Opcode::New, "new"},
    OpName{Opcode::GetField, "getfield"},   OpName{Opcode::PutField, "putfield"},
    OpName{Opcode::GetStatic, "getstatic"}, OpName{Opcode::PutStatic, "putstatic"},
    OpName{Opcode::NewArray, "newarray"},   OpName{Opcode::AALoad, "aaload"},
    OpName{Opcode::AAStore, "aastore"},     OpName{Opcode::IALoad, "iaload"},
    OpName{Opcode::IAStore, "iastore"},     OpName{Opcode::ArrayLength, "arraylength"},
    OpName{Opcode::InvokeVirtual, "invokevirtual"},
    OpName{Opcode::InvokeStatic, "invokestatic"},
    OpName{Opcode::InvokeSpecial, "invokespecial"},
    OpName{Opcode::InvokeIntrinsic, "invokeintrinsic"},
    OpName{Opcode::Return, "return"},       OpName{Opcode::SConcat, "sconcat"},
    OpName{Opcode::SEquals, "sequals"},     OpName{Opcode::Throw, "throw"},
};

constexpr std::array kIntrinsics = {
    IntrinsicInfo{Intrinsic::ListNew, "list.new", 0, true},
    IntrinsicInfo{Intrinsic::ListAdd, "list.add", 2, false},
    IntrinsicInfo{Intrinsic::ListGet, "list.get", 2, true},
    IntrinsicInfo{Intrinsic::ListSet, "list.set", 3, false},
    IntrinsicInfo{Intrinsic::ListLen, "list.len", 1, true},
    IntrinsicInfo{Intrinsic::MapNew, "map.new", 0, true},
    IntrinsicInfo{Intrinsic::MapPut, "map.put", 3, false},
    IntrinsicInfo{Intrinsic::MapGet, "map.get", 2, true},
    IntrinsicInfo{Intrinsic::MapContains, "map.contains", 2, true},
    IntrinsicInfo{Intrinsic::SparseNew, "sparse.new", 0, true},
    IntrinsicInfo{Intrinsic::SparsePut, "sparse.put", 3, false},
    IntrinsicInfo{Intrinsic::SparseGet, "sparse.get", 2, true},
    IntrinsicInfo{Intrinsic::SysAppCount, "sys.app_count", 0, true},
    IntrinsicInfo{Intrinsic::SysAppUid, "sys.app_uid", 1, true},
    IntrinsicInfo{Intrinsic::SysAppPackage, "sys.app_package", 1, true},
    IntrinsicInfo{Intrinsic::SysAppMeta, "sys.app_meta", 2, true},
    IntrinsicInfo{Intrinsic::SysAppMetaCount, "sys.app_meta_count", 2, true},
    IntrinsicInfo{Intrinsic::SysAppMetaAt, "sys.app_meta_at", 3, true},
    IntrinsicInfo{Intrinsic::SysIsSkeleton, "sys.is_skeleton", 1, true},
    IntrinsicInfo{Intrinsic::SysConfig, "sys.config", 1, true},
    IntrinsicInfo{Intrinsic::SysConfigInt, "sys.config_int", 2, true},
    IntrinsicInfo{Intrinsic::SysConfigCount, "sys.config_count", 1, true},
    IntrinsicInfo{Intrinsic::SysConfigAt, "sys.config_at", 2, true},
    IntrinsicInfo{Intrinsic::SysAddService, "sys.add_service", 2, false},
};

} // namespace

const char *opcode_name(Opcode op) {
  for (const auto &e : kOpNames)
    if (e.op == op) return e.name;
  return "?";
}

std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (const auto &e : kOpNames)
    if (name == e.name) return e.op;
  return std::nullopt;
}

bool is_branch(Opcode op) {
  return op >= Opcode::IfEq && op <= Opcode::IfACmpNe;
}

bool is_binary_arith(Opcode op) {
  return op >= Opcode::Add && op <= Opcode::Shr;
}

const IntrinsicInfo &intrinsic_info(Intrinsic id) {
  return kIntrinsics[static_cast<std::size_t>(id)];
}

std::optional<Intrinsic> intrinsic_from_name(std::string_view name) {
  for (const auto &e : kIntrinsics)
    if (name == e.name) return e.id;
  return std::nullopt;
}

const char *policy_name(ExternPolicy p) {
  switch (p) {
  case ExternPolicy::ModelUid: return "model-uid";
  case ExternPolicy::ModelPackage: return "model-package";
  case ExternPolicy::SymbolicReturn: return "symbolic-return";
  case ExternPolicy::Ignore: return "ignore";
  case ExternPolicy::Delegate: return "delegate";
  }
  return "?";
}

std::optional<ExternPolicy> policy_from_name(std::string_view name) {
  for (auto p : {ExternPolicy::ModelUid, ExternPolicy::ModelPackage, ExternPolicy::SymbolicReturn,
                 ExternPolicy::Ignore, ExternPolicy::Delegate})
    if (name == policy_name(p)) return p;
  return std::nullopt;
}

std::string ConstValue::str() const {
  switch (kind) {
  case Kind::Int: return std::to_string(num);
  case Kind::Bool: return num ? "true" : "false";
  case Kind::Null: return "null";
  case Kind::Str: {
    std::string out = "\"";
    for (char c : text) {
      if (c == '"' || c == '\\') out += '\\';
      if (c == '\n') { out += "\\n"; continue; }
      out += c;
    }
    return out + "\"";
  }
  }
  return "?";
}

bool operator==(const Instruction &a, const Instruction &b) {
  return a.op == b.op && a.constant == b.constant && a.local == b.local &&
         a.label_ref == b.label_ref && a.target == b.target && a.owner == b.owner &&
         a.member == b.member && a.type == b.type && a.intrinsic == b.intrinsic &&
         a.labels == b.labels && a.decl_class == b.decl_class && a.slot == b.slot &&
         a.is_extern == b.is_extern;
}

std::optional<std::uint32_t> MethodDef::find_label(std::string_view label) const {
  for (std::uint32_t pc = 0; pc < body.size(); ++pc)
    for (const auto &l : body[pc].labels)
      if (l == label) return pc;
  return std::nullopt;
}

const MethodDef *ClassDef::find_method(std::string_view n) const {
  for (const auto &m : methods)
    if (m.name == n) return &m;
  return nullptr;
}

//===----------------------------------------------------------------------===//
// Program lookups
//===----------------------------------------------------------------------===//

void Program::index() {
  class_index_.clear();
  extern_index_.clear();
  for (std::size_t i = 0; i < classes.size(); ++i)
    class_index_.emplace(classes[i].name, i);
  for (std::size_t i = 0; i < externs.size(); ++i)
    extern_index_.emplace(externs[i].name, i);
}

const ClassDef *Program::find_class(std::string_view name) const {
  auto it = class_index_.find(name);
  return it == class_index_.end() ? nullptr : &classes[it->second];
}

const ClassDef &Program::get_class(std::string_view name) const {
  if (const auto *c = find_class(name)) return *c;
  throw Error(ErrorKind::Resolution, "unknown class '" + std::string(name) + "'");
}

const MethodDef *Program::find_method(std::string_view qualified) const {
  auto dot = qualified.rfind('.');
  if (dot == std::string_view::npos) return nullptr;
  const auto *c = find_class(qualified.substr(0, dot));
  return c ? c->find_method(qualified.substr(dot + 1)) : nullptr;
}

const MethodDef &Program::get_method(std::string_view qualified) const {
  if (const auto *m = find_method(qualified)) return *m;
  throw Error(ErrorKind::Resolution, "unknown method '" + std::string(qualified) + "'");
}

const ExternDecl *Program::find_extern(std::string_view qualified) const {
  auto it = extern_index_.find(qualified);
  return it == extern_index_.end() ? nullptr : &externs[it->second];
}

std::set<std::string> Program::interface_methods() const {
  std::set<std::string> out;
  for (const auto &c : classes)
    for (const auto &m : c.methods)
      if (m.is_interface) out.insert(m.qualified());
  return out;
}

std::vector<std::string> Program::ancestry(std::string_view cls) const {
  std::vector<std::string> chain;
  const ClassDef *c = find_class(cls);
  while (c) {
    chain.push_back(c->name);
    if (c->super.empty() || chain.size() > classes.size()) break;
    c = find_class(c->super);
  }
  return chain;
}

std::vector<FieldDef> Program::instance_layout(std::string_view cls) const {
  auto chain = ancestry(cls);
  std::vector<FieldDef> layout;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto &c = get_class(*it);
    layout.insert(layout.end(), c.instance_fields.begin(), c.instance_fields.end());
  }
  return layout;
}

std::optional<std::uint32_t> Program::field_slot(std::string_view cls,
                                                 std::string_view field) const {
  auto layout = instance_layout(cls);
  // Later entries shadow earlier ones; names are unique by verification.
  for (std::uint32_t i = 0; i < layout.size(); ++i)
    if (layout[i].name == field) return i;
  return std::nullopt;
}

std::optional<std::pair<std::string, std::uint32_t>>
Program::static_slot(std::string_view cls, std::string_view field) const {
  for (const auto &name : ancestry(cls)) {
    const auto &c = get_class(name);
    for (std::uint32_t i = 0; i < c.static_fields.size(); ++i)
      if (c.static_fields[i].name == field) return std::make_pair(c.name, i);
  }
  return std::nullopt;
}

bool Program::is_subclass(std::string_view sub, std::string_view base) const {
  for (const auto &name : ancestry(sub))
    if (name == base) return true;
  return false;
}

std::vector<std::string> Program::subclasses_of(std::string_view base) const {
  std::vector<std::string> out;
  for (const auto &c : classes)
    if (is_subclass(c.name, base)) out.push_back(c.name);
  std::sort(out.begin(), out.end());
  return out;
}

bool Program::is_handler_class(std::string_view cls) const {
  for (const auto &name : ancestry(cls))
    if (get_class(name).handler) return true;
  return false;
}

bool Program::is_statemachine_class(std::string_view cls) const {
  for (const auto &name : ancestry(cls))
    if (get_class(name).statemachine) return true;
  return false;
}

std::set<std::string> Program::string_literals() const {
  std::set<std::string> out;
  for (const auto &c : classes) {
    for (const auto &f : c.static_fields)
      if (f.init && f.init->kind == ConstValue::Kind::Str) out.insert(f.init->text);
    for (const auto &m : c.methods)
      for (const auto &ins : m.body)
        if (ins.op == Opcode::Const && ins.constant.kind == ConstValue::Kind::Str)
          out.insert(ins.constant.text);
  }
  return out;
}

StmtLocator Program::parse_locator(std::string_view text) const {
  auto sep = text.find_first_of(":@");
  if (sep == std::string_view::npos)
    throw Error(ErrorKind::Usage, "statement locator needs ':label' or '@pc': " + std::string(text));
  std::string method(text.substr(0, sep));
  const MethodDef *m = find_method(method);
  if (!m) throw Error(ErrorKind::Resolution, "target not found: unknown method '" + method + "'");
  std::string_view rest = text.substr(sep + 1);
  StmtLocator loc{method, 0};
  if (text[sep] == ':') {
    auto pc = m->find_label(rest);
    if (!pc) throw Error(ErrorKind::Resolution, "target not found: no label '" + std::string(rest) + "'");
    loc.pc = *pc;
  } else {
    try {
      loc.pc = static_cast<std::uint32_t>(std::stoul(std::string(rest)));
    } catch (const std::exception &) {
      throw Error(ErrorKind::Usage, "bad pc in locator: " + std::string(text));
    }
    if (loc.pc >= m->body.size())
      throw Error(ErrorKind::Resolution, "target not found: pc out of range in " + method);
  }
  return loc;
}

//===----------------------------------------------------------------------===//
// Dispatch and call graph
//===----------------------------------------------------------------------===//

const MethodDef &resolve_dispatch(const Program &program, std::string_view cls,
                                  std::string_view method) {
  if (!program.find_class(cls))
    throw Error(ErrorKind::Resolution, "unknown class '" + std::string(cls) + "'");
  for (const auto &name : program.ancestry(cls))
    if (const auto *m = program.get_class(name).find_method(method)) return *m;
  throw Error(ErrorKind::Resolution,
              "no such method '" + std::string(method) + "' in '" + std::string(cls) + "'");
}

std::pair<int, int> stack_effect(const Program &program, const Instruction &ins) {
  using O = Opcode;
  switch (ins.op) {
  case O::Const: case O::Load: return {0, 1};
  case O::Store: case O::Pop: return {1, 0};
  case O::Dup: return {1, 2};
  case O::Swap: return {2, 2};
  case O::IfEq: case O::IfNe: case O::IfLt: case O::IfGe: case O::IfGt: case O::IfLe:
  case O::IfNull: case O::IfNonNull:
    return {1, 0};
  case O::IfICmpEq: case O::IfICmpNe: case O::IfICmpLt: case O::IfICmpGe:
  case O::IfICmpGt: case O::IfICmpLe: case O::IfACmpEq: case O::IfACmpNe:
    return {2, 0};
  case O::Goto: return {0, 0};
  case O::New: return {0, 1};
  case O::GetField: return {1, 1};
  case O::PutField: return {2, 0};
  case O::GetStatic: return {0, 1};
  case O::PutStatic: return {1, 0};
  case O::NewArray: return {1, 1};
  case O::AALoad: case O::IALoad: return {2, 1};
  case O::AAStore: case O::IAStore: return {3, 0};
  case O::ArrayLength: return {1, 1};
  case O::SConcat: case O::SEquals: return {2, 1};
  case O::Throw: return {1, 0};
  case O::Return: return {0, 0}; // checked separately by the verifier
  case O::InvokeIntrinsic: {
    const auto &info = intrinsic_info(ins.intrinsic);
    return {info.pops, info.pushes ? 1 : 0};
  }
  case O::InvokeStatic: {
    if (const auto *ext = program.find_extern(ins.owner + "." + ins.member))
      return {static_cast<int>(ext->params.size()), ext->ret.kind == Type::Kind::Void ? 0 : 1};
    const auto &m = program.get_method(ins.owner + "." + ins.member);
    return {static_cast<int>(m.params.size()), m.ret.kind == Type::Kind::Void ? 0 : 1};
  }
  case O::InvokeVirtual: case O::InvokeSpecial: {
    const auto &m = resolve_dispatch(program, ins.owner, ins.member);
    return {static_cast<int>(m.params.size()) + 1, m.ret.kind == Type::Kind::Void ? 0 : 1};
  }
  default:
    if (is_binary_arith(ins.op)) return {2, 1};
  }
  return {0, 0};
}

std::vector<std::string> static_callees(const Program &program, const Instruction &ins) {
  std::set<std::string> out;
  switch (ins.op) {
  case Opcode::InvokeStatic:
    if (!ins.is_extern) out.insert(ins.owner + "." + ins.member);
    break;
  case Opcode::InvokeSpecial:
    out.insert(resolve_dispatch(program, ins.owner, ins.member).qualified());
    break;
  case Opcode::InvokeVirtual: {
    if (ins.member == "sendMessage" && program.is_handler_class(ins.owner)) {
      for (const auto &sub : program.subclasses_of(ins.owner))
        if (const auto *c = program.find_class(sub); c)
          for (const auto &a : program.ancestry(sub))
            if (const auto *m = program.get_class(a).find_method("handleMessage")) {
              out.insert(m->qualified());
              break;
            }
      break;
    }
    if (ins.member == "sendMessage" && program.is_statemachine_class(ins.owner)) {
      for (const auto &c : program.classes)
        if (const auto *m = c.find_method("processMessage")) out.insert(m->qualified());
      break;
    }
    for (const auto &sub : program.subclasses_of(ins.owner)) {
      for (const auto &a : program.ancestry(sub))
        if (const auto *m = program.get_class(a).find_method(ins.member)) {
          out.insert(m->qualified());
          break;
        }
    }
    break;
  }
  default:
    break;
  }
  return {out.begin(), out.end()};
}

CallGraph::CallGraph(const Program &program) {
  for (const auto &c : program.classes)
    for (const auto &m : c.methods) {
      auto &succ = edges_[m.qualified()];
      for (const auto &ins : m.body)
        for (auto &callee : static_callees(program, ins)) {
          succ.insert(callee);
          reverse_[callee].insert(m.qualified());
        }
    }
}

const std::set<std::string> &CallGraph::callees(const std::string &method) const {
  static const std::set<std::string> empty;
  auto it = edges_.find(method);
  return it == edges_.end() ? empty : it->second;
}

std::map<std::string, int> CallGraph::distances_to(const std::string &method) const {
  std::map<std::string, int> dist{{method, 0}};
  std::deque<std::string> queue{method};
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    auto it = reverse_.find(cur);
    if (it == reverse_.end()) continue;
    for (const auto &caller : it->second)
      if (dist.emplace(caller, dist[cur] + 1).second) queue.push_back(caller);
  }
  return dist;
}

namespace {

// Intraprocedural reachability of the target pc from method entry.
bool target_reachable_in_body(const MethodDef &m, std::uint32_t target) {
  std::vector<bool> seen(m.body.size(), false);
  std::vector<std::uint32_t> work{0};
  while (!work.empty()) {
    auto pc = work.back();
    work.pop_back();
    if (pc >= m.body.size() || seen[pc]) continue;
    seen[pc] = true;
    if (pc == target) return true;
    const auto &ins = m.body[pc];
    if (ins.op == Opcode::Return || ins.op == Opcode::Throw) continue;
    if (ins.op == Opcode::Goto) {
      work.push_back(ins.target);
      continue;
    }
    if (is_branch(ins.op)) work.push_back(ins.target);
    work.push_back(pc + 1);
  }
  return false;
}

} // namespace

std::vector<RankedEntrypoint> call_graph_reachable(const Program &program,
                                                   const StmtLocator &target) {
  const auto &method = program.get_method(target.method);
  if (target.pc >= method.body.size())
    throw Error(ErrorKind::Resolution, "target not found: " + target.str());
  std::vector<RankedEntrypoint> out;
  // Dead code inside the target's own method reaches nothing.
  if (!target_reachable_in_body(method, target.pc)) return out;
  CallGraph graph(program);
  auto dist = graph.distances_to(target.method);
  for (const auto &iface : program.interface_methods())
    if (auto it = dist.find(iface); it != dist.end()) out.push_back({iface, it->second});
  std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
    return a.distance != b.distance ? a.distance < b.distance : a.method < b.method;
  });
  return out;
}

} // namespace snapseed
