//===-- vm.cpp - Concrete interpreter -------------------------------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/vm.hpp"

#include "snapseed/extern_host.hpp"
#include "snapseed/snapshot.hpp"

#include <sstream>

namespace snapseed {

using nlohmann::json;

std::string trace_text(const BranchTrace &trace) {
  std::ostringstream os;
  for (const auto &b : trace) os << b.method << "@" << b.pc << ":" << (b.taken ? "T" : "F") << "\n";
  return os.str();
}

namespace {

struct Trap {
  std::string message;
};
struct TargetReached {};

class Machine {
public:
  enum class Mode { Init, Replay };

  Machine(const Program &program, HeapState heap, Mode mode)
      : program_(program), heap_(std::move(heap)), mode_(mode) {}

  const SysConfig *config = nullptr;
  const AppRegistry *apps = nullptr;
  std::int32_t skeleton_uid = kSystemServerUid;
  std::string skeleton_package = "android";
  ExternHost *host = nullptr;
  const Bindings *bindings = nullptr;
  std::optional<StmtLocator> target;
  std::uint64_t max_steps = 10'000'000;

  BranchTrace trace;
  std::vector<AccessRecord> accesses;

  HeapState &heap() { return heap_; }

  std::optional<CValue> run(const MethodDef &m, std::vector<CValue> args);
  void ensure_init(const std::string &cls);
  HeapId new_string(std::string text) { return heap_.alloc(CString{std::move(text)}); }
  CValue from_model(const ModelValue &v, const Type &t);

private:
  const Program &program_;
  HeapState heap_;
  Mode mode_;
  std::uint64_t steps_ = 0;
  std::map<std::string, HeapId> literals_;
  std::map<std::string, std::int32_t> extern_calls_;
  const MethodDef *cur_method_ = nullptr;
  std::uint32_t cur_pc_ = 0;

  [[noreturn]] void trap(const std::string &what) {
    std::string where = cur_method_ ? " at " + cur_method_->qualified() + "@" + std::to_string(cur_pc_) : "";
    throw Trap{what + where};
  }

  HeapId literal(const std::string &text) {
    auto it = literals_.find(text);
    if (it != literals_.end()) return it->second;
    auto id = new_string(text);
    literals_.emplace(text, id);
    return id;
  }

  CValue const_value(const ConstValue &c) {
    switch (c.kind) {
    case ConstValue::Kind::Int: case ConstValue::Kind::Bool: return CValue::of_int(c.num);
    case ConstValue::Kind::Str: return CValue::ref(literal(c.text));
    case ConstValue::Kind::Null: return CValue::null();
    }
    return CValue::null();
  }

  HeapId deref(const CValue &v) {
    if (!v.is_ref()) trap("NullPointerException");
    return v.id;
  }
  const std::string &text_of(const CValue &v) {
    auto id = deref(v);
    const auto *s = std::get_if<CString>(&heap_.cell(id));
    if (!s) trap("ClassCastException: not a string");
    return s->text;
  }
  CObject &object_of(const CValue &v) {
    auto id = deref(v);
    auto *o = std::get_if<CObject>(&heap_.cell(id));
    if (!o) trap("ClassCastException: not an object");
    return *o;
  }
  CArray &array_of(const CValue &v) {
    auto id = deref(v);
    auto *a = std::get_if<CArray>(&heap_.cell(id));
    if (!a) trap("ClassCastException: not an array");
    return *a;
  }
  CCollection &collection_of(const CValue &v, Type::Kind kind) {
    auto id = deref(v);
    auto *c = std::get_if<CCollection>(&heap_.cell(id));
    if (!c || c->kind != kind) trap("ClassCastException: wrong collection");
    return *c;
  }
  KeyAtom key_of(const CValue &v) {
    if (v.kind == CValue::Kind::Int) return v.num;
    return text_of(v);
  }
  std::string value_text(const CValue &v) {
    if (v.kind == CValue::Kind::Int) return std::to_string(v.num);
    if (v.kind == CValue::Kind::Null) return "null";
    if (const auto *s = std::get_if<CString>(&heap_.cell(v.id))) return json(s->text).dump();
    return "#" + std::to_string(v.id);
  }

  // Collections are created untyped; they take the type of the first field
  // or array slot they are stored into.
  void adopt_type(const CValue &v, const Type &t) {
    if (!v.is_ref()) return;
    auto *c = std::get_if<CCollection>(&heap_.cell(v.id));
    if (!c || c->elem.kind != Type::Kind::Void || t.kind != c->kind || !t.elem) return;
    c->elem = *t.elem;
    if (t.key) c->key = *t.key;
  }

  std::optional<CValue> call_extern(const ExternDecl &decl, const std::vector<CValue> &args);
  std::optional<CValue> call_intrinsic(Intrinsic id, std::vector<CValue> &stack);
  std::optional<CValue> invoke_virtual(const Instruction &ins, std::vector<CValue> args);
  json to_json_value(const CValue &v);
  CValue from_json_value(const json &j, const Type &t, const std::string &fn);
  void record(const char *op, const CValue &container, std::string index, const CValue &element) {
    accesses.push_back({op, container.id, std::move(index), element});
  }
};

CValue Machine::from_model(const ModelValue &v, const Type &t) {
  switch (v.sort) {
  case Sort::Int: case Sort::Bool: return CValue::of_int(v.num);
  case Sort::Str: return CValue::ref(new_string(v.text));
  case Sort::Ref:
    if (v.is_null) return CValue::null();
    break;
  }
  (void)t;
  throw Error(ErrorKind::Solver, "cannot build a non-null reference from a model value");
}

void Machine::ensure_init(const std::string &cls) {
  if (heap_.classes[cls].initialized) return;
  const auto &c = program_.get_class(cls);
  if (!c.super.empty()) ensure_init(c.super);
  auto &st = heap_.classes[cls];
  st.initialized = true;
  st.statics.clear();
  for (const auto &f : c.static_fields) st.statics.push_back(f.init ? const_value(*f.init) : default_value(f.type));
  if (const auto *m = c.find_method("clinit"); m && m->is_static) run(*m, {});
}

json Machine::to_json_value(const CValue &v) {
  switch (v.kind) {
  case CValue::Kind::Int: return v.num;
  case CValue::Kind::Null: return nullptr;
  case CValue::Kind::Ref:
    if (const auto *s = std::get_if<CString>(&heap_.cell(v.id))) return s->text;
    return json{{"ref", v.id}};
  }
  return nullptr;
}

CValue Machine::from_json_value(const json &j, const Type &t, const std::string &fn) {
  auto mismatch = [&]() -> Error {
    return Error(ErrorKind::Extern, "extern '" + fn + "' replied " + j.dump() + " for " + t.str());
  };
  if (j.is_null()) {
    if (!t.is_heap_ref()) throw mismatch();
    return CValue::null();
  }
  switch (t.kind) {
  case Type::Kind::Int:
    if (!j.is_number_integer()) throw mismatch();
    return CValue::of_int(static_cast<std::int32_t>(j.get<std::int64_t>()));
  case Type::Kind::Bool:
    if (j.is_boolean()) return CValue::of_int(j.get<bool>() ? 1 : 0);
    if (j.is_number_integer()) return CValue::of_int(j.get<std::int64_t>() != 0);
    throw mismatch();
  case Type::Kind::Str:
    if (!j.is_string()) throw mismatch();
    return CValue::ref(new_string(j.get<std::string>()));
  default:
    throw mismatch();
  }
}

std::optional<CValue> Machine::call_extern(const ExternDecl &decl, const std::vector<CValue> &args) {
  auto k = extern_calls_[decl.name]++;
  std::optional<CValue> out;
  switch (decl.policy) {
  case ExternPolicy::ModelUid:
    out = CValue::of_int(skeleton_uid);
    break;
  case ExternPolicy::ModelPackage:
    out = CValue::ref(new_string(skeleton_package));
    break;
  case ExternPolicy::SymbolicReturn:
    if (decl.ret.kind == Type::Kind::Void) break;
    if (mode_ == Mode::Init) {
      out = default_value(decl.ret);
    } else {
      auto loc = Locator::extern_call(decl.name, k).str();
      auto it = bindings ? bindings->find(loc) : Bindings::const_iterator{};
      if (!bindings || it == bindings->end()) throw Error(ErrorKind::Solver, "unassigned symbolic variable " + loc);
      out = from_model(it->second, decl.ret);
    }
    break;
  case ExternPolicy::Ignore:
    if (decl.ret.kind != Type::Kind::Void) out = default_value(decl.ret);
    break;
  case ExternPolicy::Delegate: {
    if (!host) throw Error(ErrorKind::Extern, "extern '" + decl.name + "' needs an extern host");
    json a = json::array();
    for (const auto &v : args) a.push_back(to_json_value(v));
    auto r = host->call(decl.name, a);
    if (decl.ret.kind != Type::Kind::Void) out = from_json_value(r, decl.ret, decl.name);
    break;
  }
  }
  return out;
}

std::optional<CValue> Machine::call_intrinsic(Intrinsic id, std::vector<CValue> &stack) {
  const auto &info = intrinsic_info(id);
  std::vector<CValue> a(stack.end() - info.pops, stack.end());
  stack.resize(stack.size() - info.pops);
  auto need_sys = [&]() {
    if (mode_ != Mode::Init || !apps || !config)
      throw Error(ErrorKind::GuestTrap, std::string(info.name) + " is only available during initialization");
  };
  auto app = [&](const CValue &i) -> const AppInfo & {
    if (i.num < 0 || static_cast<std::size_t>(i.num) >= apps->apps.size()) trap("app index out of range");
    return apps->apps[static_cast<std::size_t>(i.num)];
  };
  auto meta = [&](const CValue &i, const CValue &key) -> const std::vector<std::string> * {
    const auto &m = app(i).manifest;
    auto it = m.find(text_of(key));
    return it == m.end() ? nullptr : &it->second;
  };
  auto conf = [&](const CValue &key) -> const std::vector<std::string> * {
    auto it = config->find(text_of(key));
    return it == config->end() ? nullptr : &it->second;
  };
  auto str_or_null = [&](const std::vector<std::string> *v, std::size_t j) {
    if (!v || j >= v->size()) return CValue::null();
    return CValue::ref(new_string((*v)[j]));
  };

  switch (id) {
  case Intrinsic::ListNew: {
    CCollection c;
    c.kind = Type::Kind::List;
    return CValue::ref(heap_.alloc(std::move(c)));
  }
  case Intrinsic::MapNew: {
    CCollection c;
    c.kind = Type::Kind::Map;
    return CValue::ref(heap_.alloc(std::move(c)));
  }
  case Intrinsic::SparseNew: {
    CCollection c;
    c.kind = Type::Kind::Sparse;
    c.key = Type::make(Type::Kind::Int);
    return CValue::ref(heap_.alloc(std::move(c)));
  }
  case Intrinsic::ListAdd:
    collection_of(a[0], Type::Kind::List).items.push_back(a[1]);
    return std::nullopt;
  case Intrinsic::ListGet: {
    auto &c = collection_of(a[0], Type::Kind::List);
    if (a[1].num < 0 || static_cast<std::size_t>(a[1].num) >= c.items.size()) trap("IndexOutOfBoundsException");
    auto v = c.items[static_cast<std::size_t>(a[1].num)];
    record("list.get", a[0], std::to_string(a[1].num), v);
    return v;
  }
  case Intrinsic::ListSet: {
    auto &c = collection_of(a[0], Type::Kind::List);
    if (a[1].num < 0 || static_cast<std::size_t>(a[1].num) >= c.items.size()) trap("IndexOutOfBoundsException");
    c.items[static_cast<std::size_t>(a[1].num)] = a[2];
    return std::nullopt;
  }
  case Intrinsic::ListLen:
    return CValue::of_int(static_cast<std::int32_t>(collection_of(a[0], Type::Kind::List).items.size()));
  case Intrinsic::MapPut: {
    auto k = key_of(a[1]);
    collection_of(a[0], Type::Kind::Map).put(k, a[2]);
    return std::nullopt;
  }
  case Intrinsic::MapGet: {
    auto k = key_of(a[1]);
    const auto *v = collection_of(a[0], Type::Kind::Map).find(k);
    CValue out = v ? *v : CValue::null();
    record("map.get", a[0], key_str(k), out);
    return out;
  }
  case Intrinsic::MapContains: {
    auto k = key_of(a[1]);
    return CValue::of_int(collection_of(a[0], Type::Kind::Map).find(k) ? 1 : 0);
  }
  case Intrinsic::SparsePut:
    collection_of(a[0], Type::Kind::Sparse).put(a[1].num, a[2]);
    return std::nullopt;
  case Intrinsic::SparseGet: {
    const auto *v = collection_of(a[0], Type::Kind::Sparse).find(a[1].num);
    CValue out = v ? *v : CValue::null();
    record("sparse.get", a[0], std::to_string(a[1].num), out);
    return out;
  }
  case Intrinsic::SysAppCount:
    need_sys();
    return CValue::of_int(static_cast<std::int32_t>(apps->apps.size()));
  case Intrinsic::SysAppUid:
    need_sys();
    return CValue::of_int(app(a[0]).uid);
  case Intrinsic::SysAppPackage:
    need_sys();
    return CValue::ref(new_string(app(a[0]).package));
  case Intrinsic::SysAppMeta:
    need_sys();
    return str_or_null(meta(a[0], a[1]), 0);
  case Intrinsic::SysAppMetaCount: {
    need_sys();
    const auto *v = meta(a[0], a[1]);
    return CValue::of_int(v ? static_cast<std::int32_t>(v->size()) : 0);
  }
  case Intrinsic::SysAppMetaAt:
    need_sys();
    return str_or_null(meta(a[0], a[1]), static_cast<std::size_t>(std::max(0, a[2].num)));
  case Intrinsic::SysIsSkeleton:
    need_sys();
    return CValue::of_int(app(a[0]).skeleton ? 1 : 0);
  case Intrinsic::SysConfig:
    need_sys();
    return str_or_null(conf(a[0]), 0);
  case Intrinsic::SysConfigInt: {
    need_sys();
    const auto *v = conf(a[0]);
    if (!v || v->empty()) return a[1];
    try {
      return CValue::of_int(std::stoi(v->front()));
    } catch (const std::exception &) {
      trap("config value '" + v->front() + "' is not an integer");
    }
  }
  case Intrinsic::SysConfigCount: {
    need_sys();
    const auto *v = conf(a[0]);
    return CValue::of_int(v ? static_cast<std::int32_t>(v->size()) : 0);
  }
  case Intrinsic::SysConfigAt:
    need_sys();
    return str_or_null(conf(a[0]), static_cast<std::size_t>(std::max(0, a[1].num)));
  case Intrinsic::SysAddService: {
    need_sys();
    const auto &name = text_of(a[0]);
    const auto &obj = object_of(a[1]);
    if (!program_.get_class(obj.cls).singleton)
      throw Error(ErrorKind::Registry, "service '" + name + "' is an instance of non-singleton class " + obj.cls);
    if (heap_.roots.count(name)) throw Error(ErrorKind::Registry, "service '" + name + "' registered twice");
    heap_.roots[name] = a[1].id;
    return std::nullopt;
  }
  }
  return std::nullopt;
}

std::optional<CValue> Machine::invoke_virtual(const Instruction &ins, std::vector<CValue> args) {
  const auto &recv = object_of(args[0]);
  std::string cls = recv.cls;
  if (ins.member == "sendMessage" && program_.is_handler_class(cls)) {
    return run(resolve_dispatch(program_, cls, "handleMessage"), std::move(args));
  }
  if (ins.member == "sendMessage" && program_.is_statemachine_class(cls)) {
    auto field = [&](const CValue &obj, const char *name) {
      const auto &o = object_of(obj);
      auto slot = program_.field_slot(o.cls, name);
      if (!slot) throw Error(ErrorKind::GuestTrap, o.cls + " lacks state-machine field " + name);
      return o.fields[*slot];
    };
    auto handler = field(args[0], "mSmHandler");
    auto stack = field(handler, "mStateStack");
    auto top = field(handler, "mStateStackTopIndex");
    auto &arr = array_of(stack);
    if (top.num < 0 || static_cast<std::size_t>(top.num) >= arr.values.size())
      throw Error(ErrorKind::Snapshot, "state stack index " + std::to_string(top.num) + " out of bounds");
    auto state = field(arr.values[static_cast<std::size_t>(top.num)], "state");
    args[0] = state;
    return run(resolve_dispatch(program_, object_of(state).cls, "processMessage"), std::move(args));
  }
  return run(resolve_dispatch(program_, cls, ins.member), std::move(args));
}

std::optional<CValue> Machine::run(const MethodDef &m, std::vector<CValue> args) {
  std::vector<CValue> locals(std::max<std::size_t>(m.locals, args.size()));
  std::copy(args.begin(), args.end(), locals.begin());
  std::vector<CValue> stack;
  const bool watch = target && target->method == m.qualified();
  const std::string qualified = m.qualified();
  const MethodDef *saved_method = cur_method_;
  std::uint32_t saved_pc = cur_pc_;
  cur_method_ = &m;
  std::uint32_t pc = 0;
  auto pop = [&]() {
    auto v = stack.back();
    stack.pop_back();
    return v;
  };
  auto branch = [&](bool taken, const Instruction &ins) {
    trace.push_back({qualified, pc, taken});
    pc = taken ? ins.target : pc + 1;
  };
  std::optional<CValue> result;

  while (true) {
    cur_pc_ = pc;
    if (++steps_ > max_steps) trap("step limit exceeded");
    if (watch && target->pc == pc) throw TargetReached{};
    const auto &ins = m.body[pc];
    switch (ins.op) {
    case Opcode::Const: stack.push_back(const_value(ins.constant)); ++pc; break;
    case Opcode::Load: stack.push_back(locals[static_cast<std::size_t>(ins.local)]); ++pc; break;
    case Opcode::Store: locals[static_cast<std::size_t>(ins.local)] = pop(); ++pc; break;
    case Opcode::Dup: stack.push_back(stack.back()); ++pc; break;
    case Opcode::Pop: stack.pop_back(); ++pc; break;
    case Opcode::Swap: std::swap(stack[stack.size() - 1], stack[stack.size() - 2]); ++pc; break;
    case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::Div: case Opcode::Mod:
    case Opcode::And: case Opcode::Or: case Opcode::Xor: case Opcode::Shl: case Opcode::Shr: {
      auto b = pop().num, a = pop().num;
      ExprOp op{};
      switch (ins.op) {
      case Opcode::Add: op = ExprOp::Add; break;
      case Opcode::Sub: op = ExprOp::Sub; break;
      case Opcode::Mul: op = ExprOp::Mul; break;
      case Opcode::Div: op = ExprOp::Div; break;
      case Opcode::Mod: op = ExprOp::Mod; break;
      case Opcode::And: op = ExprOp::BitAnd; break;
      case Opcode::Or: op = ExprOp::BitOr; break;
      case Opcode::Xor: op = ExprOp::BitXor; break;
      case Opcode::Shl: op = ExprOp::Shl; break;
      default: op = ExprOp::Shr; break;
      }
      if ((op == ExprOp::Div || op == ExprOp::Mod) && b == 0) trap("ArithmeticException: / by zero");
      stack.push_back(CValue::of_int(apply_int_op(op, a, b)));
      ++pc;
      break;
    }
    case Opcode::IfEq: branch(pop().num == 0, ins); break;
    case Opcode::IfNe: branch(pop().num != 0, ins); break;
    case Opcode::IfLt: branch(pop().num < 0, ins); break;
    case Opcode::IfGe: branch(pop().num >= 0, ins); break;
    case Opcode::IfGt: branch(pop().num > 0, ins); break;
    case Opcode::IfLe: branch(pop().num <= 0, ins); break;
    case Opcode::IfICmpEq: case Opcode::IfICmpNe: case Opcode::IfICmpLt:
    case Opcode::IfICmpGe: case Opcode::IfICmpGt: case Opcode::IfICmpLe: {
      auto b = pop().num, a = pop().num;
      bool t = false;
      switch (ins.op) {
      case Opcode::IfICmpEq: t = a == b; break;
      case Opcode::IfICmpNe: t = a != b; break;
      case Opcode::IfICmpLt: t = a < b; break;
      case Opcode::IfICmpGe: t = a >= b; break;
      case Opcode::IfICmpGt: t = a > b; break;
      default: t = a <= b; break;
      }
      branch(t, ins);
      break;
    }
    case Opcode::IfNull: branch(pop().kind == CValue::Kind::Null, ins); break;
    case Opcode::IfNonNull: branch(pop().kind != CValue::Kind::Null, ins); break;
    case Opcode::IfACmpEq: case Opcode::IfACmpNe: {
      auto b = pop(), a = pop();
      bool same = a.kind == b.kind && a.id == b.id;
      branch(ins.op == Opcode::IfACmpEq ? same : !same, ins);
      break;
    }
    case Opcode::Goto: pc = ins.target; break;
    case Opcode::New: {
      ensure_init(ins.owner);
      CObject o;
      o.cls = ins.owner;
      for (const auto &f : program_.instance_layout(ins.owner)) o.fields.push_back(default_value(f.type));
      stack.push_back(CValue::ref(heap_.alloc(std::move(o))));
      ++pc;
      break;
    }
    case Opcode::GetField: {
      auto &o = object_of(pop());
      stack.push_back(o.fields[static_cast<std::size_t>(ins.slot)]);
      ++pc;
      break;
    }
    case Opcode::PutField: {
      auto v = pop();
      auto &o = object_of(pop());
      o.fields[static_cast<std::size_t>(ins.slot)] = v;
      adopt_type(v, program_.instance_layout(o.cls)[static_cast<std::size_t>(ins.slot)].type);
      ++pc;
      break;
    }
    case Opcode::GetStatic:
      ensure_init(ins.decl_class);
      stack.push_back(heap_.classes[ins.decl_class].statics[static_cast<std::size_t>(ins.slot)]);
      ++pc;
      break;
    case Opcode::PutStatic: {
      ensure_init(ins.decl_class);
      auto v = pop();
      heap_.classes[ins.decl_class].statics[static_cast<std::size_t>(ins.slot)] = v;
      adopt_type(v, program_.get_class(ins.decl_class).static_fields[static_cast<std::size_t>(ins.slot)].type);
      ++pc;
      break;
    }
    case Opcode::NewArray: {
      auto n = pop().num;
      if (n < 0) trap("NegativeArraySizeException");
      CArray arr;
      arr.elem = ins.type;
      arr.values.assign(static_cast<std::size_t>(n), default_value(ins.type));
      stack.push_back(CValue::ref(heap_.alloc(std::move(arr))));
      ++pc;
      break;
    }
    case Opcode::AALoad: case Opcode::IALoad: {
      auto i = pop().num;
      auto av = pop();
      auto &arr = array_of(av);
      if (i < 0 || static_cast<std::size_t>(i) >= arr.values.size()) trap("ArrayIndexOutOfBoundsException");
      auto v = arr.values[static_cast<std::size_t>(i)];
      record(ins.op == Opcode::AALoad ? "aaload" : "iaload", av, std::to_string(i), v);
      stack.push_back(v);
      ++pc;
      break;
    }
    case Opcode::AAStore: case Opcode::IAStore: {
      auto v = pop();
      auto i = pop().num;
      auto &arr = array_of(pop());
      if (i < 0 || static_cast<std::size_t>(i) >= arr.values.size()) trap("ArrayIndexOutOfBoundsException");
      arr.values[static_cast<std::size_t>(i)] = v;
      if (arr.elem.kind != Type::Kind::Void) adopt_type(v, arr.elem);
      ++pc;
      break;
    }
    case Opcode::ArrayLength:
      stack.push_back(CValue::of_int(static_cast<std::int32_t>(array_of(pop()).values.size())));
      ++pc;
      break;
    case Opcode::InvokeVirtual: case Opcode::InvokeSpecial: case Opcode::InvokeStatic: {
      std::optional<CValue> r;
      if (ins.op == Opcode::InvokeStatic && ins.is_extern) {
        const auto *decl = program_.find_extern(ins.owner + "." + ins.member);
        std::vector<CValue> a(stack.end() - static_cast<std::ptrdiff_t>(decl->params.size()), stack.end());
        stack.resize(stack.size() - decl->params.size());
        r = call_extern(*decl, a);
      } else if (ins.op == Opcode::InvokeStatic) {
        ensure_init(ins.owner);
        const auto &callee = program_.get_method(ins.owner + "." + ins.member);
        std::vector<CValue> a(stack.end() - static_cast<std::ptrdiff_t>(callee.params.size()), stack.end());
        stack.resize(stack.size() - callee.params.size());
        r = run(callee, std::move(a));
        cur_method_ = &m;
      } else {
        const auto &decl = resolve_dispatch(program_, ins.owner, ins.member);
        auto n = decl.params.size() + 1;
        std::vector<CValue> a(stack.end() - static_cast<std::ptrdiff_t>(n), stack.end());
        stack.resize(stack.size() - n);
        if (ins.op == Opcode::InvokeSpecial) {
          object_of(a[0]);
          r = run(decl, std::move(a));
        } else {
          r = invoke_virtual(ins, std::move(a));
        }
        cur_method_ = &m;
      }
      if (r) stack.push_back(*r);
      ++pc;
      break;
    }
    case Opcode::InvokeIntrinsic: {
      auto r = call_intrinsic(ins.intrinsic, stack);
      if (r) stack.push_back(*r);
      ++pc;
      break;
    }
    case Opcode::Return:
      if (m.ret.kind != Type::Kind::Void) result = pop();
      cur_method_ = saved_method;
      cur_pc_ = saved_pc;
      return result;
    case Opcode::SConcat: {
      auto b = pop(), a = pop();
      std::string s = text_of(a) + text_of(b);
      stack.push_back(CValue::ref(new_string(std::move(s))));
      ++pc;
      break;
    }
    case Opcode::SEquals: {
      auto b = pop(), a = pop();
      const auto &ta = text_of(a);
      bool eq = b.is_ref() && ta == text_of(b);
      stack.push_back(CValue::of_int(eq ? 1 : 0));
      ++pc;
      break;
    }
    case Opcode::Throw: {
      auto v = pop();
      std::string what = "throw";
      if (v.is_ref())
        if (const auto *o = std::get_if<CObject>(&heap_.cell(v.id))) what += " " + o->cls;
      trap(what);
    }
    }
  }
}

// Builds the concrete counterpart of a lazily initialized symbolic input.
CValue materialize(Machine &vm, const Program &program, const Bindings &b, const std::string &prefix,
                   const Type &t) {
  auto find = [&](const std::string &k) -> const ModelValue * {
    auto it = b.find(k);
    return it == b.end() ? nullptr : &it->second;
  };
  const auto *v = find(prefix);
  switch (t.kind) {
  case Type::Kind::Int: case Type::Kind::Bool:
    return CValue::of_int(v ? v->num : 0);
  case Type::Kind::Str:
    if (!v || v->sort != Sort::Str) return CValue::null();
    return CValue::ref(vm.new_string(v->text));
  case Type::Kind::Ref: {
    if (!v || v->is_null) return CValue::null();
    std::string cls = t.cls;
    if (const auto *c = find(prefix + ".$class"); c && c->sort == Sort::Str) cls = c->text;
    vm.ensure_init(cls);
    CObject o;
    o.cls = cls;
    for (const auto &f : program.instance_layout(cls))
      o.fields.push_back(materialize(vm, program, b, prefix + "." + f.name, f.type));
    return CValue::ref(vm.heap().alloc(std::move(o)));
  }
  case Type::Kind::Arr: {
    if (!v || v->is_null) return CValue::null();
    const auto *len = find(prefix + ".length");
    CArray arr;
    arr.elem = *t.elem;
    for (std::int32_t i = 0; len && i < len->num; ++i)
      arr.values.push_back(materialize(vm, program, b, prefix + "[" + std::to_string(i) + "]", *t.elem));
    return CValue::ref(vm.heap().alloc(std::move(arr)));
  }
  case Type::Kind::List: case Type::Kind::Map: case Type::Kind::Sparse: {
    if (!v || v->is_null) return CValue::null();
    CCollection c;
    c.kind = t.kind;
    c.elem = *t.elem;
    if (t.key) c.key = *t.key;
    return CValue::ref(vm.heap().alloc(std::move(c)));
  }
  case Type::Kind::Void:
    break;
  }
  return CValue::null();
}

CValue *step_slot(HeapState &heap, const Program &program, HeapId id, const Locator::Step &s) {
  auto &cell = heap.cell(id);
  if (auto *o = std::get_if<CObject>(&cell)) {
    if (s.kind != Locator::Step::Kind::Field) return nullptr;
    auto slot = program.field_slot(o->cls, s.name);
    return slot ? &o->fields[*slot] : nullptr;
  }
  if (auto *a = std::get_if<CArray>(&cell)) {
    if (s.kind != Locator::Step::Kind::Index || s.index < 0 || static_cast<std::size_t>(s.index) >= a->values.size())
      return nullptr;
    return &a->values[static_cast<std::size_t>(s.index)];
  }
  if (auto *c = std::get_if<CCollection>(&cell)) {
    if (s.kind == Locator::Step::Kind::Index && c->kind == Type::Kind::List) {
      if (s.index < 0 || static_cast<std::size_t>(s.index) >= c->items.size()) return nullptr;
      return &c->items[static_cast<std::size_t>(s.index)];
    }
    if (s.kind == Locator::Step::Kind::Key)
      for (auto &[k, v] : c->entries)
        if (k == s.key) return &v;
  }
  return nullptr;
}

void apply_object_binding(Machine &vm, const Program &program, const Locator &loc, const ModelValue &value) {
  if (value.sort == Sort::Ref || loc.steps.empty()) return; // symbolized snapshot refs are never null
  auto &heap = vm.heap();
  if (!heap.contains(loc.object)) throw Error(ErrorKind::Snapshot, "binding names absent object " + loc.str());
  HeapId cur = loc.object;
  for (std::size_t i = 0; i + 1 < loc.steps.size(); ++i) {
    auto *slot = step_slot(heap, program, cur, loc.steps[i]);
    if (!slot || !slot->is_ref()) throw Error(ErrorKind::Snapshot, "binding path broken at " + loc.str());
    cur = slot->id;
  }
  auto *slot = step_slot(heap, program, cur, loc.steps.back());
  if (!slot) throw Error(ErrorKind::Snapshot, "binding path broken at " + loc.str());
  *slot = vm.from_model(value, Type{});
}

void apply_overlay(Machine &vm, const Program &program, const SnapshotIndex &index, const AppRegistry &registry,
                   const Manifest &overlay) {
  auto &heap = vm.heap();
  for (auto id : skeleton_objects(index)) {
    const auto cls = heap.object(id).cls;
    auto layout = program.instance_layout(cls);
    for (std::size_t j = 0; j < layout.size(); ++j) {
      const auto &f = layout[j];
      bool is_arr = f.type.kind == Type::Kind::Arr;
      auto key = registry.manifest_key_for(cls + "." + f.name + (is_arr ? "[0]" : ""));
      if (!key) continue;
      auto it = overlay.find(*key);
      if (it == overlay.end()) continue;
      const auto &vals = it->second;
      auto scalar = [&](const Type &t, std::size_t k) -> CValue {
        if (k >= vals.size()) return t.kind == Type::Kind::Str ? CValue::ref(vm.new_string("")) : CValue::of_int(0);
        if (t.kind == Type::Kind::Str) return CValue::ref(vm.new_string(vals[k]));
        try {
          return CValue::of_int(std::stoi(vals[k]));
        } catch (const std::exception &) {
          throw Error(ErrorKind::Usage, "overlay value '" + vals[k] + "' for " + *key + " is not an integer");
        }
      };
      if (f.type.is_scalar()) {
        heap.object(id).fields[j] = scalar(f.type, 0);
      } else if (is_arr && f.type.elem->is_scalar()) {
        auto cur = heap.object(id).fields[j];
        if (cur.is_ref()) {
          auto n = heap.array(cur.id).values.size();
          for (std::size_t k = 0; k < n; ++k) {
            auto v = scalar(*f.type.elem, k);
            heap.array(cur.id).values[k] = v;
          }
        } else {
          CArray arr;
          arr.elem = *f.type.elem;
          for (std::size_t k = 0; k < vals.size(); ++k) arr.values.push_back(scalar(*f.type.elem, k));
          auto nid = heap.alloc(std::move(arr));
          heap.object(id).fields[j] = CValue::ref(nid);
        }
      }
    }
  }
}

} // namespace

std::vector<HeapId> skeleton_objects(const SnapshotIndex &index) {
  std::vector<HeapId> out;
  const auto &heap = index.heap();
  for (const auto &[id, cell] : heap.cells) {
    const auto *o = std::get_if<CObject>(&cell);
    if (!o) continue;
    for (const auto &v : o->fields) {
      bool hit = false;
      if (v.kind == CValue::Kind::Int) hit = v.num == index.skeleton_uid();
      else if (v.is_ref())
        if (const auto *s = std::get_if<CString>(&heap.cell(v.id))) hit = s->text == index.skeleton_package();
      if (hit) {
        out.push_back(id);
        break;
      }
    }
  }
  return out;
}

HeapState run_init(const Program &program, const SysConfig &config, const AppRegistry &apps, ExternHost *host) {
  apps.validate();
  const auto *entry = program.find_method(program.entry_method);
  if (!entry) throw Error(ErrorKind::Resolution, "entry method '" + program.entry_method + "' not found");
  if (!entry->is_static || !entry->params.empty())
    throw Error(ErrorKind::Resolution, "entry method must be static and take no parameters");
  Machine vm(program, HeapState{}, Machine::Mode::Init);
  vm.config = &config;
  vm.apps = &apps;
  vm.host = host;
  try {
    vm.ensure_init(entry->owner);
    vm.run(*entry, {});
  } catch (const Trap &t) {
    throw Error(ErrorKind::GuestTrap, "initialization trapped: " + t.message);
  }
  return std::move(vm.heap());
}

ReplayResult replay(const ReplayRequest &req) {
  if (!req.program || !req.snapshot || !req.driver) throw Error(ErrorKind::Usage, "replay needs program, snapshot and driver");
  const auto &program = *req.program;
  const auto &driver = *req.driver;
  Machine vm(program, req.snapshot->heap(), Machine::Mode::Replay);
  vm.skeleton_uid = req.snapshot->skeleton_uid();
  vm.skeleton_package = req.snapshot->skeleton_package();
  vm.host = req.host;
  vm.bindings = &req.bindings;
  vm.target = req.target;
  vm.max_steps = req.max_steps;

  for (const auto &[text, value] : req.bindings) {
    if (text.rfind("static:", 0) == 0) continue;
    auto loc = Locator::parse(text);
    if (loc.root == Locator::Root::Object) apply_object_binding(vm, program, loc, value);
  }
  if (!req.overlay.empty()) {
    if (!req.registry) throw Error(ErrorKind::Usage, "overlay given without an app registry");
    apply_overlay(vm, program, *req.snapshot, *req.registry, req.overlay);
  }

  auto root = req.snapshot->find_root(driver.service);
  const auto &root_cls = vm.heap().object(root).cls;
  if (!program.is_subclass(root_cls, driver.cls))
    throw Error(ErrorKind::Driver, "service '" + driver.service + "' is a " + root_cls + ", not a " + driver.cls);
  const auto &method = resolve_dispatch(program, root_cls, driver.entrypoint);
  std::vector<CValue> args{CValue::ref(root)};
  for (std::size_t i = 0; i < driver.params.size(); ++i) {
    const auto &p = driver.params[i];
    if (!p.symbolic) {
      switch (p.literal.kind) {
      case ConstValue::Kind::Int: case ConstValue::Kind::Bool: args.push_back(CValue::of_int(p.literal.num)); break;
      case ConstValue::Kind::Str: args.push_back(CValue::ref(vm.new_string(p.literal.text))); break;
      case ConstValue::Kind::Null: args.push_back(CValue::null()); break;
      }
      continue;
    }
    auto name = Locator::param(static_cast<std::int32_t>(i)).str();
    if (!req.bindings.count(name)) throw Error(ErrorKind::Solver, "unassigned symbolic variable " + name);
    args.push_back(materialize(vm, program, req.bindings, name, p.type));
  }

  ReplayResult out;
  try {
    out.ret = vm.run(method, std::move(args));
    out.status = "returned";
  } catch (const Trap &t) {
    out.status = "guest-trap";
    out.trap = t.message;
  } catch (const TargetReached &) {
    out.status = "reached-target";
  }
  out.trace = std::move(vm.trace);
  out.accesses = std::move(vm.accesses);
  out.heap = std::move(vm.heap());
  return out;
}

} // namespace snapseed
