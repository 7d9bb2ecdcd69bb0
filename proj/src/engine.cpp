//===-- engine.cpp - Symbolic interpreter and slim tainting ---------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/engine.hpp"

#include "snapseed/extern_host.hpp"
#include "snapseed/snapshot.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace snapseed {

using Kind = SemValue::Kind;

SemValue SemValue::sym(ExprRef e) {
  if (e->op == ExprOp::IntConst || e->op == ExprOp::BoolConst) return of_int(e->value);
  SemValue v;
  v.kind = Kind::Sym;
  v.expr = as_int(std::move(e));
  return v;
}

TaintRef propagate_taint(Opcode op, const TaintRef &a, const TaintRef &b, std::int32_t rhs, std::int32_t result) {
  if (op != Opcode::Mod && op != Opcode::Sub) return nullptr;
  const TaintRef &src = (a && a->uid) ? a : b;
  if (!src || !src->uid) return nullptr;
  auto t = std::make_shared<TaintLabel>(*src);
  t->pkg = false;
  t->derivation += op == Opcode::Mod ? " -> mod " + std::to_string(rhs) : " -> -" + std::to_string(rhs);
  t->derivation += " -> " + std::to_string(result);
  return t;
}

const char *to_string(ExploreMode m) { return m == ExploreMode::Seeded ? "seeded" : "ucse"; }

SymCell &SymState::mut(HeapId id) {
  auto &p = heap.at(id);
  if (p.use_count() > 1) p = std::make_shared<SymCell>(*p);
  return *p;
}

HeapId SymState::alloc(SymCell c) {
  heap.push_back(std::make_shared<SymCell>(std::move(c)));
  ++allocations;
  return static_cast<HeapId>(heap.size() - 1);
}

namespace {

CellMeta &meta_of(SymCell &c) {
  return std::visit([](auto &x) -> CellMeta & { return x.meta; }, c);
}
const CellMeta &meta_of(const SymCell &c) {
  return std::visit([](const auto &x) -> const CellMeta & { return x.meta; }, c);
}

// --- fingerprints and audits ----------------------------------------------

void put_value(std::ostream &o, const SemValue &v) {
  switch (v.kind) {
  case Kind::Int: o << 'i' << v.num; break;
  case Kind::Null: o << 'n'; break;
  case Kind::Ref: o << 'r' << v.ref; break;
  case Kind::Sym: o << 's' << render_expr(v.expr); break;
  }
  if (v.taint) o << "{" << v.taint->uid << v.taint->pkg << v.taint->derivation << "}";
  o << ';';
}

void put_slot(std::ostream &o, const Slot &s) {
  put_value(o, s.v);
  o << s.snapshot_ref << s.semi << s.lazy << ',';
}

void put_meta(std::ostream &o, const CellMeta &m) {
  o << m.conc << m.handled << m.lazy << m.exact << m.label << '|' << m.loc << '|';
}

std::uint64_t fnv1a(const std::string &s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <class F> void for_each_slot(const SymState &s, F &&f) {
  for (std::size_t id = 1; id < s.heap.size(); ++id) {
    if (!s.heap[id]) continue;
    std::visit(
        [&](const auto &c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, SymObject>) {
            for (const auto &sl : c.fields) f(sl, id);
          } else if constexpr (std::is_same_v<T, SymArray>) {
            for (const auto &sl : c.values) f(sl, id);
          } else if constexpr (std::is_same_v<T, SymCollection>) {
            for (const auto &sl : c.items) f(sl, id);
            for (const auto &[k, sl] : c.entries) f(sl, id);
          }
        },
        *s.heap[id]);
  }
  for (const auto &[name, cs] : s.classes)
    for (const auto &sl : cs.statics) f(sl, HeapId{kNullId});
}

} // namespace

std::uint64_t state_fingerprint(const SymState &s) {
  std::ostringstream o;
  for (const auto &f : s.frames) {
    o << "F" << f.method->qualified() << '@' << f.pc << f.reexec << ':';
    for (const auto &v : f.locals) put_value(o, v);
    o << '/';
    for (const auto &v : f.stack) put_value(o, v);
  }
  for (std::size_t id = 1; id < s.heap.size(); ++id) {
    o << "\nC" << id;
    std::visit(
        [&](const auto &c) {
          using T = std::decay_t<decltype(c)>;
          put_meta(o, c.meta);
          if constexpr (std::is_same_v<T, SymObject>) {
            o << c.cls;
            for (const auto &sl : c.fields) put_slot(o, sl);
          } else if constexpr (std::is_same_v<T, SymArray>) {
            o << c.elem.str() << (c.sym_len ? render_expr(c.sym_len) : "");
            for (const auto &sl : c.values) put_slot(o, sl);
          } else if constexpr (std::is_same_v<T, SymString>) {
            o << render_expr(c.text);
          } else {
            o << static_cast<int>(c.kind) << c.elem.str() << (c.sym_len ? render_expr(c.sym_len) : "");
            for (const auto &sl : c.items) put_slot(o, sl);
            for (const auto &[k, sl] : c.entries) {
              o << key_str(k) << '=';
              put_slot(o, sl);
            }
          }
        },
        *s.heap[id]);
  }
  for (const auto &[n, cs] : s.classes) {
    o << "\nS" << n << cs.initialized;
    for (const auto &sl : cs.statics) put_slot(o, sl);
  }
  o << "\nM";
  for (const auto &[c, y] : s.conc2sym) o << c << '>' << y << ',';
  for (const auto &[y, c] : s.sym2conc) o << y << '<' << c << ',';
  for (const auto &[c, n] : s.migrations) o << c << '#' << n << ',';
  for (const auto &[t, id] : s.pool) o << t << '=' << id << ',';
  o << "\nP";
  for (const auto &c : s.pc.conjuncts) o << render_expr(c) << "&&";
  o << "\nT" << trace_text(s.trace) << s.migration.size() << ',' << s.inventory.size() << ',' << s.vars.size()
    << ',' << s.steps << ',' << s.model_valid;
  for (const auto &[id, v] : s.model) o << id << '=' << v.str() << ',';
  return fnv1a(o.str());
}

std::string check_state_invariants(const SymState &s, const SnapshotIndex &index) {
  if (s.conc2sym.size() != s.sym2conc.size()) return "conc2sym and sym2conc differ in size";
  for (const auto &[c, y] : s.conc2sym) {
    auto it = s.sym2conc.find(y);
    if (it == s.sym2conc.end() || it->second != c)
      return "conc2sym not injective at obj#" + std::to_string(c);
    if (y >= s.heap.size() || !s.heap[y]) return "conc2sym names missing cell sym#" + std::to_string(y);
    if (meta_of(*s.heap[y]).conc != c) return "cell sym#" + std::to_string(y) + " has the wrong origin";
    if (!index.has(c)) return "conc2sym names obj#" + std::to_string(c) + " absent from the snapshot";
  }
  for (const auto &[c, n] : s.migrations) {
    if (n != 1) return "obj#" + std::to_string(c) + " migrated " + std::to_string(n) + " times";
    if (!s.conc2sym.count(c)) return "migrated obj#" + std::to_string(c) + " missing from conc2sym";
  }
  std::string err;
  for_each_slot(s, [&](const Slot &sl, HeapId owner) {
    if (!err.empty()) return;
    if (sl.snapshot_ref) {
      if (!sl.v.is_ref() || !index.has(sl.v.ref))
        err = "snapshotRef slot in sym#" + std::to_string(owner) + " does not name a snapshot object";
    } else if (sl.v.is_ref() && (sl.v.ref >= s.heap.size() || !s.heap[sl.v.ref])) {
      err = "slot in sym#" + std::to_string(owner) + " names a missing cell";
    }
  });
  if (!err.empty()) return err;
  for (const auto &f : s.frames) {
    for (const auto *vs : {&f.locals, &f.stack})
      for (const auto &v : *vs)
        if (v.is_ref() && (v.ref >= s.heap.size() || !s.heap[v.ref]))
          return "frame of " + f.method->qualified() + " holds a dangling reference";
  }
  return {};
}

namespace {

struct FieldInfo {
  std::string name;
  Type type;
  std::string decl;
};

struct SlotRef {
  enum class Where : std::uint8_t { Field, Static, Elem, Item, Entry };
  Where where = Where::Field;
  HeapId cell = kNullId;
  std::string cls; // Static
  std::size_t idx = 0;
  KeyAtom key;
};

using Setter = std::function<void(SymState &, SemValue)>;

struct Arm {
  ExprRef cond; // null: unconditional
  std::function<void(SymState &)> apply;
  std::string trap; // terminate the arm as a guest trap
};

struct Checkpoint {
  std::shared_ptr<const SymState> saved;
  std::uint64_t digest = 0;
};

// Ends the current path early.
struct PathAbort {
  std::string status;
  std::string detail;
};

enum class Flow : std::uint8_t { Continue, Stop };

ExprOp arith_op(Opcode op) {
  switch (op) {
  case Opcode::Add: return ExprOp::Add;
  case Opcode::Sub: return ExprOp::Sub;
  case Opcode::Mul: return ExprOp::Mul;
  case Opcode::Div: return ExprOp::Div;
  case Opcode::Mod: return ExprOp::Mod;
  case Opcode::And: return ExprOp::BitAnd;
  case Opcode::Or: return ExprOp::BitOr;
  case Opcode::Xor: return ExprOp::BitXor;
  case Opcode::Shl: return ExprOp::Shl;
  default: return ExprOp::Shr;
  }
}

ExprOp cmp_op(Opcode op) {
  switch (op) {
  case Opcode::IfEq: case Opcode::IfICmpEq: return ExprOp::Eq;
  case Opcode::IfNe: case Opcode::IfICmpNe: return ExprOp::Ne;
  case Opcode::IfLt: case Opcode::IfICmpLt: return ExprOp::Lt;
  case Opcode::IfGe: case Opcode::IfICmpGe: return ExprOp::Ge;
  case Opcode::IfGt: case Opcode::IfICmpGt: return ExprOp::Gt;
  default: return ExprOp::Le;
  }
}

// Comparisons of sequals results against zero read as the string predicate.
ExprRef cmp_pred(ExprOp op, const ExprRef &a, const ExprRef &b) {
  if (a->op == ExprOp::BoolToInt && b->op == ExprOp::IntConst && b->value == 0) {
    const auto &p = a->kids[0];
    switch (op) {
    case ExprOp::Ne: case ExprOp::Gt: return p;
    case ExprOp::Eq: case ExprOp::Le: return mk_not(p);
    default: break;
    }
  }
  return mk_binary(op, a, b);
}

ModelValue default_model_value(const Expr &var) {
  switch (var.sort) {
  case Sort::Str: return ModelValue::of_str(var.domain.strs.empty() ? "" : var.domain.strs.front());
  case Sort::Ref: return ModelValue::of_null(false);
  default: break;
  }
  if (!var.domain.ints.empty()) return ModelValue::of_int(var.domain.ints.front());
  return ModelValue::of_int(var.domain.contains(0) ? 0 : var.domain.lo);
}

void complete_model(Model &m, const ExprRef &e) {
  std::map<std::uint32_t, ExprRef> vars;
  collect_vars(e, vars);
  for (const auto &[id, v] : vars)
    if (!m.count(id)) m[id] = default_model_value(*v);
}

bool is_lazy_kind(const Type &t) { return !t.is_scalar() && t.kind != Type::Kind::Void; }

class Engine {
public:
  Engine(const Program &p, const SnapshotIndex &i, const TestDriver &d, const ExploreOptions &o)
      : P(p), I(i), D(d), O(o), rng_(o.seed) {
    sopts_.step_budget = O.budget.solver_steps;
    sopts_.seed = O.seed;
    for (const auto &lit : P.string_literals()) sopts_.string_universe.push_back(lit);
    if (O.target) {
      target_method_ = P.find_method(O.target->method);
      if (!target_method_) throw Error(ErrorKind::Resolution, "unknown target method " + O.target->method);
      prune_ = target_method_->name != "clinit";
      if (prune_) {
        for (const auto &[m, dist] : CallGraph(P).distances_to(O.target->method)) reach_methods_.insert(m);
        reach_methods_.insert(O.target->method);
      }
    }
  }

  ExploreResult run();

private:
  const Program &P;
  const SnapshotIndex &I;
  const TestDriver &D;
  const ExploreOptions &O;
  SolverOptions sopts_;
  ExploreResult out_;
  std::mt19937_64 rng_;
  std::vector<std::variant<SymState, Checkpoint>> work_;
  std::vector<SymState> children_;
  Flow flow_ = Flow::Continue;
  bool exhausted_ = false;
  const MethodDef *target_method_ = nullptr;
  bool prune_ = false;
  std::set<std::string> reach_methods_;
  std::map<const MethodDef *, std::vector<char>> can_reach_;
  std::map<std::string, std::vector<FieldInfo>> layouts_;

  bool seeded() const { return O.mode == ExploreMode::Seeded; }

  // --- small helpers -------------------------------------------------------

  const std::vector<FieldInfo> &layout(const std::string &cls) {
    auto it = layouts_.find(cls);
    if (it != layouts_.end()) return it->second;
    std::vector<FieldInfo> out;
    auto chain = P.ancestry(cls);
    for (auto c = chain.rbegin(); c != chain.rend(); ++c)
      for (const auto &f : P.get_class(*c).instance_fields) out.push_back({f.name, f.type, *c});
    return layouts_.emplace(cls, std::move(out)).first->second;
  }

  HeapId fresh(SymState &s, SymCell c, std::string label = {}) {
    auto id = s.alloc(std::move(c));
    auto &m = meta_of(s.mut(id));
    m.loc = "sym#" + std::to_string(id);
    if (!label.empty()) m.label = std::move(label);
    return id;
  }

  HeapId literal(SymState &s, const std::string &text) {
    auto it = s.pool.find(text);
    if (it != s.pool.end()) return it->second;
    auto id = fresh(s, SymString{{}, mk_str(text)});
    s.pool.emplace(text, id);
    return id;
  }

  VarDomain domain_for(const std::string &label, bool boolean) {
    static const std::regex index_re(R"(\[\d+\])");
    for (const auto *table : {&D.domains, &O.domains}) {
      if (auto it = table->find(label); it != table->end()) return it->second;
      auto general = std::regex_replace(label, index_re, "[]");
      if (general != label)
        if (auto it = table->find(general); it != table->end()) return it->second;
    }
    return boolean ? VarDomain::boolean() : VarDomain{};
  }

  ExprRef new_var(SymState &s, Sort sort, const std::string &label, const std::string &loc,
                  std::optional<VarDomain> dom = std::nullopt, bool boolean = false) {
    VarDomain d = dom ? *dom : (sort == Sort::Ref ? VarDomain{} : domain_for(label, boolean));
    auto id = static_cast<std::uint32_t>(s.vars.size());
    auto e = mk_var(id, sort, loc, d);
    s.vars.push_back({id, sort, label, loc, d});
    return e;
  }

  SemValue fresh_scalar(SymState &s, Type::Kind k, const std::string &label, const std::string &loc) {
    if (k == Type::Kind::Str) {
      auto text = new_var(s, Sort::Str, label, loc);
      auto id = s.alloc(SymString{{kNullId, true, false, true, label, loc}, text});
      return SemValue::of_ref(id);
    }
    return SemValue::sym(new_var(s, Sort::Int, label, loc, std::nullopt, k == Type::Kind::Bool));
  }

  const SymCell &cell(const SymState &s, const SemValue &v) { return s.cell(v.ref); }

  std::string where(const SymState &s) {
    if (s.frames.empty()) return "";
    const auto &f = s.frames.back();
    return " at " + f.method->qualified() + "@" + std::to_string(f.pc);
  }

  Flow trap(SymState &s, const std::string &what) {
    finish(s, "guest-trap", what + where(s));
    return Flow::Stop;
  }

  ModelValue concretize(SymState &s, const ExprRef &e) {
    if (e->is_const()) return evaluate(e, {});
    if (s.model_valid) {
      try {
        auto v = evaluate(e, s.model);
        pin(s, e, v);
        return v;
      } catch (const Error &) {
      }
    }
    ++out_.metrics.solver_calls;
    auto o = check_sat(s.pc, sopts_);
    if (o.result != SatResult::Sat) throw PathAbort{"budget-exhausted", "solver gave up while concretizing"};
    s.model = std::move(o.model);
    s.model_valid = true;
    complete_model(s.model, e);
    auto v = evaluate(e, s.model);
    pin(s, e, v);
    return v;
  }

  void pin(SymState &s, const ExprRef &e, const ModelValue &v) {
    complete_model(s.model, e);
    s.pc.conjuncts.push_back(v.sort == Sort::Str ? mk_str_eq(e, mk_str(v.text)) : mk_binary(ExprOp::Eq, e, mk_int(v.num)));
  }

  std::int32_t int_of(SymState &s, const SemValue &v) {
    return v.kind == Kind::Sym ? concretize(s, v.expr).num : v.num;
  }

  ExprRef text_expr(const SymState &s, const SemValue &v) {
    const auto *str = std::get_if<SymString>(&s.cell(v.ref));
    if (!str) throw PathAbort{"guest-trap", "ClassCastException: not a string"};
    return str->text;
  }

  // --- slots -----------------------------------------------------------------

  Slot &slot_at(SymState &s, const SlotRef &r) {
    switch (r.where) {
    case SlotRef::Where::Field: return std::get<SymObject>(s.mut(r.cell)).fields.at(r.idx);
    case SlotRef::Where::Static: return s.classes.at(r.cls).statics.at(r.idx);
    case SlotRef::Where::Elem: return std::get<SymArray>(s.mut(r.cell)).values.at(r.idx);
    case SlotRef::Where::Item: return std::get<SymCollection>(s.mut(r.cell)).items.at(r.idx);
    case SlotRef::Where::Entry: {
      auto &c = std::get<SymCollection>(s.mut(r.cell));
      for (auto &[k, sl] : c.entries)
        if (k == r.key) return sl;
      break;
    }
    }
    throw Error(ErrorKind::Verification, "dangling slot reference");
  }

  std::string slot_loc(const SymState &s, const SlotRef &r) {
    switch (r.where) {
    case SlotRef::Where::Field: {
      const auto &o = std::get<SymObject>(s.cell(r.cell));
      return o.meta.loc + "." + layout(o.cls).at(r.idx).name;
    }
    case SlotRef::Where::Static:
      return "static:" + r.cls + "." + P.get_class(r.cls).static_fields.at(r.idx).name;
    case SlotRef::Where::Elem: case SlotRef::Where::Item:
      return meta_of(s.cell(r.cell)).loc + "[" + std::to_string(r.idx) + "]";
    case SlotRef::Where::Entry:
      return meta_of(s.cell(r.cell)).loc + "{" + key_str(r.key) + "}";
    }
    return {};
  }

  std::string parent_loc(const SymState &s, const SlotRef &r) {
    return r.where == SlotRef::Where::Static ? "class " + r.cls : meta_of(s.cell(r.cell)).loc;
  }

  static Slot to_slot(const CValue &v) {
    Slot s;
    if (v.kind == CValue::Kind::Int) s.v = SemValue::of_int(v.num);
    else if (v.is_ref()) {
      s.v = SemValue::of_ref(v.id);
      s.snapshot_ref = true;
    }
    return s;
  }

  static SemValue default_sem(const Type &t) {
    return t.is_numeric() ? SemValue::of_int(0) : SemValue::null();
  }

  void adopt_type(SymState &s, const SemValue &v, const Type &t) {
    if (!v.is_ref()) return;
    const auto *c = std::get_if<SymCollection>(&s.cell(v.ref));
    if (!c || c->elem.kind != Type::Kind::Void || t.kind != c->kind || !t.elem) return;
    auto &m = std::get<SymCollection>(s.mut(v.ref));
    m.elem = *t.elem;
    if (t.key) m.key = *t.key;
  }

  // --- class initialization ----------------------------------------------------

  void copy_snapshot_statics(SymState &s, const std::string &cls) {
    auto &cs = s.classes[cls];
    cs.initialized = true;
    cs.statics.clear();
    std::optional<std::vector<CValue>> st;
    if (I.knows_class(cls)) st = I.class_statics(cls);
    if (st) {
      for (const auto &v : *st) cs.statics.push_back(to_slot(v));
      s.migration.push_back({"class " + cls, "initClass", kNullId, kNullId});
      return;
    }
    for (const auto &f : P.get_class(cls).static_fields) cs.statics.push_back(Slot{const_sem(s, f)});
  }

  SemValue const_sem(SymState &s, const FieldDef &f) {
    if (!f.init) return default_sem(f.type);
    switch (f.init->kind) {
    case ConstValue::Kind::Int: case ConstValue::Kind::Bool: return SemValue::of_int(f.init->num);
    case ConstValue::Kind::Str: return SemValue::of_ref(literal(s, f.init->text));
    case ConstValue::Kind::Null: break;
    }
    return SemValue::null();
  }

  // Classes of migrated objects were initialized by the snapshot run.
  void ensure_class_migrated(SymState &s, const std::string &cls) {
    for (const auto &c : P.ancestry(cls))
      if (!s.classes[c].initialized) {
        if (seeded()) copy_snapshot_statics(s, c);
        else lazy_statics(s, c);
      }
  }

  void lazy_statics(SymState &s, const std::string &cls) {
    auto &cs = s.classes[cls];
    cs.initialized = true;
    cs.statics.assign(P.get_class(cls).static_fields.size(), Slot{SemValue::null(), false, false, true});
  }

  // False when a class initializer frame was pushed; the current instruction
  // runs again once it returns.
  bool ensure_class(SymState &s, const std::string &cls) {
    if (s.classes[cls].initialized) return true;
    const auto &def = P.get_class(cls);
    if (!def.super.empty() && !ensure_class(s, def.super)) return false;
    if (!seeded()) {
      lazy_statics(s, cls);
      return true;
    }
    if (I.knows_class(cls) && I.class_statics(cls)) {
      copy_snapshot_statics(s, cls);
      return true;
    }
    auto &cs = s.classes[cls];
    cs.initialized = true;
    cs.statics.clear();
    for (const auto &f : def.static_fields) {
      auto v = const_sem(s, f);
      s.classes[cls].statics.push_back(Slot{v});
    }
    if (const auto *m = def.find_method("clinit"); m && m->is_static) {
      Frame f;
      f.method = m;
      f.locals.resize(m->locals);
      f.reexec = true;
      s.frames.push_back(std::move(f));
      return false;
    }
    return true;
  }

  // --- migration -----------------------------------------------------------------

  HeapId migrate(SymState &s, HeapId conc, const std::string &label, const std::string &parent, const std::string &via) {
    if (auto it = s.conc2sym.find(conc); it != s.conc2sym.end()) return it->second;
    const auto &cc = I.heap().cell(conc);
    if (const auto *str = std::get_if<CString>(&cc)) {
      if (s.pool.count(str->text) || P.string_literals().count(str->text)) return literal(s, str->text);
    }
    CellMeta meta{conc, false, false, true, label, "obj#" + std::to_string(conc)};
    SymCell cell = std::visit(
        [&](const auto &c) -> SymCell {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, CObject>) {
            ensure_class_migrated(s, c.cls);
            SymObject o{meta, c.cls, {}};
            for (const auto &v : c.fields) o.fields.push_back(to_slot(v));
            return o;
          } else if constexpr (std::is_same_v<T, CArray>) {
            SymArray a{meta, c.elem, {}, nullptr};
            for (const auto &v : c.values) a.values.push_back(to_slot(v));
            return a;
          } else if constexpr (std::is_same_v<T, CString>) {
            return SymString{meta, mk_str(c.text)};
          } else {
            SymCollection k{meta, c.kind, c.key, c.elem, {}, {}, nullptr};
            for (const auto &v : c.items) k.items.push_back(to_slot(v));
            for (const auto &[key, v] : c.entries) k.entries.emplace_back(key, to_slot(v));
            return k;
          }
        },
        cc);
    auto id = s.alloc(std::move(cell));
    s.conc2sym[conc] = id;
    s.sym2conc[id] = conc;
    ++s.migrations[conc];
    s.migration.push_back({parent, via, conc, id});
    ++out_.metrics.migrations;
    if (O.check_invariants) audit(s, "after migrating obj#" + std::to_string(conc));
    return id;
  }

  void audit(const SymState &s, const std::string &when) {
    auto err = check_state_invariants(s, I);
    if (!err.empty()) out_.metrics.invariant_violations.push_back(err + " (" + when + ")");
  }

  // --- lazy initialization ---------------------------------------------------------

  HeapId lazy_object(SymState &s, const std::string &cls, const std::string &label, const std::string &loc, bool exact) {
    SymObject o{{kNullId, false, true, exact, label, loc}, cls, {}};
    o.fields.assign(layout(cls).size(), Slot{SemValue::null(), false, false, true});
    auto id = s.alloc(std::move(o));
    if (loc.empty()) meta_of(s.mut(id)).loc = "sym#" + std::to_string(id);
    return id;
  }

  // Arms choosing a fresh value for a reference-typed input.
  std::vector<Arm> lazy_arms(SymState &s, const Type &t, const std::string &label, const std::string &loc, Setter set) {
    auto n = new_var(s, Sort::Ref, label, loc);
    auto is_null = mk_is_null(n);
    auto nonnull = mk_not(is_null);
    std::vector<Arm> arms;
    arms.push_back({is_null, [set](SymState &c) { set(c, SemValue::null()); }, {}});
    const bool exact = seeded();
    switch (t.kind) {
    case Type::Kind::Ref:
      arms.push_back({nonnull, [=, this](SymState &c) { set(c, SemValue::of_ref(lazy_object(c, t.cls, label, loc, exact))); }, {}});
      break;
    case Type::Kind::Arr: case Type::Kind::List: {
      const bool arr = t.kind == Type::Kind::Arr;
      auto make = [=, this](SymState &c, std::int32_t k, ExprRef sym_len) {
        Slot lz{SemValue::null(), false, false, true};
        SymCell cell;
        if (arr) cell = SymArray{{kNullId, false, true, true, label, loc}, *t.elem, std::vector<Slot>(static_cast<std::size_t>(k), lz), sym_len};
        else cell = SymCollection{{kNullId, false, true, true, label, loc}, t.kind, {}, *t.elem, std::vector<Slot>(static_cast<std::size_t>(k), lz), {}, sym_len};
        set(c, SemValue::of_ref(c.alloc(std::move(cell))));
      };
      if (seeded()) {
        auto len = new_var(s, Sort::Int, label + ".length", loc + ".length", VarDomain::range(0, O.max_lazy_length));
        for (std::int32_t k = 0; k <= O.max_lazy_length; ++k)
          arms.push_back({mk_and(nonnull, mk_binary(ExprOp::Eq, len, mk_int(k))), [=](SymState &c) { make(c, k, nullptr); }, {}});
      } else {
        auto len = new_var(s, Sort::Int, label + ".length", loc + ".length", VarDomain::range(0, INT32_MAX));
        arms.push_back({nonnull, [=](SymState &c) { make(c, 0, len); }, {}});
      }
      break;
    }
    case Type::Kind::Map: case Type::Kind::Sparse:
      arms.push_back({nonnull, [=, this](SymState &c) {
                        SymCollection m{{kNullId, false, true, true, label, loc}, t.kind, t.key ? *t.key : Type{}, *t.elem, {}, {}, nullptr};
                        (void)this;
                        set(c, SemValue::of_ref(c.alloc(std::move(m))));
                      }, {}});
      break;
    default:
      break;
    }
    return arms;
  }

  // Reads a slot, migrating, materializing and symbolizing as needed.
  // Empty when the state forked; flow_ then says how to continue.
  std::optional<SemValue> read(SymState &s, const SlotRef &r, const Type &t, const std::string &label, const std::string &via) {
    Slot *sl = &slot_at(s, r);
    if (sl->lazy) {
      auto loc = slot_loc(s, r);
      if (t.is_scalar() || !is_lazy_kind(t)) {
        SemValue v = t.is_scalar() ? fresh_scalar(s, t.kind, label, loc) : SemValue::null();
        sl = &slot_at(s, r);
        *sl = Slot{v};
      } else {
        auto arms = lazy_arms(s, t, label, loc, [r, this](SymState &c, SemValue v) { slot_at(c, r) = Slot{std::move(v)}; });
        flow_ = fork(s, arms);
        return std::nullopt;
      }
    }
    if (sl->snapshot_ref) {
      auto id = migrate(s, sl->v.ref, label, parent_loc(s, r), via);
      sl = &slot_at(s, r);
      sl->v = SemValue::of_ref(id);
      sl->snapshot_ref = false;
    }
    SemValue v = sl->v;
    if (sl->semi && v.is_ref()) symbolize(s, v.ref);
    return v;
  }

  // --- slim tainting -------------------------------------------------------------------

  // Scalar kind of an element, or Void for references.
  Type::Kind element_kind(const SymState &s, const Type &declared, const Slot &sl) {
    if (declared.is_scalar()) return declared.kind;
    if (declared.kind != Type::Kind::Void) return Type::Kind::Void;
    if (sl.v.is_int()) return Type::Kind::Int;
    if (sl.v.is_ref()) {
      if (sl.snapshot_ref) return std::holds_alternative<CString>(I.heap().cell(sl.v.ref)) ? Type::Kind::Str : Type::Kind::Void;
      if (std::holds_alternative<SymString>(s.cell(sl.v.ref))) return Type::Kind::Str;
    }
    return Type::Kind::Void;
  }

  // Replaces a scalar slot with a fresh variable unless it already holds one.
  std::uint32_t symbolize_slot(SymState &s, const SlotRef &r, Type::Kind k, const std::string &label) {
    auto loc = slot_loc(s, r);
    const auto &cur = slot_at(s, r).v;
    if (cur.kind == Kind::Sym && cur.expr->op == ExprOp::Var && cur.expr->text == loc) return cur.expr->var;
    if (cur.is_ref() && !slot_at(s, r).snapshot_ref)
      if (const auto *str = std::get_if<SymString>(&s.cell(cur.ref)); str && str->text->op == ExprOp::Var && str->text->text == loc)
        return str->text->var;
    auto v = fresh_scalar(s, k, label, loc);
    slot_at(s, r) = Slot{v};
    return static_cast<std::uint32_t>(s.vars.size() - 1);
  }

  std::vector<std::uint32_t> symbolize(SymState &s, HeapId id) {
    std::vector<std::uint32_t> vars;
    {
      auto &m = meta_of(s.mut(id));
      if (m.handled) return vars;
      m.handled = true;
    }
    auto handle = [&](const SlotRef &r, const Type &declared, const std::string &label) {
      auto &sl = slot_at(s, r);
      if (sl.lazy) return;
      auto k = element_kind(s, declared, sl);
      if (k != Type::Kind::Void) vars.push_back(symbolize_slot(s, r, k, label));
      else if (sl.v.is_ref()) sl.semi = true;
    };
    const auto &c = s.cell(id);
    if (const auto *o = std::get_if<SymObject>(&c)) {
      const auto &lay = layout(o->cls);
      for (std::size_t j = 0; j < lay.size(); ++j)
        handle({SlotRef::Where::Field, id, {}, j, {}}, lay[j].type, lay[j].decl + "." + lay[j].name);
    } else if (const auto *a = std::get_if<SymArray>(&c)) {
      auto elem = a->elem;
      auto label = a->meta.label;
      for (std::size_t j = 0; j < a->values.size(); ++j)
        handle({SlotRef::Where::Elem, id, {}, j, {}}, elem, label + "[" + std::to_string(j) + "]");
    } else if (const auto *k = std::get_if<SymCollection>(&c)) {
      auto elem = k->elem;
      auto label = k->meta.label;
      auto n = k->items.size();
      std::vector<KeyAtom> keys;
      for (const auto &e : k->entries) keys.push_back(e.first);
      for (std::size_t j = 0; j < n; ++j)
        handle({SlotRef::Where::Item, id, {}, j, {}}, elem, label + "[" + std::to_string(j) + "]");
      for (const auto &key : keys)
        handle({SlotRef::Where::Entry, id, {}, 0, key}, elem, label + "{" + key_str(key) + "}");
    }
    return vars;
  }

  // Element read keyed by a tainted index: the element becomes input.
  SemValue sink(SymState &s, const char *op, const SlotRef &r, const SemValue &key, SemValue v, const Type &declared,
                const std::string &index_text) {
    if (!key.taint || !(key.taint->uid || key.taint->pkg)) return v;
    const auto &cm = meta_of(s.cell(r.cell));
    InventoryEntry e;
    e.op = op;
    e.container = cm.loc;
    e.index = index_text;
    e.derivation = key.taint->derivation;
    if (v.is_ref())
      if (auto it = s.sym2conc.find(v.ref); it != s.sym2conc.end()) e.element_conc = it->second;
    std::string suffix = r.where == SlotRef::Where::Entry ? "{" + key_str(r.key) + "}" : "[" + std::to_string(r.idx) + "]";
    auto label = cm.label + suffix;
    auto k = element_kind(s, declared, slot_at(s, r));
    if (k == Type::Kind::Void && v.kind == Kind::Null && declared.kind == Type::Kind::Void) k = Type::Kind::Void;
    if (k != Type::Kind::Void) {
      e.vars.push_back(symbolize_slot(s, r, k, label));
      v = slot_at(s, r).v;
    } else if (v.is_ref()) {
      e.vars = symbolize(s, v.ref);
    }
    s.inventory.push_back(std::move(e));
    return v;
  }

  // --- forking ------------------------------------------------------------------------

  SatResult assume(SymState &c, const ExprRef &cond, bool &added) {
    added = false;
    if (cond->op == ExprOp::BoolConst) return cond->value ? SatResult::Sat : SatResult::Unsat;
    c.pc.conjuncts.push_back(cond);
    added = true;
    if (c.model_valid) {
      try {
        if (evaluate_pred(cond, c.model)) return SatResult::Sat;
      } catch (const Error &) {
      }
    }
    ++out_.metrics.solver_calls;
    auto o = check_sat(c.pc, sopts_);
    if (o.result == SatResult::Sat) {
      c.model = std::move(o.model);
      c.model_valid = true;
    }
    return o.result;
  }

  Flow fork(SymState &s, std::vector<Arm> &arms, bool dispatch = false) {
    struct Live {
      SymState st;
      const Arm *arm;
      bool added;
    };
    std::vector<Live> live;
    std::size_t unsat = 0;
    for (const auto &a : arms) {
      SymState c = s;
      bool added = false;
      if (a.cond) {
        auto r = assume(c, a.cond, added);
        if (r == SatResult::Unsat) {
          ++unsat;
          continue;
        }
        if (r == SatResult::Unknown) {
          ++out_.metrics.unknowns;
          continue;
        }
      }
      if (a.apply) a.apply(c);
      if (prune_ && (!a.trap.empty() || !viable(c))) {
        ++out_.metrics.pruned;
        continue;
      }
      live.push_back({std::move(c), &a, added});
    }
    if (dispatch && live.size() > 1) {
      out_.metrics.dispatch_forks += live.size();
      out_.metrics.max_dispatch_arms = std::max<std::uint64_t>(out_.metrics.max_dispatch_arms, live.size());
    }
    if (live.empty()) return Flow::Stop;
    if (live.size() == 1) {
      auto &l = live.front();
      if (l.added && unsat + 1 == arms.size()) l.st.pc.conjuncts.pop_back();
      const Arm *arm = l.arm;
      s = std::move(l.st);
      if (!arm->trap.empty()) return trap(s, arm->trap);
      return Flow::Continue;
    }
    if (out_.metrics.states + live.size() > O.budget.max_states) {
      exhausted_ = true;
      finish(s, "budget-exhausted", "state budget");
      return Flow::Stop;
    }
    out_.metrics.states += live.size();
    if (O.check_invariants) {
      auto saved = std::make_shared<const SymState>(s);
      work_.emplace_back(Checkpoint{saved, state_fingerprint(*saved)});
    }
    for (auto &l : live) {
      if (!l.arm->trap.empty()) trap(l.st, l.arm->trap);
      else children_.push_back(std::move(l.st));
    }
    return Flow::Stop;
  }

  // --- target pruning ------------------------------------------------------------------

  const std::vector<char> &can_reach(const MethodDef *m) {
    auto it = can_reach_.find(m);
    if (it != can_reach_.end()) return it->second;
    const auto &body = m->body;
    std::vector<char> good(body.size() + 1, 0);
    std::vector<char> hit(body.size(), 0);
    const bool is_target = m == target_method_;
    for (std::size_t pc = 0; pc < body.size(); ++pc) {
      const auto &ins = body[pc];
      if (is_target && pc == O.target->pc) hit[pc] = 1;
      if (ins.op == Opcode::InvokeVirtual || ins.op == Opcode::InvokeStatic || ins.op == Opcode::InvokeSpecial)
        for (const auto &callee : static_callees(P, ins))
          if (reach_methods_.count(callee)) hit[pc] = 1;
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = body.size(); i-- > 0;) {
        if (good[i]) continue;
        const auto &ins = body[i];
        bool g = hit[i];
        if (!g) {
          if (ins.op == Opcode::Return || ins.op == Opcode::Throw) {
          } else if (ins.op == Opcode::Goto) {
            g = good[ins.target];
          } else if (is_branch(ins.op)) {
            g = good[i + 1] || good[ins.target];
          } else {
            g = good[i + 1];
          }
        }
        if (g) {
          good[i] = 1;
          changed = true;
        }
      }
    }
    return can_reach_.emplace(m, std::move(good)).first->second;
  }

  bool viable(const SymState &s) {
    if (s.frames.empty()) return false;
    for (std::size_t i = s.frames.size(); i-- > 0;) {
      const auto &f = s.frames[i];
      std::uint32_t pc = f.pc;
      if (i + 1 < s.frames.size() && !s.frames[i + 1].reexec) ++pc;
      if (can_reach(f.method)[pc]) return true;
    }
    return false;
  }

  // --- terminals --------------------------------------------------------------------

  std::string value_text(const SymState &s, const SemValue &v, int depth = 0) {
    switch (v.kind) {
    case Kind::Int: return std::to_string(v.num);
    case Kind::Sym: return render_expr(v.expr);
    case Kind::Null: return "null";
    case Kind::Ref: break;
    }
    const auto &c = s.cell(v.ref);
    if (const auto *str = std::get_if<SymString>(&c))
      return str->text->op == ExprOp::StrConst ? nlohmann::json(str->text->text).dump() : render_expr(str->text);
    if (const auto *k = std::get_if<SymCollection>(&c); k && k->kind == Type::Kind::List && depth < 2) {
      std::string out = "[";
      for (std::size_t i = 0; i < k->items.size(); ++i) {
        if (i) out += ", ";
        const auto &sl = k->items[i];
        if (sl.snapshot_ref) {
          const auto &cc = I.heap().cell(sl.v.ref);
          out += std::holds_alternative<CString>(cc) ? nlohmann::json(std::get<CString>(cc).text).dump()
                                                      : "obj#" + std::to_string(sl.v.ref);
        } else if (sl.lazy) {
          out += "?";
        } else {
          out += value_text(s, sl.v, depth + 1);
        }
      }
      return out + "]";
    }
    if (const auto *o = std::get_if<SymObject>(&c)) return o->cls + "@" + o->meta.loc;
    return meta_of(c).loc;
  }

  void finish(SymState &s, const std::string &status, const std::string &detail) {
    if (status == "budget-exhausted") out_.metrics.budget_exhausted = true;
    if (O.check_invariants) audit(s, "at a " + status + " terminal");
    PathReport r;
    r.status = status;
    r.detail = detail;
    r.pc = s.pc;
    r.trace = s.trace;
    r.migration = s.migration;
    r.inventory = s.inventory;
    r.vars = s.vars;
    if (s.ret) {
      if (s.ret->is_int()) r.ret = s.ret->as_expr();
      r.ret_text = value_text(s, *s.ret);
    }
    Model model = s.model;
    bool valid = s.model_valid;
    if (O.property && status == "returned") {
      auto prop = O.property(r);
      if (prop) {
        r.pc = conjoin_property(r.pc, prop);
        bool holds = false;
        if (valid) {
          try {
            holds = evaluate_pred(prop, model);
          } catch (const Error &) {
          }
        }
        if (!holds) {
          ++out_.metrics.solver_calls;
          auto o = check_sat(r.pc, sopts_);
          if (o.result != SatResult::Sat) {
            if (o.result == SatResult::Unknown) ++out_.metrics.unknowns;
            return;
          }
          model = std::move(o.model);
          valid = true;
        }
      }
    }
    if (!valid && status != "budget-exhausted") {
      ++out_.metrics.solver_calls;
      auto o = check_sat(r.pc, sopts_);
      if (o.result == SatResult::Unsat) return;
      if (o.result == SatResult::Unknown) ++out_.metrics.unknowns;
      model = std::move(o.model);
    }
    r.model = std::move(model);
    r.id = static_cast<std::uint32_t>(out_.paths.size());
    out_.paths.push_back(std::move(r));
    ++out_.metrics.paths;
  }

  // --- bootstrap -----------------------------------------------------------------------

  std::vector<SymState> bootstrap() {
    SymState s;
    SemValue recv;
    std::string cls;
    if (seeded()) {
      auto root = I.find_root(D.service);
      const auto &o = I.get_object(root);
      if (!P.is_subclass(o.cls, D.cls))
        throw Error(ErrorKind::Driver, "service '" + D.service + "' is a " + o.cls + ", not a " + D.cls);
      recv = SemValue::of_ref(migrate(s, root, D.cls, "driver", "bootstrap " + D.service));
      cls = o.cls;
    } else {
      recv = SemValue::of_ref(lazy_object(s, D.cls, D.cls, "", true));
      cls = D.cls;
    }
    const auto &m = resolve_dispatch(P, cls, D.entrypoint);
    if (m.params.size() != D.params.size())
      throw Error(ErrorKind::Driver, "driver gives " + std::to_string(D.params.size()) + " parameters for " + m.qualified());
    Frame f;
    f.method = &m;
    f.locals.resize(std::max<std::size_t>(m.locals, m.arg_slots()));
    f.locals[0] = recv;
    s.frames.push_back(std::move(f));

    std::vector<SymState> states;
    states.push_back(std::move(s));
    for (std::size_t i = 0; i < D.params.size(); ++i) {
      const auto &spec = D.params[i];
      const auto &t = m.params[i].type;
      const auto loc = Locator::param(static_cast<std::int32_t>(i)).str();
      auto set = [i](SymState &c, SemValue v) { c.frames.back().locals[i + 1] = std::move(v); };
      if (!spec.symbolic) {
        for (auto &st : states) {
          SemValue v;
          switch (spec.literal.kind) {
          case ConstValue::Kind::Int: case ConstValue::Kind::Bool: v = SemValue::of_int(spec.literal.num); break;
          case ConstValue::Kind::Str: v = SemValue::of_ref(fresh(st, SymString{{}, mk_str(spec.literal.text)})); break;
          case ConstValue::Kind::Null: break;
          }
          set(st, v);
        }
        continue;
      }
      if (t.is_numeric()) {
        for (auto &st : states) {
          auto dom = spec.domain ? spec.domain : std::optional<VarDomain>{};
          if (!dom) dom = domain_for(loc, t.kind == Type::Kind::Bool);
          set(st, SemValue::sym(new_var(st, Sort::Int, loc, loc, dom)));
        }
        continue;
      }
      if (t.kind == Type::Kind::Str) {
        for (auto &st : states) set(st, fresh_scalar(st, Type::Kind::Str, loc, loc));
        continue;
      }
      std::vector<SymState> next;
      for (auto &st : states) {
        auto arms = lazy_arms(st, t, loc, loc, set);
        for (const auto &a : arms) {
          SymState c = st;
          c.pc.conjuncts.push_back(a.cond);
          c.model_valid = false;
          a.apply(c);
          next.push_back(std::move(c));
        }
      }
      states = std::move(next);
    }
    return states;
  }

  // --- execution -------------------------------------------------------------------------

  void push_frame(SymState &s, const MethodDef &callee, std::size_t n, std::optional<SemValue> receiver = std::nullopt) {
    if (s.frames.size() >= O.budget.max_call_depth) throw PathAbort{"budget-exhausted", "call depth"};
    auto &cf = s.frames.back();
    std::vector<SemValue> args(cf.stack.end() - static_cast<std::ptrdiff_t>(n), cf.stack.end());
    cf.stack.resize(cf.stack.size() - n);
    if (receiver) args[0] = *receiver;
    Frame f;
    f.method = &callee;
    f.locals.resize(std::max<std::size_t>(callee.locals, args.size()));
    std::copy(args.begin(), args.end(), f.locals.begin());
    s.frames.push_back(std::move(f));
  }

  Flow branch(SymState &s, const ExprRef &pred, std::uint32_t target) {
    auto &f = s.frames.back();
    auto q = f.method->qualified();
    auto pc = f.pc;
    if (pred->op == ExprOp::BoolConst) return take(s, pred->value != 0, target);
    std::vector<Arm> arms;
    arms.push_back({pred, [q, pc, target](SymState &c) {
                      c.trace.push_back({q, pc, true});
                      c.frames.back().pc = target;
                    }, {}});
    arms.push_back({mk_not(pred), [q, pc](SymState &c) {
                      c.trace.push_back({q, pc, false});
                      c.frames.back().pc = pc + 1;
                    }, {}});
    return fork(s, arms);
  }

  Flow take(SymState &s, bool taken, std::uint32_t target) {
    auto &f = s.frames.back();
    s.trace.push_back({f.method->qualified(), f.pc, taken});
    f.pc = taken ? target : f.pc + 1;
    return Flow::Continue;
  }

  // Forks a symbolic index over the in-bounds positions of a container of
  // known length, substituting the concrete index at stack depth `depth`.
  Flow fork_index(SymState &s, const SemValue &idx, std::size_t len, std::size_t depth, const char *oob) {
    std::vector<Arm> arms;
    for (std::size_t i = 0; i < len; ++i) {
      auto k = static_cast<std::int32_t>(i);
      arms.push_back({mk_binary(ExprOp::Eq, idx.expr, mk_int(k)), [k, depth, t = idx.taint](SymState &c) {
                        auto &st = c.frames.back().stack;
                        st[st.size() - 1 - depth] = SemValue::of_int(k, t);
                      }, {}});
    }
    arms.push_back({mk_or(mk_binary(ExprOp::Lt, idx.expr, mk_int(0)),
                          mk_binary(ExprOp::Ge, idx.expr, mk_int(static_cast<std::int32_t>(len)))),
                    nullptr, oob});
    return fork(s, arms);
  }

  // Concrete index into a container of symbolic length: fork in/out of bounds.
  Flow fork_sym_bounds(SymState &s, HeapId id, std::int32_t i, const ExprRef &len, bool array, const char *oob) {
    std::vector<Arm> arms;
    arms.push_back({mk_binary(ExprOp::Gt, len, mk_int(i)), [id, i, array](SymState &c) {
                      Slot lz{SemValue::null(), false, false, true};
                      auto &vals = array ? std::get<SymArray>(c.mut(id)).values : std::get<SymCollection>(c.mut(id)).items;
                      if (vals.size() <= static_cast<std::size_t>(i)) vals.resize(static_cast<std::size_t>(i) + 1, lz);
                    }, {}});
    arms.push_back({mk_binary(ExprOp::Le, len, mk_int(i)), nullptr, oob});
    return fork(s, arms);
  }

  // Pins the symbolic length of a lazy list to a model value.
  void concretize_length(SymState &s, HeapId id) {
    const auto &c = std::get<SymCollection>(s.cell(id));
    if (!c.sym_len) return;
    auto len = c.sym_len;
    auto n = concretize(s, len).num;
    auto &m = std::get<SymCollection>(s.mut(id));
    m.items.resize(static_cast<std::size_t>(std::max(n, 0)), Slot{SemValue::null(), false, false, true});
    m.sym_len = nullptr;
  }

  std::optional<KeyAtom> key_atom(SymState &s, const SemValue &k, bool &symbolic) {
    symbolic = false;
    if (k.kind == Kind::Int) return KeyAtom{k.num};
    if (k.kind == Kind::Sym) {
      symbolic = true;
      return std::nullopt;
    }
    if (k.kind == Kind::Null) throw PathAbort{"guest-trap", "NullPointerException" + where(s)};
    auto e = text_expr(s, k);
    if (e->op == ExprOp::StrConst) return KeyAtom{e->text};
    symbolic = true;
    return std::nullopt;
  }

  ExprRef key_expr(SymState &s, const SemValue &k) { return k.kind == Kind::Sym ? k.expr : text_expr(s, k); }

  Flow array_access(SymState &s, const Instruction &ins);
  Flow invoke(SymState &s, const Instruction &ins);
  Flow call_extern(SymState &s, const ExternDecl &decl);
  Flow intrinsic(SymState &s, const Instruction &ins);
  Flow keyed_get(SymState &s, const Instruction &ins);
  Flow step(SymState &s);
  void execute(SymState s);
};

Flow Engine::array_access(SymState &s, const Instruction &ins) {
  auto &st = s.frames.back().stack;
  const bool store = ins.op == Opcode::AAStore || ins.op == Opcode::IAStore;
  const std::size_t d = store ? 1 : 0;
  SemValue idx = st[st.size() - 1 - d];
  SemValue arr = st[st.size() - 2 - d];
  if (!arr.is_ref()) return trap(s, "NullPointerException");
  const auto *a = std::get_if<SymArray>(&s.cell(arr.ref));
  if (!a) return trap(s, "ClassCastException: not an array");
  const char *oob = "ArrayIndexOutOfBoundsException";
  if (idx.kind == Kind::Sym) {
    if (a->sym_len) {
      st[st.size() - 1 - d] = SemValue::of_int(int_of(s, idx), idx.taint);
      return Flow::Continue;
    }
    return fork_index(s, idx, a->values.size(), d, oob);
  }
  auto i = idx.num;
  if (i < 0) return trap(s, oob);
  if (static_cast<std::size_t>(i) >= a->values.size()) {
    if (a->sym_len) return fork_sym_bounds(s, arr.ref, i, a->sym_len, true, oob);
    return trap(s, oob);
  }
  SlotRef r{SlotRef::Where::Elem, arr.ref, {}, static_cast<std::size_t>(i), {}};
  Type elem = a->elem;
  if (store) {
    auto v = st.back();
    slot_at(s, r) = Slot{v};
    if (elem.kind != Type::Kind::Void) adopt_type(s, v, elem);
    auto &f = s.frames.back();
    f.stack.resize(f.stack.size() - 3);
    ++f.pc;
    return Flow::Continue;
  }
  auto label = a->meta.label + "[" + std::to_string(i) + "]";
  const char *op = ins.op == Opcode::AALoad ? "aaload" : "iaload";
  auto v = read(s, r, elem, label, op);
  if (!v) return flow_;
  auto out = sink(s, op, r, idx, *v, elem, std::to_string(i));
  auto &f = s.frames.back();
  f.stack.resize(f.stack.size() - 2);
  f.stack.push_back(out);
  ++f.pc;
  return Flow::Continue;
}

Flow Engine::call_extern(SymState &s, const ExternDecl &decl) {
  auto k = s.extern_calls[decl.name]++;
  auto n = decl.params.size();
  auto &st = s.frames.back().stack;
  std::vector<SemValue> args(st.end() - static_cast<std::ptrdiff_t>(n), st.end());
  std::optional<SemValue> out;
  switch (decl.policy) {
  case ExternPolicy::ModelUid: {
    auto uid = I.skeleton_uid();
    out = SemValue::of_int(uid, std::make_shared<TaintLabel>(TaintLabel{true, false, std::to_string(uid)}));
    break;
  }
  case ExternPolicy::ModelPackage: {
    const auto &pkg = I.skeleton_package();
    out = SemValue::of_ref(fresh(s, SymString{{}, mk_str(pkg)}),
                           std::make_shared<TaintLabel>(TaintLabel{false, true, pkg}));
    break;
  }
  case ExternPolicy::SymbolicReturn: {
    if (decl.ret.kind == Type::Kind::Void) break;
    auto loc = Locator::extern_call(decl.name, k).str();
    if (!decl.ret.is_scalar())
      throw Error(ErrorKind::Extern, "extern '" + decl.name + "' returns a reference; symbolic-return needs a scalar");
    out = fresh_scalar(s, decl.ret.kind, decl.name, loc);
    break;
  }
  case ExternPolicy::Ignore:
    if (decl.ret.kind != Type::Kind::Void) out = default_sem(decl.ret);
    break;
  case ExternPolicy::Delegate: {
    if (!O.host) throw Error(ErrorKind::Extern, "extern '" + decl.name + "' needs an extern host");
    nlohmann::json a = nlohmann::json::array();
    for (const auto &v : args) {
      switch (v.kind) {
      case Kind::Int: a.push_back(v.num); break;
      case Kind::Sym: a.push_back(concretize(s, v.expr).num); break;
      case Kind::Null: a.push_back(nullptr); break;
      case Kind::Ref: {
        auto e = text_expr(s, v);
        a.push_back(e->op == ExprOp::StrConst ? e->text : concretize(s, e).text);
        break;
      }
      }
    }
    auto r = O.host->call(decl.name, a);
    auto mismatch = [&]() {
      return Error(ErrorKind::Extern, "extern '" + decl.name + "' returned " + r.dump() + " for type " + decl.ret.str());
    };
    switch (decl.ret.kind) {
    case Type::Kind::Void: break;
    case Type::Kind::Int: case Type::Kind::Bool:
      if (r.is_boolean()) out = SemValue::of_int(r.get<bool>() ? 1 : 0);
      else if (r.is_number_integer()) out = SemValue::of_int(r.get<std::int32_t>());
      else throw mismatch();
      break;
    case Type::Kind::Str:
      if (r.is_null()) out = SemValue::null();
      else if (r.is_string()) out = SemValue::of_ref(fresh(s, SymString{{}, mk_str(r.get<std::string>())}));
      else throw mismatch();
      break;
    default:
      if (!r.is_null()) throw mismatch();
      out = SemValue::null();
    }
    break;
  }
  }
  auto &f = s.frames.back();
  f.stack.resize(f.stack.size() - n);
  if (out) f.stack.push_back(*out);
  ++f.pc;
  return Flow::Continue;
}

Flow Engine::invoke(SymState &s, const Instruction &ins) {
  if (ins.op == Opcode::InvokeStatic) {
    if (ins.is_extern) return call_extern(s, *P.find_extern(ins.owner + "." + ins.member));
    if (!ensure_class(s, ins.owner)) return Flow::Continue;
    const auto &callee = P.get_method(ins.owner + "." + ins.member);
    push_frame(s, callee, callee.params.size());
    return Flow::Continue;
  }
  const auto &decl = resolve_dispatch(P, ins.owner, ins.member);
  auto n = decl.params.size() + 1;
  const auto &st = s.frames.back().stack;
  SemValue recv = st[st.size() - n];
  if (!recv.is_ref()) return trap(s, "NullPointerException");
  const auto *obj = std::get_if<SymObject>(&s.cell(recv.ref));
  if (!obj) return trap(s, "ClassCastException: not an object");
  if (ins.op == Opcode::InvokeSpecial) {
    push_frame(s, decl, n);
    return Flow::Continue;
  }
  // Dispatch on an input of unknown dynamic type forks over its subtypes.
  auto dispatch_fork = [&](HeapId id, const std::string &base) {
    std::vector<Arm> arms;
    for (const auto &sub : P.subclasses_of(base)) {
      arms.push_back({nullptr, [id, sub, this](SymState &c) {
                        auto &o = std::get<SymObject>(c.mut(id));
                        o.cls = sub;
                        o.meta.exact = true;
                        o.fields.resize(layout(sub).size(), Slot{SemValue::null(), false, false, true});
                      }, {}});
    }
    return fork(s, arms, true);
  };
  if (obj->meta.lazy && !obj->meta.exact) return dispatch_fork(recv.ref, obj->cls);
  std::string cls = obj->cls;
  if (ins.member == "sendMessage" && P.is_handler_class(cls)) {
    push_frame(s, resolve_dispatch(P, cls, "handleMessage"), n);
    return Flow::Continue;
  }
  if (ins.member == "sendMessage" && P.is_statemachine_class(cls)) {
    auto field = [&](const SemValue &o, const char *name) -> std::optional<SemValue> {
      if (!o.is_ref()) throw PathAbort{"guest-trap", "NullPointerException" + where(s)};
      const auto *so = std::get_if<SymObject>(&s.cell(o.ref));
      if (!so) throw PathAbort{"guest-trap", "ClassCastException: not an object" + where(s)};
      auto slot = P.field_slot(so->cls, name);
      if (!slot) throw PathAbort{"guest-trap", so->cls + " lacks state-machine field " + name + where(s)};
      const auto &fi = layout(so->cls)[*slot];
      return read(s, {SlotRef::Where::Field, o.ref, {}, *slot, {}}, fi.type, fi.decl + "." + fi.name,
                  "getfield " + fi.decl + "." + fi.name);
    };
    auto handler = field(recv, "mSmHandler");
    if (!handler) return flow_;
    auto stack = field(*handler, "mStateStack");
    if (!stack) return flow_;
    auto top = field(*handler, "mStateStackTopIndex");
    if (!top) return flow_;
    if (!stack->is_ref()) return trap(s, "NullPointerException");
    const auto *arr = std::get_if<SymArray>(&s.cell(stack->ref));
    if (!arr) return trap(s, "ClassCastException: not an array");
    auto i = int_of(s, *top);
    arr = &std::get<SymArray>(s.cell(stack->ref));
    if (i < 0) return trap(s, "ArrayIndexOutOfBoundsException");
    if (static_cast<std::size_t>(i) >= arr->values.size()) {
      if (arr->sym_len) return fork_sym_bounds(s, stack->ref, i, arr->sym_len, true, "ArrayIndexOutOfBoundsException");
      return trap(s, "ArrayIndexOutOfBoundsException");
    }
    auto info = read(s, {SlotRef::Where::Elem, stack->ref, {}, static_cast<std::size_t>(i), {}}, arr->elem,
                     arr->meta.label + "[" + std::to_string(i) + "]", "aaload");
    if (!info) return flow_;
    auto state = field(*info, "state");
    if (!state) return flow_;
    if (!state->is_ref()) return trap(s, "NullPointerException");
    const auto *so = std::get_if<SymObject>(&s.cell(state->ref));
    if (!so) return trap(s, "ClassCastException: not an object");
    if (so->meta.lazy && !so->meta.exact) return dispatch_fork(state->ref, so->cls);
    push_frame(s, resolve_dispatch(P, so->cls, "processMessage"), n, *state);
    return Flow::Continue;
  }
  push_frame(s, resolve_dispatch(P, cls, ins.member), n);
  return Flow::Continue;
}

Flow Engine::keyed_get(SymState &s, const Instruction &ins) {
  auto &st = s.frames.back().stack;
  SemValue coll = st[st.size() - 2];
  SemValue key = st[st.size() - 1];
  if (!coll.is_ref()) return trap(s, "NullPointerException");
  const auto *c = std::get_if<SymCollection>(&s.cell(coll.ref));
  const auto want = ins.intrinsic == Intrinsic::SparseGet ? Type::Kind::Sparse : Type::Kind::Map;
  if (!c || c->kind != want) return trap(s, "ClassCastException: wrong collection");
  const bool contains = ins.intrinsic == Intrinsic::MapContains;
  bool symbolic = false;
  auto atom = key_atom(s, key, symbolic);
  if (symbolic) {
    auto ek = key_expr(s, key);
    if (c->meta.lazy) {
      auto v = concretize(s, ek);
      auto &stk = s.frames.back().stack;
      if (ek->sort == Sort::Str) stk.back() = SemValue::of_ref(fresh(s, SymString{{}, mk_str(v.text)}), key.taint);
      else stk.back() = SemValue::of_int(v.num, key.taint);
      return Flow::Continue;
    }
    std::vector<Arm> arms;
    ExprRef none = mk_bool(true);
    for (const auto &[k, sl] : c->entries) {
      ExprRef eq;
      std::function<void(SymState &)> apply;
      if (const auto *ik = std::get_if<std::int32_t>(&k)) {
        eq = mk_binary(ExprOp::Eq, ek, mk_int(*ik));
        apply = [v = *ik, t = key.taint](SymState &cs) { cs.frames.back().stack.back() = SemValue::of_int(v, t); };
      } else {
        eq = mk_str_eq(ek, mk_str(std::get<std::string>(k)));
        apply = [text = std::get<std::string>(k), t = key.taint, this](SymState &cs) {
          auto id = fresh(cs, SymString{{}, mk_str(text)});
          cs.frames.back().stack.back() = SemValue::of_ref(id, t);
        };
      }
      none = mk_and(none, mk_not(eq));
      arms.push_back({eq, apply, {}});
    }
    arms.push_back({none, [contains](SymState &cs) {
                      auto &f = cs.frames.back();
                      f.stack.resize(f.stack.size() - 2);
                      f.stack.push_back(contains ? SemValue::of_int(0) : SemValue::null());
                      ++f.pc;
                    }, {}});
    return fork(s, arms);
  }
  const Slot *found = nullptr;
  for (const auto &[k, sl] : c->entries)
    if (k == *atom) found = &sl;
  if (!found && c->meta.lazy) {
    auto &m = std::get<SymCollection>(s.mut(coll.ref));
    auto pos = std::lower_bound(m.entries.begin(), m.entries.end(), *atom,
                                [](const auto &e, const KeyAtom &k) { return e.first < k; });
    m.entries.insert(pos, {*atom, Slot{SemValue::null(), false, false, true}});
    return Flow::Continue;
  }
  auto finish_get = [&](const SemValue &v) {
    auto &f = s.frames.back();
    f.stack.resize(f.stack.size() - 2);
    f.stack.push_back(v);
    ++f.pc;
    return Flow::Continue;
  };
  if (!found) return finish_get(contains ? SemValue::of_int(0) : SemValue::null());
  if (contains) return finish_get(SemValue::of_int(1));
  SlotRef r{SlotRef::Where::Entry, coll.ref, {}, 0, *atom};
  Type elem = c->elem;
  auto label = c->meta.label + "{" + key_str(*atom) + "}";
  const char *op = want == Type::Kind::Map ? "map.get" : "sparse.get";
  auto v = read(s, r, elem, label, op);
  if (!v) return flow_;
  return finish_get(sink(s, op, r, key, *v, elem, key_str(*atom)));
}

Flow Engine::intrinsic(SymState &s, const Instruction &ins) {
  const auto &info = intrinsic_info(ins.intrinsic);
  auto &st = s.frames.back().stack;
  auto arg = [&](std::size_t i) { return st[st.size() - info.pops + i]; };
  auto done = [&](std::optional<SemValue> v) {
    auto &f = s.frames.back();
    f.stack.resize(f.stack.size() - info.pops);
    if (v) f.stack.push_back(*v);
    ++f.pc;
    return Flow::Continue;
  };
  auto list_of = [&](const SemValue &v) -> HeapId {
    if (!v.is_ref()) throw PathAbort{"guest-trap", "NullPointerException" + where(s)};
    const auto *c = std::get_if<SymCollection>(&s.cell(v.ref));
    if (!c || c->kind != Type::Kind::List) throw PathAbort{"guest-trap", "ClassCastException: wrong collection" + where(s)};
    return v.ref;
  };
  switch (ins.intrinsic) {
  case Intrinsic::ListNew: case Intrinsic::MapNew: case Intrinsic::SparseNew: {
    SymCollection c;
    c.kind = ins.intrinsic == Intrinsic::ListNew ? Type::Kind::List
             : ins.intrinsic == Intrinsic::MapNew ? Type::Kind::Map : Type::Kind::Sparse;
    return done(SemValue::of_ref(fresh(s, std::move(c))));
  }
  case Intrinsic::ListAdd: {
    auto id = list_of(arg(0));
    auto v = arg(1);
    concretize_length(s, id);
    std::get<SymCollection>(s.mut(id)).items.push_back(Slot{v});
    return done(std::nullopt);
  }
  case Intrinsic::ListLen: {
    auto id = list_of(arg(0));
    const auto &c = std::get<SymCollection>(s.cell(id));
    if (c.sym_len) return done(SemValue::sym(c.sym_len));
    return done(SemValue::of_int(static_cast<std::int32_t>(c.items.size())));
  }
  case Intrinsic::ListGet: case Intrinsic::ListSet: {
    const bool set = ins.intrinsic == Intrinsic::ListSet;
    auto id = list_of(arg(0));
    auto idx = arg(1);
    const auto &c = std::get<SymCollection>(s.cell(id));
    const char *oob = "IndexOutOfBoundsException";
    const std::size_t depth = set ? 1 : 0;
    if (idx.kind == Kind::Sym) {
      if (c.sym_len) {
        auto k = int_of(s, idx);
        auto &stk = s.frames.back().stack;
        stk[stk.size() - 1 - depth] = SemValue::of_int(k, idx.taint);
        return Flow::Continue;
      }
      return fork_index(s, idx, c.items.size(), depth, oob);
    }
    auto i = idx.num;
    if (i < 0) return trap(s, oob);
    if (static_cast<std::size_t>(i) >= c.items.size()) {
      if (c.sym_len) return fork_sym_bounds(s, id, i, c.sym_len, false, oob);
      return trap(s, oob);
    }
    SlotRef r{SlotRef::Where::Item, id, {}, static_cast<std::size_t>(i), {}};
    if (set) {
      slot_at(s, r) = Slot{arg(2)};
      return done(std::nullopt);
    }
    Type elem = c.elem;
    auto label = c.meta.label + "[" + std::to_string(i) + "]";
    auto v = read(s, r, elem, label, "list.get");
    if (!v) return flow_;
    return done(sink(s, "list.get", r, idx, *v, elem, std::to_string(i)));
  }
  case Intrinsic::MapPut: case Intrinsic::SparsePut: {
    auto coll = arg(0);
    if (!coll.is_ref()) return trap(s, "NullPointerException");
    const auto *c = std::get_if<SymCollection>(&s.cell(coll.ref));
    const auto want = ins.intrinsic == Intrinsic::MapPut ? Type::Kind::Map : Type::Kind::Sparse;
    if (!c || c->kind != want) return trap(s, "ClassCastException: wrong collection");
    bool symbolic = false;
    auto key = arg(1);
    auto atom = key_atom(s, key, symbolic);
    if (symbolic) {
      auto v = concretize(s, key_expr(s, key));
      atom = key_expr(s, key)->sort == Sort::Str ? KeyAtom{v.text} : KeyAtom{v.num};
    }
    auto value = arg(2);
    auto &m = std::get<SymCollection>(s.mut(coll.ref));
    auto pos = std::lower_bound(m.entries.begin(), m.entries.end(), *atom,
                                [](const auto &e, const KeyAtom &k) { return e.first < k; });
    if (pos != m.entries.end() && pos->first == *atom) pos->second = Slot{value};
    else m.entries.insert(pos, {*atom, Slot{value}});
    return done(std::nullopt);
  }
  case Intrinsic::MapGet: case Intrinsic::MapContains: case Intrinsic::SparseGet:
    return keyed_get(s, ins);
  default:
    return trap(s, std::string(info.name) + " is only available during initialization");
  }
}

Flow Engine::step(SymState &s) {
  auto &f = s.frames.back();
  const auto &m = *f.method;
  if (f.pc >= m.body.size()) return trap(s, "fell off the end of " + m.qualified());
  if (target_method_ == &m && O.target->pc == f.pc) {
    finish(s, "reached-target", O.target->str());
    return Flow::Stop;
  }
  if (++s.steps > O.budget.max_depth) {
    finish(s, "budget-exhausted", "depth budget");
    return Flow::Stop;
  }
  const auto &ins = m.body[f.pc];
  auto &st = f.stack;
  auto pop = [&]() {
    auto v = st.back();
    st.pop_back();
    return v;
  };
  switch (ins.op) {
  case Opcode::Const: {
    SemValue v;
    switch (ins.constant.kind) {
    case ConstValue::Kind::Int: case ConstValue::Kind::Bool: v = SemValue::of_int(ins.constant.num); break;
    case ConstValue::Kind::Str: v = SemValue::of_ref(literal(s, ins.constant.text)); break;
    case ConstValue::Kind::Null: break;
    }
    s.frames.back().stack.push_back(v);
    ++s.frames.back().pc;
    return Flow::Continue;
  }
  case Opcode::Load: st.push_back(f.locals[static_cast<std::size_t>(ins.local)]); ++f.pc; return Flow::Continue;
  case Opcode::Store: f.locals[static_cast<std::size_t>(ins.local)] = pop(); ++f.pc; return Flow::Continue;
  case Opcode::Dup: st.push_back(st.back()); ++f.pc; return Flow::Continue;
  case Opcode::Pop: st.pop_back(); ++f.pc; return Flow::Continue;
  case Opcode::Swap: std::swap(st[st.size() - 1], st[st.size() - 2]); ++f.pc; return Flow::Continue;
  case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::Div: case Opcode::Mod:
  case Opcode::And: case Opcode::Or: case Opcode::Xor: case Opcode::Shl: case Opcode::Shr: {
    auto b = st[st.size() - 1], a = st[st.size() - 2];
    auto op = arith_op(ins.op);
    const bool divides = op == ExprOp::Div || op == ExprOp::Mod;
    if (a.kind == Kind::Int && b.kind == Kind::Int) {
      if (divides && b.num == 0) return trap(s, "ArithmeticException: / by zero");
      auto r = apply_int_op(op, a.num, b.num);
      auto t = propagate_taint(ins.op, a.taint, b.taint, b.num, r);
      st.resize(st.size() - 2);
      st.push_back(SemValue::of_int(r, std::move(t)));
      ++f.pc;
      return Flow::Continue;
    }
    auto ea = a.as_expr(), eb = b.as_expr();
    auto apply = [op, ea, eb](SymState &c) {
      auto &cf = c.frames.back();
      cf.stack.resize(cf.stack.size() - 2);
      cf.stack.push_back(SemValue::sym(mk_binary(op, ea, eb)));
      ++cf.pc;
    };
    if (divides && b.kind == Kind::Sym) {
      std::vector<Arm> arms{{mk_binary(ExprOp::Eq, eb, mk_int(0)), nullptr, "ArithmeticException: / by zero"},
                            {mk_binary(ExprOp::Ne, eb, mk_int(0)), apply, {}}};
      return fork(s, arms);
    }
    if (divides && b.num == 0) return trap(s, "ArithmeticException: / by zero");
    apply(s);
    return Flow::Continue;
  }
  case Opcode::IfEq: case Opcode::IfNe: case Opcode::IfLt: case Opcode::IfGe: case Opcode::IfGt: case Opcode::IfLe: {
    auto v = pop();
    auto pred = cmp_pred(cmp_op(ins.op), v.as_expr(), mk_int(0));
    return branch(s, pred, ins.target);
  }
  case Opcode::IfICmpEq: case Opcode::IfICmpNe: case Opcode::IfICmpLt:
  case Opcode::IfICmpGe: case Opcode::IfICmpGt: case Opcode::IfICmpLe: {
    auto b = pop(), a = pop();
    return branch(s, cmp_pred(cmp_op(ins.op), a.as_expr(), b.as_expr()), ins.target);
  }
  case Opcode::IfNull: return take(s, pop().kind == Kind::Null, ins.target);
  case Opcode::IfNonNull: return take(s, pop().kind != Kind::Null, ins.target);
  case Opcode::IfACmpEq: case Opcode::IfACmpNe: {
    auto b = pop(), a = pop();
    bool eq = a.kind == b.kind && (a.kind == Kind::Null || a.ref == b.ref);
    return take(s, ins.op == Opcode::IfACmpEq ? eq : !eq, ins.target);
  }
  case Opcode::Goto: f.pc = ins.target; return Flow::Continue;
  case Opcode::New: {
    if (!ensure_class(s, ins.owner)) return Flow::Continue;
    SymObject o{{}, ins.owner, {}};
    for (const auto &fi : layout(ins.owner)) o.fields.push_back(Slot{default_sem(fi.type)});
    auto id = fresh(s, std::move(o));
    s.frames.back().stack.push_back(SemValue::of_ref(id));
    ++s.frames.back().pc;
    return Flow::Continue;
  }
  case Opcode::GetField: {
    auto obj = st.back();
    if (!obj.is_ref()) return trap(s, "NullPointerException");
    if (!std::holds_alternative<SymObject>(s.cell(obj.ref))) return trap(s, "ClassCastException: not an object");
    auto slot = static_cast<std::size_t>(ins.slot);
    const auto &fi = layout(std::get<SymObject>(s.cell(obj.ref)).cls).at(slot);
    auto label = ins.decl_class + "." + ins.member;
    auto v = read(s, {SlotRef::Where::Field, obj.ref, {}, slot, {}}, fi.type, label, "getfield " + label);
    if (!v) return flow_;
    auto &cf = s.frames.back();
    cf.stack.back() = *v;
    ++cf.pc;
    return Flow::Continue;
  }
  case Opcode::PutField: {
    auto v = st[st.size() - 1], obj = st[st.size() - 2];
    if (!obj.is_ref()) return trap(s, "NullPointerException");
    if (!std::holds_alternative<SymObject>(s.cell(obj.ref))) return trap(s, "ClassCastException: not an object");
    auto slot = static_cast<std::size_t>(ins.slot);
    Type t = layout(std::get<SymObject>(s.cell(obj.ref)).cls).at(slot).type;
    slot_at(s, {SlotRef::Where::Field, obj.ref, {}, slot, {}}) = Slot{v};
    adopt_type(s, v, t);
    auto &cf = s.frames.back();
    cf.stack.resize(cf.stack.size() - 2);
    ++cf.pc;
    return Flow::Continue;
  }
  case Opcode::GetStatic: {
    if (!ensure_class(s, ins.decl_class)) return Flow::Continue;
    auto slot = static_cast<std::size_t>(ins.slot);
    const auto &fd = P.get_class(ins.decl_class).static_fields.at(slot);
    auto label = ins.decl_class + "." + ins.member;
    auto v = read(s, {SlotRef::Where::Static, kNullId, ins.decl_class, slot, {}}, fd.type, label, "getstatic " + label);
    if (!v) return flow_;
    auto &cf = s.frames.back();
    cf.stack.push_back(*v);
    ++cf.pc;
    return Flow::Continue;
  }
  case Opcode::PutStatic: {
    if (!ensure_class(s, ins.decl_class)) return Flow::Continue;
    auto slot = static_cast<std::size_t>(ins.slot);
    auto &cf = s.frames.back();
    auto v = cf.stack.back();
    cf.stack.pop_back();
    s.classes.at(ins.decl_class).statics.at(slot) = Slot{v};
    adopt_type(s, v, P.get_class(ins.decl_class).static_fields.at(slot).type);
    ++cf.pc;
    return Flow::Continue;
  }
  case Opcode::NewArray: {
    auto n = int_of(s, s.frames.back().stack.back());
    if (n < 0) return trap(s, "NegativeArraySizeException");
    SymArray a{{}, ins.type, std::vector<Slot>(static_cast<std::size_t>(n), Slot{default_sem(ins.type)}), nullptr};
    auto id = fresh(s, std::move(a));
    auto &cf = s.frames.back();
    cf.stack.back() = SemValue::of_ref(id);
    ++cf.pc;
    return Flow::Continue;
  }
  case Opcode::AALoad: case Opcode::IALoad: case Opcode::AAStore: case Opcode::IAStore:
    return array_access(s, ins);
  case Opcode::ArrayLength: {
    auto arr = st.back();
    if (!arr.is_ref()) return trap(s, "NullPointerException");
    const auto *a = std::get_if<SymArray>(&s.cell(arr.ref));
    if (!a) return trap(s, "ClassCastException: not an array");
    st.back() = a->sym_len ? SemValue::sym(a->sym_len) : SemValue::of_int(static_cast<std::int32_t>(a->values.size()));
    ++f.pc;
    return Flow::Continue;
  }
  case Opcode::InvokeVirtual: case Opcode::InvokeStatic: case Opcode::InvokeSpecial:
    return invoke(s, ins);
  case Opcode::InvokeIntrinsic:
    return intrinsic(s, ins);
  case Opcode::Return: {
    std::optional<SemValue> rv;
    if (m.ret.kind != Type::Kind::Void) rv = st.back();
    bool reexec = f.reexec;
    s.frames.pop_back();
    if (s.frames.empty()) {
      s.ret = rv;
      finish(s, "returned", "");
      return Flow::Stop;
    }
    auto &cf = s.frames.back();
    if (!reexec) {
      if (rv) cf.stack.push_back(*rv);
      ++cf.pc;
    }
    return Flow::Continue;
  }
  case Opcode::SConcat: {
    auto b = st[st.size() - 1], a = st[st.size() - 2];
    if (!a.is_ref() || !b.is_ref()) return trap(s, "NullPointerException");
    auto ea = text_expr(s, a), eb = text_expr(s, b);
    auto text = (ea->op == ExprOp::StrConst && eb->op == ExprOp::StrConst) ? mk_str(ea->text + eb->text) : mk_concat(ea, eb);
    TaintRef t;
    for (const auto *src : {&a.taint, &b.taint})
      if (*src && (*src)->pkg && !t) {
        auto label = std::make_shared<TaintLabel>(**src);
        label->uid = false;
        label->derivation += " -> concat";
        t = label;
      }
    auto id = fresh(s, SymString{{}, text});
    auto &cf = s.frames.back();
    cf.stack.resize(cf.stack.size() - 2);
    cf.stack.push_back(SemValue::of_ref(id, t));
    ++cf.pc;
    return Flow::Continue;
  }
  case Opcode::SEquals: {
    auto b = pop(), a = pop();
    if (!a.is_ref()) return trap(s, "NullPointerException");
    if (!b.is_ref()) {
      st.push_back(SemValue::of_int(0));
    } else {
      st.push_back(SemValue::sym(mk_bool_to_int(mk_str_eq(text_expr(s, a), text_expr(s, b)))));
    }
    ++f.pc;
    return Flow::Continue;
  }
  case Opcode::Throw: {
    auto v = st.back();
    std::string what = "throw";
    if (v.is_ref())
      if (const auto *o = std::get_if<SymObject>(&s.cell(v.ref))) what += " " + o->cls;
    return trap(s, what);
  }
  }
  return trap(s, "unknown opcode");
}

void Engine::execute(SymState s) {
  for (;;) {
    children_.clear();
    Flow fl;
    try {
      fl = step(s);
    } catch (const PathAbort &a) {
      finish(s, a.status, a.detail);
      return;
    }
    if (fl == Flow::Continue) continue;
    if (O.shuffle) std::shuffle(children_.begin(), children_.end(), rng_);
    for (auto it = children_.rbegin(); it != children_.rend(); ++it) work_.emplace_back(std::move(*it));
    children_.clear();
    return;
  }
}

ExploreResult Engine::run() {
  auto roots = bootstrap();
  out_.metrics.states += roots.size();
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
    if (prune_ && !viable(*it)) {
      ++out_.metrics.pruned;
      continue;
    }
    work_.emplace_back(std::move(*it));
  }
  while (!work_.empty()) {
    auto item = std::move(work_.back());
    work_.pop_back();
    if (auto *cp = std::get_if<Checkpoint>(&item)) {
      if (state_fingerprint(*cp->saved) != cp->digest)
        out_.metrics.invariant_violations.push_back("state changed across backtracking");
      audit(*cp->saved, "at a backtrack point");
      continue;
    }
    auto &s = std::get<SymState>(item);
    if (exhausted_) {
      finish(s, "budget-exhausted", "state budget");
      continue;
    }
    execute(std::move(s));
  }
  return std::move(out_);
}

} // namespace

ExploreResult explore(const Program &program, const SnapshotIndex &index, const TestDriver &driver,
                      const ExploreOptions &opts) {
  Engine e(program, index, driver, opts);
  return e.run();
}

Bindings bindings_for(const PathReport &report, const Model &model) {
  Bindings out;
  for (const auto &v : report.vars) {
    auto it = model.find(v.id);
    if (it != model.end()) {
      out[v.locator] = it->second;
      continue;
    }
    Expr e;
    e.op = ExprOp::Var;
    e.sort = v.sort;
    e.domain = v.domain;
    out[v.locator] = default_model_value(e);
  }
  return out;
}

} // namespace snapseed
