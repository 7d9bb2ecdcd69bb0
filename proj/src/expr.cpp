//===-- expr.cpp - Constraint expressions ---------------------------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/expr.hpp"

#include "snapseed/common.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

namespace snapseed {

bool VarDomain::contains(std::int32_t v) const {
  if (!ints.empty()) return std::find(ints.begin(), ints.end(), v) != ints.end();
  return v >= lo && v <= hi;
}

namespace {

ExprRef node(ExprOp op, Sort sort, std::vector<ExprRef> kids) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->sort = sort;
  e->kids = std::move(kids);
  return e;
}

bool is_cmp(ExprOp op) { return op >= ExprOp::Eq && op <= ExprOp::Ge; }

bool is_arith(ExprOp op) { return op >= ExprOp::Add && op <= ExprOp::Shr; }

ExprOp negate_cmp(ExprOp op) {
  switch (op) {
  case ExprOp::Eq: return ExprOp::Ne;
  case ExprOp::Ne: return ExprOp::Eq;
  case ExprOp::Lt: return ExprOp::Ge;
  case ExprOp::Le: return ExprOp::Gt;
  case ExprOp::Gt: return ExprOp::Le;
  case ExprOp::Ge: return ExprOp::Lt;
  default: return op;
  }
}

} // namespace

std::int32_t apply_int_op(ExprOp op, std::int32_t a, std::int32_t b) {
  auto ua = static_cast<std::uint32_t>(a);
  auto ub = static_cast<std::uint32_t>(b);
  switch (op) {
  case ExprOp::Add: return static_cast<std::int32_t>(ua + ub);
  case ExprOp::Sub: return static_cast<std::int32_t>(ua - ub);
  case ExprOp::Mul: return static_cast<std::int32_t>(ua * ub);
  case ExprOp::Div:
    if (b == 0) return 0;
    if (a == INT32_MIN && b == -1) return INT32_MIN;
    return a / b;
  case ExprOp::Mod:
    if (b == 0) return a;
    if (a == INT32_MIN && b == -1) return 0;
    return a % b;
  case ExprOp::BitAnd: return static_cast<std::int32_t>(ua & ub);
  case ExprOp::BitOr: return static_cast<std::int32_t>(ua | ub);
  case ExprOp::BitXor: return static_cast<std::int32_t>(ua ^ ub);
  case ExprOp::Shl: return static_cast<std::int32_t>(ua << (ub & 31u));
  case ExprOp::Shr: return a >> (ub & 31u);
  default:
    throw Error(ErrorKind::Solver, "not an integer operator");
  }
}

bool apply_cmp_op(ExprOp op, std::int32_t a, std::int32_t b) {
  switch (op) {
  case ExprOp::Eq: return a == b;
  case ExprOp::Ne: return a != b;
  case ExprOp::Lt: return a < b;
  case ExprOp::Le: return a <= b;
  case ExprOp::Gt: return a > b;
  case ExprOp::Ge: return a >= b;
  default:
    throw Error(ErrorKind::Solver, "not a comparison operator");
  }
}

ExprRef mk_int(std::int32_t v) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::IntConst;
  e->value = v;
  return e;
}

ExprRef mk_bool(bool v) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::BoolConst;
  e->sort = Sort::Bool;
  e->value = v ? 1 : 0;
  return e;
}

ExprRef mk_str(std::string text) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::StrConst;
  e->sort = Sort::Str;
  e->text = std::move(text);
  return e;
}

ExprRef mk_var(std::uint32_t id, Sort sort, std::string name, VarDomain domain) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Var;
  e->sort = sort;
  e->var = id;
  e->text = std::move(name);
  e->domain = std::move(domain);
  return e;
}

ExprRef mk_binary(ExprOp op, ExprRef a, ExprRef b) {
  if (is_arith(op)) {
    if (a->sort != Sort::Int || b->sort != Sort::Int)
      throw Error(ErrorKind::Solver, "arithmetic on non-integer operands");
    if (a->op == ExprOp::IntConst && b->op == ExprOp::IntConst)
      return mk_int(apply_int_op(op, a->value, b->value));
    return node(op, Sort::Int, {std::move(a), std::move(b)});
  }
  if (is_cmp(op)) {
    if (a->sort != Sort::Int || b->sort != Sort::Int)
      throw Error(ErrorKind::Solver, "comparison on non-integer operands");
    if (a->op == ExprOp::IntConst && b->op == ExprOp::IntConst)
      return mk_bool(apply_cmp_op(op, a->value, b->value));
    // int(p) ==/!= 0/1 collapses back to the predicate.
    if ((op == ExprOp::Eq || op == ExprOp::Ne) && a->op == ExprOp::BoolToInt &&
        b->op == ExprOp::IntConst && (b->value == 0 || b->value == 1)) {
      bool positive = (op == ExprOp::Eq) == (b->value == 1);
      return positive ? a->kids[0] : mk_not(a->kids[0]);
    }
    return node(op, Sort::Bool, {std::move(a), std::move(b)});
  }
  switch (op) {
  case ExprOp::And: return mk_and(std::move(a), std::move(b));
  case ExprOp::Or: return mk_or(std::move(a), std::move(b));
  case ExprOp::StrEq: return mk_str_eq(std::move(a), std::move(b));
  case ExprOp::Concat: return mk_concat(std::move(a), std::move(b));
  default:
    throw Error(ErrorKind::Solver, "mk_binary: unsupported operator");
  }
}

ExprRef mk_not(ExprRef a) {
  if (a->sort != Sort::Bool) throw Error(ErrorKind::Solver, "negation of non-boolean");
  if (a->op == ExprOp::BoolConst) return mk_bool(a->value == 0);
  if (a->op == ExprOp::Not) return a->kids[0];
  if (is_cmp(a->op)) return node(negate_cmp(a->op), Sort::Bool, a->kids);
  return node(ExprOp::Not, Sort::Bool, {std::move(a)});
}

ExprRef mk_and(ExprRef a, ExprRef b) {
  if (a->sort != Sort::Bool || b->sort != Sort::Bool) throw Error(ErrorKind::Solver, "conjunction of non-booleans");
  if (a->op == ExprOp::BoolConst) return a->value ? b : a;
  if (b->op == ExprOp::BoolConst) return b->value ? a : b;
  return node(ExprOp::And, Sort::Bool, {std::move(a), std::move(b)});
}

ExprRef mk_or(ExprRef a, ExprRef b) {
  if (a->sort != Sort::Bool || b->sort != Sort::Bool) throw Error(ErrorKind::Solver, "disjunction of non-booleans");
  if (a->op == ExprOp::BoolConst) return a->value ? a : b;
  if (b->op == ExprOp::BoolConst) return b->value ? b : a;
  return node(ExprOp::Or, Sort::Bool, {std::move(a), std::move(b)});
}

ExprRef mk_str_eq(ExprRef a, ExprRef b) {
  if (a->sort != Sort::Str || b->sort != Sort::Str) throw Error(ErrorKind::Solver, "string equality on non-strings");
  if (a->op == ExprOp::StrConst && b->op == ExprOp::StrConst) return mk_bool(a->text == b->text);
  if (a->op == ExprOp::Var && b->op == ExprOp::Var && a->var == b->var) return mk_bool(true);
  return node(ExprOp::StrEq, Sort::Bool, {std::move(a), std::move(b)});
}

ExprRef mk_concat(ExprRef a, ExprRef b) {
  if (a->sort != Sort::Str || b->sort != Sort::Str) throw Error(ErrorKind::Solver, "concatenation of non-strings");
  if (a->op == ExprOp::StrConst && b->op == ExprOp::StrConst) return mk_str(a->text + b->text);
  return node(ExprOp::Concat, Sort::Str, {std::move(a), std::move(b)});
}

ExprRef mk_is_null(ExprRef ref_var) {
  if (ref_var->sort != Sort::Ref) throw Error(ErrorKind::Solver, "is-null on non-reference");
  return node(ExprOp::IsNull, Sort::Bool, {std::move(ref_var)});
}

ExprRef mk_bool_to_int(ExprRef pred) {
  if (pred->sort != Sort::Bool) throw Error(ErrorKind::Solver, "bool-to-int of non-boolean");
  if (pred->op == ExprOp::BoolConst) return mk_int(pred->value);
  return node(ExprOp::BoolToInt, Sort::Int, {std::move(pred)});
}

ExprRef as_int(ExprRef e) { return e->sort == Sort::Bool ? mk_bool_to_int(std::move(e)) : e; }

ExprRef as_pred(ExprRef e) {
  if (e->sort == Sort::Bool) return e;
  if (e->op == ExprOp::BoolToInt) return e->kids[0];
  return mk_binary(ExprOp::Ne, std::move(e), mk_int(0));
}

bool same_expr(const ExprRef &a, const ExprRef &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->sort != b->sort || a->value != b->value || a->text != b->text ||
      a->var != b->var || a->kids.size() != b->kids.size())
    return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!same_expr(a->kids[i], b->kids[i])) return false;
  return true;
}

void collect_vars(const ExprRef &e, std::map<std::uint32_t, ExprRef> &out) {
  if (e->op == ExprOp::Var) {
    out.emplace(e->var, e);
    return;
  }
  for (const auto &k : e->kids) collect_vars(k, out);
}

bool mentions_var(const ExprRef &e, std::uint32_t var) {
  if (e->op == ExprOp::Var) return e->var == var;
  return std::any_of(e->kids.begin(), e->kids.end(), [&](const ExprRef &k) { return mentions_var(k, var); });
}

std::string ModelValue::str() const {
  switch (sort) {
  case Sort::Int: return std::to_string(num);
  case Sort::Bool: return num ? "true" : "false";
  case Sort::Str: return "\"" + text + "\"";
  case Sort::Ref: return is_null ? "null" : "non-null";
  }
  return "?";
}

ModelValue evaluate(const ExprRef &e, const Model &model) {
  auto int_of = [&](const ExprRef &k) { return evaluate(k, model).num; };
  ModelValue out;
  switch (e->op) {
  case ExprOp::IntConst: return ModelValue::of_int(e->value);
  case ExprOp::BoolConst:
    out.sort = Sort::Bool;
    out.num = e->value;
    return out;
  case ExprOp::StrConst: return ModelValue::of_str(e->text);
  case ExprOp::Var: {
    auto it = model.find(e->var);
    if (it == model.end())
      throw Error(ErrorKind::Solver, "unassigned variable '" + e->text + "'");
    return it->second;
  }
  case ExprOp::Add: case ExprOp::Sub: case ExprOp::Mul: case ExprOp::Div: case ExprOp::Mod:
  case ExprOp::BitAnd: case ExprOp::BitOr: case ExprOp::BitXor: case ExprOp::Shl: case ExprOp::Shr:
    return ModelValue::of_int(apply_int_op(e->op, int_of(e->kids[0]), int_of(e->kids[1])));
  case ExprOp::BoolToInt: return ModelValue::of_int(evaluate_pred(e->kids[0], model) ? 1 : 0);
  case ExprOp::Concat:
    return ModelValue::of_str(evaluate(e->kids[0], model).text + evaluate(e->kids[1], model).text);
  default:
    out.sort = Sort::Bool;
    out.num = evaluate_pred(e, model) ? 1 : 0;
    return out;
  }
}

bool evaluate_pred(const ExprRef &e, const Model &model) {
  switch (e->op) {
  case ExprOp::BoolConst: return e->value != 0;
  case ExprOp::Var: return evaluate(e, model).num != 0;
  case ExprOp::Eq: case ExprOp::Ne: case ExprOp::Lt: case ExprOp::Le: case ExprOp::Gt: case ExprOp::Ge:
    return apply_cmp_op(e->op, evaluate(e->kids[0], model).num, evaluate(e->kids[1], model).num);
  case ExprOp::And: return evaluate_pred(e->kids[0], model) && evaluate_pred(e->kids[1], model);
  case ExprOp::Or: return evaluate_pred(e->kids[0], model) || evaluate_pred(e->kids[1], model);
  case ExprOp::Not: return !evaluate_pred(e->kids[0], model);
  case ExprOp::StrEq: return evaluate(e->kids[0], model).text == evaluate(e->kids[1], model).text;
  case ExprOp::IsNull: return evaluate(e->kids[0], model).is_null;
  default:
    throw Error(ErrorKind::Solver, "predicate expected");
  }
}

std::string VarNamer::name(std::uint32_t var) {
  auto it = names_.find(var);
  if (it != names_.end()) return it->second;
  auto n = "v" + std::to_string(names_.size());
  names_.emplace(var, n);
  return n;
}

namespace {

const char *op_symbol(ExprOp op) {
  switch (op) {
  case ExprOp::Add: return "+";
  case ExprOp::Sub: return "-";
  case ExprOp::Mul: return "*";
  case ExprOp::Div: return "/";
  case ExprOp::Mod: return "%";
  case ExprOp::BitAnd: return "&";
  case ExprOp::BitOr: return "|";
  case ExprOp::BitXor: return "^";
  case ExprOp::Shl: return "<<";
  case ExprOp::Shr: return ">>";
  case ExprOp::Eq: case ExprOp::StrEq: return "==";
  case ExprOp::Ne: return "!=";
  case ExprOp::Lt: return "<";
  case ExprOp::Le: return "<=";
  case ExprOp::Gt: return ">";
  case ExprOp::Ge: return ">=";
  case ExprOp::And: return "&&";
  case ExprOp::Or: return "||";
  case ExprOp::Concat: return "++";
  default: return "?";
  }
}

bool bitwise_context(const ExprRef &e) {
  if (e->op == ExprOp::BitAnd || e->op == ExprOp::BitOr || e->op == ExprOp::BitXor) return true;
  // Comparisons against a masked value read better in hex too.
  return (e->op == ExprOp::Eq || e->op == ExprOp::Ne) &&
         (e->kids[0]->op == ExprOp::BitAnd || e->kids[0]->op == ExprOp::BitOr);
}

std::string render_rec(const ExprRef &e, VarNamer *namer, bool hex) {
  switch (e->op) {
  case ExprOp::IntConst:
    if (hex && e->value >= 0) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "0x%X", static_cast<unsigned>(e->value));
      return buf;
    }
    return std::to_string(e->value);
  case ExprOp::BoolConst: return e->value ? "true" : "false";
  case ExprOp::StrConst: {
    std::string out = "\"";
    for (char c : e->text) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  }
  case ExprOp::Var: return namer ? namer->name(e->var) : e->text;
  case ExprOp::Not: return "!" + render_rec(e->kids[0], namer, false);
  case ExprOp::IsNull: return "(" + render_rec(e->kids[0], namer, false) + " == null)";
  case ExprOp::BoolToInt: return "int(" + render_rec(e->kids[0], namer, false) + ")";
  default: {
    bool h = bitwise_context(e);
    auto lhs = render_rec(e->kids[0], namer, h);
    auto rhs = render_rec(e->kids[1], namer, h);
    return "(" + lhs + " " + op_symbol(e->op) + " " + rhs + ")";
  }
  }
}

} // namespace

std::string render_expr(const ExprRef &e, VarNamer *namer) { return render_rec(e, namer, false); }

std::map<std::uint32_t, ExprRef> PathCondition::vars() const {
  std::map<std::uint32_t, ExprRef> out;
  for (const auto &c : conjuncts) collect_vars(c, out);
  return out;
}

std::string PathCondition::canonical() const {
  if (conjuncts.empty()) return "true";
  VarNamer namer;
  std::vector<std::string> parts;
  parts.reserve(conjuncts.size());
  for (const auto &c : conjuncts) parts.push_back(render_expr(c, &namer));
  std::sort(parts.begin(), parts.end());
  parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " && " : "") + parts[i];
  return out;
}

std::vector<std::string> PathCondition::readable() const {
  std::vector<std::string> out;
  for (const auto &c : conjuncts) out.push_back(render_expr(c));
  return out;
}

} // namespace snapseed
