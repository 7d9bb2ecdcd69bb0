//===-- expr.hpp - Constraint expressions and models ------------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
//
// Immutable expression trees over 32-bit two's-complement integers,
// booleans, atomic strings and null-ness. Nodes are shared; structural
// identity is by pointer unless compared with `same_expr`.
//
//===----------------------------------------------------------------------===//
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace snapseed {

enum class Sort : std::uint8_t { Int, Bool, Str, Ref };

enum class ExprOp : std::uint8_t {
  IntConst, BoolConst, StrConst, Var,
  Add, Sub, Mul, Div, Mod, BitAnd, BitOr, BitXor, Shl, Shr,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or, Not,
  StrEq, Concat, IsNull, BoolToInt,
};

/// Declared value domain of a variable. Ints use [lo, hi] unless `ints` is
/// non-empty; strings are unrestricted unless `strs` is non-empty.
struct VarDomain {
  std::int32_t lo = INT32_MIN;
  std::int32_t hi = INT32_MAX;
  std::vector<std::int32_t> ints;
  std::vector<std::string> strs;

  static VarDomain range(std::int32_t lo, std::int32_t hi) {
    VarDomain d;
    d.lo = lo;
    d.hi = hi;
    return d;
  }
  static VarDomain boolean() { return range(0, 1); }
  bool full_int() const { return ints.empty() && lo == INT32_MIN && hi == INT32_MAX; }
  bool contains(std::int32_t v) const;
  friend bool operator==(const VarDomain &, const VarDomain &) = default;
};

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op = ExprOp::IntConst;
  Sort sort = Sort::Int;
  std::int32_t value = 0;   // IntConst, BoolConst
  std::string text;         // StrConst text, Var name
  std::uint32_t var = 0;    // Var id
  VarDomain domain;         // Var
  std::vector<ExprRef> kids;

  bool is_const() const {
    return op == ExprOp::IntConst || op == ExprOp::BoolConst || op == ExprOp::StrConst;
  }
};

// Builders fold constants and a few boolean identities; they never reorder
// operands.
ExprRef mk_int(std::int32_t v);
ExprRef mk_bool(bool v);
ExprRef mk_str(std::string text);
ExprRef mk_var(std::uint32_t id, Sort sort, std::string name, VarDomain domain = {});
ExprRef mk_binary(ExprOp op, ExprRef a, ExprRef b);
ExprRef mk_not(ExprRef a);
ExprRef mk_and(ExprRef a, ExprRef b);
ExprRef mk_or(ExprRef a, ExprRef b);
ExprRef mk_str_eq(ExprRef a, ExprRef b);
ExprRef mk_concat(ExprRef a, ExprRef b);
ExprRef mk_is_null(ExprRef ref_var);
ExprRef mk_bool_to_int(ExprRef pred);
/// Integer view of a boolean predicate, or the integer itself.
ExprRef as_int(ExprRef e);
/// Predicate `e != 0` for an integer, or the predicate itself.
ExprRef as_pred(ExprRef e);

bool same_expr(const ExprRef &a, const ExprRef &b);
void collect_vars(const ExprRef &e, std::map<std::uint32_t, ExprRef> &out);
bool mentions_var(const ExprRef &e, std::uint32_t var);

/// 32-bit operator semantics shared by every evaluator in the project.
std::int32_t apply_int_op(ExprOp op, std::int32_t a, std::int32_t b);
bool apply_cmp_op(ExprOp op, std::int32_t a, std::int32_t b);

/// Concrete value assigned to a variable.
struct ModelValue {
  Sort sort = Sort::Int;
  std::int32_t num = 0;  // Int, Bool
  std::string text;      // Str
  bool is_null = false;  // Ref

  static ModelValue of_int(std::int32_t v) { ModelValue m; m.num = v; return m; }
  static ModelValue of_str(std::string s) { ModelValue m; m.sort = Sort::Str; m.text = std::move(s); return m; }
  static ModelValue of_null(bool null) { ModelValue m; m.sort = Sort::Ref; m.is_null = null; return m; }
  std::string str() const;
  friend bool operator==(const ModelValue &, const ModelValue &) = default;
};

using Model = std::map<std::uint32_t, ModelValue>;

/// Value of an expression under a model total over its variables.
/// Throws Error(Solver) for an unassigned variable.
ModelValue evaluate(const ExprRef &e, const Model &model);
bool evaluate_pred(const ExprRef &e, const Model &model);

/// Assigns canonical names v0, v1, ... in first-use order.
class VarNamer {
public:
  std::string name(std::uint32_t var);
  const std::map<std::uint32_t, std::string> &names() const { return names_; }

private:
  std::map<std::uint32_t, std::string> names_;
};

/// Renders with canonical names when `namer` is given, else with the
/// variables' own names.
std::string render_expr(const ExprRef &e, VarNamer *namer = nullptr);

struct PathCondition {
  std::vector<ExprRef> conjuncts;

  bool empty() const { return conjuncts.empty(); }
  std::map<std::uint32_t, ExprRef> vars() const;
  /// Stable text form: canonical names by first use, conjuncts sorted,
  /// joined with " && "; "true" when empty.
  std::string canonical() const;
  /// Rendered conjuncts in path order with the variables' own names.
  std::vector<std::string> readable() const;
};

} // namespace snapseed
