//===-- solver.cpp - Finite-domain search over path conditions ------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/solver.hpp"

#include "snapseed/common.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace snapseed {

const char *to_string(SatResult r) {
  switch (r) {
  case SatResult::Sat: return "sat";
  case SatResult::Unsat: return "unsat";
  case SatResult::Unknown: return "unknown";
  }
  return "?";
}

PathCondition conjoin_property(PathCondition pc, ExprRef property) {
  if (!property || property->sort != Sort::Bool)
    throw Error(ErrorKind::Solver, "property must be a boolean constraint");
  pc.conjuncts.push_back(std::move(property));
  return pc;
}

namespace {

struct BudgetExceeded {};

bool is_cmp(ExprOp op) { return op >= ExprOp::Eq && op <= ExprOp::Ge; }
bool is_arith(ExprOp op) { return op >= ExprOp::Add && op <= ExprOp::Shr; }

std::uint32_t odd_inverse(std::uint32_t k) {
  std::uint32_t inv = k;
  for (int i = 0; i < 5; ++i) inv *= 2u - k * inv;
  return inv;
}

class Search {
public:
  Search(const PathCondition &pc, const SolverOptions &opts) : opts_(opts), rng_(opts.seed) {
    for (const auto &c : pc.conjuncts) roots_.push_back(compile(c));
  }

  SolveOutcome run() {
    SolveOutcome out;
    try {
      out.result = solve();
    } catch (const BudgetExceeded &) {
      out.result = SatResult::Unknown;
    }
    out.steps = steps_;
    if (out.result == SatResult::Sat) out.model = model();
    return out;
  }

private:
  struct Node {
    ExprOp op;
    Sort sort;
    std::int32_t imm = 0;
    int slot = -1;
    int a = -1, b = -1;
    int maxpos = -1;
  };

  struct VarPlan {
    ExprRef var;
    std::int64_t lo = INT32_MIN, hi = INT32_MAX;
    bool complete = false;
    std::vector<std::int32_t> values; // complete domain, filtered
    std::vector<std::int32_t> base;   // seed candidates when incomplete
  };

  std::int32_t intern(const std::string &s) {
    auto [it, fresh] = intern_.emplace(s, static_cast<std::int32_t>(texts_.size()));
    if (fresh) texts_.push_back(s);
    return it->second;
  }

  int compile(const ExprRef &e) {
    if (auto it = memo_.find(e.get()); it != memo_.end()) return it->second;
    Node n{e->op, e->sort};
    switch (e->op) {
    case ExprOp::IntConst:
    case ExprOp::BoolConst:
      n.imm = e->value;
      int_consts_.insert(e->value);
      break;
    case ExprOp::StrConst:
      n.imm = intern(e->text);
      str_consts_.push_back(n.imm);
      break;
    case ExprOp::Var: {
      auto it = slot_of_.find(e->var);
      if (it == slot_of_.end()) {
        it = slot_of_.emplace(e->var, static_cast<int>(plans_.size())).first;
        VarPlan p;
        p.var = e;
        plans_.push_back(std::move(p));
      }
      n.slot = it->second;
      break;
    }
    default:
      if (e->op == ExprOp::Concat) has_concat_ = true;
      if (!e->kids.empty()) n.a = compile(e->kids[0]);
      if (e->kids.size() > 1) n.b = compile(e->kids[1]);
    }
    nodes_.push_back(n);
    int idx = static_cast<int>(nodes_.size()) - 1;
    memo_.emplace(e.get(), idx);
    return idx;
  }

  void step(std::uint64_t n = 1) {
    steps_ += n;
    if (steps_ > opts_.step_budget) throw BudgetExceeded{};
  }

  std::int32_t eval(int i) {
    const Node &n = nodes_[i];
    switch (n.op) {
    case ExprOp::IntConst: case ExprOp::BoolConst: case ExprOp::StrConst: return n.imm;
    case ExprOp::Var: return vals_[n.slot];
    case ExprOp::And: return eval(n.a) && eval(n.b);
    case ExprOp::Or: return eval(n.a) || eval(n.b);
    case ExprOp::Not: return !eval(n.a);
    case ExprOp::StrEq: return eval(n.a) == eval(n.b);
    case ExprOp::Concat: return intern(texts_[eval(n.a)] + texts_[eval(n.b)]);
    case ExprOp::IsNull: case ExprOp::BoolToInt: return eval(n.a) != 0;
    default:
      if (is_cmp(n.op)) return apply_cmp_op(n.op, eval(n.a), eval(n.b));
      return apply_int_op(n.op, eval(n.a), eval(n.b));
    }
  }

  // Variable slots reachable from a node.
  void slots_of(int i, std::set<int> &out) const {
    const Node &n = nodes_[i];
    if (n.op == ExprOp::Var) out.insert(n.slot);
    if (n.a >= 0) slots_of(n.a, out);
    if (n.b >= 0) slots_of(n.b, out);
  }

  void narrow(int root) {
    const Node &n = nodes_[root];
    if (!is_cmp(n.op)) return;
    const Node &l = nodes_[n.a], &r = nodes_[n.b];
    int slot;
    std::int64_t k;
    ExprOp op = n.op;
    if (l.op == ExprOp::Var && r.op == ExprOp::IntConst) {
      slot = l.slot;
      k = r.imm;
    } else if (r.op == ExprOp::Var && l.op == ExprOp::IntConst) {
      slot = r.slot;
      k = l.imm;
      switch (op) {
      case ExprOp::Lt: op = ExprOp::Gt; break;
      case ExprOp::Le: op = ExprOp::Ge; break;
      case ExprOp::Gt: op = ExprOp::Lt; break;
      case ExprOp::Ge: op = ExprOp::Le; break;
      default: break;
      }
    } else {
      return;
    }
    auto &p = plans_[slot];
    if (p.var->sort != Sort::Int && p.var->sort != Sort::Bool) return;
    switch (op) {
    case ExprOp::Eq: p.lo = std::max(p.lo, k); p.hi = std::min(p.hi, k); break;
    case ExprOp::Lt: p.hi = std::min(p.hi, k - 1); break;
    case ExprOp::Le: p.hi = std::min(p.hi, k); break;
    case ExprOp::Gt: p.lo = std::max(p.lo, k + 1); break;
    case ExprOp::Ge: p.lo = std::max(p.lo, k); break;
    case ExprOp::Ne:
      if (k == p.lo) ++p.lo;
      else if (k == p.hi) --p.hi;
      break;
    default: break;
    }
  }

  void plan_domains() {
    std::size_t str_vars = 0;
    for (const auto &p : plans_)
      if (p.var->sort == Sort::Str) ++str_vars;
    std::vector<std::int32_t> atoms = str_consts_;
    for (const auto &s : opts_.string_universe) atoms.push_back(intern(s));
    for (std::size_t i = 0; i < str_vars; ++i) atoms.push_back(intern("#fresh" + std::to_string(i)));
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());

    for (auto &p : plans_) {
      const auto &dom = p.var->domain;
      switch (p.var->sort) {
      case Sort::Bool:
        p.lo = std::max<std::int64_t>(p.lo, 0);
        p.hi = std::min<std::int64_t>(p.hi, 1);
        [[fallthrough]];
      case Sort::Int:
        p.lo = std::max<std::int64_t>(p.lo, dom.lo);
        p.hi = std::min<std::int64_t>(p.hi, dom.hi);
        if (!dom.ints.empty()) {
          p.complete = true;
          for (auto v : dom.ints)
            if (v >= p.lo && v <= p.hi) p.values.push_back(v);
          std::sort(p.values.begin(), p.values.end());
          p.values.erase(std::unique(p.values.begin(), p.values.end()), p.values.end());
        } else if (p.lo > p.hi) {
          p.complete = true;
        } else if (static_cast<std::uint64_t>(p.hi - p.lo) + 1 <= opts_.enum_limit) {
          p.complete = true;
          for (std::int64_t v = p.lo; v <= p.hi; ++v) p.values.push_back(static_cast<std::int32_t>(v));
        } else {
          seed_int_candidates(p);
        }
        break;
      case Sort::Ref:
        p.complete = true;
        p.values = {0, 1};
        break;
      case Sort::Str:
        if (!dom.strs.empty()) {
          p.complete = true;
          for (const auto &s : dom.strs) p.values.push_back(intern(s));
        } else if (!has_concat_) {
          p.complete = true;
          p.values = atoms;
        } else {
          p.base = atoms;
        }
        break;
      }
    }
  }

  void seed_int_candidates(VarPlan &p) {
    std::vector<std::int64_t> c{0, 1, -1, p.lo, p.hi, p.lo + 1, p.hi - 1};
    for (auto k : int_consts_) {
      c.push_back(k);
      c.push_back(static_cast<std::int64_t>(k) + 1);
      c.push_back(static_cast<std::int64_t>(k) - 1);
    }
    std::uniform_int_distribution<std::int64_t> dist(p.lo, p.hi);
    for (unsigned i = 0; i < opts_.random_samples; ++i) c.push_back(dist(rng_));
    for (auto v : c)
      if (v >= p.lo && v <= p.hi) p.base.push_back(static_cast<std::int32_t>(v));
  }

  void order_vars() {
    std::vector<int> complete, open;
    for (int s = 0; s < static_cast<int>(plans_.size()); ++s)
      (plans_[s].complete ? complete : open).push_back(s);
    std::stable_sort(complete.begin(), complete.end(), [&](int a, int b) {
      return plans_[a].values.size() < plans_[b].values.size();
    });
    order_ = complete;
    order_.insert(order_.end(), open.begin(), open.end());
    pos_.assign(plans_.size(), -1);
    for (int i = 0; i < static_cast<int>(order_.size()); ++i) pos_[order_[i]] = i;
    for (auto &n : nodes_) {
      // Children precede parents in nodes_, so one forward pass suffices.
      n.maxpos = n.op == ExprOp::Var ? pos_[n.slot] : -1;
      if (n.a >= 0) n.maxpos = std::max(n.maxpos, nodes_[n.a].maxpos);
      if (n.b >= 0) n.maxpos = std::max(n.maxpos, nodes_[n.b].maxpos);
    }
    at_level_.assign(order_.size(), {});
    for (int r : roots_)
      if (nodes_[r].maxpos >= 0) at_level_[nodes_[r].maxpos].push_back(r);
  }

  // Bits fixed regardless of variable values: {known zero, known one}.
  std::pair<std::uint32_t, std::uint32_t> known_bits(int i) const {
    const Node &n = nodes_[i];
    switch (n.op) {
    case ExprOp::IntConst: case ExprOp::BoolConst: {
      auto v = static_cast<std::uint32_t>(n.imm);
      return {~v, v};
    }
    case ExprOp::BitAnd: case ExprOp::BitOr: case ExprOp::BitXor: {
      auto [z0, o0] = known_bits(n.a);
      auto [z1, o1] = known_bits(n.b);
      if (n.op == ExprOp::BitAnd) return {z0 | z1, o0 & o1};
      if (n.op == ExprOp::BitOr) return {z0 & z1, o0 | o1};
      return {(z0 & z1) | (o0 & o1), (z0 & o1) | (o0 & z1)};
    }
    default:
      return {0u, 0u};
    }
  }

  // Fixed prefix and suffix of a string term; `whole` when both are the value.
  struct Affix {
    std::string prefix, suffix;
    bool whole = false;
  };

  Affix affix(int i) const {
    const Node &n = nodes_[i];
    if (n.op == ExprOp::StrConst) return {texts_[n.imm], texts_[n.imm], true};
    if (n.op != ExprOp::Concat) return {};
    Affix a = affix(n.a), b = affix(n.b);
    Affix out;
    out.whole = a.whole && b.whole;
    out.prefix = a.whole ? a.prefix + b.prefix : a.prefix;
    out.suffix = b.whole ? a.suffix + b.suffix : b.suffix;
    return out;
  }

  static bool clash(const std::string &x, const std::string &y, bool front) {
    std::size_t k = std::min(x.size(), y.size());
    if (front) return x.compare(0, k, y, 0, k) != 0;
    return x.compare(x.size() - k, k, y, y.size() - k, k) != 0;
  }

  // True when an (in)equality can never hold, judged by fixed bits or
  // fixed string affixes alone.
  bool refuted(int i, bool truth = true) const {
    const Node &n = nodes_[i];
    if (n.op == ExprOp::Not) return refuted(n.a, !truth);
    if (n.op == ExprOp::StrEq) {
      Affix a = affix(n.a), b = affix(n.b);
      if (!truth) return a.whole && b.whole && a.prefix == b.prefix;
      return clash(a.prefix, b.prefix, true) || clash(a.suffix, b.suffix, false);
    }
    ExprOp op = n.op;
    if (!truth) {
      if (op == ExprOp::Eq) op = ExprOp::Ne;
      else if (op == ExprOp::Ne) op = ExprOp::Eq;
      else return false;
    }
    if (op != ExprOp::Eq && op != ExprOp::Ne) return false;
    if (nodes_[n.a].sort != Sort::Int) return false;
    auto [z0, o0] = known_bits(n.a);
    auto [z1, o1] = known_bits(n.b);
    if (op == ExprOp::Eq) return ((z0 & o1) | (o0 & z1)) != 0;
    return (z0 | o0) == ~0u && (z1 | o1) == ~0u && o0 == o1;
  }

  // Drops complete-domain values that violate a conjunct mentioning only
  // that variable.
  void filter_unary() {
    for (std::size_t d = 0; d < order_.size(); ++d) {
      auto &p = plans_[order_[d]];
      if (!p.complete) continue;
      std::vector<int> unary;
      for (int r : roots_) {
        std::set<int> s;
        slots_of(r, s);
        if (s.size() == 1 && *s.begin() == order_[d]) unary.push_back(r);
      }
      if (unary.empty()) continue;
      std::vector<std::int32_t> kept;
      for (auto v : p.values) {
        vals_[order_[d]] = v;
        bool ok = true;
        for (int r : unary) {
          step();
          if (!eval(r)) {
            ok = false;
            break;
          }
        }
        if (ok) kept.push_back(v);
      }
      p.values = std::move(kept);
    }
  }

  SatResult solve() {
    for (int r : roots_) {
      if (nodes_[r].sort != Sort::Bool) throw Error(ErrorKind::Solver, "conjunct is not boolean");
      narrow(r);
    }
    plan_domains();
    vals_.assign(plans_.size(), 0);
    for (int r : roots_) {
      std::set<int> s;
      slots_of(r, s);
      if (s.empty()) {
        step();
        if (!eval(r)) return SatResult::Unsat;
      }
    }
    for (int r : roots_)
      if (refuted(r)) return SatResult::Unsat;
    order_vars();
    filter_unary();
    bool all_complete = std::all_of(plans_.begin(), plans_.end(), [](const VarPlan &p) { return p.complete; });
    if (descend(0)) return SatResult::Sat;
    return all_complete ? SatResult::Unsat : SatResult::Unknown;
  }

  bool descend(std::size_t d) {
    if (d == order_.size()) return true;
    int slot = order_[d];
    auto &p = plans_[slot];
    const std::vector<std::int32_t> *cands = &p.values;
    std::vector<std::int32_t> dynamic;
    if (!p.complete) {
      dynamic = open_candidates(d);
      cands = &dynamic;
    }
    for (auto v : *cands) {
      step();
      vals_[slot] = v;
      bool ok = true;
      for (int r : at_level_[d]) {
        step();
        if (!eval(r)) {
          ok = false;
          break;
        }
      }
      if (ok && descend(d + 1)) return true;
    }
    return false;
  }

  std::vector<std::int32_t> open_candidates(std::size_t d) {
    int slot = order_[d];
    auto &p = plans_[slot];
    level_ = static_cast<int>(d);
    wants_.clear();
    for (int r : at_level_[d]) inv_pred(r, true, 0);
    std::vector<std::int32_t> out;
    std::unordered_set<std::int32_t> seen;
    auto add = [&](std::int32_t v) {
      if (p.var->sort != Sort::Str && (v < p.lo || v > p.hi)) return;
      if (seen.insert(v).second) out.push_back(v);
    };
    for (auto v : wants_) add(v);
    for (auto v : p.base) add(v);
    return out;
  }

  bool has_x(int i) const { return nodes_[i].maxpos == level_; }

  void push_want(std::int32_t v) {
    if (wants_.size() < 512) wants_.push_back(v);
  }

  void inv_int(int i, std::uint32_t w, int depth) {
    if (depth > 12) return;
    step();
    const Node &n = nodes_[i];
    if (n.op == ExprOp::Var) return push_want(static_cast<std::int32_t>(w));
    if (n.op == ExprOp::BoolToInt) return inv_pred(n.a, w != 0, depth + 1);
    if (!is_arith(n.op)) return;
    bool left = has_x(n.a);
    int sub = left ? n.a : n.b;
    auto k = static_cast<std::uint32_t>(eval(left ? n.b : n.a));
    auto sk = static_cast<std::int32_t>(k);
    auto sw = static_cast<std::int32_t>(w);
    int nd = depth + 1;
    switch (n.op) {
    case ExprOp::Add: inv_int(sub, w - k, nd); break;
    case ExprOp::Sub: inv_int(sub, left ? w + k : k - w, nd); break;
    case ExprOp::Mul:
      if (k & 1u) inv_int(sub, w * odd_inverse(k), nd);
      if (sk != 0 && sw % sk == 0) inv_int(sub, static_cast<std::uint32_t>(sw / sk), nd);
      break;
    case ExprOp::Div:
      if (left) {
        inv_int(sub, w * k, nd);
      } else if (sw != 0) {
        inv_int(sub, static_cast<std::uint32_t>(apply_int_op(ExprOp::Div, sk, sw)), nd);
      }
      break;
    case ExprOp::Mod:
      if (left && sk != 0) {
        std::uint32_t m = sk < 0 ? 0u - k : k;
        for (std::uint32_t j : {0u, 1u, 0u - 1u, 2u}) inv_int(sub, w + j * m, nd);
      }
      break;
    case ExprOp::BitAnd:
      inv_int(sub, w, nd);
      inv_int(sub, w | ~k, nd);
      break;
    case ExprOp::BitOr:
      inv_int(sub, w & ~k, nd);
      inv_int(sub, w, nd);
      break;
    case ExprOp::BitXor: inv_int(sub, w ^ k, nd); break;
    case ExprOp::Shl:
      if (left) inv_int(sub, w >> (k & 31u), nd);
      break;
    case ExprOp::Shr:
      if (left) {
        inv_int(sub, w << (k & 31u), nd);
        inv_int(sub, (w << (k & 31u)) | ((1u << (k & 31u)) - 1u), nd);
      }
      break;
    default: break;
    }
  }

  void inv_pred(int i, bool truth, int depth) {
    if (depth > 12) return;
    const Node &n = nodes_[i];
    switch (n.op) {
    case ExprOp::Var: push_want(truth ? 1 : 0); return;
    case ExprOp::Not: inv_pred(n.a, !truth, depth + 1); return;
    case ExprOp::And: case ExprOp::Or:
      if (has_x(n.a)) inv_pred(n.a, truth, depth + 1);
      if (has_x(n.b)) inv_pred(n.b, truth, depth + 1);
      return;
    case ExprOp::IsNull:
      if (has_x(n.a)) push_want(truth ? 1 : 0);
      return;
    case ExprOp::StrEq: {
      bool left = has_x(n.a);
      inv_str(left ? n.a : n.b, eval(left ? n.b : n.a), depth + 1);
      return;
    }
    default:
      if (!is_cmp(n.op)) return;
      bool left = has_x(n.a);
      int sub = left ? n.a : n.b;
      auto t = static_cast<std::uint32_t>(eval(left ? n.b : n.a));
      inv_int(sub, t, depth + 1);
      inv_int(sub, t + 1, depth + 1);
      inv_int(sub, t - 1, depth + 1);
    }
  }

  void inv_str(int i, std::int32_t want, int depth) {
    if (depth > 12) return;
    step();
    const Node &n = nodes_[i];
    if (n.op == ExprOp::Var) return push_want(want);
    if (n.op != ExprOp::Concat) return;
    const std::string w = texts_[want];
    if (has_x(n.a)) {
      const std::string r = texts_[eval(n.b)];
      if (w.size() >= r.size() && w.compare(w.size() - r.size(), r.size(), r) == 0)
        inv_str(n.a, intern(w.substr(0, w.size() - r.size())), depth + 1);
    } else {
      const std::string l = texts_[eval(n.a)];
      if (w.compare(0, l.size(), l) == 0) inv_str(n.b, intern(w.substr(l.size())), depth + 1);
    }
  }

  Model model() const {
    Model m;
    for (std::size_t s = 0; s < plans_.size(); ++s) {
      const auto &v = plans_[s].var;
      ModelValue mv;
      switch (v->sort) {
      case Sort::Int: mv = ModelValue::of_int(vals_[s]); break;
      case Sort::Bool: mv.sort = Sort::Bool; mv.num = vals_[s]; break;
      case Sort::Str: mv = ModelValue::of_str(texts_[vals_[s]]); break;
      case Sort::Ref: mv = ModelValue::of_null(vals_[s] != 0); break;
      }
      m.emplace(v->var, mv);
    }
    return m;
  }

  const SolverOptions &opts_;
  std::mt19937_64 rng_;
  std::uint64_t steps_ = 0;
  std::vector<Node> nodes_;
  std::vector<int> roots_;
  std::unordered_map<const Expr *, int> memo_;
  std::map<std::uint32_t, int> slot_of_;
  std::vector<VarPlan> plans_;
  std::set<std::int32_t> int_consts_;
  std::vector<std::int32_t> str_consts_;
  std::unordered_map<std::string, std::int32_t> intern_;
  std::vector<std::string> texts_;
  bool has_concat_ = false;
  std::vector<int> order_;
  std::vector<int> pos_;
  std::vector<std::vector<int>> at_level_;
  std::vector<std::int32_t> vals_;
  std::vector<std::int32_t> wants_;
  int level_ = -1;
};

} // namespace

// Conjuncts that share no variables are solved separately; one unsat group
// decides the whole condition even when another group is open-ended.
SolveOutcome check_sat(const PathCondition &pc, const SolverOptions &opts) {
  const std::size_t n = pc.conjuncts.size();
  if (n <= 1) return Search(pc, opts).run();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::map<std::uint32_t, std::size_t> owner;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::uint32_t, ExprRef> vars;
    collect_vars(pc.conjuncts[i], vars);
    for (const auto &[id, e] : vars) {
      auto [it, fresh] = owner.emplace(id, i);
      if (!fresh) parent[find(i)] = find(it->second);
    }
  }
  std::map<std::size_t, PathCondition> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].conjuncts.push_back(pc.conjuncts[i]);
  if (groups.size() == 1) return Search(pc, opts).run();

  SolveOutcome out;
  out.result = SatResult::Sat;
  bool unknown = false;
  for (const auto &[root, sub] : groups) {
    auto o = Search(sub, opts).run();
    out.steps += o.steps;
    if (o.result == SatResult::Unsat) return {SatResult::Unsat, {}, out.steps};
    if (o.result == SatResult::Unknown) unknown = true;
    else out.model.insert(o.model.begin(), o.model.end());
  }
  if (unknown) {
    out.result = SatResult::Unknown;
    out.model.clear();
  }
  return out;
}

std::vector<ModelValue> explicit_domain(const Expr &var, const std::vector<std::string> &atoms,
                                        std::uint64_t cap) {
  std::vector<ModelValue> out;
  switch (var.sort) {
  case Sort::Int:
    if (!var.domain.ints.empty()) {
      for (auto v : var.domain.ints) out.push_back(ModelValue::of_int(v));
    } else if (static_cast<std::uint64_t>(static_cast<std::int64_t>(var.domain.hi) - var.domain.lo) + 1 <= cap) {
      for (std::int64_t v = var.domain.lo; v <= var.domain.hi; ++v)
        out.push_back(ModelValue::of_int(static_cast<std::int32_t>(v)));
    }
    break;
  case Sort::Bool:
    for (int v : {0, 1}) {
      ModelValue m;
      m.sort = Sort::Bool;
      m.num = v;
      out.push_back(m);
    }
    break;
  case Sort::Str:
    for (const auto &s : var.domain.strs.empty() ? atoms : var.domain.strs) out.push_back(ModelValue::of_str(s));
    break;
  case Sort::Ref:
    out = {ModelValue::of_null(false), ModelValue::of_null(true)};
    break;
  }
  return out;
}

std::vector<Model> brute_force(const PathCondition &pc, const ExplicitDomains &domains,
                               std::uint64_t cap, std::size_t limit) {
  std::vector<std::uint32_t> ids;
  std::vector<const std::vector<ModelValue> *> doms;
  std::uint64_t product = 1;
  for (const auto &[id, vals] : domains) {
    ids.push_back(id);
    doms.push_back(&vals);
    product *= vals.size();
    if (product > cap) throw Error(ErrorKind::Solver, "brute-force domain product exceeds cap");
  }
  std::vector<Model> out;
  if (product == 0 || limit == 0) return out;
  std::vector<std::size_t> idx(ids.size(), 0);
  Model m;
  for (std::size_t i = 0; i < ids.size(); ++i) m[ids[i]] = (*doms[i])[0];
  while (true) {
    bool ok = true;
    for (const auto &c : pc.conjuncts)
      if (!evaluate_pred(c, m)) {
        ok = false;
        break;
      }
    if (ok) {
      out.push_back(m);
      if (out.size() >= limit) return out;
    }
    // Odometer with the last variable fastest.
    std::size_t k = ids.size();
    while (k > 0) {
      --k;
      if (++idx[k] < doms[k]->size()) {
        m[ids[k]] = (*doms[k])[idx[k]];
        break;
      }
      idx[k] = 0;
      m[ids[k]] = (*doms[k])[0];
      if (k == 0) return out;
    }
    if (ids.empty()) return out;
  }
}

ExprRef blocking_clause(const std::map<std::uint32_t, ExprRef> &vars, const Model &model) {
  ExprRef out = mk_bool(false);
  for (const auto &[id, var] : vars) {
    auto it = model.find(id);
    if (it == model.end()) continue;
    const auto &v = it->second;
    ExprRef differs;
    switch (var->sort) {
    case Sort::Int: differs = mk_binary(ExprOp::Ne, var, mk_int(v.num)); break;
    case Sort::Bool: differs = v.num ? mk_not(var) : var; break;
    case Sort::Str: differs = mk_not(mk_str_eq(var, mk_str(v.text))); break;
    case Sort::Ref: differs = v.is_null ? mk_not(mk_is_null(var)) : mk_is_null(var); break;
    }
    out = mk_or(out, differs);
  }
  return out;
}

} // namespace snapseed
