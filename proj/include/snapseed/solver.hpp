//===-- solver.hpp - Path-condition satisfiability --------------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
//
// A self-contained finite-domain solver. Interval narrowing and unary
// filtering shrink the declared domains, then a seeded backtracking search
// assigns variables one at a time, checking each conjunct as soon as its
// variables are bound. Candidates for wide integer domains come from the
// constants in the formula, from inverting operators against the value a
// conjunct needs, and from seeded random samples.
//
// Unsat is only reported when every variable was enumerated completely.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/expr.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace snapseed {

struct SolverOptions {
  std::uint64_t step_budget = 2'000'000;
  std::uint64_t seed = 0;
  /// Integer domains at most this large are enumerated completely.
  std::uint64_t enum_limit = 1u << 17;
  /// Random samples drawn for each wide integer variable.
  unsigned random_samples = 24;
  /// Extra string atoms offered to string variables.
  std::vector<std::string> string_universe;
};

enum class SatResult : std::uint8_t { Sat, Unsat, Unknown };

const char *to_string(SatResult r);

struct SolveOutcome {
  SatResult result = SatResult::Unknown;
  Model model; // total over the pc's variables when Sat
  std::uint64_t steps = 0;
};

SolveOutcome check_sat(const PathCondition &pc, const SolverOptions &opts = {});

/// Appends `property` as a new conjunct. No simplification.
PathCondition conjoin_property(PathCondition pc, ExprRef property);

/// Explicit finite domain for the brute-force oracle.
using ExplicitDomains = std::map<std::uint32_t, std::vector<ModelValue>>;

/// Every model over `domains` satisfying all conjuncts, in lexicographic
/// domain order. Throws Error(Solver) when the product exceeds `cap`.
/// Stops after `limit` models.
std::vector<Model> brute_force(const PathCondition &pc, const ExplicitDomains &domains,
                               std::uint64_t cap = 1u << 20,
                               std::size_t limit = std::numeric_limits<std::size_t>::max());

/// The declared domain of a variable as an explicit value list, or nothing
/// when it exceeds `cap` values. Strings use `atoms`.
std::vector<ModelValue> explicit_domain(const Expr &var, const std::vector<std::string> &atoms,
                                        std::uint64_t cap);

/// Blocking clause excluding the assignment of `vars` in `model`.
ExprRef blocking_clause(const std::map<std::uint32_t, ExprRef> &vars, const Model &model);

} // namespace snapseed
