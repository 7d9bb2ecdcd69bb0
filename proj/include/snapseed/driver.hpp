//===-- driver.hpp - Test drivers and input locators ------------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
//
// A test driver names the service whose snapshot singleton is bootstrapped
// into the symbolic world, the entrypoint to call on it, and one spec per
// parameter. Locators name where a symbolic input lives so that concrete
// replay can write solved values back into the same place.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/expr.hpp"
#include "snapseed/heap.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace snapseed {

class SnapshotIndex;

/// Where a symbolic input lives: an entrypoint parameter, a snapshot
/// object, or the k-th result of an extern, followed by field, index and
/// key steps. Renders as "param0.accuracy", "obj#45[0]", "obj#77{\"k\"}",
/// "extern:Fn#0".
struct Locator {
  enum class Root : std::uint8_t { Param, Object, Extern, Symbolic };
  struct Step {
    enum class Kind : std::uint8_t { Field, Index, Key };
    Kind kind = Kind::Field;
    std::string name;
    std::int32_t index = 0;
    KeyAtom key;
    friend bool operator==(const Step &, const Step &) = default;
  };

  Root root = Root::Param;
  std::int32_t index = 0; // Param: parameter index; Extern: call ordinal
  HeapId object = kNullId; // Object, Symbolic
  std::string fn;          // Extern
  std::vector<Step> steps;

  static Locator param(std::int32_t i);
  static Locator object_root(HeapId id);
  static Locator symbolic_root(HeapId id);
  static Locator extern_call(std::string fn, std::int32_t k);
  Locator field(std::string name) const;
  Locator at(std::int32_t i) const;
  Locator key(KeyAtom k) const;

  std::string str() const;
  static Locator parse(const std::string &text);
  friend bool operator==(const Locator &, const Locator &) = default;
};

/// Solved or chosen input values by locator text.
using Bindings = std::map<std::string, ModelValue>;

struct ParamSpec {
  bool symbolic = true;
  Type type;
  std::optional<VarDomain> domain; // symbolic ints only
  ConstValue literal;              // concrete parameters
  std::string text;                // as written
  friend bool operator==(const ParamSpec &, const ParamSpec &) = default;
};

struct TestDriver {
  std::string service;    // root name in the snapshot
  std::string cls;        // declared class of the bootstrap field
  std::string entrypoint; // method name
  std::vector<ParamSpec> params;
  /// Domains for symbolic inputs keyed by label, e.g. "Criteria.accuracy".
  std::map<std::string, VarDomain> domains;

  nlohmann::json to_json() const;
  friend bool operator==(const TestDriver &, const TestDriver &) = default;
};

/// Parses a driver document against the program. Throws Error(Driver).
TestDriver parse_driver(const nlohmann::json &doc, const Program &program);
TestDriver load_driver_file(const std::string &path, const Program &program);
/// Driver with every parameter symbolic for `entrypoint` ("m" or "C.m"),
/// bootstrapping the snapshot root whose class declares or inherits it.
TestDriver auto_driver(const Program &program, const SnapshotIndex &index, const std::string &entrypoint);
/// The entrypoint method after dispatch on the driver's class.
const MethodDef &driver_method(const Program &program, const TestDriver &driver);

} // namespace snapseed
