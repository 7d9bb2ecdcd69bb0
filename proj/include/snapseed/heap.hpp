//===-- heap.hpp - Concrete guest heap --------------------------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/isa.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace snapseed {

/// A concrete guest value. Booleans are Int 0/1; strings, arrays, objects
/// and collections are references.
struct CValue {
  enum class Kind : std::uint8_t { Int, Null, Ref };
  Kind kind = Kind::Null;
  std::int32_t num = 0;
  HeapId id = kNullId;

  static CValue of_int(std::int32_t v) { return {Kind::Int, v, kNullId}; }
  static CValue null() { return {}; }
  static CValue ref(HeapId id) { return id == kNullId ? null() : CValue{Kind::Ref, 0, id}; }
  bool is_ref() const { return kind == Kind::Ref; }
  friend bool operator==(const CValue &, const CValue &) = default;
};

/// Default value of a declared type.
CValue default_value(const Type &t);

/// Map and sparse-array keys: integers or string contents.
using KeyAtom = std::variant<std::int32_t, std::string>;
std::string key_str(const KeyAtom &k);

struct CObject {
  std::string cls;
  std::vector<CValue> fields; // instance layout order
  friend bool operator==(const CObject &, const CObject &) = default;
};

struct CArray {
  Type elem;
  std::vector<CValue> values;
  friend bool operator==(const CArray &, const CArray &) = default;
};

struct CString {
  std::string text;
  friend bool operator==(const CString &, const CString &) = default;
};

struct CCollection {
  Type::Kind kind = Type::Kind::List; // List, Map or Sparse
  Type key;                           // Map only
  Type elem;
  std::vector<CValue> items;                          // List
  std::vector<std::pair<KeyAtom, CValue>> entries;    // Map, Sparse; sorted by key

  const CValue *find(const KeyAtom &k) const;
  void put(const KeyAtom &k, CValue v);
  friend bool operator==(const CCollection &, const CCollection &) = default;
};

using CCell = std::variant<CObject, CArray, CString, CCollection>;

struct CClassState {
  bool initialized = false;
  std::vector<CValue> statics;
  friend bool operator==(const CClassState &, const CClassState &) = default;
};

struct HeapState {
  std::map<HeapId, CCell> cells;
  std::map<std::string, CClassState> classes;
  std::map<std::string, HeapId> roots; // service name -> singleton object
  HeapId next_id = 1;

  HeapId alloc(CCell cell);
  bool contains(HeapId id) const { return cells.count(id) != 0; }
  const CCell &cell(HeapId id) const;
  CCell &cell(HeapId id);
  CObject &object(HeapId id);
  const CObject &object(HeapId id) const;
  CArray &array(HeapId id);
  const CArray &array(HeapId id) const;
  const CString &string(HeapId id) const;
  CCollection &collection(HeapId id);
  const CCollection &collection(HeapId id) const;

  /// References held directly by a cell, map keys excluded.
  static std::vector<HeapId> children(const CCell &c);
  /// Ids reachable from roots and class statics.
  std::vector<HeapId> live_ids() const;

  friend bool operator==(const HeapState &, const HeapState &) = default;
};

} // namespace snapseed
