//===-- snapshot.hpp - Heap snapshot documents and queries ------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
//
// A snapshot is a JSON document with sections header, classes, objects,
// arrays, strings, collections and roots. References are integer ids and
// null is JSON null. Loading produces an immutable index that answers the
// queries the symbolic engine issues while migrating heap data.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/heap.hpp"
#include "snapseed/registry.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>

namespace snapseed {

using Json = nlohmann::json;

inline constexpr int kSnapshotVersion = 1;

/// Serializes the live part of `state` (reachable from roots and statics).
Json dump_snapshot(const Program &program, const HeapState &state, const AppRegistry &apps);
/// Stable text form: sorted keys, one section entry per line.
std::string snapshot_text(const Json &doc);

class SnapshotIndex {
public:
  struct ClassInfo {
    std::string name;
    std::string super;
    bool initialized = false;
    std::vector<FieldDef> statics; // declared statics, values in heap().classes
    std::vector<FieldDef> layout;  // instance layout
    friend bool operator==(const ClassInfo &, const ClassInfo &) = default;
  };

  /// Validates the schema and reference closure. Throws Error(Snapshot).
  static SnapshotIndex load(const Json &doc);
  static SnapshotIndex load_text(const std::string &text);
  static SnapshotIndex load_file(const std::string &path);

  const HeapState &heap() const { return heap_; }
  const CObject &get_object(HeapId id) const { return heap_.object(id); }
  const CArray &get_array(HeapId id) const { return heap_.array(id); }
  const std::string &get_string(HeapId id) const { return heap_.string(id).text; }
  const CCollection &get_collection(HeapId id) const { return heap_.collection(id); }
  bool has(HeapId id) const { return heap_.contains(id); }

  /// Statics of an initialized class, or nothing when the snapshot never
  /// initialized it. Throws for classes absent from the snapshot.
  std::optional<std::vector<CValue>> class_statics(const std::string &name) const;
  const ClassInfo &class_info(const std::string &name) const;
  const std::map<std::string, ClassInfo> &classes() const { return classes_; }
  bool knows_class(const std::string &name) const { return classes_.count(name) != 0; }

  HeapId find_root(const std::string &service) const;
  const std::map<std::string, HeapId> &roots() const { return heap_.roots; }

  std::int32_t skeleton_uid() const { return skeleton_uid_; }
  const std::string &skeleton_package() const { return skeleton_package_; }

  std::size_t count(std::size_t variant_index) const;
  std::size_t object_count() const { return count(0); }
  std::size_t array_count() const { return count(1); }
  std::size_t string_count() const { return count(2); }
  std::size_t collection_count() const { return count(3); }

  /// Checks that every class layout matches the program's declaration.
  void check_compatible(const Program &program) const;

  /// Deterministic digest of the whole index.
  std::uint64_t fingerprint() const;

  friend bool operator==(const SnapshotIndex &, const SnapshotIndex &) = default;

private:
  HeapState heap_;
  std::map<std::string, ClassInfo> classes_;
  std::int32_t skeleton_uid_ = 0;
  std::string skeleton_package_;
};

/// Answers one query of the snapshot line protocol:
/// {"op":"get_object","id":N} -> {"ok":true,...}. Errors give ok=false.
Json answer_query(const SnapshotIndex &index, const Json &request);
/// Serves newline-delimited queries until end of input.
void serve_queries(const SnapshotIndex &index, std::istream &in, std::ostream &out);

} // namespace snapseed
