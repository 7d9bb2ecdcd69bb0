//===-- heap.cpp - Concrete guest heap ------------------------------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/heap.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace snapseed {

CValue default_value(const Type &t) {
  return t.is_numeric() ? CValue::of_int(0) : CValue::null();
}

std::string key_str(const KeyAtom &k) {
  if (const auto *i = std::get_if<std::int32_t>(&k)) return std::to_string(*i);
  return "\"" + std::get<std::string>(k) + "\"";
}

const CValue *CCollection::find(const KeyAtom &k) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), k,
                             [](const auto &e, const KeyAtom &key) { return e.first < key; });
  if (it != entries.end() && it->first == k) return &it->second;
  return nullptr;
}

void CCollection::put(const KeyAtom &k, CValue v) {
  auto it = std::lower_bound(entries.begin(), entries.end(), k,
                             [](const auto &e, const KeyAtom &key) { return e.first < key; });
  if (it != entries.end() && it->first == k) it->second = v;
  else entries.insert(it, {k, v});
}

HeapId HeapState::alloc(CCell c) {
  HeapId id = next_id++;
  cells.emplace(id, std::move(c));
  return id;
}

const CCell &HeapState::cell(HeapId id) const {
  auto it = cells.find(id);
  if (it == cells.end()) throw Error(ErrorKind::Snapshot, "unknown heap id " + std::to_string(id));
  return it->second;
}

CCell &HeapState::cell(HeapId id) {
  auto it = cells.find(id);
  if (it == cells.end()) throw Error(ErrorKind::Snapshot, "unknown heap id " + std::to_string(id));
  return it->second;
}

namespace {

template <typename T> T &as(CCell &c, HeapId id, const char *what) {
  if (auto *p = std::get_if<T>(&c)) return *p;
  throw Error(ErrorKind::Snapshot, "heap id " + std::to_string(id) + " is not " + what);
}

template <typename T> const T &as(const CCell &c, HeapId id, const char *what) {
  if (const auto *p = std::get_if<T>(&c)) return *p;
  throw Error(ErrorKind::Snapshot, "heap id " + std::to_string(id) + " is not " + what);
}

} // namespace

CObject &HeapState::object(HeapId id) { return as<CObject>(cell(id), id, "an object"); }
const CObject &HeapState::object(HeapId id) const { return as<CObject>(cell(id), id, "an object"); }
CArray &HeapState::array(HeapId id) { return as<CArray>(cell(id), id, "an array"); }
const CArray &HeapState::array(HeapId id) const { return as<CArray>(cell(id), id, "an array"); }
const CString &HeapState::string(HeapId id) const { return as<CString>(cell(id), id, "a string"); }
CCollection &HeapState::collection(HeapId id) { return as<CCollection>(cell(id), id, "a collection"); }
const CCollection &HeapState::collection(HeapId id) const {
  return as<CCollection>(cell(id), id, "a collection");
}

std::vector<HeapId> HeapState::children(const CCell &c) {
  std::vector<HeapId> out;
  auto add = [&](const CValue &v) {
    if (v.is_ref()) out.push_back(v.id);
  };
  std::visit(
      [&](const auto &x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CObject>) {
          for (const auto &v : x.fields) add(v);
        } else if constexpr (std::is_same_v<T, CArray>) {
          for (const auto &v : x.values) add(v);
        } else if constexpr (std::is_same_v<T, CCollection>) {
          for (const auto &v : x.items) add(v);
          for (const auto &e : x.entries) add(e.second);
        }
      },
      c);
  return out;
}

std::vector<HeapId> HeapState::live_ids() const {
  std::set<HeapId> seen;
  std::deque<HeapId> work;
  auto push = [&](HeapId id) {
    if (id != kNullId && seen.insert(id).second) work.push_back(id);
  };
  for (const auto &[name, id] : roots) push(id);
  for (const auto &[name, cs] : classes)
    for (const auto &v : cs.statics)
      if (v.is_ref()) push(v.id);
  while (!work.empty()) {
    auto id = work.front();
    work.pop_front();
    for (auto child : children(cell(id))) push(child);
  }
  return {seen.begin(), seen.end()};
}

} // namespace snapseed
