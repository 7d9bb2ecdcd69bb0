//===-- snapshot.cpp - Heap snapshot documents and queries ----------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/snapshot.hpp"

#include <istream>
#include <ostream>
#include <set>

namespace snapseed {

namespace {

Json value_json(const CValue &v) {
  switch (v.kind) {
  case CValue::Kind::Int: return v.num;
  case CValue::Kind::Null: return nullptr;
  case CValue::Kind::Ref: return Json{{"ref", v.id}};
  }
  return nullptr;
}

Json key_json(const KeyAtom &k) {
  if (const auto *i = std::get_if<std::int32_t>(&k)) return *i;
  return std::get<std::string>(k);
}

Json fields_json(const std::vector<FieldDef> &fs) {
  Json out = Json::array();
  for (const auto &f : fs) out.push_back({{"name", f.name}, {"type", f.type.str()}});
  return out;
}

[[noreturn]] void schema(const std::string &msg) { throw Error(ErrorKind::Snapshot, "schema: " + msg); }

const Json &need(const Json &j, const char *key, const std::string &where) {
  if (!j.is_object() || !j.contains(key)) schema(where + " lacks '" + key + "'");
  return j.at(key);
}

CValue parse_value(const Json &j, const std::string &where) {
  if (j.is_null()) return CValue::null();
  if (j.is_boolean()) return CValue::of_int(j.get<bool>() ? 1 : 0);
  if (j.is_number_integer()) {
    auto v = j.get<std::int64_t>();
    if (v < INT32_MIN || v > INT32_MAX) schema(where + ": integer out of range");
    return CValue::of_int(static_cast<std::int32_t>(v));
  }
  if (j.is_object() && j.contains("ref") && j["ref"].is_number_unsigned()) {
    auto id = j["ref"].get<HeapId>();
    return CValue::ref(id);
  }
  if (j.is_object() && j.contains("ref") && j["ref"].is_number_integer() && j["ref"].get<std::int64_t>() == 0)
    return CValue::null();
  schema(where + ": bad value " + j.dump());
}

KeyAtom parse_key(const Json &j, const std::string &where) {
  if (j.is_number_integer()) return static_cast<std::int32_t>(j.get<std::int64_t>());
  if (j.is_string()) return j.get<std::string>();
  schema(where + ": bad key " + j.dump());
}

std::vector<FieldDef> parse_fields(const Json &j, const std::string &where) {
  if (!j.is_array()) schema(where + " must be an array");
  std::vector<FieldDef> out;
  for (const auto &f : j) {
    FieldDef d;
    d.name = need(f, "name", where).get<std::string>();
    try {
      d.type = Type::parse(need(f, "type", where).get<std::string>());
    } catch (const Error &e) {
      schema(where + ": " + e.what());
    }
    out.push_back(std::move(d));
  }
  return out;
}

Type parse_type_field(const Json &j, const char *key, const std::string &where) {
  try {
    return Type::parse(need(j, key, where).get<std::string>());
  } catch (const Error &e) {
    schema(where + ": " + e.what());
  }
}

} // namespace

Json dump_snapshot(const Program &program, const HeapState &state, const AppRegistry &apps) {
  const auto &skel = apps.skeleton();
  Json doc;
  doc["header"] = {{"version", kSnapshotVersion}, {"skeleton_uid", skel.uid}, {"skeleton_package", skel.package}};
  Json classes = Json::array();
  for (const auto &c : program.classes) {
    Json jc{{"name", c.name}, {"super", c.super}};
    auto it = state.classes.find(c.name);
    bool init = it != state.classes.end() && it->second.initialized;
    jc["initialized"] = init;
    Json statics = Json::array();
    for (std::size_t i = 0; i < c.static_fields.size(); ++i) {
      Json s{{"name", c.static_fields[i].name}, {"type", c.static_fields[i].type.str()}};
      if (init) s["value"] = value_json(it->second.statics.at(i));
      statics.push_back(s);
    }
    jc["statics"] = statics;
    jc["fields"] = fields_json(program.instance_layout(c.name));
    classes.push_back(jc);
  }
  doc["classes"] = classes;
  Json objects = Json::array(), arrays = Json::array(), strings = Json::array(), colls = Json::array();
  for (auto id : state.live_ids()) {
    std::visit(
        [&](const auto &x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, CObject>) {
            Json fields = Json::object();
            auto layout = program.instance_layout(x.cls);
            for (std::size_t i = 0; i < layout.size(); ++i) fields[layout[i].name] = value_json(x.fields.at(i));
            objects.push_back({{"id", id}, {"class", x.cls}, {"fields", fields}});
          } else if constexpr (std::is_same_v<T, CArray>) {
            Json vals = Json::array();
            for (const auto &v : x.values) vals.push_back(value_json(v));
            arrays.push_back({{"id", id}, {"elem", x.elem.str()}, {"values", vals}});
          } else if constexpr (std::is_same_v<T, CString>) {
            strings.push_back({{"id", id}, {"text", x.text}});
          } else {
            Json jc{{"id", id}, {"elem", x.elem.str()}};
            if (x.kind == Type::Kind::List) {
              jc["kind"] = "list";
              Json items = Json::array();
              for (const auto &v : x.items) items.push_back(value_json(v));
              jc["items"] = items;
            } else {
              jc["kind"] = x.kind == Type::Kind::Map ? "map" : "sparse";
              if (x.kind == Type::Kind::Map) jc["key"] = x.key.str();
              Json entries = Json::array();
              for (const auto &[k, v] : x.entries) entries.push_back(Json::array({key_json(k), value_json(v)}));
              jc["entries"] = entries;
            }
            colls.push_back(jc);
          }
        },
        state.cell(id));
  }
  doc["objects"] = objects;
  doc["arrays"] = arrays;
  doc["strings"] = strings;
  doc["collections"] = colls;
  doc["roots"] = state.roots;
  return doc;
}

std::string snapshot_text(const Json &doc) {
  // One entry per line keeps diffs readable; nlohmann sorts object keys.
  std::string out = "{\n";
  bool first = true;
  for (const auto &[k, v] : doc.items()) {
    if (!first) out += ",\n";
    first = false;
    out += "  " + Json(k).dump() + ": ";
    if (v.is_array()) {
      out += "[";
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ",\n    " : "\n    ") + v[i].dump();
      out += v.empty() ? "]" : "\n  ]";
    } else {
      out += v.dump();
    }
  }
  return out + "\n}\n";
}

SnapshotIndex SnapshotIndex::load(const Json &doc) {
  SnapshotIndex idx;
  const auto &header = need(doc, "header", "document");
  if (need(header, "version", "header") != kSnapshotVersion) schema("unsupported version");
  idx.skeleton_uid_ = need(header, "skeleton_uid", "header").get<std::int32_t>();
  idx.skeleton_package_ = need(header, "skeleton_package", "header").get<std::string>();

  for (const auto &jc : need(doc, "classes", "document")) {
    ClassInfo ci;
    ci.name = need(jc, "name", "class").get<std::string>();
    std::string where = "class " + ci.name;
    ci.super = jc.value("super", "");
    ci.initialized = need(jc, "initialized", where).get<bool>();
    ci.statics = parse_fields(need(jc, "statics", where), where + " statics");
    ci.layout = parse_fields(need(jc, "fields", where), where + " fields");
    CClassState cs;
    cs.initialized = ci.initialized;
    if (ci.initialized)
      for (const auto &s : jc["statics"]) cs.statics.push_back(parse_value(need(s, "value", where), where));
    if (!idx.classes_.emplace(ci.name, ci).second) schema("duplicate class " + ci.name);
    idx.heap_.classes.emplace(ci.name, std::move(cs));
  }

  auto add = [&](HeapId id, CCell c) {
    if (id == kNullId) schema("id 0 is reserved for null");
    if (!idx.heap_.cells.emplace(id, std::move(c)).second)
      throw Error(ErrorKind::Snapshot, "duplicate id " + std::to_string(id));
    idx.heap_.next_id = std::max(idx.heap_.next_id, id + 1);
  };
  for (const auto &jo : need(doc, "objects", "document")) {
    auto id = need(jo, "id", "object").get<HeapId>();
    std::string where = "object " + std::to_string(id);
    CObject o;
    o.cls = need(jo, "class", where).get<std::string>();
    auto ci = idx.classes_.find(o.cls);
    if (ci == idx.classes_.end()) schema(where + ": unknown class " + o.cls);
    const auto &fields = need(jo, "fields", where);
    for (const auto &f : ci->second.layout) o.fields.push_back(parse_value(need(fields, f.name.c_str(), where), where));
    if (fields.size() != ci->second.layout.size()) schema(where + ": field set does not match layout");
    add(id, std::move(o));
  }
  for (const auto &ja : need(doc, "arrays", "document")) {
    auto id = need(ja, "id", "array").get<HeapId>();
    std::string where = "array " + std::to_string(id);
    CArray a;
    a.elem = parse_type_field(ja, "elem", where);
    for (const auto &v : need(ja, "values", where)) a.values.push_back(parse_value(v, where));
    add(id, std::move(a));
  }
  for (const auto &js : need(doc, "strings", "document")) {
    auto id = need(js, "id", "string").get<HeapId>();
    add(id, CString{need(js, "text", "string " + std::to_string(id)).get<std::string>()});
  }
  if (doc.contains("collections")) {
    for (const auto &jc : doc["collections"]) {
      auto id = need(jc, "id", "collection").get<HeapId>();
      std::string where = "collection " + std::to_string(id);
      CCollection c;
      auto kind = need(jc, "kind", where).get<std::string>();
      c.elem = parse_type_field(jc, "elem", where);
      if (kind == "list") {
        c.kind = Type::Kind::List;
        for (const auto &v : need(jc, "items", where)) c.items.push_back(parse_value(v, where));
      } else if (kind == "map" || kind == "sparse") {
        c.kind = kind == "map" ? Type::Kind::Map : Type::Kind::Sparse;
        c.key = kind == "map" ? parse_type_field(jc, "key", where) : Type::make(Type::Kind::Int);
        for (const auto &e : need(jc, "entries", where)) {
          if (!e.is_array() || e.size() != 2) schema(where + ": entry must be [key, value]");
          c.put(parse_key(e[0], where), parse_value(e[1], where));
        }
      } else {
        schema(where + ": unknown kind " + kind);
      }
      add(id, std::move(c));
    }
  }
  for (const auto &[name, v] : need(doc, "roots", "document").items())
    idx.heap_.roots[name] = v.get<HeapId>();

  // Reference closure.
  auto check = [&](HeapId id, const std::string &where) {
    if (id != kNullId && !idx.heap_.contains(id))
      throw Error(ErrorKind::Snapshot, "dangling reference " + std::to_string(id) + " in " + where);
  };
  for (const auto &[id, c] : idx.heap_.cells)
    for (auto child : HeapState::children(c)) check(child, "id " + std::to_string(id));
  for (const auto &[name, cs] : idx.heap_.classes)
    for (const auto &v : cs.statics)
      if (v.is_ref()) check(v.id, "statics of " + name);
  for (const auto &[name, id] : idx.heap_.roots) {
    check(id, "root " + name);
    if (!std::holds_alternative<CObject>(idx.heap_.cell(id))) schema("root " + name + " is not an object");
  }
  return idx;
}

SnapshotIndex SnapshotIndex::load_text(const std::string &text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception &e) {
    throw Error(ErrorKind::Snapshot, std::string("malformed snapshot: ") + e.what());
  }
  try {
    return load(doc);
  } catch (const Json::exception &e) {
    schema(e.what());
  }
}

SnapshotIndex SnapshotIndex::load_file(const std::string &path) { return load_text(read_text_file(path)); }

std::optional<std::vector<CValue>> SnapshotIndex::class_statics(const std::string &name) const {
  auto it = heap_.classes.find(name);
  if (it == heap_.classes.end()) throw Error(ErrorKind::Snapshot, "unknown class '" + name + "'");
  if (!it->second.initialized) return std::nullopt;
  return it->second.statics;
}

const SnapshotIndex::ClassInfo &SnapshotIndex::class_info(const std::string &name) const {
  auto it = classes_.find(name);
  if (it == classes_.end()) throw Error(ErrorKind::Snapshot, "unknown class '" + name + "'");
  return it->second;
}

HeapId SnapshotIndex::find_root(const std::string &service) const {
  auto it = heap_.roots.find(service);
  if (it == heap_.roots.end()) throw Error(ErrorKind::Snapshot, "unknown service '" + service + "'");
  return it->second;
}

std::size_t SnapshotIndex::count(std::size_t variant_index) const {
  std::size_t n = 0;
  for (const auto &[id, c] : heap_.cells)
    if (c.index() == variant_index) ++n;
  return n;
}

void SnapshotIndex::check_compatible(const Program &program) const {
  for (const auto &c : program.classes) {
    auto it = classes_.find(c.name);
    if (it == classes_.end()) throw Error(ErrorKind::Snapshot, "snapshot lacks class '" + c.name + "'");
    auto layout = program.instance_layout(c.name);
    bool same = layout.size() == it->second.layout.size() && c.static_fields.size() == it->second.statics.size();
    for (std::size_t i = 0; same && i < layout.size(); ++i)
      same = layout[i].name == it->second.layout[i].name && layout[i].type == it->second.layout[i].type;
    for (std::size_t i = 0; same && i < c.static_fields.size(); ++i)
      same = c.static_fields[i].name == it->second.statics[i].name;
    if (!same) throw Error(ErrorKind::Snapshot, "class '" + c.name + "' does not match the program");
  }
}

std::uint64_t SnapshotIndex::fingerprint() const {
  // FNV-1a over a canonical dump.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string &s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  };
  auto val = [&](const CValue &v) { mix(std::to_string(static_cast<int>(v.kind)) + ":" + std::to_string(v.num) + ":" + std::to_string(v.id) + ";"); };
  for (const auto &[id, c] : heap_.cells) {
    mix(std::to_string(id) + "#" + std::to_string(c.index()));
    std::visit(
        [&](const auto &x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, CObject>) {
            mix(x.cls);
            for (const auto &v : x.fields) val(v);
          } else if constexpr (std::is_same_v<T, CArray>) {
            mix(x.elem.str());
            for (const auto &v : x.values) val(v);
          } else if constexpr (std::is_same_v<T, CString>) {
            mix(x.text);
          } else {
            for (const auto &v : x.items) val(v);
            for (const auto &[k, v] : x.entries) {
              mix(key_str(k));
              val(v);
            }
          }
        },
        c);
  }
  for (const auto &[name, cs] : heap_.classes) {
    mix(name + (cs.initialized ? "+" : "-"));
    for (const auto &v : cs.statics) val(v);
  }
  for (const auto &[name, id] : heap_.roots) mix(name + "=" + std::to_string(id));
  mix(std::to_string(skeleton_uid_) + skeleton_package_);
  return h;
}

Json answer_query(const SnapshotIndex &index, const Json &request) {
  try {
    auto op = request.at("op").get<std::string>();
    Json out{{"ok", true}};
    if (op == "header") {
      out["skeleton_uid"] = index.skeleton_uid();
      out["skeleton_package"] = index.skeleton_package();
    } else if (op == "get_object") {
      auto id = request.at("id").get<HeapId>();
      const auto &o = index.get_object(id);
      const auto &layout = index.class_info(o.cls).layout;
      out["class"] = o.cls;
      out["fields"] = Json::object();
      for (std::size_t i = 0; i < layout.size(); ++i) out["fields"][layout[i].name] = value_json(o.fields[i]);
    } else if (op == "get_array") {
      const auto &a = index.get_array(request.at("id").get<HeapId>());
      out["elem"] = a.elem.str();
      out["length"] = a.values.size();
      out["values"] = Json::array();
      for (const auto &v : a.values) out["values"].push_back(value_json(v));
    } else if (op == "get_string") {
      out["text"] = index.get_string(request.at("id").get<HeapId>());
    } else if (op == "class_statics") {
      auto s = index.class_statics(request.at("name").get<std::string>());
      out["initialized"] = s.has_value();
      if (s) {
        out["values"] = Json::array();
        for (const auto &v : *s) out["values"].push_back(value_json(v));
      }
    } else if (op == "find_root") {
      out["id"] = index.find_root(request.at("service").get<std::string>());
    } else {
      return {{"ok", false}, {"error", "unknown op '" + op + "'"}};
    }
    return out;
  } catch (const std::exception &e) {
    return {{"ok", false}, {"error", e.what()}};
  }
}

void serve_queries(const SnapshotIndex &index, std::istream &in, std::ostream &out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json reply;
    try {
      auto req = Json::parse(line);
      reply = answer_query(index, req);
    } catch (const Json::exception &e) {
      reply = {{"ok", false}, {"error", std::string("malformed request: ") + e.what()}};
    }
    out << reply.dump() << "\n" << std::flush;
  }
}

} // namespace snapseed
