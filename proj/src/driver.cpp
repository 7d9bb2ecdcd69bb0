//===-- driver.cpp - Test drivers and input locators ----------------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/driver.hpp"

#include "snapseed/registry.hpp"
#include "snapseed/snapshot.hpp"

#include <cctype>

namespace snapseed {

using nlohmann::json;

Locator Locator::param(std::int32_t i) {
  Locator l;
  l.root = Root::Param;
  l.index = i;
  return l;
}

Locator Locator::object_root(HeapId id) {
  Locator l;
  l.root = Root::Object;
  l.object = id;
  return l;
}

Locator Locator::symbolic_root(HeapId id) {
  Locator l;
  l.root = Root::Symbolic;
  l.object = id;
  return l;
}

Locator Locator::extern_call(std::string fn, std::int32_t k) {
  Locator l;
  l.root = Root::Extern;
  l.fn = std::move(fn);
  l.index = k;
  return l;
}

Locator Locator::field(std::string name) const {
  Locator l = *this;
  Step s;
  s.kind = Step::Kind::Field;
  s.name = std::move(name);
  l.steps.push_back(std::move(s));
  return l;
}

Locator Locator::at(std::int32_t i) const {
  Locator l = *this;
  Step s;
  s.kind = Step::Kind::Index;
  s.index = i;
  l.steps.push_back(std::move(s));
  return l;
}

Locator Locator::key(KeyAtom k) const {
  Locator l = *this;
  Step s;
  s.kind = Step::Kind::Key;
  s.key = std::move(k);
  l.steps.push_back(std::move(s));
  return l;
}

std::string Locator::str() const {
  std::string out;
  switch (root) {
  case Root::Param: out = "param" + std::to_string(index); break;
  case Root::Object: out = "obj#" + std::to_string(object); break;
  case Root::Symbolic: out = "sym#" + std::to_string(object); break;
  case Root::Extern: out = "extern:" + fn + "#" + std::to_string(index); break;
  }
  for (const auto &s : steps) {
    switch (s.kind) {
    case Step::Kind::Field: out += "." + s.name; break;
    case Step::Kind::Index: out += "[" + std::to_string(s.index) + "]"; break;
    case Step::Kind::Key: out += "{" + key_str(s.key) + "}"; break;
    }
  }
  return out;
}

Locator Locator::parse(const std::string &text) {
  auto bad = [&]() -> Error { return Error(ErrorKind::Usage, "malformed locator '" + text + "'"); };
  Locator l;
  std::size_t i = 0;
  auto number = [&]() {
    std::size_t start = i;
    if (i < text.size() && text[i] == '-') ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) throw bad();
    return std::stoll(text.substr(start, i - start));
  };
  if (text.rfind("param", 0) == 0) {
    i = 5;
    l.root = Root::Param;
    l.index = static_cast<std::int32_t>(number());
  } else if (text.rfind("obj#", 0) == 0 || text.rfind("sym#", 0) == 0) {
    l.root = text[0] == 'o' ? Root::Object : Root::Symbolic;
    i = 4;
    l.object = static_cast<HeapId>(number());
  } else if (text.rfind("extern:", 0) == 0) {
    auto hash = text.find('#', 7);
    if (hash == std::string::npos) throw bad();
    l.root = Root::Extern;
    l.fn = text.substr(7, hash - 7);
    i = hash + 1;
    l.index = static_cast<std::int32_t>(number());
  } else {
    throw bad();
  }
  while (i < text.size()) {
    Step s;
    if (text[i] == '.') {
      ++i;
      std::size_t start = i;
      while (i < text.size() && text[i] != '.' && text[i] != '[' && text[i] != '{') ++i;
      if (start == i) throw bad();
      s.kind = Step::Kind::Field;
      s.name = text.substr(start, i - start);
    } else if (text[i] == '[') {
      ++i;
      s.kind = Step::Kind::Index;
      s.index = static_cast<std::int32_t>(number());
      if (i >= text.size() || text[i] != ']') throw bad();
      ++i;
    } else if (text[i] == '{') {
      ++i;
      s.kind = Step::Kind::Key;
      if (i < text.size() && text[i] == '"') {
        auto close = text.find("\"}", i + 1);
        if (close == std::string::npos) throw bad();
        s.key = text.substr(i + 1, close - i - 1);
        i = close + 2;
      } else {
        s.key = static_cast<std::int32_t>(number());
        if (i >= text.size() || text[i] != '}') throw bad();
        ++i;
      }
    } else {
      throw bad();
    }
    l.steps.push_back(std::move(s));
  }
  return l;
}

namespace {

[[noreturn]] void driver_error(const std::string &msg) { throw Error(ErrorKind::Driver, msg); }

VarDomain domain_from_json(const json &v, const std::string &label) {
  if (!v.is_array() || v.empty()) driver_error("domain for '" + label + "' must be a non-empty list");
  if (v[0].is_string()) {
    VarDomain d;
    for (const auto &s : v) d.strs.push_back(s.get<std::string>());
    return d;
  }
  if (v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer())
    return VarDomain::range(v[0].get<std::int32_t>(), v[1].get<std::int32_t>());
  driver_error("domain for '" + label + "' must be [lo, hi] or a list of strings");
}

ParamSpec parse_param(const json &v, const Param &decl) {
  ParamSpec p;
  p.type = decl.type;
  p.text = v.is_string() ? v.get<std::string>() : v.dump();
  if (v.is_string() && v.get<std::string>().rfind("symbolic", 0) == 0) {
    std::string s = v.get<std::string>();
    p.symbolic = true;
    if (s == "symbolic") return p;
    if (s.size() < 10 || s[8] != ':') driver_error("bad parameter spec '" + s + "'");
    std::string ty = s.substr(9);
    std::optional<VarDomain> dom;
    if (auto br = ty.find('['); br != std::string::npos) {
      auto close = ty.find(']', br);
      auto comma = ty.find(',', br);
      if (close == std::string::npos || comma == std::string::npos || comma > close)
        driver_error("bad range in '" + s + "'");
      try {
        dom = VarDomain::range(std::stoi(ty.substr(br + 1, comma - br - 1)), std::stoi(ty.substr(comma + 1, close - comma - 1)));
      } catch (const std::exception &) {
        driver_error("bad range in '" + s + "'");
      }
      ty = ty.substr(0, br);
    }
    Type t;
    try {
      t = Type::parse(ty);
    } catch (const Error &) {
      driver_error("bad type in '" + s + "'");
    }
    if (!(t == decl.type)) driver_error("parameter '" + decl.name + "' is " + decl.type.str() + ", driver says " + t.str());
    p.domain = dom;
    return p;
  }
  p.symbolic = false;
  if (v.is_null()) {
    p.literal.kind = ConstValue::Kind::Null;
  } else if (v.is_boolean()) {
    p.literal.kind = ConstValue::Kind::Bool;
    p.literal.num = v.get<bool>();
  } else if (v.is_number_integer()) {
    p.literal.kind = ConstValue::Kind::Int;
    p.literal.num = v.get<std::int32_t>();
  } else if (v.is_string()) {
    p.literal.kind = ConstValue::Kind::Str;
    p.literal.text = v.get<std::string>();
  } else {
    driver_error("unsupported literal " + v.dump());
  }
  bool ok = false;
  switch (p.literal.kind) {
  case ConstValue::Kind::Int: case ConstValue::Kind::Bool: ok = decl.type.is_numeric(); break;
  case ConstValue::Kind::Str: ok = decl.type.kind == Type::Kind::Str; break;
  case ConstValue::Kind::Null: ok = decl.type.is_heap_ref(); break;
  }
  if (!ok) driver_error("literal " + v.dump() + " does not fit parameter '" + decl.name + "'");
  return p;
}

} // namespace

const MethodDef &driver_method(const Program &program, const TestDriver &driver) {
  if (!program.find_class(driver.cls)) driver_error("unknown class '" + driver.cls + "'");
  try {
    const auto &m = resolve_dispatch(program, driver.cls, driver.entrypoint);
    if (m.is_static) driver_error("entrypoint '" + driver.entrypoint + "' is static");
    return m;
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::Driver) throw;
    driver_error("unknown entrypoint '" + driver.entrypoint + "' on '" + driver.cls + "'");
  }
}

TestDriver parse_driver(const json &doc, const Program &program) {
  if (!doc.is_object()) driver_error("driver must be a JSON object");
  TestDriver d;
  try {
    d.service = doc.at("service").get<std::string>();
    d.cls = doc.value("class", "");
    d.entrypoint = doc.at("entrypoint").get<std::string>();
  } catch (const json::exception &) {
    driver_error("driver needs 'service' and 'entrypoint'");
  }
  if (d.cls.empty()) d.cls = d.service;
  if (auto dot = d.entrypoint.rfind('.'); dot != std::string::npos) d.entrypoint = d.entrypoint.substr(dot + 1);
  const auto &m = driver_method(program, d);
  json params = doc.value("params", json::array());
  if (!params.is_array()) driver_error("'params' must be a list");
  if (params.empty() && !m.params.empty()) params = json::array();
  if (params.empty())
    for (std::size_t i = 0; i < m.params.size(); ++i) params.push_back("symbolic");
  if (params.size() != m.params.size())
    driver_error("entrypoint takes " + std::to_string(m.params.size()) + " parameters, driver gives " +
                 std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) d.params.push_back(parse_param(params[i], m.params[i]));
  if (doc.contains("domains"))
    for (const auto &[label, v] : doc["domains"].items()) d.domains[label] = domain_from_json(v, label);
  return d;
}

TestDriver load_driver_file(const std::string &path, const Program &program) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception &e) {
    driver_error("malformed driver '" + path + "': " + e.what());
  }
  return parse_driver(doc, program);
}

TestDriver auto_driver(const Program &program, const SnapshotIndex &index, const std::string &entrypoint) {
  std::string cls_hint, name = entrypoint;
  if (auto dot = entrypoint.rfind('.'); dot != std::string::npos) {
    cls_hint = entrypoint.substr(0, dot);
    name = entrypoint.substr(dot + 1);
  }
  for (const auto &[service, id] : index.roots()) {
    const auto &cls = index.get_object(id).cls;
    if (!cls_hint.empty() && !program.is_subclass(cls, cls_hint)) continue;
    if (!program.find_class(cls)) continue;
    try {
      resolve_dispatch(program, cls, name);
    } catch (const Error &) {
      continue;
    }
    json doc{{"service", service}, {"class", cls}, {"entrypoint", name}};
    return parse_driver(doc, program);
  }
  driver_error("no snapshot root offers entrypoint '" + entrypoint + "'");
}

json TestDriver::to_json() const {
  json doc{{"service", service}, {"class", cls}, {"entrypoint", entrypoint}};
  json ps = json::array();
  for (const auto &p : params) {
    if (p.symbolic) {
      std::string s = "symbolic:" + p.type.str();
      if (p.domain) s += "[" + std::to_string(p.domain->lo) + "," + std::to_string(p.domain->hi) + "]";
      ps.push_back(s);
    } else {
      switch (p.literal.kind) {
      case ConstValue::Kind::Int: ps.push_back(p.literal.num); break;
      case ConstValue::Kind::Bool: ps.push_back(p.literal.num != 0); break;
      case ConstValue::Kind::Str: ps.push_back(p.literal.text); break;
      case ConstValue::Kind::Null: ps.push_back(nullptr); break;
      }
    }
  }
  doc["params"] = ps;
  json doms = json::object();
  for (const auto &[label, d] : domains) {
    if (!d.strs.empty()) doms[label] = d.strs;
    else doms[label] = json::array({d.lo, d.hi});
  }
  doc["domains"] = doms;
  return doc;
}

} // namespace snapseed
