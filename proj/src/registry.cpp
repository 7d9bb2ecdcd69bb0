//===-- registry.cpp - Installed apps and system configuration ------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/registry.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace snapseed {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json &v, const std::string &where) {
  std::vector<std::string> out;
  auto one = [&](const json &x) {
    if (x.is_string()) out.push_back(x.get<std::string>());
    else if (x.is_number_integer()) out.push_back(std::to_string(x.get<std::int64_t>()));
    else if (x.is_boolean()) out.push_back(x.get<bool>() ? "true" : "false");
    else throw Error(ErrorKind::Registry, where + ": expected string, number or list");
  };
  if (v.is_array()) {
    for (const auto &x : v) one(x);
  } else {
    one(v);
  }
  return out;
}

json parse_json(const std::string &text, ErrorKind kind) {
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    throw Error(kind, std::string("malformed JSON: ") + e.what());
  }
}

} // namespace

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
}

void AppRegistry::validate() const {
  std::set<std::int32_t> uids;
  std::set<std::string> packages;
  int skeletons = 0;
  for (const auto &a : apps) {
    if (a.uid < kFirstApplicationUid)
      throw Error(ErrorKind::Registry, "uid " + std::to_string(a.uid) + " of '" + a.package +
                                           "' is below the first application uid");
    if (!uids.insert(a.uid).second)
      throw Error(ErrorKind::Registry, "duplicate uid " + std::to_string(a.uid));
    if (!packages.insert(a.package).second)
      throw Error(ErrorKind::Registry, "duplicate package '" + a.package + "'");
    if (a.skeleton) ++skeletons;
  }
  if (skeletons != 1)
    throw Error(ErrorKind::Registry, "expected exactly one skeleton app, found " + std::to_string(skeletons));
}

const AppInfo &AppRegistry::skeleton() const {
  for (const auto &a : apps)
    if (a.skeleton) return a;
  throw Error(ErrorKind::Registry, "no skeleton app");
}

const AppInfo *AppRegistry::find_package(const std::string &package) const {
  for (const auto &a : apps)
    if (a.package == package) return &a;
  return nullptr;
}

std::optional<std::string> AppRegistry::manifest_key_for(const std::string &label) const {
  if (auto it = manifest_keys.find(label); it != manifest_keys.end()) return it->second;
  auto br = label.find('[');
  if (br != std::string::npos) {
    if (auto it = manifest_keys.find(label.substr(0, br) + "[]"); it != manifest_keys.end()) return it->second;
  }
  return std::nullopt;
}

AppRegistry AppRegistry::from_json_text(const std::string &text) {
  json doc = parse_json(text, ErrorKind::Registry);
  if (!doc.is_object() || !doc.contains("apps") || !doc["apps"].is_array())
    throw Error(ErrorKind::Registry, "registry needs an 'apps' array");
  AppRegistry r;
  for (const auto &a : doc["apps"]) {
    if (!a.contains("uid") || !a.contains("package"))
      throw Error(ErrorKind::Registry, "app entry needs 'uid' and 'package'");
    AppInfo info;
    info.uid = a["uid"].get<std::int32_t>();
    info.package = a["package"].get<std::string>();
    info.skeleton = a.value("skeleton", false);
    if (a.contains("manifest")) {
      for (const auto &[k, v] : a["manifest"].items()) info.manifest[k] = string_list(v, info.package + "." + k);
    }
    r.apps.push_back(std::move(info));
  }
  if (doc.contains("manifest_keys"))
    for (const auto &[k, v] : doc["manifest_keys"].items()) r.manifest_keys[k] = v.get<std::string>();
  if (doc.contains("key_domains"))
    for (const auto &[k, v] : doc["key_domains"].items()) r.key_domains[k] = string_list(v, k);
  r.validate();
  return r;
}

AppRegistry AppRegistry::from_file(const std::string &path) { return from_json_text(read_text_file(path)); }

std::string AppRegistry::to_json_text() const {
  json doc;
  doc["apps"] = json::array();
  for (const auto &a : apps) {
    json j{{"uid", a.uid}, {"package", a.package}};
    if (a.skeleton) j["skeleton"] = true;
    j["manifest"] = json::object();
    for (const auto &[k, v] : a.manifest) j["manifest"][k] = v;
    doc["apps"].push_back(j);
  }
  doc["manifest_keys"] = manifest_keys;
  doc["key_domains"] = key_domains;
  return doc.dump(2);
}

SysConfig sys_config_from_json_text(const std::string &text) {
  json doc = parse_json(text, ErrorKind::Usage);
  if (!doc.is_object()) throw Error(ErrorKind::Usage, "system config must be a JSON object");
  SysConfig cfg;
  for (const auto &[k, v] : doc.items()) cfg[k] = string_list(v, k);
  return cfg;
}

SysConfig sys_config_from_file(const std::string &path) {
  return sys_config_from_json_text(read_text_file(path));
}

} // namespace snapseed
