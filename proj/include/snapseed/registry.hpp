//===-- registry.hpp - Installed apps and system configuration --*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/common.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace snapseed {

/// Manifest values are lists of strings; scalars are one-element lists.
using Manifest = std::map<std::string, std::vector<std::string>>;

struct AppInfo {
  std::int32_t uid = 0;
  std::string package;
  Manifest manifest;
  bool skeleton = false;
  friend bool operator==(const AppInfo &, const AppInfo &) = default;
};

class AppRegistry {
public:
  std::vector<AppInfo> apps; // install order
  /// Symbolic-input label (e.g. "ActivityInfo.launchMode" or
  /// "PackageSetting.grantedPermissions[]") to manifest key.
  std::map<std::string, std::string> manifest_keys;
  /// Allowed values per manifest key.
  std::map<std::string, std::vector<std::string>> key_domains;

  /// Throws Error(Registry) on duplicate uids/packages, uids below the first
  /// application uid, or not exactly one skeleton.
  void validate() const;
  const AppInfo &skeleton() const;
  const AppInfo *find_package(const std::string &package) const;
  /// Manifest key for a label, trying "C.f[]" for indexed labels.
  std::optional<std::string> manifest_key_for(const std::string &label) const;

  static AppRegistry from_json_text(const std::string &text);
  static AppRegistry from_file(const std::string &path);
  std::string to_json_text() const;
};

/// Non-app-specific initialization data, e.g. provider names.
using SysConfig = std::map<std::string, std::vector<std::string>>;

SysConfig sys_config_from_json_text(const std::string &text);
SysConfig sys_config_from_file(const std::string &path);

std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &text);

} // namespace snapseed
