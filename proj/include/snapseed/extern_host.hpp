//===-- extern_host.hpp - Delegated extern calls ----------------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
//
// Externs with policy=delegate are answered by a host speaking a line
// protocol: one JSON request {"id":N,"fn":"...","args":[...]} per line,
// answered by {"id":N,"ret":V} or {"id":N,"error":"..."}.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "snapseed/common.hpp"

#include <json.hpp>

#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>

namespace snapseed {

class ExternHost {
public:
  virtual ~ExternHost() = default;
  /// Returns the reply's "ret" value. Throws Error(Extern) on failure.
  virtual nlohmann::json call(const std::string &fn, const nlohmann::json &args) = 0;
};

/// Canned answers keyed by function name, served in-process.
class TableExternHost : public ExternHost {
public:
  explicit TableExternHost(nlohmann::json table) : table_(std::move(table)) {}
  static std::unique_ptr<TableExternHost> from_file(const std::string &path);
  nlohmann::json call(const std::string &fn, const nlohmann::json &args) override;

private:
  nlohmann::json table_;
};

/// Spawns `command` through /bin/sh and talks to it over its stdin/stdout.
class ProcessExternHost : public ExternHost {
public:
  explicit ProcessExternHost(const std::string &command);
  ~ProcessExternHost() override;
  ProcessExternHost(const ProcessExternHost &) = delete;
  ProcessExternHost &operator=(const ProcessExternHost &) = delete;

  nlohmann::json call(const std::string &fn, const nlohmann::json &args) override;

private:
  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 1;
};

/// Host side of the protocol: answers requests from `table` until EOF.
void serve_extern_requests(const nlohmann::json &table, std::istream &in, std::ostream &out);

} // namespace snapseed
