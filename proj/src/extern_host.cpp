//===-- extern_host.cpp - Delegated extern calls --------------------------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/extern_host.hpp"

#include "snapseed/registry.hpp"

#include <csignal>
#include <cstring>
#include <istream>
#include <ostream>

#include <sys/wait.h>
#include <unistd.h>

namespace snapseed {

using nlohmann::json;

namespace {

json lookup(const json &table, const std::string &fn, const json &args) {
  if (!table.is_object() || !table.contains(fn)) throw Error(ErrorKind::Extern, "no answer for '" + fn + "'");
  const auto &entry = table.at(fn);
  // {"by_args": {"<args json>": value}, "default": value} or a plain value.
  if (entry.is_object() && (entry.contains("by_args") || entry.contains("default"))) {
    if (entry.contains("by_args") && entry["by_args"].contains(args.dump())) return entry["by_args"][args.dump()];
    if (entry.contains("default")) return entry["default"];
    throw Error(ErrorKind::Extern, "no answer for '" + fn + "' with args " + args.dump());
  }
  return entry;
}

} // namespace

std::unique_ptr<TableExternHost> TableExternHost::from_file(const std::string &path) {
  try {
    return std::make_unique<TableExternHost>(json::parse(read_text_file(path)));
  } catch (const json::exception &e) {
    throw Error(ErrorKind::Extern, "malformed host table '" + path + "': " + e.what());
  }
}

json TableExternHost::call(const std::string &fn, const json &args) { return lookup(table_, fn, args); }

void serve_extern_requests(const json &table, std::istream &in, std::ostream &out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json reply;
    try {
      auto req = json::parse(line);
      reply["id"] = req.at("id");
      try {
        reply["ret"] = lookup(table, req.at("fn").get<std::string>(), req.value("args", json::array()));
      } catch (const Error &e) {
        reply["error"] = e.what();
      }
    } catch (const json::exception &e) {
      reply = {{"id", nullptr}, {"error", std::string("malformed request: ") + e.what()}};
    }
    out << reply.dump() << "\n" << std::flush;
  }
}

ProcessExternHost::ProcessExternHost(const std::string &command) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw Error(ErrorKind::Extern, "pipe failed");
  pid_ = fork();
  if (pid_ < 0) throw Error(ErrorKind::Extern, "fork failed");
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char *>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  // A dead host must surface as an error, not kill us.
  std::signal(SIGPIPE, SIG_IGN);
}

ProcessExternHost::~ProcessExternHost() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

json ProcessExternHost::call(const std::string &fn, const json &args) {
  std::lock_guard<std::mutex> lock(mu_);
  auto id = next_id_++;
  std::string line = json{{"id", id}, {"fn", fn}, {"args", args}}.dump() + "\n";
  const char *p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    auto n = write(to_child_, p, left);
    if (n <= 0) throw Error(ErrorKind::Extern, "extern host transport failure (write)");
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  std::string reply;
  while (true) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      break;
    }
    char buf[4096];
    auto n = read(from_child_, buf, sizeof buf);
    if (n <= 0) throw Error(ErrorKind::Extern, "extern host transport failure (closed)");
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
  json r;
  try {
    r = json::parse(reply);
  } catch (const json::exception &) {
    throw Error(ErrorKind::Extern, "extern host sent malformed reply: " + reply);
  }
  if (!r.contains("id") || r["id"] != id) throw Error(ErrorKind::Extern, "extern host reply id mismatch");
  if (r.contains("error")) throw Error(ErrorKind::Extern, "extern host: " + r["error"].dump());
  if (!r.contains("ret")) throw Error(ErrorKind::Extern, "extern host reply lacks 'ret'");
  return r["ret"];
}

} // namespace snapseed
