//===-- assembler.cpp - Guest assembly parser, resolver, verifier ---------===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//

#include "snapseed/isa.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

namespace snapseed {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '$' || s[0] == '<'))
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '<' || c == '>'))
      return false;
  return true;
}

// Removes a trailing comment that is not inside a string literal.
std::string_view strip_comment(std::string_view line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
    } else if (c == '"') {
      in_str = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '<') ++depth;
    else if (s[i] == '>') --depth;
    else if (s[i] == sep && depth == 0) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  parts.push_back(trim(s.substr(start)));
  return parts;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Program run() {
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text_.size()) {
      auto nl = text_.find('\n', pos);
      std::string_view raw = text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no;
      line_ = line_no;
      raw_ = raw;
      parse_line(strip_comment(raw));
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    flush_labels();
    program_.index();
    return std::move(program_);
  }

private:
  [[noreturn]] void fail(std::string_view at, const std::string &msg) const {
    int col = 1;
    if (!at.empty() && at.data() >= raw_.data() && at.data() <= raw_.data() + raw_.size())
      col = static_cast<int>(at.data() - raw_.data()) + 1;
    throw SyntaxError(line_, col, msg);
  }

  Type parse_type(std::string_view t) {
    try {
      return Type::parse(t);
    } catch (const Error &e) {
      fail(t, e.what());
    }
  }

  ConstValue parse_literal(std::string_view t) {
    ConstValue v;
    if (t == "true" || t == "false") {
      v.kind = ConstValue::Kind::Bool;
      v.num = t == "true";
      return v;
    }
    if (t == "null") {
      v.kind = ConstValue::Kind::Null;
      return v;
    }
    if (!t.empty() && t.front() == '"') {
      if (t.size() < 2 || t.back() != '"') fail(t, "unterminated string literal");
      v.kind = ConstValue::Kind::Str;
      for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        char c = t[i];
        if (c == '\\' && i + 2 < t.size()) {
          char n = t[++i];
          v.text += n == 'n' ? '\n' : n;
        } else {
          v.text += c;
        }
      }
      return v;
    }
    v.kind = ConstValue::Kind::Int;
    std::string s(t);
    bool neg = !s.empty() && s[0] == '-';
    std::string digits = neg ? s.substr(1) : s;
    int base = 10;
    if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
      base = 16;
      digits = digits.substr(2);
    }
    if (digits.empty()) fail(t, "expected literal");
    for (char c : digits)
      if (!(base == 16 ? std::isxdigit(static_cast<unsigned char>(c)) : std::isdigit(static_cast<unsigned char>(c))))
        fail(t, "malformed literal '" + s + "'");
    unsigned long long mag = 0;
    try {
      mag = std::stoull(digits, nullptr, base);
    } catch (const std::exception &) {
      fail(t, "literal out of range");
    }
    if (mag > 0xFFFFFFFFull) fail(t, "literal out of 32-bit range");
    auto bits = static_cast<std::uint32_t>(mag);
    if (neg) bits = ~bits + 1u;
    v.num = static_cast<std::int32_t>(bits);
    return v;
  }

  std::vector<Param> parse_params(std::string_view inside) {
    std::vector<Param> params;
    if (trim(inside).empty()) return params;
    for (auto p : split_top(inside, ',')) {
      auto colon = p.find(':');
      if (colon == std::string_view::npos) fail(p, "parameter needs 'name:type'");
      auto name = trim(p.substr(0, colon));
      if (!is_ident(name)) fail(p, "bad parameter name");
      params.push_back({std::string(name), parse_type(p.substr(colon + 1))});
    }
    return params;
  }

  // "name(params) [: ret] rest..." -> name, params, ret, rest words
  struct Signature {
    std::string name;
    std::vector<Param> params;
    Type ret;
    std::vector<std::string_view> rest;
  };

  Signature parse_signature(std::string_view s) {
    Signature sig;
    auto open = s.find('(');
    auto close = s.find(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
      fail(s, "expected 'name(params)'");
    auto name = trim(s.substr(0, open));
    if (name.empty()) fail(s, "missing name");
    sig.name = std::string(name);
    sig.params = parse_params(s.substr(open + 1, close - open - 1));
    auto rest = trim(s.substr(close + 1));
    sig.ret = Type::make(Type::Kind::Void);
    if (!rest.empty() && rest.front() == ':') {
      rest = trim(rest.substr(1));
      auto end = rest.find_first_of(" \t");
      auto ty = rest.substr(0, end);
      sig.ret = parse_type(ty);
      rest = end == std::string_view::npos ? std::string_view{} : trim(rest.substr(end));
    }
    sig.rest = words(rest);
    return sig;
  }

  void parse_line(std::string_view line) {
    line = trim(line);
    if (line.empty()) return;
    auto ws = words(line);
    auto head = ws[0];
    if (head == "entry") {
      if (ws.size() != 2) fail(line, "expected 'entry Class.method'");
      program_.entry_method = std::string(ws[1]);
      return;
    }
    if (head == "class") return parse_class(ws);
    if (head == "extern") return parse_extern(trim(line.substr(6)));
    if (head == "static" || head == "field") return parse_field(head == "static", trim(line.substr(head.size())));
    if (head == "method") return parse_method(trim(line.substr(6)));
    if (ws.size() == 1 && head.back() == ':' && is_ident(head.substr(0, head.size() - 1))) {
      if (!method_) fail(head, "label outside a method");
      pending_labels_.push_back(std::string(head.substr(0, head.size() - 1)));
      return;
    }
    parse_instruction(line, ws);
  }

  void parse_class(const std::vector<std::string_view> &ws) {
    flush_labels();
    if (ws.size() < 2 || !is_ident(ws[1])) fail(ws[0], "expected class name");
    ClassDef c;
    c.name = std::string(ws[1]);
    for (std::size_t i = 2; i < ws.size(); ++i) {
      if (ws[i] == "extends" && i + 1 < ws.size()) c.super = std::string(ws[++i]);
      else if (ws[i] == "singleton") c.singleton = true;
      else if (ws[i] == "handler") c.handler = true;
      else if (ws[i] == "statemachine") c.statemachine = true;
      else fail(ws[i], "unknown class attribute '" + std::string(ws[i]) + "'");
    }
    for (const auto &existing : program_.classes)
      if (existing.name == c.name) fail(ws[1], "duplicate class '" + c.name + "'");
    program_.classes.push_back(std::move(c));
    method_ = nullptr;
  }

  void parse_field(bool is_static, std::string_view rest) {
    flush_labels();
    if (program_.classes.empty()) fail(rest, "field outside a class");
    method_ = nullptr;
    FieldDef f;
    std::string_view decl = rest;
    std::string_view init;
    if (auto eq = rest.find('='); eq != std::string_view::npos) {
      decl = trim(rest.substr(0, eq));
      init = trim(rest.substr(eq + 1));
    }
    auto colon = decl.find(':');
    if (colon == std::string_view::npos) fail(decl, "field needs 'name:type'");
    f.name = std::string(trim(decl.substr(0, colon)));
    if (!is_ident(f.name)) fail(decl, "bad field name");
    f.type = parse_type(decl.substr(colon + 1));
    if (!init.empty()) {
      if (!is_static) fail(init, "instance fields take no initializer");
      f.init = parse_literal(init);
    }
    auto &c = program_.classes.back();
    (is_static ? c.static_fields : c.instance_fields).push_back(std::move(f));
  }

  void parse_method(std::string_view rest) {
    flush_labels();
    if (program_.classes.empty()) fail(rest, "method outside a class");
    auto &c = program_.classes.back();
    auto sig = parse_signature(rest);
    MethodDef m;
    m.name = sig.name;
    m.owner = c.name;
    m.params = std::move(sig.params);
    m.ret = sig.ret;
    bool explicit_locals = false;
    bool saw_virtual = false;
    for (auto w : sig.rest) {
      if (w.substr(0, 7) == "locals=") {
        try {
          m.locals = static_cast<std::uint32_t>(std::stoul(std::string(w.substr(7))));
        } catch (const std::exception &) {
          fail(w, "bad locals count");
        }
        explicit_locals = true;
      } else if (w == "interface") {
        m.is_interface = true;
      } else if (w == "virtual") {
        saw_virtual = true;
      } else if (w == "static") {
        m.is_static = true;
      } else {
        fail(w, "unknown method attribute '" + std::string(w) + "'");
      }
    }
    if (m.is_static && saw_virtual) fail(rest, "static method cannot be virtual");
    m.is_virtual = !m.is_static;
    if (!explicit_locals) m.locals = m.arg_slots();
    if (m.locals < m.arg_slots()) fail(rest, "locals smaller than parameter slots");
    if (c.find_method(m.name)) fail(rest, "duplicate method '" + m.name + "'");
    c.methods.push_back(std::move(m));
    method_ = &c.methods.back();
  }

  void parse_extern(std::string_view rest) {
    flush_labels();
    method_ = nullptr;
    auto sig = parse_signature(rest);
    ExternDecl d;
    d.name = sig.name;
    d.params = std::move(sig.params);
    d.ret = sig.ret;
    bool have_policy = false;
    for (auto w : sig.rest) {
      if (w.substr(0, 7) == "policy=") {
        auto p = policy_from_name(w.substr(7));
        if (!p) fail(w, "unknown extern policy '" + std::string(w.substr(7)) + "'");
        d.policy = *p;
        have_policy = true;
      } else {
        fail(w, "unknown extern attribute");
      }
    }
    if (!have_policy) fail(rest, "extern needs policy=...");
    if (d.name.find('.') == std::string::npos) fail(rest, "extern name must be qualified");
    program_.externs.push_back(std::move(d));
  }

  void flush_labels() {
    if (!pending_labels_.empty())
      throw SyntaxError(line_, 1, "label '" + pending_labels_.front() + "' not followed by an instruction");
  }

  void parse_instruction(std::string_view line, const std::vector<std::string_view> &ws) {
    if (!method_) fail(line, "instruction outside a method");
    auto op = opcode_from_name(ws[0]);
    if (!op) fail(ws[0], "unknown opcode '" + std::string(ws[0]) + "'");
    Instruction ins;
    ins.op = *op;
    ins.line = line_;
    ins.labels = std::move(pending_labels_);
    pending_labels_.clear();
    std::string_view operand = trim(line.substr(ws[0].size()));
    auto need = [&](bool want) {
      if (want && operand.empty()) fail(ws[0], std::string("'") + opcode_name(ins.op) + "' needs an operand");
      if (!want && !operand.empty()) fail(operand, std::string("'") + opcode_name(ins.op) + "' takes no operand");
    };
    auto member_ref = [&]() {
      auto dot = operand.rfind('.');
      if (dot == std::string_view::npos || dot == 0 || dot + 1 == operand.size())
        fail(operand, "expected 'Class.member'");
      ins.owner = std::string(operand.substr(0, dot));
      ins.member = std::string(operand.substr(dot + 1));
    };
    using O = Opcode;
    switch (ins.op) {
    case O::Const:
      need(true);
      ins.constant = parse_literal(operand);
      break;
    case O::Load:
    case O::Store: {
      need(true);
      auto v = parse_literal(operand);
      if (v.kind != ConstValue::Kind::Int || v.num < 0) fail(operand, "expected local index");
      ins.local = v.num;
      break;
    }
    case O::New:
      need(true);
      if (!is_ident(operand)) fail(operand, "expected class name");
      ins.owner = std::string(operand);
      break;
    case O::GetField: case O::PutField: case O::GetStatic: case O::PutStatic:
    case O::InvokeVirtual: case O::InvokeStatic: case O::InvokeSpecial:
      need(true);
      member_ref();
      break;
    case O::InvokeIntrinsic: {
      need(true);
      auto id = intrinsic_from_name(operand);
      if (!id) fail(operand, "unknown intrinsic '" + std::string(operand) + "'");
      ins.intrinsic = *id;
      break;
    }
    case O::NewArray:
      need(true);
      ins.type = parse_type(operand);
      break;
    default:
      if (is_branch(ins.op) || ins.op == O::Goto) {
        need(true);
        if (!is_ident(operand)) fail(operand, "expected label");
        ins.label_ref = std::string(operand);
      } else {
        need(false);
      }
    }
    method_->body.push_back(std::move(ins));
  }

  std::string_view text_;
  std::string_view raw_;
  int line_ = 0;
  Program program_;
  MethodDef *method_ = nullptr;
  std::vector<std::string> pending_labels_;
};

[[noreturn]] void resolution_error(const Instruction &ins, const std::string &msg) {
  throw Error(ErrorKind::Resolution, "line " + std::to_string(ins.line) + ": " + msg);
}

void check_type(const Program &p, const Type &t, const std::string &where) {
  if (t.kind == Type::Kind::Ref && !p.find_class(t.cls))
    throw Error(ErrorKind::Resolution, where + ": unknown class '" + t.cls + "'");
  if (t.elem) check_type(p, *t.elem, where);
  if (t.key) check_type(p, *t.key, where);
}

void resolve(Program &p) {
  for (const auto &c : p.classes) {
    if (!c.super.empty() && !p.find_class(c.super))
      throw Error(ErrorKind::Resolution, "class '" + c.name + "' extends unknown '" + c.super + "'");
    // Cycles: ancestry stops after |classes| steps; a cycle revisits c.
    std::set<std::string> seen;
    const ClassDef *cur = &c;
    while (cur && !cur->super.empty()) {
      if (!seen.insert(cur->name).second)
        throw Error(ErrorKind::Resolution, "inheritance cycle through '" + c.name + "'");
      cur = p.find_class(cur->super);
    }
  }
  for (const auto &c : p.classes) {
    std::set<std::string> names;
    for (const auto &f : p.instance_layout(c.name)) {
      if (!names.insert(f.name).second)
        throw Error(ErrorKind::Resolution, "duplicate field '" + f.name + "' in layout of '" + c.name + "'");
      check_type(p, f.type, c.name + "." + f.name);
    }
    std::set<std::string> statics;
    for (const auto &f : c.static_fields) {
      if (!statics.insert(f.name).second)
        throw Error(ErrorKind::Resolution, "duplicate static '" + f.name + "' in '" + c.name + "'");
      check_type(p, f.type, c.name + "." + f.name);
    }
  }
  for (const auto &e : p.externs) {
    if (e.policy == ExternPolicy::Ignore && e.ret.kind != Type::Kind::Void)
      throw Error(ErrorKind::Resolution, "extern '" + e.name + "': policy=ignore requires a void return");
    if ((e.policy == ExternPolicy::ModelUid && e.ret.kind != Type::Kind::Int) ||
        (e.policy == ExternPolicy::ModelPackage && e.ret.kind != Type::Kind::Str))
      throw Error(ErrorKind::Resolution, "extern '" + e.name + "': return type does not fit its policy");
  }
  for (auto &c : p.classes) {
    for (auto &m : c.methods) {
      for (const auto &prm : m.params) check_type(p, prm.type, m.qualified());
      check_type(p, m.ret, m.qualified());
      for (auto &ins : m.body) {
        using O = Opcode;
        switch (ins.op) {
        case O::Load: case O::Store:
          if (static_cast<std::uint32_t>(ins.local) >= m.locals)
            resolution_error(ins, "local " + std::to_string(ins.local) + " out of range");
          break;
        case O::New:
          if (!p.find_class(ins.owner)) resolution_error(ins, "unknown class '" + ins.owner + "'");
          break;
        case O::GetField: case O::PutField: {
          if (!p.find_class(ins.owner)) resolution_error(ins, "unknown class '" + ins.owner + "'");
          auto slot = p.field_slot(ins.owner, ins.member);
          if (!slot) resolution_error(ins, "unknown field '" + ins.owner + "." + ins.member + "'");
          ins.decl_class = ins.owner;
          ins.slot = static_cast<std::int32_t>(*slot);
          break;
        }
        case O::GetStatic: case O::PutStatic: {
          if (!p.find_class(ins.owner)) resolution_error(ins, "unknown class '" + ins.owner + "'");
          auto s = p.static_slot(ins.owner, ins.member);
          if (!s) resolution_error(ins, "unknown static '" + ins.owner + "." + ins.member + "'");
          ins.decl_class = s->first;
          ins.slot = static_cast<std::int32_t>(s->second);
          break;
        }
        case O::InvokeStatic: {
          auto q = ins.owner + "." + ins.member;
          if (p.find_extern(q)) {
            ins.is_extern = true;
            break;
          }
          const auto *target = p.find_method(q);
          if (!target) resolution_error(ins, "unknown method '" + q + "'");
          if (!target->is_static) resolution_error(ins, "invokestatic of instance method '" + q + "'");
          break;
        }
        case O::InvokeVirtual: case O::InvokeSpecial: {
          if (!p.find_class(ins.owner)) resolution_error(ins, "unknown class '" + ins.owner + "'");
          try {
            const auto &target = resolve_dispatch(p, ins.owner, ins.member);
            if (target.is_static) resolution_error(ins, "instance call of static method '" + target.qualified() + "'");
          } catch (const Error &) {
            resolution_error(ins, "unknown method '" + ins.owner + "." + ins.member + "'");
          }
          break;
        }
        case O::NewArray:
          check_type(p, ins.type, m.qualified());
          break;
        default:
          if (is_branch(ins.op) || ins.op == O::Goto) {
            auto t = m.find_label(ins.label_ref);
            if (!t) resolution_error(ins, "unknown label '" + ins.label_ref + "'");
            ins.target = *t;
          }
        }
      }
    }
  }
  if (!p.entry_method.empty()) {
    const auto *entry = p.find_method(p.entry_method);
    if (!entry) throw Error(ErrorKind::Resolution, "entry method '" + p.entry_method + "' not found");
    if (!entry->is_static || !entry->params.empty())
      throw Error(ErrorKind::Resolution, "entry method must be static and parameterless");
  }
}

void verify_method(const Program &p, const MethodDef &m) {
  auto where = [&](std::uint32_t pc) {
    return m.qualified() + "@" + std::to_string(pc) + " (line " + std::to_string(m.body[pc].line) + ")";
  };
  if (m.body.empty()) throw Error(ErrorKind::Verification, m.qualified() + ": empty body");
  std::vector<int> depth(m.body.size(), -1);
  std::vector<std::uint32_t> work{0};
  depth[0] = 0;
  auto flow = [&](std::uint32_t from, std::uint32_t to, int d) {
    if (to >= m.body.size())
      throw Error(ErrorKind::Verification, where(from) + ": control falls off the end");
    if (depth[to] == -1) {
      depth[to] = d;
      work.push_back(to);
    } else if (depth[to] != d) {
      throw Error(ErrorKind::Verification, where(to) + ": stack imbalance (" + std::to_string(depth[to]) +
                                               " vs " + std::to_string(d) + ")");
    }
  };
  while (!work.empty()) {
    auto pc = work.back();
    work.pop_back();
    const auto &ins = m.body[pc];
    int d = depth[pc];
    if (ins.op == Opcode::Return) {
      int want = m.ret.kind == Type::Kind::Void ? 0 : 1;
      if (d != want)
        throw Error(ErrorKind::Verification, where(pc) + ": return with stack depth " + std::to_string(d) +
                                                 ", expected " + std::to_string(want));
      continue;
    }
    auto [pops, pushes] = stack_effect(p, ins);
    if (d < pops) throw Error(ErrorKind::Verification, where(pc) + ": stack underflow");
    int nd = d - pops + pushes;
    if (ins.op == Opcode::Throw) continue;
    if (ins.op == Opcode::Goto) {
      flow(pc, ins.target, nd);
      continue;
    }
    if (is_branch(ins.op)) flow(pc, ins.target, nd);
    flow(pc, pc + 1, nd);
  }
}

} // namespace

Program assemble(std::string_view text) {
  Program p = Parser(text).run();
  resolve(p);
  for (const auto &c : p.classes)
    for (const auto &m : c.methods) verify_method(p, m);
  return p;
}

Program assemble_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return assemble(ss.str());
}

std::string render(const Program &program) {
  std::ostringstream out;
  if (!program.entry_method.empty()) out << "entry " << program.entry_method << "\n";
  auto params = [](const std::vector<Param> &ps) {
    std::string s;
    for (std::size_t i = 0; i < ps.size(); ++i)
      s += (i ? ", " : "") + ps[i].name + ":" + ps[i].type.str();
    return s;
  };
  for (const auto &e : program.externs)
    out << "extern " << e.name << "(" << params(e.params) << ") : " << e.ret.str()
        << " policy=" << policy_name(e.policy) << "\n";
  for (const auto &c : program.classes) {
    out << "\nclass " << c.name;
    if (!c.super.empty()) out << " extends " << c.super;
    if (c.singleton) out << " singleton";
    if (c.handler) out << " handler";
    if (c.statemachine) out << " statemachine";
    out << "\n";
    for (const auto &f : c.static_fields) {
      out << "  static " << f.name << ":" << f.type.str();
      if (f.init) out << " = " << f.init->str();
      out << "\n";
    }
    for (const auto &f : c.instance_fields) out << "  field " << f.name << ":" << f.type.str() << "\n";
    for (const auto &m : c.methods) {
      out << "  method " << m.name << "(" << params(m.params) << ") : " << m.ret.str()
          << " locals=" << m.locals;
      if (m.is_interface) out << " interface";
      if (m.is_static) out << " static";
      else out << " virtual";
      out << "\n";
      for (const auto &ins : m.body) {
        for (const auto &l : ins.labels) out << "  " << l << ":\n";
        out << "    " << opcode_name(ins.op);
        using O = Opcode;
        switch (ins.op) {
        case O::Const: out << " " << ins.constant.str(); break;
        case O::Load: case O::Store: out << " " << ins.local; break;
        case O::New: out << " " << ins.owner; break;
        case O::GetField: case O::PutField: case O::GetStatic: case O::PutStatic:
        case O::InvokeVirtual: case O::InvokeStatic: case O::InvokeSpecial:
          out << " " << ins.owner << "." << ins.member;
          break;
        case O::InvokeIntrinsic: out << " " << intrinsic_info(ins.intrinsic).name; break;
        case O::NewArray: out << " " << ins.type.str(); break;
        default:
          if (is_branch(ins.op) || ins.op == O::Goto) out << " " << ins.label_ref;
        }
        out << "\n";
      }
    }
  }
  return out.str();
}

} // namespace snapseed
