#include "tinysol/ast.hpp"

#include <algorithm>
#include <type_traits>
#include <set>

namespace tinysol {

const char* kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Nat: return "nat";
    case ValueKind::Bool: return "bool";
    case ValueKind::Addr: return "addr";
  }
  return "?";
}

std::string to_string(const Value& v) {
  if (is_nat(v)) return std::to_string(as_nat(v));
  if (is_bool(v)) return as_bool(v) ? "true" : "false";
  return as_addr(v);
}

int arity(OpCode op) { return op == OpCode::Not ? 1 : 2; }

std::string_view symbol(OpCode op) {
  switch (op) {
    case OpCode::Add: return "+";
    case OpCode::Sub: return "-";
    case OpCode::Mul: return "*";
    case OpCode::Eq: return "=";
    case OpCode::Ne: return "!=";
    case OpCode::Lt: return "<";
    case OpCode::Le: return "<=";
    case OpCode::Gt: return ">";
    case OpCode::Ge: return ">=";
    case OpCode::And: return "&&";
    case OpCode::Or: return "||";
    case OpCode::Not: return "!";
  }
  return "?";
}

const char* magic_name(Magic m) {
  switch (m) {
    case Magic::This: return "this";
    case Magic::Sender: return "sender";
    case Magic::Value: return "value";
  }
  return "?";
}

ExprPtr make_lit(Value v, SourceSpan span) {
  return std::make_shared<const Expr>(Expr{Lit{std::move(v)}, std::move(span)});
}
ExprPtr make_var(std::string name, SourceSpan span) {
  return std::make_shared<const Expr>(Expr{VarRef{std::move(name)}, std::move(span)});
}
ExprPtr make_magic(Magic m, SourceSpan span) {
  return std::make_shared<const Expr>(Expr{MagicRef{m}, std::move(span)});
}
ExprPtr make_field(ExprPtr target, std::string field, SourceSpan span) {
  return std::make_shared<const Expr>(
      Expr{FieldRead{std::move(target), std::move(field)}, std::move(span)});
}
ExprPtr make_op(OpCode op, std::vector<ExprPtr> args, SourceSpan span) {
  return std::make_shared<const Expr>(Expr{OpApp{op, std::move(args)}, std::move(span)});
}
StmtPtr make_stmt(decltype(Stmt::node) node, SourceSpan span) {
  return std::make_shared<const Stmt>(Stmt{std::move(node), std::move(span)});
}

std::string to_string(const BaseTypeExpr& t) {
  if (t.iface.empty()) return t.level;
  return t.iface + "<" + t.level + ">";
}

const FieldDecl* ContractDecl::field(std::string_view name) const {
  for (const auto& f : fields)
    if (f.name == name) return &f;
  return nullptr;
}

const MethodDecl* ContractDecl::method(std::string_view name) const {
  for (const auto& m : methods)
    if (m.name == name) return &m;
  return nullptr;
}

const ContractDecl* Blockchain::contract(std::string_view address) const {
  for (const auto& c : contracts)
    if (c.address == address) return &c;
  return nullptr;
}

const InterfaceDecl* Blockchain::interface(std::string_view name) const {
  for (const auto& i : interfaces)
    if (i.name == name) return &i;
  return nullptr;
}

bool is_account(const ContractDecl& c) {
  return c.fields.size() == 1 && c.fields[0].name == "balance" && c.methods.size() == 1 &&
         c.methods[0].name == "send";
}

// ---- equality -------------------------------------------------------------

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Lit>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, MagicRef>) {
          return x.which == y.which;
        } else if constexpr (std::is_same_v<T, FieldRead>) {
          return x.field == y.field && equal(x.target, y.target);
        } else {
          if (x.op != y.op || x.args.size() != y.args.size()) return false;
          for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!equal(x.args[i], y.args[i])) return false;
          return true;
        }
      },
      a.node);
}

bool equal(const StmtPtr& a, const StmtPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool equal(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Skip> || std::is_same_v<T, Throw>) {
          return true;
        } else if constexpr (std::is_same_v<T, DeclVar>) {
          return x.annotation == y.annotation && x.name == y.name && equal(x.init, y.init) &&
                 equal(x.body, y.body);
        } else if constexpr (std::is_same_v<T, Assign>) {
          return x.target.this_field == y.target.this_field && x.target.name == y.target.name &&
                 equal(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, Seq>) {
          return equal(x.first, y.first) && equal(x.second, y.second);
        } else if constexpr (std::is_same_v<T, If>) {
          return equal(x.cond, y.cond) && equal(x.then_branch, y.then_branch) &&
                 equal(x.else_branch, y.else_branch);
        } else if constexpr (std::is_same_v<T, While>) {
          return equal(x.cond, y.cond) && equal(x.body, y.body);
        } else {
          if (x.method != y.method || x.args.size() != y.args.size()) return false;
          for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!equal(x.args[i], y.args[i])) return false;
          return equal(x.target, y.target) && equal(x.amount, y.amount);
        }
      },
      a.node);
}

bool equal(const ContractDecl& a, const ContractDecl& b) {
  if (a.address != b.address || a.type != b.type || a.fields.size() != b.fields.size() ||
      a.methods.size() != b.methods.size())
    return false;
  for (std::size_t i = 0; i < a.fields.size(); ++i)
    if (a.fields[i].name != b.fields[i].name || a.fields[i].init != b.fields[i].init) return false;
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    const auto& m = a.methods[i];
    const auto& n = b.methods[i];
    if (m.name != n.name || m.params != n.params || !equal(m.body, n.body)) return false;
  }
  return true;
}

bool equal(const InterfaceDecl& a, const InterfaceDecl& b) {
  if (a.name != b.name || a.param != b.param || a.fields.size() != b.fields.size() ||
      a.methods.size() != b.methods.size())
    return false;
  for (std::size_t i = 0; i < a.fields.size(); ++i)
    if (a.fields[i].name != b.fields[i].name || a.fields[i].type != b.fields[i].type) return false;
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    const auto& m = a.methods[i];
    const auto& n = b.methods[i];
    if (m.name != n.name || m.params != n.params || m.level != n.level) return false;
  }
  return true;
}

bool equal(const Transaction& a, const Transaction& b) {
  return a.caller == b.caller && a.callee == b.callee && a.method == b.method &&
         a.args == b.args && a.amount == b.amount;
}

bool equal(const Blockchain& a, const Blockchain& b) {
  if (a.contracts.size() != b.contracts.size() || a.interfaces.size() != b.interfaces.size() ||
      a.transactions.size() != b.transactions.size() || a.lattice_explicit != b.lattice_explicit ||
      !(a.lattice == b.lattice))
    return false;
  for (std::size_t i = 0; i < a.contracts.size(); ++i)
    if (!equal(a.contracts[i], b.contracts[i])) return false;
  for (std::size_t i = 0; i < a.interfaces.size(); ++i)
    if (!equal(a.interfaces[i], b.interfaces[i])) return false;
  for (std::size_t i = 0; i < a.transactions.size(); ++i)
    if (!equal(a.transactions[i], b.transactions[i])) return false;
  return true;
}

// ---- validation -----------------------------------------------------------

namespace {

struct Validator {
  const Blockchain& b;
  std::vector<Diagnostic> out;

  void add(std::string code, std::string msg, const SourceSpan& span) {
    out.push_back({std::move(code), std::move(msg), span, false});
  }

  bool known_iface(const std::string& name) const {
    return name == kTopInterface || b.interface(name) != nullptr;
  }

  // A level position inside an interface: the parameter or a lattice element.
  void check_level(const std::string& level, const std::optional<std::string>& param,
                   const SourceSpan& span) {
    if (param && level == *param) return;
    if (!b.lattice.find(level)) add("UnknownLevel", "unknown security level '" + level + "'", span);
  }

  void check_type(const BaseTypeExpr& t, const std::optional<std::string>& param,
                  const SourceSpan& span) {
    check_level(t.level, param, span);
    if (!t.iface.empty() && !known_iface(t.iface))
      add("UndeclaredInterface", "interface '" + t.iface + "' is not declared", span);
  }

  void interfaces() {
    std::set<std::string> names;
    for (const auto& i : b.interfaces) {
      if (i.name == kTopInterface)
        add("ReservedInterfaceName", "'" + i.name + "' is built in and cannot be redeclared",
            i.span);
      if (!names.insert(i.name).second)
        add("DuplicateInterface", "interface '" + i.name + "' declared twice", i.span);
      std::set<std::string> members;
      for (const auto& f : i.fields) {
        if (!members.insert(f.name).second)
          add("DuplicateMember", "interface '" + i.name + "' declares '" + f.name + "' twice",
              f.span);
        check_type(f.type, i.param, f.span);
      }
      for (const auto& m : i.methods) {
        if (!members.insert(m.name).second)
          add("DuplicateMember", "interface '" + i.name + "' declares '" + m.name + "' twice",
              m.span);
        for (const auto& p : m.params) check_type(p, i.param, m.span);
        check_level(m.level, i.param, m.span);
      }
      auto bal = std::find_if(i.fields.begin(), i.fields.end(),
                              [](const IfaceField& f) { return f.name == "balance"; });
      auto send = std::find_if(i.methods.begin(), i.methods.end(),
                               [](const IfaceMethod& m) { return m.name == "send"; });
      if (bal == i.fields.end())
        add("MissingMandatoryMember", "interface '" + i.name + "' lacks field balance", i.span);
      else if (!bal->type.iface.empty())
        add("BalanceNotLevel", "interface '" + i.name + "' gives balance an address type",
            bal->span);
      if (send == i.methods.end())
        add("MissingMandatoryMember", "interface '" + i.name + "' lacks method send", i.span);
      else if (!send->params.empty())
        add("SendArity", "interface '" + i.name + "' gives send parameters", send->span);
    }
  }

  void contracts() {
    std::set<std::string> addresses;
    for (const auto& c : b.contracts) {
      if (!addresses.insert(c.address).second)
        add("DuplicateContract", "address '" + c.address + "' declared twice", c.span);
      if (c.type) {
        if (!known_iface(c.type->iface))
          add("UndeclaredInterface", "interface '" + c.type->iface + "' is not declared", c.span);
        if (!b.lattice.find(c.type->level))
          add("UnknownLevel", "unknown security level '" + c.type->level + "'", c.span);
      }
      std::set<std::string> fields, methods;
      for (const auto& f : c.fields) {
        if (!fields.insert(f.name).second)
          add("DuplicateField", "contract '" + c.address + "' declares field '" + f.name +
                                    "' twice",
              f.span);
        if (is_addr(f.init) && !b.contract(as_addr(f.init)))
          add("UndeclaredAddress", "field '" + f.name + "' holds undeclared address '" +
                                       as_addr(f.init) + "'",
              f.span);
      }
      for (const auto& m : c.methods) {
        if (!methods.insert(m.name).second)
          add("DuplicateMethod", "contract '" + c.address + "' declares method '" + m.name +
                                     "' twice",
              m.span);
        if (fields.count(m.name))
          add("DuplicateMember", "'" + m.name + "' is both a field and a method of '" +
                                     c.address + "'",
              m.span);
        std::set<std::string> ps;
        for (const auto& p : m.params)
          if (!ps.insert(p).second)
            add("DuplicateParam", "method '" + m.name + "' repeats parameter '" + p + "'", m.span);
      }
      const FieldDecl* bal = c.field("balance");
      if (!bal)
        add("MissingMandatoryMember", "contract '" + c.address + "' lacks field balance", c.span);
      else if (!is_nat(bal->init))
        add("BalanceNotNat", "balance of '" + c.address + "' is not a natural", bal->span);
      const MethodDecl* send = c.method("send");
      if (!send)
        add("MissingMandatoryMember", "contract '" + c.address + "' lacks method send", c.span);
      else if (!send->params.empty())
        add("SendArity", "send of '" + c.address + "' takes parameters", send->span);
    }
  }

  void transactions() {
    for (const auto& t : b.transactions) {
      for (const auto* a : {&t.caller, &t.callee})
        if (!b.contract(*a))
          add("UndeclaredAddress", "transaction names undeclared address '" + *a + "'", t.span);
      for (const auto& v : t.args)
        if (is_addr(v) && !b.contract(as_addr(v)))
          add("UndeclaredAddress", "transaction passes undeclared address '" + as_addr(v) + "'",
              t.span);
    }
  }
};

}  // namespace

std::vector<Diagnostic> validate_program(const Blockchain& b) {
  Validator v{b, {}};
  v.interfaces();
  v.contracts();
  v.transactions();
  return std::move(v.out);
}

}  // namespace tinysol
