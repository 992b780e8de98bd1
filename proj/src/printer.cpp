#include "tinysol/printer.hpp"

#include <sstream>

namespace tinysol {

namespace {

int precedence(const Expr& e) {
  if (const auto* op = std::get_if<OpApp>(&e.node)) {
    switch (op->op) {
      case OpCode::Or: return 1;
      case OpCode::And: return 2;
      case OpCode::Eq: case OpCode::Ne: case OpCode::Lt:
      case OpCode::Le: case OpCode::Gt: case OpCode::Ge: return 3;
      case OpCode::Add: case OpCode::Sub: return 4;
      case OpCode::Mul: return 5;
      case OpCode::Not: return 6;
    }
  }
  return 7;
}

std::string wrap(const Expr& e, int min_prec) {
  std::string s = print_expr(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

std::string pad(int n) { return std::string(static_cast<std::size_t>(n) * 2, ' '); }

std::string args_list(const std::vector<ExprPtr>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += print_expr(*args[i]);
  }
  return out;
}

void stmt_to(std::ostringstream& os, const Stmt& s, int ind);

void block_to(std::ostringstream& os, const Stmt& s, int ind) {
  os << "{\n";
  stmt_to(os, s, ind + 1);
  os << "\n" << pad(ind) << "}";
}

void stmt_to(std::ostringstream& os, const Stmt& s, int ind) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Skip>) {
          os << pad(ind) << "skip";
        } else if constexpr (std::is_same_v<T, Throw>) {
          os << pad(ind) << "throw";
        } else if constexpr (std::is_same_v<T, DeclVar>) {
          os << pad(ind);
          if (n.annotation) os << "<" << to_string(*n.annotation) << "> ";
          os << "var " << n.name << " := " << print_expr(*n.init) << " in ";
          block_to(os, *n.body, ind);
        } else if constexpr (std::is_same_v<T, Assign>) {
          os << pad(ind) << (n.target.this_field ? "this." : "") << n.target.name
             << " := " << print_expr(*n.rhs);
        } else if constexpr (std::is_same_v<T, Seq>) {
          // A left-nested sequence or a var body would swallow what follows.
          const Stmt& a = *n.first;
          if (std::holds_alternative<Seq>(a.node) || std::holds_alternative<DeclVar>(a.node)) {
            os << pad(ind);
            block_to(os, a, ind);
          } else {
            stmt_to(os, a, ind);
          }
          os << ";\n";
          stmt_to(os, *n.second, ind);
        } else if constexpr (std::is_same_v<T, If>) {
          os << pad(ind) << "if " << print_expr(*n.cond) << " then ";
          block_to(os, *n.then_branch, ind);
          os << " else ";
          block_to(os, *n.else_branch, ind);
        } else if constexpr (std::is_same_v<T, While>) {
          os << pad(ind) << "while " << print_expr(*n.cond) << " do ";
          block_to(os, *n.body, ind);
        } else if constexpr (std::is_same_v<T, Call>) {
          os << pad(ind) << wrap(*n.target, 7) << "." << n.method << "(" << args_list(n.args)
             << "):" << print_expr(*n.amount);
        }
      },
      s.node);
}

}  // namespace

std::string print_expr(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Lit>) {
          return to_string(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, MagicRef>) {
          return magic_name(n.which);
        } else if constexpr (std::is_same_v<T, FieldRead>) {
          return wrap(*n.target, 7) + "." + n.field;
        } else {
          int p = precedence(e);
          if (n.op == OpCode::Not) return "!" + wrap(*n.args[0], 6);
          // left-associative, except comparisons which do not chain
          int left = p == 3 ? 4 : p;
          return wrap(*n.args[0], left) + " " + std::string(symbol(n.op)) + " " +
                 wrap(*n.args[1], p + 1);
        }
      },
      e.node);
}

std::string print_stmt(const Stmt& s, int indent) {
  std::ostringstream os;
  stmt_to(os, s, indent);
  return os.str();
}

std::string print_transaction(const Transaction& t) {
  std::string out = t.caller + " -> " + t.callee + "." + t.method + "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) out += ", ";
    out += to_string(t.args[i]);
  }
  return out + "):" + std::to_string(t.amount);
}

std::string print_interface(const InterfaceDecl& d) {
  std::ostringstream os;
  os << "interface " << d.name;
  if (d.param) os << "<" << *d.param << ">";
  os << " {\n";
  for (const auto& f : d.fields)
    os << "  field " << f.name << " : <" << to_string(f.type) << "> var;\n";
  for (const auto& m : d.methods) {
    os << "  method " << m.name << " : <";
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      if (i) os << ", ";
      os << to_string(m.params[i]);
    }
    os << "> -> " << m.level << " cmd;\n";
  }
  os << "}\n";
  return os.str();
}

std::string print_contract(const ContractDecl& c) {
  std::ostringstream os;
  os << "contract " << c.address;
  if (c.type) os << " : " << to_string(*c.type);
  os << " {\n";
  for (const auto& f : c.fields) os << "  field " << f.name << " := " << to_string(f.init) << ";\n";
  for (const auto& m : c.methods) {
    os << "  " << m.name << "(";
    for (std::size_t i = 0; i < m.params.size(); ++i) os << (i ? ", " : "") << m.params[i];
    os << ") ";
    block_to(os, *m.body, 1);
    os << "\n";
  }
  os << "}\n";
  return os.str();
}

std::string print_lattice(const Lattice& l) {
  std::string out;
  for (std::size_t i = 0; i < l.names().size(); ++i) out += (i ? ", " : "") + l.names()[i];
  out += ";";
  for (std::size_t i = 0; i < l.covers().size(); ++i)
    out += (i ? ", " : " ") + l.covers()[i].first + " < " + l.covers()[i].second;
  return out;
}

std::string print_program(const Blockchain& b) {
  std::ostringstream os;
  if (b.lattice_explicit) os << "lattice { " << print_lattice(b.lattice) << " }\n\n";
  for (const auto& i : b.interfaces) os << print_interface(i) << "\n";
  for (const auto& c : b.contracts) os << print_contract(c) << "\n";
  os << "chain {\n";
  for (const auto& t : b.transactions) os << "  " << print_transaction(t) << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace tinysol
