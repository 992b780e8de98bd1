#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tinysol/lattice.hpp"
#include "tinysol/value.hpp"

namespace tinysol {

struct SourceSpan {
  std::string file;
  std::size_t start = 0;
  std::size_t end = 0;
  int line = 0;
  int column = 0;
};

// ---- expressions ----------------------------------------------------------

enum class Magic { This, Sender, Value };

enum class OpCode { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not };

int arity(OpCode op);
std::string_view symbol(OpCode op);
const char* magic_name(Magic m);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Lit {
  Value value;
};
struct VarRef {
  std::string name;
};
struct MagicRef {
  Magic which;
};
struct FieldRead {
  ExprPtr target;
  std::string field;
};
struct OpApp {
  OpCode op;
  std::vector<ExprPtr> args;
};

struct Expr {
  std::variant<Lit, VarRef, MagicRef, FieldRead, OpApp> node;
  SourceSpan span;
};

ExprPtr make_lit(Value v, SourceSpan span = {});
ExprPtr make_var(std::string name, SourceSpan span = {});
ExprPtr make_magic(Magic m, SourceSpan span = {});
ExprPtr make_field(ExprPtr target, std::string field, SourceSpan span = {});
ExprPtr make_op(OpCode op, std::vector<ExprPtr> args, SourceSpan span = {});

// ---- types in source ------------------------------------------------------

/// `L` (plain level) or `I<L>` (interface instance). Level names are resolved
/// later, against the lattice or an interface's level parameter.
struct BaseTypeExpr {
  std::string iface;  // empty for a plain level
  std::string level;
  friend bool operator==(const BaseTypeExpr&, const BaseTypeExpr&) = default;
};

std::string to_string(const BaseTypeExpr& t);

// ---- statements -----------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Skip {};
struct Throw {};
struct DeclVar {
  std::optional<BaseTypeExpr> annotation;
  std::string name;
  ExprPtr init;
  StmtPtr body;
};
struct LValue {
  bool this_field = false;  // this.p when true, variable otherwise
  std::string name;
};
struct Assign {
  LValue target;
  ExprPtr rhs;
};
struct Seq {
  StmtPtr first;
  StmtPtr second;
};
struct If {
  ExprPtr cond;
  StmtPtr then_branch;
  StmtPtr else_branch;
};
struct While {
  ExprPtr cond;
  StmtPtr body;
};
struct Call {
  ExprPtr target;
  std::string method;
  std::vector<ExprPtr> args;
  ExprPtr amount;
};

struct Stmt {
  std::variant<Skip, Throw, DeclVar, Assign, Seq, If, While, Call> node;
  SourceSpan span;
};

/// Names of the Stmt alternatives, in variant order.
inline constexpr std::string_view kStmtKinds[] = {"skip",   "throw", "var", "assign",
                                                  "seq",    "if",    "while", "call"};

StmtPtr make_stmt(decltype(Stmt::node) node, SourceSpan span = {});

// ---- declarations ---------------------------------------------------------

struct FieldDecl {
  std::string name;
  Value init;
  SourceSpan span;
};

struct MethodDecl {
  std::string name;
  std::vector<std::string> params;
  StmtPtr body;
  SourceSpan span;
};

struct ContractDecl {
  std::string address;
  std::optional<BaseTypeExpr> type;  // `contract X : I<L>`
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  SourceSpan span;

  const FieldDecl* field(std::string_view name) const;
  const MethodDecl* method(std::string_view name) const;
};

struct IfaceField {
  std::string name;
  BaseTypeExpr type;
  SourceSpan span;
};

struct IfaceMethod {
  std::string name;
  std::vector<BaseTypeExpr> params;
  std::string level;
  SourceSpan span;
};

struct InterfaceDecl {
  std::string name;
  std::optional<std::string> param;  // `interface I<s>`
  std::vector<IfaceField> fields;
  std::vector<IfaceMethod> methods;
  SourceSpan span;
};

struct Transaction {
  std::string caller;
  std::string callee;
  std::string method;
  std::vector<Value> args;
  std::uint64_t amount = 0;
  SourceSpan span;
};

struct Blockchain {
  std::vector<ContractDecl> contracts;
  std::vector<InterfaceDecl> interfaces;
  std::vector<Transaction> transactions;
  Lattice lattice = Lattice::two_point();
  bool lattice_explicit = false;

  const ContractDecl* contract(std::string_view address) const;
  const InterfaceDecl* interface(std::string_view name) const;
};

/// A contract whose only members are `balance` and `send`.
bool is_account(const ContractDecl& c);

/// Name of the built-in top interface.
inline constexpr std::string_view kTopInterface = "ITop";

// ---- structural equality (spans ignored) ----------------------------------

bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);
bool equal(const Stmt& a, const Stmt& b);
bool equal(const StmtPtr& a, const StmtPtr& b);
bool equal(const ContractDecl& a, const ContractDecl& b);
bool equal(const InterfaceDecl& a, const InterfaceDecl& b);
bool equal(const Transaction& a, const Transaction& b);
bool equal(const Blockchain& a, const Blockchain& b);

// ---- structural validation ------------------------------------------------

struct Diagnostic {
  std::string code;
  std::string message;
  SourceSpan span;
  bool warning = false;
};

/// All structural problems of a parsed program; empty iff valid.
std::vector<Diagnostic> validate_program(const Blockchain& b);

}  // namespace tinysol
