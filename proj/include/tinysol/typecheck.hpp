#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tinysol/ast.hpp"
#include "tinysol/env.hpp"
#include "tinysol/types.hpp"

namespace tinysol {

struct TypeOptions {
  /// Let `this` be subsumed in write positions (this.p := e and the
  /// this.balance premises). Off by default: see README, "Typing `this`".
  bool permissive_this = false;
  /// Missing interface-member implementations are errors instead of warnings.
  bool strict_impl = false;
};

/// The variable part of Γ: x ↦ ⟨B⟩ var, stored as B. Includes this/sender/value.
using VarTypes = AssocList<BaseType>;

/// Typing of expressions and statements against one TypeContext.
///
/// The rules are declarative; this class decides them exactly by computing,
/// for an expression, the set of all derivable base types and, for a
/// statement, the set of all derivable command levels.
class Checker {
 public:
  Checker(const TypeContext& ctx, TypeOptions opts = {}) : ctx_(ctx), opts_(opts) {}

  const TypeContext& context() const { return ctx_; }
  const TypeOptions& options() const { return opts_; }

  /// Types derivable without a final subsumption step.
  TypeSet natural(const VarTypes& g, const Expr& e) const;
  /// All B with Γ ⊢ e : B.
  TypeSet derivable(const VarTypes& g, const Expr& e) const;
  bool check_expr(const VarTypes& g, const Expr& e, const BaseType& b) const;
  /// Least derivable type, or the first minimal one when there is no least.
  std::optional<BaseType> minimal_type(const VarTypes& g, const Expr& e) const;

  /// Levels s with Γ ⊢ S : s cmd by a rule other than t-subs-s.
  LevelSet direct_levels(const VarTypes& g, const Stmt& s) const;
  /// All s with Γ ⊢ S : s cmd (downward closed).
  LevelSet cmd_levels(const VarTypes& g, const Stmt& s) const;
  bool check_stmt(const VarTypes& g, const Stmt& s, Level lv) const;
  /// Greatest derivable command level, or the first maximal one.
  std::optional<Level> maximal_cmd(const VarTypes& g, const Stmt& s) const;

  Derivation derive_expr(const VarTypes& g, const Expr& e, const BaseType& b) const;
  Derivation derive_stmt(const VarTypes& g, const Stmt& s, Level lv) const;

  /// Γ1 of t-dec-m for method `f` of contract `x`: this, the parameters,
  /// value and sender. nullopt when the interface has no such method or
  /// the arity differs.
  std::optional<VarTypes> method_gamma(const std::string& x, const MethodDecl& m) const;
  /// The interface signature of method f of contract x.
  const ProcType* signature(const std::string& x, const std::string& f) const;

  /// t-dec-m (also t-env-m) for one method of contract x.
  Derivation derive_method(const std::string& x, const std::string& f,
                           const std::vector<std::string>& params, const Stmt& body) const;
  /// t-dec-c for one contract: t-dec-f for every field, t-dec-m for every method.
  Derivation derive_contract(const ContractDecl& c) const;
  /// Γ ⊢ X.f(v⃗):n : s cmd at the top level, where no `this` is bound.
  LevelSet transaction_levels(const Transaction& t) const;
  Derivation derive_transaction(const Transaction& t, std::optional<Level> lv = {}) const;

 private:
  struct MethodCandidate {
    BaseType path;
    ProcType sig;
  };
  std::vector<MethodCandidate> method_candidates(const VarTypes& g, const Expr& target,
                                                 const std::string& f) const;
  LevelSet balance_levels(const VarTypes& g) const;
  LevelSet this_field_levels(const VarTypes& g, const std::string& p, const Expr& rhs) const;
  LevelSet plain_levels(const TypeSet& s) const;
  LevelSet downclose(const LevelSet& s) const;

  Derivation direct_expr(const VarTypes& g, const Expr& e, const BaseType& b) const;
  Derivation direct_stmt(const VarTypes& g, const Stmt& s, Level lv) const;
  Derivation derive_call(const VarTypes& g, const Call& c, Level lv, const std::string& text) const;
  Derivation derive_method_type(const VarTypes& g, const Expr& target, const std::string& f,
                                const MethodCandidate& c, Level lv) const;
  Derivation derive_this_field(const VarTypes& g, const std::string& p,
                               const std::optional<BaseType>& want) const;

  const TypeContext& ctx_;
  TypeOptions opts_;
};

/// Type-checking outcome of a whole program.
struct TypeReport {
  bool accepted = false;
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;
  /// One derivation per contract and per transaction, labelled.
  std::vector<std::pair<std::string, Derivation>> derivations;
};

/// Structural validation, the kind pre-pass, t-dec-c for every contract and
/// t-trans for the chain. `levels` overrides source annotations.
TypeReport check_program(const Blockchain& b, const std::map<std::string, BaseTypeExpr>& levels = {},
                         TypeOptions opts = {});

/// A statement or expression inside a method body, with Γ at that point.
struct StmtPoint {
  std::string contract;
  std::string method;
  VarTypes gamma;
  StmtPtr stmt;
};
struct ExprPoint {
  std::string contract;
  std::string method;
  VarTypes gamma;
  ExprPtr expr;
};

/// Every sub-statement and sub-expression of every method body whose
/// Γ1 exists, in source order.
void program_points(const Blockchain& b, const Checker& c, std::vector<StmtPoint>& stmts,
                    std::vector<ExprPoint>& exprs);

}  // namespace tinysol
