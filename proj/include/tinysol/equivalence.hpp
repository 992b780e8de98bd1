#pragma once

#include <string>

#include "tinysol/env.hpp"
#include "tinysol/typecheck.hpp"
#include "tinysol/types.hpp"

namespace tinysol {

/// Outcome of Γ ⊢ ρ1 =_s ρ2.
struct EqResult {
  enum class Kind { Equal, DomainMismatch, Untyped, ValueMismatch };
  Kind kind = Kind::Equal;
  std::string detail;  // first offending binding

  bool equal() const { return kind == Kind::Equal; }
  explicit operator bool() const { return equal(); }
};

const char* eq_kind_name(EqResult::Kind k);

/// Bindings are compared pairwise in list order, so both sides need the same
/// names in the same order. A binding whose name has no type in Γ relates nothing.
EqResult s_equal(const TypeContext& ctx, const VarTypes& g, const VarEnv& a, const VarEnv& b, Level s);
EqResult s_equal(const TypeContext& ctx, const IfaceEnv& i, const FieldEnv& a, const FieldEnv& b,
                 Level s);
EqResult s_equal(const TypeContext& ctx, const State& a, const State& b, Level s);
EqResult s_equal(const TypeContext& ctx, const MethodTable& a, const MethodTable& b, Level s);

/// Γ ⊢ ρS, ρT, ρV: every stored binding has a type and every method body
/// re-checks under the t-env-m premises. `detail` names the first offender.
struct Agreement {
  bool ok = true;
  std::string detail;
  explicit operator bool() const { return ok; }
};

Agreement check_env_agreement(const Checker& c, const State& s, const MethodTable& t,
                              const VarTypes& g = {}, const VarEnv& v = {});

/// Every address stored at an interface type has a subtype of it. Not part
/// of agreement, but the soundness results fail without it (see README).
Agreement check_value_types(const TypeContext& ctx, const State& s, const VarTypes& g = {},
                            const VarEnv& v = {});

}  // namespace tinysol
