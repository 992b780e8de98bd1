#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tinysol/ast.hpp"
#include "tinysol/types.hpp"

namespace tinysol {

/// Nat/bool/address well-kindedness, checked before the security rules.
/// nullopt is "not known statically" and never reported.
using Kind = std::optional<ValueKind>;

/// Kinds of the parameters of method `f` of contract `x`: Addr for
/// interface-typed ones, otherwise inferred from how the body uses them.
std::vector<Kind> param_kinds(const Blockchain& b, const TypeContext& ctx, const std::string& x,
                              const std::string& f);

/// Kind of field p of contract x, from its initial value.
Kind field_kind(const Blockchain& b, const std::string& x, const std::string& p);

/// Ill-kinded operations, guards, assignments, calls and transaction arguments.
std::vector<Diagnostic> check_kinds(const Blockchain& b, const TypeContext& ctx);

}  // namespace tinysol
