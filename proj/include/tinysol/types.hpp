#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tinysol/ast.hpp"
#include "tinysol/lattice.hpp"

namespace tinysol {

// ---- security types -------------------------------------------------------

/// B ::= s | I_s. An empty `iface` is a plain level.
struct BaseType {
  std::string iface;
  Level level;
  bool is_iface() const { return !iface.empty(); }
  friend bool operator==(const BaseType&, const BaseType&) = default;
};

struct BoxType {  // ⟨B⟩ var
  BaseType content;
  friend bool operator==(const BoxType&, const BoxType&) = default;
};
struct CmdType {  // s cmd
  Level level;
  friend bool operator==(const CmdType&, const CmdType&) = default;
};
struct ProcType {  // ⟨B⃗⟩ → s cmd
  std::vector<BaseType> params;
  Level level;
  friend bool operator==(const ProcType&, const ProcType&) = default;
};

using SecType = std::variant<BaseType, BoxType, CmdType, ProcType>;

/// B ⤳ s
inline Level level_of(const BaseType& b) { return b.level; }

std::string to_string(const BaseType& b, const Lattice& l);
std::string to_string(const SecType& t, const Lattice& l);

/// Γ(I_s): an interface body with its level parameter instantiated.
struct IfaceEnv {
  std::string name;
  Level level;
  std::vector<std::pair<std::string, BaseType>> fields;   // p : ⟨B⟩ var
  std::vector<std::pair<std::string, ProcType>> methods;  // f : ⟨B⃗⟩ → s cmd
  std::vector<std::string> order;                         // member names, declaration order

  const BaseType* field(const std::string& p) const;
  const ProcType* method(const std::string& f) const;
};

// ---- derivations ----------------------------------------------------------

struct Derivation {
  std::string rule;      // e.g. t-call, subs-proc
  std::string judgment;  // e.g. "Γ ⊬ X.go : <> -> H cmd"
  bool ok = true;
  std::string failure;   // failed premise, on failing leaves
  std::string code;      // machine-readable failure class, on failing leaves
  std::vector<Derivation> children;
};

/// Indented text rendering, one node per line.
std::string render(const Derivation& d);

/// First failing leaf in depth-first order, or nullptr.
const Derivation* first_failure(const Derivation& d);

/// Rules along the first failing branch, root first, without side conditions.
std::vector<std::string> failing_path(const Derivation& d);

/// Every root-to-leaf path through failing nodes ends in exactly one failing leaf.
bool well_formed_failure(const Derivation& d);

// ---- type sets ------------------------------------------------------------

/// A subset of the finite universe of base types: levels, then I_s for each
/// interface (declared ones plus ITop) and level.
class TypeSet {
 public:
  TypeSet() = default;
  explicit TypeSet(std::size_t n) : bits_(n, false) {}
  bool has(std::size_t i) const { return bits_[i]; }
  void add(std::size_t i) { bits_[i] = true; }
  bool empty() const;
  std::size_t size() const { return bits_.size(); }
  void intersect(const TypeSet& o);
  void unite(const TypeSet& o);
  friend bool operator==(const TypeSet&, const TypeSet&) = default;

 private:
  std::vector<bool> bits_;
};

/// Set of levels s, as a bitmask over lattice indices.
using LevelSet = std::vector<bool>;

// ---- the global part of Γ -------------------------------------------------

struct ContextError {
  std::string code;
  std::string message;
  SourceSpan span;
};

/// Interfaces, address types and the subtyping relation of one program under
/// one level assignment.
class TypeContext {
 public:
  /// `overrides` maps an address to `I<s>` and replaces its source annotation.
  /// Problems (unknown names, contracts without a type) go to `errors`.
  TypeContext(const Blockchain& b, const std::map<std::string, BaseTypeExpr>& overrides,
              std::vector<ContextError>& errors);

  /// Same program and lattice, but explicit interface environments.
  TypeContext(Lattice lattice, std::vector<std::pair<std::string, std::vector<IfaceEnv>>> ifaces,
              std::map<std::string, BaseType> addresses);

  const Lattice& lattice() const { return lattice_; }

  /// Γ(X) for an address.
  const BaseType* address_type(const std::string& x) const;
  const std::map<std::string, BaseType>& addresses() const { return addresses_; }

  /// Γ(I_s); nullptr when I is not declared.
  const IfaceEnv* iface(const std::string& name, Level s) const;
  const IfaceEnv* iface(const BaseType& b) const { return iface(b.iface, b.level); }
  const std::vector<std::string>& iface_names() const { return iface_names_; }

  /// Resolves `I<s>` or `s` against the lattice.
  std::optional<BaseType> resolve(const BaseTypeExpr& t) const;

  // universe indexing
  std::size_t universe() const { return n_ * (iface_names_.size() + 1); }
  std::size_t index(const BaseType& b) const;
  BaseType at(std::size_t i) const;
  TypeSet empty_set() const { return TypeSet(universe()); }
  TypeSet all_levels() const;
  TypeSet upclose(const TypeSet& s) const;

  /// Γ ⊢ B1 <: B2 (least preorder closed under the subtyping rules).
  bool sub(const BaseType& a, const BaseType& b) const { return rel_[index(a) * universe() + index(b)]; }
  bool subtype(const SecType& a, const SecType& b) const;

  /// Derivation of Γ ⊢ T1 <: T2, failing where the relation fails.
  Derivation derive_sub(const SecType& a, const SecType& b) const;

  /// Γ ⊢ Γ(I1) <: Γ(I2) by subs-env, given the relation `rel`.
  bool env_sub(const IfaceEnv& a, const IfaceEnv& b, const std::vector<bool>& rel) const;

  std::string show(const BaseType& b) const { return to_string(b, lattice_); }
  std::string show(const SecType& t) const { return to_string(t, lattice_); }

 private:
  void compute_subtyping();
  Derivation derive_base(const BaseType& a, const BaseType& b, std::vector<std::size_t>& path) const;
  Derivation derive_proc(const ProcType& a, const ProcType& b, std::vector<std::size_t>& path) const;
  Derivation derive_env(const IfaceEnv& a, const IfaceEnv& b, std::vector<std::size_t>& path) const;

  Lattice lattice_;
  std::size_t n_ = 0;
  std::vector<std::string> iface_names_;  // ITop first
  std::vector<std::vector<IfaceEnv>> envs_;  // [iface][level]
  std::vector<bool> declared_;
  std::map<std::string, BaseType> addresses_;
  std::vector<bool> rel_;
};

}  // namespace tinysol
