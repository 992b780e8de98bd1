#include "tinysol/equivalence.hpp"

namespace tinysol {

const char* eq_kind_name(EqResult::Kind k) {
  switch (k) {
    case EqResult::Kind::Equal: return "Equal";
    case EqResult::Kind::DomainMismatch: return "DomainMismatch";
    case EqResult::Kind::Untyped: return "Untyped";
    case EqResult::Kind::ValueMismatch: return "ValueMismatch";
  }
  return "?";
}

namespace {

// Pairwise walk shared by the variable and field cases. `level` yields the
// level of a name, or nullptr when Γ has no type for it.
template <class LevelOf>
EqResult pairwise(const AssocList<Value>& a, const AssocList<Value>& b, const Lattice& l, Level s,
                  const std::string& where, LevelOf level) {
  auto xs = a.items();
  auto ys = b.items();
  if (xs.size() != ys.size())
    return {EqResult::Kind::DomainMismatch,
            where + ": " + std::to_string(xs.size()) + " vs " + std::to_string(ys.size()) + " bindings"};
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i].first != ys[i].first)
      return {EqResult::Kind::DomainMismatch, where + ": " + xs[i].first + " vs " + ys[i].first};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::string& k = xs[i].first;
    std::optional<Level> lv = level(k);
    if (!lv) return {EqResult::Kind::Untyped, where + ": " + k + " has no type"};
    if (l.leq(*lv, s) && !(xs[i].second == ys[i].second))
      return {EqResult::Kind::ValueMismatch, where + ": " + k + " is " + to_string(xs[i].second) +
                                                 " vs " + to_string(ys[i].second)};
  }
  return {};
}

}  // namespace

EqResult s_equal(const TypeContext& ctx, const VarTypes& g, const VarEnv& a, const VarEnv& b, Level s) {
  return pairwise(a, b, ctx.lattice(), s, "variables", [&](const std::string& x) -> std::optional<Level> {
    const BaseType* t = g.lookup(x);
    if (!t) return std::nullopt;
    return t->level;
  });
}

EqResult s_equal(const TypeContext& ctx, const IfaceEnv& i, const FieldEnv& a, const FieldEnv& b,
                 Level s) {
  return pairwise(a, b, ctx.lattice(), s, "fields", [&](const std::string& p) -> std::optional<Level> {
    const BaseType* t = i.field(p);
    if (!t) return std::nullopt;
    return t->level;
  });
}

EqResult s_equal(const TypeContext& ctx, const State& a, const State& b, Level s) {
  if (a.size() != b.size())
    return {EqResult::Kind::DomainMismatch, "states hold different contracts"};
  for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j)
    if (i->first != j->first)
      return {EqResult::Kind::DomainMismatch, "contract " + i->first + " vs " + j->first};
  for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j) {
    const BaseType* t = ctx.address_type(i->first);
    const IfaceEnv* env = t ? ctx.iface(*t) : nullptr;
    if (!env) return {EqResult::Kind::Untyped, i->first + " has no type"};
    EqResult r = s_equal(ctx, *env, i->second, j->second, s);
    if (!r) {
      r.detail = i->first + " " + r.detail;
      return r;
    }
  }
  return {};
}

EqResult s_equal(const TypeContext& ctx, const MethodTable& a, const MethodTable& b, Level s) {
  if (a.size() != b.size())
    return {EqResult::Kind::DomainMismatch, "method tables hold different contracts"};
  for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j)
    if (i->first != j->first)
      return {EqResult::Kind::DomainMismatch, "contract " + i->first + " vs " + j->first};
  for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j) {
    const BaseType* t = ctx.address_type(i->first);
    if (!t) return {EqResult::Kind::Untyped, i->first + " has no type"};
    if (ctx.lattice().leq(t->level, s) && !(i->second == j->second))
      return {EqResult::Kind::ValueMismatch, "methods of " + i->first + " differ"};
  }
  return {};
}

namespace {

// An address stored at an interface type must have a subtype of it.
bool value_fits(const TypeContext& ctx, const Value& v, const BaseType& b) {
  if (!b.is_iface()) return true;
  if (!is_addr(v)) return false;
  const BaseType* t = ctx.address_type(as_addr(v));
  return t && ctx.sub(*t, b);
}

}  // namespace

Agreement check_env_agreement(const Checker& c, const State& s, const MethodTable& t,
                              const VarTypes& g, const VarEnv& v) {
  const TypeContext& ctx = c.context();
  for (const auto& [x, m] : t) {
    const BaseType* ty = ctx.address_type(x);
    if (!ty) return {false, "method table: " + x + " ∉ dom(Γ)"};
    for (const auto& [f, def] : m.items()) {
      Derivation d = c.derive_method(x, f, def.params, *def.body);
      if (!d.ok) {
        const Derivation* bad = first_failure(d);
        return {false, "method " + x + "." + f + ": " + (bad ? bad->failure : std::string())};
      }
    }
  }
  for (const auto& [x, fields] : s) {
    const BaseType* ty = ctx.address_type(x);
    const IfaceEnv* env = ty ? ctx.iface(*ty) : nullptr;
    if (!env) return {false, "state: " + x + " ∉ dom(Γ)"};
    for (const auto& [p, val] : fields.items())
      if (!env->field(p)) return {false, "field " + x + "." + p + " ∉ dom(Γ(" + ctx.show(*ty) + "))"};
  }
  for (const auto& [x, val] : v.items())
    if (!g.contains(x)) return {false, "variable " + x + " ∉ dom(Γ)"};
  return {};
}

Agreement check_value_types(const TypeContext& ctx, const State& s, const VarTypes& g, const VarEnv& v) {
  for (const auto& [x, fields] : s) {
    const BaseType* ty = ctx.address_type(x);
    const IfaceEnv* env = ty ? ctx.iface(*ty) : nullptr;
    if (!env) continue;
    for (const auto& [p, val] : fields.items()) {
      const BaseType* ft = env->field(p);
      if (ft && !value_fits(ctx, val, *ft))
        return {false, "field " + x + "." + p + " = " + to_string(val) + " is not a " + ctx.show(*ft)};
    }
  }
  for (const auto& [x, val] : v.items()) {
    const BaseType* vt = g.lookup(x);
    if (vt && !value_fits(ctx, val, *vt))
      return {false, "variable " + x + " = " + to_string(val) + " is not a " + ctx.show(*vt)};
  }
  return {};
}

}  // namespace tinysol
