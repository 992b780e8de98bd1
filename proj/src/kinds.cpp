#include "tinysol/kinds.hpp"

#include "tinysol/env.hpp"

namespace tinysol {

namespace {

using KindEnv = AssocList<Kind>;

std::string kname(Kind k) { return k ? kind_name(*k) : "unknown"; }

const ProcType* sig_of(const TypeContext& ctx, const std::string& x, const std::string& f) {
  const BaseType* t = ctx.address_type(x);
  if (!t) return nullptr;
  const IfaceEnv* e = ctx.iface(*t);
  return e ? e->method(f) : nullptr;
}

// Collects constraints on the names in `want` from how they are used.
struct Inferrer {
  std::vector<std::string> names;
  std::vector<Kind> kinds;

  int slot(const Expr& e) const {
    auto v = std::get_if<VarRef>(&e.node);
    if (!v) return -1;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == v->name) return static_cast<int>(i);
    return -1;
  }

  void hint(const Expr& e, ValueKind k) {
    int i = slot(e);
    if (i >= 0 && !kinds[static_cast<std::size_t>(i)]) kinds[static_cast<std::size_t>(i)] = k;
  }

  Kind literal_kind(const Expr& e) const {
    if (auto l = std::get_if<Lit>(&e.node)) return kind_of(l->value);
    if (auto m = std::get_if<MagicRef>(&e.node))
      return m->which == Magic::Value ? ValueKind::Nat : ValueKind::Addr;
    if (auto o = std::get_if<OpApp>(&e.node)) {
      switch (o->op) {
        case OpCode::Add:
        case OpCode::Sub:
        case OpCode::Mul: return ValueKind::Nat;
        default: return ValueKind::Bool;
      }
    }
    int i = slot(e);
    if (i >= 0) return kinds[static_cast<std::size_t>(i)];
    return std::nullopt;
  }

  void expr(const Expr& e) {
    if (auto f = std::get_if<FieldRead>(&e.node)) {
      hint(*f->target, ValueKind::Addr);
      expr(*f->target);
    } else if (auto o = std::get_if<OpApp>(&e.node)) {
      for (const auto& a : o->args) expr(*a);
      switch (o->op) {
        case OpCode::And:
        case OpCode::Or:
        case OpCode::Not:
          for (const auto& a : o->args) hint(*a, ValueKind::Bool);
          break;
        case OpCode::Eq:
        case OpCode::Ne:
          if (auto k = literal_kind(*o->args[1])) hint(*o->args[0], *k);
          if (auto k = literal_kind(*o->args[0])) hint(*o->args[1], *k);
          break;
        default:
          for (const auto& a : o->args) hint(*a, ValueKind::Nat);
      }
    }
  }

  void stmt(const Stmt& s) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, DeclVar>) {
            expr(*n.init);
            stmt(*n.body);
          } else if constexpr (std::is_same_v<T, Assign>) {
            expr(*n.rhs);
          } else if constexpr (std::is_same_v<T, Seq>) {
            stmt(*n.first);
            stmt(*n.second);
          } else if constexpr (std::is_same_v<T, If>) {
            expr(*n.cond);
            hint(*n.cond, ValueKind::Bool);
            stmt(*n.then_branch);
            stmt(*n.else_branch);
          } else if constexpr (std::is_same_v<T, While>) {
            expr(*n.cond);
            hint(*n.cond, ValueKind::Bool);
            stmt(*n.body);
          } else if constexpr (std::is_same_v<T, Call>) {
            expr(*n.target);
            hint(*n.target, ValueKind::Addr);
            for (const auto& a : n.args) expr(*a);
            expr(*n.amount);
            hint(*n.amount, ValueKind::Nat);
          }
        },
        s.node);
  }
};

struct KindChecker {
  const Blockchain& b;
  const TypeContext& ctx;
  const ContractDecl* self = nullptr;
  std::vector<Diagnostic> out;

  void add(std::string code, std::string msg, const SourceSpan& span) {
    out.push_back({std::move(code), std::move(msg), span, false});
  }

  // The contract an expression denotes when that is known without running it.
  const ContractDecl* static_contract(const Expr& e) const {
    if (auto l = std::get_if<Lit>(&e.node); l && is_addr(l->value)) return b.contract(as_addr(l->value));
    if (auto m = std::get_if<MagicRef>(&e.node); m && m->which == Magic::This) return self;
    return nullptr;
  }

  Kind expr(const KindEnv& env, const Expr& e) {
    return std::visit(
        [&](const auto& n) -> Kind {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Lit>) {
            return kind_of(n.value);
          } else if constexpr (std::is_same_v<T, VarRef>) {
            const Kind* k = env.lookup(n.name);
            return k ? *k : std::nullopt;
          } else if constexpr (std::is_same_v<T, MagicRef>) {
            return n.which == Magic::Value ? ValueKind::Nat : ValueKind::Addr;
          } else if constexpr (std::is_same_v<T, FieldRead>) {
            Kind t = expr(env, *n.target);
            if (t && *t != ValueKind::Addr)
              add("KindMismatch", "field read ." + n.field + " on a " + kname(t), e.span);
            if (n.field == "balance") return ValueKind::Nat;
            if (const ContractDecl* c = static_contract(*n.target))
              if (const FieldDecl* f = c->field(n.field)) return kind_of(f->init);
            return std::nullopt;
          } else {
            std::vector<Kind> ks;
            for (const auto& a : n.args) ks.push_back(expr(env, *a));
            const std::string op(symbol(n.op));
            switch (n.op) {
              case OpCode::Eq:
              case OpCode::Ne:
                if (ks[0] && ks[1] && *ks[0] != *ks[1])
                  add("KindMismatch", "'" + op + "' compares " + kname(ks[0]) + " with " + kname(ks[1]),
                      e.span);
                return ValueKind::Bool;
              case OpCode::And:
              case OpCode::Or:
              case OpCode::Not:
                for (Kind k : ks)
                  if (k && *k != ValueKind::Bool)
                    add("KindMismatch", "'" + op + "' applied to a " + kname(k), e.span);
                return ValueKind::Bool;
              default:
                for (Kind k : ks) {
                  if (k == ValueKind::Addr)
                    add("AddressArithmetic", "'" + op + "' applied to an address", e.span);
                  else if (k == ValueKind::Bool)
                    add("KindMismatch", "'" + op + "' applied to a bool", e.span);
                }
                if (n.op == OpCode::Add || n.op == OpCode::Sub || n.op == OpCode::Mul)
                  return ValueKind::Nat;
                return ValueKind::Bool;
            }
          }
        },
        e.node);
  }

  void guard(const KindEnv& env, const Expr& e) {
    Kind k = expr(env, e);
    if (k && *k != ValueKind::Bool) add("NonBooleanGuard", "guard is a " + kname(k), e.span);
  }

  void args_against(const std::vector<Kind>& want, const std::vector<Kind>& got,
                    const std::string& what, const SourceSpan& span) {
    if (want.size() != got.size()) return;  // arity is the type checker's business
    for (std::size_t i = 0; i < want.size(); ++i)
      if (want[i] && got[i] && *want[i] != *got[i])
        add("KindMismatch", what + ": argument " + std::to_string(i + 1) + " is a " + kname(got[i]) +
                                ", expected " + kname(want[i]),
            span);
  }

  void stmt(const KindEnv& env, const Stmt& s) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, DeclVar>) {
            Kind k = expr(env, *n.init);
            if (n.annotation && !n.annotation->iface.empty() && k && *k != ValueKind::Addr)
              add("KindMismatch", "variable " + n.name + " has an interface type but holds a " + kname(k),
                  s.span);
            stmt(env.prepend(n.name, k), *n.body);
          } else if constexpr (std::is_same_v<T, Assign>) {
            Kind r = expr(env, *n.rhs);
            Kind l;
            if (n.target.this_field) {
              if (self)
                if (const FieldDecl* f = self->field(n.target.name)) l = kind_of(f->init);
            } else if (const Kind* k = env.lookup(n.target.name)) {
              l = *k;
            }
            if (l && r && *l != *r)
              add("KindMismatch", "assigning a " + kname(r) + " to " +
                                      (n.target.this_field ? "this." : "") + n.target.name +
                                      " which holds a " + kname(l),
                  s.span);
          } else if constexpr (std::is_same_v<T, Seq>) {
            stmt(env, *n.first);
            stmt(env, *n.second);
          } else if constexpr (std::is_same_v<T, If>) {
            guard(env, *n.cond);
            stmt(env, *n.then_branch);
            stmt(env, *n.else_branch);
          } else if constexpr (std::is_same_v<T, While>) {
            guard(env, *n.cond);
            stmt(env, *n.body);
          } else if constexpr (std::is_same_v<T, Call>) {
            Kind t = expr(env, *n.target);
            if (t && *t != ValueKind::Addr) add("KindMismatch", "call target is a " + kname(t), s.span);
            std::vector<Kind> got;
            for (const auto& a : n.args) got.push_back(expr(env, *a));
            Kind m = expr(env, *n.amount);
            if (m && *m != ValueKind::Nat) add("KindMismatch", "call amount is a " + kname(m), s.span);
            if (const ContractDecl* c = static_contract(*n.target))
              if (c->method(n.method))
                args_against(param_kinds(b, ctx, c->address, n.method), got,
                             c->address + "." + n.method, s.span);
          }
        },
        s.node);
  }
};

}  // namespace

std::vector<Kind> param_kinds(const Blockchain& b, const TypeContext& ctx, const std::string& x,
                              const std::string& f) {
  const ContractDecl* c = b.contract(x);
  const MethodDecl* m = c ? c->method(f) : nullptr;
  if (!m) return {};
  Inferrer in{m->params, std::vector<Kind>(m->params.size())};
  if (const ProcType* sig = sig_of(ctx, x, f); sig && sig->params.size() == m->params.size())
    for (std::size_t i = 0; i < sig->params.size(); ++i)
      if (sig->params[i].is_iface()) in.kinds[i] = ValueKind::Addr;
  in.stmt(*m->body);
  return in.kinds;
}

Kind field_kind(const Blockchain& b, const std::string& x, const std::string& p) {
  const ContractDecl* c = b.contract(x);
  const FieldDecl* f = c ? c->field(p) : nullptr;
  if (!f) return std::nullopt;
  return kind_of(f->init);
}

std::vector<Diagnostic> check_kinds(const Blockchain& b, const TypeContext& ctx) {
  KindChecker kc{b, ctx, nullptr, {}};
  for (const auto& c : b.contracts) {
    kc.self = &c;
    for (const auto& m : c.methods) {
      std::vector<Kind> pk = param_kinds(b, ctx, c.address, m.name);
      KindEnv env;
      for (std::size_t i = 0; i < m.params.size(); ++i) env = env.prepend(m.params[i], pk[i]);
      kc.stmt(env, *m.body);
    }
  }
  kc.self = nullptr;
  for (const auto& t : b.transactions) {
    const ContractDecl* c = b.contract(t.callee);
    if (!c || !c->method(t.method)) continue;
    std::vector<Kind> got;
    for (const auto& v : t.args) got.push_back(kind_of(v));
    kc.args_against(param_kinds(b, ctx, t.callee, t.method), got,
                    "transaction " + t.callee + "." + t.method, t.span);
  }
  return std::move(kc.out);
}

}  // namespace tinysol
