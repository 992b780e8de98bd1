#include "tinysol/typecheck.hpp"

#include <algorithm>
#include <cctype>

#include "tinysol/kinds.hpp"
#include "tinysol/printer.hpp"

namespace tinysol {

namespace {

std::string turn(bool ok) { return ok ? "Γ ⊢ " : "Γ ⊬ "; }

bool all_ok(const std::vector<Derivation>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const Derivation& c) { return c.ok; });
}

Derivation node(std::string rule, const std::string& body, std::vector<Derivation> children) {
  Derivation d{std::move(rule), "", true, "", "", std::move(children)};
  d.ok = all_ok(d.children);
  d.judgment = turn(d.ok) + body;
  return d;
}

Derivation ok_leaf(std::string rule, const std::string& body) {
  return Derivation{std::move(rule), turn(true) + body, true, "", "", {}};
}

Derivation fail_leaf(std::string rule, const std::string& body, std::string why, std::string code) {
  return Derivation{std::move(rule), turn(false) + body, false, std::move(why), std::move(code), {}};
}

Derivation side(bool ok, const std::string& holds, const std::string& fails, std::string code) {
  return Derivation{"side", ok ? holds : fails, ok, ok ? "" : fails, ok ? "" : std::move(code), {}};
}

std::string one_line(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out += ' ';
      space = false;
      out += c;
    }
  }
  return out;
}

std::string text(const Expr& e) { return print_expr(e); }
std::string text(const Stmt& s) { return one_line(print_stmt(s)); }

std::string magic_or_var(const Expr& e) {
  if (auto v = std::get_if<VarRef>(&e.node)) return v->name;
  if (auto m = std::get_if<MagicRef>(&e.node)) return magic_name(m->which);
  return {};
}

}  // namespace

// ---- sets -------------------------------------------------------------------

LevelSet Checker::plain_levels(const TypeSet& s) const {
  const Lattice& l = ctx_.lattice();
  LevelSet out(l.size(), false);
  for (Level v : l.levels()) out[v.index] = s.has(ctx_.index(BaseType{"", v}));
  return out;
}

LevelSet Checker::downclose(const LevelSet& s) const {
  const Lattice& l = ctx_.lattice();
  LevelSet out(l.size(), false);
  for (Level a : l.levels())
    for (Level b : l.levels())
      if (s[b.index] && l.leq(a, b)) out[a.index] = true;
  return out;
}

TypeSet Checker::natural(const VarTypes& g, const Expr& e) const {
  TypeSet out = ctx_.empty_set();
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Lit>) {
          if (is_addr(n.value)) {
            if (const BaseType* t = ctx_.address_type(as_addr(n.value))) out.add(ctx_.index(*t));
          } else {
            out = ctx_.all_levels();
          }
        } else if constexpr (std::is_same_v<T, VarRef> || std::is_same_v<T, MagicRef>) {
          if (const BaseType* t = g.lookup(magic_or_var(e))) out.add(ctx_.index(*t));
        } else if constexpr (std::is_same_v<T, FieldRead>) {
          TypeSet dp = derivable(g, *n.target);
          for (std::size_t i = 0; i < dp.size(); ++i) {
            if (!dp.has(i)) continue;
            BaseType j = ctx_.at(i);
            if (!j.is_iface()) continue;
            const IfaceEnv* env = ctx_.iface(j);
            const BaseType* b = env ? env->field(n.field) : nullptr;
            if (b && b->level == j.level) out.add(ctx_.index(*b));
          }
        } else {
          std::vector<LevelSet> args;
          for (const auto& a : n.args) {
            TypeSet d = derivable(g, *a);
            LevelSet ls(ctx_.lattice().size(), false);
            for (std::size_t i = 0; i < d.size(); ++i)
              if (d.has(i)) ls[ctx_.at(i).level.index] = true;
            args.push_back(std::move(ls));
          }
          for (Level s : ctx_.lattice().levels())
            if (std::all_of(args.begin(), args.end(), [&](const LevelSet& ls) { return ls[s.index]; }))
              out.add(ctx_.index(BaseType{"", s}));
        }
      },
      e.node);
  return out;
}

TypeSet Checker::derivable(const VarTypes& g, const Expr& e) const {
  return ctx_.upclose(natural(g, e));
}

bool Checker::check_expr(const VarTypes& g, const Expr& e, const BaseType& b) const {
  return derivable(g, e).has(ctx_.index(b));
}

std::optional<BaseType> Checker::minimal_type(const VarTypes& g, const Expr& e) const {
  TypeSet n = natural(g, e);
  std::vector<BaseType> ts;
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n.has(i)) ts.push_back(ctx_.at(i));
  for (const auto& t : ts)
    if (std::all_of(ts.begin(), ts.end(), [&](const BaseType& u) { return ctx_.sub(t, u); })) return t;
  for (const auto& t : ts)
    if (std::none_of(ts.begin(), ts.end(),
                     [&](const BaseType& u) { return !(u == t) && ctx_.sub(u, t) && !ctx_.sub(t, u); }))
      return t;
  return std::nullopt;
}

std::vector<Checker::MethodCandidate> Checker::method_candidates(const VarTypes& g,
                                                                 const Expr& target,
                                                                 const std::string& f) const {
  std::vector<MethodCandidate> out;
  TypeSet d = derivable(g, target);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!d.has(i)) continue;
    BaseType j = ctx_.at(i);
    if (!j.is_iface()) continue;
    const IfaceEnv* env = ctx_.iface(j);
    const ProcType* m = env ? env->method(f) : nullptr;
    if (m && m->level == j.level) out.push_back({j, *m});
  }
  return out;
}

// Interface types `this` may take in write positions.
static std::vector<BaseType> this_paths(const TypeContext& ctx, const VarTypes& g, bool permissive) {
  std::vector<BaseType> out;
  const BaseType* t = g.lookup("this");
  if (!t) return out;
  out.push_back(*t);
  if (permissive) {
    TypeSet one = ctx.empty_set();
    one.add(ctx.index(*t));
    TypeSet up = ctx.upclose(one);
    for (std::size_t i = 0; i < up.size(); ++i)
      if (up.has(i) && !(ctx.at(i) == *t) && ctx.at(i).is_iface()) out.push_back(ctx.at(i));
  }
  return out;
}

LevelSet Checker::balance_levels(const VarTypes& g) const {
  const Lattice& l = ctx_.lattice();
  if (!g.lookup("this")) return LevelSet(l.size(), true);
  LevelSet out(l.size(), false);
  for (const BaseType& j : this_paths(ctx_, g, opts_.permissive_this)) {
    const IfaceEnv* env = ctx_.iface(j);
    const BaseType* b = env ? env->field("balance") : nullptr;
    if (b && !b->is_iface() && b->level == j.level) out[j.level.index] = true;
  }
  return out;
}

LevelSet Checker::this_field_levels(const VarTypes& g, const std::string& p, const Expr& rhs) const {
  LevelSet out(ctx_.lattice().size(), false);
  TypeSet d = derivable(g, rhs);
  for (const BaseType& j : this_paths(ctx_, g, opts_.permissive_this)) {
    const IfaceEnv* env = ctx_.iface(j);
    const BaseType* b = env ? env->field(p) : nullptr;
    if (b && b->level == j.level && d.has(ctx_.index(*b))) out[j.level.index] = true;
  }
  return out;
}

LevelSet Checker::direct_levels(const VarTypes& g, const Stmt& s) const {
  const Lattice& l = ctx_.lattice();
  const std::size_t n = l.size();
  auto meet = [](LevelSet a, const LevelSet& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && b[i];
    return a;
  };
  return std::visit(
      [&](const auto& x) -> LevelSet {
        using T = std::decay_t<decltype(x)>;
        LevelSet none(n, false);
        if constexpr (std::is_same_v<T, Skip> || std::is_same_v<T, Throw>) {
          none[l.top().index] = true;
          return none;
        } else if constexpr (std::is_same_v<T, Seq>) {
          return meet(cmd_levels(g, *x.first), cmd_levels(g, *x.second));
        } else if constexpr (std::is_same_v<T, If>) {
          return meet(meet(plain_levels(derivable(g, *x.cond)), cmd_levels(g, *x.then_branch)),
                      cmd_levels(g, *x.else_branch));
        } else if constexpr (std::is_same_v<T, While>) {
          return meet(plain_levels(derivable(g, *x.cond)), cmd_levels(g, *x.body));
        } else if constexpr (std::is_same_v<T, DeclVar>) {
          if (!x.annotation) return none;
          auto b = ctx_.resolve(*x.annotation);
          if (!b || !check_expr(g, *x.init, *b)) return none;
          return cmd_levels(g.prepend(x.name, *b), *x.body);
        } else if constexpr (std::is_same_v<T, Assign>) {
          if (x.target.this_field) return this_field_levels(g, x.target.name, *x.rhs);
          const BaseType* t = g.lookup(x.target.name);
          if (t && check_expr(g, *x.rhs, *t)) none[t->level.index] = true;
          return none;
        } else {
          LevelSet bal = balance_levels(g);
          LevelSet amt = plain_levels(derivable(g, *x.amount));
          std::vector<TypeSet> args;
          for (const auto& a : x.args) args.push_back(derivable(g, *a));
          for (const auto& c : method_candidates(g, *x.target, x.method)) {
            if (c.sig.params.size() != args.size()) continue;
            bool good = true;
            for (std::size_t i = 0; i < args.size() && good; ++i)
              good = args[i].has(ctx_.index(c.sig.params[i]));
            if (!good) continue;
            for (Level v : l.levels())
              if (l.leq(v, c.sig.level) && bal[v.index] && amt[v.index]) none[v.index] = true;
          }
          return none;
        }
      },
      s.node);
}

LevelSet Checker::cmd_levels(const VarTypes& g, const Stmt& s) const {
  return downclose(direct_levels(g, s));
}

bool Checker::check_stmt(const VarTypes& g, const Stmt& s, Level lv) const {
  return cmd_levels(g, s)[lv.index];
}

std::optional<Level> Checker::maximal_cmd(const VarTypes& g, const Stmt& s) const {
  const Lattice& l = ctx_.lattice();
  LevelSet c = cmd_levels(g, s);
  std::vector<Level> in;
  for (Level v : l.levels())
    if (c[v.index]) in.push_back(v);
  for (Level v : in)
    if (std::all_of(in.begin(), in.end(), [&](Level u) { return l.leq(u, v); })) return v;
  for (Level v : in)
    if (std::none_of(in.begin(), in.end(), [&](Level u) { return u != v && l.leq(v, u); })) return v;
  return std::nullopt;
}

// ---- expression derivations -------------------------------------------------

Derivation Checker::derive_expr(const VarTypes& g, const Expr& e, const BaseType& b) const {
  TypeSet n = natural(g, e);
  if (n.has(ctx_.index(b))) return direct_expr(g, e, b);
  if (std::holds_alternative<OpApp>(e.node) && b.is_iface()) return direct_expr(g, e, b);
  const std::string body = text(e) + " : " + ctx_.show(b);
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n.has(i) && ctx_.sub(ctx_.at(i), b)) {
      BaseType from = ctx_.at(i);
      return node("t-subs-e", body, {direct_expr(g, e, from), ctx_.derive_sub(from, b)});
    }
  }
  // Failure: explain through the natural type closest in shape to b.
  std::optional<BaseType> best;
  int rank = 3;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!n.has(i)) continue;
    BaseType t = ctx_.at(i);
    int r = t.iface == b.iface ? 0 : t.is_iface() == b.is_iface() ? 1 : 2;
    if (r < rank) {
      rank = r;
      best = t;
    }
  }
  if (!best) return direct_expr(g, e, b);
  return node("t-subs-e", body, {direct_expr(g, e, *best), ctx_.derive_sub(*best, b)});
}

Derivation Checker::direct_expr(const VarTypes& g, const Expr& e, const BaseType& b) const {
  const std::string body = text(e) + " : " + ctx_.show(b);
  return std::visit(
      [&](const auto& n) -> Derivation {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Lit>) {
          if (!is_addr(n.value)) {
            if (!b.is_iface()) return ok_leaf("t-val", body);
            return fail_leaf("t-val", body, "only addresses have interface types", "KindMismatch");
          }
          const std::string& x = as_addr(n.value);
          const BaseType* t = ctx_.address_type(x);
          if (!t) return fail_leaf("t-val", body, x + " ∉ dom(Γ)", "UnboundName");
          const std::string have = "Γ(" + x + ") = " + ctx_.show(*t);
          return node("t-val", body,
                      {side(*t == b, have, have + ", not " + ctx_.show(b), "TypeMismatch")});
        } else if constexpr (std::is_same_v<T, VarRef> || std::is_same_v<T, MagicRef>) {
          const std::string x = magic_or_var(e);
          const std::string box = x + " : <" + ctx_.show(b) + "> var";
          const BaseType* t = g.lookup(x);
          Derivation c;
          if (!t)
            c = fail_leaf("t-box-x", box, x + " ∉ dom(Γ)", "UnboundName");
          else if (!(*t == b))
            c = fail_leaf("t-box-x", box, "Γ(" + x + ") = <" + ctx_.show(*t) + "> var", "TypeMismatch");
          else
            c = ok_leaf("t-box-x", box);
          return node("t-var", body, {std::move(c)});
        } else if constexpr (std::is_same_v<T, FieldRead>) {
          const std::string box = text(e) + " : <" + ctx_.show(b) + "> var";
          // A path type that yields b, natural ones first.
          TypeSet np = natural(g, *n.target);
          TypeSet dp = derivable(g, *n.target);
          std::vector<BaseType> order;
          for (std::size_t i = 0; i < np.size(); ++i)
            if (np.has(i)) order.push_back(ctx_.at(i));
          for (std::size_t i = 0; i < dp.size(); ++i)
            if (dp.has(i) && !np.has(i)) order.push_back(ctx_.at(i));
          for (const BaseType& j : order) {
            if (!j.is_iface() || j.level != b.level) continue;
            const IfaceEnv* env = ctx_.iface(j);
            const BaseType* f = env ? env->field(n.field) : nullptr;
            if (f && *f == b) {
              const std::string jn = ctx_.show(j);
              return node("t-field", body,
                          {node("t-box-f", box,
                                {derive_expr(g, *n.target, j),
                                 side(true, "Γ(" + jn + ")(" + n.field + ") = <" + ctx_.show(b) + "> var", "", ""),
                                 side(true, ctx_.show(b) + " ⤳ " + ctx_.lattice().name(j.level), "", "")})});
            }
          }
          // Failure through the target's natural interface type.
          TypeSet nt = natural(g, *n.target);
          std::optional<BaseType> j;
          for (std::size_t i = 0; i < nt.size() && !j; ++i)
            if (nt.has(i) && ctx_.at(i).is_iface()) j = ctx_.at(i);
          if (!j) {
            bool any = !nt.empty();
            Derivation c = any ? fail_leaf("t-box-f", box, text(*n.target) + " is not an address",
                                           "KindMismatch")
                               : node("t-box-f", box,
                                      {direct_expr(g, *n.target,
                                                   BaseType{std::string(kTopInterface),
                                                            ctx_.lattice().top()})});
            return node("t-field", body, {std::move(c)});
          }
          const std::string jn = ctx_.show(*j);
          const IfaceEnv* env = ctx_.iface(*j);
          const BaseType* f = env ? env->field(n.field) : nullptr;
          std::vector<Derivation> cs{derive_expr(g, *n.target, *j)};
          if (!f) {
            cs.push_back(side(false, "", n.field + " ∉ dom(Γ(" + jn + "))", "MissingMember"));
          } else {
            const std::string have = "Γ(" + jn + ")(" + n.field + ") = <" + ctx_.show(*f) + "> var";
            if (!(*f == b)) {
              cs.push_back(side(false, "", have + ", not <" + ctx_.show(b) + "> var", "TypeMismatch"));
            } else {
              cs.push_back(side(true, have, "", ""));
              cs.push_back(side(false, "",
                                ctx_.show(*f) + " ⤳ " + ctx_.lattice().name(f->level) + ", not " +
                                    ctx_.lattice().name(j->level),
                                "PathLevelMismatch"));
            }
          }
          return node("t-field", body, {node("t-box-f", box, std::move(cs))});
        } else {
          if (b.is_iface())
            return fail_leaf("t-op", body, "operations do not return addresses", "AddressArithmetic");
          std::vector<Derivation> cs;
          for (const auto& a : n.args) {
            TypeSet d = derivable(g, *a);
            std::optional<BaseType> pick;
            BaseType plain{"", b.level};
            if (d.has(ctx_.index(plain))) pick = plain;
            for (std::size_t i = 0; i < d.size() && !pick; ++i)
              if (d.has(i) && ctx_.at(i).level == b.level) pick = ctx_.at(i);
            if (!pick) {
              auto m = minimal_type(g, *a);
              pick = (m && m->is_iface()) ? BaseType{m->iface, b.level} : plain;
            }
            cs.push_back(derive_expr(g, *a, *pick));
          }
          return node("t-op", body, std::move(cs));
        }
      },
      e.node);
}

// ---- statement derivations --------------------------------------------------

Derivation Checker::derive_stmt(const VarTypes& g, const Stmt& s, Level lv) const {
  const Lattice& l = ctx_.lattice();
  LevelSet d = direct_levels(g, s);
  if (d[lv.index]) return direct_stmt(g, s, lv);
  // Least directly derivable level above lv.
  std::optional<Level> from;
  for (Level v : l.levels()) {
    if (!d[v.index] || !l.leq(lv, v)) continue;
    if (!from || l.leq(v, *from)) from = v;
  }
  if (!from) return direct_stmt(g, s, lv);
  return node("t-subs-s", text(s) + " : " + l.name(lv) + " cmd",
              {direct_stmt(g, s, *from), ctx_.derive_sub(CmdType{*from}, CmdType{lv})});
}

Derivation Checker::derive_this_field(const VarTypes& g, const std::string& p,
                                      const std::optional<BaseType>& want) const {
  const std::string shown = want ? "<" + ctx_.show(*want) + "> var" : "<?> var";
  const std::string box = "this." + p + " : " + shown;
  std::vector<BaseType> paths = this_paths(ctx_, g, opts_.permissive_this);
  if (paths.empty()) return fail_leaf("t-box-f", box, "this ∉ dom(Γ)", "UnboundName");
  BaseType path = paths.front();
  if (want) {
    for (const BaseType& j : paths) {
      const IfaceEnv* env = ctx_.iface(j);
      const BaseType* f = env ? env->field(p) : nullptr;
      if (f && *f == *want && f->level == j.level) {
        path = j;
        break;
      }
    }
  }
  const std::string jn = ctx_.show(path);
  const IfaceEnv* env = ctx_.iface(path);
  const BaseType* f = env ? env->field(p) : nullptr;
  Derivation this_d = derive_expr(g, *make_magic(Magic::This), path);
  std::vector<Derivation> cs{std::move(this_d)};
  if (!f) {
    cs.push_back(side(false, "", p + " ∉ dom(Γ(" + jn + "))", "MissingMember"));
  } else {
    const std::string have = "Γ(" + jn + ")(" + p + ") = <" + ctx_.show(*f) + "> var";
    if (want && !(*f == *want)) {
      cs.push_back(side(false, "", have + ", not " + shown, "TypeMismatch"));
    } else {
      cs.push_back(side(true, have, "", ""));
      const std::string lvn = ctx_.lattice().name(path.level);
      cs.push_back(side(f->level == path.level, ctx_.show(*f) + " ⤳ " + lvn,
                        ctx_.show(*f) + " ⤳ " + ctx_.lattice().name(f->level) + ", not " + lvn,
                        "PathLevelMismatch"));
    }
  }
  const std::string body = "this." + p + " : " + (f && !want ? "<" + ctx_.show(*f) + "> var" : shown);
  return node("t-box-f", body, std::move(cs));
}

Derivation Checker::derive_method_type(const VarTypes& g, const Expr& target, const std::string& f,
                                       const MethodCandidate& c, Level lv) const {
  const std::string jn = ctx_.show(c.path);
  const std::string sig = ctx_.show(SecType{c.sig});
  Derivation meth = node("t-meth", text(target) + "." + f + " : " + sig,
                         {derive_expr(g, target, c.path),
                          side(true, "Γ(" + jn + ")(" + f + ") = " + sig, "", "")});
  if (c.sig.level == lv) return meth;
  ProcType want{c.sig.params, lv};
  return node("t-m-sub", text(target) + "." + f + " : " + ctx_.show(SecType{want}),
              {std::move(meth), ctx_.derive_sub(SecType{c.sig}, SecType{want})});
}

Derivation Checker::derive_call(const VarTypes& g, const Call& c, Level lv,
                                const std::string& txt) const {
  const Lattice& l = ctx_.lattice();
  const std::string body = txt + " : " + l.name(lv) + " cmd";
  auto cands = method_candidates(g, *c.target, c.method);
  LevelSet bal = balance_levels(g);
  const bool amount_ok = check_expr(g, *c.amount, BaseType{"", lv});

  auto args_ok = [&](const ProcType& sig) {
    if (sig.params.size() != c.args.size()) return false;
    for (std::size_t i = 0; i < c.args.size(); ++i)
      if (!check_expr(g, *c.args[i], sig.params[i])) return false;
    return true;
  };

  std::optional<MethodCandidate> chosen;
  for (const auto& m : cands)
    if (l.leq(lv, m.sig.level) && args_ok(m.sig) && bal[lv.index] && amount_ok) {
      chosen = m;
      break;
    }
  if (!chosen)
    for (const auto& m : cands)
      if (l.leq(lv, m.sig.level) && args_ok(m.sig)) {
        chosen = m;
        break;
      }
  if (!chosen)
    for (const auto& m : cands)
      if (l.leq(lv, m.sig.level)) {
        chosen = m;
        break;
      }

  std::vector<Derivation> cs;
  std::optional<ProcType> sig;
  const std::string member = text(*c.target) + "." + c.method;
  if (chosen) {
    cs.push_back(derive_method_type(g, *c.target, c.method, *chosen, lv));
    sig = chosen->sig;
  } else {
    ProcType want_lv{{}, lv};
    TypeSet nt = natural(g, *c.target);
    std::optional<BaseType> j;
    for (std::size_t i = 0; i < nt.size() && !j; ++i)
      if (nt.has(i) && ctx_.at(i).is_iface()) j = ctx_.at(i);
    if (!j) {
      const std::string mb = member + " : <..> -> " + l.name(lv) + " cmd";
      if (!nt.empty())
        cs.push_back(fail_leaf("t-meth", mb, text(*c.target) + " is not an address", "KindMismatch"));
      else
        cs.push_back(node("t-meth", mb,
                          {direct_expr(g, *c.target, BaseType{std::string(kTopInterface), l.top()})}));
    } else {
      const std::string jn = ctx_.show(*j);
      const IfaceEnv* env = ctx_.iface(*j);
      const ProcType* m = env ? env->method(c.method) : nullptr;
      if (m && m->level == j->level) {
        cs.push_back(derive_method_type(g, *c.target, c.method, MethodCandidate{*j, *m}, lv));
        sig = *m;
      } else {
        std::vector<Derivation> mc{derive_expr(g, *c.target, *j)};
        if (!m) {
          mc.push_back(side(false, "", c.method + " ∉ dom(Γ(" + jn + "))", "MissingMember"));
        } else {
          mc.push_back(side(false, "",
                            "Γ(" + jn + ")(" + c.method + ") = " + ctx_.show(SecType{*m}) +
                                ", whose level is not " + l.name(j->level),
                            "PathLevelMismatch"));
          sig = *m;
        }
        cs.push_back(node("t-meth", member + " : <..> -> " + l.name(lv) + " cmd", std::move(mc)));
      }
    }
  }
  if (g.lookup("this")) cs.push_back(derive_this_field(g, "balance", BaseType{"", lv}));
  if (sig) {
    if (sig->params.size() != c.args.size()) {
      cs.push_back(side(false, "",
                        "|e⃗| = " + std::to_string(c.args.size()) + " but |B⃗| = " +
                            std::to_string(sig->params.size()),
                        "ArityMismatch"));
    } else {
      for (std::size_t i = 0; i < c.args.size(); ++i)
        cs.push_back(derive_expr(g, *c.args[i], sig->params[i]));
    }
  }
  cs.push_back(derive_expr(g, *c.amount, BaseType{"", lv}));
  return node("t-call", body, std::move(cs));
}

Derivation Checker::direct_stmt(const VarTypes& g, const Stmt& s, Level lv) const {
  const Lattice& l = ctx_.lattice();
  const std::string body = text(s) + " : " + l.name(lv) + " cmd";
  const BaseType lvt{"", lv};
  return std::visit(
      [&](const auto& x) -> Derivation {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Skip>) {
          return ok_leaf("t-skip", "skip : " + l.name(l.top()) + " cmd");
        } else if constexpr (std::is_same_v<T, Throw>) {
          return ok_leaf("t-throw", "throw : " + l.name(l.top()) + " cmd");
        } else if constexpr (std::is_same_v<T, Seq>) {
          return node("t-seq", body, {derive_stmt(g, *x.first, lv), derive_stmt(g, *x.second, lv)});
        } else if constexpr (std::is_same_v<T, If>) {
          return node("t-if", body,
                      {derive_expr(g, *x.cond, lvt), derive_stmt(g, *x.then_branch, lv),
                       derive_stmt(g, *x.else_branch, lv)});
        } else if constexpr (std::is_same_v<T, While>) {
          return node("t-loop", body, {derive_expr(g, *x.cond, lvt), derive_stmt(g, *x.body, lv)});
        } else if constexpr (std::is_same_v<T, DeclVar>) {
          if (!x.annotation)
            return node("t-decvar", body,
                        {side(false, "", "variable " + x.name + " has no type annotation",
                              "MissingAnnotation")});
          auto b = ctx_.resolve(*x.annotation);
          if (!b)
            return node("t-decvar", body,
                        {side(false, "", "cannot resolve type " + to_string(*x.annotation),
                              "UnknownType")});
          return node("t-decvar", body,
                      {derive_expr(g, *x.init, *b), derive_stmt(g.prepend(x.name, *b), *x.body, lv)});
        } else if constexpr (std::is_same_v<T, Assign>) {
          if (x.target.this_field) {
            // Box type of this.p: prefer one at level lv that the rhs fits.
            std::optional<BaseType> want;
            int best = 3;
            for (const BaseType& j : this_paths(ctx_, g, opts_.permissive_this)) {
              const IfaceEnv* env = ctx_.iface(j);
              const BaseType* f = env ? env->field(x.target.name) : nullptr;
              if (!f || f->level != j.level) continue;
              int r = (j.level == lv ? 0 : 1) + (check_expr(g, *x.rhs, *f) ? 0 : 1);
              if (r < best) {
                best = r;
                want = *f;
              }
            }
            Derivation box = derive_this_field(g, x.target.name, want);
            std::vector<Derivation> cs{box};
            if (want) {
              cs.push_back(derive_expr(g, *x.rhs, *want));
              cs.push_back(side(want->level == lv, ctx_.show(*want) + " ⤳ " + l.name(lv),
                                ctx_.show(*want) + " ⤳ " + l.name(want->level) + ", not " + l.name(lv),
                                "LevelMismatch"));
            }
            return node("t-ass-f", body, std::move(cs));
          }
          const std::string& n = x.target.name;
          const BaseType* t = g.lookup(n);
          if (!t)
            return node("t-ass-v", body,
                        {fail_leaf("t-box-x", n + " : <?> var", n + " ∉ dom(Γ)", "UnboundName")});
          return node("t-ass-v", body,
                      {ok_leaf("t-box-x", n + " : <" + ctx_.show(*t) + "> var"),
                       derive_expr(g, *x.rhs, *t),
                       side(t->level == lv, ctx_.show(*t) + " ⤳ " + l.name(lv),
                            ctx_.show(*t) + " ⤳ " + l.name(t->level) + ", not " + l.name(lv),
                            "LevelMismatch")});
        } else {
          return derive_call(g, x, lv, text(s));
        }
      },
      s.node);
}

// ---- declarations -----------------------------------------------------------

const ProcType* Checker::signature(const std::string& x, const std::string& f) const {
  const BaseType* t = ctx_.address_type(x);
  const IfaceEnv* env = t ? ctx_.iface(*t) : nullptr;
  return env ? env->method(f) : nullptr;
}

std::optional<VarTypes> Checker::method_gamma(const std::string& x, const MethodDecl& m) const {
  const BaseType* t = ctx_.address_type(x);
  const ProcType* sig = signature(x, m.name);
  if (!t || !sig || sig->params.size() != m.params.size()) return std::nullopt;
  VarTypes g = VarTypes{}.prepend("this", *t);
  for (std::size_t i = 0; i < m.params.size(); ++i) g = g.prepend(m.params[i], sig->params[i]);
  g = g.prepend("value", BaseType{"", sig->level});
  g = g.prepend("sender", BaseType{std::string(kTopInterface), ctx_.lattice().top()});
  return g;
}

Derivation Checker::derive_method(const std::string& x, const std::string& f,
                                  const std::vector<std::string>& params, const Stmt& body) const {
  std::string head = x + "." + f + "(";
  for (std::size_t i = 0; i < params.size(); ++i) head += (i ? ", " : "") + params[i];
  head += ") { ... }";
  const BaseType* t = ctx_.address_type(x);
  if (!t) return node("t-dec-m", head, {side(false, "", x + " ∉ dom(Γ)", "MissingContractType")});
  const std::string tn = ctx_.show(*t);
  std::vector<Derivation> cs{side(true, "Γ(this) = <" + tn + "> var", "", "")};
  const ProcType* sig = signature(x, f);
  if (!sig) {
    cs.push_back(side(false, "", f + " ∉ dom(Γ(" + tn + "))", "MissingMember"));
    return node("t-dec-m", head, std::move(cs));
  }
  cs.push_back(side(true, "Γ(" + tn + ")(" + f + ") = " + ctx_.show(SecType{*sig}), "", ""));
  if (sig->params.size() != params.size()) {
    cs.push_back(side(false, "",
                      "|x⃗| = " + std::to_string(params.size()) + " but |B⃗| = " +
                          std::to_string(sig->params.size()),
                      "ArityMismatch"));
    return node("t-dec-m", head, std::move(cs));
  }
  VarTypes g = VarTypes{}.prepend("this", *t);
  cs.push_back(derive_this_field(g, "balance", BaseType{"", sig->level}));
  MethodDecl m{f, params, nullptr, {}};
  cs.push_back(derive_stmt(*method_gamma(x, m), body, sig->level));
  return node("t-dec-m", head, std::move(cs));
}

Derivation Checker::derive_contract(const ContractDecl& c) const {
  const BaseType* t = ctx_.address_type(c.address);
  const std::string head = "contract " + c.address + (t ? " : " + ctx_.show(*t) : std::string());
  if (!t)
    return node("t-dec-c", head, {side(false, "", c.address + " has no interface type", "MissingContractType")});
  const std::string tn = ctx_.show(*t);
  const IfaceEnv* env = ctx_.iface(*t);
  std::vector<Derivation> cs{side(true, "Γ(" + c.address + ") = " + tn, "", "")};
  for (const auto& f : c.fields) {
    bool in = env && env->field(f.name);
    cs.push_back(node("t-dec-f", "field " + f.name + " := " + to_string(f.init),
                      {side(in, f.name + " ∈ dom(Γ(" + tn + "))", f.name + " ∉ dom(Γ(" + tn + "))",
                            "MissingMember")}));
  }
  for (const auto& m : c.methods) cs.push_back(derive_method(c.address, m.name, m.params, *m.body));
  return node("t-dec-c", head, std::move(cs));
}

namespace {

StmtPtr transaction_call(const Transaction& t) {
  std::vector<ExprPtr> args;
  for (const auto& v : t.args) args.push_back(make_lit(v, t.span));
  return make_stmt(Call{make_lit(addr(t.callee), t.span), t.method, std::move(args),
                        make_lit(nat(t.amount), t.span)},
                   t.span);
}

}  // namespace

LevelSet Checker::transaction_levels(const Transaction& t) const {
  return cmd_levels(VarTypes{}, *transaction_call(t));
}

Derivation Checker::derive_transaction(const Transaction& t, std::optional<Level> lv) const {
  const Lattice& l = ctx_.lattice();
  StmtPtr call = transaction_call(t);
  if (!lv) {
    lv = maximal_cmd(VarTypes{}, *call);
    if (!lv) lv = l.bottom();
  }
  std::vector<Derivation> cs{derive_stmt(VarTypes{}, *call, *lv)};
  return node("t-trans", print_transaction(t) + " : " + l.name(*lv) + " cmd", std::move(cs));
}

// ---- whole programs ---------------------------------------------------------

namespace {

std::string failure_text(const Derivation& d) {
  const Derivation* f = first_failure(d);
  return f ? (f->failure.empty() ? f->judgment : f->failure) : std::string();
}

std::string failure_code(const Derivation& d) {
  const Derivation* f = first_failure(d);
  return f && !f->code.empty() ? f->code : "TypeError";
}

}  // namespace

TypeReport check_program(const Blockchain& b, const std::map<std::string, BaseTypeExpr>& levels,
                         TypeOptions opts) {
  TypeReport r;
  r.errors = validate_program(b);
  if (!r.errors.empty()) return r;
  std::vector<ContextError> ce;
  TypeContext ctx(b, levels, ce);
  for (auto& e : ce) r.errors.push_back({e.code, e.message, e.span, false});
  if (!r.errors.empty()) return r;
  for (auto& d : check_kinds(b, ctx)) r.errors.push_back(std::move(d));

  Checker ck(ctx, opts);
  for (const auto& c : b.contracts) {
    Derivation d = ck.derive_contract(c);
    if (!d.ok) {
      // One diagnostic per failing field or method.
      std::size_t k = 1;
      for (const auto& f : c.fields) {
        const Derivation& fd = d.children[k++];
        if (!fd.ok)
          r.errors.push_back({failure_code(fd), c.address + "." + f.name + ": " + failure_text(fd), f.span});
      }
      for (const auto& m : c.methods) {
        const Derivation& md = d.children[k++];
        if (!md.ok)
          r.errors.push_back({failure_code(md), c.address + "." + m.name + ": " + failure_text(md), m.span});
      }
    }
    r.derivations.emplace_back("contract " + c.address, std::move(d));

    // Every interface member should have an implementation.
    const BaseType* t = ctx.address_type(c.address);
    const IfaceEnv* env = t ? ctx.iface(*t) : nullptr;
    if (!env) continue;
    for (const auto& name : env->order) {
      std::string missing;
      if (env->field(name)) {
        if (!c.field(name)) missing = "field " + name;
      } else if (const ProcType* p = env->method(name)) {
        const MethodDecl* m = c.method(name);
        if (!m)
          missing = "method " + name;
        else if (m->params.size() != p->params.size())
          missing = "method " + name + " with " + std::to_string(p->params.size()) + " parameter(s)";
      }
      if (missing.empty()) continue;
      Diagnostic dg{"MissingImplementation",
                    "contract " + c.address + " does not implement " + missing + " of " + ctx.show(*t),
                    c.span, !opts.strict_impl};
      (opts.strict_impl ? r.errors : r.warnings).push_back(std::move(dg));
    }
  }

  // t-trans at the greatest level common to all transactions, ending in t-empty.
  if (!b.transactions.empty()) {
    const Lattice& l = ctx.lattice();
    LevelSet common(l.size(), true);
    for (const auto& t : b.transactions) {
      LevelSet s = ck.transaction_levels(t);
      for (std::size_t i = 0; i < s.size(); ++i) common[i] = common[i] && s[i];
    }
    const std::vector<Level> all = l.levels();
    Level lv = l.bottom();
    for (Level v : all)
      if (common[v.index] && std::all_of(all.begin(), all.end(), [&](Level u) {
            return !common[u.index] || !l.leq(v, u) || u == v;
          }))
        lv = v;
    Derivation chain = ok_leaf("t-empty", "ε : " + l.name(lv) + " cmd");
    for (std::size_t i = b.transactions.size(); i-- > 0;) {
      const Transaction& t = b.transactions[i];
      Derivation one = ck.derive_transaction(t, lv);
      if (!one.ok)
        r.errors.push_back({failure_code(one),
                            "transaction " + print_transaction(t) + ": " + failure_text(one), t.span});
      Derivation call = std::move(one.children.front());
      chain = node("t-trans", print_transaction(t) + (i + 1 < b.transactions.size() ? ", ..." : "") +
                                  " : " + l.name(lv) + " cmd",
                   {std::move(call), std::move(chain)});
    }
    r.derivations.emplace_back("chain", std::move(chain));
  }
  r.accepted = r.errors.empty();
  return r;
}

// ---- program points ---------------------------------------------------------

namespace {

void walk_expr(const std::string& x, const std::string& f, const VarTypes& g, const ExprPtr& e,
               std::vector<ExprPoint>& out) {
  out.push_back({x, f, g, e});
  if (auto fr = std::get_if<FieldRead>(&e->node)) walk_expr(x, f, g, fr->target, out);
  if (auto op = std::get_if<OpApp>(&e->node))
    for (const auto& a : op->args) walk_expr(x, f, g, a, out);
}

void walk_stmt(const TypeContext& ctx, const std::string& x, const std::string& f, const VarTypes& g,
               const StmtPtr& s, std::vector<StmtPoint>& stmts, std::vector<ExprPoint>& exprs) {
  stmts.push_back({x, f, g, s});
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DeclVar>) {
          walk_expr(x, f, g, n.init, exprs);
          if (!n.annotation) return;
          if (auto b = ctx.resolve(*n.annotation))
            walk_stmt(ctx, x, f, g.prepend(n.name, *b), n.body, stmts, exprs);
        } else if constexpr (std::is_same_v<T, Assign>) {
          walk_expr(x, f, g, n.rhs, exprs);
        } else if constexpr (std::is_same_v<T, Seq>) {
          walk_stmt(ctx, x, f, g, n.first, stmts, exprs);
          walk_stmt(ctx, x, f, g, n.second, stmts, exprs);
        } else if constexpr (std::is_same_v<T, If>) {
          walk_expr(x, f, g, n.cond, exprs);
          walk_stmt(ctx, x, f, g, n.then_branch, stmts, exprs);
          walk_stmt(ctx, x, f, g, n.else_branch, stmts, exprs);
        } else if constexpr (std::is_same_v<T, While>) {
          walk_expr(x, f, g, n.cond, exprs);
          walk_stmt(ctx, x, f, g, n.body, stmts, exprs);
        } else if constexpr (std::is_same_v<T, Call>) {
          walk_expr(x, f, g, n.target, exprs);
          for (const auto& a : n.args) walk_expr(x, f, g, a, exprs);
          walk_expr(x, f, g, n.amount, exprs);
        }
      },
      s->node);
}

}  // namespace

void program_points(const Blockchain& b, const Checker& c, std::vector<StmtPoint>& stmts,
                    std::vector<ExprPoint>& exprs) {
  for (const auto& k : b.contracts)
    for (const auto& m : k.methods)
      if (auto g = c.method_gamma(k.address, m))
        walk_stmt(c.context(), k.address, m.name, *g, m.body, stmts, exprs);
}

}  // namespace tinysol
