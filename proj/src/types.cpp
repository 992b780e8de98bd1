#include "tinysol/types.hpp"

#include <algorithm>
#include <sstream>

namespace tinysol {

std::string to_string(const BaseType& b, const Lattice& l) {
  if (!b.is_iface()) return l.name(b.level);
  return b.iface + "<" + l.name(b.level) + ">";
}

std::string to_string(const SecType& t, const Lattice& l) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BaseType>) {
          return to_string(n, l);
        } else if constexpr (std::is_same_v<T, BoxType>) {
          return "<" + to_string(n.content, l) + "> var";
        } else if constexpr (std::is_same_v<T, CmdType>) {
          return l.name(n.level) + " cmd";
        } else {
          std::string out = "<";
          for (std::size_t i = 0; i < n.params.size(); ++i)
            out += (i ? ", " : "") + to_string(n.params[i], l);
          return out + "> -> " + l.name(n.level) + " cmd";
        }
      },
      t);
}

const BaseType* IfaceEnv::field(const std::string& p) const {
  for (const auto& [n, b] : fields)
    if (n == p) return &b;
  return nullptr;
}

const ProcType* IfaceEnv::method(const std::string& f) const {
  for (const auto& [n, t] : methods)
    if (n == f) return &t;
  return nullptr;
}

// ---- derivations -----------------------------------------------------------

namespace {

void render_to(std::ostringstream& os, const Derivation& d, int depth) {
  os << std::string(static_cast<std::size_t>(depth) * 2, ' ') << (d.ok ? "[ok] " : "[FAIL] ")
     << d.rule << ": " << d.judgment;
  if (!d.ok && !d.failure.empty() && d.failure != d.judgment) os << "  -- " << d.failure;
  os << "\n";
  for (const auto& c : d.children) render_to(os, c, depth + 1);
}

}  // namespace

std::string render(const Derivation& d) {
  std::ostringstream os;
  render_to(os, d, 0);
  return os.str();
}

const Derivation* first_failure(const Derivation& d) {
  if (d.ok) return nullptr;
  for (const auto& c : d.children)
    if (const Derivation* f = first_failure(c)) return f;
  return &d;
}

std::vector<std::string> failing_path(const Derivation& d) {
  std::vector<std::string> out;
  for (const Derivation* p = &d; p && !p->ok;) {
    if (p->rule != "side") out.push_back(p->rule);
    const Derivation* next = nullptr;
    for (const auto& c : p->children)
      if (!c.ok) {
        next = &c;
        break;
      }
    p = next;
  }
  return out;
}

bool well_formed_failure(const Derivation& d) {
  if (d.ok) {
    return std::all_of(d.children.begin(), d.children.end(),
                       [](const Derivation& c) { return c.ok; });
  }
  if (d.children.empty()) return true;
  bool any_failing = false;
  for (const auto& c : d.children) {
    if (!well_formed_failure(c)) return false;
    any_failing = any_failing || !c.ok;
  }
  return any_failing;
}

// ---- type sets -------------------------------------------------------------

bool TypeSet::empty() const { return std::none_of(bits_.begin(), bits_.end(), [](bool b) { return b; }); }

void TypeSet::intersect(const TypeSet& o) {
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] = bits_[i] && o.bits_[i];
}

void TypeSet::unite(const TypeSet& o) {
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] = bits_[i] || o.bits_[i];
}

// ---- context ---------------------------------------------------------------

namespace {

IfaceEnv top_env(const Lattice& l, Level s) {
  IfaceEnv e;
  e.name = std::string(kTopInterface);
  e.level = s;
  e.fields.emplace_back("balance", BaseType{"", l.top()});
  e.methods.emplace_back("send", ProcType{{}, l.bottom()});
  e.order = {"balance", "send"};
  return e;
}

}  // namespace

TypeContext::TypeContext(const Blockchain& b, const std::map<std::string, BaseTypeExpr>& overrides,
                         std::vector<ContextError>& errors)
    : lattice_(b.lattice), n_(b.lattice.size()) {
  iface_names_.push_back(std::string(kTopInterface));
  for (const auto& d : b.interfaces)
    if (d.name != kTopInterface &&
        std::find(iface_names_.begin(), iface_names_.end(), d.name) == iface_names_.end())
      iface_names_.push_back(d.name);

  envs_.resize(iface_names_.size());
  declared_.assign(iface_names_.size(), true);
  for (Level s : lattice_.levels()) envs_[0].push_back(top_env(lattice_, s));

  for (std::size_t k = 1; k < iface_names_.size(); ++k) {
    const InterfaceDecl* d = b.interface(iface_names_[k]);
    for (Level s : lattice_.levels()) {
      IfaceEnv e;
      e.name = d->name;
      e.level = s;
      auto resolve_in = [&](const BaseTypeExpr& t, const SourceSpan& span) -> std::optional<BaseType> {
        Level lv;
        if (d->param && t.level == *d->param) {
          lv = s;
        } else if (auto f = lattice_.find(t.level)) {
          lv = *f;
        } else {
          if (s == lattice_.bottom())
            errors.push_back({"UnknownLevel", "unknown level " + t.level + " in interface " + d->name,
                              span});
          return std::nullopt;
        }
        if (!t.iface.empty() &&
            std::find(iface_names_.begin(), iface_names_.end(), t.iface) == iface_names_.end()) {
          if (s == lattice_.bottom())
            errors.push_back({"UndeclaredInterface",
                              "undeclared interface " + t.iface + " in interface " + d->name, span});
          return std::nullopt;
        }
        return BaseType{t.iface, lv};
      };
      for (const auto& f : d->fields) {
        if (auto bt = resolve_in(f.type, f.span)) {
          e.fields.emplace_back(f.name, *bt);
          e.order.push_back(f.name);
        }
      }
      for (const auto& m : d->methods) {
        ProcType p;
        bool good = true;
        for (const auto& pt : m.params) {
          if (auto bt = resolve_in(pt, m.span))
            p.params.push_back(*bt);
          else
            good = false;
        }
        auto lv = resolve_in(BaseTypeExpr{"", m.level}, m.span);
        if (!lv) good = false;
        if (good) {
          p.level = lv->level;
          e.methods.emplace_back(m.name, p);
          e.order.push_back(m.name);
        }
      }
      envs_[k].push_back(std::move(e));
    }
  }

  for (const auto& c : b.contracts) {
    std::optional<BaseTypeExpr> t = c.type;
    if (auto it = overrides.find(c.address); it != overrides.end()) t = it->second;
    if (!t) {
      errors.push_back({"MissingContractType", "contract " + c.address + " has no interface type",
                        c.span});
      continue;
    }
    auto r = resolve(*t);
    if (!r || !r->is_iface()) {
      errors.push_back({"UnknownContractType",
                        "contract " + c.address + ": cannot resolve type " + to_string(*t), c.span});
      continue;
    }
    addresses_[c.address] = *r;
  }
  for (const auto& [addr, t] : overrides)
    if (!b.contract(addr))
      errors.push_back({"UndeclaredAddress", "level assignment for undeclared address " + addr, {}});

  compute_subtyping();
}

TypeContext::TypeContext(Lattice lattice,
                         std::vector<std::pair<std::string, std::vector<IfaceEnv>>> ifaces,
                         std::map<std::string, BaseType> addresses)
    : lattice_(std::move(lattice)), n_(lattice_.size()), addresses_(std::move(addresses)) {
  iface_names_.push_back(std::string(kTopInterface));
  envs_.emplace_back();
  for (Level s : lattice_.levels()) envs_[0].push_back(top_env(lattice_, s));
  for (auto& [name, envs] : ifaces) {
    iface_names_.push_back(name);
    envs_.push_back(std::move(envs));
  }
  declared_.assign(iface_names_.size(), true);
  compute_subtyping();
}

const BaseType* TypeContext::address_type(const std::string& x) const {
  auto it = addresses_.find(x);
  return it == addresses_.end() ? nullptr : &it->second;
}

const IfaceEnv* TypeContext::iface(const std::string& name, Level s) const {
  for (std::size_t k = 0; k < iface_names_.size(); ++k)
    if (iface_names_[k] == name) return &envs_[k][s.index];
  return nullptr;
}

std::optional<BaseType> TypeContext::resolve(const BaseTypeExpr& t) const {
  auto lv = lattice_.find(t.level);
  if (!lv) return std::nullopt;
  if (!t.iface.empty() &&
      std::find(iface_names_.begin(), iface_names_.end(), t.iface) == iface_names_.end())
    return std::nullopt;
  return BaseType{t.iface, *lv};
}

std::size_t TypeContext::index(const BaseType& b) const {
  if (!b.is_iface()) return b.level.index;
  for (std::size_t k = 0; k < iface_names_.size(); ++k)
    if (iface_names_[k] == b.iface) return n_ * (k + 1) + b.level.index;
  throw std::out_of_range("unknown interface " + b.iface);
}

BaseType TypeContext::at(std::size_t i) const {
  Level lv{static_cast<std::uint8_t>(i % n_)};
  if (i < n_) return BaseType{"", lv};
  return BaseType{iface_names_[i / n_ - 1], lv};
}

TypeSet TypeContext::all_levels() const {
  TypeSet s(universe());
  for (std::size_t i = 0; i < n_; ++i) s.add(i);
  return s;
}

TypeSet TypeContext::upclose(const TypeSet& s) const {
  const std::size_t u = universe();
  TypeSet out(u);
  for (std::size_t i = 0; i < u; ++i) {
    if (!s.has(i)) continue;
    for (std::size_t j = 0; j < u; ++j)
      if (rel_[i * u + j]) out.add(j);
  }
  return out;
}

bool TypeContext::env_sub(const IfaceEnv& a, const IfaceEnv& b, const std::vector<bool>& rel) const {
  const std::size_t u = universe();
  auto r = [&](const BaseType& x, const BaseType& y) { return rel[index(x) * u + index(y)]; };
  for (const auto& [p, bt] : b.fields) {
    const BaseType* at = a.field(p);
    if (!at || !r(*at, bt)) return false;
  }
  for (const auto& [f, pt] : b.methods) {
    const ProcType* at = a.method(f);
    if (!at || at->params.size() != pt.params.size()) return false;
    if (!lattice_.leq(pt.level, at->level)) return false;
    for (std::size_t i = 0; i < pt.params.size(); ++i)
      if (!r(at->params[i], pt.params[i])) return false;
  }
  return true;
}

// Least fixpoint: start from the level order and reflexivity, add subs-name
// pairs whose subs-env premise holds under the current relation, close
// transitively, repeat.
void TypeContext::compute_subtyping() {
  const std::size_t u = universe();
  rel_.assign(u * u, false);
  for (std::size_t i = 0; i < u; ++i) rel_[i * u + i] = true;
  for (Level a : lattice_.levels())
    for (Level b : lattice_.levels())
      if (lattice_.leq(a, b)) rel_[a.index * u + b.index] = true;

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = n_; i < u; ++i) {
      for (std::size_t j = n_; j < u; ++j) {
        if (rel_[i * u + j]) continue;
        BaseType a = at(i);
        BaseType b = at(j);
        if (!lattice_.leq(a.level, b.level)) continue;
        if (env_sub(*iface(a), *iface(b), rel_)) {
          rel_[i * u + j] = true;
          changed = true;
        }
      }
    }
    if (changed) {
      for (std::size_t k = 0; k < u; ++k)
        for (std::size_t i = 0; i < u; ++i)
          if (rel_[i * u + k])
            for (std::size_t j = 0; j < u; ++j)
              if (rel_[k * u + j]) rel_[i * u + j] = true;
    }
  }
}

bool TypeContext::subtype(const SecType& a, const SecType& b) const {
  if (a.index() != b.index()) return false;
  if (auto x = std::get_if<BaseType>(&a)) return sub(*x, std::get<BaseType>(b));
  if (auto x = std::get_if<BoxType>(&a)) return sub(x->content, std::get<BoxType>(b).content);
  if (auto x = std::get_if<CmdType>(&a)) return lattice_.leq(std::get<CmdType>(b).level, x->level);
  const auto& p = std::get<ProcType>(a);
  const auto& q = std::get<ProcType>(b);
  if (p.params.size() != q.params.size() || !lattice_.leq(q.level, p.level)) return false;
  for (std::size_t i = 0; i < p.params.size(); ++i)
    if (!sub(p.params[i], q.params[i])) return false;
  return true;
}

// ---- subtyping derivations -------------------------------------------------

namespace {

std::string sub_judgment(bool ok, const std::string& a, const std::string& b) {
  return std::string(ok ? "Γ ⊢ " : "Γ ⊬ ") + a + " <: " + b;
}

Derivation side(bool ok, const std::string& holds, const std::string& fails) {
  Derivation d{"side", ok ? holds : fails, ok, ok ? "" : fails, ok ? "" : "LevelOrder", {}};
  return d;
}

}  // namespace

Derivation TypeContext::derive_sub(const SecType& a, const SecType& b) const {
  std::vector<std::size_t> path;
  const std::string sa = show(a);
  const std::string sb = show(b);
  if (a.index() != b.index()) {
    return Derivation{"subs", sub_judgment(false, sa, sb), false,
                      "types of different forms are unrelated", "SubtypeFailure", {}};
  }
  if (auto x = std::get_if<BaseType>(&a)) return derive_base(*x, std::get<BaseType>(b), path);
  if (auto x = std::get_if<BoxType>(&a)) {
    Derivation c = derive_base(x->content, std::get<BoxType>(b).content, path);
    bool ok = c.ok;
    return Derivation{"subs-var", sub_judgment(ok, sa, sb), ok, "", "", {std::move(c)}};
  }
  if (auto x = std::get_if<CmdType>(&a)) {
    Level s2 = std::get<CmdType>(b).level;
    bool ok = lattice_.leq(s2, x->level);
    const std::string s1n = lattice_.name(x->level);
    const std::string s2n = lattice_.name(s2);
    return Derivation{"subs-cmd", sub_judgment(ok, sa, sb), ok, "", "",
                      {side(ok, s2n + " ⊑ " + s1n, s2n + " ⋢ " + s1n)}};
  }
  return derive_proc(std::get<ProcType>(a), std::get<ProcType>(b), path);
}

Derivation TypeContext::derive_proc(const ProcType& p, const ProcType& q,
                                    std::vector<std::size_t>& path) const {
  const std::string sa = show(SecType{p});
  const std::string sb = show(SecType{q});
  Derivation d{"subs-proc", "", true, "", "", {}};
  if (p.params.size() != q.params.size()) {
    d.children.push_back(Derivation{"side", "|B1| = |B2|", false,
                                    "parameter counts differ (" + std::to_string(p.params.size()) +
                                        " vs " + std::to_string(q.params.size()) + ")",
                                    "ArityMismatch", {}});
  } else {
    const std::string s1n = lattice_.name(p.level);
    const std::string s2n = lattice_.name(q.level);
    d.children.push_back(
        side(lattice_.leq(q.level, p.level), s2n + " ⊑ " + s1n, s2n + " ⋢ " + s1n));
    for (std::size_t i = 0; i < p.params.size(); ++i)
      d.children.push_back(derive_base(p.params[i], q.params[i], path));
  }
  d.ok = std::all_of(d.children.begin(), d.children.end(), [](const Derivation& c) { return c.ok; });
  d.judgment = sub_judgment(d.ok, sa, sb);
  return d;
}

Derivation TypeContext::derive_base(const BaseType& a, const BaseType& b,
                                    std::vector<std::size_t>& path) const {
  const std::string sa = show(a);
  const std::string sb = show(b);
  const bool holds = sub(a, b);
  if (a == b) return Derivation{"subs-refl", sub_judgment(true, sa, sb), true, "", "", {}};
  if (!a.is_iface() && !b.is_iface()) {
    return Derivation{"subs-sec", sub_judgment(holds, sa, sb), holds,
                      holds ? "" : sa + " ⋢ " + sb, holds ? "" : "LevelOrder", {}};
  }
  if (a.is_iface() != b.is_iface()) {
    return Derivation{"subs", sub_judgment(false, sa, sb), false,
                      "a level and an interface type are unrelated", "SubtypeFailure", {}};
  }
  const std::size_t key = index(a) * universe() + index(b);
  if (std::find(path.begin(), path.end(), key) != path.end()) {
    return Derivation{"subs-name", sub_judgment(holds, sa, sb), holds,
                      holds ? "" : "cyclic premise", holds ? "" : "SubtypeFailure", {}};
  }
  path.push_back(key);
  const IfaceEnv& ea = *iface(a);
  const IfaceEnv& eb = *iface(b);
  const bool direct = lattice_.leq(a.level, b.level) && env_sub(ea, eb, rel_);
  Derivation d;
  if (holds && !direct) {
    // Only by transitivity: go through an intermediate interface type.
    const std::size_t u = universe();
    for (std::size_t k = n_; k < u; ++k) {
      BaseType c = at(k);
      if (c == a || c == b || !sub(a, c) || !sub(c, b)) continue;
      if (!lattice_.leq(a.level, c.level) || !env_sub(ea, *iface(c), rel_)) continue;
      d = Derivation{"subs-trans", sub_judgment(true, sa, sb), true, "", "", {}};
      d.children.push_back(derive_base(a, c, path));
      d.children.push_back(derive_base(c, b, path));
      path.pop_back();
      return d;
    }
  }
  d.rule = "subs-name";
  const std::string la = lattice_.name(a.level);
  const std::string lb = lattice_.name(b.level);
  d.children.push_back(
      side(lattice_.leq(a.level, b.level), la + " ⊑ " + lb, la + " ⋢ " + lb));
  d.children.push_back(derive_env(ea, eb, path));
  d.ok = holds;
  d.judgment = sub_judgment(holds, sa, sb);
  path.pop_back();
  return d;
}

Derivation TypeContext::derive_env(const IfaceEnv& a, const IfaceEnv& b,
                                   std::vector<std::size_t>& path) const {
  const std::string na = "Γ(" + show(BaseType{a.name, a.level}) + ")";
  const std::string nb = "Γ(" + show(BaseType{b.name, b.level}) + ")";
  Derivation d{"subs-env", "", true, "", "", {}};
  for (const auto& n : b.order) {
    Derivation c;
    if (const BaseType* fb = b.field(n)) {
      const BaseType* fa = a.field(n);
      if (!fa) {
        c = Derivation{"side", n + " ∈ dom(" + na + ")", false, n + " ∉ dom(" + na + ")",
                       "MissingMember", {}};
      } else {
        Derivation inner = derive_base(*fa, *fb, path);
        bool ok = inner.ok;
        c = Derivation{"subs-var",
                       sub_judgment(ok, show(SecType{BoxType{*fa}}), show(SecType{BoxType{*fb}})),
                       ok, "", "", {std::move(inner)}};
      }
    } else if (const ProcType* mb = b.method(n)) {
      const ProcType* ma = a.method(n);
      if (!ma) {
        c = Derivation{"side", n + " ∈ dom(" + na + ")", false, n + " ∉ dom(" + na + ")",
                       "MissingMember", {}};
      } else {
        c = derive_proc(*ma, *mb, path);
      }
    }
    bool ok = c.ok;
    d.children.push_back(std::move(c));
    if (!ok) {
      d.ok = false;
      break;
    }
  }
  d.judgment = sub_judgment(d.ok, na, nb);
  return d;
}

}  // namespace tinysol
