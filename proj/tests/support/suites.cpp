#include "suites.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "tinysol/corpus.hpp"
#include "tinysol/equivalence.hpp"
#include "tinysol/parser.hpp"
#include "tinysol/printer.hpp"

namespace tinysol::suites {

namespace fs = std::filesystem;

fs::path corpus_dir() { return fs::path(TINYSOL_SOURCE_DIR) / "tests" / "corpus"; }

Blockchain load_fixture(const std::string& name) {
  return parse_program(read_file(corpus_dir() / name), name);
}

std::vector<std::pair<std::string, Blockchain>> load_corpus() {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(corpus_dir()))
    if (e.path().extension() == ".tsol") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::vector<std::pair<std::string, Blockchain>> out;
  for (const auto& n : names) out.emplace_back(n, load_fixture(n));
  return out;
}

Lattice diamond() { return Lattice({"L", "M1", "M2", "H"}, {{"L", "M1"}, {"L", "M2"}, {"M1", "H"}, {"M2", "H"}}); }

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

std::uint64_t small_nat(Rng& rng) { return std::uniform_int_distribution<std::uint64_t>(0, 7)(rng); }
bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// Thrown when no address has a subtype of the wanted interface type.
struct NoFit {};

Value fitting_address(const Subject& s, const BaseType* want, Rng& rng) {
  std::vector<std::string> fit;
  for (const auto& [x, t] : s.ctx->addresses())
    if (!want || !want->is_iface() || s.ctx->sub(t, *want)) fit.push_back(x);
  if (fit.empty()) throw NoFit{};
  return addr(pick(fit, rng));
}

// Γ ⊢ ρS, ρV with well-typed values; the method table was checked once per subject.
Agreement typed(const Subject& s, const State& st, const VarTypes& g, const VarEnv& v) {
  Agreement a = check_env_agreement(*s.checker, st, {}, g, v);
  return a ? check_value_types(*s.ctx, st, g, v) : a;
}

Value draw(const Subject& s, ValueKind k, const BaseType* type, Rng& rng) {
  switch (k) {
    case ValueKind::Nat: return nat(small_nat(rng));
    case ValueKind::Bool: return boolean(coin(rng));
    case ValueKind::Addr: return fitting_address(s, type, rng);
  }
  return nat(0);
}

const BaseType* field_type(const Subject& s, const std::string& x, const std::string& p) {
  const BaseType* t = s.ctx->address_type(x);
  const IfaceEnv* e = t ? s.ctx->iface(*t) : nullptr;
  return e ? e->field(p) : nullptr;
}

ValueKind var_kind(const Subject& s, const std::string& contract, const std::string& method,
                   const std::string& name, const BaseType* type) {
  if (name == "this" || name == "sender") return ValueKind::Addr;
  if (name == "value") return ValueKind::Nat;
  if (type && type->is_iface()) return ValueKind::Addr;
  if (const MethodDecl* m = s.b.contract(contract) ? s.b.contract(contract)->method(method) : nullptr) {
    auto ks = param_kinds(s.b, *s.ctx, contract, method);
    for (std::size_t i = 0; i < m->params.size(); ++i)
      if (m->params[i] == name && ks[i]) return *ks[i];
  }
  return ValueKind::Nat;
}

// Rebuilds an environment from (name, value) pairs listed head first.
VarEnv from_items(const std::vector<std::pair<std::string, Value>>& items) {
  VarEnv v;
  for (auto it = items.rbegin(); it != items.rend(); ++it) v = v.prepend(it->first, it->second);
  return v;
}

std::string one_line(const Stmt& s) {
  std::string t = print_stmt(s);
  std::replace(t.begin(), t.end(), '\n', ' ');
  if (t.size() > 80) t = t.substr(0, 77) + "...";
  return t;
}

std::string where(const Subject& s, const std::string& x, const std::string& f) {
  return s.name + " " + x + "." + f;
}

// ---- random statement snippets ---------------------------------------------

struct SnippetGen {
  const Blockchain& b;
  const ContractDecl& self;
  std::vector<std::string> params;
  Rng& rng;

  std::vector<std::string> fields_of(ValueKind k) const {
    std::vector<std::string> out;
    for (const auto& f : self.fields)
      if (kind_of(f.init) == k && f.name != "balance") out.push_back(f.name);
    return out;
  }

  std::string nat_expr(int depth) {
    switch (std::uniform_int_distribution<int>(0, depth > 0 ? 5 : 3)(rng)) {
      case 0: return std::to_string(small_nat(rng));
      case 1: {
        auto fs = fields_of(ValueKind::Nat);
        return fs.empty() ? "this.balance" : "this." + pick(fs, rng);
      }
      case 2: return params.empty() ? "value" : pick(params, rng);
      case 3: return "value";
      case 4: return nat_expr(depth - 1) + " + " + nat_expr(depth - 1);
      default: {
        const ContractDecl& c = pick(b.contracts, rng);
        return c.address + ".balance";
      }
    }
  }

  std::string bool_expr() {
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
      case 0: return nat_expr(1) + " < " + nat_expr(1);
      case 1: return nat_expr(0) + " = " + nat_expr(0);
      case 2: {
        auto fs = fields_of(ValueKind::Bool);
        return fs.empty() ? "true" : "this." + pick(fs, rng);
      }
      default: return coin(rng) ? "true" : "false";
    }
  }

  std::string call() {
    const ContractDecl& c = pick(b.contracts, rng);
    if (c.methods.empty()) return "skip";
    const MethodDecl& m = pick(c.methods, rng);
    std::string out = c.address + "." + m.name + "(";
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      if (i) out += ", ";
      out += coin(rng) ? pick(b.contracts, rng).address : nat_expr(0);
    }
    const char* amounts[] = {"0", "1", "value"};
    return out + "):" + amounts[std::uniform_int_distribution<int>(0, 2)(rng)];
  }

  std::string stmt(int depth) {
    switch (std::uniform_int_distribution<int>(0, depth > 0 ? 6 : 4)(rng)) {
      case 0: return "skip";
      case 1: return coin(rng, 0.3) ? "throw" : "skip";
      case 2: {
        auto ns = fields_of(ValueKind::Nat);
        auto bs = fields_of(ValueKind::Bool);
        if (!ns.empty() && (bs.empty() || coin(rng))) return "this." + pick(ns, rng) + " := " + nat_expr(1);
        if (!bs.empty()) return "this." + pick(bs, rng) + " := " + bool_expr();
        return "skip";
      }
      case 3:
      case 4: return call();
      case 5: return "if " + bool_expr() + " then { " + stmt(depth - 1) + " } else " + stmt(0);
      default: return "{ " + stmt(depth - 1) + "; " + stmt(depth - 1) + " }";
    }
  }
};

}  // namespace

// ---- subjects -----------------------------------------------------------------

namespace {

std::unique_ptr<Subject> make_subject(const std::string& name, const Blockchain& b,
                                      const std::map<std::string, BaseTypeExpr>& levels, bool require_typed,
                                      TypeOptions opts = {}) {
  std::vector<ContextError> errs;
  auto s = std::make_unique<Subject>();
  s->name = name;
  s->b = b;
  s->levels = levels;
  s->ctx = std::make_unique<TypeContext>(s->b, levels, errs);
  if (!errs.empty()) return nullptr;
  s->checker = std::make_unique<Checker>(*s->ctx, opts);
  auto [st, mt] = eval_declarations(s->b.contracts);
  s->genesis = st;
  s->methods = mt;
  if (require_typed && !check_env_agreement(*s->checker, st, mt)) return nullptr;
  program_points(s->b, *s->checker, s->stmts, s->exprs);
  for (const auto& p : s->stmts) s->stmt_levels.push_back(s->checker->cmd_levels(p.gamma, *p.stmt));
  return s;
}

}  // namespace

std::vector<std::unique_ptr<Subject>> make_subjects(std::uint64_t seed, int random_assignments,
                                                    TypeOptions opts) {
  Rng rng(seed);
  std::vector<std::unique_ptr<Subject>> out;
  for (const auto& [name, base] : load_corpus()) {
    std::vector<Lattice> lattices{base.lattice};
    if (!(base.lattice == diamond())) lattices.push_back(diamond());
    for (const Lattice& l : lattices) {
      Blockchain b = base;
      b.lattice = l;
      b.lattice_explicit = true;
      std::set<std::string> tried;
      std::vector<std::map<std::string, BaseTypeExpr>> plans{{}};
      for (int k = 0; k < random_assignments; ++k) {
        std::map<std::string, BaseTypeExpr> m;
        for (const auto& c : b.contracts)
          if (c.type && !c.type->iface.empty()) m[c.address] = {c.type->iface, pick(l.names(), rng)};
        plans.push_back(m);
      }
      for (const auto& plan : plans) {
        std::string label = name + (l == base.lattice ? "" : "@diamond");
        for (const auto& [x, t] : plan) label += " " + x + ":" + to_string(t);
        if (!tried.insert(label).second) continue;
        if (auto s = make_subject(label, b, plan, true, opts)) out.push_back(std::move(s));
      }
    }
  }
  return out;
}

std::vector<std::unique_ptr<Subject>> raw_subjects() {
  std::vector<std::unique_ptr<Subject>> out;
  for (const auto& [name, b] : load_corpus())
    if (auto s = make_subject(name, b, {}, false)) out.push_back(std::move(s));
  return out;
}

// ---- random environments ------------------------------------------------------

State random_state(const Subject& s, Rng& rng) {
  State out = s.genesis;
  for (auto& [x, fields] : out) {
    std::vector<std::pair<std::string, Value>> items;
    for (const auto& [p, v] : fields.items()) items.emplace_back(p, draw(s, kind_of(v), field_type(s, x, p), rng));
    fields = from_items(items);
  }
  return out;
}

VarEnv random_vars(const Subject& s, const std::string& contract, const std::string& method,
                   const VarTypes& g, Rng& rng) {
  std::vector<std::pair<std::string, Value>> items;
  for (const auto& [name, t] : g.items()) {
    if (name == "this")
      items.emplace_back(name, addr(contract));
    else
      items.emplace_back(name, draw(s, var_kind(s, contract, method, name, &t), &t, rng));
  }
  return from_items(items);
}

VarEnv perturb_vars(const Subject& s, const std::string& contract, const std::string& method,
                    const VarTypes& g, const VarEnv& v, Level lv, Rng& rng) {
  std::vector<std::pair<std::string, Value>> items;
  for (const auto& [name, val] : v.items()) {
    const BaseType* t = g.lookup(name);
    if (t && !s.ctx->lattice().leq(t->level, lv)) {
      items.emplace_back(name, draw(s, kind_of(val), t, rng));
    } else {
      items.emplace_back(name, val);
    }
  }
  return from_items(items);
}

State perturb_state(const Subject& s, const State& st, Level lv, Rng& rng) {
  State out = st;
  for (auto& [x, fields] : out) {
    std::vector<std::pair<std::string, Value>> items;
    for (const auto& [p, v] : fields.items()) {
      const BaseType* t = field_type(s, x, p);
      if (t && !s.ctx->lattice().leq(t->level, lv))
        items.emplace_back(p, draw(s, kind_of(v), t, rng));
      else
        items.emplace_back(p, v);
    }
    fields = from_items(items);
  }
  return out;
}

MethodTable perturb_methods(const Subject& s, const MethodTable& t, Level lv, Rng& rng) {
  MethodTable out = t;
  std::set<std::string> addrs;
  for (const auto& c : s.b.contracts) addrs.insert(c.address);
  for (auto& [x, methods] : out) {
    const BaseType* tx = s.ctx->address_type(x);
    const ContractDecl* self = s.b.contract(x);
    if (!tx || !self || s.ctx->lattice().leq(tx->level, lv)) continue;
    for (const auto& [f, def] : methods.items()) {
      if (!coin(rng)) continue;
      std::vector<StmtPtr> candidates;
      candidates.push_back(make_stmt(Skip{}));
      candidates.push_back(make_stmt(Throw{}));
      for (const auto& c : s.b.contracts)
        for (const auto& m : c.methods)
          if (m.params == def.params) candidates.push_back(m.body);
      SnippetGen gen{s.b, *self, def.params, rng};
      for (int k = 0; k < 3; ++k) {
        try {
          candidates.push_back(parse_statement(gen.stmt(2), def.params, addrs));
        } catch (const std::exception&) {
        }
      }
      std::shuffle(candidates.begin(), candidates.end(), rng);
      for (const auto& body : candidates)
        if (s.checker->derive_method(x, f, def.params, *body).ok) {
          methods = methods.update(f, MethodDef{def.params, body});
          break;
        }
    }
  }
  return out;
}

// ---- theorem suites -------------------------------------------------------------

namespace {

std::vector<Level> typed_levels(const LevelSet& ls) {
  std::vector<Level> out;
  for (std::size_t i = 0; i < ls.size(); ++i)
    if (ls[i]) out.push_back(Level{static_cast<std::uint8_t>(i)});
  return out;
}

// Draws (subject, statement point) pairs until enough cases held their premises.
template <class Body>
SuiteResult stmt_suite(const std::string& name, const std::vector<std::unique_ptr<Subject>>& subjects,
                       const SuiteConfig& c, Body body) {
  SuiteResult r;
  r.name = name;
  const auto t0 = Clock::now();
  std::vector<const Subject*> usable;
  for (const auto& s : subjects)
    if (!s->stmts.empty()) usable.push_back(s.get());
  if (usable.empty()) return r;
  Rng rng(c.seed);
  with_stack_for(c.fuel * 4, [&] {
    for (std::size_t draw = 0; draw < c.max_draws && r.cases < c.cases; ++draw) {
      const Subject& s = *pick(usable, rng);
      const std::size_t i = std::uniform_int_distribution<std::size_t>(0, s.stmts.size() - 1)(rng);
      std::vector<Level> lv = typed_levels(s.stmt_levels[i]);
      if (lv.empty()) {
        ++r.skipped;
        continue;
      }
      bool held = false;
      try {
        held = body(s, s.stmts[i], lv, rng, r);
      } catch (const NoFit&) {
      }
      held ? ++r.cases : ++r.skipped;
    }
  });
  r.seconds = since(t0);
  return r;
}

}  // namespace

SuiteResult preservation_suite(const std::vector<std::unique_ptr<Subject>>& subjects, const SuiteConfig& c) {
  return stmt_suite("preservation", subjects, c,
                    [&](const Subject& s, const StmtPoint& p, const std::vector<Level>& lv, Rng& rng,
                        SuiteResult& r) {
                      const Level s1 = pick(lv, rng);
                      State st = random_state(s, rng);
                      VarEnv v = random_vars(s, p.contract, p.method, p.gamma, rng);
                      if (Agreement a = typed(s, st, p.gamma, v); !a) {
                        r.fail("generator: " + a.detail);
                        return true;
                      }
                      Outcome o = exec_stmt_here(s.methods, st, v, *p.stmt, c.fuel);
                      if (!o.ok()) return false;
                      const Lattice& l = s.ctx->lattice();
                      for (Level s2 : l.levels()) {
                        if (l.leq(s1, s2)) continue;
                        EqResult a = s_equal(*s.ctx, p.gamma, v, o.vars, s2);
                        EqResult b = s_equal(*s.ctx, st, o.state, s2);
                        if (!a || !b)
                          r.fail(where(s, p.contract, p.method) + ": `" + one_line(*p.stmt) + "` : " +
                                 l.name(s1) + " cmd changed level " + l.name(s2) + ": " + (a ? b.detail : a.detail));
                      }
                      return true;
                    });
}

SuiteResult expression_safety_suite(const std::vector<std::unique_ptr<Subject>>& subjects, const SuiteConfig& c) {
  SuiteResult r;
  r.name = "expression safety";
  const auto t0 = Clock::now();
  std::vector<const Subject*> usable;
  for (const auto& s : subjects)
    if (!s->exprs.empty()) usable.push_back(s.get());
  if (usable.empty()) return r;
  Rng rng(c.seed);
  for (std::size_t draw = 0; draw < c.max_draws && r.cases < c.cases; ++draw) {
    const Subject& s = *pick(usable, rng);
    const ExprPoint& p = pick(s.exprs, rng);
    auto b = s.checker->minimal_type(p.gamma, *p.expr);
    if (!b) {
      ++r.skipped;
      continue;
    }
    State s1, s2;
    VarEnv v1, v2;
    try {
      s1 = random_state(s, rng);
      v1 = random_vars(s, p.contract, p.method, p.gamma, rng);
      s2 = perturb_state(s, s1, b->level, rng);
      v2 = perturb_vars(s, p.contract, p.method, p.gamma, v1, b->level, rng);
    } catch (const NoFit&) {
      ++r.skipped;
      continue;
    }
    if (Agreement a1 = typed(s, s1, p.gamma, v1), a2 = typed(s, s2, p.gamma, v2); !a1 || !a2) {
      r.fail("generator: " + (a1 ? a2.detail : a1.detail));
      continue;
    }
    ExprResult e1 = eval_expr(s1, v1, *p.expr);
    ExprResult e2 = eval_expr(s2, v2, *p.expr);
    if (!e1.value && !e2.value) {
      ++r.skipped;
      continue;
    }
    ++r.cases;
    if (!e1.value || !e2.value || !(*e1.value == *e2.value))
      r.fail(where(s, p.contract, p.method) + ": `" + print_expr(*p.expr) + "` : " + s.ctx->show(*b) + " gave " +
             (e1.value ? to_string(*e1.value) : "stuck") + " vs " + (e2.value ? to_string(*e2.value) : "stuck"));
  }
  r.seconds = since(t0);
  return r;
}

namespace {

SuiteResult soundness_impl(const std::string& name, const std::vector<std::unique_ptr<Subject>>& subjects,
                           const SuiteConfig& c, bool vary_code) {
  return stmt_suite(name, subjects, c,
                    [&](const Subject& s, const StmtPoint& p, const std::vector<Level>&, Rng& rng,
                        SuiteResult& r) {
                      const Lattice& l = s.ctx->lattice();
                      const Level s2 = pick(l.levels(), rng);
                      State st1 = random_state(s, rng);
                      VarEnv v1 = random_vars(s, p.contract, p.method, p.gamma, rng);
                      State st2 = perturb_state(s, st1, s2, rng);
                      VarEnv v2 = perturb_vars(s, p.contract, p.method, p.gamma, v1, s2, rng);
                      Agreement a1 = typed(s, st1, p.gamma, v1), a2 = typed(s, st2, p.gamma, v2);
                      if (!a1 || !a2) {
                        r.fail("generator: " + (a1 ? a2.detail : a1.detail));
                        return true;
                      }
                      MethodTable t2 = vary_code ? perturb_methods(s, s.methods, s2, rng) : s.methods;
                      if (vary_code && !s_equal(*s.ctx, s.methods, t2, s2)) {
                        r.fail("generator: method tables not " + l.name(s2) + "-equal");
                        return true;
                      }
                      Outcome o1 = exec_stmt_here(s.methods, st1, v1, *p.stmt, c.fuel);
                      if (!o1.ok()) return false;
                      Outcome o2 = exec_stmt_here(t2, st2, v2, *p.stmt, c.fuel);
                      if (!o2.ok()) return false;
                      EqResult a = s_equal(*s.ctx, p.gamma, o1.vars, o2.vars, s2);
                      EqResult b = s_equal(*s.ctx, o1.state, o2.state, s2);
                      if (!a || !b)
                        r.fail(where(s, p.contract, p.method) + ": `" + one_line(*p.stmt) + "` runs differ at " +
                               l.name(s2) + ": " + (a ? b.detail : a.detail));
                      return true;
                    });
}

}  // namespace

SuiteResult soundness_suite(const std::vector<std::unique_ptr<Subject>>& subjects, const SuiteConfig& c) {
  return soundness_impl("soundness", subjects, c, false);
}

SuiteResult extended_soundness_suite(const std::vector<std::unique_ptr<Subject>>& subjects, const SuiteConfig& c) {
  return soundness_impl("extended soundness", subjects, c, true);
}

// ---- semantics invariants -------------------------------------------------------

namespace {

bool same_outcome(const Outcome& a, const Outcome& b) {
  return a.status == b.status && a.reason == b.reason && a.detail == b.detail && a.state == b.state &&
         a.vars == b.vars && a.trace == b.trace && a.fuel_used == b.fuel_used;
}

bool same_domain(const State& a, const State& b) {
  if (a.size() != b.size()) return false;
  for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j) {
    if (i->first != j->first) return false;
    auto x = i->second.items();
    auto y = j->second.items();
    if (x.size() != y.size()) return false;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k].first != y[k].first) return false;
  }
  return true;
}

}  // namespace

std::vector<SuiteResult> semantics_suites(const std::vector<std::unique_ptr<Subject>>& subjects,
                                          const SuiteConfig& c) {
  std::vector<SuiteResult> r(6);
  const char* names[] = {"determinism", "conservation", "compositionality", "restoration", "monotone fuel", "domain"};
  for (std::size_t i = 0; i < r.size(); ++i) r[i].name = names[i];
  auto& det = r[0];
  auto& cons = r[1];
  auto& comp = r[2];
  auto& rest = r[3];
  auto& mono = r[4];
  auto& dom = r[5];

  const auto t0 = Clock::now();
  std::vector<const Subject*> usable;
  for (const auto& s : subjects)
    if (!s->stmts.empty()) usable.push_back(s.get());
  if (usable.empty()) return r;
  Rng rng(c.seed);
  auto enough = [&] {
    return std::all_of(r.begin(), r.end(), [&](const SuiteResult& x) { return x.cases >= c.cases; });
  };
  with_stack_for(c.fuel * 4, [&] {
    for (std::size_t draw = 0; draw < c.max_draws && !enough(); ++draw) {
      const Subject& s = *pick(usable, rng);
      const StmtPoint& p = pick(s.stmts, rng);
      const std::string at = where(s, p.contract, p.method) + ": `" + one_line(*p.stmt) + "`";
      State st;
      VarEnv v;
      try {
        st = random_state(s, rng);
        v = random_vars(s, p.contract, p.method, p.gamma, rng);
      } catch (const NoFit&) {
        continue;
      }
      Outcome o = exec_stmt_here(s.methods, st, v, *p.stmt, c.fuel);

      Outcome again = exec_stmt_here(s.methods, st, v, *p.stmt, c.fuel);
      ++det.cases;
      if (!same_outcome(o, again)) det.fail(at + " is not deterministic");

      ++dom.cases;
      if (!same_domain(st, o.state)) dom.fail(at + " changed the state domain");

      if (o.status != Status::OutOfFuel) {
        Outcome more = exec_stmt_here(s.methods, st, v, *p.stmt, c.fuel * 3);
        ++mono.cases;
        if (!same_outcome(o, more)) mono.fail(at + " changed outcome with more fuel");
      }
      if (!o.ok()) continue;

      ++cons.cases;
      if (total_balance(st) != total_balance(o.state))
        cons.fail(at + ": total balance " + std::to_string(total_balance(st)) + " -> " +
                  std::to_string(total_balance(o.state)));

      if (std::holds_alternative<Call>(p.stmt->node)) {
        ++rest.cases;
        if (!(o.vars == v)) rest.fail(at + " did not restore the caller's variables");
      }
      if (auto seq = std::get_if<Seq>(&p.stmt->node)) {
        Outcome o1 = exec_stmt_here(s.methods, st, v, *seq->first, c.fuel);
        if (!o1.ok()) continue;
        Outcome o2 = exec_stmt_here(s.methods, o1.state, o1.vars, *seq->second, c.fuel);
        if (!o2.ok()) continue;
        ++comp.cases;
        Trace joined = o1.trace;
        joined.insert(joined.end(), o2.trace.begin(), o2.trace.end());
        if (!(o.trace == joined) || !(o.state == o2.state) || !(o.vars == o2.vars))
          comp.fail(at + ": trace " + to_string(o.trace) + " vs " + to_string(joined));
      }
    }
  });
  const double secs = since(t0);
  for (auto& x : r) x.seconds = secs;
  return r;
}

// ---- keystone -------------------------------------------------------------------

FamilySpec random_family(const Blockchain& b, const std::set<std::string>& trusted, Rng& rng) {
  FamilySpec spec;
  std::vector<Value> addrs;
  for (const auto& c : b.contracts) addrs.push_back(addr(c.address));
  for (const auto& c : b.contracts) {
    if (trusted.count(c.address)) continue;
    for (const auto& f : c.fields) {
      if (!coin(rng)) continue;
      auto& dom = spec.fields[c.address + "." + f.name];
      const int n = std::uniform_int_distribution<int>(1, 3)(rng);
      for (int k = 0; k < n; ++k) {
        Value v = kind_of(f.init) == ValueKind::Nat    ? nat(small_nat(rng))
                  : kind_of(f.init) == ValueKind::Bool ? boolean(coin(rng))
                                                       : pick(addrs, rng);
        if (std::find(dom.begin(), dom.end(), v) == dom.end()) dom.push_back(v);
      }
    }
    for (const auto& m : c.methods) {
      if (!coin(rng, 0.4)) continue;
      auto& alts = spec.bodies[c.address + "." + m.name];
      alts.push_back(print_stmt(*m.body));
      SnippetGen gen{b, c, m.params, rng};
      const int n = std::uniform_int_distribution<int>(1, 3)(rng);
      for (int k = 0; k < n; ++k) alts.push_back(gen.stmt(2));
    }
  }
  return spec;
}

KeystoneResult keystone(std::uint64_t seed, std::size_t min_families) {
  KeystoneResult r;
  const auto t0 = Clock::now();
  Rng rng(seed);
  std::vector<std::pair<Blockchain, std::set<std::string>>> pairs;
  for (const auto& [name, b] : load_corpus()) {
    std::vector<std::string> xs;
    for (const auto& c : b.contracts)
      if (c.type) xs.push_back(c.address);
    for (std::size_t mask = 1; mask < (std::size_t{1} << xs.size()); ++mask) {
      std::set<std::string> trusted;
      for (std::size_t i = 0; i < xs.size(); ++i)
        if (mask >> i & 1) trusted.insert(xs[i]);
      ++r.pairs_tried;
      if (check_program(b, trusted_assignment(b, trusted)).accepted) pairs.emplace_back(b, trusted);
    }
  }
  r.pairs_accepted = pairs.size();
  if (pairs.empty()) return r;

  for (std::size_t attempt = 0; r.families < min_families && attempt < min_families * 20; ++attempt) {
    const auto& [b, trusted] = pairs[attempt % pairs.size()];
    FamilySpec spec = random_family(b, trusted, rng);
    TrustOptions opts;
    opts.fuel = 2000;
    opts.seed = rng();
    opts.generated_txs = 6;
    opts.max_contexts = 24;
    TrustReport rep;
    try {
      rep = check_welltyped_implies_ci(b, trusted, spec, opts);
    } catch (const PropsError&) {
      continue;  // e.g. a snippet that does not parse
    }
    if (rep.contexts == 0 || rep.txs_checked == 0) continue;
    ++r.families;
    r.contexts += rep.contexts;
    r.checks += rep.checks.size();
    r.contradictions += rep.contradictions;
    r.degraded_witnesses += rep.degraded_witnesses;
    for (const auto& k : rep.checks)
      if (k.contradiction && r.examples.size() < 5) {
        const Witness& w = *k.verdict.ok_witness;
        std::string trusted_names;
        for (const auto& x : trusted) trusted_names += x + " ";
        r.examples.push_back(k.property + " " + k.contract + " trusted {" + trusted_names + "} " +
                             print_transaction(k.tx) + ": " + w.detail + " [" + w.first_context.label + "] vs [" +
                             w.second_context.label + "]");
      }
  }
  r.seconds = since(t0);
  return r;
}

}  // namespace tinysol::suites
