#include "doctest.h"

#include "suites.hpp"
#include "tinysol/equivalence.hpp"

using namespace tinysol;

namespace {

struct Fixture {
  std::unique_ptr<suites::Subject> s;
  Level L, H;
  Fixture() {
    auto all = suites::make_subjects(1, 0);
    for (auto& x : all)
      if (x->name == "twobank.tsol") s = std::move(x);
    REQUIRE(s);
    L = s->ctx->lattice().at("L");
    H = s->ctx->lattice().at("H");
  }
};

State with_field(State s, const std::string& x, const std::string& p, Value v) {
  s[x] = s[x].update(p, std::move(v));
  return s;
}

}  // namespace

TEST_CASE("states differing only in a high field") {
  Fixture f;
  const State a = f.s->genesis;
  const State b = with_field(a, "Y", "credit", nat(7));  // Y is IBank<H>
  CHECK(s_equal(*f.s->ctx, a, a, f.L));
  CHECK(s_equal(*f.s->ctx, a, b, f.L));
  EqResult r = s_equal(*f.s->ctx, a, b, f.H);
  CHECK(r.kind == EqResult::Kind::ValueMismatch);
  CHECK(r.detail.find("credit") != std::string::npos);
}

TEST_CASE("a low field difference shows at every level") {
  Fixture f;
  const State a = f.s->genesis;
  const State b = with_field(a, "X", "credit", nat(7));  // X is IBank<L>
  CHECK_FALSE(s_equal(*f.s->ctx, a, b, f.L));
  CHECK_FALSE(s_equal(*f.s->ctx, a, b, f.H));
}

TEST_CASE("different domains are reported as such") {
  Fixture f;
  State a = f.s->genesis;
  State b = a;
  b["X"] = b["X"].prepend("extra", nat(0));
  CHECK(s_equal(*f.s->ctx, a, b, f.L).kind == EqResult::Kind::DomainMismatch);
  State c = a;
  c.erase("Y");
  CHECK(s_equal(*f.s->ctx, a, c, f.L).kind == EqResult::Kind::DomainMismatch);
}

TEST_CASE("method tables compare bodies of low contracts only") {
  Fixture f;
  MethodTable t = f.s->methods;
  MethodTable u = t;
  const MethodDef* d = lookup_method(t, "Y", "deposit");
  REQUIRE(d);
  u["Y"] = u["Y"].update("deposit", MethodDef{d->params, make_stmt(Skip{})});
  CHECK(s_equal(*f.s->ctx, t, u, f.L));
  CHECK_FALSE(s_equal(*f.s->ctx, t, u, f.H));
}

// Restriction: =_s implies =_s' for every s' ⊑ s.
TEST_CASE("equality at a level restricts to every level below") {
  auto subjects = suites::make_subjects(5, 3);
  suites::Rng rng(5);
  std::size_t checked = 0;
  for (int round = 0; round < 400; ++round) {
    const suites::Subject& s = *subjects[rng() % subjects.size()];
    const Lattice& l = s.ctx->lattice();
    auto levels = l.levels();
    const Level hi = levels[rng() % levels.size()];
    State a, b;
    try {
      a = suites::random_state(s, rng);
      b = suites::perturb_state(s, a, hi, rng);
    } catch (...) {
      continue;
    }
    REQUIRE(s_equal(*s.ctx, a, b, hi));
    for (Level lo : levels)
      if (l.leq(lo, hi)) {
        CHECK(s_equal(*s.ctx, a, b, lo));
        ++checked;
      }
  }
  CHECK(checked > 400);
}

// Adding or removing the same fresh head binding on both sides keeps =_s.
TEST_CASE("strengthening and weakening") {
  Fixture f;
  VarTypes g{{"x", BaseType{"", f.H}}, {"y", BaseType{"", f.L}}};
  VarEnv a{{"x", nat(1)}, {"y", nat(2)}};
  VarEnv b{{"x", nat(5)}, {"y", nat(2)}};
  REQUIRE(s_equal(*f.s->ctx, g, a, b, f.L));
  VarTypes g2 = g.prepend("z", BaseType{"", f.L});
  CHECK(s_equal(*f.s->ctx, g2, a.prepend("z", nat(3)), b.prepend("z", nat(3)), f.L));
  CHECK_FALSE(s_equal(*f.s->ctx, g2, a.prepend("z", nat(3)), b.prepend("z", nat(4)), f.L));
  CHECK(s_equal(*f.s->ctx, g2.tail(), a.prepend("z", nat(3)).tail(), b.prepend("z", nat(4)).tail(), f.L));
}

TEST_CASE("agreement checks domains, value typing checks addresses") {
  Fixture f;
  CHECK(check_env_agreement(*f.s->checker, f.s->genesis, f.s->methods));
  CHECK_FALSE(check_value_types(*f.s->ctx, f.s->genesis));
  const State fixed = with_field(f.s->genesis, "X", "owner", addr("X"));
  CHECK(check_value_types(*f.s->ctx, fixed));
  State bad = with_field(f.s->genesis, "X", "owner", nat(3));
  CHECK(check_env_agreement(*f.s->checker, bad, f.s->methods));
  CHECK_FALSE(check_value_types(*f.s->ctx, bad));
  State extra = f.s->genesis;
  extra["X"] = extra["X"].prepend("ghost", nat(0));
  CHECK_FALSE(check_env_agreement(*f.s->checker, extra, f.s->methods));
}

// Domain agreement is all the environment rules ask for. With it alone, a
// high parameter may hold an address outside its interface type, and the
// soundness statement fails at L: which contract receives X's payment is
// decided by the high value.
TEST_CASE("domain agreement alone does not give soundness") {
  Fixture f;
  const suites::Subject& s = *f.s;
  const MethodDecl* m = s.b.contract("X")->method("transfer");
  auto g = s.checker->method_gamma("X", *m);
  REQUIRE(g);
  REQUIRE(s.checker->check_stmt(*g, *m->body, f.L));
  auto vars = [&](const char* recipient) {
    std::vector<std::pair<std::string, Value>> items;
    for (const auto& [x, t] : g->items()) {
      Value v = x == "this" ? addr("X") : x == "sender" ? addr("A") : x == "recipient" ? addr(recipient) : nat(1);
      items.emplace_back(x, v);
    }
    VarEnv out;
    for (auto it = items.rbegin(); it != items.rend(); ++it) out = out.prepend(it->first, it->second);
    return out;
  };
  const VarEnv v1 = vars("Y"), v2 = vars("X");
  CHECK(check_env_agreement(*s.checker, s.genesis, s.methods, *g, v2));
  CHECK(s_equal(*s.ctx, *g, v1, v2, f.L));
  // A is high, so X may not keep it as its owner
  const State st = with_field(s.genesis, "X", "owner", addr("X"));
  Agreement a1 = check_value_types(*s.ctx, st, *g, v1);
  INFO(a1.detail);
  CHECK(a1);
  CHECK_FALSE(check_value_types(*s.ctx, st, *g, v2));

  Outcome o1 = exec_stmt(s.methods, st, v1, *m->body, 1000);
  Outcome o2 = exec_stmt(s.methods, st, v2, *m->body, 1000);
  REQUIRE(o1.ok());
  REQUIRE(o2.ok());
  CHECK_FALSE(s_equal(*s.ctx, o1.state, o2.state, f.L));
}
