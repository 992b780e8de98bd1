#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "suites.hpp"
#include "tinysol/corpus.hpp"
#include "tinysol/kinds.hpp"
#include "tinysol/parser.hpp"

using namespace tinysol;

namespace {

struct Ctx {
  Blockchain b;
  std::vector<ContextError> errs;
  std::unique_ptr<TypeContext> ctx;
  explicit Ctx(Blockchain prog, std::map<std::string, BaseTypeExpr> levels = {}) : b(std::move(prog)) {
    ctx = std::make_unique<TypeContext>(b, levels, errs);
  }
};

// First failing t-call on the first failing branch.
const Derivation* failing_call(const Derivation& d) {
  if (d.ok) return nullptr;
  if (d.rule == "t-call") return &d;
  for (const auto& c : d.children)
    if (auto f = failing_call(c)) return f;
  return nullptr;
}

std::string squash(const std::string& s) {
  std::istringstream in(s);
  std::string w, out;
  while (in >> w) out += w + " ";
  return out;
}

void golden(const std::string& fixture, const std::string& file) {
  TypeReport r = check_program(suites::load_fixture(fixture));
  const Derivation* call = nullptr;
  for (const auto& [label, d] : r.derivations)
    if ((call = failing_call(d))) break;
  REQUIRE(call);
  const std::string got = render(*call);
  const auto path = std::filesystem::path(TINYSOL_SOURCE_DIR) / "tests" / "golden" / file;
  if (std::getenv("TINYSOL_UPDATE_GOLDEN")) std::ofstream(path) << got;
  CHECK(squash(got) == squash(read_file(path)));
}

std::vector<std::string> error_codes(const TypeReport& r) {
  std::vector<std::string> out;
  for (const auto& e : r.errors) out.push_back(e.code);
  return out;
}

}  // namespace

TEST_CASE("verdicts on the worked examples") {
  CHECK(check_program(suites::load_fixture("twobank.tsol")).accepted);
  CHECK_FALSE(check_program(suites::load_fixture("reentrancy.tsol")).accepted);
  CHECK_FALSE(check_program(suites::load_fixture("reentrancy_swapped.tsol")).accepted);
  CHECK_FALSE(check_program(suites::load_fixture("balance_leak.tsol")).accepted);
  CHECK_FALSE(check_program(suites::load_fixture("iface_subtype.tsol")).accepted);
  CHECK(error_codes(check_program(suites::load_fixture("untyped_local.tsol"))) ==
        std::vector<std::string>{"MissingAnnotation"});
}

TEST_CASE("the high-to-low call fails at method subtyping") {
  TypeReport r = check_program(suites::load_fixture("balance_leak.tsol"));
  const Derivation* call = nullptr;
  for (const auto& [label, d] : r.derivations)
    if ((call = failing_call(d))) break;
  REQUIRE(call);
  const Derivation* leaf = first_failure(*call);
  REQUIRE(leaf);
  CHECK(leaf->failure == "H ⋢ L");
  CHECK(failing_path(*call) == std::vector<std::string>{"t-call", "t-m-sub", "subs-proc"});
}

TEST_CASE("golden derivations") {
  golden("balance_leak.tsol", "balance_leak.txt");
  golden("iface_subtype.tsol", "iface_subtype.txt");
  golden("reentrancy.tsol", "reentrancy.txt");
}

TEST_CASE("a level override flips the verdict") {
  Blockchain b = suites::load_fixture("balance_leak.tsol");
  CHECK(check_program(b, {{"X", {"I", "H"}}}).accepted);
  CHECK_FALSE(check_program(suites::load_fixture("twobank.tsol"), {{"Y", {"IBank", "L"}}, {"X", {"IBank", "H"}}}).accepted);
}

TEST_CASE("strict mode promotes missing implementations") {
  Blockchain b = parse_program(
      "interface I<s> { field balance : <s> var; method send : <> -> s cmd; method go : <> -> s cmd; }\n"
      "contract X : I<L> { field balance := 0; send() { skip } }\n");
  TypeReport lax = check_program(b);
  CHECK(lax.accepted);
  CHECK(lax.warnings.size() == 1);
  TypeOptions o;
  o.strict_impl = true;
  TypeReport strict = check_program(b, {}, o);
  CHECK_FALSE(strict.accepted);
  CHECK(error_codes(strict) == std::vector<std::string>{"MissingImplementation"});
}

TEST_CASE("subtyping is a preorder over the whole universe") {
  for (const auto& [name, b] : suites::load_corpus()) {
    for (const Lattice& l : {b.lattice, suites::diamond()}) {
      Blockchain p = b;
      p.lattice = l;
      Ctx c(p);
      if (!c.errs.empty()) continue;
      const TypeContext& t = *c.ctx;
      const std::size_t n = t.universe();
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(t.sub(t.at(i), t.at(i)));
        for (std::size_t j = 0; j < n; ++j) {
          if (!t.sub(t.at(i), t.at(j))) continue;
          CHECK(l.leq(t.at(i).level, t.at(j).level));
          for (std::size_t k = 0; k < n; ++k)
            if (t.sub(t.at(j), t.at(k))) CHECK(t.sub(t.at(i), t.at(k)));
        }
      }
    }
  }
}

TEST_CASE("every declared interface instance is below ITop at the top level") {
  Ctx c(suites::load_fixture("twobank.tsol"));
  const Level top = c.ctx->lattice().top();
  for (const auto& [x, t] : c.ctx->addresses()) CHECK(c.ctx->sub(t, BaseType{"ITop", top}));
}

TEST_CASE("subtyping derivations agree with the relation") {
  Ctx c(suites::load_fixture("iface_subtype.tsol"));
  const TypeContext& t = *c.ctx;
  for (std::size_t i = 0; i < t.universe(); ++i)
    for (std::size_t j = 0; j < t.universe(); ++j) {
      Derivation d = t.derive_sub(SecType{t.at(i)}, SecType{t.at(j)});
      CHECK(d.ok == t.sub(t.at(i), t.at(j)));
      CHECK(well_formed_failure(d));
    }
}

// The synthesized type is least: it checks, and every checked type is above it.
TEST_CASE("algorithmic and declarative typing agree at every program point") {
  auto subjects = suites::make_subjects(3, 4);
  REQUIRE_FALSE(subjects.empty());
  for (const auto& s : subjects) {
    const TypeContext& t = *s->ctx;
    for (const auto& p : s->exprs) {
      auto m = s->checker->minimal_type(p.gamma, *p.expr);
      if (!m) continue;
      CHECK(s->checker->check_expr(p.gamma, *p.expr, *m));
      for (std::size_t i = 0; i < t.universe(); ++i)
        if (s->checker->check_expr(p.gamma, *p.expr, t.at(i))) CHECK(t.sub(*m, t.at(i)));
    }
    for (const auto& p : s->stmts) {
      LevelSet ls = s->checker->cmd_levels(p.gamma, *p.stmt);
      for (Level lv : t.lattice().levels()) {
        Derivation d = s->checker->derive_stmt(p.gamma, *p.stmt, lv);
        CHECK(d.ok == static_cast<bool>(ls[lv.index]));
        CHECK(well_formed_failure(d));
        // downward closed
        if (ls[lv.index])
          for (Level u : t.lattice().levels())
            if (t.lattice().leq(u, lv)) CHECK(ls[u.index]);
      }
    }
  }
}

TEST_CASE("kinds of parameters") {
  Blockchain b = suites::load_fixture("twobank.tsol");
  Ctx c(b);
  auto ks = param_kinds(b, *c.ctx, "X", "transfer");
  REQUIRE(ks.size() == 2);
  CHECK(ks[0] == ValueKind::Addr);
  CHECK(ks[1] == ValueKind::Nat);
  CHECK(field_kind(b, "X", "owner") == ValueKind::Addr);
}

TEST_CASE("ill-kinded guards and operations are reported") {
  Blockchain b = parse_program(
      "interface I<s> { field balance : <s> var; field f : <s> var; method send : <> -> s cmd; }\n"
      "contract X : I<L> { field balance := 0; field f := true;\n"
      "  send() { if this.balance then skip else skip; this.f := this.f + 1 } }\n");
  Ctx c(b);
  auto ds = check_kinds(b, *c.ctx);
  CHECK(ds.size() >= 2);
  CHECK_FALSE(check_program(b).accepted);
}
