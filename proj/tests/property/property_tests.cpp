#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "suites.hpp"

using namespace tinysol;
using namespace tinysol::suites;

namespace {

const std::vector<std::unique_ptr<Subject>>& subjects() {
  static auto s = make_subjects(11);
  return s;
}

SuiteConfig config(std::uint64_t seed, std::size_t cases) {
  SuiteConfig c;
  c.seed = seed;
  c.cases = cases;
  return c;
}

void require_clean(const SuiteResult& r, std::size_t min_cases) {
  INFO(r.name << ": " << r.cases << " cases, " << r.skipped << " skipped");
  for (const auto& e : r.examples) INFO(e);
  CHECK(r.cases >= min_cases);
  CHECK(r.violations == 0);
}

}  // namespace

TEST_CASE("subjects cover both lattices") {
  bool two = false, four = false;
  for (const auto& s : subjects()) {
    two |= s->ctx->lattice().levels().size() == 2;
    four |= s->ctx->lattice().levels().size() == 4;
  }
  CHECK(two);
  CHECK(four);
}

TEST_CASE("subject reduction") { require_clean(preservation_suite(subjects(), config(21, 1500)), 1500); }

TEST_CASE("typed expressions evaluate") { require_clean(expression_safety_suite(subjects(), config(22, 1500)), 1500); }

TEST_CASE("low-equal runs end low-equal") { require_clean(soundness_suite(subjects(), config(23, 1500)), 1500); }

TEST_CASE("low-equal runs under low-equal method tables") {
  require_clean(extended_soundness_suite(subjects(), config(24, 1500)), 1500);
}

TEST_CASE("semantic invariants") {
  auto raw = raw_subjects();
  for (const auto& r : semantics_suites(raw, config(25, 1000))) require_clean(r, 1000);
}

// Subsuming `this` must break something; otherwise the suites above are too weak to tell.
TEST_CASE("the suites notice a subsumable this") {
  TypeOptions o;
  o.permissive_this = true;
  auto loose = make_subjects(7, 12, o);
  const SuiteConfig c = config(7, 3000);
  const std::size_t found = preservation_suite(loose, c).violations + soundness_suite(loose, c).violations +
                            extended_soundness_suite(loose, c).violations;
  CHECK(found > 0);
}

TEST_CASE("well-typed trusted sets keep call integrity") {
  KeystoneResult k = keystone(5, 60);
  for (const auto& e : k.examples) INFO(e);
  CHECK(k.families >= 60);
  CHECK(k.checks > 0);
  CHECK(k.contradictions == 0);
}
