#include "doctest.h"

#include "suites.hpp"
#include "tinysol/parser.hpp"

using namespace tinysol;

namespace {

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const PropsError& e) {
    return e.code();
  }
  return "";
}

std::map<std::string, Level> lambda_for(const Blockchain& b, const std::set<std::string>& low) {
  std::map<std::string, Level> out;
  for (const auto& c : b.contracts) out[c.address] = low.count(c.address) ? b.lattice.bottom() : b.lattice.top();
  return out;
}

}  // namespace

TEST_CASE("the family is the product of the domains") {
  Blockchain b = suites::load_fixture("twobank.tsol");
  FamilySpec spec;
  spec.fields["Y.balance"] = {nat(0), nat(1), nat(2)};
  spec.fields["Y.credit"] = {nat(0), nat(1)};
  spec.bodies["Y.deposit"] = {"skip", "throw"};
  ContextFamily fam = generate_context_family(b, {"X"}, spec);
  CHECK(fam.enumerated == 12);
  CHECK(fam.contexts.size() == 12);
  CHECK(fam.contexts.front().label == "Y.balance=0, Y.credit=0, Y.deposit#0");
  for (const auto& c : fam.contexts) {
    CHECK(c.state.at("X") == fam.contexts.front().state.at("X"));
    CHECK(c.methods.at("X") == fam.contexts.front().methods.at("X"));
  }
}

TEST_CASE("duplicate contexts are removed and large products sampled") {
  Blockchain b = suites::load_fixture("twobank.tsol");
  FamilySpec spec;
  spec.fields["Y.credit"] = {nat(0), nat(0), nat(1)};
  ContextFamily fam = generate_context_family(b, {"X"}, spec);
  CHECK(fam.enumerated == 3);
  CHECK(fam.contexts.size() == 2);

  FamilySpec big;
  for (const char* f : {"Y.balance", "Y.credit"})
    for (int v = 0; v < 40; ++v) big.fields[f].push_back(nat(v));
  ContextFamily a = generate_context_family(b, {"X"}, big, 9, 100);
  ContextFamily c = generate_context_family(b, {"X"}, big, 9, 100);
  CHECK(a.enumerated == 1600);
  CHECK(a.contexts.size() == 100);
  for (std::size_t i = 0; i < a.contexts.size(); ++i) CHECK(a.contexts[i].label == c.contexts[i].label);
}

TEST_CASE("family errors") {
  Blockchain b = suites::load_fixture("twobank.tsol");
  auto gen = [&](std::set<std::string> trusted, FamilySpec spec) {
    return [=] { generate_context_family(b, trusted, spec); };
  };
  FamilySpec s1;
  s1.fields["X.credit"] = {nat(1)};
  CHECK(code_of(gen({"X"}, s1)) == "TrustedVariation");
  FamilySpec s2;
  s2.fields["Y.nope"] = {nat(1)};
  CHECK(code_of(gen({"X"}, s2)) == "UnknownMember");
  FamilySpec s3;
  s3.fields["Y.credit"] = {boolean(true)};
  CHECK(code_of(gen({"X"}, s3)) == "KindMismatch");
  FamilySpec s4;
  s4.fields["Y.credit"] = {};
  CHECK(code_of(gen({"X"}, s4)) == "EmptyFamily");
  FamilySpec s5;
  s5.bodies["Y.deposit"] = {"this.credit := "};
  CHECK(code_of(gen({"X"}, s5)) == "BadSnippet");
  CHECK(code_of(gen({"Q"}, {})) == "UnknownAddress");
  ContextFamily fam = generate_context_family(b, {"X"}, {});
  CHECK(code_of([&] { check_call_integrity(fam, "Y", b.transactions.front()); }) == "NotTrusted");
}

TEST_CASE("a single context holds vacuously") {
  Blockchain b = suites::load_fixture("branch_on_high.tsol");
  ContextFamily fam = generate_context_family(b, {"X", "Z"}, {});
  REQUIRE(fam.contexts.size() == 1);
  PropertyVerdict v = check_call_integrity(fam, "X", parse_transaction("X->X.go():0"), 1000);
  CHECK(v.verdict == Verdict::Holds);
  CHECK_FALSE(v.witness);
}

TEST_CASE("call integrity without noninterference") {
  Blockchain b = suites::load_fixture("balance_leak.tsol");
  FamilySpec spec;
  spec.fields["Y.balance"] = {nat(0), nat(1)};
  const Transaction t = parse_transaction("Y->Y.go():0");
  ContextFamily fam = generate_context_family(b, {"X"}, spec);
  CHECK(check_call_integrity(fam, "X", t, 1000).verdict == Verdict::Holds);
  PropertyVerdict ni = check_noninterference(fam, lambda_for(b, {"X"}), t, 1000);
  CHECK(ni.verdict == Verdict::Violated);
  REQUIRE(ni.witness);
  CHECK(ni.witness->detail.find("balance") != std::string::npos);
}

TEST_CASE("noninterference without call integrity") {
  Blockchain b = suites::load_fixture("branch_on_high.tsol");
  FamilySpec spec;
  spec.fields["Y.balance"] = {nat(0), nat(1)};
  const Transaction t = parse_transaction("X->X.go():0");
  ContextFamily fam = generate_context_family(b, {"X", "Z"}, spec);
  CHECK(check_noninterference(fam, lambda_for(b, {"X", "Z"}), t, 1000).verdict == Verdict::Holds);
  PropertyVerdict ci = check_call_integrity(fam, "X", t, 1000);
  CHECK(ci.verdict == Verdict::Violated);
  REQUIRE(ci.witness);
  CHECK(to_string(ci.witness->first_observed) == "[X->Z.a():0]");
  CHECK(to_string(ci.witness->second_observed) == "[X->Z.b():0]");
  CHECK(ci.witness->first == 0);
  CHECK(ci.witness->second == 1);
  CHECK(ci.ok_witness);
  CHECK_FALSE(ci.degraded);
}

TEST_CASE("noninterference compares states under one method table") {
  Blockchain b = suites::load_fixture("branch_on_high.tsol");
  const Transaction t = parse_transaction("X->X.go():0");
  FamilySpec bodies;
  bodies.bodies["Y.send"] = {"skip", "throw"};
  ContextFamily fam = generate_context_family(b, {"X", "Z"}, bodies);
  CHECK(code_of([&] { check_noninterference(fam, lambda_for(b, {"X", "Z"}), t, 100); }) == "BodyVariation");

  FamilySpec fields;
  fields.fields["Y.balance"] = {nat(0), nat(1)};
  ContextFamily g = generate_context_family(b, {"X", "Z"}, fields);
  // Y is low here, so its balances break the precondition
  CHECK(code_of([&] { check_noninterference(g, lambda_for(b, {"X", "Y", "Z"}), t, 100); }) == "NotLowEqual");
}

TEST_CASE("running out of fuel is inconclusive, aborts are degraded") {
  Blockchain f = suites::load_fixture("reentrancy.tsol");
  ContextFamily fam = generate_context_family(f, {"X"}, {});
  CHECK(check_call_integrity(fam, "X", f.transactions.front(), 500).verdict == Verdict::Inconclusive);

  Blockchain b = suites::load_fixture("twobank.tsol");
  FamilySpec spec;
  spec.bodies["Y.deposit"] = {"skip", "throw"};
  ContextFamily g = generate_context_family(b, {"X"}, spec);
  PropertyVerdict v = check_call_integrity(g, "X", b.transactions.front(), 1000);
  CHECK(v.verdict == Verdict::Holds);
  CHECK(v.contexts_checked == 2);
}

TEST_CASE("the trusted assignment puts trusted contracts at the bottom") {
  Blockchain b = suites::load_fixture("twobank.tsol");
  auto a = trusted_assignment(b, {"X"});
  CHECK(a.at("X").level == "L");
  CHECK(a.at("X").iface == "IBank");
  CHECK(a.at("Y").level == "H");
  CHECK(a.at("A").level == "H");
}

TEST_CASE("a well-typed program shows no contradiction") {
  Blockchain b = suites::load_fixture("twobank.tsol");
  FamilySpec spec;
  spec.fields["Y.balance"] = {nat(0), nat(3)};
  spec.bodies["Y.deposit"] = {"skip", "throw", "this.credit := value"};
  TrustReport r = check_welltyped_implies_ci(b, {"X"}, spec);
  CHECK(r.accepted);
  CHECK(r.hypothesis_ok);
  CHECK(r.contexts == 6);
  CHECK(r.txs_checked > 1);
  CHECK(r.contradictions == 0);
}

TEST_CASE("a rejected program reports where typing failed") {
  TrustReport r = check_welltyped_implies_ci(suites::load_fixture("branch_on_high.tsol"), {"X", "Z"}, {});
  CHECK_FALSE(r.accepted);
  CHECK_FALSE(r.failing_rule.empty());
  CHECK(r.checks.empty());
}

TEST_CASE("generated transactions fit the parameter kinds") {
  Blockchain b = suites::load_fixture("twobank.tsol");
  std::vector<ContextError> errs;
  TypeContext ctx(b, {}, errs);
  auto txs = generate_transactions(b, ctx, {}, 50, 1);
  CHECK_FALSE(txs.empty());
  CHECK(txs.size() <= 50);
  for (const auto& t : txs)
    if (t.method == "transfer") {
      REQUIRE(t.args.size() == 2);
      CHECK(is_addr(t.args[0]));
      CHECK(is_nat(t.args[1]));
    }
}
