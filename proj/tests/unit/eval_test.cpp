#include "doctest.h"

#include "suites.hpp"
#include "tinysol/parser.hpp"

using namespace tinysol;

namespace {

Blockchain program(const std::string& body) {
  return parse_program(
      "interface I<s> { field balance : <s> var; field n : <s> var; method send : <> -> s cmd; }\n" + body);
}

Outcome run_one(const Blockchain& b, const std::string& tx, std::uint64_t fuel = 10000) {
  auto [s, t] = eval_declarations(b.contracts);
  return run_transaction(t, s, parse_transaction(tx), fuel);
}

}  // namespace

TEST_CASE("expressions") {
  State s;
  s["X"] = FieldEnv{{"balance", nat(4)}, {"f", boolean(true)}};
  VarEnv v{{"x", nat(3)}, {"this", addr("X")}};
  auto val = [&](const std::string& e) {
    StmtPtr st = parse_statement("this.r := " + e, {"x"}, {"X"});
    return eval_expr(s, v, *std::get<Assign>(st->node).rhs);
  };
  CHECK(*val("x + 2 * 3").value == nat(9));
  CHECK(*val("x - 5").value == nat(0));
  CHECK(*val("X.balance").value == nat(4));
  CHECK(*val("this.f && x < 4").value == boolean(true));
  CHECK(*val("x = true").value == boolean(false));
  CHECK_FALSE(val("y").value);
  CHECK(val("y").reason == StuckReason::UndefinedName);
  CHECK(val("x && true").reason == StuckReason::TypeMismatch);
  CHECK(val("X.nope").reason == StuckReason::UndefinedName);
  CHECK(val("x.balance").reason == StuckReason::TypeMismatch);
}

TEST_CASE("a call moves currency and records the call") {
  Blockchain b = program(
      "contract A : I<L> { field balance := 5; field n := 0; send() { skip } go() { B.put(2):3 } }\n"
      "contract B : I<L> { field balance := 0; field n := 0; send() { skip } put(k) { this.n := k + value } }\n");
  Outcome o = run_one(b, "A->A.go():0");
  REQUIRE(o.ok());
  CHECK(*lookup_field(o.state, "A", "balance") == nat(2));
  CHECK(*lookup_field(o.state, "B", "balance") == nat(3));
  CHECK(*lookup_field(o.state, "B", "n") == nat(5));
  CHECK(to_string(o.trace) == "[A->B.put(2):3]");
}

TEST_CASE("insufficient balance and undefined methods get stuck") {
  Blockchain b = program(
      "contract A : I<L> { field balance := 1; field n := 0; send() { skip } go() { B.send():2 } bad() { B.nope():0 } }\n"
      "contract B : I<L> { field balance := 0; field n := 0; send() { skip } }\n");
  Outcome o = run_one(b, "A->A.go():0");
  CHECK(o.status == Status::Stuck);
  CHECK(o.reason == StuckReason::InsufficientBalance);
  Outcome p = run_one(b, "A->A.bad():0");
  CHECK(p.reason == StuckReason::UndefinedMethod);
  Outcome q = run_one(b, "A->A.go(1):0");
  CHECK(q.reason == StuckReason::ArityMismatch);
}

TEST_CASE("throw aborts the whole transaction") {
  Blockchain b = program(
      "contract A : I<L> { field balance := 1; field n := 0; send() { skip } go() { this.n := 7; throw } }\n");
  Outcome o = run_one(b, "A->A.go():0");
  CHECK(o.status == Status::Thrown);
  ChainResult r = run_transactions(eval_declarations(b.contracts).second, eval_declarations(b.contracts).first,
                                   {parse_transaction("A->A.go():0"), parse_transaction("A->A.send():0")});
  CHECK(r.outcomes[1].status == Status::NotRun);
  CHECK(*lookup_field(r.final_state, "A", "n") == nat(0));
}

TEST_CASE("locals are dropped and caller variables restored") {
  Blockchain b = program(
      "contract A : I<L> { field balance := 1; field n := 0; send() { skip }\n"
      "  go(k) { var x := k + 1 in { B.put(x):0; this.n := x } } }\n"
      "contract B : I<L> { field balance := 0; field n := 0; send() { skip } put(k) { this.n := k } }\n");
  Outcome o = run_one(b, "A->A.go(4):0");
  REQUIRE(o.ok());
  CHECK(*lookup_field(o.state, "A", "n") == nat(5));
  CHECK(*lookup_field(o.state, "B", "n") == nat(5));
}

TEST_CASE("while loops consume fuel per iteration") {
  Blockchain b = program(
      "contract A : I<L> { field balance := 0; field n := 0; send() { skip } go() { while this.n < 10 do this.n := this.n + 1 } }\n");
  Outcome o = run_one(b, "A->A.go():0");
  REQUIRE(o.ok());
  CHECK(*lookup_field(o.state, "A", "n") == nat(10));
  Outcome p = run_one(b, "A->A.go():0", 12);
  CHECK(p.status == Status::OutOfFuel);
  CHECK(p.fuel_used <= 12);
}

TEST_CASE("traces and projections of the reordering example") {
  Blockchain ex2 = suites::load_fixture("branch_on_high.tsol");
  ChainResult r = run_blockchain(ex2, 1000);
  REQUIRE(r.outcomes.size() == 1);
  CHECK(to_string(r.outcomes[0].trace) == "[X->Z.a():0]");
  CHECK(project_trace(r.outcomes[0].trace, "X").size() == 1);
  CHECK(project_trace(r.outcomes[0].trace, "Z").empty());

  Blockchain ex1 = suites::load_fixture("balance_leak.tsol");
  ChainResult q = run_blockchain(ex1, 1000);
  CHECK(*lookup_field(q.final_state, "X", "balance") == nat(1));
}

TEST_CASE("projection is a filter that distributes over concatenation") {
  Trace a{{"X", "Y", "f", {}, 0}, {"Y", "X", "g", {nat(1)}, 2}};
  Trace b{{"X", "Z", "h", {}, 1}};
  Trace ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  for (const char* x : {"X", "Y", "Z"}) {
    Trace pa = project_trace(a, x), pb = project_trace(b, x);
    pa.insert(pa.end(), pb.begin(), pb.end());
    CHECK(project_trace(ab, x) == pa);
    CHECK(project_trace(project_trace(ab, x), x) == project_trace(ab, x));
  }
}

TEST_CASE("reentrancy runs out of fuel and deep runs fit the big stack") {
  Blockchain b = suites::load_fixture("reentrancy.tsol");
  ChainResult r = run_blockchain(b, 200000);
  CHECK(r.outcomes[0].status == Status::OutOfFuel);
  CHECK(r.outcomes[0].trace.size() > 1000);
}
