#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tinysol/ast.hpp"
#include "tinysol/env.hpp"

namespace tinysol {

struct CallRecord {
  std::string caller;
  std::string callee;
  std::string method;
  std::vector<Value> args;
  std::uint64_t amount = 0;
  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

using Trace = std::vector<CallRecord>;

std::string to_string(const CallRecord& r);  // X->Y.f(1, Z):3
std::string to_string(const Trace& t);       // [X->Z.a():0, ...]

enum class Status { Ok, Thrown, Stuck, OutOfFuel, NotRun };

enum class StuckReason {
  UndefinedName,
  TypeMismatch,
  NonBooleanGuard,
  ArityMismatch,
  InsufficientBalance,
  UndefinedAddress,
  UndefinedMethod,
};

const char* status_name(Status s);
const char* reason_name(StuckReason r);

inline constexpr std::uint64_t kDefaultFuel = 1'000'000;

/// Result of a statement execution. `state` and `vars` are final for Ok and
/// record the point of abort otherwise; `trace` is always the calls made so far.
struct Outcome {
  Status status = Status::Ok;
  State state;
  VarEnv vars;
  std::optional<StuckReason> reason;
  std::string detail;
  Trace trace;
  std::uint64_t fuel_used = 0;

  bool ok() const { return status == Status::Ok; }
};

/// Expression result: a value, or the reason evaluation got stuck.
struct ExprResult {
  std::optional<Value> value;
  StuckReason reason = StuckReason::UndefinedName;
  std::string detail;
};

ExprResult eval_expr(const State& s, const VarEnv& v, const Expr& e);

/// Genesis: the state and method table built from the declarations.
std::pair<State, MethodTable> eval_declarations(const std::vector<ContractDecl>& dc);

/// Executes `s` on the current thread. Recursion depth grows with the fuel,
/// so prefer `exec_stmt` unless the fuel is small.
Outcome exec_stmt_here(const MethodTable& t, const State& s, const VarEnv& v, const Stmt& st,
                       std::uint64_t fuel);

/// Executes `s` on a thread whose stack is sized for `fuel`.
Outcome exec_stmt(const MethodTable& t, const State& s, const VarEnv& v, const Stmt& st,
                  std::uint64_t fuel = kDefaultFuel);

/// Runs `fn` on a fresh thread with a stack big enough for `fuel` nested rules.
void with_stack_for(std::uint64_t fuel, const std::function<void()>& fn);

/// Runs one transaction A->X.f(v⃗):n against (ρT, ρS). The outcome's trace
/// holds the calls made by the method body, not the transaction record itself.
Outcome run_transaction(const MethodTable& t, const State& s, const Transaction& tx,
                        std::uint64_t fuel = kDefaultFuel);

/// Same, on the current thread (see exec_stmt_here).
Outcome run_transaction_here(const MethodTable& t, const State& s, const Transaction& tx,
                             std::uint64_t fuel);

struct ChainResult {
  State genesis;
  State final_state;
  MethodTable methods;
  std::vector<Outcome> outcomes;  // one per transaction; NotRun after the first failure
};

/// Genesis followed by the transactions in order. Halts at the first non-Ok one.
ChainResult run_blockchain(const Blockchain& b, std::uint64_t fuel = kDefaultFuel);

/// Same, starting from a given state and method table.
ChainResult run_transactions(const MethodTable& t, const State& s,
                             const std::vector<Transaction>& txs,
                             std::uint64_t fuel = kDefaultFuel);

/// π↾X: the records whose caller is X, in order.
Trace project_trace(const Trace& t, const std::string& x);

}  // namespace tinysol
