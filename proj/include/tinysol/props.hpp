#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tinysol/ast.hpp"
#include "tinysol/env.hpp"
#include "tinysol/eval.hpp"
#include "tinysol/typecheck.hpp"

namespace tinysol {

class PropsError : public std::runtime_error {
 public:
  PropsError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  /// EmptyFamily, NotTrusted, TrustedVariation, UnknownMember, KindMismatch,
  /// BadSnippet, BodyVariation, NotLowEqual, UnknownAddress
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// How untrusted contracts may vary: value domains for fields ("Y.balance")
/// and alternative bodies, as source snippets, for methods ("Y.go").
struct FamilySpec {
  std::map<std::string, std::vector<Value>> fields;
  std::map<std::string, std::vector<std::string>> bodies;
  bool empty() const { return fields.empty() && bodies.empty(); }
};

/// One execution context ρST.
struct Context {
  State state;
  MethodTable methods;
  std::string label;  // e.g. "Y.balance=1, Y.go#0"
};

struct ContextFamily {
  Blockchain base;
  std::set<std::string> trusted;
  std::vector<Context> contexts;
  std::size_t enumerated = 0;  // before deduplication and sampling
};

/// Cartesian product of the spec over the genesis state, deduplicated, in
/// enumeration order (sorted keys, domain order). Products larger than
/// `max_contexts` are sampled with `seed`; the sample keeps enumeration order.
ContextFamily generate_context_family(const Blockchain& b, const std::set<std::string>& trusted,
                                      const FamilySpec& spec, std::uint64_t seed = 0,
                                      std::size_t max_contexts = 4096);

enum class Verdict { Holds, Violated, Inconclusive };
const char* verdict_name(Verdict v);

struct Witness {
  std::size_t first = 0, second = 0;  // context indices
  Context first_context, second_context;
  Transaction tx;
  Outcome first_run, second_run;
  Trace first_observed, second_observed;  // projections (CI); empty for NI
  std::string detail;
};

struct PropertyVerdict {
  Verdict verdict = Verdict::Holds;
  /// Some run ended Thrown or Stuck and its partial trace or state was compared.
  bool degraded = false;
  std::optional<Witness> witness;
  /// Lexicographically first disagreement between two runs that both ended Ok.
  std::optional<Witness> ok_witness;
  std::size_t contexts_checked = 0;
  std::vector<std::string> notes;

  bool holds() const { return verdict == Verdict::Holds; }
};

/// π1↾c = π2↾c for every pair of contexts.
PropertyVerdict check_call_integrity(const ContextFamily& fam, const std::string& c,
                                     const Transaction& t, std::uint64_t fuel = kDefaultFuel);

/// Final states are =_low for every pair of contexts, where a contract's
/// fields all sit at its level λ(X). `low` defaults to the lattice bottom.
PropertyVerdict check_noninterference(const ContextFamily& fam, const std::map<std::string, Level>& lambda,
                                      const Transaction& t, std::uint64_t fuel = kDefaultFuel,
                                      std::optional<Level> low = {});

/// Γ(X) = I_⊥ for trusted X and I_⊤ for every other contract, I being the
/// contract's declared interface.
std::map<std::string, BaseTypeExpr> trusted_assignment(const Blockchain& b,
                                                    const std::set<std::string>& trusted);

/// Transactions over the declared methods: every contract as caller, argument
/// values from the parameter kinds (naturals also from the spec's domains),
/// amounts 0 and 1. At most `limit`, sampled with `seed` when there are more.
std::vector<Transaction> generate_transactions(const Blockchain& b, const TypeContext& ctx,
                                               const FamilySpec& spec, std::size_t limit,
                                               std::uint64_t seed);

struct TrustOptions {
  std::uint64_t fuel = 20'000;
  std::uint64_t seed = 0;
  std::vector<Transaction> extra_txs;  // checked besides the chain's own
  std::size_t generated_txs = 24;      // 0 disables the generator
  bool check_ni = true;
  std::size_t max_contexts = 256;
};

struct TrustCheck {
  std::string property;  // "CI" or "NI"
  std::string contract;  // c for CI, empty for NI
  Transaction tx;
  PropertyVerdict verdict;
  bool contradiction = false;
};

struct TrustReport {
  std::map<std::string, BaseTypeExpr> assignment;
  TypeReport typing;
  bool accepted = false;
  /// Rule and failure of the first failing leaf, when rejected.
  std::string failing_rule;
  std::string failing_premise;
  /// The theorem's side conditions on Γ (levels of trusted and untrusted members).
  bool hypothesis_ok = true;
  std::string hypothesis_detail;
  std::size_t contexts = 0;          // contexts in the family
  std::size_t contexts_dropped = 0;  // contexts failing Γ ⊢ ρST
  std::size_t txs_checked = 0;
  std::size_t txs_untypable = 0;
  std::vector<TrustCheck> checks;
  std::size_t contradictions = 0;
  std::size_t degraded_witnesses = 0;  // disagreements involving an aborted run
};

/// Type-checks under trusted_assignment; when accepted, checks call integrity of
/// every trusted contract (and noninterference) over the family for every
/// typable transaction. A disagreement between two Ok runs is a contradiction.
TrustReport check_welltyped_implies_ci(const Blockchain& b, const std::set<std::string>& trusted,
                                      const FamilySpec& spec, const TrustOptions& opts = {});

}  // namespace tinysol
