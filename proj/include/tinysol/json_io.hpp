#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "tinysol/ast.hpp"
#include "tinysol/env.hpp"
#include "tinysol/eval.hpp"
#include "tinysol/props.hpp"
#include "tinysol/types.hpp"

namespace tinysol {

/// Keys of nlohmann::json objects are sorted, which gives the canonical form.
using Json = nlohmann::json;

/// Bad levels.json, family.json or report input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Schema tags of the documents under docs/schemas.
inline constexpr const char* kStateSchema = "tinysol.state/1";
inline constexpr const char* kRunSchema = "tinysol.run/1";
inline constexpr const char* kDerivationSchema = "tinysol.derivation/1";
inline constexpr const char* kVerdictSchema = "tinysol.verdict/1";
inline constexpr const char* kCorpusSchema = "tinysol.corpus/1";
inline constexpr const char* kParseSchema = "tinysol.parse/1";
inline constexpr const char* kErrorSchema = "tinysol.error/1";

/// Naturals as numbers, booleans as booleans, addresses as strings.
Json to_json(const Value& v);
Value value_from_json(const Json& j);

Json to_json(const CallRecord& r);
/// A bare array of {caller, callee, method, args, amount}.
Json to_json(const Trace& t);
Json to_json(const State& s);
Json to_json(const MethodTable& t);
Json to_json(const Transaction& t);
Json to_json(const Outcome& o);
Json to_json(const Derivation& d);
Json to_json(const Diagnostic& d);
Json to_json(const Context& c);

/// {"schema": state, "state": ..., "methods": ...}
Json state_document(const State& s, const MethodTable& t);

/// Verdict of one property check. The witness, when present, carries
/// everything needed to replay it: program text, both contexts, the
/// transaction and the fuel.
Json verdict_document(const std::string& property, const std::string& program_text,
                      const PropertyVerdict& v, const std::string& subject, const Transaction& t,
                      std::uint64_t fuel);

/// levels.json: {"X": {"interface": "I", "level": "L"}}, {"X": "I<L>"} or
/// {"X": "L"}; the last keeps the interface of X's source annotation.
std::map<std::string, BaseTypeExpr> parse_levels(const std::string& text, const Blockchain& b);

/// family.json: {"fields": {"Y.balance": [0, 1]}, "bodies": {"Y.go": ["skip"]}}
FamilySpec parse_family(const std::string& text);

/// The CLI exit code a report implies: 0 success or holds, 1 violated or
/// rejected, 2 usage/parse/config error, 3 inconclusive or out of fuel.
int exit_code_for(const Json& report);

}  // namespace tinysol
