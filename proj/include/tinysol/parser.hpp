#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tinysol/ast.hpp"

namespace tinysol {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string code, std::string message, SourceSpan span,
             std::vector<std::string> expected = {});

  const std::string& code() const { return code_; }  // "ParseError" or "ReservedWord"
  const SourceSpan& span() const { return span_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::string code_;
  SourceSpan span_;
  std::vector<std::string> expected_;
};

bool is_reserved(std::string_view word);

/// Parses a whole `.tsol` program. Throws ParseError or LatticeError.
Blockchain parse_program(std::string_view text, const std::string& file = "<input>");

/// Parses a `.lat` lattice description such as "L, H; L < H".
/// Throws ParseError on bad syntax and LatticeError when the order is not a lattice.
Lattice parse_lattice(std::string_view text, const std::string& file = "<lattice>");

/// Parses a statement snippet (e.g. a replacement method body). Identifiers in
/// `params` resolve to variables and identifiers in `addresses` to address literals.
StmtPtr parse_statement(std::string_view text, const std::vector<std::string>& params,
                        const std::set<std::string>& addresses,
                        const std::string& file = "<snippet>");

/// Parses one transaction, e.g. "A->X.f(1, Y):0".
Transaction parse_transaction(std::string_view text, const std::string& file = "<tx>");

/// Parses "I<L>" or "L".
BaseTypeExpr parse_base_type(std::string_view text, const std::string& file = "<type>");

}  // namespace tinysol
