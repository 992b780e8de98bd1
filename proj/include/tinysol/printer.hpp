#pragma once

#include <string>

#include "tinysol/ast.hpp"

namespace tinysol {

/// Concrete syntax that parses back to a structurally equal AST.
std::string print_expr(const Expr& e);
std::string print_stmt(const Stmt& s, int indent = 0);
std::string print_transaction(const Transaction& t);
std::string print_interface(const InterfaceDecl& d);
std::string print_contract(const ContractDecl& c);
std::string print_lattice(const Lattice& l);  // "L, H; L < H"
std::string print_program(const Blockchain& b);

}  // namespace tinysol
