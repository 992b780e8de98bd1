#include "tinysol/env.hpp"

#include <limits>

namespace tinysol {

std::uint64_t total_balance(const State& s) {
  std::uint64_t sum = 0;
  for (const auto& [addr, fields] : s) {
    const Value* b = fields.lookup("balance");
    if (!b || !is_nat(*b)) continue;
    std::uint64_t n = as_nat(*b);
    sum = n > std::numeric_limits<std::uint64_t>::max() - sum
              ? std::numeric_limits<std::uint64_t>::max()
              : sum + n;
  }
  return sum;
}

const Value* lookup_field(const State& s, const std::string& address, const std::string& field) {
  auto it = s.find(address);
  return it == s.end() ? nullptr : it->second.lookup(field);
}

const MethodDef* lookup_method(const MethodTable& t, const std::string& address,
                               const std::string& method) {
  auto it = t.find(address);
  return it == t.end() ? nullptr : it->second.lookup(method);
}

}  // namespace tinysol
