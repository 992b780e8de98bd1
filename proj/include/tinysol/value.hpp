#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>

namespace tinysol {

struct Address {
  std::string name;
  friend auto operator<=>(const Address&, const Address&) = default;
};

/// Nat, Bool or Addr. Naturals are 64-bit and saturate at the top.
using Value = std::variant<std::uint64_t, bool, Address>;

enum class ValueKind { Nat, Bool, Addr };

inline Value nat(std::uint64_t n) { return Value{std::in_place_index<0>, n}; }
inline Value boolean(bool b) { return Value{std::in_place_index<1>, b}; }
inline Value addr(std::string a) { return Value{std::in_place_index<2>, Address{std::move(a)}}; }

inline ValueKind kind_of(const Value& v) { return static_cast<ValueKind>(v.index()); }
const char* kind_name(ValueKind k);

inline bool is_nat(const Value& v) { return v.index() == 0; }
inline bool is_bool(const Value& v) { return v.index() == 1; }
inline bool is_addr(const Value& v) { return v.index() == 2; }
inline std::uint64_t as_nat(const Value& v) { return std::get<0>(v); }
inline bool as_bool(const Value& v) { return std::get<1>(v); }
inline const std::string& as_addr(const Value& v) { return std::get<2>(v).name; }

/// Source form: 42, true, false, X.
std::string to_string(const Value& v);

}  // namespace tinysol
