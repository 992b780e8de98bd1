#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tinysol/ast.hpp"
#include "tinysol/value.hpp"

namespace tinysol {

/// Persistent list of (name, V) pairs. Lookup finds the binding nearest the
/// head; every operation returns a new list and leaves the old one valid.
template <class V>
class AssocList {
 public:
  AssocList() = default;
  AssocList(std::initializer_list<std::pair<std::string, V>> items) {
    std::vector<std::pair<std::string, V>> v(items);
    for (auto it = v.rbegin(); it != v.rend(); ++it) *this = prepend(it->first, it->second);
  }

  bool empty() const { return !head_; }

  std::size_t size() const {
    std::size_t n = 0;
    for (auto p = head_.get(); p; p = p->next.get()) ++n;
    return n;
  }

  /// Nearest binding, or nullptr when the key is undefined.
  const V* lookup(const std::string& key) const {
    for (auto p = head_.get(); p; p = p->next.get())
      if (p->key == key) return &p->value;
    return nullptr;
  }

  bool contains(const std::string& key) const { return lookup(key) != nullptr; }

  AssocList prepend(std::string key, V value) const {
    AssocList out;
    out.head_ = std::make_shared<const Node>(Node{std::move(key), std::move(value), head_});
    return out;
  }

  /// ρ[key ↦ value]: rebinds the nearest occurrence, or prepends when absent.
  AssocList update(const std::string& key, V value) const {
    std::vector<const Node*> prefix;
    const Node* p = head_.get();
    for (; p && p->key != key; p = p->next.get()) prefix.push_back(p);
    if (!p) return prepend(key, std::move(value));
    AssocList out;
    out.head_ = std::make_shared<const Node>(Node{key, std::move(value), p->next});
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
      out.head_ = std::make_shared<const Node>(Node{(*it)->key, (*it)->value, out.head_});
    return out;
  }

  /// The list without its head binding.
  AssocList tail() const {
    AssocList out;
    if (head_) out.head_ = head_->next;
    return out;
  }

  std::vector<std::pair<std::string, V>> items() const {
    std::vector<std::pair<std::string, V>> out;
    for (auto p = head_.get(); p; p = p->next.get()) out.emplace_back(p->key, p->value);
    return out;
  }

  /// Same pairs in the same order.
  friend bool operator==(const AssocList& a, const AssocList& b) {
    auto p = a.head_.get();
    auto q = b.head_.get();
    for (; p && q; p = p->next.get(), q = q->next.get()) {
      if (p == q) return true;
      if (p->key != q->key || !(p->value == q->value)) return false;
    }
    return p == q;
  }

 private:
  struct Node {
    std::string key;
    V value;
    std::shared_ptr<const Node> next;
  };
  std::shared_ptr<const Node> head_;
};

using VarEnv = AssocList<Value>;    // ρV
using FieldEnv = AssocList<Value>;  // ρF

struct MethodDef {
  std::vector<std::string> params;
  StmtPtr body;
  friend bool operator==(const MethodDef& a, const MethodDef& b) {
    return a.params == b.params && equal(a.body, b.body);
  }
};

using MethodEnv = AssocList<MethodDef>;           // ρM
using State = std::map<std::string, FieldEnv>;     // ρS
using MethodTable = std::map<std::string, MethodEnv>;  // ρT

/// Sum of all balances. Saturates like Nat arithmetic.
std::uint64_t total_balance(const State& s);

/// ρS(X)(p), or nullptr.
const Value* lookup_field(const State& s, const std::string& address, const std::string& field);

/// ρT(X)(f), or nullptr.
const MethodDef* lookup_method(const MethodTable& t, const std::string& address,
                               const std::string& method);

}  // namespace tinysol
