#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tinysol {

/// Index of an element in a Lattice.
struct Level {
  std::uint8_t index = 0;
  friend auto operator<=>(const Level&, const Level&) = default;
};

class LatticeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finite security lattice (S, ⊑). Built from a list of element names and
/// a covering relation; the order is the reflexive-transitive closure.
class Lattice {
 public:
  using Cover = std::pair<std::string, std::string>;

  /// Throws LatticeError if the closure is not antisymmetric or some pair
  /// lacks a unique join or meet.
  Lattice(std::vector<std::string> elements, std::vector<Cover> covers);

  /// The default {L, H} lattice with L ⊑ H.
  static Lattice two_point();

  std::size_t size() const { return names_.size(); }
  const std::string& name(Level l) const { return names_.at(l.index); }
  std::optional<Level> find(const std::string& name) const;
  Level at(const std::string& name) const;

  bool leq(Level a, Level b) const { return order_[a.index * size() + b.index]; }
  Level join(Level a, Level b) const { return joins_[a.index * size() + b.index]; }
  Level meet(Level a, Level b) const { return meets_[a.index * size() + b.index]; }
  Level bottom() const { return bottom_; }
  Level top() const { return top_; }
  std::vector<Level> levels() const;

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Cover>& covers() const { return covers_; }

  /// Same elements (by name) and the same order; the covering list may differ.
  friend bool operator==(const Lattice& a, const Lattice& b);

 private:
  std::vector<std::string> names_;
  std::vector<Cover> covers_;
  std::vector<bool> order_;
  std::vector<Level> joins_;
  std::vector<Level> meets_;
  Level bottom_;
  Level top_;
};

}  // namespace tinysol
