#include "tinysol/lattice.hpp"

#include <algorithm>
#include <set>

namespace tinysol {

namespace {

// Least element of `candidates` under `leq`, if one exists.
template <class Leq>
std::optional<std::size_t> least(const std::vector<std::size_t>& candidates, Leq leq) {
  for (std::size_t c : candidates) {
    bool below_all = std::all_of(candidates.begin(), candidates.end(),
                                 [&](std::size_t o) { return leq(c, o); });
    if (below_all) return c;
  }
  return std::nullopt;
}

}  // namespace

Lattice::Lattice(std::vector<std::string> elements, std::vector<Cover> covers)
    : names_(std::move(elements)), covers_(std::move(covers)) {
  // Elements mentioned only in covers are added in order of appearance.
  for (const auto& [lo, hi] : covers_) {
    for (const auto* n : {&lo, &hi}) {
      if (std::find(names_.begin(), names_.end(), *n) == names_.end()) names_.push_back(*n);
    }
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw LatticeError("duplicate lattice element '" + n + "'");
  }
  if (names_.empty()) throw LatticeError("lattice has no elements");
  if (names_.size() > 255) throw LatticeError("lattice has too many elements");

  const std::size_t n = names_.size();
  order_.assign(n * n, false);
  for (std::size_t i = 0; i < n; ++i) order_[i * n + i] = true;
  auto index_of = [&](const std::string& s) {
    return static_cast<std::size_t>(std::find(names_.begin(), names_.end(), s) - names_.begin());
  };
  for (const auto& [lo, hi] : covers_) order_[index_of(lo) * n + index_of(hi)] = true;
  // Warshall closure.
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (order_[i * n + k])
        for (std::size_t j = 0; j < n; ++j)
          if (order_[k * n + j]) order_[i * n + j] = true;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (order_[i * n + j] && order_[j * n + i])
        throw LatticeError("not a lattice: cycle between '" + names_[i] + "' and '" + names_[j] +
                           "'");

  auto le = [&](std::size_t a, std::size_t b) { return static_cast<bool>(order_[a * n + b]); };
  auto ge = [&](std::size_t a, std::size_t b) { return le(b, a); };
  joins_.resize(n * n);
  meets_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::size_t> upper, lower;
      for (std::size_t k = 0; k < n; ++k) {
        if (le(i, k) && le(j, k)) upper.push_back(k);
        if (le(k, i) && le(k, j)) lower.push_back(k);
      }
      auto jn = least(upper, le);
      if (!jn)
        throw LatticeError("not a lattice: '" + names_[i] + "' and '" + names_[j] +
                           "' have no unique join");
      auto mt = least(lower, ge);
      if (!mt)
        throw LatticeError("not a lattice: '" + names_[i] + "' and '" + names_[j] +
                           "' have no unique meet");
      joins_[i * n + j] = Level{static_cast<std::uint8_t>(*jn)};
      meets_[i * n + j] = Level{static_cast<std::uint8_t>(*mt)};
    }
  }
  Level b{0}, t{0};
  for (std::size_t i = 1; i < n; ++i) {
    b = meets_[b.index * n + i];
    t = joins_[t.index * n + i];
  }
  bottom_ = b;
  top_ = t;
}

Lattice Lattice::two_point() { return Lattice({"L", "H"}, {{"L", "H"}}); }

std::optional<Level> Lattice::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return Level{static_cast<std::uint8_t>(it - names_.begin())};
}

Level Lattice::at(const std::string& name) const {
  auto l = find(name);
  if (!l) throw LatticeError("unknown security level '" + name + "'");
  return *l;
}

std::vector<Level> Lattice::levels() const {
  std::vector<Level> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(Level{static_cast<std::uint8_t>(i)});
  return out;
}

bool operator==(const Lattice& a, const Lattice& b) {
  if (a.size() != b.size()) return false;
  for (const auto& n : a.names_)
    if (!b.find(n)) return false;
  for (Level x : a.levels())
    for (Level y : a.levels())
      if (a.leq(x, y) != b.leq(b.at(a.name(x)), b.at(a.name(y)))) return false;
  return true;
}

}  // namespace tinysol
