#ifndef MAEQ_DISTRIBUTION_HPP
#define MAEQ_DISTRIBUTION_HPP

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "maeq/rational.hpp"
#include "maeq/state.hpp"

namespace maeq {

/// A (sub-)distribution over states: a finite map from states to strictly
/// positive rationals with total mass at most one. Entries are kept in a
/// canonical order so that structural equality coincides with mathematical
/// equality; distributions are usable as map keys.
class Distribution {
 public:
  using Map = std::map<StateId, Rational>;

  Distribution() = default;

  static Distribution dirac(StateId s) {
    Distribution d;
    d.entries_[std::move(s)] = 1;
    return d;
  }

  /// Accumulates mass on a state; entries that cancel to zero are dropped.
  void add(const StateId& s, const Rational& p) {
    if (p == 0) return;
    auto [it, inserted] = entries_.try_emplace(s, p);
    if (!inserted) it->second += p;
    if (it->second < 0) throw std::invalid_argument("negative probability");
    if (it->second == 0) entries_.erase(it);
    if (mass() > 1) throw std::invalid_argument("distribution mass exceeds 1");
  }

  const Map& entries() const { return entries_; }
  void subtract(const StateId& s, const Rational& p) {
    auto it = entries_.find(s);
    if (it == entries_.end() || it->second < p)
      throw std::invalid_argument("subtract exceeds stored mass");
    it->second -= p;
    if (it->second == 0) entries_.erase(it);
  }

  bool empty() const { return entries_.empty(); }
  std::size_t support_size() const { return entries_.size(); }

  Rational at(const StateId& s) const {
    auto it = entries_.find(s);
    return it == entries_.end() ? Rational(0) : it->second;
  }

  Rational mass() const {
    Rational m = 0;
    for (const auto& [s, p] : entries_) m += p;
    return m;
  }

  bool is_full() const { return mass() == 1; }
  bool is_dirac() const { return entries_.size() == 1 && is_full(); }

  std::vector<StateId> support() const {
    std::vector<StateId> out;
    out.reserve(entries_.size());
    for (const auto& [s, p] : entries_) out.push_back(s);
    return out;
  }

  std::string display() const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [s, p] : entries_) {
      if (!first) os << ", ";
      first = false;
      os << p << ":" << s.display();
    }
    os << "}";
    return os.str();
  }

  friend bool operator==(const Distribution& a, const Distribution& b) {
    return a.entries_ == b.entries_;
  }
  friend bool operator<(const Distribution& a, const Distribution& b) {
    return std::lexicographical_compare(
        a.entries_.begin(), a.entries_.end(), b.entries_.begin(),
        b.entries_.end(), [](const auto& x, const auto& y) {
          if (x.first != y.first) return x.first < y.first;
          return x.second < y.second;
        });
  }

 private:
  Map entries_;
};

/// Pointwise sum of two sub-distributions. Defined only when the combined
/// mass stays within one.
inline Distribution dist_join(const Distribution& a, const Distribution& b) {
  if (a.mass() + b.mass() > 1)
    throw std::invalid_argument("dist_join: combined mass exceeds 1");
  Distribution out = a;
  for (const auto& [s, p] : b.entries()) out.add(s, p);
  return out;
}

/// Pointwise scaling by a nonnegative rational.
inline Distribution dist_scale(const Rational& x, const Distribution& mu) {
  if (x < 0) throw std::invalid_argument("dist_scale: negative factor");
  if (x * mu.mass() > 1)
    throw std::invalid_argument("dist_scale: scaled mass exceeds 1");
  Distribution out;
  for (const auto& [s, p] : mu.entries()) out.add(s, x * p);
  return out;
}

/// Removes one state from the support, leaving the rest unchanged.
inline Distribution dist_minus(const Distribution& mu, const StateId& s) {
  Distribution out;
  for (const auto& [t, p] : mu.entries())
    if (t != s) out.add(t, p);
  return out;
}

/// Pointwise difference; `part` must be dominated by `mu`.
inline Distribution dist_minus(const Distribution& mu,
                               const Distribution& part) {
  Distribution out = mu;
  for (const auto& [s, p] : part.entries()) out.subtract(s, p);
  return out;
}

/// Rescales a nonempty sub-distribution to mass one.
inline Distribution dist_normalize(const Distribution& mu) {
  Rational m = mu.mass();
  if (m == 0) throw std::invalid_argument("dist_normalize: empty distribution");
  return dist_scale(Rational(1) / m, mu);
}

/// Product distribution over composite states s1|s2. Both inputs must be
/// full; the result is full.
inline Distribution dist_product(const Distribution& a, const Distribution& b) {
  if (!a.is_full() || !b.is_full())
    throw std::invalid_argument("dist_product: inputs must be full");
  Distribution out;
  for (const auto& [s1, p1] : a.entries())
    for (const auto& [s2, p2] : b.entries())
      out.add(StateId::base(s1.display() + "|" + s2.display()), p1 * p2);
  return out;
}

}  // namespace maeq

#endif
