#ifndef MAEQ_STATE_HPP
#define MAEQ_STATE_HPP

#include <compare>
#include <stdexcept>
#include <string>

#include "maeq/rational.hpp"

namespace maeq {

/// A state name. Base states come from the model text; pair states only
/// appear inside late-semantics transition systems, where [s,t] delays the
/// sojourn of s before moving to t.
struct StateId {
  enum class Kind { Base, Pair };

  Kind kind = Kind::Base;
  std::string name;    // base name, or the stable source of a pair state
  std::string target;  // pair states only

  static StateId base(std::string n) { return {Kind::Base, std::move(n), {}}; }
  static StateId pair(std::string s, std::string t) {
    return {Kind::Pair, std::move(s), std::move(t)};
  }

  bool is_pair() const { return kind == Kind::Pair; }

  std::string display() const {
    return is_pair() ? "[" + name + "," + target + "]" : name;
  }

  friend auto operator<=>(const StateId&, const StateId&) = default;
};

/// A transition label: internal tau, a visible action, or an exponential
/// rate. Rate labels occur only in derived transition systems, never in the
/// probabilistic transitions of a Markov automaton.
struct Action {
  enum class Kind { Tau, Visible, Rate };

  Kind kind = Kind::Tau;
  std::string label;  // visible actions
  Rational rate;      // rate labels, > 0

  static Action tau() { return {}; }
  static Action visible(std::string l) {
    return {Kind::Visible, std::move(l), Rational(0)};
  }
  static Action markov(Rational r) {
    if (r <= 0) throw std::invalid_argument("rate must be positive");
    return {Kind::Rate, {}, std::move(r)};
  }

  bool is_tau() const { return kind == Kind::Tau; }
  bool is_visible() const { return kind == Kind::Visible; }
  bool is_rate() const { return kind == Kind::Rate; }

  std::string display() const {
    switch (kind) {
      case Kind::Tau: return "tau";
      case Kind::Visible: return label;
      case Kind::Rate: return to_string(rate);
    }
    return {};
  }

  friend bool operator==(const Action& a, const Action& b) {
    return a.kind == b.kind && a.label == b.label && a.rate == b.rate;
  }
  friend bool operator<(const Action& a, const Action& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.label != b.label) return a.label < b.label;
    return a.rate < b.rate;
  }
};

}  // namespace maeq

#endif
