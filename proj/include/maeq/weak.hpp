#ifndef MAEQ_WEAK_HPP
#define MAEQ_WEAK_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "maeq/semantics.hpp"

namespace maeq {

/// Knobs of the bounded weak-transition search. `grid_denominator` bounds
/// the denominators of the per-state split fractions; `tau_depth` bounds the
/// number of deterministic-tau rounds composed on each side of a step.
struct SearchBounds {
  int grid_denominator = 4;
  int tau_depth = 3;
};

/// All fractions p/q with 0 < p <= q <= maxDen, reduced, ascending.
inline std::vector<Rational> split_fractions(int max_den) {
  std::set<Rational> fs;
  for (int q = 1; q <= max_den; ++q)
    for (int p = 1; p <= q; ++p) fs.insert(Rational(p, q));
  return {fs.begin(), fs.end()};
}

/// One indexed challenge: move a part of mass `rho`, either as a bare tau
/// regrouping (pure split) or through one strong step on the moved part.
/// `result` is the normalized distribution after the move.
struct Challenge {
  Action action;
  Rational rho;
  Distribution result;
  bool pure_split = false;

  std::string display() const {
    return "(" + action.display() + ", " + to_string(rho) + ", " +
           result.display() + ")";
  }

  friend bool operator==(const Challenge&, const Challenge&) = default;
  friend bool operator<(const Challenge& a, const Challenge& b) {
    if (a.action != b.action) return a.action < b.action;
    if (a.rho != b.rho) return a.rho < b.rho;
    if (a.result != b.result) return a.result < b.result;
    return a.pure_split < b.pure_split;
  }
};

/// Cached weak-transition machinery over one transition system. All
/// operations are bounded by SearchBounds and therefore under-approximate
/// the unbounded weak transitions (soundly for Distinguished verdicts).
class WeakAnalyzer {
 public:
  WeakAnalyzer(const Mlts& m, SearchBounds bounds) : m_(m), bounds_(bounds) {
    // Absolute denominator cap for split pieces: repeated grid refinement
    // would otherwise compound denominators indefinitely, making the pair
    // lattice infinite. Two grid levels on top of the model's own
    // probabilities cover every documented verdict; the cap keeps every
    // engine's search space finite.
    Integer lcm = 1;
    for (const auto& t : m_.trans)
      for (const auto& [s, p] : t.target.entries())
        lcm = boost::multiprecision::lcm(
            lcm, boost::multiprecision::denominator(p));
    denom_cap_ = lcm * bounds_.grid_denominator * bounds_.grid_denominator;
  }

  const Mlts& mlts() const { return m_; }
  const SearchBounds& bounds() const { return bounds_; }

  /// Full limits of the deterministic tau unfoldings of s (includes the
  /// all-stop limit, the Dirac on s).
  const std::vector<Distribution>& det_tau(const StateId& s) {
    auto it = det_tau_cache_.find(s);
    if (it != det_tau_cache_.end()) return it->second;
    auto limits = det_weak_tau(m_, s).full_limits();
    return det_tau_cache_
        .emplace(s, std::vector<Distribution>(limits.begin(), limits.end()))
        .first->second;
  }

  /// Whether some deterministic tau unfolding of s loses all mass to a tau
  /// cycle, i.e. s can internally diverge with probability one.
  bool is_divergent(const StateId& s) {
    auto it = divergent_cache_.find(s);
    if (it != divergent_cache_.end()) return it->second;
    bool div = false;
    for (const auto& item : det_weak_tau(m_, s).deficient)
      if (item.limit.mass() == 0) div = true;
    return divergent_cache_.emplace(s, div).first->second;
  }

  bool is_divergent(const Distribution& mu) {
    for (const auto& [s, p] : mu.entries())
      if (!is_divergent(s)) return false;
    return true;
  }

  /// Visible and rate actions enabled somewhere in the internal closure of
  /// s: every state reachable from s through positive-probability tau edges
  /// contributes its non-tau actions.
  const std::set<Action>& weak_signature(const StateId& s) {
    if (auto it = signature_cache_.find(s); it != signature_cache_.end())
      return it->second;
    std::set<Action> sig;
    std::set<StateId> seen{s};
    std::vector<StateId> queue{s};
    while (!queue.empty()) {
      StateId cur = std::move(queue.back());
      queue.pop_back();
      for (const auto* t : m_.outgoing(cur)) {
        if (t->action.is_tau()) {
          for (const auto& [u, p] : t->target.entries())
            if (seen.insert(u).second) queue.push_back(u);
        } else {
          sig.insert(t->action);
        }
      }
    }
    return signature_cache_.emplace(s, std::move(sig)).first->second;
  }

  const Integer& denom_cap() const { return denom_cap_; }

  std::set<Action> weak_signature(const Distribution& mu) {
    std::set<Action> sig;
    for (const auto& s : mu.support()) {
      const auto& part = weak_signature(s);
      sig.insert(part.begin(), part.end());
    }
    return sig;
  }

  /// Weak tau successors of a (sub-)distribution: up to tau_depth rounds in
  /// which every support state independently follows one deterministic tau
  /// unfolding. Contains mu itself.
  std::set<Distribution> tau_closure(const Distribution& mu) {
    std::set<Distribution> out{mu};
    std::vector<Distribution> frontier{mu};
    for (int round = 0; round < bounds_.tau_depth && !frontier.empty();
         ++round) {
      std::vector<Distribution> next;
      for (const auto& d : frontier) {
        expand_round(d, [&](Distribution&& cand) {
          if (out.insert(cand).second) next.push_back(std::move(cand));
        });
      }
      frontier = std::move(next);
    }
    return out;
  }

  /// Bounded weak transitions of a single state: tau rounds, one strong
  /// step labeled `a`, tau rounds. For a = tau this is the tau closure of
  /// the Dirac (so stopping immediately is always included).
  const std::vector<Distribution>& weak_post(const StateId& s, const Action& a) {
    auto key = std::make_pair(s, a);
    auto it = weak_post_cache_.find(key);
    if (it != weak_post_cache_.end()) return it->second;
    std::set<Distribution> out;
    Distribution d0 = Distribution::dirac(s);
    if (a.is_tau()) {
      out = tau_closure(d0);
    } else {
      for (const auto& pre : tau_closure(d0))
        for (const auto& stepped : lift_step(m_, pre, a))
          for (const auto& post : tau_closure(stepped)) out.insert(post);
    }
    return weak_post_cache_
        .emplace(key, std::vector<Distribution>(out.begin(), out.end()))
        .first->second;
  }

  /// Lifted bounded weak transition of a distribution: every support state
  /// contributes one weak_post successor.
  std::set<Distribution> lifted_weak(const Distribution& mu, const Action& a) {
    std::set<Distribution> out;
    std::vector<StateId> supp = mu.support();
    std::vector<const std::vector<Distribution>*> options;
    for (const auto& s : supp) {
      options.push_back(&weak_post(s, a));
      if (options.back()->empty()) return out;
    }
    std::vector<std::size_t> pick(supp.size(), 0);
    while (true) {
      Distribution acc;
      for (std::size_t i = 0; i < supp.size(); ++i)
        for (const auto& [t, q] : (*options[i])[pick[i]].entries())
          acc.add(t, mu.at(supp[i]) * q);
      out.insert(std::move(acc));
      std::size_t k = supp.size();
      while (k > 0) {
        --k;
        if (++pick[k] < options[k]->size()) break;
        pick[k] = 0;
        if (k == 0) return out;
      }
    }
  }

  /// All sub-distributions obtained by scaling each entry of mu with a
  /// fraction from the split grid (or dropping it). Excludes the empty one.
  std::vector<Distribution> splits(const Distribution& mu) {
    std::vector<Distribution> out;
    enum_splits(mu, std::nullopt, [&](Distribution&& part) {
      out.push_back(std::move(part));
    });
    return out;
  }

  /// Splits with a prescribed total mass. The proportional carve is always
  /// included: the grid only produces masses that are grid fractions of the
  /// entries, while a responder must be able to match any challenged mass,
  /// and scaling the whole distribution does so without leaving the
  /// normalized-distribution universe already being explored.
  std::vector<Distribution> splits_with_mass(const Distribution& mu,
                                             const Rational& rho) {
    std::vector<Distribution> out;
    if (rho > 0 && rho <= mu.mass())
      out.push_back(dist_scale(rho / mu.mass(), mu));
    enum_splits(mu, rho, [&](Distribution&& part) {
      if (out.empty() || !(part == out.front())) out.push_back(std::move(part));
    });
    return out;
  }

  /// Strong indexed challenges of mu: choose a grid split mu1 (nonempty),
  /// then either regroup (pure tau split) or take one lifted strong step of
  /// the normalized part. Deduplicated; Dirac-result and subset challenges
  /// come first so the cheap discharges in the checker see them early.
  const std::vector<Challenge>& challenges(const Distribution& mu) {
    auto it = challenge_cache_.find(mu);
    if (it != challenge_cache_.end()) return it->second;
    std::set<Challenge> set;
    for (const auto& part : splits(mu)) {
      Rational rho = part.mass();
      Distribution norm = dist_normalize(part);
      set.insert({Action::tau(), rho, norm, true});
      for (const auto& a : m_.all_actions())
        for (const auto& res : lift_step(m_, norm, a))
          set.insert({a, rho, res, false});
    }
    std::vector<Challenge> out(set.begin(), set.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const Challenge& a, const Challenge& b) {
                       auto ka = a.result.support().size();
                       auto kb = b.result.support().size();
                       if (ka != kb) return ka < kb;
                       return b.rho < a.rho;  // larger moved mass first
                     });
    return challenge_cache_.emplace(mu, std::move(out)).first->second;
  }

  /// Weak indexed challenges: as above but the step of the moved part is a
  /// bounded weak transition. Used to cross-check that weak challenges do
  /// not change the relation.
  std::vector<Challenge> weak_challenges(const Distribution& mu) {
    std::set<Challenge> set;
    for (const auto& kappa : tau_closure(mu)) {
      for (const auto& part : splits(kappa)) {
        Rational rho = part.mass();
        Distribution norm = dist_normalize(part);
        for (const auto& res : tau_closure(norm))
          set.insert({Action::tau(), rho, res, res == norm});
        for (const auto& a : m_.all_actions()) {
          if (a.is_tau()) continue;
          for (const auto& res : lifted_weak(norm, a))
            set.insert({a, rho, res, false});
        }
      }
    }
    return {set.begin(), set.end()};
  }

  /// Bounded search for a weak indexed response: move the whole
  /// distribution by weak tau rounds, select a grid part of mass rho, then
  /// (for visible/rate actions) perform a lifted weak step of the
  /// normalized part. Returns the first candidate accepted.
  std::optional<Distribution> search_response(
      const Distribution& nu, const Action& a, const Rational& rho,
      const std::function<bool(const Distribution&)>& accept) {
    std::set<Distribution> tested;
    for (const auto& kappa : tau_closure(nu)) {
      for (const auto& part : splits_with_mass(kappa, rho)) {
        Distribution omega = dist_normalize(part);
        if (a.is_tau()) {
          for (const auto& cand : tau_closure(omega)) {
            if (!tested.insert(cand).second) continue;
            if (accept(cand)) return cand;
          }
        } else {
          for (const auto& cand : lifted_weak(omega, a)) {
            if (!tested.insert(cand).second) continue;
            if (accept(cand)) return cand;
          }
        }
      }
    }
    return std::nullopt;
  }

 private:
  /// One round of per-state deterministic tau choices.
  template <typename Emit>
  void expand_round(const Distribution& mu, Emit&& emit) {
    std::vector<StateId> supp = mu.support();
    std::vector<const std::vector<Distribution>*> options;
    for (const auto& s : supp) options.push_back(&det_tau(s));
    std::vector<std::size_t> pick(supp.size(), 0);
    while (true) {
      Distribution acc;
      for (std::size_t i = 0; i < supp.size(); ++i)
        for (const auto& [t, q] : (*options[i])[pick[i]].entries())
          acc.add(t, mu.at(supp[i]) * q);
      emit(std::move(acc));
      std::size_t k = supp.size();
      while (k > 0) {
        --k;
        if (++pick[k] < options[k]->size()) break;
        pick[k] = 0;
        if (k == 0) return;
      }
      if (supp.empty()) return;
    }
  }

  template <typename Emit>
  void enum_splits(const Distribution& mu, std::optional<Rational> target,
                   Emit&& emit) {
    const auto& entries = mu.entries();
    std::vector<std::pair<StateId, Rational>> flat(entries.begin(),
                                                   entries.end());
    std::vector<Rational> suffix_mass(flat.size() + 1, Rational(0));
    for (std::size_t i = flat.size(); i-- > 0;)
      suffix_mass[i] = suffix_mass[i + 1] + flat[i].second;
    auto fractions = split_fractions(bounds_.grid_denominator);
    Distribution part;
    std::function<void(std::size_t, Rational)> rec = [&](std::size_t i,
                                                         Rational acc) {
      if (target && acc > *target) return;
      if (target && acc + suffix_mass[i] < *target) return;
      if (i == flat.size()) {
        if (part.mass() == 0) return;
        if (target && acc != *target) return;
        emit(Distribution(part));
        return;
      }
      rec(i + 1, acc);  // drop this state
      for (const auto& f : fractions) {
        Rational piece = f * flat[i].second;
        if (boost::multiprecision::denominator(piece) > denom_cap_) continue;
        part.add(flat[i].first, piece);
        rec(i + 1, acc + piece);
        part.subtract(flat[i].first, piece);
      }
    };
    rec(0, Rational(0));
  }

  const Mlts& m_;
  SearchBounds bounds_;
  Integer denom_cap_ = 1;
  std::map<StateId, std::vector<Distribution>> det_tau_cache_;
  std::map<StateId, bool> divergent_cache_;
  std::map<StateId, std::set<Action>> signature_cache_;
  std::map<std::pair<StateId, Action>, std::vector<Distribution>>
      weak_post_cache_;
  std::map<Distribution, std::vector<Challenge>> challenge_cache_;
};

/// A state is time-convergent when some deterministic tau unfolding reaches
/// a full, stable limit; time passes with probability one from there.
inline bool is_time_convergent(const Mlts& m, const StateId& s) {
  for (const auto& item : det_weak_tau(m, s).full)
    if (m.is_stable_dist(item.limit)) return true;
  return false;
}

/// A system is time-convergent when all its states are.
inline bool is_time_convergent(const Mlts& m) {
  for (const auto& s : m.states)
    if (!is_time_convergent(m, s)) return false;
  return true;
}

}  // namespace maeq

#endif
