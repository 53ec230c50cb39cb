#ifndef MAEQ_EQUIVALENCE_HPP
#define MAEQ_EQUIVALENCE_HPP

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "maeq/weak.hpp"

namespace maeq {

enum class Outcome { Equivalent, Distinguished, ResourceLimit };
enum class RelationKind { Bisim, Sim, Kernel, Ehz, Dh };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Equivalent: return "Equivalent";
    case Outcome::Distinguished: return "Distinguished";
    case Outcome::ResourceLimit: return "ResourceLimit";
  }
  return {};
}

inline std::string to_string(RelationKind r) {
  switch (r) {
    case RelationKind::Bisim: return "bisim";
    case RelationKind::Sim: return "sim";
    case RelationKind::Kernel: return "kernel";
    case RelationKind::Ehz: return "ehz";
    case RelationKind::Dh: return "dh";
  }
  return {};
}

/// Node of a replayable counterexample: at the pair (mu, nu) the challenger
/// on `side` played `challenge` and every candidate response failed; the
/// failures of the first few candidates are recorded as children.
struct FailureNode {
  Distribution mu, nu;
  std::string side;  // "lhs" or "rhs"
  Challenge challenge;
  std::string reason;
  std::vector<FailureNode> children;
};

struct CheckStats {
  std::size_t pairs_explored = 0;
  std::size_t challenges = 0;
  std::int64_t wall_time_ms = 0;
};

struct CheckerOptions {
  SearchBounds bounds;
  bool divergence_sensitive = false;
  std::size_t pair_budget = 10000;
  std::size_t depth_budget = 256;  // nesting cap; overruns report ResourceLimit
  bool weak_challenges = false;  // cross-check knob, not exposed on the CLI
  std::size_t max_witness_children = 4;
};

struct Verdict {
  Outcome outcome = Outcome::Equivalent;
  std::optional<FailureNode> counterexample;
  std::vector<std::pair<Distribution, Distribution>> witness;
  CheckStats stats;
  std::string caveat;  // ExactOnCorpusClass or BoundedSearch
  SearchBounds bounds;
};

namespace detail {

constexpr std::size_t kNoDep = static_cast<std::size_t>(-1);

/// Shared assume-and-discharge state: a trail of in-progress assumptions,
/// persistent caches for self-contained results, and the exact coupling
/// discharge. Validation reports the shallowest trail assumption a proof
/// leaned on, so only proofs independent of open assumptions are cached.
class CheckerCore {
 public:
  CheckerCore(WeakAnalyzer& an, CheckerOptions opt)
      : an_(an), opt_(std::move(opt)), pair_limit_(opt_.pair_budget) {}

  CheckStats& stats() { return stats_; }
  bool budget_exceeded() const { return budget_; }
  virtual ~CheckerCore() = default;

 protected:
  using Pair = std::pair<Distribution, Distribution>;

  struct Res {
    bool ok;
    std::size_t mindep;
  };

  struct TrailGuard {
    CheckerCore& core;
    Pair key;
    ~TrailGuard() {
      core.trail_.pop_back();
      core.trail_index_.erase(key);
    }
  };

  /// Cheap discharges shared by all engines. Returns a result when the pair
  /// can be decided without exploring challenges.
  std::optional<Res> pre_validate(const Distribution& mu,
                                  const Distribution& nu, bool symmetric) {
    if (budget_) return Res{false, kNoDep};
    if (mu == nu) return Res{true, kNoDep};
    Pair key{mu, nu};
    if (proven_.count(key)) return Res{true, kNoDep};
    if (failed_.count(key)) return Res{false, kNoDep};
    if (auto it = trail_index_.find(key); it != trail_index_.end())
      return Res{true, it->second};
    if (opt_.divergence_sensitive &&
        an_.is_divergent(mu) != an_.is_divergent(nu)) {
      failed_.insert(key);
      return Res{false, kNoDep};
    }
    // The challenger can isolate any positive-probability internal
    // descendant and fire one of its actions, so the weakly enabled action
    // sets must agree (be included, for one-directional games). Checking
    // this up front prunes refutations that the challenge search would only
    // reach after a long splitting phase.
    {
      auto sl = an_.weak_signature(mu);
      auto sr = an_.weak_signature(nu);
      bool sig_ok = symmetric ? sl == sr
                              : std::includes(sr.begin(), sr.end(),
                                              sl.begin(), sl.end());
      if (!sig_ok) {
        failed_.insert(key);
        return Res{false, kNoDep};
      }
    }
    if (auto dep = coupling(mu, nu, symmetric)) return Res{true, *dep};
    if (++stats_.pairs_explored > pair_limit_) {
      budget_ = true;
      return Res{false, kNoDep};
    }
    return std::nullopt;
  }

  /// Full engine-specific validation of a Dirac pair, invoked by the
  /// coupling discharge when it needs a state pair nobody has decided yet.
  virtual Res validate_pair(const Distribution& l, const Distribution& r) = 0;

  /// The cost-free subset of pre_validate: decides a pair from caches,
  /// assumptions, or a coupling, without counting it against the budget.
  /// Used to try every response candidate cheaply before any candidate is
  /// explored in full, so an easy correct response is never shadowed by an
  /// expensive doomed one.
  std::optional<Res> cheap_probe(const Distribution& mu,
                                 const Distribution& nu, bool symmetric) {
    if (mu == nu) return Res{true, kNoDep};
    Pair key{mu, nu};
    if (proven_.count(key)) return Res{true, kNoDep};
    if (failed_.count(key)) return Res{false, kNoDep};
    if (auto it = trail_index_.find(key); it != trail_index_.end())
      return Res{true, it->second};
    if (auto dep = coupling(mu, nu, symmetric)) return Res{true, *dep};
    return std::nullopt;
  }

  /// Coupling discharge: the pair holds if it is a convex combination of
  /// pairs that are already proven or currently assumed, because weak
  /// bisimilarity is closed under convex combinations. Tries an exact
  /// state-to-state transportation first and then falls back to peeling
  /// whole states off against proportional slices of the other side.
  std::optional<std::size_t> coupling(const Distribution& mu,
                                      const Distribution& nu, bool symmetric) {
    if (mu.mass() != nu.mass()) return std::nullopt;
    Pair self{mu, nu};
    if (auto dep = dirac_coupling(mu, nu, symmetric, self)) return dep;
    std::size_t attempts = kPeelAttempts;
    return peel_coupling(mu, nu, symmetric, self, attempts);
  }

  /// Exact transportation coupling of (mu, nu) along Dirac pairs that are
  /// already proven or currently assumed.
  std::optional<std::size_t> dirac_coupling(const Distribution& mu,
                                            const Distribution& nu,
                                            bool symmetric, const Pair& self) {
    if (mu.mass() != nu.mass()) return std::nullopt;
    auto ls = mu.support();
    auto rs = nu.support();
    const std::size_t n = ls.size(), m = rs.size();
    std::vector<std::vector<bool>> allowed(n, std::vector<bool>(m, false));
    std::vector<std::vector<std::size_t>> dep(
        n, std::vector<std::size_t>(m, kNoDep));
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        if (ls[i] == rs[j]) {
          allowed[i][j] = true;
        } else {
          Pair p{Distribution::dirac(ls[i]), Distribution::dirac(rs[j])};
          Pair q{p.second, p.first};
          if (proven_.count(p) || (symmetric && proven_.count(q))) {
            allowed[i][j] = true;
          } else if (auto it = trail_index_.find(p); it != trail_index_.end()) {
            allowed[i][j] = true;
            dep[i][j] = it->second;
          } else if (symmetric &&
                     trail_index_.find(q) != trail_index_.end()) {
            allowed[i][j] = true;
            dep[i][j] = trail_index_.find(q)->second;
          } else if (!failed_.count(p) && !probe_unknown_.count(p) &&
                     !budget_ && !(p == self)) {
            // Decide the missing state pair on demand: there are at most
            // quadratically many, failures are cached, and a coupling over
            // decided state pairs discharges every convex mixture of them
            // without exploring it. The side validation runs on a small
            // allowance so an intractable state pair cannot starve the main
            // search; an inconclusive probe just leaves the edge out.
            if (auto r = probe_pair(p)) {
              allowed[i][j] = true;
              dep[i][j] = r->mindep;
            }
          }
        }
        any = any || allowed[i][j];
      }
    if (!any) return std::nullopt;
    // Edmonds-Karp on the transportation network, exact rationals.
    std::vector<Rational> supply, demand;
    for (const auto& s : ls) supply.push_back(mu.at(s));
    for (const auto& t : rs) demand.push_back(nu.at(t));
    std::vector<std::vector<Rational>> flow(n, std::vector<Rational>(m, 0));
    Rational shipped = 0;
    while (shipped < mu.mass()) {
      // BFS over residual graph: source -> left i (supply left) ->
      // right j (allowed, residual) -> sink (demand left); back edges
      // right -> left along positive flow.
      std::vector<int> from_left(m, -1);
      std::vector<bool> left_seen(n, false);
      std::vector<std::size_t> queue;
      for (std::size_t i = 0; i < n; ++i) {
        Rational used = 0;
        for (std::size_t j = 0; j < m; ++j) used += flow[i][j];
        if (used < supply[i]) {
          left_seen[i] = true;
          queue.push_back(i);
        }
      }
      int reach = -1;
      std::vector<int> from_right(n, -1);
      while (!queue.empty() && reach < 0) {
        std::size_t i = queue.back();
        queue.pop_back();
        for (std::size_t j = 0; j < m && reach < 0; ++j) {
          if (!allowed[i][j] || from_left[j] >= 0) continue;
          from_left[j] = static_cast<int>(i);
          Rational used = 0;
          for (std::size_t k = 0; k < n; ++k) used += flow[k][j];
          if (used < demand[j]) {
            reach = static_cast<int>(j);
            break;
          }
          for (std::size_t k = 0; k < n; ++k)
            if (flow[k][j] > 0 && !left_seen[k]) {
              left_seen[k] = true;
              from_right[k] = static_cast<int>(j);
              queue.push_back(k);
            }
        }
      }
      if (reach < 0) return std::nullopt;  // no full coupling
      // Trace the augmenting path backwards and compute its bottleneck.
      std::vector<std::pair<std::size_t, std::size_t>> fwd, bwd;
      std::size_t j = static_cast<std::size_t>(reach);
      while (true) {
        std::size_t i = static_cast<std::size_t>(from_left[j]);
        fwd.push_back({i, j});
        if (from_right[i] < 0) break;
        j = static_cast<std::size_t>(from_right[i]);
        bwd.push_back({i, j});
      }
      Rational bottleneck = mu.mass();
      {
        std::size_t jj = static_cast<std::size_t>(reach);
        Rational used = 0;
        for (std::size_t k = 0; k < n; ++k) used += flow[k][jj];
        bottleneck = demand[jj] - used;
        std::size_t ii = fwd.back().first;
        Rational used_i = 0;
        for (std::size_t kk = 0; kk < m; ++kk) used_i += flow[ii][kk];
        if (supply[ii] - used_i < bottleneck) bottleneck = supply[ii] - used_i;
        for (const auto& [i2, j2] : bwd)
          if (flow[i2][j2] < bottleneck) bottleneck = flow[i2][j2];
      }
      for (const auto& [i2, j2] : fwd) flow[i2][j2] += bottleneck;
      for (const auto& [i2, j2] : bwd) flow[i2][j2] -= bottleneck;
      shipped += bottleneck;
    }
    std::size_t mindep = kNoDep;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t jj = 0; jj < m; ++jj)
        if (flow[i][jj] > 0 && dep[i][jj] < mindep) mindep = dep[i][jj];
    return mindep;
  }

  /// Decides a candidate coupling piece from the caches, the trail, or a
  /// bounded probe. Returns the trail dependency of the proof, if any.
  std::optional<std::size_t> decide_piece(const Distribution& l,
                                          const Distribution& r,
                                          const Pair& self) {
    if (l == r) return kNoDep;
    Pair p{l, r};
    if (p == self) return std::nullopt;
    if (proven_.count(p)) return kNoDep;
    if (auto it = trail_index_.find(p); it != trail_index_.end())
      return it->second;
    if (failed_.count(p) || probe_unknown_.count(p) || budget_)
      return std::nullopt;
    if (auto res = probe_pair(p)) return res->mindep;
    return std::nullopt;
  }

  static constexpr std::size_t kPeelSupportLimit = 6;
  static constexpr std::size_t kPeelAttempts = 64;

  /// Fallback coupling for mixtures whose states relate to distributions
  /// rather than to single states: picks a state with no related partner
  /// state on the other side and tries to match its whole mass against a
  /// proportional slice of the other side (the restriction of the other
  /// distribution to a support subset, normalized). Peeling a state shrinks
  /// the mixture, so the remainder is retried recursively.
  std::optional<std::size_t> peel_coupling(const Distribution& mu,
                                           const Distribution& nu,
                                           bool symmetric, const Pair& self,
                                           std::size_t& attempts) {
    if (budget_ || attempts == 0) return std::nullopt;
    if (mu.empty() && nu.empty()) return kNoDep;
    // Look for a partnerless state on either side; without one the Dirac
    // transportation would have succeeded or the masses simply do not fit.
    auto partnerless = [&](const Distribution& from, const Distribution& to,
                           bool from_left) -> const StateId* {
      for (const auto& [s, p] : from.entries()) {
        (void)p;
        bool has = false;
        for (const auto& [t, q] : to.entries()) {
          (void)q;
          if (s == t) { has = true; break; }
          Pair d = from_left ? Pair{Distribution::dirac(s),
                                    Distribution::dirac(t)}
                             : Pair{Distribution::dirac(t),
                                    Distribution::dirac(s)};
          Pair rev{d.second, d.first};
          if (proven_.count(d) || trail_index_.count(d) ||
              (symmetric && (proven_.count(rev) || trail_index_.count(rev)))) {
            has = true;
            break;
          }
        }
        if (!has) return &s;
      }
      return nullptr;
    };
    for (bool from_left : {true, false}) {
      const Distribution& from = from_left ? mu : nu;
      const Distribution& to = from_left ? nu : mu;
      if (to.support_size() < 2 || to.support_size() > kPeelSupportLimit)
        continue;
      const StateId* s = partnerless(from, to, from_left);
      if (!s) continue;
      Rational need = from.at(*s);
      auto ts = to.support();
      const std::size_t m = ts.size();
      for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
        if (!(mask & (mask - 1))) continue;  // singletons: Dirac territory
        Rational avail = 0;
        for (std::size_t j = 0; j < m; ++j)
          if (mask & (std::size_t{1} << j)) avail += to.at(ts[j]);
        if (need > avail) continue;
        Distribution slice;
        for (std::size_t j = 0; j < m; ++j)
          if (mask & (std::size_t{1} << j))
            slice.add(ts[j], to.at(ts[j]) / avail);
        if (attempts == 0) return std::nullopt;
        --attempts;
        auto dep = from_left
                       ? decide_piece(Distribution::dirac(*s), slice, self)
                       : decide_piece(slice, Distribution::dirac(*s), self);
        if (!dep) continue;
        Distribution rest_from = from;
        rest_from.subtract(*s, need);
        Distribution rest_to = to;
        for (const auto& [t, q] : slice.entries())
          rest_to.subtract(t, q * need);
        const Distribution& rmu = from_left ? rest_from : rest_to;
        const Distribution& rnu = from_left ? rest_to : rest_from;
        std::optional<std::size_t> rec;
        if (auto d = dirac_coupling(rmu, rnu, symmetric, self))
          rec = d;
        else
          rec = peel_coupling(rmu, rnu, symmetric, self, attempts);
        if (rec) return std::min(*dep, std::min(*rec, kNoDep));
      }
    }
    return std::nullopt;
  }

  static constexpr std::size_t kProbeAllowance = 300;

  std::optional<Res> probe_pair(const Pair& p) {
    std::size_t saved_limit = pair_limit_;
    pair_limit_ = std::min(saved_limit,
                           stats_.pairs_explored + kProbeAllowance);
    Res r = validate_pair(p.first, p.second);
    pair_limit_ = saved_limit;
    if (budget_) {
      if (stats_.pairs_explored > pair_limit_ ||
          trail_.size() >= opt_.depth_budget)
        return std::nullopt;  // genuinely out of resources
      budget_ = false;
      probe_unknown_.insert(p);
      return std::nullopt;
    }
    if (!r.ok) return std::nullopt;
    return r;
  }

  std::size_t push_trail(const Pair& key) {
    std::size_t depth = trail_.size();
    if (depth >= opt_.depth_budget) budget_ = true;
    trail_.push_back(key);
    trail_index_[key] = depth;
    return depth;
  }

  /// Commits a completed validation: self-contained results are cached.
  Res finish(const Pair& key, std::size_t depth, bool ok, std::size_t mindep) {
    if (budget_) return {false, kNoDep};
    if (ok) {
      if (mindep >= depth) {
        proven_.insert(key);
        return {true, kNoDep};
      }
      return {true, mindep};
    }
    failed_.insert(key);
    return {false, kNoDep};
  }

  std::vector<std::pair<Distribution, Distribution>> witness_pairs(
      const Pair& root) const {
    std::vector<std::pair<Distribution, Distribution>> out{root};
    for (const auto& p : proven_)
      if (p != root) out.push_back(p);
    return out;
  }

  WeakAnalyzer& an_;
  CheckerOptions opt_;
  CheckStats stats_;
  bool budget_ = false;
  std::size_t pair_limit_ = 0;  // set from opt_.pair_budget at construction
  std::set<Pair> probe_unknown_;
  std::set<Pair> proven_, failed_;
  std::vector<Pair> trail_;
  std::map<Pair, std::size_t> trail_index_;
};

/// Weak bisimulation / simulation via challenges and bounded responses.
/// Challenges are strong indexed transitions (or weak ones when the
/// cross-check knob is set); responses are bounded weak indexed transitions.
class BisimChecker : public CheckerCore {
 public:
  BisimChecker(WeakAnalyzer& an, CheckerOptions opt, bool symmetric)
      : CheckerCore(an, std::move(opt)), symmetric_(symmetric) {}

  Verdict run(const Distribution& mu, const Distribution& nu) {
    Verdict v;
    v.bounds = opt_.bounds;
    FailureNode fail;
    Res r = validate(mu, nu, &fail);
    v.stats = stats_;
    if (budget_) {
      v.outcome = Outcome::ResourceLimit;
    } else if (r.ok) {
      v.outcome = Outcome::Equivalent;
      v.witness = witness_pairs({mu, nu});
    } else {
      v.outcome = Outcome::Distinguished;
      v.counterexample = std::move(fail);
    }
    return v;
  }

 private:
  Res validate_pair(const Distribution& l, const Distribution& r) override {
    return validate(l, r, nullptr);
  }

  Res validate(const Distribution& mu, const Distribution& nu,
               FailureNode* out) {
    if (auto pre = pre_validate(mu, nu, symmetric_)) {
      if (!pre->ok && out && !budget_) {
        out->mu = mu;
        out->nu = nu;
        out->reason = divergence_mismatch(mu, nu)
                          ? "divergence mismatch"
                          : "pair previously refuted";
      }
      return *pre;
    }
    Pair key{mu, nu};
    std::size_t depth = push_trail(key);
    TrailGuard guard{*this, key};
    std::size_t mindep = kNoDep;
    bool ok = attack(mu, nu, true, mindep, out);
    if (ok && symmetric_) ok = attack(nu, mu, false, mindep, out);
    return finish(key, depth, ok, mindep);
  }

  bool divergence_mismatch(const Distribution& mu, const Distribution& nu) {
    return opt_.divergence_sensitive &&
           an_.is_divergent(mu) != an_.is_divergent(nu);
  }

  /// Plays all challenges of `atk` against responder `def`. `from_left`
  /// tells which side of the pair the challenger is.
  bool attack(const Distribution& atk, const Distribution& def, bool from_left,
              std::size_t& mindep, FailureNode* out) {
    std::vector<Challenge> weak;
    if (opt_.weak_challenges) weak = an_.weak_challenges(atk);
    const std::vector<Challenge>& chs =
        opt_.weak_challenges ? weak : an_.challenges(atk);
    for (const Challenge& c : chs) {
      if (budget_) return false;
      ++stats_.challenges;
      std::vector<FailureNode> child_fails;
      auto accept = [&](const Distribution& cand) {
        if (budget_) return false;
        FailureNode child;
        Res r = from_left ? validate(c.result, cand, &child)
                          : validate(cand, c.result, &child);
        if (r.ok) {
          if (r.mindep < mindep) mindep = r.mindep;
          return true;
        }
        if (!budget_ && child_fails.size() < opt_.max_witness_children)
          child_fails.push_back(std::move(child));
        return false;
      };
      // First pass: accept only responses that discharge cost-free, so a
      // cheap correct response is found before any candidate drags the
      // search into a deep subtree.
      auto cheap_accept = [&](const Distribution& cand) {
        if (budget_) return false;
        auto r = from_left ? cheap_probe(c.result, cand, symmetric_)
                           : cheap_probe(cand, c.result, symmetric_);
        if (r && r->ok) {
          if (r->mindep < mindep) mindep = r->mindep;
          return true;
        }
        return false;
      };
      auto resp = an_.search_response(def, c.action, c.rho, cheap_accept);
      if (!resp) resp = an_.search_response(def, c.action, c.rho, accept);
      if (!resp && !budget_) {
        if (out) {
          out->mu = from_left ? atk : def;
          out->nu = from_left ? def : atk;
          out->side = from_left ? "lhs" : "rhs";
          out->challenge = c;
          out->reason = "no response within bounds";
          out->children = std::move(child_fails);
        }
        return false;
      }
      if (budget_) return false;
    }
    return true;
  }

  bool symmetric_;
};

/// Distribution-based weak bisimulation in the split-into-two style: the
/// challenger moves weakly by tau and splits into a group and a rest; the
/// responder must mirror the masses with related parts. Visible and rate
/// moves are matched through a separate action clause.
class EhzChecker : public CheckerCore {
 public:
  using CheckerCore::CheckerCore;

  Verdict run(const Distribution& mu, const Distribution& nu) {
    Verdict v;
    v.bounds = opt_.bounds;
    FailureNode fail;
    Res r = relate(mu, nu, &fail);
    v.stats = stats_;
    if (budget_)
      v.outcome = Outcome::ResourceLimit;
    else if (r.ok) {
      v.outcome = Outcome::Equivalent;
      v.witness = witness_pairs({mu, nu});
    } else {
      v.outcome = Outcome::Distinguished;
      v.counterexample = std::move(fail);
    }
    return v;
  }

 private:
  Res validate_pair(const Distribution& l, const Distribution& r) override {
    return validate(l, r, nullptr);
  }

  /// Sub-distributions relate exactly when their masses agree and their
  /// normalizations relate, so only full pairs are explored.
  Res relate(const Distribution& mu, const Distribution& nu,
             FailureNode* out) {
    if (mu.mass() != nu.mass()) {
      if (out) out->reason = "mass mismatch";
      return {false, kNoDep};
    }
    if (mu.mass() == 0) return {true, kNoDep};
    return validate(dist_normalize(mu), dist_normalize(nu), out);
  }

  std::optional<Res> relate_cheap(const Distribution& mu,
                                  const Distribution& nu) {
    if (mu.mass() != nu.mass()) return Res{false, kNoDep};
    if (mu.mass() == 0) return Res{true, kNoDep};
    return cheap_probe(dist_normalize(mu), dist_normalize(nu), true);
  }

  Res validate(const Distribution& mu, const Distribution& nu,
               FailureNode* out) {
    if (auto pre = pre_validate(mu, nu, true)) {
      if (!pre->ok && out && !budget_) {
        out->mu = mu;
        out->nu = nu;
        out->reason = "pair refuted";
      }
      return *pre;
    }
    Pair key{mu, nu};
    std::size_t depth = push_trail(key);
    TrailGuard guard{*this, key};
    std::size_t mindep = kNoDep;
    bool ok = attack(mu, nu, true, mindep, out) &&
              attack(nu, mu, false, mindep, out);
    return finish(key, depth, ok, mindep);
  }

  bool attack(const Distribution& atk, const Distribution& def, bool from_left,
              std::size_t& mindep, FailureNode* out) {
    // Action clause first: it is cheap and most refutations come from an
    // unanswerable step, which keeps the expensive splitting search shallow.
    for (const auto& a : an_.mlts().all_actions()) {
      for (const auto& stepped : lift_step(an_.mlts(), atk, a)) {
        if (budget_) return false;
        ++stats_.challenges;
        bool answered = false;
        auto candidates = a.is_tau() ? an_.tau_closure(def)
                                     : an_.lifted_weak(def, a);
        std::vector<const Distribution*> deferred;
        for (const auto& cand : candidates) {
          auto r = from_left ? relate_cheap(stepped, cand)
                             : relate_cheap(cand, stepped);
          if (!r) {
            deferred.push_back(&cand);
            continue;
          }
          if (r->ok) {
            if (r->mindep < mindep) mindep = r->mindep;
            answered = true;
            break;
          }
        }
        for (const Distribution* cand : deferred) {
          if (answered) break;
          Res r = from_left ? relate(stepped, *cand, nullptr)
                            : relate(*cand, stepped, nullptr);
          if (r.ok) {
            if (r.mindep < mindep) mindep = r.mindep;
            answered = true;
          }
        }
        if (budget_) return false;
        if (!answered) {
          if (out) {
            out->mu = from_left ? atk : def;
            out->nu = from_left ? def : atk;
            out->side = from_left ? "lhs" : "rhs";
            out->challenge = {a, Rational(1), stepped, false};
            out->reason = "no action response";
          }
          return false;
        }
      }
    }
    // Splitting clause: kappa = group + rest after a weak tau move.
    for (const auto& kappa : an_.tau_closure(atk)) {
      for (const auto& group : an_.splits(kappa)) {
        if (budget_) return false;
        ++stats_.challenges;
        Distribution rest = dist_minus(kappa, group);
        bool answered = false;
        struct Cand {
          Distribution vg, vs;
        };
        std::vector<Cand> deferred;
        for (const auto& lambda : an_.tau_closure(def)) {
          for (const auto& vg : an_.splits_with_mass(lambda, group.mass())) {
            Distribution vs = dist_minus(lambda, vg);
            auto ca = from_left ? relate_cheap(group, vg)
                                : relate_cheap(vg, group);
            if (ca && !ca->ok) continue;
            auto cb = from_left ? relate_cheap(rest, vs)
                                : relate_cheap(vs, rest);
            if (cb && !cb->ok) continue;
            if (ca && cb) {
              if (ca->mindep < mindep) mindep = ca->mindep;
              if (cb->mindep < mindep) mindep = cb->mindep;
              answered = true;
              break;
            }
            deferred.push_back({vg, std::move(vs)});
          }
          if (answered) break;
        }
        for (const auto& c : deferred) {
          if (answered) break;
          Res a = from_left ? relate(group, c.vg, nullptr)
                            : relate(c.vg, group, nullptr);
          if (!a.ok) continue;
          Res b = from_left ? relate(rest, c.vs, nullptr)
                            : relate(c.vs, rest, nullptr);
          if (!b.ok) continue;
          if (a.mindep < mindep) mindep = a.mindep;
          if (b.mindep < mindep) mindep = b.mindep;
          answered = true;
        }
        if (budget_) return false;
        if (!answered) {
          if (out) {
            out->mu = from_left ? atk : def;
            out->nu = from_left ? def : atk;
            out->side = from_left ? "lhs" : "rhs";
            out->challenge = {Action::tau(), group.mass(),
                              group.mass() > 0 ? dist_normalize(group) : group,
                              true};
            out->reason = "no split response";
          }
          return false;
        }
      }
    }
    return true;
  }
};

/// Distribution-based weak bisimulation in the decomposition style: a weak
/// move of the challenger together with a decomposition into weighted parts
/// must be mirrored by a weak move of the responder decomposed into parts
/// of the same weights, related one by one.
class DhChecker : public CheckerCore {
 public:
  using CheckerCore::CheckerCore;

  Verdict run(const Distribution& mu, const Distribution& nu) {
    Verdict v;
    v.bounds = opt_.bounds;
    FailureNode fail;
    Res r = validate(mu, nu, &fail);
    v.stats = stats_;
    if (budget_)
      v.outcome = Outcome::ResourceLimit;
    else if (r.ok) {
      v.outcome = Outcome::Equivalent;
      v.witness = witness_pairs({mu, nu});
    } else {
      v.outcome = Outcome::Distinguished;
      v.counterexample = std::move(fail);
    }
    return v;
  }

 private:
  Res validate(const Distribution& mu, const Distribution& nu,
               FailureNode* out) {
    if (auto pre = pre_validate(mu, nu, true)) {
      if (!pre->ok && out && !budget_) {
        out->mu = mu;
        out->nu = nu;
        out->reason = "pair refuted";
      }
      return *pre;
    }
    Pair key{mu, nu};
    std::size_t depth = push_trail(key);
    TrailGuard guard{*this, key};
    std::size_t mindep = kNoDep;
    bool ok = attack(mu, nu, true, mindep, out) &&
              attack(nu, mu, false, mindep, out);
    return finish(key, depth, ok, mindep);
  }

  Res validate_pair(const Distribution& l, const Distribution& r) override {
    return validate(l, r, nullptr);
  }

  /// Decompositions tried as challenges: the trivial one and the grouping
  /// of the support into the blocks of a set partition.
  static std::vector<std::vector<Distribution>> decompositions(
      const Distribution& mu) {
    std::vector<std::vector<Distribution>> out;
    auto supp = mu.support();
    std::vector<std::vector<std::vector<StateId>>> partitions;
    std::vector<std::vector<StateId>> current;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == supp.size()) {
        partitions.push_back(current);
        return;
      }
      // Index-based: deeper recursion grows `current`, which can reallocate
      // and would invalidate a range-for reference.
      for (std::size_t b = 0; b < current.size(); ++b) {
        current[b].push_back(supp[i]);
        rec(i + 1);
        current[b].pop_back();
      }
      current.push_back({supp[i]});
      rec(i + 1);
      current.pop_back();
    };
    rec(0);
    for (const auto& p : partitions) {
      std::vector<Distribution> parts;
      for (const auto& block : p) {
        Distribution d;
        for (const auto& s : block) d.add(s, mu.at(s));
        parts.push_back(std::move(d));
      }
      out.push_back(std::move(parts));
    }
    return out;
  }

  bool too_fine(const std::vector<Distribution>& parts) {
    const Integer cap = an_.denom_cap() * an_.denom_cap();
    for (const auto& p : parts) {
      if (p.mass() == 0) continue;
      for (const auto& [s, pr] : p.entries()) {
        Rational norm = pr / p.mass();
        if (boost::multiprecision::denominator(norm) > cap) return true;
      }
    }
    return false;
  }

  bool attack(const Distribution& atk, const Distribution& def, bool from_left,
              std::size_t& mindep, FailureNode* out) {
    std::vector<Action> actions{Action::tau()};
    for (const auto& a : an_.mlts().all_actions())
      if (!a.is_tau()) actions.push_back(a);
    // Strong steps with the trivial decomposition are a subset of the
    // challenges below; playing them first finds most refutations before
    // the decomposition search fans out.
    for (const auto& a : actions) {
      for (const auto& stepped : lift_step(an_.mlts(), atk, a)) {
        if (budget_) return false;
        ++stats_.challenges;
        bool answered = false;
        auto candidates =
            a.is_tau() ? an_.tau_closure(def) : an_.lifted_weak(def, a);
        std::vector<const Distribution*> deferred;
        for (const auto& cand : candidates) {
          auto r = from_left ? relate_cheap(stepped, cand)
                             : relate_cheap(cand, stepped);
          if (!r) {
            deferred.push_back(&cand);
            continue;
          }
          if (r->ok) {
            if (r->mindep < mindep) mindep = r->mindep;
            answered = true;
            break;
          }
        }
        for (const Distribution* cand : deferred) {
          if (answered) break;
          Res r = from_left ? relate(stepped, *cand) : relate(*cand, stepped);
          if (r.ok) {
            if (r.mindep < mindep) mindep = r.mindep;
            answered = true;
          }
        }
        if (budget_) return false;
        if (!answered) {
          if (out) {
            out->mu = from_left ? atk : def;
            out->nu = from_left ? def : atk;
            out->side = from_left ? "lhs" : "rhs";
            out->challenge = {a, Rational(1), stepped, false};
            out->reason = "no action response";
          }
          return false;
        }
      }
    }
    for (const auto& a : actions) {
      auto moved = a.is_tau() ? an_.tau_closure(atk) : an_.lifted_weak(atk, a);
      for (const auto& target : moved) {
        for (const auto& parts : decompositions(target)) {
          if (budget_) return false;
          // Blocks are explored through their normalizations; skipping
          // blocks whose normalized probabilities leave the split grid's
          // denominator range keeps the space of visited pairs finite, the
          // same truncation the splitting engines apply to their pieces.
          if (too_fine(parts)) continue;
          ++stats_.challenges;
          bool answered = false;
          auto candidates =
              a.is_tau() ? an_.tau_closure(def) : an_.lifted_weak(def, a);
          std::vector<const Distribution*> deferred;
          for (const auto& cand : candidates) {
            if (parts.size() == 1) {
              auto c = from_left ? relate_cheap(parts[0], cand)
                                 : relate_cheap(cand, parts[0]);
              if (!c) {
                deferred.push_back(&cand);
                continue;
              }
              if (c->ok) {
                if (c->mindep < mindep) mindep = c->mindep;
                answered = true;
                break;
              }
              continue;
            }
            if (match_parts(cand, parts, 0, from_left, mindep)) {
              answered = true;
              break;
            }
          }
          for (const Distribution* cand : deferred) {
            if (answered) break;
            if (match_parts(*cand, parts, 0, from_left, mindep))
              answered = true;
          }
          if (budget_) return false;
          if (!answered) {
            if (out) {
              out->mu = from_left ? atk : def;
              out->nu = from_left ? def : atk;
              out->side = from_left ? "lhs" : "rhs";
              out->challenge = {a, Rational(1), target, false};
              out->reason = "no decomposition response (" +
                            std::to_string(parts.size()) + " parts)";
            }
            return false;
          }
        }
      }
    }
    return true;
  }

  /// Recursively carves grid parts of the required masses out of `cand`,
  /// relating each to the corresponding challenger part.
  bool match_parts(const Distribution& cand,
                   const std::vector<Distribution>& parts, std::size_t i,
                   bool from_left, std::size_t& mindep) {
    if (budget_) return false;
    if (i == parts.size()) return cand.mass() == 0;
    if (i + 1 == parts.size()) {
      Res r = from_left ? relate(parts[i], cand) : relate(cand, parts[i]);
      if (!r.ok) return false;
      if (r.mindep < mindep) mindep = r.mindep;
      return true;
    }
    // Pieces that discharge cost-free are carved first; a piece that needs a
    // full exploration is only tried once no cheap piece leads anywhere.
    auto pieces = an_.splits_with_mass(cand, parts[i].mass());
    std::vector<const Distribution*> deferred;
    for (const auto& piece : pieces) {
      auto c = from_left ? relate_cheap(parts[i], piece)
                         : relate_cheap(piece, parts[i]);
      if (!c) {
        deferred.push_back(&piece);
        continue;
      }
      if (!c->ok) continue;
      std::size_t md = mindep;
      if (c->mindep < md) md = c->mindep;
      if (match_parts(dist_minus(cand, piece), parts, i + 1, from_left, md)) {
        mindep = md;
        return true;
      }
    }
    for (const Distribution* piece : deferred) {
      Res r = from_left ? relate(parts[i], *piece) : relate(*piece, parts[i]);
      if (!r.ok) continue;
      std::size_t md = mindep;
      if (r.mindep < md) md = r.mindep;
      if (match_parts(dist_minus(cand, *piece), parts, i + 1, from_left, md)) {
        mindep = md;
        return true;
      }
    }
    return false;
  }

  Res relate(const Distribution& mu, const Distribution& nu) {
    if (mu.mass() != nu.mass()) return {false, kNoDep};
    if (mu.mass() == 0) return {true, kNoDep};
    return validate(dist_normalize(mu), dist_normalize(nu), nullptr);
  }

  std::optional<Res> relate_cheap(const Distribution& mu,
                                  const Distribution& nu) {
    if (mu.mass() != nu.mass()) return Res{false, kNoDep};
    if (mu.mass() == 0) return Res{true, kNoDep};
    return cheap_probe(dist_normalize(mu), dist_normalize(nu), true);
  }
};

/// The bounded search is exact on tau-acyclic systems whose tau chains fit
/// in tau_depth rounds and whose probabilities live on the split grid.
inline bool exact_on_model(const Mlts& m, const SearchBounds& bounds) {
  std::map<StateId, int> depth;  // longest tau chain from the state; -1 = open
  std::function<std::optional<int>(const StateId&)> visit =
      [&](const StateId& s) -> std::optional<int> {
    auto it = depth.find(s);
    if (it != depth.end()) {
      if (it->second < 0) return std::nullopt;  // tau cycle
      return it->second;
    }
    depth[s] = -1;
    int best = 0;
    for (const auto* t : m.outgoing(s, Action::tau()))
      for (const auto& [u, p] : t->target.entries()) {
        auto d = visit(u);
        if (!d) return std::nullopt;
        best = std::max(best, *d + 1);
      }
    depth[s] = best;
    return best;
  };
  for (const auto& s : m.states) {
    auto d = visit(s);
    if (!d || *d > bounds.tau_depth) return false;
  }
  for (const auto& t : m.trans)
    for (const auto& [u, p] : t.target.entries())
      if (boost::multiprecision::denominator(p) > bounds.grid_denominator)
        return false;
  return true;
}

/// Stamps the caveat and wall time onto a finished verdict.
inline Verdict& finalize(Verdict& v, const Mlts& m, const CheckerOptions& opt,
                         std::chrono::steady_clock::time_point start) {
  v.bounds = opt.bounds;
  v.caveat = exact_on_model(m, opt.bounds) ? "ExactOnCorpusClass"
                                           : "BoundedSearch";
  v.stats.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  return v;
}

}  // namespace detail

inline Verdict check_weak_bisim(const Mlts& m, const Distribution& mu,
                                const Distribution& nu,
                                CheckerOptions opt = {}) {
  auto start = std::chrono::steady_clock::now();
  WeakAnalyzer an(m, opt.bounds);
  Verdict v = detail::BisimChecker(an, opt, true).run(mu, nu);
  return detail::finalize(v, m, opt, start);
}

inline Verdict check_weak_sim(const Mlts& m, const Distribution& mu,
                              const Distribution& nu, CheckerOptions opt = {}) {
  auto start = std::chrono::steady_clock::now();
  WeakAnalyzer an(m, opt.bounds);
  Verdict v = detail::BisimChecker(an, opt, false).run(mu, nu);
  return detail::finalize(v, m, opt, start);
}

/// Kernel of the weak simulation preorder: simulation in both directions.
inline Verdict check_kernel(const Mlts& m, const Distribution& mu,
                            const Distribution& nu, CheckerOptions opt = {}) {
  auto start = std::chrono::steady_clock::now();
  WeakAnalyzer an(m, opt.bounds);
  Verdict fwd = detail::BisimChecker(an, opt, false).run(mu, nu);
  Verdict bwd = detail::BisimChecker(an, opt, false).run(nu, mu);
  Verdict v = fwd;
  v.stats.pairs_explored += bwd.stats.pairs_explored;
  v.stats.challenges += bwd.stats.challenges;
  if (fwd.outcome == Outcome::ResourceLimit ||
      bwd.outcome == Outcome::ResourceLimit) {
    v.outcome = Outcome::ResourceLimit;
    v.counterexample.reset();
    v.witness.clear();
  } else if (fwd.outcome == Outcome::Distinguished) {
    // keep fwd verdict
  } else if (bwd.outcome == Outcome::Distinguished) {
    v.outcome = Outcome::Distinguished;
    v.counterexample = bwd.counterexample;
    v.witness.clear();
  } else {
    v.witness.insert(v.witness.end(), bwd.witness.begin(), bwd.witness.end());
  }
  return detail::finalize(v, m, opt, start);
}

/// Accepts sub-distributions of equal mass; normalizes before dispatch.
inline Verdict check_ehz(const Mlts& m, const Distribution& mu,
                         const Distribution& nu, CheckerOptions opt = {}) {
  auto start = std::chrono::steady_clock::now();
  WeakAnalyzer an(m, opt.bounds);
  Verdict v;
  if (mu.mass() != nu.mass()) {
    v.outcome = Outcome::Distinguished;
    FailureNode node;
    node.mu = mu;
    node.nu = nu;
    node.reason = "mass mismatch";
    v.counterexample = std::move(node);
  } else if (mu.mass() == 0) {
    v.outcome = Outcome::Equivalent;
  } else {
    v = detail::EhzChecker(an, opt).run(dist_normalize(mu),
                                        dist_normalize(nu));
  }
  return detail::finalize(v, m, opt, start);
}

inline Verdict check_dh(const Mlts& m, const Distribution& mu,
                        const Distribution& nu, CheckerOptions opt = {}) {
  auto start = std::chrono::steady_clock::now();
  WeakAnalyzer an(m, opt.bounds);
  Verdict v = detail::DhChecker(an, opt).run(mu, nu);
  return detail::finalize(v, m, opt, start);
}

/// Builds the requested semantics of the automaton and dispatches to the
/// matching checker. mu and nu must live on base states of the automaton.
inline Verdict check_ma(const MarkovAutomaton& ma, SemanticsKind semantics,
                        RelationKind relation, const Distribution& mu,
                        const Distribution& nu, CheckerOptions opt = {}) {
  for (const auto& d : {mu, nu})
    for (const auto& [s, p] : d.entries()) {
      if (s.kind != StateId::Kind::Base)
        throw ModelError("check_ma: distributions must use base states");
      ma.require_state(s, "check_ma");
    }
  Mlts m = build_semantics(ma, semantics);
  switch (relation) {
    case RelationKind::Bisim: return check_weak_bisim(m, mu, nu, opt);
    case RelationKind::Sim: return check_weak_sim(m, mu, nu, opt);
    case RelationKind::Kernel: return check_kernel(m, mu, nu, opt);
    case RelationKind::Ehz: return check_ehz(m, mu, nu, opt);
    case RelationKind::Dh: return check_dh(m, mu, nu, opt);
  }
  throw std::logic_error("unreachable");
}

}  // namespace maeq

#endif
