#ifndef MAEQ_VERDICT_JSON_HPP
#define MAEQ_VERDICT_JSON_HPP

#include <string>

#include <json.hpp>

#include "maeq/equivalence.hpp"
#include "maeq/semantics.hpp"

namespace maeq {

inline nlohmann::json dist_to_json(const Distribution& d) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [s, p] : d.entries()) j[s.display()] = to_string(p);
  return j;
}

inline nlohmann::json challenge_to_json(const Challenge& c) {
  return {{"action", c.action.display()},
          {"rho", to_string(c.rho)},
          {"result", dist_to_json(c.result)},
          {"pure_split", c.pure_split}};
}

inline nlohmann::json failure_to_json(const FailureNode& f) {
  nlohmann::json j = {{"lhs", dist_to_json(f.mu)},
                      {"rhs", dist_to_json(f.nu)},
                      {"challenger", f.side},
                      {"challenge", challenge_to_json(f.challenge)},
                      {"reason", f.reason}};
  if (!f.children.empty()) {
    nlohmann::json kids = nlohmann::json::array();
    for (const auto& c : f.children) kids.push_back(failure_to_json(c));
    j["failed_responses"] = std::move(kids);
  }
  return j;
}

inline nlohmann::json verdict_to_json(const Verdict& v, RelationKind relation,
                                      const std::string& semantics) {
  nlohmann::json j = {
      {"outcome", to_string(v.outcome)},
      {"relation", to_string(relation)},
      {"semantics", semantics},
      {"bounds",
       {{"grid_denominator", v.bounds.grid_denominator},
        {"tau_depth", v.bounds.tau_depth}}},
      {"caveat", v.caveat},
      {"stats",
       {{"pairs_explored", v.stats.pairs_explored},
        {"challenges", v.stats.challenges},
        {"wall_time_ms", v.stats.wall_time_ms}}}};
  if (v.outcome == Outcome::Equivalent) {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& [mu, nu] : v.witness)
      w.push_back({{"lhs", dist_to_json(mu)}, {"rhs", dist_to_json(nu)}});
    j["witness"] = std::move(w);
  } else if (v.counterexample) {
    j["counterexample"] = failure_to_json(*v.counterexample);
  }
  return j;
}

}  // namespace maeq

#endif
