#ifndef MAEQ_DOT_HPP
#define MAEQ_DOT_HPP

#include <map>
#include <sstream>
#include <string>

#include "maeq/model.hpp"

namespace maeq {

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

/// Renders a transition system in Graphviz format. States are circles
/// (pair states shown as "[s,t]"); each transition becomes a solid arrow
/// labeled with the action or rate into a small branch point, from which
/// dashed arrows carry the branch probabilities. Dirac transitions skip the
/// branch point and go straight to the target.
inline std::string to_dot(const Mlts& m, const std::string& graph_name = "mlts") {
  std::ostringstream os;
  os << "digraph \"" << detail::dot_escape(graph_name) << "\" {\n";
  os << "  rankdir=TB;\n";
  os << "  node [shape=circle, fontsize=11];\n";
  std::map<StateId, std::string> id;
  int n = 0;
  for (const auto& s : m.states) {
    std::string node = "s" + std::to_string(n++);
    id[s] = node;
    os << "  " << node << " [label=\"" << detail::dot_escape(s.display())
       << "\"];\n";
  }
  int branch = 0;
  for (const auto& t : m.trans) {
    const std::string& src = id.at(t.source);
    const std::string label = detail::dot_escape(t.action.display());
    if (t.target.support().size() == 1) {
      os << "  " << src << " -> " << id.at(t.target.support().front())
         << " [label=\"" << label << "\"];\n";
      continue;
    }
    std::string point = "p" + std::to_string(branch++);
    os << "  " << point << " [shape=point, width=0.06];\n";
    os << "  " << src << " -> " << point << " [label=\"" << label
       << "\", arrowhead=none];\n";
    for (const auto& [target, p] : t.target.entries())
      os << "  " << point << " -> " << id.at(target) << " [label=\""
         << to_string(p) << "\", style=dashed];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace maeq

#endif
