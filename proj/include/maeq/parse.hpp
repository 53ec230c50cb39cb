#ifndef MAEQ_PARSE_HPP
#define MAEQ_PARSE_HPP

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "maeq/model.hpp"

namespace maeq {

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(int l, int c, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ", column " +
                           std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

namespace detail {

/// Cursor over one line of the model text.
class LineScanner {
 public:
  LineScanner(std::string text, int line) : text_(std::move(text)), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line_, static_cast<int>(pos_) + 1, msg);
  }

  void expect(const std::string& token) {
    skip_ws();
    if (text_.compare(pos_, token.size(), token) != 0)
      fail("expected '" + token + "'");
    pos_ += token.size();
  }

  bool try_consume(const std::string& token) {
    skip_ws();
    if (text_.compare(pos_, token.size(), token) != 0) return false;
    pos_ += token.size();
    return true;
  }

  /// Identifier: letters, digits, _, ', |, [, ], comma-free.
  std::string identifier() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' ||
          c == '|' || c == '[' || c == ']' || c == '.')
        ++pos_;
      else
        break;
    }
    if (pos_ == start) fail("expected identifier");
    return text_.substr(start, pos_ - start);
  }

  Rational rational() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '/'))
      ++pos_;
    auto q = parse_rational(text_.substr(start, pos_ - start));
    if (!q) fail("expected rational number");
    return *q;
  }

  int line() const { return line_; }
  int column() const { return static_cast<int>(pos_) + 1; }

 private:
  std::string text_;
  int line_;
  std::size_t pos_ = 0;
};

inline Distribution parse_dist_body(LineScanner& sc) {
  // Caller consumed '{'. Grammar: p ':' state (',' p ':' state)* '}'
  Distribution d;
  while (true) {
    Rational p = sc.rational();
    sc.expect(":");
    std::string state = sc.identifier();
    if (p <= 0) sc.fail("probability must be positive");
    try {
      d.add(StateId::base(state), p);
    } catch (const std::invalid_argument& e) {
      sc.fail(e.what());
    }
    if (sc.try_consume("}")) break;
    sc.expect(",");
  }
  return d;
}

}  // namespace detail

/// Parses a distribution literal such as `{1/2:s1,1/2:s2}` or a bare state
/// name (meaning the Dirac distribution on it).
inline Distribution parse_dist_literal(const std::string& text) {
  detail::LineScanner sc(text, 1);
  Distribution d;
  if (sc.try_consume("{")) {
    d = detail::parse_dist_body(sc);
  } else {
    d = Distribution::dirac(StateId::base(sc.identifier()));
  }
  if (!sc.at_end()) sc.fail("trailing input after distribution");
  if (!d.is_full()) sc.fail("distribution literal must have total mass 1");
  return d;
}

/// Parses the line-oriented model format:
///
///   ma <name>
///   states: s, t1, t2
///   init: s
///   ptrans: s --a--> { 1/2: t1, 1/2: t2 }
///   mtrans: s --3/2--> t1
///
/// `tau` names the internal action; `#` starts a comment. The returned
/// automaton is validated.
inline MarkovAutomaton parse_model(const std::string& text) {
  MarkovAutomaton ma;
  bool saw_header = false, saw_states = false, saw_init = false;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    detail::LineScanner sc(raw, lineno);
    if (sc.at_end()) continue;
    if (!saw_header) {
      sc.expect("ma");
      ma.name = sc.identifier();
      saw_header = true;
    } else if (sc.try_consume("states:")) {
      do {
        ma.states.insert(StateId::base(sc.identifier()));
      } while (sc.try_consume(","));
      saw_states = true;
    } else if (sc.try_consume("init:")) {
      ma.init = StateId::base(sc.identifier());
      saw_init = true;
    } else if (sc.try_consume("ptrans:")) {
      std::string src = sc.identifier();
      sc.expect("--");
      std::string label = sc.identifier();
      sc.expect("-->");
      Distribution d;
      if (sc.try_consume("{"))
        d = detail::parse_dist_body(sc);
      else
        d = Distribution::dirac(StateId::base(sc.identifier()));
      if (!d.is_full())
        sc.fail("distribution mass " + to_string(d.mass()) + " != 1");
      Action a = (label == "tau") ? Action::tau() : Action::visible(label);
      if (a.is_visible()) ma.actions.insert(label);
      ma.ptrans.push_back({StateId::base(src), std::move(a), std::move(d)});
    } else if (sc.try_consume("mtrans:")) {
      std::string src = sc.identifier();
      sc.expect("--");
      Rational rate = sc.rational();
      sc.expect("-->");
      std::string dst = sc.identifier();
      if (rate <= 0) sc.fail("nonpositive rate");
      ma.mtrans.push_back({StateId::base(src), rate, StateId::base(dst)});
    } else {
      sc.fail("unknown directive");
    }
    if (!sc.at_end()) sc.fail("trailing input");
  }
  if (!saw_header) throw ParseError(1, 1, "missing 'ma <name>' header");
  if (!saw_states) throw ParseError(lineno, 1, "missing 'states:' line");
  if (!saw_init) throw ParseError(lineno, 1, "missing 'init:' line");
  try {
    ma.validate();
  } catch (const ModelError& e) {
    throw ParseError(lineno, 1, e.what());
  }
  return ma;
}

inline std::string serialize_dist(const Distribution& d) {
  std::ostringstream os;
  os << "{ ";
  bool first = true;
  for (const auto& [s, p] : d.entries()) {
    if (!first) os << ", ";
    first = false;
    os << p << ": " << s.display();
  }
  os << " }";
  return os.str();
}

inline std::string serialize_model(const MarkovAutomaton& ma) {
  std::ostringstream os;
  os << "ma " << ma.name << "\n";
  os << "states:";
  bool first = true;
  for (const auto& s : ma.states) {
    os << (first ? " " : ", ") << s.display();
    first = false;
  }
  os << "\n";
  os << "init: " << ma.init.display() << "\n";
  for (const auto& t : ma.ptrans)
    os << "ptrans: " << t.source.display() << " --" << t.action.display()
       << "--> " << serialize_dist(t.target) << "\n";
  for (const auto& t : ma.mtrans)
    os << "mtrans: " << t.source.display() << " --" << to_string(t.rate)
       << "--> " << t.target.display() << "\n";
  return os.str();
}

}  // namespace maeq

#endif
