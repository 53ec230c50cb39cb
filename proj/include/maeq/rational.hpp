#ifndef MAEQ_RATIONAL_HPP
#define MAEQ_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <sstream>
#include <string>

namespace maeq {

/// Exact rational number. All probabilities and rates in the library are
/// rationals; no floating point is used anywhere a verdict depends on.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

/// Parses "p/q" or "p" with optional sign. Returns nullopt on malformed
/// input or zero denominator.
inline std::optional<Rational> parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      if (text.empty()) return std::nullopt;
      return Rational(Integer(text));
    }
    std::string num = text.substr(0, slash);
    std::string den = text.substr(slash + 1);
    if (num.empty() || den.empty()) return std::nullopt;
    Integer d(den);
    if (d == 0) return std::nullopt;
    return Rational(Integer(num), d);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

}  // namespace maeq

#endif
