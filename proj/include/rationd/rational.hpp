#pragma once

#include <gmpxx.h>

#include <cctype>
#include <string>
#include <string_view>

#include "rationd/error.hpp"

namespace rationd {

using Integer = mpz_class;
using Rational = mpq_class;

// Canonical text form: "p/q" reduced with q > 0, or "p" when q == 1.
inline std::string to_string(const Rational& value) { return value.get_str(); }

inline std::string to_string(const Integer& value) { return value.get_str(); }

/// Parses "p/q" or "p". Rejects anything that is not already canonical.
inline Rational parse_rational(std::string_view text) {
  auto bad = [&](const char* why) -> Rational {
    fail(ErrorKind::ParseError,
         "invalid rational \"" + std::string(text) + "\": " + why);
  };
  if (text.empty()) return bad("empty");
  const auto slash = text.find('/');
  auto is_int = [](std::string_view s, bool allow_sign) {
    if (!s.empty() && allow_sign && s.front() == '-') s.remove_prefix(1);
    if (s.empty()) return false;
    for (char ch : s)
      if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    return true;
  };
  const auto num = text.substr(0, slash);
  if (!is_int(num, true)) return bad("numerator is not an integer");
  Rational value;
  if (slash == std::string_view::npos) {
    value = Rational(Integer(std::string(num)));
  } else {
    const auto den = text.substr(slash + 1);
    if (!is_int(den, false)) return bad("denominator is not a positive integer");
    const Integer d{std::string(den)};
    if (d == 0) return bad("zero denominator");
    value = Rational(Integer(std::string(num)), d);
    value.canonicalize();
  }
  if (to_string(value) != text) return bad("not in canonical reduced form");
  return value;
}

inline Integer lcm(const Integer& a, const Integer& b) {
  Integer out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

inline Integer pow(const Integer& base, unsigned long exponent) {
  Integer out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exponent);
  return out;
}

}  // namespace rationd
