#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "hogsos/error.hpp"

namespace hogsos {

// Exact rational weights. All semantic arithmetic goes through this type;
// floating point never enters behavior comparisons.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational rat(long num, long den = 1) {
  if (den == 0) fail(errc::malformed_distribution, "zero denominator");
  return Rational(num, den);
}

inline Rational pow2_inv(int k) {
  // 2^-k for k >= 0
  BigInt d = 1;
  d <<= k;
  return Rational(1, d);
}

inline std::string rational_str(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(s));
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    if (den == 0) fail(errc::malformed_distribution, "zero denominator in '" + s + "'");
    return Rational(num, den);
  } catch (const std::exception&) {
    fail(errc::parse_error, "bad rational '" + s + "'");
  }
}

}  // namespace hogsos
