#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>

namespace lerw {

using Rational = mpq_class;

// "num/den", or just "num" when the denominator is 1.
std::string to_string(const Rational& q);
// Always "num/den", as used in the JSON reports.
std::string to_fraction(const Rational& q);
Rational parse_rational(const std::string& s);

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace lerw
