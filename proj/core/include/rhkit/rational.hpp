#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace rhkit {

// Exact rational scalar used wherever sign decisions must not go through
// floating point (filtration weights, exact-mode linear algebra).
using Rational = boost::multiprecision::cpp_rational;

inline std::string rational_to_string(const Rational& r) { return r.str(); }

// Accepts "p", "-p/q" and similar integer-ratio strings.
inline Rational rational_from_string(const std::string& s) {
  return Rational(s);
}

inline double rational_to_double(const Rational& r) {
  return r.convert_to<double>();
}

}  // namespace rhkit
