#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace lodegp {

// Exact arbitrary-precision rational. All symbolic-matrix arithmetic runs on
// this type; conversion to double happens once, at kernel-build time.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// "p" for integers, "p/q" otherwise; q > 0.
std::string rational_str(const Rational& r);

// Accepts "p", "-p", "p/q". Throws std::invalid_argument on anything else.
Rational rational_parse(const std::string& s);

}  // namespace lodegp
