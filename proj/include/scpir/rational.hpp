#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace scpir {

// Exact arithmetic everywhere: costs, storage fractions and bound values are
// rationals over arbitrary-precision integers, kept in canonical reduced form
// with a positive denominator. Floating point appears only in CSV/report
// convenience columns.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt den(const Rational& r) { return boost::multiprecision::denominator(r); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) { return r.str(); }
inline std::string to_string(const BigInt& i) { return i.str(); }

// C(n, k) as an exact big integer; 0 when k < 0 or k > n.
BigInt binomial(int n, int k);

// n * (n-1) * ... * (n-k+1); the number of injections of k slots into n values.
BigInt falling_factorial(int n, int k);

}  // namespace scpir
