#pragma once

// Scalar types shared by every module: unbounded integers for set elements and
// an extended-precision float for logarithms of those integers.

#include <complex>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace twisted {

using BigInt = boost::multiprecision::cpp_int;
using ExtFloat = boost::multiprecision::cpp_bin_float_50;
using Complex = std::complex<double>;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Largest integer every double represents exactly.
inline const BigInt kNativeLimit = BigInt(1) << 53;

ExtFloat ext_two_pi();

/// Natural log of n >= 1, accurate to ~2^-150 relative.
ExtFloat ext_log(const BigInt& n);

BigInt ceil_to_int(const ExtFloat& x);
BigInt floor_to_int(const ExtFloat& x);
BigInt round_to_int(const ExtFloat& x);

/// Parses a nonnegative decimal integer; rejects signs, blanks, and leading junk.
BigInt parse_decimal(const std::string& text);
std::string to_decimal(const BigInt& n);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(const std::string& text);

/// Value of n as a double; +inf beyond the double range.
double to_double(const BigInt& n);

}  // namespace twisted
